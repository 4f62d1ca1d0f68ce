#pragma once

#include <variant>
#include <vector>

#include "qdopt/fock.hpp"
#include "qdopt/gaussian.hpp"

namespace qdopt {

// Outcome label: hypothesis index or complex-plane grid point.
using OutcomeLabel = std::variant<int, Complex>;

// Finite operator probability measure: PSD elements whose weighted sum
// resolves the identity up to a reported per-level deficit. Rank-one elements
// (grid POVMs, measurement-vector families) are stored as factor columns,
// element k = f_k f_k†; general elements as dense matrices. Weights carry the
// d mu cell masses for grid POVMs and are 1 for intrinsically discrete POVMs.
class DiscretePOVM {
public:
    DiscretePOVM(FockDim dim, Eigen::MatrixXcd rank_one_factors,
                 std::vector<OutcomeLabel> labels, std::vector<double> weights);
    DiscretePOVM(FockDim dim, std::vector<Eigen::MatrixXcd> elements,
                 std::vector<OutcomeLabel> labels, std::vector<double> weights);

    FockDim dim() const { return dim_; }
    std::size_t size() const { return labels_.size(); }
    std::size_t rank_one_count() const { return std::size_t(factors_.cols()); }
    const Eigen::MatrixXcd& factors() const { return factors_; }
    const std::vector<Eigen::MatrixXcd>& dense_elements() const { return dense_; }

    // Element k as a materialized matrix (outer product for rank-one storage).
    Eigen::MatrixXcd element(std::size_t k) const;
    const std::vector<OutcomeLabel>& labels() const { return labels_; }
    const std::vector<double>& weights() const { return weights_; }

    void append_dense(Eigen::MatrixXcd element, OutcomeLabel label, double weight);

    // Sum_k weight_k element_k.
    TruncatedOperator weighted_sum() const;

    // Minimum eigenvalue across elements. Rank-one elements are PSD by
    // construction and contribute 0 without an eigensolve; dense elements are
    // diagonalized.
    double min_element_eigenvalue() const;

private:
    FockDim dim_;
    Eigen::MatrixXcd factors_;             // d x rank_one_count
    std::vector<Eigen::MatrixXcd> dense_;  // trailing outcomes
    std::vector<OutcomeLabel> labels_;
    std::vector<double> weights_;
};

struct HeterodyneGrid {
    double extent = 0.0;
    double step = 0.0;
    std::vector<Complex> points;  // square lattice (j step, k step), |Re|,|Im| <= extent
    double cell_measure = 0.0;    // step^2 / pi, the d mu mass per cell
};

HeterodyneGrid make_heterodyne_grid(double extent, double step);

// Midpoint discretization of the coherent projector measure |beta><beta| d mu:
// rank-one elements at the lattice points with weights step^2/pi. Requires
// step <= 0.5 and extent >= 2; rejects grids whose level-0 identity deficit
// exceeds 0.05.
DiscretePOVM heterodyne_grid_povm(double extent, double step, FockDim dim);

struct IdentityResolutionReport {
    Eigen::VectorXd level_deficit;  // 1 - <n|Sum|n>
    double max_offdiagonal;         // max_{m != n} |<m|Sum|n>|
    int n_eff;                      // largest n with deficit <= 1e-3 at all levels <= n; -1 if none
};

IdentityResolutionReport identity_resolution_report(const DiscretePOVM& povm);

struct OutcomeDistribution {
    std::vector<double> p;         // weight_k Tr(element_k rho), clipped at 0
    double total;                  // sum of clipped p
    double identity_deficit_felt;  // 1 - sum of raw p
    int clipped_count;             // outcomes with raw p in [-1e-10, 0)
    double clipped_mass;           // total negative mass removed
};

// P(k) = weight_k Tr(element_k rho). Raw values below -1e-10 are an error;
// values in [-1e-10, 0) are clipped to 0 and counted.
OutcomeDistribution outcome_distribution(const DiscretePOVM& povm, const DensityOperator& rho);

// Appends E_rem = I - Sum_k w_k E_k as a dense outcome (label -1, weight 1)
// when E_rem is PSD within psd_tol; returns false and leaves the POVM
// untouched otherwise. Off by default everywhere: forced completion would
// contaminate optimality certificates.
bool complete_with_remainder(DiscretePOVM& povm, double psd_tol = 1e-8);

}  // namespace qdopt
