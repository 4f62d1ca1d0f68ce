#pragma once

#include <span>
#include <vector>

#include "qdopt/gaussian.hpp"
#include "qdopt/measurement.hpp"

namespace qdopt {

// Finite hypothesis family {rho_j, prior p_j} with penalty cost(j, k) for
// deciding k when the truth is j. Minimum-error discrimination uses
// cost = -delta_{jk}.
struct HypothesisEnsemble {
    std::vector<DensityOperator> states;
    std::vector<double> priors;
    Eigen::MatrixXd cost;

    std::size_t count() const { return states.size(); }
    FockDim dim() const { return states.at(0).dim(); }
};

// Throws unless priors sum to 1 within 1e-12, all states share a dim, and the
// cost matrix is finite with one row per hypothesis.
void validate(const HypothesisEnsemble& ensemble);

HypothesisEnsemble make_min_error_ensemble(std::vector<DensityOperator> states,
                                           std::vector<double> priors);

// R_k = sum_j cost(j, k) p_j rho_j, the posterior risk operator per decision.
std::vector<TruncatedOperator> posterior_risk_operators(const HypothesisEnsemble& ensemble);

// Tr sum_k R_k w_k E_k; equals -(success probability) for minimum-error cost.
double average_risk(const DiscretePOVM& povm, const HypothesisEnsemble& ensemble);

// Stationarity and nonnegativity certificate for a decision strategy:
// Lambda = sym sum_k R_k w_k E_k, residuals ||(R_k - Lambda) w_k E_k||_max,
// and the spectra of B_k = R_k - Lambda. A failing certificate is a result,
// not an error.
struct OptimalityReport {
    TruncatedOperator lambda_op;
    double lambda_hermiticity;                  // max |Lambda - Lambda†| before symmetrizing
    std::vector<double> stationarity_residuals;
    std::vector<double> min_eig_b;
    double tol;
    bool stationarity_pass;   // every residual <= tol and hermiticity <= tol
    bool nonnegativity_pass;  // every min eig B_k >= -tol
};

OptimalityReport optimality_check(const DiscretePOVM& povm, const HypothesisEnsemble& ensemble,
                                  double tol);

struct MinErrorSolution {
    DiscretePOVM povm;
    OptimalityReport report;
    std::vector<double> risk_trace;  // average risk per iterate, starting at the uniform POVM
    int iterations;
    bool converged;
};

// Fixed-point iteration P_k <- T^{-1/2) G_k P_k G_k T^{-1/2} with G_k = p_k rho_k
// and T = sum G_k P_k G_k (pseudo-inverse square root below a 1e-12 relative
// eigenvalue cutoff). Stops once successive risks differ by less than tol.
// The returned POVM is completed on the kernel of T so it resolves identity.
MinErrorSolution optimize_min_error(const HypothesisEnsemble& ensemble, int max_iters, double tol);

struct HelstromResult {
    double p_err;         // 1/2 (1 - sum |eig(p1 rho1 - p0 rho0)|)
    double p_err_direct;  // p0 Tr(rho0 P_1) + p1 Tr(rho1 P_0), consistency-checked
    DiscretePOVM povm;    // projective {P_0, P_1}; kernel of the difference goes to outcome 0
};

HelstromResult helstrom_binary(double p0, const DensityOperator& rho0, double p1,
                               const DensityOperator& rho1);

// Maximum-likelihood certificate for coherent quasi-measurement of the
// displaced thermal family: per grid point the eigen-relation residual
// ||rho(beta)|beta> - L^-1 |beta>|| and the minimum eigenvalue of
// B(beta) = L^-1 (1 - :exp{-(b-beta)† L^-1 (b-beta)}:).
struct MlCertificateEntry {
    Complex beta;
    double eigen_residual;
    double min_eig_b;
};

struct MlCertificate {
    double noise_l;
    int n_max;
    double tol;
    std::vector<MlCertificateEntry> entries;
    double worst_eigen_residual;
    double worst_min_eig_b;
    bool pass;
};

MlCertificate coherent_ml_certificate(double L, std::span<const Complex> beta_grid, FockDim dim,
                                      double tol);

}  // namespace qdopt
