#include "qdopt/measurement.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qdopt/parallel.hpp"

namespace qdopt {

DiscretePOVM::DiscretePOVM(FockDim dim, Eigen::MatrixXcd rank_one_factors,
                           std::vector<OutcomeLabel> labels, std::vector<double> weights)
    : dim_(dim), factors_(std::move(rank_one_factors)), labels_(std::move(labels)),
      weights_(std::move(weights)) {
    if (factors_.rows() != dim_.size())
        throw std::invalid_argument("DiscretePOVM: factor rows must equal dim");
    if (labels_.empty() || std::size_t(factors_.cols()) != labels_.size() ||
        labels_.size() != weights_.size())
        throw std::invalid_argument("DiscretePOVM: need >= 1 outcome and matching label/weight counts");
    for (double w : weights_)
        if (!(w > 0.0)) throw std::invalid_argument("DiscretePOVM: weights must be positive");
}

DiscretePOVM::DiscretePOVM(FockDim dim, std::vector<Eigen::MatrixXcd> elements,
                           std::vector<OutcomeLabel> labels, std::vector<double> weights)
    : dim_(dim), factors_(dim.size(), 0), dense_(std::move(elements)), labels_(std::move(labels)),
      weights_(std::move(weights)) {
    if (labels_.empty() || dense_.size() != labels_.size() || labels_.size() != weights_.size())
        throw std::invalid_argument("DiscretePOVM: need >= 1 outcome and matching label/weight counts");
    for (const auto& e : dense_)
        if (e.rows() != dim_.size() || e.cols() != dim_.size())
            throw std::invalid_argument("DiscretePOVM: element shape mismatch");
    for (double w : weights_)
        if (!(w > 0.0)) throw std::invalid_argument("DiscretePOVM: weights must be positive");
}

Eigen::MatrixXcd DiscretePOVM::element(std::size_t k) const {
    if (k >= size()) throw std::out_of_range("DiscretePOVM::element");
    if (k < rank_one_count()) return factors_.col(k) * factors_.col(k).adjoint();
    return dense_[k - rank_one_count()];
}

void DiscretePOVM::append_dense(Eigen::MatrixXcd element, OutcomeLabel label, double weight) {
    if (element.rows() != dim_.size() || element.cols() != dim_.size())
        throw std::invalid_argument("append_dense: element shape mismatch");
    if (!(weight > 0.0)) throw std::invalid_argument("append_dense: weight must be positive");
    dense_.push_back(std::move(element));
    labels_.push_back(label);
    weights_.push_back(weight);
}

TruncatedOperator DiscretePOVM::weighted_sum() const {
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim_.size(), dim_.size());
    std::size_t r = rank_one_count();
    if (r > 0) {
        Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights_.data(), r);
        sum.noalias() = factors_ * w.asDiagonal() * factors_.adjoint();
    }
    for (std::size_t k = r; k < size(); ++k) sum += weights_[k] * dense_[k - r];
    return {dim_, std::move(sum)};
}

double DiscretePOVM::min_element_eigenvalue() const {
    double min_eig = rank_one_count() > 0 ? 0.0 : std::numeric_limits<double>::infinity();
    for (const auto& e : dense_) {
        auto spec = hermitian_spectrum(TruncatedOperator{dim_, e},
                                       1e-10 * std::max(1.0, e.cwiseAbs().maxCoeff()));
        min_eig = std::min(min_eig, spec.eigenvalues(0));
    }
    return min_eig;
}

HeterodyneGrid make_heterodyne_grid(double extent, double step) {
    if (!(step > 0.0) || !(extent > 0.0))
        throw std::invalid_argument("make_heterodyne_grid: extent and step must be positive");
    HeterodyneGrid g;
    g.extent = extent;
    g.step = step;
    g.cell_measure = step * step / std::numbers::pi;
    int half = int(std::floor(extent / step + 1e-9));
    g.points.reserve(std::size_t(2 * half + 1) * std::size_t(2 * half + 1));
    for (int j = -half; j <= half; ++j)
        for (int k = -half; k <= half; ++k)
            g.points.emplace_back(j * step, k * step);
    return g;
}

DiscretePOVM heterodyne_grid_povm(double extent, double step, FockDim dim) {
    if (!(step <= 0.5)) throw std::invalid_argument("heterodyne_grid_povm: step must be <= 0.5");
    if (!(extent >= 2.0)) throw std::invalid_argument("heterodyne_grid_povm: extent must be >= 2");
    HeterodyneGrid grid = make_heterodyne_grid(extent, step);
    const std::size_t count = grid.points.size();

    Eigen::MatrixXcd factors(dim.size(), count);
    parallel_for(count, [&](std::size_t k) {
        factors.col(Eigen::Index(k)) = coherent_state(grid.points[k], dim).amplitudes;
    });

    // level-0 deficit decides whether the grid resolves anything at all
    double diag0 = 0.0;
    for (std::size_t k = 0; k < count; ++k)
        diag0 += grid.cell_measure * std::norm(factors(0, Eigen::Index(k)));
    if (1.0 - diag0 > 0.05)
        throw std::runtime_error("heterodyne_grid_povm: grid too coarse/small, level-0 deficit " +
                                 std::to_string(1.0 - diag0));

    std::vector<OutcomeLabel> labels(grid.points.begin(), grid.points.end());
    std::vector<double> weights(count, grid.cell_measure);
    return DiscretePOVM(dim, std::move(factors), std::move(labels), std::move(weights));
}

IdentityResolutionReport identity_resolution_report(const DiscretePOVM& povm) {
    TruncatedOperator sum = povm.weighted_sum();
    const int n = povm.dim().size();
    IdentityResolutionReport rep;
    rep.level_deficit.resize(n);
    for (int i = 0; i < n; ++i) rep.level_deficit(i) = 1.0 - sum.entries(i, i).real();
    double off = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) off = std::max(off, std::abs(sum.entries(i, j)));
    rep.max_offdiagonal = off;
    rep.n_eff = -1;
    for (int i = 0; i < n && rep.level_deficit(i) <= 1e-3; ++i) rep.n_eff = i;
    return rep;
}

OutcomeDistribution outcome_distribution(const DiscretePOVM& povm, const DensityOperator& rho) {
    if (povm.dim() != rho.dim())
        throw std::invalid_argument("outcome_distribution: dimension mismatch");
    double trace = rho.trace().real();
    if (std::abs(trace - 1.0) > 1e-6)
        throw std::invalid_argument("outcome_distribution: state trace deviates from 1 by " +
                                    std::to_string(std::abs(trace - 1.0)));

    OutcomeDistribution out;
    out.p.resize(povm.size());
    const std::size_t r = povm.rank_one_count();
    if (r > 0) {
        // w_k f_k† rho f_k for all rank-one outcomes at once
        Eigen::MatrixXcd rf = rho.op.entries * povm.factors();
        for (std::size_t k = 0; k < r; ++k)
            out.p[k] = povm.weights()[k] *
                       povm.factors().col(Eigen::Index(k)).dot(rf.col(Eigen::Index(k))).real();
    }
    for (std::size_t k = r; k < povm.size(); ++k)
        out.p[k] = povm.weights()[k] *
                   (povm.dense_elements()[k - r] * rho.op.entries).trace().real();

    double raw_sum = 0.0;
    out.clipped_count = 0;
    out.clipped_mass = 0.0;
    for (double& pk : out.p) {
        raw_sum += pk;
        if (pk < 0.0) {
            if (pk < -1e-10)
                throw std::runtime_error("outcome_distribution: probability " + std::to_string(pk) +
                                         " below clipping tolerance");
            ++out.clipped_count;
            out.clipped_mass -= pk;
            pk = 0.0;
        }
    }
    out.identity_deficit_felt = 1.0 - raw_sum;
    out.total = 0.0;
    for (double pk : out.p) out.total += pk;
    return out;
}

bool complete_with_remainder(DiscretePOVM& povm, double psd_tol) {
    TruncatedOperator rem = TruncatedOperator::identity(povm.dim()) - povm.weighted_sum();
    auto spec = hermitian_spectrum(rem.symmetrized(), 1.0);
    if (spec.eigenvalues(0) < -psd_tol) return false;
    povm.append_dense(rem.symmetrized().entries, OutcomeLabel{-1}, 1.0);
    return true;
}

}  // namespace qdopt
