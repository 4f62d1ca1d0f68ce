#include "qdopt/bayes.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qdopt/parallel.hpp"

namespace qdopt {

void validate(const HypothesisEnsemble& ensemble) {
    if (ensemble.states.size() < 1) throw std::invalid_argument("ensemble: need >= 1 hypothesis");
    if (ensemble.states.size() != ensemble.priors.size())
        throw std::invalid_argument("ensemble: state/prior count mismatch");
    double sum = 0.0;
    for (double p : ensemble.priors) {
        if (!(p >= 0.0)) throw std::invalid_argument("ensemble: negative prior");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("ensemble: priors sum to " + std::to_string(sum));
    FockDim dim = ensemble.dim();
    for (const auto& s : ensemble.states)
        if (s.dim() != dim) throw std::invalid_argument("ensemble: mixed dimensions");
    if (ensemble.cost.rows() != Eigen::Index(ensemble.count()))
        throw std::invalid_argument("ensemble: cost rows must match hypothesis count");
    if (!ensemble.cost.allFinite()) throw std::invalid_argument("ensemble: non-finite cost");
}

HypothesisEnsemble make_min_error_ensemble(std::vector<DensityOperator> states,
                                           std::vector<double> priors) {
    std::size_t n = states.size();
    Eigen::MatrixXd cost = -Eigen::MatrixXd::Identity(Eigen::Index(n), Eigen::Index(n));
    HypothesisEnsemble e{std::move(states), std::move(priors), std::move(cost)};
    validate(e);
    return e;
}

std::vector<TruncatedOperator> posterior_risk_operators(const HypothesisEnsemble& ensemble) {
    validate(ensemble);
    FockDim dim = ensemble.dim();
    std::vector<TruncatedOperator> risks;
    risks.reserve(std::size_t(ensemble.cost.cols()));
    for (Eigen::Index k = 0; k < ensemble.cost.cols(); ++k) {
        Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(dim.size(), dim.size());
        for (std::size_t j = 0; j < ensemble.count(); ++j)
            r += ensemble.cost(Eigen::Index(j), k) * ensemble.priors[j] *
                 ensemble.states[j].op.entries;
        risks.push_back({dim, std::move(r)});
    }
    return risks;
}

double average_risk(const DiscretePOVM& povm, const HypothesisEnsemble& ensemble) {
    if (povm.dim() != ensemble.dim()) throw std::invalid_argument("average_risk: dimension mismatch");
    if (Eigen::Index(povm.size()) != ensemble.cost.cols())
        throw std::invalid_argument("average_risk: POVM outcome count " + std::to_string(povm.size()) +
                                    " != cost columns " + std::to_string(ensemble.cost.cols()));
    auto risks = posterior_risk_operators(ensemble);
    double risk = 0.0;
    for (std::size_t k = 0; k < povm.size(); ++k)
        risk += povm.weights()[k] * (risks[k].entries * povm.element(k)).trace().real();
    return risk;
}

OptimalityReport optimality_check(const DiscretePOVM& povm, const HypothesisEnsemble& ensemble,
                                  double tol) {
    if (povm.dim() != ensemble.dim())
        throw std::invalid_argument("optimality_check: dimension mismatch");
    if (Eigen::Index(povm.size()) != ensemble.cost.cols())
        throw std::invalid_argument("optimality_check: POVM outcome count != cost columns");
    auto risks = posterior_risk_operators(ensemble);
    FockDim dim = povm.dim();

    Eigen::MatrixXcd lambda = Eigen::MatrixXcd::Zero(dim.size(), dim.size());
    std::vector<Eigen::MatrixXcd> measure(povm.size());
    for (std::size_t k = 0; k < povm.size(); ++k) {
        measure[k] = povm.weights()[k] * povm.element(k);
        lambda += risks[k].entries * measure[k];
    }

    OptimalityReport rep{TruncatedOperator{dim, lambda}.symmetrized(),
                         TruncatedOperator{dim, lambda}.hermiticity_defect(),
                         {}, {}, tol, false, false};
    rep.stationarity_residuals.resize(povm.size());
    rep.min_eig_b.resize(povm.size());
    for (std::size_t k = 0; k < povm.size(); ++k) {
        Eigen::MatrixXcd resid = (risks[k].entries - rep.lambda_op.entries) * measure[k];
        rep.stationarity_residuals[k] = resid.cwiseAbs().maxCoeff();
        TruncatedOperator b = (risks[k] - rep.lambda_op).symmetrized();
        auto spec = hermitian_spectrum(b, 1.0);
        rep.min_eig_b[k] = spec.eigenvalues(0);
    }

    rep.stationarity_pass = rep.lambda_hermiticity <= tol;
    for (double r : rep.stationarity_residuals)
        if (r > tol) rep.stationarity_pass = false;
    rep.nonnegativity_pass = true;
    for (double e : rep.min_eig_b)
        if (e < -tol) rep.nonnegativity_pass = false;
    return rep;
}

namespace {

// Pseudo-inverse square root of a PSD operator; eigenvalues below
// cutoff * max eigenvalue are treated as kernel.
Eigen::MatrixXcd pseudo_inverse_sqrt(const Eigen::MatrixXcd& t, FockDim dim, double cutoff) {
    auto spec = hermitian_spectrum(TruncatedOperator{dim, t}.symmetrized(), 1.0);
    double max_eig = spec.eigenvalues(spec.eigenvalues.size() - 1);
    if (!(max_eig > 0.0))
        throw std::runtime_error("optimize_min_error: T vanished; max eigenvalue " +
                                 std::to_string(max_eig));
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(spec.eigenvalues.size());
    for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i)
        if (spec.eigenvalues(i) > cutoff * max_eig)
            inv(i) = 1.0 / std::sqrt(spec.eigenvalues(i));
    return spec.eigenvectors * inv.asDiagonal() * spec.eigenvectors.adjoint();
}

}  // namespace

MinErrorSolution optimize_min_error(const HypothesisEnsemble& ensemble, int max_iters, double tol) {
    validate(ensemble);
    const std::size_t n = ensemble.count();
    if (n < 2) throw std::invalid_argument("optimize_min_error: need >= 2 hypotheses");
    if (ensemble.cost.cols() != Eigen::Index(n))
        throw std::invalid_argument("optimize_min_error: cost must be square");

    // cost must reduce to minimum error: c = shift + gain * (-delta), gain > 0
    double shift = ensemble.cost(0, Eigen::Index(n > 1 ? 1 : 0));
    double gain = shift - ensemble.cost(0, 0);
    if (!(gain > 0.0))
        throw std::invalid_argument("optimize_min_error: cost is not reducible to minimum error");
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
            double expected = j == k ? shift - gain : shift;
            if (ensemble.cost(Eigen::Index(j), Eigen::Index(k)) != expected)
                throw std::invalid_argument(
                    "optimize_min_error: cost is not reducible to minimum error");
        }

    FockDim dim = ensemble.dim();
    const Eigen::Index d = dim.size();

    std::vector<Eigen::MatrixXcd> g(n);
    double mean_trace = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        g[k] = ensemble.priors[k] * ensemble.states[k].op.entries;
        mean_trace += g[k].trace().real();
    }

    std::vector<Eigen::MatrixXcd> povm_el(n, Eigen::MatrixXcd::Identity(d, d) / double(n));
    auto risk_of = [&] {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += (g[k] * povm_el[k]).trace().real();
        return shift * mean_trace - gain * s;
    };

    std::vector<double> risk_trace{risk_of()};
    int it = 0;
    bool converged = false;
    for (; it < max_iters; ++it) {
        Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(d, d);
        for (std::size_t k = 0; k < n; ++k) t += g[k] * povm_el[k] * g[k];
        Eigen::MatrixXcd t_inv_sqrt = pseudo_inverse_sqrt(t, dim, 1e-12);
        for (std::size_t k = 0; k < n; ++k) {
            Eigen::MatrixXcd p = t_inv_sqrt * g[k] * povm_el[k] * g[k] * t_inv_sqrt;
            povm_el[k] = 0.5 * (p + p.adjoint());
        }
        risk_trace.push_back(risk_of());
        double diff = risk_trace[risk_trace.size() - 2] - risk_trace.back();
        if (std::abs(diff) < tol) {
            converged = true;
            ++it;
            break;
        }
    }

    // the iteration only ever populates the range of T; hand the untouched
    // kernel back so the returned POVM resolves identity
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& p : povm_el) sum += p;
    Eigen::MatrixXcd rem = Eigen::MatrixXcd::Identity(d, d) - sum;
    for (auto& p : povm_el) p += rem / double(n);

    std::vector<OutcomeLabel> labels;
    std::vector<double> weights(n, 1.0);
    for (std::size_t k = 0; k < n; ++k) labels.emplace_back(int(k));
    DiscretePOVM povm(dim, std::move(povm_el), std::move(labels), std::move(weights));
    OptimalityReport report = optimality_check(povm, ensemble, 1e-8);
    return {std::move(povm), std::move(report), std::move(risk_trace), it, converged};
}

HelstromResult helstrom_binary(double p0, const DensityOperator& rho0, double p1,
                               const DensityOperator& rho1) {
    if (std::abs(p0 + p1 - 1.0) > 1e-12)
        throw std::invalid_argument("helstrom_binary: priors must sum to 1");
    if (rho0.dim() != rho1.dim()) throw std::invalid_argument("helstrom_binary: dimension mismatch");
    FockDim dim = rho0.dim();
    TruncatedOperator delta{dim, p1 * rho1.op.entries - p0 * rho0.op.entries};
    auto spec = hermitian_spectrum(delta.symmetrized(), 1e-9);

    const Eigen::Index d = dim.size();
    Eigen::MatrixXcd p_one = Eigen::MatrixXcd::Zero(d, d);
    double abs_sum = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        abs_sum += std::abs(spec.eigenvalues(i));
        if (spec.eigenvalues(i) > 0.0)  // kernel of delta goes to outcome 0
            p_one += spec.eigenvectors.col(i) * spec.eigenvectors.col(i).adjoint();
    }
    Eigen::MatrixXcd p_zero = Eigen::MatrixXcd::Identity(d, d) - p_one;

    double p_err = 0.5 * (1.0 - abs_sum);
    double p_err_direct = p0 * (rho0.op.entries * p_one).trace().real() +
                          p1 * (rho1.op.entries * p_zero).trace().real();
    // truncated states can fall short of unit trace; allow that much slack
    double trace_slack = std::abs(rho0.trace().real() - 1.0) + std::abs(rho1.trace().real() - 1.0);
    if (std::abs(p_err - p_err_direct) > 1e-10 + trace_slack)
        throw std::runtime_error("helstrom_binary: spectral and direct error probabilities disagree by " +
                                 std::to_string(std::abs(p_err - p_err_direct)));

    DiscretePOVM povm(dim, std::vector<Eigen::MatrixXcd>{std::move(p_zero), std::move(p_one)},
                      std::vector<OutcomeLabel>{0, 1}, std::vector<double>{1.0, 1.0});
    return {p_err, p_err_direct, std::move(povm)};
}

MlCertificate coherent_ml_certificate(double L, std::span<const Complex> beta_grid, FockDim dim,
                                      double tol) {
    if (!(L >= 1.0)) throw std::invalid_argument("coherent_ml_certificate: L must be >= 1");
    for (Complex beta : beta_grid) {
        double deficit = coherent_state(beta, dim).norm_deficit();
        if (deficit > 1e-8)
            throw std::invalid_argument("coherent_ml_certificate: truncation deficit " +
                                        std::to_string(deficit) + " at |beta| = " +
                                        std::to_string(std::abs(beta)));
    }

    MlCertificate cert;
    cert.noise_l = L;
    cert.n_max = dim.n_max;
    cert.tol = tol;
    cert.entries.resize(beta_grid.size());
    parallel_for(beta_grid.size(), [&](std::size_t i) {
        Complex beta = beta_grid[i];
        DensityOperator rho = displaced_thermal_state(beta, L, dim);
        StateVector ket = coherent_state(beta, dim);
        Eigen::VectorXcd resid = rho.op.entries * ket.amplitudes - ket.amplitudes / L;
        TruncatedOperator b = (1.0 / L) * TruncatedOperator::identity(dim) - rho.op;
        auto spec = hermitian_spectrum(b.symmetrized(), 1.0);
        cert.entries[i] = {beta, resid.norm(), spec.eigenvalues(0)};
    });

    cert.worst_eigen_residual = 0.0;
    cert.worst_min_eig_b = std::numeric_limits<double>::infinity();
    for (const auto& e : cert.entries) {
        cert.worst_eigen_residual = std::max(cert.worst_eigen_residual, e.eigen_residual);
        cert.worst_min_eig_b = std::min(cert.worst_min_eig_b, e.min_eig_b);
    }
    cert.pass = cert.worst_eigen_residual <= tol && cert.worst_min_eig_b >= -tol;
    return cert;
}

}  // namespace qdopt
