#include "qdopt/shannon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "qdopt/parallel.hpp"

namespace qdopt {

namespace {

constexpr double kClipTol = 1e-10;
constexpr std::size_t kChunk = 64;

void require_single_mode(const ChannelParams& params, const char* who) {
    if (params.modes() != 1)
        throw std::invalid_argument(std::string(who) +
                                    ": only single-mode parameters map to truncated operators; "
                                    "multimode cases factorize per mode");
}

// Shared accumulation: raw_conditional(j, out) fills the unclipped outcome
// probabilities for prior point j. Marginals are accumulated per fixed-size
// chunk and reduced in chunk order, so results do not depend on the worker
// count.
InfoEstimate accumulate_info(std::span<const WeightedPoint> prior, std::size_t n_outcomes,
                             const std::function<void(std::size_t, std::vector<double>&)>& raw_conditional,
                             GridSpec theta_spec, GridSpec beta_spec, int n_max,
                             double extra_tail) {
    const std::size_t j_count = prior.size();
    if (j_count == 0) throw std::invalid_argument("mutual_information: empty prior grid");
    const std::size_t n_chunks = (j_count + kChunk - 1) / kChunk;

    std::vector<Eigen::VectorXd> partial_marginal(n_chunks);
    std::vector<double> partial_conditional(n_chunks, 0.0);
    std::vector<double> partial_deficit(n_chunks, 0.0);

    parallel_for(n_chunks, [&](std::size_t c) {
        Eigen::VectorXd marginal = Eigen::VectorXd::Zero(Eigen::Index(n_outcomes));
        double cond = 0.0, deficit = 0.0;
        std::vector<double> p(n_outcomes);
        const std::size_t j_end = std::min(j_count, (c + 1) * kChunk);
        for (std::size_t j = c * kChunk; j < j_end; ++j) {
            raw_conditional(j, p);
            double raw_sum = 0.0, plogp = 0.0;
            for (std::size_t k = 0; k < n_outcomes; ++k) {
                double pk = p[k];
                raw_sum += pk;
                if (pk < 0.0) {
                    if (pk < -kClipTol)
                        throw std::runtime_error(
                            "mutual_information: probability below clipping tolerance: " +
                            std::to_string(pk));
                    pk = 0.0;
                }
                if (pk > 0.0) plogp += pk * std::log(pk);
                marginal(Eigen::Index(k)) += prior[j].weight * pk;
            }
            cond += prior[j].weight * plogp;
            deficit += prior[j].weight * std::abs(1.0 - raw_sum);
        }
        partial_marginal[c] = std::move(marginal);
        partial_conditional[c] = cond;
        partial_deficit[c] = deficit;
    });

    Eigen::VectorXd marginal = Eigen::VectorXd::Zero(Eigen::Index(n_outcomes));
    double conditional = 0.0, felt_deficit = 0.0, weight_sum = 0.0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        marginal += partial_marginal[c];
        conditional += partial_conditional[c];
        felt_deficit += partial_deficit[c];
    }
    for (const auto& wp : prior) weight_sum += wp.weight;

    double marginal_entropy_term = 0.0;
    for (Eigen::Index k = 0; k < marginal.size(); ++k)
        if (marginal(k) > 0.0) marginal_entropy_term += marginal(k) * std::log(marginal(k));

    InfoEstimate est;
    est.value = conditional - marginal_entropy_term;
    est.error_budget = (extra_tail + std::abs(1.0 - weight_sum) + felt_deficit) *
                       std::log(double(std::max<std::size_t>(n_outcomes, 2)));
    est.theta_grid = theta_spec;
    est.beta_grid = beta_spec;
    est.n_max = n_max;
    return est;
}

// Columns sqrt((1/L)(1-1/L)^n) * D(theta)|n> for n < rank, by the
// displaced-Fock recurrence u_{n+1} = (a† - conj(theta)) u_n / sqrt(n+1).
// O(d) per column; no full displacement matrix is formed.
Eigen::MatrixXcd displaced_thermal_factor_columns(Complex theta, double noise_l, FockDim dim,
                                                  int rank) {
    const int d = dim.size();
    Eigen::MatrixXcd u(d, rank);
    u.col(0) = coherent_state(theta, dim).amplitudes;
    const Complex tbar = std::conj(theta);
    for (int n = 0; n + 1 < rank; ++n) {
        const double inv_sqrt = 1.0 / std::sqrt(double(n + 1));
        u(0, n + 1) = -tbar * u(0, n) * inv_sqrt;
        for (int k = 1; k < d; ++k)
            u(k, n + 1) = (std::sqrt(double(k)) * u(k - 1, n) - tbar * u(k, n)) * inv_sqrt;
    }
    double t = 1.0 / noise_l;
    for (int n = 0; n < rank; ++n) {
        u.col(n) *= std::sqrt(t);
        t *= 1.0 - 1.0 / noise_l;
    }
    return u;
}

int thermal_rank(double noise_l, FockDim dim, double tail_tol) {
    if (noise_l <= 1.0) return 1;
    double q = 1.0 - 1.0 / noise_l;  // tail mass after r levels is q^r
    int r = int(std::ceil(std::log(tail_tol) / std::log(q)));
    return std::clamp(r, 1, dim.size());
}

}  // namespace

InfoEstimate mutual_information(const DiscretePOVM& povm, std::span<const WeightedPoint> prior,
                                const std::function<DensityOperator(Complex)>& state_at) {
    double wsum = 0.0;
    for (const auto& wp : prior) wsum += wp.weight;
    if (std::abs(wsum - 1.0) > 1e-6)
        throw std::invalid_argument("mutual_information: prior weights sum to " +
                                    std::to_string(wsum));
    auto raw = [&](std::size_t j, std::vector<double>& out) {
        DensityOperator rho = state_at(prior[j].theta);
        // already clipped at -1e-10 inside outcome_distribution
        out = std::move(outcome_distribution(povm, rho).p);
    };
    return accumulate_info(prior, povm.size(), raw, GridSpec{}, GridSpec{}, povm.dim().n_max, 0.0);
}

double gaussian_heterodyne_info(const ChannelParams& params) {
    double v = 0.0;
    for (std::size_t nu = 0; nu < params.modes(); ++nu)
        v += std::log((params.S[nu] + params.L[nu]) / params.L[nu]);
    return v;
}

GaussianPriorGrid gaussian_prior_grid(const ChannelParams& params, FockDim dim,
                                      const GaussianInfoOptions& opt) {
    require_single_mode(params, "gaussian_prior_grid");
    double s = params.S[0];
    if (s <= 0.0) throw std::domain_error("gaussian_prior_grid: degenerate prior (S = 0)");
    double sigma_axis = std::sqrt(0.5 * s);
    double extent = opt.sigma_mult * sigma_axis;
    double radius = truncation_safe_radius(dim, opt.truncation_tol);

    GaussianPriorGrid grid;
    HeterodyneGrid lattice = make_heterodyne_grid(extent, opt.step);
    double mass = 0.0;
    for (Complex pt : lattice.points) {
        if (std::abs(pt) > radius) continue;  // keep the truncated operators trustworthy
        double w = prior_density(pt, params) * lattice.cell_measure;
        grid.points.push_back({pt, w});
        mass += w;
    }
    if (grid.points.empty())
        throw std::runtime_error("gaussian_prior_grid: no prior points inside the safe radius");
    grid.tail = std::abs(1.0 - mass);
    for (auto& wp : grid.points) wp.weight /= mass;
    grid.spec = {extent, opt.step, grid.points.size()};
    return grid;
}

InfoEstimate heterodyne_info_numeric(const ChannelParams& params, FockDim dim,
                                     const GaussianInfoOptions& opt) {
    require_single_mode(params, "heterodyne_info_numeric");
    const double noise_l = params.L[0];
    double beta_extent = std::max(2.0, opt.sigma_mult * std::sqrt(0.5 * (params.S[0] + params.L[0])));
    DiscretePOVM povm = heterodyne_grid_povm(beta_extent, opt.step, dim);
    GaussianPriorGrid prior = gaussian_prior_grid(params, dim, opt);

    const int rank = thermal_rank(noise_l, dim, opt.thermal_tail);
    const auto& factors = povm.factors();
    const std::size_t k_count = povm.size();
    Eigen::Map<const Eigen::VectorXd> weights(povm.weights().data(), Eigen::Index(k_count));

    auto raw = [&](std::size_t j, std::vector<double>& out) {
        Eigen::MatrixXcd u =
            displaced_thermal_factor_columns(prior.points[j].theta, noise_l, dim, rank);
        Eigen::MatrixXcd overlaps = factors.adjoint() * u;  // K x rank
        for (std::size_t k = 0; k < k_count; ++k)
            out[k] = weights(Eigen::Index(k)) * overlaps.row(Eigen::Index(k)).squaredNorm();
    };
    return accumulate_info(prior.points, k_count, raw, prior.spec,
                           GridSpec{beta_extent, opt.step, k_count}, dim.n_max,
                           prior.tail + std::pow(1.0 - 1.0 / noise_l, rank));
}

VariationReport variation_operators(Complex beta, const ChannelParams& params, FockDim dim) {
    require_single_mode(params, "variation_operators");
    double deficit = coherent_state(beta, dim).norm_deficit();
    if (deficit > 1e-8)
        throw std::invalid_argument("variation_operators: coherent truncation deficit " +
                                    std::to_string(deficit));
    double validation = validate_variation_construction(params, FockDim(12));
    if (validation > 1e-9)
        throw std::runtime_error(
            "variation_operators: displaced-diagonal construction deviates from the "
            "normal-ordered series by " + std::to_string(validation));

    const double s = params.S[0], l = params.L[0], h = params.H[0];
    const double sl = s + l;
    const double c1 = 1.0 / sl;

    auto ladder = ladder_operators(dim);
    Eigen::MatrixXcd lower = ladder.annihilate.entries -
                             beta * Eigen::MatrixXcd::Identity(dim.size(), dim.size());
    TruncatedOperator rho_bar = displaced_geometric_diagonal(c1, c1, Complex(0, 0), dim);
    TruncatedOperator b_out{dim, h * (lower.adjoint() * rho_bar.entries * lower)};
    b_out = b_out.symmetrized();

    auto d_term = [&](double c2) {
        double rate = c1 + c2;
        Complex center = (c2 / rate) * beta;
        double scale = (1.0 / sl) * std::exp(-c1 * c2 * std::norm(beta) / rate);
        return displaced_geometric_diagonal(scale, rate, center, dim);
    };
    TruncatedOperator d_out = (d_term(1.0 - h) - d_term(1.0)).symmetrized();

    StateVector ket = coherent_state(beta, dim);
    double stationarity = (b_out.entries * ket.amplitudes).norm();

    auto spec_b = hermitian_spectrum(b_out, 1.0);
    auto spec_d = hermitian_spectrum(d_out, 1.0);
    auto spec_bmd = hermitian_spectrum(b_out - d_out, 1.0);

    return {beta,
            std::move(b_out),
            std::move(d_out),
            spec_b.eigenvalues,
            spec_d.eigenvalues,
            spec_bmd.eigenvalues,
            spec_b.eigenvalues(0),
            spec_d.eigenvalues(0),
            spec_bmd.eigenvalues(0),
            stationarity,
            {}};
}

double validate_variation_construction(const ChannelParams& params, FockDim validate_dim) {
    require_single_mode(params, "validate_variation_construction");
    const double sl = params.S[0] + params.L[0];
    const double c1 = 1.0 / sl;
    const Complex beta_val(0.35, 0.2);
    // the route needs headroom above the compared block; its own top levels
    // carry the truncation error of the displacement exponential
    const FockDim work_dim(2 * validate_dim.n_max);

    double worst = 0.0;
    for (double c2 : {1.0 - params.H[0], 1.0}) {
        double rate = c1 + c2;
        Complex center = (c2 / rate) * beta_val;
        double scale = (1.0 / sl) * std::exp(-c1 * c2 * std::norm(beta_val) / rate);
        TruncatedOperator route = displaced_geometric_diagonal(scale, rate, center, work_dim);
        for (int m = 0; m < validate_dim.size(); ++m)
            for (int n = 0; n < validate_dim.size(); ++n) {
                Complex series =
                    reference::normal_ordered_gaussian_element(scale, rate, center, m, n);
                worst = std::max(worst, std::abs(route.entries(m, n) - series));
            }
    }
    return worst;
}

LocalOptimalityCertificate local_optimality_certificate(const ChannelParams& params,
                                                        std::span<const Complex> beta_grid,
                                                        FockDim dim, double tol) {
    require_single_mode(params, "local_optimality_certificate");
    if (beta_grid.empty())
        throw std::invalid_argument("local_optimality_certificate: empty beta grid");

    std::vector<VariationReport> entries(
        beta_grid.size(),
        VariationReport{Complex(0, 0), TruncatedOperator::zero(dim), TruncatedOperator::zero(dim),
                        {}, {}, {}, 0, 0, 0, 0, {}});
    parallel_for(beta_grid.size(), [&](std::size_t i) {
        entries[i] = variation_operators(beta_grid[i], params, dim);
    });

    LocalOptimalityCertificate cert{std::move(entries), 0, 0, 0, 0, 0, tol, false};
    cert.worst_min_eig_b = std::numeric_limits<double>::infinity();
    cert.worst_min_eig_d = std::numeric_limits<double>::infinity();
    cert.worst_min_eig_b_minus_d = std::numeric_limits<double>::infinity();
    cert.worst_stationarity = 0.0;
    cert.spectrum_deviation = 0.0;
    for (const auto& e : cert.entries) {
        cert.worst_min_eig_b = std::min(cert.worst_min_eig_b, e.min_eig_b);
        cert.worst_min_eig_d = std::min(cert.worst_min_eig_d, e.min_eig_d);
        cert.worst_min_eig_b_minus_d = std::min(cert.worst_min_eig_b_minus_d, e.min_eig_b_minus_d);
        cert.worst_stationarity = std::max(cert.worst_stationarity, e.stationarity_residual);
        cert.spectrum_deviation =
            std::max(cert.spectrum_deviation,
                     (e.spectrum_b_minus_d - cert.entries.front().spectrum_b_minus_d)
                         .cwiseAbs()
                         .maxCoeff());
    }
    cert.pass = cert.worst_min_eig_b_minus_d >= -tol;
    return cert;
}

std::vector<double> second_variation_form(const VariationReport& report,
                                          std::span<const StateVector> perturbations) {
    FockDim dim = report.b_op.dim;
    StateVector anchor = coherent_state(report.beta, dim);
    double anchor_norm2 = anchor.amplitudes.squaredNorm();
    Eigen::MatrixXcd form = report.b_op.entries - report.d_op.entries;

    std::vector<double> values;
    values.reserve(perturbations.size());
    for (const auto& pert : perturbations) {
        if (pert.dim != dim) throw std::invalid_argument("second_variation_form: dim mismatch");
        // first-order identity constraint: drop the real overlap with the anchor
        double re_overlap = anchor.amplitudes.dot(pert.amplitudes).real();
        Eigen::VectorXcd projected =
            pert.amplitudes - (re_overlap / anchor_norm2) * anchor.amplitudes;
        values.push_back((projected.adjoint() * form * projected)(0, 0).real());
    }
    return values;
}

OccupationCheck occupation_inequality_check(std::span<const double> h, int n_max) {
    if (h.empty()) throw std::invalid_argument("occupation_inequality_check: empty h");
    for (double hv : h)
        if (!(hv >= 0.0 && hv < 1.0))
            throw std::invalid_argument("occupation_inequality_check: h must lie in [0, 1)");
    if (n_max < 0) throw std::invalid_argument("occupation_inequality_check: n_max must be >= 0");

    OccupationCheck check{true, std::numeric_limits<double>::infinity(), {}, 0};
    std::vector<int> tuple(h.size(), 0);

    auto visit = [&](auto&& self, std::size_t mode, int remaining) -> void {
        if (mode == h.size()) {
            ++check.tuples_checked;
            int total = 0;
            double log_p = 0.0;
            bool p_zero = false;
            for (std::size_t nu = 0; nu < h.size(); ++nu) {
                total += tuple[nu];
                if (tuple[nu] > 0) {
                    if (h[nu] == 0.0)
                        p_zero = true;
                    else
                        log_p += tuple[nu] * std::log(h[nu]);
                }
            }
            // LHS - RHS of the diagonal inequality; at total = 0 the vacuum
            // term of :e^{-b†b}: cancels the right side exactly
            double p = p_zero ? 0.0 : std::exp(log_p);
            double margin = total == 0 ? 0.0 : p * double(total - 1);
            if (margin < check.worst_margin) check.worst_margin = margin;
            if (margin < 0.0) check.holds = false;
            bool equality = (total <= 1) || p_zero;  // exact: p > 0 whenever all h > 0
            if (equality) check.equality_cases.push_back(tuple);
            return;
        }
        for (int n = 0; n <= remaining; ++n) {
            tuple[mode] = n;
            self(self, mode + 1, remaining - n);
        }
        tuple[mode] = 0;
    };
    visit(visit, 0, n_max);
    return check;
}

double PerturbationStudy::worst_excess() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (double v : perturbed) worst = std::max(worst, v - coherent.value);
    return worst;
}

namespace {

// Deterministic standard complex Gaussians: explicit Box-Muller over the
// engine's uniform doubles, so the stream does not depend on the standard
// library's distribution internals.
Complex complex_gaussian(std::mt19937_64& rng) {
    auto uniform = [&] {
        return (double(rng() >> 11) + 0.5) * 0x1.0p-53;  // (0, 1)
    };
    double radius = std::sqrt(-std::log(uniform()));
    double angle = 2.0 * std::numbers::pi * uniform();
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace

PerturbationStudy info_of_heterodyne_vs_perturbed(const ChannelParams& params, double scale,
                                                  int count, std::uint64_t seed, FockDim dim,
                                                  const GaussianInfoOptions& opt) {
    require_single_mode(params, "info_of_heterodyne_vs_perturbed");
    if (!(scale >= 0.0 && scale <= 0.1))
        throw std::invalid_argument("info_of_heterodyne_vs_perturbed: scale must lie in [0, 0.1]");
    if (count < 1) throw std::invalid_argument("info_of_heterodyne_vs_perturbed: count must be >= 1");

    const double noise_l = params.L[0];
    double beta_extent = std::max(2.0, opt.sigma_mult * std::sqrt(0.5 * (params.S[0] + params.L[0])));
    DiscretePOVM base = heterodyne_grid_povm(beta_extent, opt.step, dim);
    GaussianPriorGrid prior = gaussian_prior_grid(params, dim, opt);
    const int rank = thermal_rank(noise_l, dim, opt.thermal_tail);
    const std::size_t k_count = base.size();
    const int d = dim.size();
    Eigen::Map<const Eigen::VectorXd> weights(base.weights().data(), Eigen::Index(k_count));
    GridSpec beta_spec{beta_extent, opt.step, k_count};

    auto info_of = [&](const Eigen::MatrixXcd& factors,
                       const Eigen::MatrixXcd* remainder) -> InfoEstimate {
        auto raw = [&](std::size_t j, std::vector<double>& out) {
            Eigen::MatrixXcd u =
                displaced_thermal_factor_columns(prior.points[j].theta, noise_l, dim, rank);
            Eigen::MatrixXcd overlaps = factors.adjoint() * u;
            for (std::size_t k = 0; k < k_count; ++k)
                out[k] = weights(Eigen::Index(k)) * overlaps.row(Eigen::Index(k)).squaredNorm();
            if (remainder)
                out[k_count] = ((*remainder) * u).cwiseProduct(u.conjugate()).sum().real();
        };
        std::size_t outcomes = k_count + (remainder ? 1 : 0);
        return accumulate_info(prior.points, outcomes, raw, prior.spec, beta_spec, dim.n_max,
                               prior.tail + std::pow(1.0 - 1.0 / noise_l, rank));
    };

    PerturbationStudy study{info_of(base.factors(), nullptr), {}, scale, seed};
    study.perturbed.resize(std::size_t(count));

    // sequential over seeds; the information pipeline inside parallelizes
    for (std::size_t s = 0; s < std::size_t(count); ++s) {
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (s + 1));
        Eigen::MatrixXcd perturbed = base.factors();
        for (std::size_t k = 0; k < k_count; ++k) {
            Eigen::VectorXcd g(d);
            for (int i = 0; i < d; ++i) g(i) = complex_gaussian(rng);
            perturbed.col(Eigen::Index(k)) += scale * g / g.norm();
        }
        // whiten the family back to a resolution of identity on its support
        Eigen::MatrixXcd gram = perturbed * weights.asDiagonal() * perturbed.adjoint();
        auto spec = hermitian_spectrum(TruncatedOperator{dim, gram}.symmetrized(), 1.0);
        double max_eig = spec.eigenvalues(spec.eigenvalues.size() - 1);
        Eigen::VectorXd inv_sqrt = Eigen::VectorXd::Zero(d);
        for (int i = 0; i < d; ++i)
            if (spec.eigenvalues(i) > 1e-12 * max_eig)
                inv_sqrt(i) = 1.0 / std::sqrt(spec.eigenvalues(i));
        Eigen::MatrixXcd whitener =
            spec.eigenvectors * inv_sqrt.asDiagonal() * spec.eigenvectors.adjoint();
        Eigen::MatrixXcd whitened = whitener * perturbed;

        Eigen::MatrixXcd remainder =
            Eigen::MatrixXcd::Identity(d, d) - whitened * weights.asDiagonal() * whitened.adjoint();
        remainder = 0.5 * (remainder + remainder.adjoint());
        auto rem_spec = hermitian_spectrum(TruncatedOperator{dim, remainder}, 1e-9);
        if (rem_spec.eigenvalues(0) < -1e-8)
            throw std::runtime_error(
                "info_of_heterodyne_vs_perturbed: completion failed, remainder min eig " +
                std::to_string(rem_spec.eigenvalues(0)));

        study.perturbed[s] = info_of(whitened, &remainder).value;
    }
    return study;
}

}  // namespace qdopt
