#include "qdopt/gaussian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qdopt {

bool ChannelParams::any_degenerate() const {
    for (bool d : degenerate)
        if (d) return true;
    return false;
}

ChannelParams derive_channel_matrices(std::span<const double> S, std::span<const double> L) {
    if (S.empty() || S.size() != L.size())
        throw std::invalid_argument("derive_channel_matrices: S and L must be non-empty and equal length");
    ChannelParams p;
    for (std::size_t nu = 0; nu < S.size(); ++nu) {
        double s = S[nu], l = L[nu];
        if (!(l >= 1.0))
            throw std::invalid_argument("derive_channel_matrices: L must be >= 1 (sub-vacuum noise), got " +
                                        std::to_string(l));
        if (!(s >= 0.0))
            throw std::invalid_argument("derive_channel_matrices: S must be >= 0, got " + std::to_string(s));
        double h = 1.0 / l - 1.0 / (s + l);
        double a = s / (s + l);
        bool deg = (s == 0.0);
        double m = deg ? std::numeric_limits<double>::infinity() : 1.0 / s + 1.0 / l;
        if (!(h >= 0.0 && h < 1.0))
            throw std::logic_error("derive_channel_matrices: H outside [0, 1)");
        if (1.0 / (s + l) > 1.0 - h + 1e-15)
            throw std::logic_error("derive_channel_matrices: (S+L)^-1 <= 1-H violated");
        p.S.push_back(s);
        p.L.push_back(l);
        p.H.push_back(h);
        p.A.push_back(a);
        p.M.push_back(m);
        p.degenerate.push_back(deg);
    }
    return p;
}

ChannelParams derive_channel_matrices(double S, double L) {
    return derive_channel_matrices(std::span<const double>(&S, 1), std::span<const double>(&L, 1));
}

DensityOperator DensityOperator::from_pure(const StateVector& psi) {
    return {{psi.dim, psi.amplitudes * psi.amplitudes.adjoint()}};
}

DensityOperator displaced_thermal_state(Complex theta, double L, FockDim dim) {
    if (!(L >= 1.0)) throw std::invalid_argument("displaced_thermal_state: L must be >= 1");
    double deficit = coherent_state(theta, dim).norm_deficit();
    if (deficit > 1e-6)
        throw std::invalid_argument("displaced_thermal_state: coherent truncation deficit " +
                                    std::to_string(deficit) + " exceeds 1e-6 at n_max " +
                                    std::to_string(dim.n_max));
    return {displaced_geometric_diagonal(1.0 / L, 1.0 / L, theta, dim)};
}

double heterodyne_likelihood(Complex beta, Complex theta, double L) {
    if (!(L >= 1.0)) throw std::invalid_argument("heterodyne_likelihood: L must be >= 1");
    return std::exp(-std::norm(beta - theta) / L) / L;
}

namespace {

void require_mode_count(std::size_t got, const ChannelParams& params, const char* who) {
    if (got != params.modes())
        throw std::invalid_argument(std::string(who) + ": mode count mismatch");
}

}  // namespace

double heterodyne_likelihood(std::span<const Complex> beta, std::span<const Complex> theta,
                             const ChannelParams& params) {
    require_mode_count(beta.size(), params, "heterodyne_likelihood");
    require_mode_count(theta.size(), params, "heterodyne_likelihood");
    double v = 1.0;
    for (std::size_t nu = 0; nu < params.modes(); ++nu)
        v *= heterodyne_likelihood(beta[nu], theta[nu], params.L[nu]);
    return v;
}

double marginal_output_density(Complex beta, const ChannelParams& params) {
    require_mode_count(1, params, "marginal_output_density");
    double sl = params.S[0] + params.L[0];
    return std::exp(-std::norm(beta) / sl) / sl;
}

double marginal_output_density(std::span<const Complex> beta, const ChannelParams& params) {
    require_mode_count(beta.size(), params, "marginal_output_density");
    double v = 1.0;
    for (std::size_t nu = 0; nu < params.modes(); ++nu) {
        double sl = params.S[nu] + params.L[nu];
        v *= std::exp(-std::norm(beta[nu]) / sl) / sl;
    }
    return v;
}

double posterior_density(Complex theta, Complex beta, const ChannelParams& params) {
    return posterior_density(std::span<const Complex>(&theta, 1),
                             std::span<const Complex>(&beta, 1), params);
}

double posterior_density(std::span<const Complex> theta, std::span<const Complex> beta,
                         const ChannelParams& params) {
    require_mode_count(theta.size(), params, "posterior_density");
    require_mode_count(beta.size(), params, "posterior_density");
    if (params.any_degenerate())
        throw std::domain_error(
            "posterior_density: degenerate prior (some S = 0); use the delta-prior limit instead");
    double v = 1.0;
    for (std::size_t nu = 0; nu < params.modes(); ++nu) {
        double m = params.M[nu];
        v *= m * std::exp(-m * std::norm(theta[nu] - params.A[nu] * beta[nu]));
    }
    return v;
}

double prior_density(Complex theta, const ChannelParams& params) {
    return prior_density(std::span<const Complex>(&theta, 1), params);
}

double prior_density(std::span<const Complex> theta, const ChannelParams& params) {
    require_mode_count(theta.size(), params, "prior_density");
    double v = 1.0;
    for (std::size_t nu = 0; nu < params.modes(); ++nu) {
        double s = params.S[nu];
        if (s == 0.0) throw std::domain_error("prior_density: degenerate prior (S = 0)");
        v *= std::exp(-std::norm(theta[nu]) / s) / s;
    }
    return v;
}

double truncation_safe_radius(FockDim dim, double deficit_tol) {
    if (!(deficit_tol > 0.0)) throw std::invalid_argument("truncation_safe_radius: tol must be > 0");
    auto deficit = [&](double radius) {
        return coherent_state(Complex(radius, 0.0), dim).norm_deficit();
    };
    double lo = 0.0, hi = 1.0;
    while (deficit(hi) < deficit_tol) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e4) return hi;  // deficit never reaches tol at representable amplitudes
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (deficit(mid) < deficit_tol ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace qdopt
