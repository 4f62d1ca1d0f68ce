#pragma once

#include <span>
#include <vector>

#include "qdopt/fock.hpp"

namespace qdopt {

// Per-mode covariances of the linear boson channel together with the derived
// posterior matrices. S is the prior signal covariance (mean signal photons
// per mode); L is the anti-normal noise moment <alpha alpha*>, so vacuum noise
// is L = 1 and L = 1 + mean thermal photons. Only simultaneously diagonal
// S, L are supported; modes factorize.
struct ChannelParams {
    std::vector<double> S;
    std::vector<double> L;
    std::vector<double> H;           // 1/L - 1/(S+L), in [0, 1)
    std::vector<double> A;           // S/(S+L)
    std::vector<double> M;           // 1/S + 1/L; +inf on degenerate modes
    std::vector<bool> degenerate;    // S == 0 (no finite posterior covariance)

    std::size_t modes() const { return S.size(); }
    bool any_degenerate() const;
    double mean_thermal(std::size_t mode = 0) const { return L.at(mode) - 1.0; }
};

ChannelParams derive_channel_matrices(std::span<const double> S, std::span<const double> L);
ChannelParams derive_channel_matrices(double S, double L);

// Hermitian, PSD, trace ~ 1 operator.
struct DensityOperator {
    TruncatedOperator op;

    FockDim dim() const { return op.dim; }
    Complex trace() const { return op.trace(); }
    double hermiticity_defect() const { return op.hermiticity_defect(); }

    static DensityOperator from_pure(const StateVector& psi);
};

// Truncated matrix of |L|^-1 :exp{-(b-theta)† L^-1 (b-theta)}:, the displaced
// thermal state, built as D(theta) diag((1/L)(1-1/L)^n) D(theta)†.
// Rejects L < 1 and displacements whose coherent truncation deficit at this
// dim exceeds 1e-6.
DensityOperator displaced_thermal_state(Complex theta, double L, FockDim dim);

// |L|^-1 exp(-|beta-theta|^2 / L): density of P(dbeta|theta) w.r.t. the
// measure d mu(beta) = pi^-1 dRe dIm per mode.
double heterodyne_likelihood(Complex beta, Complex theta, double L);
double heterodyne_likelihood(std::span<const Complex> beta, std::span<const Complex> theta,
                             const ChannelParams& params);

// |S+L|^-1 exp(-|beta|^2/(S+L)); the Gaussian convolution of likelihood and prior.
double marginal_output_density(Complex beta, const ChannelParams& params);
double marginal_output_density(std::span<const Complex> beta, const ChannelParams& params);

// |M| exp(-M |theta - A beta|^2); requires a non-degenerate prior.
double posterior_density(Complex theta, Complex beta, const ChannelParams& params);
double posterior_density(std::span<const Complex> theta, std::span<const Complex> beta,
                         const ChannelParams& params);

// |S|^-1 exp(-|theta|^2/S) w.r.t. d mu(theta).
double prior_density(Complex theta, const ChannelParams& params);
double prior_density(std::span<const Complex> theta, const ChannelParams& params);

// Largest |theta| whose truncated coherent state at this dim has norm deficit
// within deficit_tol.
double truncation_safe_radius(FockDim dim, double deficit_tol);

}  // namespace qdopt
