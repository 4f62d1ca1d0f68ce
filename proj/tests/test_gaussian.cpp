#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qdopt/gaussian.hpp"

using namespace qdopt;

TEST_CASE("derived channel matrices") {
    SUBCASE("S=1, L=1") {
        ChannelParams p = derive_channel_matrices(1.0, 1.0);
        CHECK(p.H[0] == doctest::Approx(0.5));
        CHECK(p.A[0] == doctest::Approx(0.5));
        CHECK(p.M[0] == doctest::Approx(2.0));
        CHECK_FALSE(p.any_degenerate());
    }
    SUBCASE("zero signal sets the degenerate flag") {
        ChannelParams p = derive_channel_matrices(0.0, 2.0);
        CHECK(p.H[0] == doctest::Approx(0.0));
        CHECK(p.A[0] == doctest::Approx(0.0));
        CHECK(p.degenerate[0]);
        CHECK(std::isinf(p.M[0]));
    }
    SUBCASE("S=3, L=2 and the matrix inequality") {
        ChannelParams p = derive_channel_matrices(3.0, 2.0);
        CHECK(p.H[0] == doctest::Approx(0.3));
        CHECK(1.0 / (p.S[0] + p.L[0]) <= 1.0 - p.H[0]);
    }
    SUBCASE("identities hold per mode") {
        double s_vals[] = {0.5, 1.0, 3.0};
        double l_vals[] = {1.0, 1.2, 2.0};
        ChannelParams p = derive_channel_matrices(s_vals, l_vals);
        for (std::size_t nu = 0; nu < 3; ++nu) {
            // H + (S+L)^-1 = L^-1 and the literal definitions of A and M
            CHECK(p.H[nu] + 1.0 / (p.S[nu] + p.L[nu]) ==
                  doctest::Approx(1.0 / p.L[nu]).epsilon(1e-14));
            CHECK(p.A[nu] == doctest::Approx(p.S[nu] / (p.S[nu] + p.L[nu])).epsilon(1e-14));
            CHECK(p.M[nu] == doctest::Approx(1.0 / p.S[nu] + 1.0 / p.L[nu]).epsilon(1e-14));
            CHECK(p.H[nu] >= 0.0);
            CHECK(p.H[nu] < 1.0);
        }
    }
    SUBCASE("sub-vacuum noise is rejected") {
        CHECK_THROWS_AS(derive_channel_matrices(1.0, 0.9), std::invalid_argument);
        CHECK_THROWS_AS(derive_channel_matrices(-0.1, 1.5), std::invalid_argument);
    }
}

TEST_CASE("displaced thermal state") {
    SUBCASE("vacuum noise, no displacement") {
        DensityOperator rho = displaced_thermal_state(Complex(0, 0), 1.0, FockDim(6));
        Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(7, 7);
        expected(0, 0) = 1.0;
        CHECK((rho.op.entries - expected).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("thermal diagonal is geometric") {
        FockDim dim(40);
        DensityOperator rho = displaced_thermal_state(Complex(0, 0), 2.0, dim);
        for (int n = 0; n <= 12; ++n)
            CHECK(rho.op.entries(n, n).real() == doctest::Approx(std::pow(0.5, n + 1)));
        CHECK(rho.trace().real() == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("first moment equals the displacement") {
        FockDim dim(50);
        Complex theta(1.2, 0.0);
        DensityOperator rho = displaced_thermal_state(theta, 1.5, dim);
        auto ladder = ladder_operators(dim);
        Complex mean = (rho.op.entries * ladder.annihilate.entries).trace();
        CHECK(std::abs(mean - theta) <= 1e-6);
    }
    SUBCASE("second moment reproduces L") {
        FockDim dim(50);
        Complex theta(0.8, -0.5);
        double noise_l = 1.7;
        DensityOperator rho = displaced_thermal_state(theta, noise_l, dim);
        auto [a, adag] = ladder_operators(dim);
        Eigen::MatrixXcd centered = a.entries - theta * Eigen::MatrixXcd::Identity(51, 51);
        // <(b-theta)(b-theta)†> = L for the anti-normal moment
        Complex moment = (rho.op.entries * (centered * centered.adjoint())).trace();
        CHECK(std::abs(moment - Complex(noise_l, 0)) <= 1e-5);
    }
    SUBCASE("PSD and trace for valid displacements") {
        FockDim dim(40);
        for (double noise_l : {1.0, 1.5, 3.0})
            for (Complex theta : {Complex(0.5, 0.5), Complex(-1.5, 0.2)}) {
                DensityOperator rho = displaced_thermal_state(theta, noise_l, dim);
                REQUIRE(coherent_state(theta, dim).norm_deficit() <= 1e-8);
                CHECK(std::abs(rho.trace().real() - 1.0) <= 1e-6);
                CHECK(rho.hermiticity_defect() <= 1e-12);
                CHECK(psd_check(rho.op, 1e-9).is_psd);
            }
    }
    SUBCASE("rejects sub-vacuum noise and oversized displacements") {
        CHECK_THROWS_AS(displaced_thermal_state(Complex(0, 0), 0.5, FockDim(10)),
                        std::invalid_argument);
        CHECK_THROWS_AS(displaced_thermal_state(Complex(6.0, 0), 1.0, FockDim(10)),
                        std::invalid_argument);
    }
    SUBCASE("maximum-likelihood eigen-relation rho(beta)|beta> = L^-1 |beta>") {
        FockDim dim(40);
        for (double noise_l : {1.0, 2.0})
            for (Complex beta : {Complex(0.5, 0), Complex(1.0, -1.0), Complex(2.0, 0)}) {
                DensityOperator rho = displaced_thermal_state(beta, noise_l, dim);
                StateVector ket = coherent_state(beta, dim);
                CHECK((rho.op.entries * ket.amplitudes - ket.amplitudes / noise_l).norm() <= 1e-7);
            }
    }
}

TEST_CASE("heterodyne likelihood closed form") {
    CHECK(heterodyne_likelihood(Complex(0.3, -0.7), Complex(0.3, -0.7), 1.0) ==
          doctest::Approx(1.0));
    CHECK(heterodyne_likelihood(Complex(1, 0), Complex(0, 0), 1.0) ==
          doctest::Approx(std::exp(-1.0)));
    CHECK(heterodyne_likelihood(Complex(0.5, 0), Complex(0.5, 0), 2.0) == doctest::Approx(0.5));

    SUBCASE("matches the Husimi value of the truncated state") {
        FockDim dim(50);
        Complex beta(1.0, 0.0), theta(0.0, 0.0);
        for (double noise_l : {1.0, 1.5}) {
            DensityOperator rho = displaced_thermal_state(theta, noise_l, dim);
            StateVector probe = coherent_state(beta, dim);
            double husimi = probe.amplitudes.dot(rho.op.entries * probe.amplitudes).real();
            CHECK(std::abs(husimi - heterodyne_likelihood(beta, theta, noise_l)) <= 1e-8);
        }
    }
    SUBCASE("integrates to one under d mu") {
        double sum = 0.0, step = 0.1;
        for (double x = -6; x <= 6 + 1e-12; x += step)
            for (double y = -6; y <= 6 + 1e-12; y += step)
                sum += heterodyne_likelihood(Complex(x, y), Complex(0.4, -0.2), 1.5) * step * step /
                       std::numbers::pi;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("marginal output density") {
    ChannelParams p11 = derive_channel_matrices(1.0, 1.0);
    CHECK(marginal_output_density(Complex(0, 0), p11) == doctest::Approx(0.5));

    SUBCASE("one-sigma point") {
        ChannelParams p = derive_channel_matrices(2.0, 1.5);
        double sl = 3.5;
        CHECK(marginal_output_density(Complex(std::sqrt(sl), 0), p) ==
              doctest::Approx(std::exp(-1.0) / sl));
    }
    SUBCASE("equals the likelihood-prior convolution by quadrature") {
        ChannelParams p = derive_channel_matrices(1.0, 1.0);
        Complex beta(0.3, 0.0);
        double step = 0.1, sum = 0.0;
        for (double x = -6; x <= 6 + 1e-12; x += step)
            for (double y = -6; y <= 6 + 1e-12; y += step) {
                Complex theta(x, y);
                sum += heterodyne_likelihood(beta, theta, p.L[0]) * prior_density(theta, p) *
                       step * step / std::numbers::pi;
            }
        CHECK(std::abs(sum - marginal_output_density(beta, p)) <= 1e-4);
    }
}

TEST_CASE("posterior density") {
    SUBCASE("mean and inverse covariance at S=1, L=1") {
        ChannelParams p = derive_channel_matrices(1.0, 1.0);
        // posterior peaks at A beta = 1 with M = 2
        double at_mean = posterior_density(Complex(1, 0), Complex(2, 0), p);
        CHECK(at_mean == doctest::Approx(2.0));
        double off = posterior_density(Complex(1.5, 0), Complex(2, 0), p);
        CHECK(off == doctest::Approx(2.0 * std::exp(-2.0 * 0.25)));
    }
    SUBCASE("zero outcome leaves the prior mean") {
        ChannelParams p = derive_channel_matrices(0.7, 1.3);
        double peak = posterior_density(Complex(0, 0), Complex(0, 0), p);
        for (Complex theta : {Complex(0.2, 0.1), Complex(-0.3, 0.4)})
            CHECK(posterior_density(theta, Complex(0, 0), p) < peak);
    }
    SUBCASE("pointwise Bayes identity") {
        ChannelParams p = derive_channel_matrices(1.0, 1.5);
        Complex theta(0.3, 0.1), beta(-0.2, 0.0);
        double lhs = posterior_density(theta, beta, p) * marginal_output_density(beta, p);
        double rhs = heterodyne_likelihood(beta, theta, p.L[0]) * prior_density(theta, p);
        CHECK(std::abs(lhs - rhs) / rhs <= 1e-10);
    }
    SUBCASE("degenerate prior is an error") {
        ChannelParams p = derive_channel_matrices(0.0, 1.5);
        CHECK_THROWS_AS(posterior_density(Complex(0, 0), Complex(1, 0), p), std::domain_error);
    }
}

TEST_CASE("gaussian prior density integrates to one") {
    ChannelParams p = derive_channel_matrices(1.3, 1.0);
    double step = 0.1, sum = 0.0;
    for (double x = -7; x <= 7 + 1e-12; x += step)
        for (double y = -7; y <= 7 + 1e-12; y += step)
            sum += prior_density(Complex(x, y), p) * step * step / std::numbers::pi;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("truncation safe radius matches the deficit definition") {
    FockDim dim(40);
    double radius = truncation_safe_radius(dim, 1e-6);
    CHECK(coherent_state(Complex(radius * 0.999, 0), dim).norm_deficit() <= 1e-6);
    CHECK(coherent_state(Complex(radius * 1.01, 0), dim).norm_deficit() > 1e-6);
}
