#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "qdopt/fock.hpp"

using namespace qdopt;

TEST_CASE("ladder operators have the forced matrix elements") {
    auto [a, adag] = ladder_operators(FockDim(1));
    CHECK(a.entries(0, 1).real() == doctest::Approx(1.0));
    CHECK(a.entries(0, 0) == Complex(0, 0));
    CHECK(a.entries(1, 0) == Complex(0, 0));
    CHECK(a.entries(1, 1) == Complex(0, 0));

    auto pair2 = ladder_operators(FockDim(2));
    CHECK(pair2.annihilate.entries(1, 2).real() == doctest::Approx(std::sqrt(2.0)));
    CHECK((pair2.create.entries - pair2.annihilate.entries.adjoint()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("commutator equals identity below the truncation level") {
    for (int n_max : {1, 5, 20}) {
        FockDim dim(n_max);
        auto [a, adag] = ladder_operators(dim);
        TruncatedOperator comm = a * adag - adag * a;
        for (int i = 0; i < n_max; ++i) CHECK(comm.entries(i, i).real() == doctest::Approx(1.0));
        CHECK(comm.entries(n_max, n_max).real() == doctest::Approx(double(-n_max)));
        // off-diagonals vanish identically
        for (int i = 0; i <= n_max; ++i)
            for (int j = 0; j <= n_max; ++j)
                if (i != j) CHECK(std::abs(comm.entries(i, j)) == 0.0);
    }
}

TEST_CASE("coherent state amplitudes and overlaps") {
    SUBCASE("vacuum") {
        StateVector v = coherent_state(Complex(0, 0), FockDim(10));
        CHECK(v.amplitudes(0) == Complex(1, 0));
        CHECK(v.norm_deficit() == doctest::Approx(0.0).epsilon(1e-14));
        CHECK_FALSE(v.truncation_warning());
    }
    SUBCASE("|<0|beta>|^2 = exp(-1) at beta = 1") {
        StateVector v = coherent_state(Complex(1, 0), FockDim(30));
        CHECK(std::norm(v.amplitudes(0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
        CHECK(inner(v, v).real() == doctest::Approx(1.0 - v.norm_deficit()).epsilon(1e-14));
        CHECK(v.norm_deficit() < 1e-8);
    }
    SUBCASE("overlap matches the Gaussian formula") {
        FockDim dim(30);
        StateVector plus = coherent_state(Complex(0.5, 0), dim);
        StateVector minus = coherent_state(Complex(-0.5, 0), dim);
        CHECK(std::norm(inner(plus, minus)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
    }
}

TEST_CASE("coherent overlap property across a small pair grid") {
    FockDim dim(40);
    const Complex points[] = {{0.3, 0.1}, {-0.7, 0.4}, {1.1, -0.2}, {0.0, 0.9}};
    for (Complex b1 : points)
        for (Complex b2 : points) {
            StateVector v1 = coherent_state(b1, dim);
            StateVector v2 = coherent_state(b2, dim);
            double expected = std::exp(-std::norm(b1 - b2));
            double larger_deficit = std::max(v1.norm_deficit(), v2.norm_deficit());
            CHECK(std::abs(std::norm(inner(v1, v2)) - expected) <=
                  10.0 * std::max(larger_deficit, 1e-15));
        }
}

TEST_CASE("displacement acts on vacuum as the coherent state") {
    FockDim dim(40);
    Complex beta(0.7, 0.0);
    TruncatedOperator d = displacement(beta, dim);
    StateVector expected = coherent_state(beta, dim);
    Eigen::VectorXcd displaced = d.entries.col(0);
    CHECK((displaced - expected.amplitudes).cwiseAbs().maxCoeff() <= 1e-10);

    SUBCASE("inverse displacement on low levels") {
        TruncatedOperator dd = displacement(beta, dim) * displacement(-beta, dim);
        Eigen::MatrixXcd dev =
            dd.entries - Eigen::MatrixXcd::Identity(dim.size(), dim.size());
        CHECK(dev.topLeftCorner(21, 21).cwiseAbs().maxCoeff() <= 1e-9);
    }
    SUBCASE("beta = 0 is the identity") {
        TruncatedOperator id = displacement(Complex(0, 0), FockDim(8));
        CHECK((id.entries - Eigen::MatrixXcd::Identity(9, 9)).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("normal ordered gaussian special values") {
    SUBCASE("rate 1 at the origin is the vacuum projector") {
        TruncatedOperator p = normal_ordered_gaussian(1.0, 1.0, Complex(0, 0), FockDim(6));
        Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(7, 7);
        expected(0, 0) = 1.0;
        CHECK((p.entries - expected).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("rate 0 is the identity") {
        TruncatedOperator p = normal_ordered_gaussian(1.0, 0.0, Complex(0.4, -0.3), FockDim(12));
        CHECK((p.entries - Eigen::MatrixXcd::Identity(13, 13)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("rate outside [0, 1] is rejected") {
        CHECK_THROWS_AS(normal_ordered_gaussian(1.0, 1.2, Complex(0, 0), FockDim(4)),
                        std::invalid_argument);
        CHECK_THROWS_AS(normal_ordered_gaussian(1.0, -0.1, Complex(0, 0), FockDim(4)),
                        std::invalid_argument);
    }
    SUBCASE("coherent matrix element matches the closed form") {
        // <beta| :exp(-r b†b): |beta> = exp(-r |beta|^2); the annihilators act
        // first, so the diagonal value is scalar even though G|beta> is not
        // proportional to |beta> away from the center
        FockDim dim(40);
        Complex beta(0.8, 0.0);
        TruncatedOperator g = normal_ordered_gaussian(1.0, 0.5, Complex(0, 0), dim);
        StateVector ket = coherent_state(beta, dim);
        Complex value = ket.amplitudes.dot(g.entries * ket.amplitudes);
        CHECK(std::abs(value - std::exp(-0.5 * std::norm(beta))) <= 1e-9);
    }
}

TEST_CASE("normal ordered action at the center and Husimi values") {
    FockDim dim(40);
    for (double rate : {0.0, 0.3, 0.7, 1.0})
        for (Complex center : {Complex(0, 0), Complex(0.5, -0.4)}) {
            TruncatedOperator g = normal_ordered_gaussian(1.0, rate, center, dim);
            // the (b - center) factor annihilates |center>, so the exponent
            // collapses and |center> is an exact eigenvector
            StateVector anchor = coherent_state(center, dim);
            CHECK((g.entries * anchor.amplitudes - anchor.amplitudes).norm() <= 1e-10);
            for (Complex beta : {Complex(0.3, 0.3), Complex(-1.0, 0.2)}) {
                StateVector ket = coherent_state(beta, dim);
                REQUIRE(ket.norm_deficit() <= 1e-10);
                Complex value = ket.amplitudes.dot(g.entries * ket.amplitudes);
                CHECK(std::abs(value - std::exp(-rate * std::norm(beta - center))) <= 1e-8);
            }
        }
}

TEST_CASE("hermitian spectrum") {
    SUBCASE("diagonal input") {
        TruncatedOperator op = TruncatedOperator::zero(FockDim(2));
        op.entries(0, 0) = 3.0;
        op.entries(1, 1) = 1.0;
        op.entries(2, 2) = 2.0;
        auto spec = hermitian_spectrum(op);
        CHECK(spec.eigenvalues(0) == doctest::Approx(1.0));
        CHECK(spec.eigenvalues(1) == doctest::Approx(2.0));
        CHECK(spec.eigenvalues(2) == doctest::Approx(3.0));
    }
    SUBCASE("rank-one projector") {
        FockDim dim(5);
        StateVector e0{dim, Eigen::VectorXcd::Unit(6, 0)};
        TruncatedOperator proj{dim, e0.amplitudes * e0.amplitudes.adjoint()};
        auto spec = hermitian_spectrum(proj);
        for (int i = 0; i < 5; ++i) CHECK(spec.eigenvalues(i) == doctest::Approx(0.0));
        CHECK(spec.eigenvalues(5) == doctest::Approx(1.0));
    }
    SUBCASE("thermal spectrum is geometric") {
        // mean thermal photons 1 -> eigenvalues (1/2)^(n+1)
        FockDim dim(40);
        TruncatedOperator rho = displaced_geometric_diagonal(0.5, 0.5, Complex(0.9, -0.3), dim);
        auto spec = hermitian_spectrum(rho, 1e-10);
        for (int n = 0; n <= 12; ++n)
            CHECK(spec.eigenvalues(dim.size() - 1 - n) ==
                  doctest::Approx(std::pow(0.5, n + 1)).epsilon(1e-9));
    }
    SUBCASE("reconstruction bound") {
        FockDim dim(25);
        TruncatedOperator rho = displaced_geometric_diagonal(0.4, 0.4, Complex(0.5, 0.2), dim);
        auto spec = hermitian_spectrum(rho);
        Eigen::MatrixXcd rebuilt = spec.eigenvectors *
                                   spec.eigenvalues.cast<Complex>().asDiagonal() *
                                   spec.eigenvectors.adjoint();
        CHECK((rebuilt - rho.entries).cwiseAbs().maxCoeff() <= 1e-9 * rho.max_abs());
    }
    SUBCASE("non-hermitian input is rejected") {
        auto [a, adag] = ladder_operators(FockDim(4));
        CHECK_THROWS_AS(hermitian_spectrum(a), std::invalid_argument);
    }
}

TEST_CASE("psd check") {
    FockDim dim(1);
    CHECK(psd_check(TruncatedOperator::identity(dim), 1e-10).is_psd);
    CHECK(psd_check(TruncatedOperator::identity(dim), 1e-10).min_eigenvalue ==
          doctest::Approx(1.0));

    TruncatedOperator indefinite = TruncatedOperator::zero(dim);
    indefinite.entries(0, 0) = 1.0;
    indefinite.entries(1, 1) = -0.5;
    auto rep = psd_check(indefinite, 1e-10);
    CHECK_FALSE(rep.is_psd);
    CHECK(rep.min_eigenvalue == doctest::Approx(-0.5));
}

TEST_CASE("two-route equality of the thermal construction") {
    FockDim dim(30);
    for (double noise_l : {1.0, 1.5, 2.0, 3.0}) {
        Complex theta(0.4, -0.6);
        TruncatedOperator a = normal_ordered_gaussian(1.0 / noise_l, 1.0 / noise_l, theta, dim);
        TruncatedOperator b = displaced_geometric_diagonal(1.0 / noise_l, 1.0 / noise_l, theta, dim);
        CHECK((a.entries - b.entries).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("reference series evaluator") {
    SUBCASE("center 0 reproduces the geometric diagonal") {
        for (double rate : {0.25, 1.0, 1.4}) {
            for (int m = 0; m <= 6; ++m)
                for (int n = 0; n <= 6; ++n) {
                    Complex v = reference::normal_ordered_gaussian_element(2.0, rate, Complex(0, 0),
                                                                           m, n);
                    double expected = m == n ? 2.0 * std::pow(1.0 - rate, n) : 0.0;
                    CHECK(std::abs(v - Complex(expected, 0)) <= 1e-12);
                }
        }
    }
    SUBCASE("vacuum element matches the coherent closed form") {
        // <0|:exp(-r (b-mu)†(b-mu)):|0> = exp(-r |mu|^2)
        for (double rate : {0.5, 1.2})
            for (Complex mu : {Complex(0.3, 0.0), Complex(-0.4, 0.7)}) {
                Complex v = reference::normal_ordered_gaussian_element(1.0, rate, mu, 0, 0);
                CHECK(std::abs(v - std::exp(-rate * std::norm(mu))) <= 1e-13);
            }
    }
    SUBCASE("matches the displaced-diagonal route") {
        // the route is compared on the 13x13 block with headroom above it;
        // without headroom its own top levels carry truncation error
        FockDim work(24);
        for (double rate : {0.6, 1.0, 1.4}) {
            Complex mu(0.35, 0.2);
            TruncatedOperator route = displaced_geometric_diagonal(1.0, rate, mu, work);
            for (int m = 0; m <= 12; ++m)
                for (int n = 0; n <= 12; ++n) {
                    Complex series =
                        reference::normal_ordered_gaussian_element(1.0, rate, mu, m, n);
                    CHECK(std::abs(route.entries(m, n) - series) <= 1e-12);
                }
        }
    }
}

TEST_CASE("fock dim rejects degenerate truncations") {
    CHECK_THROWS_AS(FockDim(0), std::invalid_argument);
    CHECK_THROWS_AS(FockDim(-3), std::invalid_argument);
}
