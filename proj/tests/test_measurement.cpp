#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qdopt/measurement.hpp"

using namespace qdopt;

namespace {

DiscretePOVM two_projector_povm(FockDim dim) {
    Eigen::MatrixXcd p0 = Eigen::MatrixXcd::Zero(dim.size(), dim.size());
    p0(0, 0) = 1.0;
    Eigen::MatrixXcd rest = Eigen::MatrixXcd::Identity(dim.size(), dim.size()) - p0;
    return DiscretePOVM(dim, std::vector<Eigen::MatrixXcd>{p0, rest}, {0, 1}, {1.0, 1.0});
}

}  // namespace

TEST_CASE("heterodyne grid geometry") {
    HeterodyneGrid grid = make_heterodyne_grid(2.0, 0.5);
    CHECK(grid.points.size() == 81);  // 9 x 9 lattice
    CHECK(grid.cell_measure == doctest::Approx(0.25 / std::numbers::pi));
    bool has_origin = false;
    for (Complex p : grid.points)
        if (p == Complex(0, 0)) has_origin = true;
    CHECK(has_origin);
}

TEST_CASE("heterodyne grid povm") {
    SUBCASE("level-0 resolution at production settings") {
        DiscretePOVM povm = heterodyne_grid_povm(6.0, 0.1, FockDim(30));
        auto report = identity_resolution_report(povm);
        CHECK(std::abs(report.level_deficit(0)) <= 1e-4);
        CHECK(report.max_offdiagonal <= 1e-10);
        CHECK(report.n_eff >= 10);
        // deficits grow toward the truncation edge
        CHECK(report.level_deficit(30) > report.level_deficit(10));
    }
    SUBCASE("small extent loses high levels quickly") {
        DiscretePOVM povm = heterodyne_grid_povm(2.0, 0.2, FockDim(12));
        auto report = identity_resolution_report(povm);
        CHECK(std::abs(report.level_deficit(0)) <= 0.05);
        CHECK(report.level_deficit(4) > 0.3);
        CHECK(report.level_deficit(8) > report.level_deficit(4));
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(heterodyne_grid_povm(6.0, 0.6, FockDim(10)), std::invalid_argument);
        CHECK_THROWS_AS(heterodyne_grid_povm(1.5, 0.1, FockDim(10)), std::invalid_argument);
    }
    SUBCASE("every element is PSD by construction") {
        DiscretePOVM povm = heterodyne_grid_povm(3.0, 0.5, FockDim(12));
        CHECK(povm.min_element_eigenvalue() >= -1e-9);
        // spot-check materialized elements through the dense eigensolver
        for (std::size_t k = 0; k < povm.size(); k += 17) {
            auto rep = psd_check(TruncatedOperator{povm.dim(), povm.element(k)}, 1e-9);
            CHECK(rep.is_psd);
        }
    }
    SUBCASE("refining the step never hurts resolved levels") {
        FockDim dim(16);
        DiscretePOVM coarse = heterodyne_grid_povm(4.0, 0.4, dim);
        DiscretePOVM fine = heterodyne_grid_povm(4.0, 0.2, dim);
        auto rep_coarse = identity_resolution_report(coarse);
        auto rep_fine = identity_resolution_report(fine);
        for (int n = 0; n <= std::min(rep_coarse.n_eff, 16); ++n)
            CHECK(rep_fine.level_deficit(n) <= rep_coarse.level_deficit(n) + 1e-12);
    }
}

TEST_CASE("outcome distribution") {
    FockDim dim(10);
    SUBCASE("projective POVM on its own state") {
        DiscretePOVM povm = two_projector_povm(dim);
        StateVector e0{dim, Eigen::VectorXcd::Unit(dim.size(), 0)};
        auto dist = outcome_distribution(povm, DensityOperator::from_pure(e0));
        CHECK(dist.p[0] == doctest::Approx(1.0));
        CHECK(dist.p[1] == doctest::Approx(0.0));
        CHECK(dist.identity_deficit_felt == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("heterodyne probabilities match the Husimi closed form") {
        FockDim big(30);
        DiscretePOVM povm = heterodyne_grid_povm(6.0, 0.2, big);
        DensityOperator rho = displaced_thermal_state(Complex(0, 0), 1.0, big);
        auto dist = outcome_distribution(povm, rho);
        double w = 0.04 / std::numbers::pi;
        for (std::size_t k = 0; k < povm.size(); ++k) {
            Complex beta = std::get<Complex>(povm.labels()[k]);
            CHECK(std::abs(dist.p[k] - w * std::exp(-std::norm(beta))) <= 1e-6);
        }
    }
    SUBCASE("first moment of the outcome distribution") {
        FockDim big(40);
        DiscretePOVM povm = heterodyne_grid_povm(6.0, 0.2, big);
        DensityOperator rho = displaced_thermal_state(Complex(1, 0), 2.0, big);
        auto dist = outcome_distribution(povm, rho);
        Complex mean(0, 0);
        for (std::size_t k = 0; k < povm.size(); ++k)
            mean += dist.p[k] * std::get<Complex>(povm.labels()[k]);
        CHECK(std::abs(mean - Complex(1, 0)) <= 2e-2);
    }
    SUBCASE("probabilities are nonnegative and sum to one minus the felt deficit") {
        FockDim big(20);
        DiscretePOVM povm = heterodyne_grid_povm(4.0, 0.25, big);
        DensityOperator rho = displaced_thermal_state(Complex(0.5, 0.5), 1.3, big);
        auto dist = outcome_distribution(povm, rho);
        double sum = 0.0;
        for (double p : dist.p) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(std::abs(sum - (1.0 - dist.identity_deficit_felt)) <= dist.clipped_mass + 1e-8);
    }
    SUBCASE("dimension mismatch is rejected") {
        DiscretePOVM povm = two_projector_povm(dim);
        StateVector e0{FockDim(5), Eigen::VectorXcd::Unit(6, 0)};
        CHECK_THROWS_AS(outcome_distribution(povm, DensityOperator::from_pure(e0)),
                        std::invalid_argument);
    }
}

TEST_CASE("identity resolution report on a projective POVM") {
    auto report = identity_resolution_report(two_projector_povm(FockDim(8)));
    CHECK(report.level_deficit.cwiseAbs().maxCoeff() == 0.0);
    CHECK(report.max_offdiagonal == 0.0);
    CHECK(report.n_eff == 8);
}

TEST_CASE("remainder completion") {
    FockDim dim(8);
    SUBCASE("adds the missing projector") {
        Eigen::MatrixXcd p0 = Eigen::MatrixXcd::Zero(dim.size(), dim.size());
        p0(0, 0) = 1.0;
        DiscretePOVM partial(dim, std::vector<Eigen::MatrixXcd>{p0}, {0}, {1.0});
        CHECK(complete_with_remainder(partial));
        CHECK(partial.size() == 2);
        auto report = identity_resolution_report(partial);
        CHECK(report.level_deficit.cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("refuses a non-PSD remainder") {
        Eigen::MatrixXcd heavy = 1.5 * Eigen::MatrixXcd::Identity(dim.size(), dim.size());
        DiscretePOVM over(dim, std::vector<Eigen::MatrixXcd>{heavy}, {0}, {1.0});
        CHECK_FALSE(complete_with_remainder(over));
        CHECK(over.size() == 1);
    }
}
