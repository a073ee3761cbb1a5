#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "flowspec/subspace.hpp"
#include "support/synthetic.hpp"

using namespace flowspec;
using Basis = SubspaceBasis<double>;

namespace {

Basis e(Index m, std::initializer_list<Index> axes) {
    MatrixXd b = MatrixXd::Zero(m, static_cast<Index>(axes.size()));
    Index c = 0;
    for (Index a : axes) {
        b(a, c++) = 1.0;
    }
    return Basis(b);
}

Basis diagonal_line() {
    MatrixXd b(2, 1);
    b << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    return Basis(b);
}

} // namespace

TEST_CASE("principal angles on analytic cases") {
    const Basis f = Basis(synthetic::random_orthonormal(6, 3, 81));
    CHECK(principal_angles(f, f).cwiseAbs().maxCoeff() <= 1e-7);

    const auto right = principal_angles(e(2, {0}), e(2, {1}));
    CHECK(right(0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));

    const auto quarter = principal_angles(e(2, {0}), diagonal_line());
    CHECK(quarter(0) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-12));
}

TEST_CASE("principal angles against an independent oracle") {
    // Planes in R^5 with known angles: span(e0, e1) vs span(cos a e0 + sin a e2, cos b e1 + sin b e3).
    const double a = 0.3;
    const double b = 1.1;
    MatrixXd g = MatrixXd::Zero(5, 2);
    g(0, 0) = std::cos(a);
    g(2, 0) = std::sin(a);
    g(1, 1) = std::cos(b);
    g(3, 1) = std::sin(b);
    const auto angles = principal_angles(e(5, {0, 1}), Basis(g));
    CHECK(angles(0) == doctest::Approx(a).epsilon(1e-12));
    CHECK(angles(1) == doctest::Approx(b).epsilon(1e-12));

    // dim(f) > dim(g) is allowed for angles.
    const auto mixed = principal_angles(e(5, {0, 1, 2}), Basis(g));
    CHECK(mixed.size() == 2);
    CHECK(mixed(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mixed(1) == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("principal angle errors") {
    CHECK_THROWS_AS(principal_angles(e(3, {0}), e(4, {0})), DimensionError);
    CHECK_THROWS_AS(principal_angles(e(4, {0}), e(4, {0, 1})), DimensionError);
    CHECK_THROWS_AS(Basis(MatrixXd::Ones(3, 2)), DataError);
}

TEST_CASE("distance") {
    const Basis f = Basis(synthetic::random_orthonormal(9, 3, 82));
    CHECK(distance(f, f) <= 1e-14);
    CHECK(distance(e(2, {0}), e(2, {1})) == 1.0);
    CHECK(std::abs(distance(e(2, {0}), diagonal_line()) - std::sin(std::numbers::pi / 4)) <=
          1e-12);
    CHECK_THROWS_AS(distance(e(3, {0}), e(3, {0, 1})), DimensionError);
}

TEST_CASE("distance properties on random subspaces") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Index m = 4 + static_cast<Index>(seed % 7);
        const Index q = 1 + static_cast<Index>(seed % 3);
        const MatrixXd qf = synthetic::random_orthonormal(m, q, 900 + seed);
        const MatrixXd qg = synthetic::random_orthonormal(m, q, 1900 + seed);
        const Basis f(qf);
        const Basis g(qg);
        const double d = distance(f, g);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        CHECK(distance(g, f) == d);
        CHECK(std::abs(d - synthetic::oracle_distance(qf, qg)) <= 1e-12);

        const MatrixXd rot = synthetic::random_orthonormal(q, q, 2900 + seed);
        CHECK(std::abs(distance(Basis(qf * rot), g) - d) <= 1e-10);
        CHECK(distance(Basis(qf * rot), f) <= 1e-10);
    }
}

TEST_CASE("small distance implies containment") {
    const MatrixXd base = synthetic::random_orthonormal(12, 3, 83);
    const MatrixXd perturbed =
        synthetic::orthonormal_columns(base + 1e-10 * synthetic::random_matrix(12, 3, 84));
    const double d = distance(Basis(base), Basis(perturbed));
    CHECK(d <= 1e-8);
    for (Index i = 0; i < 3; ++i) {
        const VectorXd v = base.col(i);
        CHECK((v - perturbed * (perturbed.transpose() * v)).norm() <= 1e-6);
    }
}

TEST_CASE("stability study") {
    SUBCASE("rank-q data gives identical subspaces") {
        VectorXd sigma(3);
        sigma << 3, 2, 1;
        const MatrixXd y = synthetic::low_rank(60, 40, sigma, 85);
        RsvdConfig cfg;
        cfg.oversampling = 5;
        cfg.seed = 10;
        const auto report = stability_study(y, 3, 2, cfg);
        CHECK(report.pairwise_distances.size() == 1);
        CHECK(report.mean <= 1e-6);
        CHECK(report.seeds == std::vector<std::uint64_t>{10, 11});
    }
    SUBCASE("statistics are recomputable from the list") {
        const MatrixXd y = synthetic::noisy_low_rank_frames(300, 80, 8, 0.5, 86);
        RsvdConfig cfg;
        cfg.seed = 3;
        const auto report = stability_study(y, 3, 5, cfg);
        CHECK(report.pairwise_distances.size() == 10);
        double mean = 0.0;
        for (double d : report.pairwise_distances) {
            CHECK(d >= 0.0);
            CHECK(d <= 1.0);
            mean += d;
        }
        mean /= 10.0;
        double ss = 0.0;
        for (double d : report.pairwise_distances) {
            ss += (d - mean) * (d - mean);
        }
        CHECK(std::abs(report.mean - mean) <= 1e-12);
        CHECK(std::abs(report.std_dev - std::sqrt(ss / 9.0)) <= 1e-12);

        const auto again = stability_study(y, 3, 5, cfg);
        CHECK(again.pairwise_distances == report.pairwise_distances);
    }
    SUBCASE("needs two runs") {
        CHECK_THROWS_AS(stability_study(MatrixXd::Ones(10, 10), 1, 1, RsvdConfig{}), DimensionError);
    }
}

TEST_CASE("desk-scale stability baseline") {
    const MatrixXd y = synthetic::noisy_low_rank_frames(4096, 450, 8, 0.01, 87);
    RsvdConfig cfg;
    cfg.seed = 0;
    const auto report = stability_study(y, 3, 5, cfg);
    CHECK(report.mean >= 0.0);
    CHECK(report.mean <= 0.3);
    CHECK(report.std_dev <= report.mean);
}
