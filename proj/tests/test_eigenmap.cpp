#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "eigenlab/eigenmap.hpp"
#include "eigenlab/error.hpp"
#include "eigenlab/exact_spectra.hpp"
#include "eigenlab/laplacians.hpp"
#include "eigenlab/rng.hpp"

using namespace eigenlab;
using namespace eigenlab::emap;

namespace {

Eigenmap grid_map(std::size_t n, std::size_t dims) {
    auto pts = spaces::sample_grid(n);
    return build_eigenmap(lap::graph_lap_eps(pts, 2.0 / double(n - 1)), dims);
}

linalg::SparseSymOperator ring(std::size_t n) {
    std::vector<linalg::Edge> e;
    for (std::size_t i = 0; i < n; ++i) e.push_back({i, (i + 1) % n, 1.0});
    return linalg::SparseSymOperator::from_edges(n, e);
}

Eigen::MatrixXd rotation(double t) {
    Eigen::MatrixXd r(2, 2);
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return r;
}

}  // namespace

TEST_CASE("grid eigenmap lies on the parabola") {
    auto m = grid_map(200, 2);
    REQUIRE(m.dims() == 2);
    CHECK(m.eigenvalues[0] == doctest::Approx(std::cos(std::numbers::pi / 199) - 1).epsilon(1e-10));
    double worst = 0;
    for (Eigen::Index i = 0; i < m.coords.rows(); ++i) {
        const double s = m.coords(i, 0);
        worst = std::max(worst, std::abs(m.coords(i, 1) - (2 * s * s - 1)));
    }
    CHECK(worst <= 1e-6);
    CHECK(m.coords.col(0).cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.skipped_zero_modes == 1);
    CHECK(m.warnings.empty());
}

TEST_CASE("Chebyshev chain on the grid") {
    auto m = grid_map(120, 5);
    for (std::size_t k = 2; k <= 5; ++k) {
        double best = 1e300;
        for (int sigma : {1, -1}) {
            double worst = 0;
            for (Eigen::Index i = 0; i < m.coords.rows(); ++i)
                worst = std::max(worst, std::abs(m.coords(i, Eigen::Index(k - 1)) - sigma * exact::chebyshev_T(int(k), m.coords(i, 0))));
            best = std::min(best, worst);
        }
        CHECK(best <= 1e-6);
    }
    auto f2 = fit_polynomial_image(m, 1, 2, 2);
    auto f3 = fit_polynomial_image(m, 1, 3, 3);
    auto f4 = fit_polynomial_image(m, 1, 4, 4);
    const std::vector<double> t2{2, 0, -1}, t3{4, 0, -3, 0}, t4{8, 0, -8, 0, 1};
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(f2.coeffs[i] - t2[i]) <= 1e-6);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(std::abs(f3.coeffs[i]) - std::abs(t3[i])) <= 1e-6);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(std::abs(f4.coeffs[i]) - std::abs(t4[i])) <= 1e-6);
    CHECK_THROWS_AS(fit_polynomial_image(m, 0, 2, 2), InputError);
    CHECK_THROWS_AS(fit_polynomial_image(m, 1, 6, 2), InputError);
}

TEST_CASE("constant column is degenerate") {
    Eigenmap m;
    m.coords = Eigen::MatrixXd::Ones(10, 2);
    m.eigenvalues = {-0.1, -0.2};
    m.l2_maxabs = {1, 1};
    CHECK_THROWS_AS(fit_polynomial_image(m, 1, 2, 2), InputError);
}

TEST_CASE("ring eigenmap is a circle") {
    // Columns are scaled separately to max-abs 1, which turns the circle into a
    // slight ellipse on a discrete ring; the unit-L2 coordinates are exact.
    auto m = build_eigenmap(ring(90), 2);
    CHECK(m.eigenvalues[0] == doctest::Approx(m.eigenvalues[1]).epsilon(1e-10));
    const Eigen::MatrixXd u = m.unit_l2();
    const double r0 = u.row(0).norm();
    for (Eigen::Index i = 0; i < u.rows(); ++i) CHECK(std::abs(u.row(i).norm() - r0) <= 1e-6 * r0);
    CHECK(r0 == doctest::Approx(std::sqrt(2.0 / 90)).epsilon(1e-8));
}

TEST_CASE("complete graph eigenmap") {
    const std::size_t n = 30;
    std::vector<linalg::Edge> e;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) e.push_back({i, j, 1.0});
    auto m = build_eigenmap(linalg::SparseSymOperator::from_edges(n, e), 4);
    for (double l : m.eigenvalues) CHECK(l == doctest::Approx(-double(n) / double(n - 1)).epsilon(1e-10));
    const Eigen::MatrixXd u = m.unit_l2();
    const Eigen::MatrixXd g = u.transpose() * u;
    CHECK((g - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((u.transpose() * Eigen::VectorXd::Ones(Eigen::Index(n))).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("disconnected graph skips extra zero modes") {
    spaces::PointSet pts;
    pts.dim = 1;
    for (int i = 0; i < 20; ++i) pts.coords.push_back(-1 + 0.02 * i);
    for (int i = 0; i < 20; ++i) pts.coords.push_back(0.5 + 0.02 * i);
    auto m = build_eigenmap(lap::graph_lap_eps(pts, 0.021), 2);
    CHECK(m.skipped_zero_modes == 2);
    CHECK(m.warnings.size() == 1);
    for (double l : m.eigenvalues) CHECK(std::abs(l) > 1e-6);
    CHECK_THROWS_AS(build_eigenmap(lap::graph_lap_eps(spaces::sample_grid(3), 1.0), 3), InputError);
}

TEST_CASE("eigenmap is invariant under relabeling") {
    auto pts = spaces::sample_uniform(spaces::Space::square(), 400, 21);
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    CounterRng rng(5);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    spaces::PointSet shuffled = pts;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (int c = 0; c < 2; ++c) shuffled.coords[2 * i + std::size_t(c)] = pts.at(perm[i], c);
    auto a = build_eigenmap(lap::graph_lap_eps(pts, 0.4), 3, {1e-10, 1, {}});
    auto b = build_eigenmap(lap::graph_lap_eps(shuffled, 0.4), 3, {1e-10, 9, {}});
    for (std::size_t d = 0; d < 3; ++d) CHECK(a.eigenvalues[d] == doctest::Approx(b.eigenvalues[d]).epsilon(1e-9));
    double worst = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (Eigen::Index d = 0; d < 3; ++d) worst = std::max(worst, std::abs(b.coords(Eigen::Index(i), d) - a.coords(Eigen::Index(perm[i]), d)));
    CHECK(worst <= 1e-6);
}

TEST_CASE("anchored sign convention") {
    auto pts = spaces::sample_uniform(spaces::Space::interval(), 800, 3);
    const std::size_t right = rightmost_point(pts);
    auto m = build_eigenmap(lap::graph_lap_eps(pts, 0.1), 3, {1e-9, 0, right});
    for (Eigen::Index d = 0; d < 3; ++d) CHECK(m.coords(Eigen::Index(right), d) > 0.5);
}

TEST_CASE("alignment") {
    CounterRng rng(8);
    Eigenmap a;
    a.coords.resize(50, 3);
    for (Eigen::Index i = 0; i < 50; ++i)
        for (Eigen::Index d = 0; d < 3; ++d) a.coords(i, d) = rng.uniform(-1, 1);
    a.eigenvalues = {-0.1, -0.1, -0.3};
    a.l2_maxabs = {1, 1, 1};
    Eigenmap b = a;
    b.coords.leftCols(2) = a.coords.leftCols(2) * rotation(0.7);
    b.coords.col(2) *= -1;
    auto r = align_eigenmaps(a, b, {{1, 2}, {3}});
    CHECK((r.aligned - a.coords).norm() <= 1e-8);
    CHECK(r.rms_after <= 1e-10);
    CHECK(r.rms_before > 0.1);
    CHECK(std::abs(std::abs(r.angles[0]) - 0.7) <= 1e-10);
    CHECK(r.transforms[1](0, 0) == doctest::Approx(-1.0));
    CHECK(!r.reflections[0]);

    // identical inputs give a zero angle
    auto same = align_eigenmaps(a, a, {{1, 2}});
    CHECK(std::abs(same.angles[0]) <= 1e-12);

    // never increases the discrepancy
    for (int t = 0; t < 20; ++t) {
        Eigen::MatrixXd x(40, 3), y(40, 3);
        for (Eigen::Index i = 0; i < 40; ++i)
            for (Eigen::Index d = 0; d < 3; ++d) x(i, d) = rng.uniform(-1, 1), y(i, d) = rng.uniform(-1, 1);
        auto al = align_columns(x, y, {{1, 2}, {3}});
        CHECK((al.aligned - x).norm() <= (y - x).norm() + 1e-12);
        CHECK(al.rms_after <= al.rms_before + 1e-12);
    }

    Eigenmap c = b;
    c.eigenvalues = {-0.1, -0.2, -0.3};
    CHECK_THROWS_AS(align_eigenmaps(a, c, {{1, 2}}), InputError);
    CHECK_THROWS_AS(align_eigenmaps(a, b, {{1, 2}, {2}}), InputError);
}

TEST_CASE("eigenmap CSV round trip") {
    auto pts = spaces::sample_grid(30);
    auto m = build_eigenmap(lap::graph_lap_eps(pts, 2.0 / 29), 3);
    std::stringstream ss;
    write_csv(ss, m, pts);
    const std::string text = ss.str();
    CHECK(text.substr(0, text.find('\n')) == "point_index,x1,phi_1,phi_2,phi_3,lambda_1,lambda_2,lambda_3");
    auto t = read_csv(ss);
    CHECK(t.map.coords == m.coords);
    CHECK(t.map.eigenvalues == m.eigenvalues);
    CHECK(t.points.coords == pts.coords);
}
