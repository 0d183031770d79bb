#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "eigenlab/error.hpp"
#include "eigenlab/exact_spectra.hpp"
#include "eigenlab/linalg.hpp"
#include "eigenlab/rng.hpp"

using namespace eigenlab;
using namespace eigenlab::exact;
constexpr double pi = std::numbers::pi;

namespace {

// Richardson-extrapolated central second difference.
double second_diff(const EigenPair& p, double x) {
    double h = 0.04;
    double table[6][6];
    for (int i = 0; i < 6; ++i, h /= 2) {
        table[i][0] = (p.value(x + h) - 2 * p.value(x) + p.value(x - h)) / (h * h);
        double f = 4.0;
        for (int j = 1; j <= i; ++j, f *= 4.0) table[i][j] = table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (f - 1);
    }
    return table[5][5];
}

// Independent oracle: dense sign scan of the exponential form's imaginary
// part of q(w) = exp(4iw) conj(rhs); a root is a sign change with q = +1.
double scan_first_positive_root(double a, double b) {
    auto q = [&](double w) {
        using C = std::complex<double>;
        const C rhs = (C(a, -w) * C(b, w)) / (C(a, w) * C(b, -w));
        return std::exp(C(0, 4 * w)) * std::conj(rhs);
    };
    auto h = [&](double w) { return q(w).imag(); };
    const double step = 1e-6;
    double w = step, hw = h(w);
    while (true) {
        const double nxt = h(w + step);
        if ((hw < 0) != (nxt < 0) && q(w).real() > 0) {
            double lo = w, hi = w + step;
            for (int i = 0; i < 80; ++i) {
                const double mid = 0.5 * (lo + hi);
                if ((h(lo) < 0) != (h(mid) < 0)) hi = mid; else lo = mid;
            }
            return 0.5 * (lo + hi);
        }
        w += step;
        hw = nxt;
    }
}

}  // namespace

TEST_CASE("Neumann, Dirichlet and periodic modes") {
    auto neu = interval_eigenpairs(BoundaryCondition::neumann(), 6);
    REQUIRE(neu.size() == 7);
    CHECK(neu[0].lambda == 0.0);
    CHECK(neu[1].lambda == doctest::Approx(2.46740).epsilon(1e-5));
    CHECK(neu[1].value(0.3) == doctest::Approx(std::sin(pi * 0.3 / 2)).epsilon(1e-14));
    for (const auto& p : neu) {
        CHECK(std::abs(p.derivative(-1.0)) < 1e-10);
        CHECK(std::abs(p.derivative(1.0)) < 1e-10);
    }

    auto dir = interval_eigenpairs(BoundaryCondition::dirichlet(), 6);
    REQUIRE(dir.size() == 6);
    CHECK(dir[0].k == 1);
    CHECK(dir[0].value(0.3) == doctest::Approx(std::cos(pi * 0.3 / 2)).epsilon(1e-14));
    for (const auto& p : dir) {
        CHECK(p.lambda > 0.0);
        CHECK(std::abs(p.value(-1.0)) < 1e-10);
        CHECK(std::abs(p.value(1.0)) < 1e-10);
    }

    auto per = interval_eigenpairs(BoundaryCondition::periodic(), 4);
    REQUIRE(per.size() == 9);
    CHECK(per[1].lambda == doctest::Approx(pi * pi));
    CHECK(per[2].lambda == per[1].lambda);
    for (const auto& p : per) {
        CHECK(std::abs(p.value(-1.0) - p.value(1.0)) < 1e-10);
        CHECK(std::abs(p.derivative(-1.0) - p.derivative(1.0)) < 1e-10);
    }
    CHECK(group_multiplicities({0.0, per[1].lambda, per[2].lambda, per[3].lambda, per[4].lambda}) ==
          std::vector<std::size_t>{1, 2, 2});
}

TEST_CASE("every mode satisfies the eigen-equation and has unit norm") {
    CounterRng rng(2);
    for (auto bc : {BoundaryCondition::neumann(), BoundaryCondition::dirichlet(), BoundaryCondition::periodic(),
                    BoundaryCondition::robin(1.0, 1.0), BoundaryCondition::robin(-0.3, 2.0),
                    BoundaryCondition::robin(std::numeric_limits<double>::infinity(), 0.0)}) {
        for (const auto& p : interval_eigenpairs(bc, 5)) {
            // unit norm via composite Simpson with 4000 panels
            double s = 0.0;
            const int m = 4000;
            for (int i = 0; i <= m; ++i) {
                const double x = -1 + 2.0 * i / m;
                const double w = (i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2);
                s += w * p.value(x) * p.value(x);
            }
            CHECK(s * (2.0 / m) / 3 == doctest::Approx(1.0).epsilon(1e-9));
            if (p.lambda == 0.0) continue;
            for (int t = 0; t < 20; ++t) {
                double x = rng.uniform(-0.95, 0.95);
                if (std::abs(p.value(x)) < 0.2) continue;
                CHECK(-second_diff(p, x) / p.value(x) == doctest::Approx(p.lambda).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("Robin frequencies") {
    auto r0 = robin_eigenvalues(0, 0, 8);
    for (int k = 0; k < 8; ++k) CHECK(r0[static_cast<std::size_t>(k)] == doctest::Approx(k * pi / 2).epsilon(1e-12));

    // Both ends Dirichlet in the limit.
    const double inf = std::numeric_limits<double>::infinity();
    auto rinf = robin_eigenvalues(inf, inf, 6);
    auto dir = interval_eigenpairs(BoundaryCondition::dirichlet(), 6);
    for (std::size_t k = 0; k < 6; ++k) CHECK(rinf[k] == doctest::Approx(dir[k].omega).epsilon(1e-12));
    auto rbig = robin_eigenvalues(1e9, 1e9, 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(rbig[k] == doctest::Approx(dir[k].omega).epsilon(1e-7));

    const double first = robin_eigenvalues(1.0, 1.0, 1)[0];
    CHECK(first == doctest::Approx(scan_first_positive_root(1.0, 1.0)).epsilon(1e-9));

    // Robin modes satisfy their boundary conditions.
    for (const auto& p : interval_eigenpairs(BoundaryCondition::robin(1.0, 1.0), 5)) {
        CHECK(p.derivative(-1) == doctest::Approx(1.0 * p.value(-1)).epsilon(1e-10));
        CHECK(p.derivative(1) == doctest::Approx(1.0 * p.value(1)).epsilon(1e-10));
    }
    for (const auto& p : interval_eigenpairs(BoundaryCondition::robin(inf, 0.5), 5)) {
        CHECK(std::abs(p.value(-1)) < 1e-10);
        CHECK(p.derivative(1) == doctest::Approx(0.5 * p.value(1)).epsilon(1e-10));
    }
    // zero frequency appears exactly when b - a + 2ab = 0
    CHECK(robin_eigenvalues(1.0, 1.0 / 3.0, 2)[0] == 0.0);
    CHECK(robin_eigenvalues(1.0, 1.0, 2)[0] > 0.0);
    CHECK_THROWS_AS(robin_eigenvalues(0, 0, 0), InputError);
}

TEST_CASE("Chebyshev polynomials") {
    CHECK(chebyshev_T(2, 0.5) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(chebyshev_T(3, 0.5) == doctest::Approx(-1.0).epsilon(1e-15));
    for (int j = 0; j <= 50; ++j) CHECK(chebyshev_T(j, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CounterRng rng(5);
    for (int t = 0; t < 200; ++t) {
        const double th = rng.uniform(0, pi);
        for (int j = 0; j <= 20; ++j) {
            CHECK(std::abs(chebyshev_T(j, std::cos(th)) - std::cos(j * th)) <= 1e-12);
            CHECK(std::abs(chebyshev_U(j, std::cos(th)) * std::sin(th) - std::sin((j + 1) * th)) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(chebyshev_T(2, 1.5), InputError);
}

TEST_CASE("Neumann modes are Chebyshev polynomials of the first mode") {
    CounterRng rng(6);
    auto phi = [](int k, double x) { return k % 2 == 0 ? std::cos(k * pi * x / 2) : std::sin(k * pi * x / 2); };
    for (int k = 0; k <= 10; ++k) {
        for (int t = 0; t < 100; ++t) {
            const double x = rng.uniform(-1, 1);
            const double t_k = chebyshev_T(k, phi(1, x));
            CHECK(std::abs(phi(k, x) - chebyshev_sign(k) * t_k) <= 1e-12);
        }
    }
}

TEST_CASE("grid graph eigenpairs") {
    auto g = grid_graph_eigenpairs(5);
    CHECK(g[1].lambda == doctest::Approx(-0.2928932).epsilon(1e-7));
    CHECK(g[0].lambda == 0.0);
    CHECK(g[4].lambda == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(g[0].vector.isApprox(Eigen::VectorXd::Ones(5)));

    // Hand-assembled grid operator as the oracle (no dependence on the laplacians module).
    for (std::size_t n : {5u, 17u, 64u}) {
        Eigen::MatrixXd l = Eigen::MatrixXd::Zero(int(n), int(n));
        for (int j = 0; j < int(n); ++j) {
            l(j, j) = -1;
            if (j == 0) l(0, 1) = 1;
            else if (j == int(n) - 1) l(j, j - 1) = 1;
            else l(j, j - 1) = l(j, j + 1) = 0.5;
        }
        for (const auto& m : grid_graph_eigenpairs(n)) CHECK((l * m.vector - m.lambda * m.vector).norm() <= 1e-12 * std::sqrt(double(n)));
    }
    CHECK_THROWS_AS(grid_graph_eigenpairs(2), InputError);
}

TEST_CASE("grid eigenvalue gap ratio approaches pi^4/96") {
    // Series: (n-1)^2/4 (cos x - 1) = -x^2 (n-1)^2/8 + x^4 (n-1)^2/96 - ..., x = k pi/(n-1).
    for (std::size_t n : {50u, 100u, 200u, 400u})
        for (int k = 1; k <= 5; ++k) {
            const double r = grid_gap_ratio(n, k);
            CHECK(r < std::pow(pi, 4) / 96);
            CHECK(r > std::pow(pi, 4) / 96 - 0.01);
        }
}

TEST_CASE("product spectra") {
    auto sq = product_eigenpairs(ProductSpace::NeumannSquare, 3);
    CHECK(sq[0].lambda == 0.0);
    CHECK(sq[0].value(0.2, -0.7) == doctest::Approx(0.5));
    CHECK(sq[1].lambda == sq[2].lambda);
    CHECK(((sq[1].k1 == 1 && sq[2].k2 == 1) || (sq[1].k2 == 1 && sq[2].k1 == 1)));
    std::vector<double> vals;
    for (auto& m : sq) vals.push_back(m.lambda);
    CHECK(group_multiplicities(vals)[1] == 2);

    auto tor = product_eigenpairs(ProductSpace::FlatTorus, 2);
    CHECK(tor[0].lambda == 0.0);
    CHECK(tor[1].lambda == doctest::Approx(pi * pi));
    std::vector<double> tv;
    for (auto& m : tor) tv.push_back(m.lambda);
    // (+-1, 0) and (0, +-1): sin/cos in either factor gives 4 modes
    CHECK(group_multiplicities(tv)[1] == 4);
}
