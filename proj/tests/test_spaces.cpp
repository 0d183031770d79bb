#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "eigenlab/error.hpp"
#include "eigenlab/rng.hpp"
#include "eigenlab/spaces.hpp"

using namespace eigenlab;
using namespace eigenlab::spaces;

namespace {

double gk(auto f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

std::string random_word(CounterRng& rng, std::size_t m) {
    std::string w(m, '1');
    for (char& c : w) c = static_cast<char>('1' + rng.below(3));
    return w;
}

}  // namespace

TEST_CASE("grid sampler places the stated points") {
    auto g3 = sample_grid(3);
    CHECK(g3.coords == std::vector<double>{-1.0, 0.0, 1.0});
    auto g5 = sample_grid(5);
    CHECK(g5.coords == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
    CHECK(sample_grid(2).coords == std::vector<double>{-1.0, 1.0});
    CHECK_THROWS_AS(sample_grid(1), InputError);
}

TEST_CASE("interval sample mean") {
    auto ps = sample_uniform(Space::interval(), 1000000, 17);
    double s = 0.0;
    for (double x : ps.coords) {
        CHECK_UNARY(x >= -1.0);
        s += x;
    }
    CHECK(std::abs(s / 1e6) <= 3.0 * (1.0 / std::sqrt(3.0)) / 1e3);
}

TEST_CASE("samplers are reproducible and seed-sensitive") {
    for (Space sp : {Space::interval(), Space::square(), Space::torus(1.0, 0.3), Space::sphere(), Space::gasket(10)}) {
        auto a = sample_uniform(sp, 300, 5);
        auto b = sample_uniform(sp, 300, 5);
        auto c = sample_uniform(sp, 300, 6);
        CHECK(a.coords == b.coords);
        CHECK(a.addresses == b.addresses);
        CHECK(a.coords != c.coords);
    }
}

TEST_CASE("points lie on their spaces") {
    auto sph = sample_uniform(Space::sphere(), 2000, 1);
    for (std::size_t i = 0; i < sph.size(); ++i) {
        const double r = std::hypot(sph.at(i, 0), sph.at(i, 1), sph.at(i, 2));
        CHECK(r == doctest::Approx(1.0).epsilon(1e-14));
    }
    const Space tor = Space::torus(1.0, 0.3);
    auto t = sample_uniform(tor, 2000, 1);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double rho = std::hypot(t.at(i, 0), t.at(i, 1));
        CHECK(std::hypot(rho - 1.0, t.at(i, 2)) == doctest::Approx(0.3).epsilon(1e-12));
    }
    auto sq = sample_uniform(Space::square(), 2000, 1);
    for (double v : sq.coords) CHECK(std::abs(v) <= 1.0);
    CHECK_THROWS_AS(Space::torus(0.3, 0.5), InputError);
}

TEST_CASE("torus sampling is uniform in surface area") {
    const double big = 1.0, small = 0.5;
    auto t = sample_uniform(Space::torus(big, small), 200000, 9);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double c = (std::hypot(t.at(i, 0), t.at(i, 1)) - big) / small;
        s += c;
        s2 += c * c;
    }
    const double n = static_cast<double>(t.size());
    const double mean = s / n;
    const double sd = std::sqrt(s2 / n - mean * mean);
    // Oracle: surface-measure quadrature of cos(theta) over the torus.
    const double num = gk([&](double th) { return std::cos(th) * (big + small * std::cos(th)); }, 0, 2 * std::numbers::pi);
    const double den = gk([&](double th) { return big + small * std::cos(th); }, 0, 2 * std::numbers::pi);
    CHECK(std::abs(mean - num / den) <= 3.0 * sd / std::sqrt(n));
    CHECK(num / den == doctest::Approx(small / (2 * big)).epsilon(1e-12));
}

TEST_CASE("density samplers") {
    auto g = sample_density_1d(Density::gaussian(0, 1), 400000, 3);
    const double n = static_cast<double>(g.size());
    double m1 = 0, m2 = 0, m4 = 0;
    for (double x : g.coords) {
        m1 += x;
        m2 += x * x;
        m4 += x * x * x * x;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); };
    const double e4 = gk([&](double x) { return std::pow(x, 4) * phi(x); }, -14, 14);
    const double e8 = gk([&](double x) { return std::pow(x, 8) * phi(x); }, -14, 14);
    CHECK(e4 == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(std::abs(m2 - 1.0) <= 3.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(m4 - e4) <= 3.0 * std::sqrt((e8 - e4 * e4) / n));

    auto e = sample_density_1d(Density::exponential(1), 100000, 4);
    double em = 0;
    for (double x : e.coords) {
        CHECK_UNARY(x >= 0.0);
        em += x;
    }
    CHECK(std::abs(em / 1e5 - 1.0) <= 3.0 / std::sqrt(1e5));
    CHECK_THROWS_AS(Density::gaussian(0, 0), InputError);
}

TEST_CASE("gasket addresses map to their points") {
    auto c = sg_point_of_address("");
    CHECK(c[0] == doctest::Approx(0.5));
    CHECK(c[1] == doctest::Approx(std::numbers::sqrt3 / 6));
    auto x12 = sg_point_of_address("12");
    CHECK(x12[0] == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(x12[1] == doctest::Approx(std::numbers::sqrt3 / 24).epsilon(1e-15));
    auto p1 = sg_point_of_address(std::string(40, '1'));
    CHECK(std::hypot(p1[0], p1[1]) < 1e-11);
    CHECK_THROWS_AS(sg_point_of_address("14"), InputError);

    auto ps = sample_uniform(Space::gasket(15), 3000, 2);
    int first[3] = {0, 0, 0};
    for (std::size_t i = 0; i < ps.size(); ++i) {
        REQUIRE(ps.addresses[i].size() == 15);
        ++first[ps.addresses[i][0] - '1'];
        const auto x = sg_point_of_address(ps.addresses[i]);
        CHECK(x[0] == ps.at(i, 0));
        CHECK(x[1] == ps.at(i, 1));
    }
    const double sigma = std::sqrt(3000.0 * (1.0 / 3) * (2.0 / 3));
    for (int f : first) CHECK(std::abs(f - 1000.0) <= 3 * sigma);
}

TEST_CASE("cellular semimetric") {
    const std::size_t m = 12;
    const std::string w(m, '2');
    CHECK(d_cell(w, w) == std::ldexp(1.0, -12));

    // Cells meeting at F_1(p_2) = (1/2, 0): prefixes 1 2^{k-1} and 2 1^{k-1}.
    for (int k = 1; k <= 10; ++k) {
        std::string x = "1" + std::string(static_cast<std::size_t>(k - 1), '2') + "1";
        std::string y = "2" + std::string(static_cast<std::size_t>(k - 1), '1') + "2";
        x.resize(m, '3');
        y.resize(m, '3');
        CHECK(d_cell(x, y) == std::ldexp(1.0, -k));
        CHECK(d_cell(y, x) == d_cell(x, y));
    }

    const std::string p1(m, '1');
    std::string in_f1 = "12";
    in_f1.resize(m, '3');
    std::string in_f2 = "2";
    in_f2.resize(m, '3');
    // Literal intersecting-cells reading: F_11 touches F_12, F_1 touches F_2.
    CHECK(d_cell(p1, in_f1) == 0.25);
    CHECK(d_cell(p1, in_f2) == 0.5);
    // The same-cell variant gives 1/2 and 1 for these pairs.
    CHECK(d_same_cell(p1, in_f1) == 0.5);
    CHECK(d_same_cell(p1, in_f2) == 1.0);
    // Triangle inequality failure through points near F_1(p_2).
    std::string x = "1" + std::string(9, '2'), y = "2" + std::string(9, '1');
    x.resize(m, '3');
    y.resize(m, '3');
    CHECK(d_cell(p1, y) > d_cell(p1, x) + d_cell(x, y));

    CHECK_THROWS_AS(d_cell("12", "123"), InputError);
    CHECK_THROWS_AS(d_cell("14", "12"), InputError);
}

TEST_CASE("cellular semimetric is comparable with the Euclidean metric") {
    CounterRng rng(21);
    int below_half = 0;
    for (int t = 0; t < 20000; ++t) {
        const std::size_t m = 14;
        std::string a = random_word(rng, m), b;
        // Mix unrelated pairs with pairs sharing long prefixes.
        const std::size_t keep = rng.below(m + 1);
        b = a.substr(0, keep) + random_word(rng, m - keep);
        if (a == b) continue;  // identical words stand for one point
        const double d = d_cell(a, b);
        CHECK(d == d_cell(b, a));
        const auto x = sg_point_of_address(a), y = sg_point_of_address(b);
        const double e = std::hypot(x[0] - y[0], x[1] - y[1]);
        // A vertex of one cell can face an edge of a non-touching cell at
        // distance sqrt(3)/2 * 2^-k, so the lower constant is sqrt(3)/4.
        CHECK(std::numbers::sqrt3 / 4 * d <= e + 1e-15);
        CHECK(e <= 2.0 * d);
        if (0.5 * d > e) ++below_half;
    }
    CHECK(below_half > 0);
}

TEST_CASE("equipartitions") {
    auto e1 = equipartition(Space::interval(), 1);
    REQUIRE(e1.cells.size() == 2);
    CHECK(e1.cells[0].lo[0] == -1.0);
    CHECK(e1.cells[0].hi[0] == 0.0);
    CHECK(e1.cells[1].hi[0] == 1.0);
    CHECK(e1.cells[0].measure == 0.5);

    auto s2 = equipartition(Space::square(), 2);
    REQUIRE(s2.cells.size() == 16);
    for (const Cell& c : s2.cells) {
        CHECK(c.measure == 1.0 / 16);
        CHECK(c.hi[0] - c.lo[0] == 0.5);
        CHECK(c.hi[1] - c.lo[1] == 0.5);
        CHECK(c.diameter <= Space::square().diameter() / 4 + 1e-15);
    }

    auto g3 = equipartition(Space::gasket(), 3);
    REQUIRE(g3.cells.size() == 27);
    for (const Cell& c : g3.cells) {
        CHECK(c.measure == doctest::Approx(1.0 / 27).epsilon(1e-15));
        CHECK(c.diameter == 0.125);
    }

    // Covering: every sampled point falls in a cell that contains it.
    auto pts = sample_uniform(Space::square(), 5000, 3);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Cell& c = s2.cells[s2.locate(pts.point(i))];
        CHECK_UNARY(c.lo[0] <= pts.at(i, 0));
        CHECK_UNARY(pts.at(i, 0) <= c.hi[0]);
        CHECK_UNARY(c.lo[1] <= pts.at(i, 1));
        CHECK_UNARY(pts.at(i, 1) <= c.hi[1]);
    }
    auto e6 = equipartition(Space::interval(), 6);
    const double edge[1] = {1.0};
    CHECK(e6.locate(edge) == 63);
    CHECK_THROWS_AS(equipartition(Space::sphere(), 2), InputError);
}

TEST_CASE("point set CSV round trip") {
    auto ps = sample_uniform(Space::gasket(8), 50, 4);
    std::stringstream ss;
    ps.write_csv(ss);
    CHECK(ss.str().substr(0, 10) == "x,y,addres");
    auto back = PointSet::read_csv(ss);
    CHECK(back.dim == 2);
    CHECK(back.coords == ps.coords);
    CHECK(back.addresses == ps.addresses);
    std::stringstream bad("q\n1\n");
    CHECK_THROWS_AS(PointSet::read_csv(bad), InputError);
}
