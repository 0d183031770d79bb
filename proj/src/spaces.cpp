#include "eigenlab/spaces.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "eigenlab/error.hpp"
#include "eigenlab/rng.hpp"

namespace eigenlab::spaces {

Density Density::gaussian(double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(mu)) throw InputError("gaussian density needs finite mu and sigma > 0");
    Density d;
    d.kind = Kind::Gaussian;
    d.mu = mu;
    d.sigma = sigma;
    return d;
}

Density Density::exponential(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("exponential density needs lambda > 0");
    Density d;
    d.kind = Kind::Exponential;
    d.lambda = lambda;
    return d;
}

double Density::pdf(double x) const {
    if (kind == Kind::Gaussian) {
        const double z = (x - mu) / sigma;
        return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    }
    return x < 0.0 ? 0.0 : lambda * std::exp(-lambda * x);
}

double Density::dpdf(double x) const {
    if (kind == Kind::Gaussian) return -(x - mu) / (sigma * sigma) * pdf(x);
    return x < 0.0 ? 0.0 : -lambda * pdf(x);
}

double Density::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw InputError("Density::quantile: u must lie in (0, 1)");
    if (kind == Kind::Gaussian) return boost::math::quantile(boost::math::normal_distribution<double>(mu, sigma), u);
    return -std::log1p(-u) / lambda;
}

std::string Density::describe() const {
    std::ostringstream os;
    os << std::setprecision(17);
    if (kind == Kind::Gaussian) {
        os << "gaussian(" << mu << "," << sigma << ")";
    } else {
        os << "exponential(" << lambda << ")";
    }
    return os.str();
}

Space Space::square() {
    Space s;
    s.kind = SpaceKind::Square;
    return s;
}

Space Space::torus(double major, double minor) {
    Space s;
    s.kind = SpaceKind::Torus;
    s.major_radius = major;
    s.minor_radius = minor;
    s.validate();
    return s;
}

Space Space::sphere() {
    Space s;
    s.kind = SpaceKind::Sphere;
    return s;
}

Space Space::line(Density g) {
    Space s;
    s.kind = SpaceKind::Line;
    s.density = g;
    return s;
}

Space Space::gasket(int address_length) {
    Space s;
    s.kind = SpaceKind::Gasket;
    s.address_length = address_length;
    s.validate();
    return s;
}

Space Space::parse(std::string_view name) {
    if (name == "interval") return interval();
    if (name == "square") return square();
    if (name == "torus") return torus(1.0, 0.4);
    if (name == "sphere") return sphere();
    if (name == "line") return line(Density{});
    if (name == "sg" || name == "gasket") return gasket();
    throw InputError("unknown space '" + std::string(name) + "' (expected interval, square, torus, sphere, line or sg)");
}

std::string Space::name() const {
    switch (kind) {
        case SpaceKind::Interval: return "interval";
        case SpaceKind::Square: return "square";
        case SpaceKind::Torus: return "torus";
        case SpaceKind::Sphere: return "sphere";
        case SpaceKind::Line: return "line";
        case SpaceKind::Gasket: return "sg";
    }
    return "?";
}

int Space::ambient_dim() const {
    switch (kind) {
        case SpaceKind::Interval:
        case SpaceKind::Line: return 1;
        case SpaceKind::Square:
        case SpaceKind::Gasket: return 2;
        case SpaceKind::Torus:
        case SpaceKind::Sphere: return 3;
    }
    return 1;
}

double Space::diameter() const {
    switch (kind) {
        case SpaceKind::Interval: return 2.0;
        case SpaceKind::Square: return 2.0 * std::numbers::sqrt2;
        case SpaceKind::Torus: return 2.0 * (major_radius + minor_radius);
        case SpaceKind::Sphere: return 2.0;
        case SpaceKind::Line: return std::numeric_limits<double>::infinity();
        case SpaceKind::Gasket: return 1.0;
    }
    return 0.0;
}

void Space::validate() const {
    if (kind == SpaceKind::Torus && !(minor_radius > 0.0 && minor_radius < major_radius)) {
        throw InputError("torus requires 0 < r_minor < R_major");
    }
    if (kind == SpaceKind::Gasket && (address_length < 0 || address_length > 60)) {
        throw InputError("gasket address length must lie in [0, 60]");
    }
}

void PointSet::write_csv(std::ostream& os) const {
    static const char* names[] = {"x", "y", "z"};
    std::ostringstream buf;
    buf << std::setprecision(17);
    for (int c = 0; c < dim; ++c) buf << (c ? "," : "") << names[c];
    if (has_addresses()) buf << ",address";
    buf << '\n';
    for (std::size_t i = 0; i < size(); ++i) {
        for (int c = 0; c < dim; ++c) buf << (c ? "," : "") << at(i, c);
        if (has_addresses()) buf << ',' << addresses[i];
        buf << '\n';
    }
    os << buf.str();
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && *b == ' ') ++b;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) throw InputError("CSV: cannot parse number '" + s + "'");
    return v;
}

}  // namespace

PointSet PointSet::read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InputError("CSV: empty input");
    const auto header = split_commas(line);
    PointSet ps;
    int dim = 0;
    bool with_addr = false;
    static const char* names[] = {"x", "y", "z"};
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c < 3 && header[c] == names[c] && !with_addr) {
            ++dim;
        } else if (header[c] == "address" && c + 1 == header.size()) {
            with_addr = true;
        } else {
            throw InputError("CSV: unexpected header column '" + header[c] + "'");
        }
    }
    if (dim == 0) throw InputError("CSV: header has no coordinate columns");
    ps.dim = dim;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = split_commas(line);
        if (f.size() != header.size()) throw InputError("CSV: row has wrong number of fields");
        for (int c = 0; c < dim; ++c) ps.coords.push_back(parse_double(f[static_cast<std::size_t>(c)]));
        if (with_addr) ps.addresses.push_back(f.back());
    }
    ps.distribution = "file";
    return ps;
}

const std::array<std::array<double, 2>, 3>& gasket_vertices() {
    static const std::array<std::array<double, 2>, 3> p{{{0.0, 0.0}, {1.0, 0.0}, {0.5, std::numbers::sqrt3 / 2.0}}};
    return p;
}

std::array<double, 2> sg_point_of_address(std::string_view word) {
    const auto& p = gasket_vertices();
    std::array<double, 2> x{0.5, std::numbers::sqrt3 / 6.0};
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        const int j = *it - '1';
        if (j < 0 || j > 2) throw InputError(std::string("invalid gasket address letter '") + *it + "'");
        x[0] = 0.5 * (x[0] - p[j][0]) + p[j][0];
        x[1] = 0.5 * (x[1] - p[j][1]) + p[j][1];
    }
    return x;
}

namespace {

// Integer lattice for cells: in units of the finest cell side, the level-l
// prefix cell has origin sum_i e_{w_i} 2^{M-i} and corners origin + 2^{M-l} e_j
// with e_1 = (0,0), e_2 = (1,0), e_3 = (0,1). The affine image of this picture
// is the gasket, so corner coincidence is decided exactly.
struct LatticeCell {
    std::int64_t ox = 0, oy = 0;
};

void check_word(std::string_view w) {
    for (char ch : w) {
        if (ch < '1' || ch > '3') throw InputError(std::string("invalid gasket address letter '") + ch + "'");
    }
}

bool share_corner(const LatticeCell& a, const LatticeCell& b, std::int64_t side) {
    const std::int64_t ex[3] = {0, 1, 0};
    const std::int64_t ey[3] = {0, 0, 1};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (a.ox + side * ex[i] == b.ox + side * ex[j] && a.oy + side * ey[i] == b.oy + side * ey[j]) return true;
    return false;
}

}  // namespace

bool cells_touch(std::string_view u, std::string_view v) {
    if (u.size() != v.size()) throw InputError("cells_touch: words of unequal length");
    check_word(u);
    check_word(v);
    const std::size_t m = u.size();
    if (m > 60) throw InputError("cells_touch: word too long");
    LatticeCell a, b;
    for (std::size_t i = 0; i < m; ++i) {
        const std::int64_t s = std::int64_t{1} << (m - 1 - i);
        a.ox += (u[i] == '2') * s;
        a.oy += (u[i] == '3') * s;
        b.ox += (v[i] == '2') * s;
        b.oy += (v[i] == '3') * s;
    }
    return share_corner(a, b, 1);
}

double d_cell(std::string_view wx, std::string_view wy) {
    if (wx.size() != wy.size()) throw InputError("d_cell: addresses must have equal length");
    check_word(wx);
    check_word(wy);
    const std::size_t m_total = wx.size();
    if (m_total > 60) throw InputError("d_cell: addresses longer than 60 letters are not supported");
    // Level-l cells contain level-(l+1) cells, so intersection is monotone in l:
    // walk down until the prefix cells stop touching.
    LatticeCell a, b;
    std::size_t best = 0;
    for (std::size_t l = 1; l <= m_total; ++l) {
        const std::int64_t s = std::int64_t{1} << (m_total - l);
        a.ox += (wx[l - 1] == '2') * s;
        a.oy += (wx[l - 1] == '3') * s;
        b.ox += (wy[l - 1] == '2') * s;
        b.oy += (wy[l - 1] == '3') * s;
        if (!share_corner(a, b, s)) break;
        best = l;
    }
    return std::ldexp(1.0, -static_cast<int>(best));
}

double d_same_cell(std::string_view wx, std::string_view wy) {
    if (wx.size() != wy.size()) throw InputError("d_same_cell: addresses must have equal length");
    check_word(wx);
    check_word(wy);
    std::size_t l = 0;
    while (l < wx.size() && wx[l] == wy[l]) ++l;
    return std::ldexp(1.0, -static_cast<int>(l));
}

namespace {

void sample_torus_point(const Space& s, CounterRng& rng, double* out) {
    const double big = s.major_radius, small = s.minor_radius;
    double theta = 0.0;
    while (true) {
        theta = 2.0 * std::numbers::pi * rng.uniform();
        if (rng.uniform() * (big + small) <= big + small * std::cos(theta)) break;
    }
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    const double rad = big + small * std::cos(theta);
    out[0] = rad * std::cos(phi);
    out[1] = rad * std::sin(phi);
    out[2] = small * std::sin(theta);
}

}  // namespace

PointSet sample_uniform(const Space& space, std::size_t n, std::uint64_t seed) {
    space.validate();
    if (n < 1) throw InputError("sample_uniform: n must be at least 1");
    PointSet ps;
    ps.dim = space.ambient_dim();
    ps.seed = seed;
    ps.distribution = "uniform:" + space.name();
    ps.coords.resize(n * static_cast<std::size_t>(ps.dim));
    CounterRng rng(seed);
    double* c = ps.coords.data();
    switch (space.kind) {
        case SpaceKind::Interval:
            for (std::size_t i = 0; i < n; ++i) c[i] = rng.uniform(-1.0, 1.0);
            break;
        case SpaceKind::Square:
            for (std::size_t i = 0; i < 2 * n; ++i) c[i] = rng.uniform(-1.0, 1.0);
            break;
        case SpaceKind::Torus:
            for (std::size_t i = 0; i < n; ++i) sample_torus_point(space, rng, c + 3 * i);
            break;
        case SpaceKind::Sphere:
            for (std::size_t i = 0; i < n; ++i) {
                double g[3];
                double r2 = 0.0;
                do {
                    for (double& v : g) v = standard_normal(rng);
                    r2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
                } while (r2 < 1e-300);
                const double r = std::sqrt(r2);
                for (int k = 0; k < 3; ++k) c[3 * i + static_cast<std::size_t>(k)] = g[k] / r;
            }
            break;
        case SpaceKind::Line: {
            PointSet d = sample_density_1d(space.density, n, seed);
            d.distribution = "uniform:" + space.name() + ":" + space.density.describe();
            return d;
        }
        case SpaceKind::Gasket: {
            const auto m = static_cast<std::size_t>(space.address_length);
            ps.addresses.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                std::string w(m, '1');
                for (std::size_t l = 0; l < m; ++l) w[l] = static_cast<char>('1' + rng.below(3));
                const auto x = sg_point_of_address(w);
                c[2 * i] = x[0];
                c[2 * i + 1] = x[1];
                ps.addresses[i] = std::move(w);
            }
            break;
        }
    }
    return ps;
}

PointSet sample_grid(std::size_t n) {
    if (n < 2) throw InputError("sample_grid: n must be at least 2");
    PointSet ps;
    ps.dim = 1;
    ps.distribution = "grid:interval";
    ps.coords.resize(n);
    for (std::size_t j = 0; j < n; ++j) ps.coords[j] = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(n - 1);
    return ps;
}

PointSet sample_density_1d(const Density& g, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw InputError("sample_density_1d: n must be at least 1");
    PointSet ps;
    ps.dim = 1;
    ps.seed = seed;
    ps.distribution = g.describe();
    ps.coords.resize(n);
    CounterRng rng(seed);
    for (std::size_t i = 0; i < n; ++i) ps.coords[i] = g.quantile(rng.uniform_open());
    return ps;
}

std::size_t Equipartition::locate(std::span<const double> x) const {
    const std::size_t per_side = std::size_t{1} << level;
    auto index_of = [&](double v) {
        const double t = (v + 1.0) / 2.0 * static_cast<double>(per_side);
        auto k = static_cast<std::int64_t>(std::floor(t));
        return static_cast<std::size_t>(std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(per_side) - 1));
    };
    switch (kind) {
        case SpaceKind::Interval: return index_of(x[0]);
        case SpaceKind::Square: return index_of(x[1]) * per_side + index_of(x[0]);
        default: throw InputError("Equipartition::locate: use gasket addresses to locate gasket cells");
    }
}

Equipartition equipartition(const Space& space, int m) {
    if (m < 0) throw InputError("equipartition: level must be nonnegative");
    Equipartition e;
    e.kind = space.kind;
    e.level = m;
    if (space.kind == SpaceKind::Interval) {
        if (m > 30) throw InputError("equipartition: level too large");
        const std::size_t k = std::size_t{1} << m;
        const double h = 2.0 / static_cast<double>(k);
        for (std::size_t i = 0; i < k; ++i) {
            Cell c;
            c.id = i;
            c.measure = 1.0 / static_cast<double>(k);
            c.lo = {-1.0 + h * static_cast<double>(i)};
            c.hi = {i + 1 == k ? 1.0 : -1.0 + h * static_cast<double>(i + 1)};
            c.diameter = c.hi[0] - c.lo[0];
            c.representative = {0.5 * (c.lo[0] + c.hi[0])};
            e.cells.push_back(std::move(c));
        }
    } else if (space.kind == SpaceKind::Square) {
        if (m > 12) throw InputError("equipartition: level too large");
        const std::size_t k = std::size_t{1} << m;
        const double h = 2.0 / static_cast<double>(k);
        for (std::size_t r = 0; r < k; ++r) {
            for (std::size_t q = 0; q < k; ++q) {
                Cell c;
                c.id = r * k + q;
                c.measure = 1.0 / static_cast<double>(k * k);
                c.lo = {-1.0 + h * static_cast<double>(q), -1.0 + h * static_cast<double>(r)};
                c.hi = {q + 1 == k ? 1.0 : -1.0 + h * static_cast<double>(q + 1), r + 1 == k ? 1.0 : -1.0 + h * static_cast<double>(r + 1)};
                c.diameter = std::hypot(c.hi[0] - c.lo[0], c.hi[1] - c.lo[1]);
                c.representative = {0.5 * (c.lo[0] + c.hi[0]), 0.5 * (c.lo[1] + c.hi[1])};
                e.cells.push_back(std::move(c));
            }
        }
    } else if (space.kind == SpaceKind::Gasket) {
        if (m > 12) throw InputError("equipartition: level too large");
        std::size_t count = 1;
        for (int i = 0; i < m; ++i) count *= 3;
        for (std::size_t id = 0; id < count; ++id) {
            std::string w(static_cast<std::size_t>(m), '1');
            std::size_t t = id;
            for (int l = m - 1; l >= 0; --l) {
                w[static_cast<std::size_t>(l)] = static_cast<char>('1' + t % 3);
                t /= 3;
            }
            Cell c;
            c.id = id;
            c.measure = 1.0 / static_cast<double>(count);
            c.diameter = std::ldexp(1.0, -m);
            const auto x = sg_point_of_address(w);
            c.representative = {x[0], x[1]};
            c.address = std::move(w);
            e.cells.push_back(std::move(c));
        }
    } else {
        throw InputError("equipartition: supported only for interval, square and sg");
    }
    return e;
}

}  // namespace eigenlab::spaces
