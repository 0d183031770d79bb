#include "eigenlab/laplacians.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "eigenlab/error.hpp"
#include "eigenlab/quadrature.hpp"

namespace eigenlab::lap {

using spaces::PointSet;
using spaces::Space;
using spaces::SpaceKind;

namespace {

bool within(double d, double eps) { return d <= eps * (1.0 + 1e-12) + 1e-15; }

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    return std::sqrt(s);
}

void check_eps(double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw InputError("eps must be finite and nonnegative, got " + std::to_string(eps));
}

struct KeyHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& k) const noexcept {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (auto v : k) h = (h ^ static_cast<std::uint64_t>(v)) * 0x100000001b3ULL;
        return static_cast<std::size_t>(h);
    }
};

// Calls fn(i, j, d) once for every pair i < j at Euclidean distance within
// radius, using uniform buckets slightly wider than the radius.
template <typename Fn>
void for_each_close_pair(const PointSet& pts, double radius, Fn&& fn) {
    const std::size_t n = pts.size();
    const int dim = pts.dim;
    if (dim < 1 || dim > 3) throw InputError("neighbour search supports dimensions 1 to 3");
    const double pitch = std::max(radius * (1.0 + 1e-9) + 1e-14, 1e-9);
    using Key = std::array<std::int64_t, 3>;
    std::unordered_map<Key, std::vector<std::size_t>, KeyHash> buckets;
    std::vector<Key> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        Key k{0, 0, 0};
        for (int c = 0; c < dim; ++c) k[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(std::floor(pts.at(i, c) / pitch));
        keys[i] = k;
        buckets[k].push_back(i);
    }
    const int span1 = 1, span2 = dim >= 2 ? 1 : 0, span3 = dim >= 3 ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Key& k = keys[i];
        for (int a = -span1; a <= span1; ++a)
            for (int b = -span2; b <= span2; ++b)
                for (int c = -span3; c <= span3; ++c) {
                    auto it = buckets.find({k[0] + a, k[1] + b, k[2] + c});
                    if (it == buckets.end()) continue;
                    for (std::size_t j : it->second) {
                        if (j <= i) continue;
                        const double d = distance(pts.point(i), pts.point(j));
                        if (d <= radius * (1.0 + 1e-12) + 1e-15) fn(i, j, d);
                    }
                }
    }
}

// Integer lattice origin of the prefix cell of length m, in units of the
// level-m side, with corners o, o + (1, 0), o + (0, 1).
std::pair<std::int64_t, std::int64_t> lattice_origin(std::string_view w, std::size_t m) {
    std::int64_t ox = 0, oy = 0;
    for (std::size_t l = 0; l < m; ++l) {
        const std::int64_t s = std::int64_t{1} << (m - 1 - l);
        if (w[l] == '2') ox += s;
        else if (w[l] == '3') oy += s;
        else if (w[l] != '1') throw InputError(std::string("invalid gasket address letter '") + w[l] + "'");
    }
    return {ox, oy};
}

std::array<std::pair<std::int64_t, std::int64_t>, 3> corners(std::pair<std::int64_t, std::int64_t> o) {
    return {{o, {o.first + 1, o.second}, {o.first, o.second + 1}}};
}

bool corner_shared(std::pair<std::int64_t, std::int64_t> a, std::pair<std::int64_t, std::int64_t> b) {
    for (auto p : corners(a))
        for (auto q : corners(b))
            if (p == q) return true;
    return false;
}

std::string address_of(std::size_t id, int m) {
    std::string w(static_cast<std::size_t>(m), '1');
    for (int l = m - 1; l >= 0; --l) {
        w[static_cast<std::size_t>(l)] = static_cast<char>('1' + id % 3);
        id /= 3;
    }
    return w;
}

double pow_int(double b, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// 1D mean of w(t)(f(x+t) - f(x)) over [a, b] containing x, with the symmetric
// part paired so the first-order terms cancel before summation.
double paired_mean_1d(const Func1& f, const Func1& weight, double x, double a, double b, double rel_tol, double scale) {
    const double fx = f(x);
    const double r = std::min(x - a, b - x);
    auto sym = [&](double t) { return weight(t) * (f(x + t) + f(x - t) - 2.0 * fx); };
    auto sym_w = [&](double t) { return 2.0 * weight(t); };
    // The tolerance never goes below the rounding noise of the integrand.
    const double wmax = std::max(weight(0.0), 1e-300);
    const double fmax = std::max({std::abs(fx), std::abs(f(a)), std::abs(f(b)), 1e-300});
    const double tol = std::max(rel_tol * std::max(scale, 1e-300), 1e-15 * fmax * wmax * (b - a));
    const double wtol = 1e-14 * wmax * (b - a);
    constexpr int depth = 30;
    double num = quad::simpson(sym, 0.0, r, tol, 8, depth).value;
    double den = quad::simpson(sym_w, 0.0, r, wtol, 8, depth).value;
    if (b - x > r) {
        num += quad::simpson([&](double y) { return weight(y - x) * (f(y) - fx); }, x + r, b, tol, 8, depth).value;
        den += quad::simpson([&](double y) { return weight(y - x); }, x + r, b, wtol, 8, depth).value;
    } else if (x - a > r) {
        num += quad::simpson([&](double y) { return weight(y - x) * (f(y) - fx); }, a, x - r, tol, 8, depth).value;
        den += quad::simpson([&](double y) { return weight(y - x); }, a, x - r, wtol, 8, depth).value;
    }
    if (!(den > 0.0)) throw InputError("averaging neighbourhood has zero mass");
    return num / den;
}

std::pair<double, double> interval_bounds(const Space& space, double x, double radius) {
    if (space.kind == SpaceKind::Interval) {
        if (x < -1.0 || x > 1.0) throw InputError("point lies outside [-1, 1]");
        return {std::max(-1.0, x - radius), std::min(1.0, x + radius)};
    }
    return {x - radius, x + radius};
}

double square_mean(const FuncN& f, std::span<const double> x, double radius, const std::function<double(double)>& weight) {
    if (std::abs(x[0]) > 1.0 || std::abs(x[1]) > 1.0) throw InputError("point lies outside the square");
    const double fx = f(x);
    const double a = std::max(-1.0, x[0] - radius), b = std::min(1.0, x[0] + radius);
    double num = 0.0, den = 0.0;
    auto column = [&](double y0, bool numerator) {
        const double h = std::sqrt(std::max(0.0, radius * radius - (y0 - x[0]) * (y0 - x[0])));
        const double lo = std::max(-1.0, x[1] - h), hi = std::min(1.0, x[1] + h);
        return quad::simpson(
                   [&](double y1) {
                       const double p[2] = {y0, y1};
                       const double w = weight(std::hypot(y0 - x[0], y1 - x[1]));
                       return numerator ? w * (f(std::span<const double>(p, 2)) - fx) : w;
                   },
                   lo, hi, 1e-12 * radius * radius, 4, 30)
            .value;
    };
    num = quad::simpson([&](double y0) { return column(y0, true); }, a, b, 1e-12 * radius * radius, 8, 30).value;
    den = quad::simpson([&](double y0) { return column(y0, false); }, a, b, 1e-12 * radius * radius, 8, 30).value;
    if (!(den > 0.0)) throw InputError("averaging neighbourhood has zero mass");
    return num / den;
}

}  // namespace

double averaging_lap(const Space& space, const Func1& f, double x, const AveragingConfig& cfg) {
    check_eps(cfg.eps);
    if (cfg.eps == 0.0) throw InputError("averaging_lap: eps must be positive");
    if (space.kind != SpaceKind::Interval && space.kind != SpaceKind::Line)
        throw InputError("averaging_lap: the scalar form needs the interval or the line");
    const auto [a, b] = interval_bounds(space, x, cfg.eps);
    const double scale = cfg.eps * cfg.eps * std::max({std::abs(f(x)), std::abs(f(a)), std::abs(f(b)), 1e-3}) * (b - a);
    return paired_mean_1d(f, [](double) { return 1.0; }, x, a, b, cfg.rel_tol, scale);
}

double averaging_lap(const Space& space, const FuncN& f, std::span<const double> x, const AveragingConfig& cfg) {
    check_eps(cfg.eps);
    if (cfg.eps == 0.0) throw InputError("averaging_lap: eps must be positive");
    switch (space.kind) {
        case SpaceKind::Interval:
        case SpaceKind::Line:
            return averaging_lap(
                space, Func1([&](double y) { return f(std::span<const double>(&y, 1)); }), x[0], cfg);
        case SpaceKind::Square:
            return square_mean(f, x, cfg.eps, [](double) { return 1.0; });
        default:
            throw InputError("averaging_lap: unsupported space '" + space.name() + "' (use sg_cell_averaging_lap for the gasket)");
    }
}

double averaging_lap_kernel(const Space& space, const Func1& f, double x, const kern::Kernel& k, double eps) {
    check_eps(eps);
    if (eps == 0.0) throw InputError("averaging_lap_kernel: eps must be positive");
    if (space.kind != SpaceKind::Interval && space.kind != SpaceKind::Line)
        throw InputError("averaging_lap_kernel: the scalar form needs the interval or the line");
    const auto [a, b] = interval_bounds(space, x, k.support() * eps);
    const double mass = quad::simpson([&](double y) { return k((y - x) / eps); }, a, b, 1e-14 * eps, 8).value / eps;
    if (mass < 1e-12) throw NumericError("averaging_lap_kernel: kernel mass inside the space below 1e-12", {mass});
    const double scale = eps * eps * std::max({std::abs(f(x)), 1e-3}) * (b - a);
    return paired_mean_1d(f, [&](double t) { return k(t / eps); }, x, a, b, 1e-10, scale);
}

double averaging_lap_kernel(const Space& space, const FuncN& f, std::span<const double> x, const kern::Kernel& k,
                            double eps) {
    check_eps(eps);
    if (eps == 0.0) throw InputError("averaging_lap_kernel: eps must be positive");
    switch (space.kind) {
        case SpaceKind::Interval:
        case SpaceKind::Line:
            return averaging_lap_kernel(
                space, Func1([&](double y) { return f(std::span<const double>(&y, 1)); }), x[0], k, eps);
        case SpaceKind::Square:
            return square_mean(f, x, k.support() * eps, [&](double r) { return k.radial(r / eps, 2); });
        default:
            throw InputError("averaging_lap_kernel: unsupported space '" + space.name() + "'");
    }
}

double weighted_averaging_lap(const Func1& f, const Func1& g, double x, double eps) {
    check_eps(eps);
    if (eps == 0.0) throw InputError("weighted_averaging_lap: eps must be positive");
    const double gx = g(x);
    if (!(gx > 0.0)) throw InputError("weighted_averaging_lap: density must be positive at x");
    const double fx = f(x);
    auto num = [&](double t) { return (f(x + t) - fx) * g(x + t) + (f(x - t) - fx) * g(x - t); };
    auto den = [&](double t) { return g(x + t) + g(x - t); };
    const double mass = quad::simpson(den, 0.0, eps, 1e-15 * eps * gx, 8).value;
    if (!(mass >= 1e-300)) throw NumericError("weighted_averaging_lap: density mass in the window below 1e-300", {mass});
    const double scale = eps * eps * eps * gx * std::max(std::abs(fx), 1e-3);
        const double noise = 1e-15 * eps * gx * std::max({std::abs(fx), std::abs(f(x + eps)), std::abs(f(x - eps)), 1e-300});
    return quad::simpson(num, 0.0, eps, std::max(1e-11 * scale, noise), 8, 30).value / mass;
}

Metric parse_metric(std::string_view name) {
    if (name == "euclidean") return Metric::Euclidean;
    if (name == "d_cell" || name == "dcell") return Metric::DCell;
    throw InputError("unknown metric '" + std::string(name) + "' (expected euclidean or d_cell)");
}

linalg::SparseSymOperator graph_lap_eps(const PointSet& pts, double eps, Metric metric) {
    check_eps(eps);
    const std::size_t n = pts.size();
    std::vector<linalg::Edge> edges;
    if (metric == Metric::Euclidean) {
        for_each_close_pair(pts, eps, [&](std::size_t i, std::size_t j, double) { edges.push_back({i, j, 1.0}); });
        return linalg::SparseSymOperator::from_edges(n, std::move(edges));
    }

    if (!pts.has_addresses()) throw InputError("graph_lap_eps: the d_cell metric needs gasket addresses");
    const std::size_t len = pts.addresses.front().size();
    for (const auto& a : pts.addresses)
        if (a.size() != len) throw InputError("graph_lap_eps: gasket addresses must have equal length");
    if (len > 60) throw InputError("graph_lap_eps: addresses longer than 60 letters are not supported");
    // d_cell <= eps exactly when the prefix cells at level m* touch.
    std::size_t level = 0;
    while (level <= 61 && !within(std::ldexp(1.0, -static_cast<int>(level)), eps)) ++level;
    if (level > len) return linalg::SparseSymOperator::from_edges(n, {});

    using Origin = std::pair<std::int64_t, std::int64_t>;
    std::map<Origin, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < n; ++i) cells[lattice_origin(pts.addresses[i], level)].push_back(i);
    std::map<Origin, std::vector<Origin>> at_corner;
    for (const auto& [o, members] : cells)
        for (auto c : corners(o)) at_corner[c].push_back(o);
    for (const auto& [o, members] : cells) {
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b) edges.push_back({members[a], members[b], 1.0});
        std::vector<Origin> touching;
        for (auto c : corners(o))
            for (const Origin& q : at_corner[c])
                if (o < q) touching.push_back(q);
        std::sort(touching.begin(), touching.end());
        touching.erase(std::unique(touching.begin(), touching.end()), touching.end());
        for (const Origin& q : touching)
            for (std::size_t i : members)
                for (std::size_t j : cells[q]) edges.push_back({i, j, 1.0});
    }
    return linalg::SparseSymOperator::from_edges(n, std::move(edges));
}

linalg::SparseSymOperator graph_lap_kernel(const PointSet& pts, const kern::Kernel& k, double eps) {
    check_eps(eps);
    if (eps == 0.0) throw InputError("graph_lap_kernel: eps must be positive");
    const double floor_w = 1e-14 * k(0.0);
    std::vector<linalg::Edge> edges;
    for_each_close_pair(pts, k.support() * eps, [&](std::size_t i, std::size_t j, double d) {
        const double w = k(std::min(d / eps, k.support()));
        if (w > 0.0 && w >= floor_w) edges.push_back({i, j, w});
    });
    return linalg::SparseSymOperator::from_edges(pts.size(), std::move(edges));
}

namespace {

PointSet representatives(const spaces::Equipartition& part) {
    PointSet ps;
    ps.dim = static_cast<int>(part.cells.front().representative.size());
    for (const auto& c : part.cells) ps.coords.insert(ps.coords.end(), c.representative.begin(), c.representative.end());
    return ps;
}

int max_level(SpaceKind kind) {
    switch (kind) {
        case SpaceKind::Interval: return 20;
        case SpaceKind::Square: return 9;
        case SpaceKind::Gasket: return 9;
        default: return -1;
    }
}

}  // namespace

EquipartitionGraph graph_lap_equipartition(const Space& space, double eps, std::size_t min_cells, int level) {
    check_eps(eps);
    if (eps == 0.0) throw InputError("graph_lap_equipartition: eps must be positive");
    if (min_cells < 1) throw InputError("graph_lap_equipartition: need at least one cell per neighbourhood");
    const int top = max_level(space.kind);
    if (top < 0) throw InputError("graph_lap_equipartition: space '" + space.name() + "' has no equipartition");
    if (level > top) throw InputError("graph_lap_equipartition: level too large");

    auto build = [&](int m) {
        EquipartitionGraph g;
        g.partition = spaces::equipartition(space, m);
        g.eps = eps;
        g.min_cells = min_cells;
        g.op = graph_lap_eps(representatives(g.partition), eps);
        g.fewest_neighbors = std::numeric_limits<std::size_t>::max();
        for (std::size_t i = 0; i < g.op.n(); ++i)
            g.fewest_neighbors = std::min(g.fewest_neighbors, g.op.row_end(i) - g.op.row_begin(i));
        for (const auto& c : g.partition.cells) g.max_cell_diameter = std::max(g.max_cell_diameter, c.diameter);
        return g;
    };

    if (level >= 0) {
        EquipartitionGraph g = build(level);
        if (g.fewest_neighbors < min_cells)
            throw InputError("graph_lap_equipartition: an eps-neighbourhood holds only " + std::to_string(g.fewest_neighbors) +
                             " cells at level " + std::to_string(level) + ", fewer than " + std::to_string(min_cells));
        return g;
    }
    for (int m = 1; m <= top; ++m) {
        EquipartitionGraph g = build(m);
        if (g.fewest_neighbors >= min_cells) return g;
    }
    throw InputError("graph_lap_equipartition: eps-neighbourhoods hold fewer than " + std::to_string(min_cells) +
                     " cells at every supported level");
}

namespace {

double cell_mean(const spaces::Equipartition& part, const spaces::Cell& c, const FuncN& f) {
    switch (part.kind) {
        case SpaceKind::Interval: {
            auto g = [&](double y) { return f(std::span<const double>(&y, 1)); };
            const double len = c.hi[0] - c.lo[0];
            return quad::simpson(g, c.lo[0], c.hi[0], 1e-13 * len, 2).value / len;
        }
        case SpaceKind::Square: {
            auto g = [&](double y0, double y1) {
                const double p[2] = {y0, y1};
                return f(std::span<const double>(p, 2));
            };
            const double area = (c.hi[0] - c.lo[0]) * (c.hi[1] - c.lo[1]);
            return quad::simpson2(g, c.lo.data(), c.hi.data(), 1e-12 * area).value / area;
        }
        case SpaceKind::Gasket: {
            double s = 0.0;
            for (std::size_t id = 0; id < 27; ++id) {
                const auto p = spaces::sg_point_of_address(c.address + address_of(id, 3));
                s += f(std::span<const double>(p.data(), 2));
            }
            return s / 27.0;
        }
        default:
            throw InputError("cell_mean: unsupported space");
    }
}

}  // namespace

EquipartitionReport equipartition_report(const EquipartitionGraph& g, const FuncN& f, const Func1& modulus) {
    const auto& cells = g.partition.cells;
    std::vector<double> at_rep(cells.size()), mean(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        at_rep[i] = f(cells[i].representative);
        mean[i] = cell_mean(g.partition, cells[i], f);
    }
    EquipartitionReport rep;
    rep.bound = modulus(g.max_cell_diameter);
    Space space;
    space.kind = g.partition.kind;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::size_t deg = g.op.row_end(i) - g.op.row_begin(i);
        if (deg == 0) continue;
        double graph = 0.0, union_mean = 0.0;
        for (std::size_t p = g.op.row_begin(i); p < g.op.row_end(i); ++p) {
            graph += at_rep[g.op.col(p)];
            union_mean += mean[g.op.col(p)];
        }
        graph = graph / static_cast<double>(deg) - at_rep[i];
        union_mean = union_mean / static_cast<double>(deg) - at_rep[i];
        const double diff = std::abs(union_mean - graph);
        if (diff > rep.measured) {
            rep.measured = diff;
            rep.worst_vertex = i;
        }
        if (space.kind == SpaceKind::Interval || space.kind == SpaceKind::Square) {
            const double ball = averaging_lap(space, f, cells[i].representative, {g.eps, 1e-10});
            rep.measured_ball = std::max(rep.measured_ball, std::abs(ball - graph));
        }
    }
    return rep;
}

double sg_cell_averaging_lap(const FuncN& f, std::string_view x_addr, int m) {
    if (m < 0) throw InputError("sg_cell_averaging_lap: level must be nonnegative");
    if (static_cast<std::size_t>(m) > x_addr.size())
        throw InputError("sg_cell_averaging_lap: level " + std::to_string(m) + " exceeds the address length " +
                         std::to_string(x_addr.size()));
    if (m > 12) throw InputError("sg_cell_averaging_lap: level above 12 is not supported");
    const auto own = lattice_origin(x_addr, static_cast<std::size_t>(m));
    std::size_t count = 1;
    for (int i = 0; i < m; ++i) count *= 3;
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t id = 0; id < count; ++id) {
        const std::string w = address_of(id, m);
        if (!corner_shared(own, lattice_origin(w, static_cast<std::size_t>(m)))) continue;
        double s = 0.0;
        for (std::size_t sub = 0; sub < 27; ++sub) {
            const auto p = spaces::sg_point_of_address(w + address_of(sub, 3));
            s += f(std::span<const double>(p.data(), 2));
        }
        total += s / 27.0;
        ++used;
    }
    const auto x = spaces::sg_point_of_address(x_addr);
    return total / static_cast<double>(used) - f(std::span<const double>(x.data(), 2));
}

double sg_cell_averaging_lap_rescaled(const FuncN& f, std::string_view x_addr, int m) {
    return pow_int(5.0, m) * sg_cell_averaging_lap(f, x_addr, m);
}

SgVertexGraph sg_vertex_graph(int m) {
    if (m < 0 || m > 10) throw InputError("sg_vertex_graph: level must lie in [0, 10]");
    SgVertexGraph g;
    g.level = m;
    std::size_t count = 1;
    for (int i = 0; i < m; ++i) count *= 3;
    std::vector<std::array<std::pair<std::int64_t, std::int64_t>, 3>> cell_corners(count);
    for (std::size_t id = 0; id < count; ++id) {
        cell_corners[id] = corners(lattice_origin(address_of(id, m), static_cast<std::size_t>(m)));
        for (auto c : cell_corners[id]) g.index.emplace(c, 0);
    }
    std::size_t next = 0;
    const double side = std::ldexp(1.0, -m);
    for (auto& [pt, idx] : g.index) {
        idx = next++;
        g.coords.push_back((static_cast<double>(pt.first) + 0.5 * static_cast<double>(pt.second)) * side);
        g.coords.push_back(std::numbers::sqrt3 / 2.0 * static_cast<double>(pt.second) * side);
    }
    std::vector<linalg::Edge> edges;
    for (const auto& cc : cell_corners) {
        const std::size_t a = g.index.at(cc[0]), b = g.index.at(cc[1]), c = g.index.at(cc[2]);
        edges.push_back({a, b, 1.0});
        edges.push_back({a, c, 1.0});
        edges.push_back({b, c, 1.0});
    }
    g.op = linalg::SparseSymOperator::from_edges(g.index.size(), std::move(edges));
    return g;
}

double sg_interpolate(const SgVertexGraph& g, std::span<const double> values, std::string_view addr) {
    if (addr.size() < static_cast<std::size_t>(g.level)) throw InputError("sg_interpolate: address shorter than the graph level");
    if (values.size() != g.index.size()) throw InputError("sg_interpolate: value count does not match the vertex count");
    const auto cs = corners(lattice_origin(addr, static_cast<std::size_t>(g.level)));
    const std::size_t v0 = g.index.at(cs[0]), v1 = g.index.at(cs[1]), v2 = g.index.at(cs[2]);
    const auto x = spaces::sg_point_of_address(addr);
    const double side = std::ldexp(1.0, -g.level);
    const double rx = x[0] - g.coords[2 * v0], ry = x[1] - g.coords[2 * v0 + 1];
    const double v = ry / (side * std::numbers::sqrt3 / 2.0);
    const double u = rx / side - 0.5 * v;
    return (1.0 - u - v) * values[v0] + u * values[v1] + v * values[v2];
}

double appendix_D_sum(const PointSet& pts, const FuncN& f, std::span<const double> p, double eps, const kern::Kernel& k) {
    check_eps(eps);
    if (eps == 0.0) throw InputError("appendix_D: eps must be positive");
    const int d = pts.dim;
    if (d < 1 || d > 3 || static_cast<int>(p.size()) != d) throw InputError("appendix_D: dimension must be 1, 2 or 3 and match p");
    const double fp = f(p);
    double s = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        const double r = distance(p, pts.point(j)) / eps;
        const double w = k.radial(r, d);
        if (w != 0.0) s += w * (f(pts.point(j)) - fp);
    }
    return s / (static_cast<double>(pts.size()) * pow_int(eps, d + 2));
}

double appendix_D_expectation(int d, const FuncN& f, std::span<const double> p, double eps, const kern::Kernel& k,
                              const FuncN& g) {
    check_eps(eps);
    if (eps == 0.0) throw InputError("appendix_D: eps must be positive");
    if (d < 1 || d > 3 || static_cast<int>(p.size()) != d) throw InputError("appendix_D: dimension must be 1, 2 or 3 and match p");
    const double fp = f(p);
    const double s = k.support();
    // Substituting y = p + eps t leaves eps^-2 int K(t)(f(p + eps t) - f(p)) g(p + eps t) dt.
    std::array<double, 3> y{};
    auto at = [&](const double* t) {
        for (int c = 0; c < d; ++c) y[static_cast<std::size_t>(c)] = p[static_cast<std::size_t>(c)] + eps * t[c];
        return std::span<const double>(y.data(), static_cast<std::size_t>(d));
    };
    auto term = [&](const double* t, double r) {
        const double w = k.radial(r, d);
        if (w == 0.0) return 0.0;
        const auto yy = at(t);
        return w * (f(yy) - fp) * g(yy);
    };
    auto integrate = [&](double tol) {
        if (d == 1) {
            return quad::simpson(
                       [&](double t) {
                           const double tp = t, tm = -t;
                           return term(&tp, t) + term(&tm, t);
                       },
                       0.0, s, tol, 16)
                .value;
        }
        const double lo[3] = {-s, -s, -s}, hi[3] = {s, s, s};
        if (d == 2)
            return quad::simpson2(
                       [&](double a, double b) {
                           const double t[2] = {a, b};
                           return term(t, std::hypot(a, b));
                       },
                       lo, hi, tol)
                .value;
        return quad::simpson3(
                   [&](double a, double b, double c) {
                       const double t[3] = {a, b, c};
                       return term(t, std::sqrt(a * a + b * b + c * c));
                   },
                   lo, hi, tol)
            .value;
    };
    const double rough = integrate(d == 1 ? 1e-8 : 1e-5);
    const double tol = std::max(1e-9 * std::abs(rough), 1e-14);
    const double refined = d == 1 ? integrate(tol) : (d == 2 ? integrate(std::max(tol, 1e-9)) : rough);
    return refined / (eps * eps);
}

KernelStatistic appendix_D(const PointSet& pts, const FuncN& f, std::span<const double> p, double eps,
                           const kern::Kernel& k, const FuncN& g) {
    return {appendix_D_sum(pts, f, p, eps, k), appendix_D_expectation(pts.dim, f, p, eps, k, g)};
}

}  // namespace eigenlab::lap
