#include "eigenlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "eigenlab/eigenmap.hpp"
#include "eigenlab/error.hpp"
#include "eigenlab/laplacians.hpp"
#include "eigenlab/parallel.hpp"
#include "eigenlab/quadrature.hpp"
#include "eigenlab/rng.hpp"
#include "eigenlab/spaces.hpp"

namespace eigenlab::exp {

TestFunction named_function(std::string_view name) {
    constexpr double pi = std::numbers::pi;
    if (name == "x") return {"x", [](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
    if (name == "x2")
        return {"x2", [](double x) { return x * x; }, [](double x) { return 2.0 * x; }, [](double) { return 2.0; }};
    if (name == "cos_pi")
        return {"cos_pi", [](double x) { return std::cos(pi * x); }, [](double x) { return -pi * std::sin(pi * x); },
                [](double x) { return -pi * pi * std::cos(pi * x); }};
    if (name == "quartic")
        return {"quartic", [](double x) { return (x * x - 1.0) * (x * x - 1.0); },
                [](double x) { return 4.0 * x * (x * x - 1.0); }, [](double x) { return 12.0 * x * x - 4.0; }};
    if (name == "sin3")
        return {"sin3", [](double x) { return std::sin(3.0 * x); }, [](double x) { return 3.0 * std::cos(3.0 * x); },
                [](double x) { return -9.0 * std::sin(3.0 * x); }};
    if (name == "exp")
        return {"exp", [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); },
                [](double x) { return std::exp(x); }};
    throw InputError("unknown function '" + std::string(name) + "' (expected x, x2, cos_pi, quartic, sin3 or exp)");
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string canonical_config(const std::map<std::string, std::string>& cfg) {
    std::string out;
    for (const auto& [k, v] : cfg) {
        if (k == "workers" || k == "out" || k == "config") continue;
        out += k + "=" + v + "\n";
    }
    return out;
}

std::string config_hash(const std::map<std::string, std::string>& cfg) { return fnv1a_hex(canonical_config(cfg)); }

CltMode parse_clt_mode(std::string_view name) {
    if (name == "kernel-mean") return CltMode::KernelMean;
    if (name == "interval-graph") return CltMode::IntervalGraph;
    if (name == "kernel-difference") return CltMode::KernelDifference;
    if (name == "degenerate") return CltMode::Degenerate;
    if (name == "sanity") return CltMode::Sanity;
    throw InputError("unknown CLT mode '" + std::string(name) +
                     "' (expected kernel-mean, interval-graph, kernel-difference, degenerate or sanity)");
}

std::string clt_mode_name(CltMode m) {
    switch (m) {
        case CltMode::KernelMean: return "kernel-mean";
        case CltMode::IntervalGraph: return "interval-graph";
        case CltMode::KernelDifference: return "kernel-difference";
        case CltMode::Degenerate: return "degenerate";
        case CltMode::Sanity: return "sanity";
    }
    return "?";
}

namespace {

constexpr double kUniformDensity = 0.5;  // uniform law on [-1, 1]

std::vector<double> sorted_uniform(std::size_t n, std::uint64_t seed) {
    auto pts = spaces::sample_uniform(spaces::Space::interval(), n, seed);
    std::sort(pts.coords.begin(), pts.coords.end());
    return pts.coords;
}

// Mean of f(X_j) - f(x) over samples within eps of x, 0 when none are.
double graph_average(const std::vector<double>& sorted, const std::function<double(double)>& f, double x, double eps,
                     std::size_t* count = nullptr) {
    const double r = eps * (1.0 + 1e-12) + 1e-15;
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - r);
    const auto hi = std::upper_bound(lo, sorted.end(), x + r);
    const double fx = f(x);
    double s = 0.0;
    for (auto it = lo; it != hi; ++it) s += f(*it) - fx;
    const auto c = static_cast<std::size_t>(hi - lo);
    if (count) *count = c;
    return c == 0 ? 0.0 : s / static_cast<double>(c);
}

double central_moment4(const std::vector<double>& x) {
    const double m = stats::mean(x);
    double s = 0.0;
    for (double v : x) s += std::pow(v - m, 4);
    return s / static_cast<double>(x.size());
}

lap::FuncN lift(const std::function<double(double)>& f) {
    return [f](std::span<const double> p) { return f(p[0]); };
}

double uniform_density(std::span<const double> p) { return std::abs(p[0]) <= 1.0 ? kUniformDensity : 0.0; }

}  // namespace

CltReport clt_fixed_point(const CltSetup& setup) {
    if (setup.trials < 100) throw InputError("clt_fixed_point: trials must be at least 100");
    if (setup.max_attempts < 1) throw InputError("clt_fixed_point: max_attempts must be at least 1");
    CltReport rep;
    rep.setup = setup;
    const std::size_t workers = std::max<std::size_t>(1, setup.workers);

    if (setup.mode == CltMode::Sanity) {
        rep.sanity_p_values = parallel_map(setup.meta_trials, workers, [&](std::size_t mt) {
            CounterRng rng(substream_seed(setup.seed, mt));
            std::vector<double> z(setup.trials);
            for (double& v : z) v = standard_normal(rng);
            return stats::ks_normal(z).p_value;
        });
        rep.sanity_median = stats::median(rep.sanity_p_values);
        rep.passed = rep.sanity_median > 0.25 && rep.sanity_median < 0.75;
        return rep;
    }

    if (setup.n < 2) throw InputError("clt_fixed_point: n must be at least 2");
    if (!(setup.eps > 0.0)) throw InputError("clt_fixed_point: eps must be positive");
    if (std::abs(setup.x) > 1.0) throw InputError("clt_fixed_point: x must lie in [-1, 1]");
    const TestFunction fn = named_function(setup.function);
    const kern::Kernel k = kern::Kernel::parse(setup.kernel);
    const double x = setup.x;
    const double n = static_cast<double>(setup.n);
    const lap::FuncN f = lift(fn.f);
    const double p[1] = {x};

    if (setup.mode == CltMode::Degenerate) {
        std::vector<double> grid = setup.eps_grid.empty() ? std::vector<double>{0.4, 0.2, 0.1, 0.05} : setup.eps_grid;
        std::vector<double> log_eps, log_sd;
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            const double eps = grid[gi];
            const double center = lap::appendix_D_expectation(1, f, p, eps, k, uniform_density);
            const double root = std::sqrt(n * eps * eps * eps);
            auto vals = parallel_map(setup.trials, workers, [&](std::size_t t) {
                const std::uint64_t s = substream_seed(substream_seed(setup.seed, gi), t);
                auto pts = spaces::sample_uniform(spaces::Space::interval(), setup.n, s);
                return root * (lap::appendix_D_sum(pts, f, p, eps, k) - center);
            });
            rep.degenerate_sd.push_back(stats::sd(vals));
            rep.degenerate_predicted.push_back(eps * std::sqrt(kUniformDensity * k.k2_t4()) * std::abs(fn.d2(x)) / 2.0);
            log_eps.push_back(std::log(eps));
            log_sd.push_back(std::log(rep.degenerate_sd.back()));
        }
        if (grid.size() >= 3) rep.degenerate_slope = stats::rate_fit(log_eps, log_sd).slope;
        rep.passed = true;
        for (std::size_t i = 0; i < grid.size(); ++i)
            rep.passed = rep.passed && rep.degenerate_sd[i] <= 2.0 * rep.degenerate_predicted[i];
        return rep;
    }

    const double eps = setup.eps;
    const double root = std::sqrt(n * eps * eps * eps);
    std::function<double(const std::vector<double>&)> statistic;
    switch (setup.mode) {
        case CltMode::KernelDifference: {
            rep.center = lap::appendix_D_expectation(1, f, p, eps, k, uniform_density);
            rep.scale = std::abs(fn.d1(x)) * std::sqrt(kUniformDensity * k.k2_t2());
            rep.predicted_raw_sd = rep.scale / root;
            statistic = [&](const std::vector<double>& xs) {
                spaces::PointSet ps;
                ps.dim = 1;
                ps.coords = xs;
                return lap::appendix_D_sum(ps, f, p, eps, k);
            };
            break;
        }
        case CltMode::IntervalGraph: {
            rep.center = lap::averaging_lap(spaces::Space::interval(), fn.f, x, {eps, 1e-11}) / (eps * eps);
            rep.drift = std::abs(rep.center - fn.d2(x) / 6.0);
            rep.scale = std::abs(fn.d1(x)) / std::sqrt(3.0);
            rep.predicted_raw_sd = rep.scale / root;
            statistic = [&](const std::vector<double>& xs) { return graph_average(xs, fn.f, x, eps) / (eps * eps); };
            break;
        }
        case CltMode::KernelMean: {
            const double lo = std::max(-1.0, x - k.support() * eps), hi = std::min(1.0, x + k.support() * eps);
            const double fx = fn.f(x);
            auto term = [k, x, eps, fx, f = fn.f](double y) { return k((x - y) / eps) / eps * (f(y) - fx); };
            const double e1 = quad::simpson([&](double y) { return term(y) * kUniformDensity; }, lo, hi, 1e-14, 16, 30).value;
            const double e2 = quad::simpson([&](double y) { return term(y) * term(y) * kUniformDensity; }, lo, hi, 1e-13, 16, 30).value;
            rep.center = e1;
            rep.quad_var = e2 - e1 * e1;
            rep.scale = std::sqrt(std::max(rep.quad_var, 0.0));
            rep.predicted_raw_sd = rep.scale / std::sqrt(n);
            statistic = [term](const std::vector<double>& xs) {
                double s = 0.0;
                for (double v : xs) s += term(v);
                return s / static_cast<double>(xs.size());
            };
            break;
        }
        default:
            break;
    }
    if (rep.scale < 1e-12)
        throw InputError("clt_fixed_point: theory scale " + std::to_string(rep.scale) +
                         " is below 1e-12 (f'(x) = 0?); use mode=degenerate to check the vanishing limit");
    const double norm = setup.mode == CltMode::KernelMean ? std::sqrt(n) : root;

    for (std::size_t a = 0; a < setup.max_attempts; ++a) {
        const std::uint64_t attempt_seed = substream_seed(setup.seed, a);
        rep.raw = parallel_map(setup.trials, workers, [&](std::size_t t) {
            auto pts = spaces::sample_uniform(spaces::Space::interval(), setup.n, substream_seed(attempt_seed, t));
            if (setup.mode == CltMode::IntervalGraph) std::sort(pts.coords.begin(), pts.coords.end());
            return statistic(pts.coords);
        });
        rep.normalized.resize(rep.raw.size());
        for (std::size_t t = 0; t < rep.raw.size(); ++t) rep.normalized[t] = norm * (rep.raw[t] - rep.center) / rep.scale;
        rep.ks = stats::ks_normal(rep.normalized);
        rep.attempt_p_values.push_back(rep.ks.p_value);
        rep.attempts = a + 1;
        if (rep.ks.p_value > setup.ks_threshold) {
            rep.passed = true;
            break;
        }
    }
    rep.mean = stats::mean(rep.normalized);
    rep.sd = stats::sd(rep.normalized);
    rep.raw_sd = stats::sd(rep.raw);
    if (setup.mode == CltMode::KernelMean) {
        const double v = rep.raw_sd * rep.raw_sd;
        const double t = static_cast<double>(rep.raw.size());
        rep.n_var_raw = n * v;
        rep.var_se = n * std::sqrt(std::max(0.0, (central_moment4(rep.raw) - (t - 3.0) / (t - 1.0) * v * v) / t));
    }
    return rep;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw InputError("log_grid: need 0 < lo < hi and count >= 2");
    std::vector<double> g(count);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

SweepResult epsilon_sweep(const SweepSetup& setup) {
    if (setup.n_grid.empty() || setup.eps_grid.empty()) throw InputError("epsilon_sweep: grids must be nonempty");
    if (setup.trials < 1) throw InputError("epsilon_sweep: trials must be at least 1");
    const TestFunction fn = named_function(setup.function);
    SweepResult res;
    res.setup = setup;
    for (int i = 0; i <= 20; ++i) res.eval_points.push_back(-0.8 + 0.08 * i);
    const std::size_t ne = setup.eps_grid.size(), nn = setup.n_grid.size(), nt = setup.trials;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    auto per_trial = parallel_map(nn * nt, std::max<std::size_t>(1, setup.workers), [&](std::size_t task) {
        const std::size_t ni = task / nt, t = task % nt;
        const std::size_t n = setup.n_grid[ni];
        const auto xs = sorted_uniform(n, substream_seed(substream_seed(setup.seed, n), t));
        std::vector<double> err(ne);
        for (std::size_t e = 0; e < ne; ++e) {
            const double eps = setup.eps_grid[e];
            double total = 0.0;
            bool ok = true;
            for (double x : res.eval_points) {
                std::size_t c = 0;
                const double v = graph_average(xs, fn.f, x, eps, &c);
                if (c == 0) {
                    ok = false;
                    break;
                }
                total += std::abs(v / (eps * eps) - fn.d2(x) / 6.0);
            }
            err[e] = ok ? total / static_cast<double>(res.eval_points.size()) : nan;
        }
        return err;
    });

    res.mean_error.assign(nn, std::vector<double>(ne, nan));
    res.std_error.assign(nn, std::vector<double>(ne, nan));
    res.valid.assign(nn, std::vector<bool>(ne, true));
    std::vector<double> log_n, log_eps, log_err;
    res.argmin_interior = true;
    for (std::size_t ni = 0; ni < nn; ++ni) {
        std::size_t best = ne;
        for (std::size_t e = 0; e < ne; ++e) {
            std::vector<double> v;
            for (std::size_t t = 0; t < nt; ++t) {
                const double x = per_trial[ni * nt + t][e];
                if (std::isnan(x)) res.valid[ni][e] = false;
                v.push_back(x);
            }
            if (!res.valid[ni][e]) continue;
            res.mean_error[ni][e] = stats::mean(v);
            res.std_error[ni][e] = nt > 1 ? stats::sd(v) / std::sqrt(static_cast<double>(nt)) : 0.0;
            if (best == ne || res.mean_error[ni][e] < res.mean_error[ni][best]) best = e;
        }
        if (best == ne) throw NumericError("epsilon_sweep: every eps is invalid for n = " + std::to_string(setup.n_grid[ni]));
        res.argmin.push_back(best);
        res.argmin_eps.push_back(setup.eps_grid[best]);
        res.min_error.push_back(res.mean_error[ni][best]);
        std::size_t first_valid = 0;
        while (!res.valid[ni][first_valid]) ++first_valid;
        if (best == first_valid || best + 1 == ne) res.argmin_interior = false;
        log_n.push_back(std::log(static_cast<double>(setup.n_grid[ni])));
        log_eps.push_back(std::log(res.argmin_eps.back()));
        log_err.push_back(std::log(res.min_error.back()));
    }
    if (nn >= 3) {
        res.eps_fit = stats::rate_fit(log_n, log_eps);
        res.error_fit = stats::rate_fit(log_n, log_err);
    }
    return res;
}

namespace {

struct SgSeedResult {
    std::vector<double> eigenvalues;
    Eigen::MatrixXd cell_means;  // 3^L x 2
    std::vector<std::size_t> cell_counts;
};

std::size_t cell_index(const std::string& addr, int level) {
    std::size_t id = 0;
    for (int l = 0; l < level; ++l) id = id * 3 + static_cast<std::size_t>(addr[static_cast<std::size_t>(l)] - '1');
    return id;
}

SgMetricReport summarize(const std::string& metric, const std::vector<SgSeedResult>& per_seed) {
    SgMetricReport r;
    r.metric = metric;
    for (const auto& s : per_seed) {
        r.eigenvalues.push_back(s.eigenvalues);
        r.gap_ratios.push_back(std::abs(s.eigenvalues[0] - s.eigenvalues[1]) / std::abs(s.eigenvalues[0]));
    }
    for (std::size_t a = 0; a < per_seed.size(); ++a) {
        for (std::size_t b = a + 1; b < per_seed.size(); ++b) {
            std::vector<Eigen::Index> rows;
            for (std::size_t c = 0; c < per_seed[a].cell_counts.size(); ++c)
                if (per_seed[a].cell_counts[c] > 0 && per_seed[b].cell_counts[c] > 0) rows.push_back(static_cast<Eigen::Index>(c));
            Eigen::MatrixXd ma(static_cast<Eigen::Index>(rows.size()), 2), mb(static_cast<Eigen::Index>(rows.size()), 2);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                ma.row(static_cast<Eigen::Index>(i)) = per_seed[a].cell_means.row(rows[i]);
                mb.row(static_cast<Eigen::Index>(i)) = per_seed[b].cell_means.row(rows[i]);
            }
            SgPair p;
            p.a = a;
            p.b = b;
            for (std::size_t d = 0; d < 2; ++d) {
                const double la = per_seed[a].eigenvalues[d], lb = per_seed[b].eigenvalues[d];
                if (std::abs(la - lb) > 0.05 * std::max(std::abs(la), std::abs(lb))) p.eigenvalues_match = false;
            }
            const auto al = emap::align_columns(ma, mb, {{1, 2}});
            p.angle = al.angles[0];
            p.reflection = al.reflections[0];
            p.rms_before = al.rms_before;
            p.rms_after = al.rms_after;
            r.pairs.push_back(p);
        }
    }
    return r;
}

}  // namespace

SgProbeReport sg_probe(const SgProbeSetup& setup) {
    if (setup.n < 500) throw InputError("sg_probe: n must be at least 500");
    if (setup.seeds.size() < 3) throw InputError("sg_probe: need at least 3 seeds");
    if (setup.compare_level < 1 || setup.compare_level > setup.address_length)
        throw InputError("sg_probe: compare level must lie in [1, address length]");
    const std::size_t ncells = static_cast<std::size_t>(std::pow(3, setup.compare_level) + 0.5);
    const std::size_t ns = setup.seeds.size();
    // task = metric * ns + seed index
    auto results = parallel_map(2 * ns, std::max<std::size_t>(1, setup.workers), [&](std::size_t task) {
        const lap::Metric metric = task < ns ? lap::Metric::Euclidean : lap::Metric::DCell;
        const std::uint64_t seed = setup.seeds[task % ns];
        const auto pts = spaces::sample_uniform(spaces::Space::gasket(setup.address_length), setup.n, seed);
        const auto op = lap::graph_lap_eps(pts, setup.eps, metric);
        if (op.isolated_count() > 0)
            throw NumericError("sg_probe: graph at eps = " + std::to_string(setup.eps) + " has " +
                               std::to_string(op.isolated_count()) + " isolated points; use a larger eps");
        emap::EigenmapOptions eo;
        eo.seed = seed;
        const auto m = emap::build_eigenmap(op, 2, eo);
        if (m.skipped_zero_modes > 1)
            throw NumericError("sg_probe: graph at eps = " + std::to_string(setup.eps) + " is disconnected; use a larger eps");
        SgSeedResult r;
        r.eigenvalues = m.eigenvalues;
        r.cell_means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ncells), 2);
        r.cell_counts.assign(ncells, 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const std::size_t c = cell_index(pts.addresses[i], setup.compare_level);
            r.cell_means.row(static_cast<Eigen::Index>(c)) += m.coords.row(static_cast<Eigen::Index>(i));
            ++r.cell_counts[c];
        }
        for (std::size_t c = 0; c < ncells; ++c)
            if (r.cell_counts[c] > 0) r.cell_means.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(r.cell_counts[c]);
        return r;
    });
    SgProbeReport rep;
    rep.setup = setup;
    rep.euclidean = summarize("euclidean", std::vector<SgSeedResult>(results.begin(), results.begin() + static_cast<std::ptrdiff_t>(ns)));
    rep.dcell = summarize("d_cell", std::vector<SgSeedResult>(results.begin() + static_cast<std::ptrdiff_t>(ns), results.end()));
    return rep;
}

SgRescalingReport sg_rescaling_probe(const std::vector<int>& levels, std::size_t modes) {
    if (levels.empty()) throw InputError("sg_rescaling_probe: no levels given");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 1 || levels[i] > 8) throw InputError("sg_rescaling_probe: levels must lie in [1, 8]");
        if (i > 0 && levels[i] <= levels[i - 1]) throw InputError("sg_rescaling_probe: levels must be ascending");
    }
    if (modes < 2) throw InputError("sg_rescaling_probe: need at least 2 modes");
    SgRescalingReport rep;
    rep.levels = levels;
    for (int m : levels) {
        const auto g = lap::sg_vertex_graph(m);
        linalg::EigsOptions eo;
        eo.tol = 1e-10;
        const auto sp = linalg::eigs_smallest_magnitude(g.op, std::min(modes, g.op.n()), eo);
        rep.eigenvalues.push_back(sp.values);
        double l1 = 0.0;
        for (double v : sp.values)
            if (std::abs(v) >= 1e-10) {
                l1 = v;
                break;
            }
        rep.lambda1_5m.push_back(l1 * std::pow(5.0, m));
        rep.lambda1_4m.push_back(l1 * std::pow(4.0, m));
    }
    for (std::size_t i = 1; i < levels.size(); ++i) {
        rep.ratios_5m.push_back(rep.lambda1_5m[i] / rep.lambda1_5m[i - 1]);
        rep.ratios_4m.push_back(rep.lambda1_4m[i] / rep.lambda1_4m[i - 1]);
    }
    return rep;
}

nlohmann::json to_json(const CltReport& r) {
    using nlohmann::json;
    const CltSetup& s = r.setup;
    json j;
    j["config"] = {{"mode", clt_mode_name(s.mode)}, {"function", s.function}, {"x", s.x},       {"kernel", s.kernel},
                   {"eps", s.eps},                  {"eps_grid", s.eps_grid}, {"n", s.n},       {"trials", s.trials},
                   {"seed", s.seed},                {"max_attempts", s.max_attempts},           {"ks_threshold", s.ks_threshold},
                   {"meta_trials", s.meta_trials}};
    json sum;
    sum["passed"] = r.passed;
    if (s.mode == CltMode::Sanity) {
        j["per_trial"] = {{"p_values", r.sanity_p_values}};
        sum["median_p_value"] = r.sanity_median;
    } else if (s.mode == CltMode::Degenerate) {
        j["per_trial"] = json::object();
        sum["sd_normalized_by_eps"] = r.degenerate_sd;
        sum["predicted_sd"] = r.degenerate_predicted;
        sum["log_log_slope"] = r.degenerate_slope;
    } else {
        j["per_trial"] = {{"normalized", r.normalized}, {"raw", r.raw}};
        sum["center"] = r.center;
        sum["scale"] = r.scale;
        sum["mean"] = r.mean;
        sum["sd"] = r.sd;
        sum["raw_sd"] = r.raw_sd;
        sum["predicted_raw_sd"] = r.predicted_raw_sd;
        sum["ks_statistic"] = r.ks.statistic;
        sum["p_value"] = r.ks.p_value;
        sum["attempts"] = r.attempts;
        sum["attempt_p_values"] = r.attempt_p_values;
        if (s.mode == CltMode::IntervalGraph) sum["drift"] = r.drift;
        if (s.mode == CltMode::KernelMean) {
            sum["n_var_raw"] = r.n_var_raw;
            sum["quadrature_var"] = r.quad_var;
            sum["var_standard_error"] = r.var_se;
        }
    }
    j["summary"] = sum;
    return j;
}

nlohmann::json to_json(const SweepResult& r) {
    using nlohmann::json;
    json j;
    j["config"] = {{"function", r.setup.function}, {"n_grid", r.setup.n_grid}, {"eps_grid", r.setup.eps_grid},
                   {"trials", r.setup.trials},     {"seed", r.setup.seed}};
    json cells = json::array();
    for (std::size_t ni = 0; ni < r.setup.n_grid.size(); ++ni) {
        for (std::size_t e = 0; e < r.setup.eps_grid.size(); ++e) {
            json c = {{"n", r.setup.n_grid[ni]}, {"eps", r.setup.eps_grid[e]}, {"valid", static_cast<bool>(r.valid[ni][e])},
                      {"trials", r.setup.trials}};
            if (r.valid[ni][e]) {
                c["mean_error"] = r.mean_error[ni][e];
                c["std_error"] = r.std_error[ni][e];
            }
            cells.push_back(c);
        }
    }
    j["per_trial"] = {{"cells", cells}, {"eval_points", r.eval_points}};
    j["summary"] = {{"argmin_eps", r.argmin_eps},
                    {"argmin_index", r.argmin},
                    {"min_error", r.min_error},
                    {"argmin_interior", r.argmin_interior},
                    {"eps_exponent", r.eps_fit.slope},
                    {"eps_fit_r2", r.eps_fit.r2},
                    {"error_exponent", r.error_fit.slope},
                    {"error_fit_r2", r.error_fit.r2}};
    return j;
}

namespace {

nlohmann::json metric_json(const SgMetricReport& m) {
    using nlohmann::json;
    json pairs = json::array();
    for (const auto& p : m.pairs)
        pairs.push_back({{"a", p.a},
                         {"b", p.b},
                         {"angle", p.angle},
                         {"reflection", p.reflection},
                         {"rms_before", p.rms_before},
                         {"rms_after", p.rms_after},
                         {"eigenvalues_match", p.eigenvalues_match}});
    return {{"metric", m.metric}, {"eigenvalues", m.eigenvalues}, {"gap_ratios", m.gap_ratios}, {"pairs", pairs}};
}

}  // namespace

nlohmann::json to_json(const SgProbeReport& r) {
    using nlohmann::json;
    json j;
    j["config"] = {{"n", r.setup.n},
                   {"eps", r.setup.eps},
                   {"address_length", r.setup.address_length},
                   {"seeds", r.setup.seeds},
                   {"compare_level", r.setup.compare_level}};
    j["per_trial"] = {{"euclidean", metric_json(r.euclidean)}, {"d_cell", metric_json(r.dcell)}};
    auto worst = [](const SgMetricReport& m) {
        double g = 0.0, ratio = 0.0;
        for (double v : m.gap_ratios) g = std::max(g, v);
        for (const auto& p : m.pairs) ratio = std::max(ratio, p.rms_after / p.rms_before);
        return std::pair{g, ratio};
    };
    const auto [ge, re] = worst(r.euclidean);
    const auto [gd, rd] = worst(r.dcell);
    j["summary"] = {{"max_gap_ratio_euclidean", ge},
                    {"max_gap_ratio_d_cell", gd},
                    {"max_rms_ratio_euclidean", re},
                    {"max_rms_ratio_d_cell", rd}};
    return j;
}

nlohmann::json to_json(const SgRescalingReport& r) {
    using nlohmann::json;
    json j;
    j["config"] = {{"levels", r.levels}};
    j["per_trial"] = {{"eigenvalues", r.eigenvalues}};
    j["summary"] = {{"lambda1_times_5m", r.lambda1_5m},
                    {"lambda1_times_4m", r.lambda1_4m},
                    {"ratios_5m", r.ratios_5m},
                    {"ratios_4m", r.ratios_4m}};
    return j;
}

}  // namespace eigenlab::exp
