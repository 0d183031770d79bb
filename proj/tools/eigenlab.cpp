// eigenlab command-line front end.
//
// Every subcommand reads a flat key=value config (file via --config, flags
// override it) and writes a JSON report named <command>-<hash>.json into the
// output directory, plus CSV companions sharing the same hash.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "eigenlab/eigenmap.hpp"
#include "eigenlab/error.hpp"
#include "eigenlab/exact_spectra.hpp"
#include "eigenlab/experiments.hpp"
#include "eigenlab/kernel.hpp"
#include "eigenlab/laplacians.hpp"
#include "eigenlab/linalg.hpp"
#include "eigenlab/spaces.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace eigenlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCheck = 4;

using Config = std::map<std::string, std::string>;

struct Key {
    std::string name;
    std::string fallback;
    std::string help;
};

struct Runtime {
    fs::path out = ".";
    std::size_t workers = 1;
    bool check = false;
};

struct Output {
    json report;
    std::vector<std::pair<std::string, std::string>> files;  // suffix, contents
    bool check_passed = true;
    std::string check_message;
};

struct Command {
    std::string name;
    std::string help;
    std::vector<Key> keys;
    std::function<Output(const Config&, const Runtime&)> run;
};

// ---- config access ----

std::string get(const Config& c, const std::string& key) {
    auto it = c.find(key);
    if (it == c.end()) throw InputError("missing config key '" + key + "'");
    return it->second;
}

double get_double(const Config& c, const std::string& key) {
    const std::string s = get(c, key);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw InputError("config key '" + key + "': '" + s + "' is not a number");
    return v;
}

std::uint64_t get_uint(const Config& c, const std::string& key) {
    const std::string s = get(c, key);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        if (!s.empty() && s[0] != '-') v = std::stoull(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw InputError("config key '" + key + "': '" + s + "' is not a nonnegative integer");
    return v;
}

bool get_bool(const Config& c, const std::string& key) {
    const std::string s = get(c, key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw InputError("config key '" + key + "': '" + s + "' is not a boolean");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<double> get_doubles(const Config& c, const std::string& key) {
    std::vector<double> out;
    for (const auto& part : split(get(c, key), ',')) out.push_back(get_double({{key, part}}, key));
    return out;
}

std::vector<std::uint64_t> get_uints(const Config& c, const std::string& key) {
    std::vector<std::uint64_t> out;
    for (const auto& part : split(get(c, key), ',')) out.push_back(get_uint({{key, part}}, key));
    return out;
}

Config read_config_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open config file " + path.string());
    Config c;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        c[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return c;
}

// ---- shared builders ----

const std::vector<Key> kSpaceKeys{
    {"space", "interval", "interval, square, torus, sphere, line or sg"},
    {"n", "1000", "number of sample points"},
    {"seed", "1", "master seed (falls back to EIGENLAB_SEED)"},
    {"addr-len", "15", "address length for sg samples"},
    {"major", "1", "torus major radius"},
    {"minor", "0.4", "torus tube radius"},
    {"density", "gaussian", "line density: gaussian or exponential"},
    {"mu", "0", "gaussian mean"},
    {"sigma", "1", "gaussian standard deviation"},
    {"rate", "1", "exponential rate"},
    {"grid", "false", "interval only: use the uniform grid instead of random samples"},
};

const std::vector<Key> kGraphKeys{
    {"input", "", "points CSV; when empty, points are sampled from the space keys"},
    {"eps", "", "neighbourhood radius"},
    {"eps-c", "1", "radius rule eps = c n^-beta when eps is empty"},
    {"eps-beta", "", "radius rule exponent"},
    {"metric", "euclidean", "euclidean or d_cell"},
    {"kernel", "none", "none for the eps-graph, else indicator, gaussian, epanechnikov or triangle"},
};

std::vector<Key> concat(std::initializer_list<std::vector<Key>> parts) {
    std::vector<Key> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

spaces::Space make_space(const Config& c) {
    auto s = spaces::Space::parse(get(c, "space"));
    switch (s.kind) {
        case spaces::SpaceKind::Torus: s = spaces::Space::torus(get_double(c, "major"), get_double(c, "minor")); break;
        case spaces::SpaceKind::Gasket: s = spaces::Space::gasket(static_cast<int>(get_uint(c, "addr-len"))); break;
        case spaces::SpaceKind::Line: {
            const std::string d = get(c, "density");
            if (d == "gaussian")
                s = spaces::Space::line(spaces::Density::gaussian(get_double(c, "mu"), get_double(c, "sigma")));
            else if (d == "exponential")
                s = spaces::Space::line(spaces::Density::exponential(get_double(c, "rate")));
            else
                throw InputError("unknown density '" + d + "' (expected gaussian or exponential)");
            break;
        }
        default: break;
    }
    s.validate();
    return s;
}

spaces::PointSet make_points(const Config& c) {
    const std::string input = c.count("input") ? get(c, "input") : "";
    if (!input.empty()) {
        std::ifstream is(input);
        if (!is) throw InputError("cannot open points file " + input);
        return spaces::PointSet::read_csv(is);
    }
    const auto space = make_space(c);
    const std::size_t n = get_uint(c, "n");
    if (get_bool(c, "grid")) {
        if (space.kind != spaces::SpaceKind::Interval) throw InputError("grid=true is only available for the interval");
        return spaces::sample_grid(n);
    }
    return spaces::sample_uniform(space, n, get_uint(c, "seed"));
}

double resolve_eps(const Config& c, std::size_t n) {
    if (!get(c, "eps").empty()) return get_double(c, "eps");
    if (get(c, "eps-beta").empty()) throw InputError("set eps, or eps-beta (with eps-c) for the rule eps = c n^-beta");
    return get_double(c, "eps-c") * std::pow(static_cast<double>(n), -get_double(c, "eps-beta"));
}

linalg::SparseSymOperator make_operator(const Config& c, const spaces::PointSet& pts, double eps) {
    const std::string kernel = get(c, "kernel");
    if (kernel == "none") return lap::graph_lap_eps(pts, eps, lap::parse_metric(get(c, "metric")));
    if (get(c, "metric") != "euclidean") throw InputError("kernel graphs use the euclidean metric only");
    return lap::graph_lap_kernel(pts, kern::Kernel::parse(kernel), eps);
}

std::string to_csv(const std::function<void(std::ostream&)>& fill) {
    std::ostringstream os;
    os.precision(17);
    fill(os);
    return os.str();
}

// ---- subcommands ----

Output cmd_sample(const Config& c, const Runtime&) {
    const auto pts = make_points(c);
    Output o;
    o.report = {{"points", pts.size()}, {"dim", pts.dim}, {"distribution", pts.distribution}};
    o.files.push_back({".csv", to_csv([&](std::ostream& os) { pts.write_csv(os); })});
    return o;
}

Output laplacian_graph(const Config& c) {
    const auto pts = make_points(c);
    const double eps = resolve_eps(c, pts.size());
    const auto op = make_operator(c, pts, eps);
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0;
    for (std::size_t i = 0; i < op.n(); ++i) dmin = std::min(dmin, op.degree(i)), dmax = std::max(dmax, op.degree(i));
    Output o;
    o.report = {{"points", op.n()},      {"eps", eps},        {"stored_entries", op.nnz_offdiag()},
                {"isolated", op.isolated_count()}, {"min_degree", dmin}, {"max_degree", dmax}};
    o.files.push_back({"-coo.txt", to_csv([&](std::ostream& os) { op.write_coo(os); })});
    const std::string fname = get(c, "function");
    if (!fname.empty()) {
        const auto fn = exp::named_function(fname);
        Eigen::VectorXd f(static_cast<Eigen::Index>(pts.size()));
        for (std::size_t i = 0; i < pts.size(); ++i) f[static_cast<Eigen::Index>(i)] = fn.f(pts.at(i, 0));
        const Eigen::VectorXd lf = op.apply(f);
        o.files.push_back({"-apply.csv", to_csv([&](std::ostream& os) {
                               os << "point_index,x1,degree,f,Lf\n";
                               for (std::size_t i = 0; i < pts.size(); ++i)
                                   os << i << ',' << pts.at(i, 0) << ',' << op.degree(i) << ','
                                      << f[static_cast<Eigen::Index>(i)] << ',' << lf[static_cast<Eigen::Index>(i)] << '\n';
                           })});
    }
    return o;
}

// eps^-2 L_eps f at each point and eps, against f''/6 (ball averaging) or
// the drift target f'' + 2 (g'/g) f' for 6 eps^-2 times the weighted average.
Output laplacian_averaging(const Config& c, bool weighted) {
    const auto fn = exp::named_function(get(c, "function"));
    const auto xs = get_doubles(c, "points");
    const auto eps_grid = get_doubles(c, "eps-grid");
    if (xs.empty() || eps_grid.empty()) throw InputError("points and eps-grid must be nonempty");
    spaces::Space space = make_space(c);
    const double mu = get_double(c, "mu"), sigma = get_double(c, "sigma");
    const auto g = spaces::Density::gaussian(mu, sigma);
    json rows = json::array();
    std::vector<double> worst(eps_grid.size(), 0.0);
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        const double eps = eps_grid[e];
        for (double x : xs) {
            double value, target;
            if (weighted) {
                value = 6.0 / (eps * eps) * lap::weighted_averaging_lap(fn.f, [&](double t) { return g.pdf(t); }, x, eps);
                target = fn.d2(x) + 2.0 * g.dpdf(x) / g.pdf(x) * fn.d1(x);
            } else {
                value = lap::averaging_lap(space, fn.f, x, {eps, 1e-10}) / (eps * eps);
                target = fn.d2(x) / 6.0;
            }
            const double err = std::abs(value - target);
            worst[e] = std::max(worst[e], err);
            rows.push_back({{"eps", eps}, {"x", x}, {"value", value}, {"target", target}, {"error", err}});
        }
    }
    Output o;
    o.report = {{"rows", rows}, {"max_error", worst}};
    if (eps_grid.size() >= 3) {
        std::vector<double> le, lw;
        for (std::size_t e = 0; e < eps_grid.size(); ++e) {
            le.push_back(std::log(eps_grid[e]));
            lw.push_back(std::log(std::max(worst[e], 1e-300)));
        }
        o.report["log_log_slope"] = stats::rate_fit(le, lw).slope;
    }
    o.files.push_back({".csv", to_csv([&](std::ostream& os) {
                           os << "eps,x,value,target,error\n";
                           for (const auto& r : rows)
                               os << r["eps"].get<double>() << ',' << r["x"].get<double>() << ','
                                  << r["value"].get<double>() << ',' << r["target"].get<double>() << ','
                                  << r["error"].get<double>() << '\n';
                       })});
    return o;
}

Output cmd_laplacian(const Config& c, const Runtime&) {
    const std::string op = get(c, "operator");
    if (op == "graph") return laplacian_graph(c);
    if (op == "averaging") return laplacian_averaging(c, false);
    if (op == "weighted") return laplacian_averaging(c, true);
    throw InputError("unknown operator '" + op + "' (expected graph, averaging or weighted)");
}

Output cmd_eigenmap(const Config& c, const Runtime&) {
    const auto pts = make_points(c);
    const double eps = resolve_eps(c, pts.size());
    const auto op = make_operator(c, pts, eps);
    emap::EigenmapOptions eo;
    eo.tol = get_double(c, "tol");
    eo.seed = get_uint(c, "seed");
    const std::string anchor = get(c, "anchor");
    if (anchor == "rightmost")
        eo.anchor = emap::rightmost_point(pts);
    else if (anchor != "none")
        throw InputError("unknown anchor '" + anchor + "' (expected none or rightmost)");
    const auto m = emap::build_eigenmap(op, get_uint(c, "dims"), eo);
    Output o;
    o.report = {{"points", pts.size()},
                {"eps", eps},
                {"isolated", op.isolated_count()},
                {"eigenvalues", m.eigenvalues},
                {"l2_maxabs", m.l2_maxabs},
                {"skipped_zero_modes", m.skipped_zero_modes},
                {"warnings", m.warnings}};
    o.files.push_back({".csv", to_csv([&](std::ostream& os) { emap::write_csv(os, m, pts); })});
    return o;
}

Output cmd_fit(const Config& c, const Runtime&) {
    const std::string input = get(c, "input");
    if (input.empty()) throw InputError("fit needs input=<eigenmap CSV>");
    std::ifstream is(input);
    if (!is) throw InputError("cannot open eigenmap file " + input);
    const auto table = emap::read_csv(is);
    json fits = json::array();
    for (const auto& spec : split(get(c, "fits"), ',')) {
        const auto parts = split(spec, ':');
        if (parts.size() != 3) throw InputError("fit spec '" + spec + "' is not col_x:col_y:degree");
        const auto cx = get_uint({{"fits", parts[0]}}, "fits");
        const auto cy = get_uint({{"fits", parts[1]}}, "fits");
        const auto deg = get_uint({{"fits", parts[2]}}, "fits");
        const auto f = emap::fit_polynomial_image(table.map, cx, cy, deg);
        fits.push_back({{"x_column", cx}, {"y_column", cy}, {"degree", deg}, {"coefficients", f.coeffs}, {"residual", f.residual}});
    }
    Output o;
    o.report = {{"points", table.map.size()}, {"fits", fits}};
    return o;
}

Output cmd_exactspec(const Config& c, const Runtime&) {
    const std::string kind = get(c, "kind");
    const int kmax = static_cast<int>(get_uint(c, "kmax"));
    Output o;
    if (kind == "interval") {
        const std::string bcs = get(c, "bc");
        exact::BoundaryCondition bc;
        if (bcs == "neumann")
            bc = exact::BoundaryCondition::neumann();
        else if (bcs == "dirichlet")
            bc = exact::BoundaryCondition::dirichlet();
        else if (bcs == "periodic")
            bc = exact::BoundaryCondition::periodic();
        else if (bcs == "robin")
            bc = exact::BoundaryCondition::robin(get_double(c, "a"), get_double(c, "b"));
        else
            throw InputError("unknown bc '" + bcs + "' (expected neumann, dirichlet, periodic or robin)");
        json modes = json::array();
        for (const auto& p : exact::interval_eigenpairs(bc, kmax))
            modes.push_back({{"k", p.k}, {"omega", p.omega}, {"lambda", p.lambda}, {"A", p.A}, {"B", p.B}});
        o.report = {{"modes", modes}};
    } else if (kind == "grid") {
        json grids = json::array();
        for (auto n : get_uints(c, "grid-n")) {
            if (n < 3) throw InputError("grid-n values must be at least 3");
            const auto pts = spaces::sample_grid(n);
            const auto spec = linalg::eigh_operator(lap::graph_lap_eps(pts, 2.0 / static_cast<double>(n - 1)));
            double worst = 0;
            std::vector<double> computed;
            // eigh_operator is ascending by value, so k = 0 sits at the end
            for (std::size_t k = 0; k < n; ++k) {
                const double exact = std::cos(static_cast<double>(k) * std::numbers::pi / static_cast<double>(n - 1)) - 1.0;
                const double got = spec.values[n - 1 - k];
                computed.push_back(got);
                worst = std::max(worst, std::abs(got - exact));
            }
            json ratios = json::array();
            for (int k = 1; k <= std::min<int>(kmax, static_cast<int>(n) - 1); ++k) ratios.push_back(exact::grid_gap_ratio(n, k));
            grids.push_back({{"n", n}, {"eigenvalues", computed}, {"max_abs_error", worst}, {"gap_ratios", ratios}});
        }
        o.report = {{"grids", grids}};
    } else if (kind == "product") {
        const std::string ps = get(c, "product");
        exact::ProductSpace space;
        if (ps == "square")
            space = exact::ProductSpace::NeumannSquare;
        else if (ps == "torus")
            space = exact::ProductSpace::FlatTorus;
        else
            throw InputError("unknown product '" + ps + "' (expected square or torus)");
        const auto modes = exact::product_eigenpairs(space, kmax);
        json arr = json::array();
        std::vector<double> lambdas;
        for (const auto& m : modes) {
            arr.push_back({{"k1", m.k1}, {"k2", m.k2}, {"lambda", m.lambda}});
            lambdas.push_back(m.lambda);
        }
        o.report = {{"modes", arr}, {"multiplicities", exact::group_multiplicities(lambdas)}};
    } else {
        throw InputError("unknown kind '" + kind + "' (expected interval, grid or product)");
    }
    return o;
}

Output cmd_clt(const Config& c, const Runtime& rt) {
    exp::CltSetup s;
    s.mode = exp::parse_clt_mode(get(c, "mode"));
    s.function = get(c, "function");
    s.x = get_double(c, "x");
    s.kernel = get(c, "kernel");
    s.eps = get_double(c, "eps");
    s.eps_grid = get_doubles(c, "eps-grid");
    s.n = get_uint(c, "n");
    s.trials = get_uint(c, "trials");
    s.seed = get_uint(c, "seed");
    s.max_attempts = get_uint(c, "max-attempts");
    s.ks_threshold = get_double(c, "ks-threshold");
    s.meta_trials = get_uint(c, "meta-trials");
    s.workers = rt.workers;
    const auto r = exp::clt_fixed_point(s);
    Output o;
    o.report = exp::to_json(r);
    o.check_passed = r.passed;
    o.check_message = "clt " + exp::clt_mode_name(s.mode) + (r.passed ? " passed" : " failed");
    if (!r.normalized.empty())
        o.files.push_back({".csv", to_csv([&](std::ostream& os) {
                               os << "trial,raw,normalized\n";
                               for (std::size_t t = 0; t < r.raw.size(); ++t) os << t << ',' << r.raw[t] << ',' << r.normalized[t] << '\n';
                           })});
    return o;
}

Output cmd_sweep(const Config& c, const Runtime& rt) {
    exp::SweepSetup s;
    s.function = get(c, "function");
    s.n_grid.clear();
    for (auto n : get_uints(c, "n-grid")) s.n_grid.push_back(n);
    s.eps_grid = get(c, "eps-grid").empty()
                     ? exp::log_grid(get_double(c, "eps-lo"), get_double(c, "eps-hi"), get_uint(c, "eps-count"))
                     : get_doubles(c, "eps-grid");
    s.trials = get_uint(c, "trials");
    s.seed = get_uint(c, "seed");
    s.workers = rt.workers;
    const auto r = exp::epsilon_sweep(s);
    Output o;
    o.report = exp::to_json(r);
    const double lo = get_double(c, "check-lo"), hi = get_double(c, "check-hi");
    o.check_passed = r.argmin_interior && r.error_fit.slope >= lo && r.error_fit.slope <= hi;
    o.check_message = "min-error exponent " + std::to_string(r.error_fit.slope) + ", argmin interior " +
                      (r.argmin_interior ? "yes" : "no");
    o.files.push_back({".csv", to_csv([&](std::ostream& os) {
                           os << "n,eps,valid,mean_error,std_error\n";
                           for (std::size_t ni = 0; ni < s.n_grid.size(); ++ni)
                               for (std::size_t e = 0; e < s.eps_grid.size(); ++e)
                                   os << s.n_grid[ni] << ',' << s.eps_grid[e] << ',' << (r.valid[ni][e] ? 1 : 0) << ','
                                      << r.mean_error[ni][e] << ',' << r.std_error[ni][e] << '\n';
                       })});
    return o;
}

Output cmd_sgprobe(const Config& c, const Runtime& rt) {
    exp::SgProbeSetup s;
    s.n = get_uint(c, "n");
    s.eps = get_double(c, "eps");
    s.address_length = static_cast<int>(get_uint(c, "addr-len"));
    s.seeds = get_uints(c, "seeds");
    s.compare_level = static_cast<int>(get_uint(c, "compare-level"));
    s.workers = rt.workers;
    const auto r = exp::sg_probe(s);
    Output o;
    o.report = {{"probe", exp::to_json(r)}};
    const auto& sum = o.report["probe"]["summary"];
    bool ok = sum["max_gap_ratio_euclidean"].get<double>() < 0.05 && sum["max_rms_ratio_euclidean"].get<double>() < 0.1;
    std::vector<int> levels;
    for (auto m : get_uints(c, "rescale-levels")) levels.push_back(static_cast<int>(m));
    if (!levels.empty()) {
        const auto rr = exp::sg_rescaling_probe(levels, get_uint(c, "modes"));
        o.report["rescaling"] = exp::to_json(rr);
        for (double q : rr.ratios_5m) ok = ok && std::abs(q - 1.0) <= 0.1;
    }
    o.check_passed = ok;
    o.check_message = std::string("sgprobe thresholds ") + (ok ? "met" : "not met");
    return o;
}

std::vector<Command> commands() {
    return {
        {"sample", "sample points from a model space", kSpaceKeys, cmd_sample},
        {"laplacian", "graph Laplacian or averaging Laplacian values",
         concat({kSpaceKeys, kGraphKeys,
                 {{"operator", "graph", "graph, averaging (eps^-2 L_eps f) or weighted (6 eps^-2 density-weighted)"},
                  {"function", "", "named function: x, x2, cos_pi, quartic, sin3, exp"},
                  {"points", "-1,-0.45,0,0.37,1", "evaluation points for averaging/weighted"},
                  {"eps-grid", "0.1,0.03,0.01,0.003,0.001", "radii for averaging/weighted"}}}),
         cmd_laplacian},
        {"eigenmap", "eigenmap of a sampled graph Laplacian",
         concat({kSpaceKeys, kGraphKeys,
                 {{"dims", "3", "number of eigenmap coordinates"},
                  {"tol", "1e-8", "eigensolver residual tolerance"},
                  {"anchor", "none", "sign convention: none or rightmost"}}}),
         cmd_eigenmap},
        {"fit", "polynomial fits between eigenmap columns",
         {{"input", "", "eigenmap CSV"}, {"fits", "1:2:2,1:3:3", "col_x:col_y:degree list (1-based)"}},
         cmd_fit},
        {"exactspec", "closed-form spectra",
         {{"kind", "interval", "interval, grid or product"},
          {"bc", "neumann", "neumann, dirichlet, periodic or robin"},
          {"a", "0", "robin coefficient at -1"},
          {"b", "0", "robin coefficient at 1"},
          {"kmax", "5", "number of modes / largest index"},
          {"grid-n", "5,50,500", "grid sizes for kind=grid"},
          {"product", "square", "square or torus for kind=product"}},
         cmd_exactspec},
        {"clt", "fixed-point central limit experiment",
         {{"mode", "kernel-difference", "kernel-mean, interval-graph, kernel-difference, degenerate or sanity"},
          {"function", "x", "named function"},
          {"x", "0", "evaluation point"},
          {"kernel", "indicator", "kernel profile"},
          {"eps", "0.05", "radius"},
          {"eps-grid", "0.4,0.2,0.1,0.05", "radii for mode=degenerate"},
          {"n", "20000", "sample size"},
          {"trials", "500", "trials per attempt"},
          {"seed", "1", "master seed"},
          {"max-attempts", "3", "KS attempts under fresh sub-seeds"},
          {"ks-threshold", "0.01", "KS p-value threshold"},
          {"meta-trials", "50", "repetitions for mode=sanity"}},
         cmd_clt},
        {"sweep", "error surface over (n, eps)",
         {{"function", "cos_pi", "named function"},
          {"n-grid", "500,1000,2000,4000,8000", "sample sizes"},
          {"eps-grid", "", "explicit radii; when empty a log grid from eps-lo to eps-hi"},
          {"eps-lo", "0.001", "smallest radius"},
          {"eps-hi", "0.5", "largest radius"},
          {"eps-count", "25", "log grid size"},
          {"trials", "20", "trials per cell"},
          {"seed", "1", "master seed"},
          {"check-lo", "-0.27", "--check: lower bound on the min-error exponent"},
          {"check-hi", "-0.13", "--check: upper bound on the min-error exponent"}},
         cmd_sweep},
        {"sgprobe", "Sierpinski gasket eigenmap probes",
         {{"n", "3000", "points per seed"},
          {"eps", "0.1", "radius"},
          {"addr-len", "15", "address length"},
          {"seeds", "1,2,3,4,5", "seeds"},
          {"compare-level", "4", "cell level for cross-seed comparison"},
          {"rescale-levels", "4,5,6,7", "vertex-graph levels for the rescaling table (empty to skip)"},
          {"modes", "4", "eigenvalues per level"}},
         cmd_sgprobe},
    };
}

int verify(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open " + path.string());
    json j = json::parse(is);
    Config cfg;
    for (const auto& [k, v] : j.at("config").items()) cfg[k] = v.get<std::string>();
    const std::string stored = j.at("config_hash").get<std::string>();
    const std::string derived = exp::config_hash(cfg);
    bool ok = stored == derived && path.filename().string().find(stored) != std::string::npos;
    for (const auto& f : j.at("files")) {
        const std::string name = f.get<std::string>();
        if (name.find(stored) == std::string::npos || !fs::exists(path.parent_path() / name)) ok = false;
    }
    std::cout << (ok ? "ok " : "MISMATCH ") << derived << '\n';
    return ok ? kExitOk : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eigenlab: graph Laplacians, eigenmaps and their statistics"};
    app.fallthrough();
    Runtime rt;
    std::string config_path, verify_path, out_dir = ".";
    app.add_option("--config", config_path, "key=value config file; flags override it");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--workers", rt.workers, "worker threads for experiment trials")->check(CLI::PositiveNumber);
    app.add_flag("--check", rt.check, "exit 4 when the run misses its acceptance thresholds");
    app.add_option("--verify", verify_path, "re-derive and check the config hash of a JSON report");
    app.require_subcommand(0, 1);

    const auto cmds = commands();
    std::map<std::string, std::map<std::string, std::string>> flags;
    std::map<std::string, std::map<std::string, CLI::Option*>> opts;
    std::map<std::string, CLI::App*> subs;
    for (const auto& cmd : cmds) {
        auto* sub = app.add_subcommand(cmd.name, cmd.help);
        subs[cmd.name] = sub;
        for (const auto& k : cmd.keys)
            opts[cmd.name][k.name] = sub->add_option("--" + k.name, flags[cmd.name][k.name], k.help + " [" + k.fallback + "]");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (!verify_path.empty()) return verify(verify_path);
        const Command* chosen = nullptr;
        for (const auto& cmd : cmds)
            if (subs[cmd.name]->parsed()) chosen = &cmd;
        if (!chosen) {
            std::cerr << app.help();
            return kExitConfig;
        }

        Config cfg;
        for (const auto& k : chosen->keys) cfg[k.name] = k.fallback;
        bool seed_given = false;
        if (!config_path.empty()) {
            for (const auto& [k, v] : read_config_file(config_path)) {
                if (!cfg.count(k)) throw InputError("config file key '" + k + "' is not used by " + chosen->name);
                cfg[k] = v;
                seed_given = seed_given || k == "seed";
            }
        }
        for (const auto& k : chosen->keys) {
            if (opts[chosen->name][k.name]->count() > 0) {
                cfg[k.name] = flags[chosen->name][k.name];
                seed_given = seed_given || k.name == "seed";
            }
        }
        if (cfg.count("seed") && !seed_given) {
            if (const char* env = std::getenv("EIGENLAB_SEED")) cfg["seed"] = env;
        }

        rt.out = out_dir;
        const Output o = chosen->run(cfg, rt);

        const std::string hash = exp::config_hash(cfg);
        const std::string stem = chosen->name + "-" + hash;
        fs::create_directories(rt.out);
        json doc;
        doc["command"] = chosen->name;
        json jc = json::object();
        for (const auto& [k, v] : cfg) jc[k] = v;
        doc["config"] = jc;
        doc["config_hash"] = hash;
        json names = json::array();
        for (const auto& [suffix, text] : o.files) {
            const std::string name = stem + suffix;
            std::ofstream(rt.out / name) << text;
            names.push_back(name);
        }
        doc["files"] = names;
        doc["report"] = o.report;
        std::ofstream(rt.out / (stem + ".json")) << doc.dump(1) << '\n';
        std::cout << (rt.out / (stem + ".json")).string() << '\n';
        for (const auto& n : names) std::cout << (rt.out / n.get<std::string>()).string() << '\n';
        if (rt.check && !o.check_passed) {
            std::cerr << "check failed: " << o.check_message << '\n';
            return kExitCheck;
        }
        return kExitOk;
    } catch (const InputError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        if (!e.residuals().empty()) {
            std::cerr << "residuals:";
            for (double r : e.residuals()) std::cerr << ' ' << r;
            std::cerr << '\n';
        }
        return kExitNumeric;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
