#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eigenlab/kernel.hpp"
#include "eigenlab/stats.hpp"

namespace eigenlab::exp {

/// A named test function on the line with its first two derivatives.
struct TestFunction {
    std::string name;
    std::function<double(double)> f, d1, d2;
};

/// x, x2 (x^2), cos_pi (cos(pi x)), quartic ((x^2 - 1)^2), sin3 (sin(3x)), exp.
TestFunction named_function(std::string_view name);

/// 64-bit FNV-1a of a string, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

/// Canonical "key=value" lines (sorted by key), excluding runtime-only keys
/// such as workers; the config hash is fnv1a_hex of this text.
std::string canonical_config(const std::map<std::string, std::string>& cfg);
std::string config_hash(const std::map<std::string, std::string>& cfg);

enum class CltMode { KernelMean, IntervalGraph, KernelDifference, Degenerate, Sanity };
CltMode parse_clt_mode(std::string_view name);
std::string clt_mode_name(CltMode m);

struct CltSetup {
    CltMode mode = CltMode::KernelDifference;
    std::string function = "x";
    double x = 0.0;                   // evaluation point, in [-1, 1]
    std::string kernel = "indicator";
    double eps = 0.05;
    std::vector<double> eps_grid;     // Degenerate mode only
    std::size_t n = 20000;
    std::size_t trials = 500;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    std::size_t max_attempts = 3;     // KS retries under fresh sub-seeds
    double ks_threshold = 0.01;
    std::size_t meta_trials = 50;     // Sanity mode only
};

struct CltReport {
    CltSetup setup;
    std::vector<double> normalized;   // final attempt
    std::vector<double> raw;          // final attempt
    double center = 0.0;              // quadrature expectation of the raw statistic
    double scale = 0.0;               // theory s
    double predicted_raw_sd = 0.0;
    double mean = 0.0, sd = 0.0;      // of the normalized statistic
    double raw_sd = 0.0;
    stats::KsResult ks;
    std::size_t attempts = 0;
    bool passed = false;
    std::vector<double> attempt_p_values;
    // IntervalGraph mode: |eps^-2 L_eps f - f''/6| at x
    double drift = 0.0;
    // KernelMean mode: n Var(raw) against the quadrature variance
    double n_var_raw = 0.0, quad_var = 0.0, var_se = 0.0;
    // Degenerate mode: sd of sqrt(n eps^3)(D_{eps,n} - D_eps) per eps and the
    // prediction eps sqrt(g(p) int K^2 t^4) |f''(p)|/2
    std::vector<double> degenerate_sd, degenerate_predicted;
    double degenerate_slope = 0.0;
    // Sanity mode
    std::vector<double> sanity_p_values;
    double sanity_median = 0.0;
};

CltReport clt_fixed_point(const CltSetup& setup);

struct SweepSetup {
    std::string function = "cos_pi";
    std::vector<std::size_t> n_grid{500, 1000, 2000, 4000, 8000};
    std::vector<double> eps_grid;
    std::size_t trials = 20;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
};

/// Log-spaced grid of `count` values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

struct SweepResult {
    SweepSetup setup;
    std::vector<double> eval_points;
    // [n index][eps index]
    std::vector<std::vector<double>> mean_error, std_error;
    std::vector<std::vector<bool>> valid;
    std::vector<std::size_t> argmin;  // eps index per n
    std::vector<double> argmin_eps, min_error;
    stats::LineFit eps_fit, error_fit;
    bool argmin_interior = false;
};

SweepResult epsilon_sweep(const SweepSetup& setup);

struct SgProbeSetup {
    std::size_t n = 3000;
    double eps = 0.1;
    int address_length = 15;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    int compare_level = 4;  // cell level used to compare eigenmaps across seeds
    std::size_t workers = 1;
};

struct SgPair {
    std::size_t a = 0, b = 0;
    double angle = 0.0;
    bool reflection = false;
    double rms_before = 0.0, rms_after = 0.0;
    bool eigenvalues_match = true;
};

struct SgMetricReport {
    std::string metric;
    std::vector<std::vector<double>> eigenvalues;  // per seed: lambda_2, lambda_3
    std::vector<double> gap_ratios;
    std::vector<SgPair> pairs;
};

struct SgProbeReport {
    SgProbeSetup setup;
    SgMetricReport euclidean, dcell;
};

SgProbeReport sg_probe(const SgProbeSetup& setup);

struct SgRescalingReport {
    std::vector<int> levels;
    std::vector<std::vector<double>> eigenvalues;  // per level, ascending magnitude, including lambda_0
    std::vector<double> lambda1_5m, lambda1_4m;
    std::vector<double> ratios_5m, ratios_4m;      // successive level ratios of lambda_1
};

SgRescalingReport sg_rescaling_probe(const std::vector<int>& levels, std::size_t modes = 4);

nlohmann::json to_json(const CltReport& r);
nlohmann::json to_json(const SweepResult& r);
nlohmann::json to_json(const SgProbeReport& r);
nlohmann::json to_json(const SgRescalingReport& r);

}  // namespace eigenlab::exp
