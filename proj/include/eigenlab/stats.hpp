#pragma once

#include <cstddef>
#include <vector>

namespace eigenlab::stats {

double mean(const std::vector<double>& x);
/// Sample standard deviation (n - 1 denominator).
double sd(const std::vector<double>& x);
double median(std::vector<double> x);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against N(0, 1). The p-value uses the
/// asymptotic Kolmogorov distribution at (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
KsResult ks_normal(std::vector<double> x);

/// Kolmogorov survival function Q(t) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 t^2).
double kolmogorov_q(double t);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares y = slope x + intercept; needs at least 3 points.
LineFit rate_fit(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace eigenlab::stats
