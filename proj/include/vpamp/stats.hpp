#pragma once

// Summary statistics shared by the Monte Carlo harness and the diagnostics.

#include "vpamp/core.hpp"

#include <span>
#include <vector>

namespace vpamp {

/// Mean and standard error of a replicate sample against a theory value.
/// With a single replicate the standard error and z-score are NaN.
struct SummaryStats {
    double mean = 0.0;
    double stderr_ = 0.0;
    long long count = 0;
    double theory = 0.0;
    double zscore = 0.0;

    /// |z| > 4.
    bool flagged() const noexcept;
};

/// Order-independent: the sample is sorted before summation.
SummaryStats summarize(std::span<const double> values, double theory = 0.0);

/// Standard error of a sample variance under normality, sqrt(2 / (B - 1)) * s^2.
double variance_stderr(double sample_variance, long long count);

struct RateSlope {
    double slope = 0.0;
    double intercept = 0.0;
    /// 95% half-width from the t distribution; NaN with two sizes.
    double half_width = 0.0;
};

/// Least-squares slope of log(value) against log(n).
RateSlope rate_slope(std::span<const double> values, std::span<const double> sizes);

double normal_cdf(double x) noexcept;

/// Two-sided Kolmogorov-Smirnov distance between the sample and N(0, sigma^2).
/// sigma = 0 compares against the point mass at 0.
double ks_statistic(std::span<const double> samples, double sigma);

/// Asymptotic KS critical value c(alpha) / sqrt(B), c(alpha) = sqrt(-ln(alpha / 2) / 2).
double ks_threshold(double alpha, long long count);

struct NormalityResult {
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

/// KS test at level alpha / tests (Bonferroni over `tests` coordinates).
NormalityResult normality_check(std::span<const double> samples, double sigma, double alpha = 0.01, int tests = 1);

} // namespace vpamp
