#include "vpamp/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace vpamp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// two-sided 97.5% t quantiles, dof 1..30
constexpr std::array<double, 30> kT975 = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                          2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                          2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};

} // namespace

bool SummaryStats::flagged() const noexcept { return std::abs(zscore) > 4.0; }

SummaryStats summarize(std::span<const double> values, double theory) {
    require_domain(!values.empty(), "summarize needs at least one value");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    SummaryStats s;
    s.count = static_cast<long long>(v.size());
    s.theory = theory;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(s.count);
    if (s.count < 2) {
        s.stderr_ = kNaN;
        s.zscore = kNaN;
        return s;
    }
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(s.count - 1) / static_cast<double>(s.count));
    const double diff = s.mean - theory;
    if (diff == 0.0)
        s.zscore = 0.0;
    else
        s.zscore = diff / s.stderr_;
    return s;
}

double variance_stderr(double sample_variance, long long count) {
    require_domain(count >= 2, "variance standard error needs two replicates");
    return std::sqrt(2.0 / static_cast<double>(count - 1)) * sample_variance;
}

RateSlope rate_slope(std::span<const double> values, std::span<const double> sizes) {
    require_shape(values.size() == sizes.size(), "rate_slope: values and sizes differ in length");
    require_domain(values.size() >= 2, "rate_slope needs at least two sizes");
    const auto k = static_cast<double>(values.size());
    double mx = 0.0, my = 0.0;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < values.size(); ++i) {
        require_domain(values[i] > 0.0 && sizes[i] > 0.0, "rate_slope needs positive values and sizes");
        x.push_back(std::log(sizes[i]));
        y.push_back(std::log(values[i]));
        mx += x.back();
        my += y.back();
    }
    mx /= k;
    my /= k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require_domain(sxx > 0.0, "rate_slope needs at least two distinct sizes");
    RateSlope r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    const std::size_t dof = x.size() - 2;
    if (dof == 0) {
        r.half_width = kNaN;
    } else {
        double rss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - r.intercept - r.slope * x[i];
            rss += e * e;
        }
        const double se = std::sqrt(rss / static_cast<double>(dof) / sxx);
        r.half_width = (dof <= kT975.size() ? kT975[dof - 1] : 1.96) * se;
    }
    return r;
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic(std::span<const double> samples, double sigma) {
    require_domain(!samples.empty(), "ks_statistic needs samples");
    require_domain(sigma >= 0.0, "ks_statistic needs sigma >= 0");
    std::vector<double> v(samples.begin(), samples.end());
    std::sort(v.begin(), v.end());
    const auto b = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double cdf = sigma > 0.0 ? normal_cdf(v[i] / sigma) : (v[i] >= 0.0 ? 1.0 : 0.0);
        d = std::max({d, static_cast<double>(i + 1) / b - cdf, cdf - static_cast<double>(i) / b});
    }
    if (sigma == 0.0) {
        const bool all_zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
        d = all_zero ? 0.0 : 1.0;
    }
    return d;
}

double ks_threshold(double alpha, long long count) {
    require_domain(alpha > 0.0 && alpha < 1.0 && count > 0, "ks_threshold needs alpha in (0, 1) and count > 0");
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(count));
}

NormalityResult normality_check(std::span<const double> samples, double sigma, double alpha, int tests) {
    require_domain(tests >= 1, "normality_check needs tests >= 1");
    NormalityResult r;
    r.statistic = ks_statistic(samples, sigma);
    r.threshold = ks_threshold(alpha / tests, static_cast<long long>(samples.size()));
    // a point mass is only matched by a point mass, whatever B is
    r.pass = sigma == 0.0 ? r.statistic == 0.0 : r.statistic <= r.threshold;
    return r;
}

} // namespace vpamp
