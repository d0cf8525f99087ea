#pragma once

// Independent numerical oracles for the unit tests. None of these share code
// with the library.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

// Adaptive Simpson on [a, b].
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    return simpson_rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

// E f(sigma X), X ~ N(0, 1), integrated on [-12, 12] in pieces.
inline double normal_expectation(const std::function<double(double)>& f, double sigma) {
    if (sigma == 0.0) return f(0.0);
    const auto integrand = [&](double x) {
        return f(sigma * x) * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    };
    double total = 0.0;
    for (int piece = -12; piece < 12; ++piece) total += adaptive_simpson(integrand, piece, piece + 1.0, 1e-15);
    return total;
}

// Running mean / variance (Welford).
struct Moments {
    long long count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
    double variance() const { return m2 / static_cast<double>(count - 1); }
    double stderr_mean() const { return std::sqrt(variance() / static_cast<double>(count)); }
};

} // namespace oracle
