#pragma once

// Gauss-Hermite quadrature for expectations under centered Gaussians.

#include "vpamp/core.hpp"

#include <cmath>
#include <vector>

namespace vpamp {

inline constexpr int kDefaultQuadratureOrder = 41;

/// Nodes and weights with sum_i w_i f(x_i) ~= E f(X), X ~ N(0, 1). Exact for
/// polynomials of degree <= 2q - 1.
class GaussHermiteRule {
public:
    /// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
    explicit GaussHermiteRule(int order);

    /// Shared cached rule; thread-safe.
    static const GaussHermiteRule& probabilists(int order = kDefaultQuadratureOrder);

    int order() const noexcept { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

struct BivariateNode {
    double x;
    double y;
    double weight;
};

/// Quadrature nodes for (X, Y) ~ N(0, cov). Full-rank covariances use a
/// Cholesky factor and the tensor rule; if det < 1e-12 * trace^2 the rule is
/// collapsed onto the principal axis, and a zero matrix gives a point mass.
/// Throws DomainError when cov is not PSD up to a relative 1e-10.
std::vector<BivariateNode> bivariate_nodes(const Eigen::Matrix2d& cov, const GaussHermiteRule& rule);

/// E f(X) for X ~ N(0, variance). variance = 0 gives f(0).
template <typename F>
double gaussian_expectation_1d(F&& f, double variance,
                               const GaussHermiteRule& rule = GaussHermiteRule::probabilists()) {
    require_domain(variance >= -1e-12, "negative variance in gaussian_expectation_1d");
    if (variance <= 0.0) return f(0.0);
    const double sd = std::sqrt(variance);
    double acc = 0.0;
    for (int i = 0; i < rule.order(); ++i) acc += rule.weights()[i] * f(sd * rule.nodes()[i]);
    return acc;
}

/// E f(X) g(Y) for (X, Y) ~ N(0, cov).
template <typename F, typename G>
double gaussian_expectation_2d(F&& f, G&& g, const Eigen::Matrix2d& cov,
                               const GaussHermiteRule& rule = GaussHermiteRule::probabilists()) {
    double acc = 0.0;
    for (const auto& p : bivariate_nodes(cov, rule)) acc += p.weight * f(p.x) * g(p.y);
    return acc;
}

} // namespace vpamp
