#include "vpamp/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace vpamp {

GaussHermiteRule::GaussHermiteRule(int order) {
    require_domain(order >= 1, "quadrature order must be positive");
    const Index q = order;
    // Three-term recurrence He_{k+1} = x He_k - k He_{k-1}.
    Matrix jacobi = Matrix::Zero(q, q);
    for (Index k = 1; k < q; ++k) {
        jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
        jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
    if (eig.info() != Eigen::Success) throw Error("Golub-Welsch eigen decomposition failed");
    nodes_.resize(static_cast<std::size_t>(q));
    weights_.resize(static_cast<std::size_t>(q));
    for (Index i = 0; i < q; ++i) {
        // Newton polish on the orthonormal recurrence, then Christoffel weights
        double x = eig.eigenvalues()[i];
        double christoffel = 0.0;
        for (int pass = 0; pass < 3; ++pass) {
            double prev = 0.0;
            double cur = 1.0;
            christoffel = 1.0;
            for (Index k = 0; k + 1 < q; ++k) {
                const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(static_cast<double>(k + 1));
                prev = cur;
                cur = next;
                christoffel += cur * cur;
            }
            // cur = p_{q-1}; p_q = (x p_{q-1} - sqrt(q-1) p_{q-2}) / sqrt(q), p_q' = sqrt(q) p_{q-1}
            const double pq = (x * cur - std::sqrt(static_cast<double>(q - 1)) * prev) / std::sqrt(static_cast<double>(q));
            const double dpq = std::sqrt(static_cast<double>(q)) * cur;
            if (dpq == 0.0) break;
            x -= pq / dpq;
        }
        nodes_[static_cast<std::size_t>(i)] = x;
        weights_[static_cast<std::size_t>(i)] = 1.0 / christoffel;
    }
    // symmetrize to kill rounding asymmetry between +x and -x
    for (Index i = 0; i < q / 2; ++i) {
        const auto a = static_cast<std::size_t>(i);
        const auto b = static_cast<std::size_t>(q - 1 - i);
        const double x = 0.5 * (nodes_[b] - nodes_[a]);
        const double w = 0.5 * (weights_[a] + weights_[b]);
        nodes_[a] = -x;
        nodes_[b] = x;
        weights_[a] = weights_[b] = w;
    }
    if (q % 2 == 1) nodes_[static_cast<std::size_t>(q / 2)] = 0.0;
    double total = 0.0;
    for (double w : weights_) total += w;
    for (double& w : weights_) w /= total;
}

const GaussHermiteRule& GaussHermiteRule::probabilists(int order) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot) slot = std::make_unique<GaussHermiteRule>(order);
    return *slot;
}

std::vector<BivariateNode> bivariate_nodes(const Eigen::Matrix2d& cov, const GaussHermiteRule& rule) {
    const double a = cov(0, 0);
    const double b = cov(1, 1);
    const double c = 0.5 * (cov(0, 1) + cov(1, 0));
    const double trace = a + b;
    const double scale = std::max(1.0, std::abs(trace));
    require_domain(std::isfinite(a) && std::isfinite(b) && std::isfinite(c), "non-finite covariance");
    require_domain(a >= -1e-10 * scale && b >= -1e-10 * scale, "covariance has a negative variance");
    const double det = a * b - c * c;
    require_domain(det >= -1e-10 * scale * scale, "covariance is not positive semidefinite");

    const auto& x = rule.nodes();
    const auto& w = rule.weights();
    const auto q = static_cast<std::size_t>(rule.order());
    std::vector<BivariateNode> out;

    if (trace <= 0.0) {
        out.push_back({0.0, 0.0, 1.0});
        return out;
    }
    if (det < 1e-12 * trace * trace) {
        // principal eigenpair of [[a, c], [c, b]]
        const double half_gap = std::sqrt(0.25 * (a - b) * (a - b) + c * c);
        const double lambda = 0.5 * trace + half_gap;
        double ex = 0.0;
        double ey = 0.0;
        if (std::abs(c) > 0.0) {
            ex = lambda - b;
            ey = c;
        } else if (a >= b) {
            ex = 1.0;
        } else {
            ey = 1.0;
        }
        const double norm = std::hypot(ex, ey);
        const double sd = std::sqrt(std::max(lambda, 0.0));
        out.reserve(q);
        for (std::size_t i = 0; i < q; ++i) out.push_back({sd * ex / norm * x[i], sd * ey / norm * x[i], w[i]});
        return out;
    }
    const double l11 = std::sqrt(a);
    const double l21 = c / l11;
    const double l22 = std::sqrt(std::max(b - l21 * l21, 0.0));
    out.reserve(q * q);
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < q; ++j)
            out.push_back({l11 * x[i], l21 * x[i] + l22 * x[j], w[i] * w[j]});
    return out;
}

} // namespace vpamp
