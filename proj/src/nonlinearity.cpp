#include "vpamp/nonlinearity.hpp"

#include <algorithm>
#include <cmath>

namespace vpamp {

namespace {

// Derivative of the smoothed hinge h: a C^1 smoothstep from 0 to 1 on [-d, d].
double hinge_slope(double x, double d) noexcept {
    if (x <= -d) return 0.0;
    if (x >= d) return 1.0;
    const double s = (x + d) / (2.0 * d);
    return s * s * (3.0 - 2.0 * s);
}

// h(x) = integral of hinge_slope; equals x for x >= d and 0 for x <= -d.
double hinge(double x, double d) noexcept {
    if (x <= -d) return 0.0;
    if (x >= d) return x;
    const double s = (x + d) / (2.0 * d);
    return 2.0 * d * s * s * s * (1.0 - 0.5 * s);
}

} // namespace

double Affine::lipschitz() const noexcept { return std::abs(slope); }

double ScaledTanh::eval(double z) const noexcept { return alpha * std::tanh(beta * z); }

double ScaledTanh::deriv(double z) const noexcept {
    const double c = std::cosh(beta * z);
    if (!std::isfinite(c)) return 0.0;
    return alpha * beta / (c * c);
}

double ScaledTanh::lipschitz() const noexcept { return std::abs(alpha * beta); }

double SmoothSoftThreshold::eval(double z) const noexcept {
    return hinge(z - threshold, smoothing) - hinge(-z - threshold, smoothing);
}

double SmoothSoftThreshold::deriv(double z) const noexcept {
    return hinge_slope(z - threshold, smoothing) + hinge_slope(-z - threshold, smoothing);
}

Nonlinearity::Nonlinearity(Family family) : family_(std::move(family)) {
    std::visit(
        [](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Affine>) {
                require_domain(std::isfinite(f.slope) && std::isfinite(f.intercept), "affine parameters must be finite");
            } else if constexpr (std::is_same_v<T, ScaledTanh>) {
                require_domain(std::isfinite(f.alpha) && std::isfinite(f.beta), "scaled_tanh parameters must be finite");
            } else if constexpr (std::is_same_v<T, SmoothSoftThreshold>) {
                require_domain(f.smoothing > 0.0 && f.smoothing <= f.threshold && std::isfinite(f.threshold),
                               "smooth_soft_threshold needs 0 < smoothing <= threshold");
            } else if constexpr (std::is_same_v<T, RidgeProxAffine>) {
                require_domain(f.lambda > 0.0 && f.tau > 0.0 && std::isfinite(f.center),
                               "ridge_prox_affine needs lambda > 0 and tau > 0");
            }
        },
        family_);
}

double Nonlinearity::eval(double z) const {
    return std::visit([z](const auto& f) { return f.eval(z); }, family_);
}

double Nonlinearity::deriv(double z) const {
    return std::visit([z](const auto& f) { return f.deriv(z); }, family_);
}

double Nonlinearity::lipschitz() const {
    return std::visit([](const auto& f) { return f.lipschitz(); }, family_);
}

std::string Nonlinearity::name() const {
    return std::visit([](const auto& f) { return std::string(std::decay_t<decltype(f)>::name); }, family_);
}

bool Nonlinearity::has_constant_derivative() const noexcept {
    return std::holds_alternative<Identity>(family_) || std::holds_alternative<Affine>(family_) ||
           std::holds_alternative<RidgeProxAffine>(family_);
}

bool check_lipschitz(const Nonlinearity& f, double claim, std::span<const double> grid) {
    double worst = 0.0;
    for (double z : grid) worst = std::max(worst, std::abs(f.deriv(z)));
    return worst <= claim;
}

std::vector<double> standard_grid() {
    constexpr int points = 20001;
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = -10.0 + 20.0 * i / (points - 1);
    return grid;
}

NonlinearitySchedule::NonlinearitySchedule(int horizon, Index dim, Nonlinearity broadcast)
    : horizon_(horizon), dim_(dim) {
    require_domain(horizon >= 0, "schedule horizon must be nonnegative");
    require_domain(dim > 0, "schedule dimension must be positive");
    layers_.assign(static_cast<std::size_t>(horizon + 1), Layer{std::move(broadcast), {}});
}

void NonlinearitySchedule::check_t(int t) const {
    if (t < 0 || t > horizon_)
        throw DomainError("schedule queried at t=" + std::to_string(t) + " outside [0, " + std::to_string(horizon_) +
                          "]");
}

void NonlinearitySchedule::check_len(const Vector& z) const {
    require_shape(z.size() == dim_, "vector length " + std::to_string(z.size()) + " does not match schedule dimension " +
                                        std::to_string(dim_));
}

void NonlinearitySchedule::set(int t, Nonlinearity f) {
    check_t(t);
    layers_[static_cast<std::size_t>(t)] = Layer{std::move(f), {}};
}

void NonlinearitySchedule::set(int t, std::vector<Nonlinearity> per_coordinate) {
    check_t(t);
    require_shape(static_cast<Index>(per_coordinate.size()) == dim_, "per-coordinate layer has the wrong length");
    layers_[static_cast<std::size_t>(t)] = Layer{Nonlinearity(), std::move(per_coordinate)};
}

void NonlinearitySchedule::set(int t, Index coordinate, Nonlinearity f) {
    check_t(t);
    require_domain(coordinate >= 0 && coordinate < dim_, "schedule coordinate out of range");
    auto& layer = layers_[static_cast<std::size_t>(t)];
    if (layer.per_coordinate.empty()) layer.per_coordinate.assign(static_cast<std::size_t>(dim_), layer.shared);
    layer.per_coordinate[static_cast<std::size_t>(coordinate)] = std::move(f);
}

const Nonlinearity& NonlinearitySchedule::at(int t, Index coordinate) const {
    static const Nonlinearity zero = Nonlinearity::zero();
    if (t == -1) return zero;
    check_t(t);
    require_domain(coordinate >= 0 && coordinate < dim_, "schedule coordinate out of range");
    const auto& layer = layers_[static_cast<std::size_t>(t)];
    return layer.per_coordinate.empty() ? layer.shared : layer.per_coordinate[static_cast<std::size_t>(coordinate)];
}

Vector NonlinearitySchedule::eval(int t, const Vector& z) const {
    check_len(z);
    if (t == -1) return Vector::Zero(dim_);
    check_t(t);
    const auto& layer = layers_[static_cast<std::size_t>(t)];
    Vector out(dim_);
    if (layer.per_coordinate.empty()) {
        std::visit([&](const auto& f) {
            for (Index l = 0; l < dim_; ++l) out[l] = f.eval(z[l]);
        }, layer.shared.family());
    } else {
        for (Index l = 0; l < dim_; ++l) out[l] = layer.per_coordinate[static_cast<std::size_t>(l)].eval(z[l]);
    }
    return out;
}

Vector NonlinearitySchedule::deriv(int t, const Vector& z) const {
    check_len(z);
    if (t == -1) return Vector::Zero(dim_);
    check_t(t);
    const auto& layer = layers_[static_cast<std::size_t>(t)];
    Vector out(dim_);
    if (layer.per_coordinate.empty()) {
        std::visit([&](const auto& f) {
            for (Index l = 0; l < dim_; ++l) out[l] = f.deriv(z[l]);
        }, layer.shared.family());
    } else {
        for (Index l = 0; l < dim_; ++l) out[l] = layer.per_coordinate[static_cast<std::size_t>(l)].deriv(z[l]);
    }
    return out;
}

double NonlinearitySchedule::lipschitz() const {
    double worst = 0.0;
    for (const auto& layer : layers_) {
        if (layer.per_coordinate.empty()) {
            worst = std::max(worst, layer.shared.lipschitz());
        } else {
            for (const auto& f : layer.per_coordinate) worst = std::max(worst, f.lipschitz());
        }
    }
    return worst;
}

} // namespace vpamp
