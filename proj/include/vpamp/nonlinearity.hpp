#pragma once

// Separable nonlinearities F_{t,l} with analytic first derivatives.
//
// Only named parametric families are supported so that every run can be
// written down in a config file. To add a family, define a struct with
// `double eval(double) const`, `double deriv(double) const`,
// `double lipschitz() const` and `static constexpr const char* name`, then
// append it to `Nonlinearity::Family`.

#include "vpamp/core.hpp"

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace vpamp {

struct Identity {
    static constexpr const char* name = "identity";
    bool operator==(const Identity&) const = default;
    double eval(double z) const noexcept { return z; }
    double deriv(double) const noexcept { return 1.0; }
    double lipschitz() const noexcept { return 1.0; }
};

/// z -> slope * z + intercept
struct Affine {
    static constexpr const char* name = "affine";
    bool operator==(const Affine&) const = default;
    double slope = 1.0;
    double intercept = 0.0;
    double eval(double z) const noexcept { return slope * z + intercept; }
    double deriv(double) const noexcept { return slope; }
    double lipschitz() const noexcept;
};

/// z -> alpha * tanh(beta * z)
struct ScaledTanh {
    static constexpr const char* name = "scaled_tanh";
    bool operator==(const ScaledTanh&) const = default;
    double alpha = 1.0;
    double beta = 1.0;
    double eval(double z) const noexcept;
    double deriv(double z) const noexcept;
    double lipschitz() const noexcept;
};

/// Soft thresholding at `threshold` with the hinge replaced by a C^2 ramp of
/// half-width `smoothing`. Requires 0 < smoothing <= threshold; slope in [0, 1].
struct SmoothSoftThreshold {
    static constexpr const char* name = "smooth_soft_threshold";
    bool operator==(const SmoothSoftThreshold&) const = default;
    double threshold = 1.0;
    double smoothing = 0.05;
    double eval(double z) const noexcept;
    double deriv(double z) const noexcept;
    double lipschitz() const noexcept { return 1.0; }
};

/// Shifted ridge proximal map v -> (center - v) / (1 + lambda * tau) - center.
struct RidgeProxAffine {
    static constexpr const char* name = "ridge_prox_affine";
    bool operator==(const RidgeProxAffine&) const = default;
    double lambda = 1.0;
    double tau = 1.0;
    double center = 0.0;
    double eval(double v) const noexcept { return (center - v) / (1.0 + lambda * tau) - center; }
    double deriv(double) const noexcept { return -1.0 / (1.0 + lambda * tau); }
    double lipschitz() const noexcept { return 1.0 / (1.0 + lambda * tau); }
};

class Nonlinearity {
public:
    using Family = std::variant<Identity, Affine, ScaledTanh, SmoothSoftThreshold, RidgeProxAffine>;

    Nonlinearity() : family_(Identity{}) {}
    /// Validates the family parameters.
    Nonlinearity(Family family);

    static Nonlinearity zero() { return Nonlinearity(Affine{0.0, 0.0}); }

    double eval(double z) const;
    double deriv(double z) const;
    /// Upper bound on |deriv| over the real line.
    double lipschitz() const;
    std::string name() const;
    /// True for the affine families, whose derivative does not depend on z.
    bool has_constant_derivative() const noexcept;
    const Family& family() const noexcept { return family_; }

    bool operator==(const Nonlinearity&) const = default;

private:
    Family family_;
};

/// True iff max over the grid of |deriv| is <= claim.
bool check_lipschitz(const Nonlinearity& f, double claim, std::span<const double> grid);

/// 20001 equally spaced points on [-10, 10].
std::vector<double> standard_grid();

/// Table (t, l) -> F_{t,l} for t in [0:horizon], l in [0:dim). A layer is
/// either one family broadcast over all coordinates or one family per
/// coordinate. Queries at t = -1 return the zero function.
class NonlinearitySchedule {
public:
    NonlinearitySchedule(int horizon, Index dim, Nonlinearity broadcast = Nonlinearity());

    static NonlinearitySchedule broadcast(Nonlinearity f, int horizon, Index dim) {
        return NonlinearitySchedule(horizon, dim, std::move(f));
    }

    void set(int t, Nonlinearity f);
    void set(int t, std::vector<Nonlinearity> per_coordinate);
    void set(int t, Index coordinate, Nonlinearity f);

    int horizon() const noexcept { return horizon_; }
    Index dim() const noexcept { return dim_; }

    const Nonlinearity& at(int t, Index coordinate) const;
    /// Componentwise F_t(z).
    Vector eval(int t, const Vector& z) const;
    /// Componentwise F'_t(z).
    Vector deriv(int t, const Vector& z) const;
    /// Global Lipschitz constant: the max over all table entries.
    double lipschitz() const;

private:
    struct Layer {
        Nonlinearity shared;
        std::vector<Nonlinearity> per_coordinate; // empty when broadcast
    };
    void check_t(int t) const;
    void check_len(const Vector& z) const;

    int horizon_;
    Index dim_;
    std::vector<Layer> layers_;
};

} // namespace vpamp
