#pragma once

// High-dimensional state evolution: one covariance block per coordinate.
//
// Indexing: a path of horizon T stores, for each coordinate, the
// (T+1) x (T+1) covariance of (Z^(1), ..., Z^(T+1)); entry (i, j) is
// cov(Z^(i+1), Z^(j+1)). Z^(0) = z^(0) is deterministic.

#include "vpamp/core.hpp"
#include "vpamp/ensembles.hpp"
#include "vpamp/nonlinearity.hpp"
#include "vpamp/quadrature.hpp"

#include <filesystem>
#include <vector>

namespace vpamp {

enum class SeKind { Symmetric, Asymmetric };

/// Which Gaussian sequence of a path: Z (symmetric), U (length m) or V (length n).
enum class SeSequence { Z, U, V };

struct SeOptions {
    int quadrature_order = kDefaultQuadratureOrder;
    unsigned threads = 0; // 0: thread_count()
};

struct SePath {
    SeKind kind = SeKind::Symmetric;
    int horizon = 0;
    /// Symmetric: V o V, normalized by n. Asymmetric: V o V, normalized by m.
    Matrix profile_squared;
    double normalization = 1.0;
    /// z^(0) (symmetric) or v^(0) (asymmetric).
    Vector init;
    std::vector<Matrix> sigma;   // Symmetric: n blocks
    std::vector<Matrix> sigma_u; // Asymmetric: m blocks over U^(1..T+1)
    std::vector<Matrix> sigma_v; // Asymmetric: n blocks over V^(1..T+1)
    /// Largest |negative eigenvalue| removed by PSD clipping.
    double max_clip = 0.0;
    int quadrature_order = kDefaultQuadratureOrder;

    const std::vector<Matrix>& blocks(SeSequence which) const;
    /// var(X^(s)_k) for s in [1, horizon + 1].
    double variance(SeSequence which, int s, Index k) const;
};

SePath se_symmetric(const VarianceProfile& profile, const NonlinearitySchedule& schedule, const Vector& z0, int horizon,
                    const SeOptions& options = {});

/// F acts on the V side (length n), G on the U side (length m). Needs
/// F defined on [0, T] and G on [0, T + 1]; G_0 is never read.
SePath se_asymmetric(const VarianceProfile& profile, const NonlinearitySchedule& f_schedule,
                     const NonlinearitySchedule& g_schedule, const Vector& v0, int horizon,
                     const SeOptions& options = {});

/// 1 wedge min over s in [1, upto] and all coordinates (both sequences when
/// asymmetric) of the standard deviation.
double sigma_star(const SePath& se, int upto);

/// B x (T+1) draws of (X^(1)_k, ..., X^(T+1)_k) from the clipped covariance.
Matrix sample_se_sequence(const SePath& se, Index k, Index count, std::uint64_t seed,
                          SeSequence which = SeSequence::Z);

/// Symmetric: n^{-1} sum_l V_kl^2 E F'_{t,l}(Z^(t)_l), t in [0, T + 1].
Vector se_onsager(const SePath& se, const NonlinearitySchedule& schedule, int t);

/// Asymmetric, F side: m^{-1} sum_l V_kl^2 E F'_{t,l}(V^(t)_l), length m.
Vector se_onsager_f(const SePath& se, const NonlinearitySchedule& f_schedule, int t);

/// Asymmetric, G side: m^{-1} sum_k V_kl^2 E G'_{t,k}(U^(t)_k), t >= 1, length n.
Vector se_onsager_g(const SePath& se, const NonlinearitySchedule& g_schedule, int t);

/// Rows (sequence, k, s1, s2, value) with s1, s2 the 1-based iteration labels.
void write_se_csv(const SePath& se, const std::filesystem::path& path);
/// Rows (sequence, t, k, variance) for t in [1, T + 1].
void write_se_variance_csv(const SePath& se, const std::filesystem::path& path);

} // namespace vpamp
