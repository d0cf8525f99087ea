#pragma once

// Symmetric and asymmetric AMP with selectable Onsager corrections,
// leave-out variants and the asymmetric-to-symmetric embedding.
//
// Symmetric, horizon T:  z^(t+1) = A F_t(z^(t)) - b_t o F_{t-1}(z^(t-1)),
//   t = 0..T-1, with z^(-1) = 0 and F_{-1} = 0.
// Asymmetric, horizon T: u^(t+1) = A F_t(v^(t)) - b^F_t o G_t(u^(t)),
//                        v^(t+1) = A^T G_{t+1}(u^(t+1)) - b^G_{t+1} o F_t(v^(t)),
//   t = 0..T-1, with G_0 = 0. Onsager sums are normalized by m.

#include "vpamp/core.hpp"
#include "vpamp/ensembles.hpp"
#include "vpamp/nonlinearity.hpp"
#include "vpamp/state_evolution.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace vpamp {

namespace onsager {

/// b_hat_t = n^{-1} V o V F'_t(z^(t)), from the current iterate.
struct DataDriven {};

/// b_bar_t from the state-evolution Gaussian sequence.
struct StateEvolution {
    std::shared_ptr<const SePath> path;
};

/// Caller-provided vectors indexed by t. Asymmetric runs use `f` and `g`
/// (g[0] is never read); symmetric runs use `b`.
struct Supplied {
    std::vector<Vector> b;
    std::vector<Vector> f;
    std::vector<Vector> g;
};

/// Monte Carlo approximation of the exact oracle b_t = n^{-1} V o V E[F'_t(z^(t)) | z^(0)]:
/// R fresh matrices sharing z^(0) are iterated jointly and F'_t is averaged over them.
struct MonteCarloOracle {
    int replicates = 200;
    std::uint64_t seed = 0;
};

} // namespace onsager

using OnsagerMode =
    std::variant<onsager::DataDriven, onsager::StateEvolution, onsager::Supplied, onsager::MonteCarloOracle>;

std::string mode_name(const OnsagerMode& mode);

struct AmpTrajectory {
    bool asymmetric = false;
    int horizon = 0;
    std::vector<Vector> z;         // symmetric: z^(0..T)
    std::vector<Vector> u;         // asymmetric: u^(0..T); u^(0) = 0 is a placeholder
    std::vector<Vector> v;         // asymmetric: v^(0..T)
    std::vector<Vector> onsager;   // symmetric: b_t, t in [0, T-1]
    std::vector<Vector> onsager_f; // asymmetric: b^F_t, t in [0, T-1]
    std::vector<Vector> onsager_g; // asymmetric: b^G_t, t in [0, T]; entry 0 unused
    std::string mode;
    std::uint64_t seed = 0;
    std::vector<Index> left_out;
    double lipschitz = 0.0;
    double bound = 0.0;
};

AmpTrajectory run_symmetric(const VarianceProfile& profile, const SampledMatrix& a, const NonlinearitySchedule& schedule,
                            const Vector& z0, int horizon, const OnsagerMode& mode);

AmpTrajectory run_asymmetric(const VarianceProfile& profile, const SampledMatrix& a,
                             const NonlinearitySchedule& f_schedule, const NonlinearitySchedule& g_schedule,
                             const Vector& v0, int horizon, const OnsagerMode& mode);

/// Leave-P-out run: A with rows and columns in P zeroed, same z^(0), and the
/// reference run's Onsager vectors reused verbatim.
AmpTrajectory run_leave_out(const AmpTrajectory& reference, const VarianceProfile& profile, const SampledMatrix& a,
                            const NonlinearitySchedule& schedule, std::span<const Index> left_out);

/// Asymmetric leave-out: RowOnly drops samples k in [m], ColumnOnly drops
/// predictors l in [n].
AmpTrajectory run_leave_out_asymmetric(const AmpTrajectory& reference, const VarianceProfile& profile,
                                       const SampledMatrix& a, const NonlinearitySchedule& f_schedule,
                                       const NonlinearitySchedule& g_schedule, std::span<const Index> left_out,
                                       LeaveOutMode mode);

struct LooError {
    Vector per_coordinate;
    double max = 0.0;
};

/// |z^(t+1)_k - <A_k, F_t(z^(t)_[-k])>| for every k, given leave_out[k] from
/// run_leave_out with P = {k}.
LooError loo_representation_error(const AmpTrajectory& full, const SampledMatrix& a,
                                  const NonlinearitySchedule& schedule, const std::vector<AmpTrajectory>& leave_out,
                                  int t);

/// Same quantity for all k at once, without materializing n masked matrices:
/// the n leave-one-out iterates are advanced together as columns of an n x n
/// matrix. Needs full.horizon >= t + 1.
LooError loo_representation_error_batched(const AmpTrajectory& full, const SampledMatrix& a,
                                          const NonlinearitySchedule& schedule, int t);

struct OnsagerGapReport {
    /// Entry t is the sup-norm gap between z^(t) of two runs, t in [0, T].
    std::vector<double> data_driven_vs_se;
    std::vector<double> data_driven_vs_mc; // empty when the MC oracle is skipped
    std::vector<double> se_vs_mc;
    double max_data_driven_vs_se() const;
};

/// Runs the same matrix under the DataDriven, StateEvolution and (when
/// mc_replicates > 0) MonteCarloOracle corrections.
OnsagerGapReport compare_onsager_modes(const VarianceProfile& profile, const SampledMatrix& a,
                                       const NonlinearitySchedule& schedule, const Vector& z0, int horizon,
                                       std::shared_ptr<const SePath> se, int mc_replicates = 0,
                                       std::uint64_t mc_seed = 0);

/// Symmetric problem of size m + n equivalent to an asymmetric one.
struct AsymEmbedding {
    Index m = 0;
    Index n = 0;
    int asym_horizon = 0;
    VarianceProfile profile;        // sqrt(1/phi + 1) [[0, V], [V^T, 0]]
    SampledMatrix matrix;           // [[0, A], [A^T, 0]] from the same draw
    NonlinearitySchedule schedule;  // F_bar_{2t} = (0, F_t), F_bar_{2t-1} = (G_t, 0)
    Vector z0;                      // (0_m, v0)

    /// z^(2t-1) = (u^(t), 0) and z^(2t) = (0, v^(t)); horizon 2T.
    int sym_horizon() const noexcept { return 2 * asym_horizon; }
    /// Onsager vectors for the embedded run: (b^F_t, 0) at s = 2t, (0, b^G_{t+1}) at s = 2t + 1.
    std::vector<Vector> embed_onsager(const std::vector<Vector>& f, const std::vector<Vector>& g) const;
    /// Reads (u, v) back out of an embedded trajectory.
    AmpTrajectory project(const AmpTrajectory& sym) const;
};

AsymEmbedding asym_to_sym_embed(const VarianceProfile& profile, const SampledMatrix& a,
                                const NonlinearitySchedule& f_schedule, const NonlinearitySchedule& g_schedule,
                                const Vector& v0, int horizon);

/// Rows (sequence, t, coordinate, value).
void write_trajectory_csv(const AmpTrajectory& traj, const std::filesystem::path& path);
/// JSON with seed, mode, horizon, Lipschitz constant, profile bound, left-out set.
void write_trajectory_sidecar(const AmpTrajectory& traj, const std::filesystem::path& path);

} // namespace vpamp
