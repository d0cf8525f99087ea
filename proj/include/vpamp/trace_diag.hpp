#pragma once

// Matrix recursions along an AMP trajectory and the normalized-trace
// diagnostic n^{-1} tr(diag(d0) M_s^(t)).
//
//   M_{-1} = 0, M_0 = D^(t), M_s = (M_{s-1} A - M_{s-2} B_{t-s+1}) D^(t-s),   s = 1..t
//   N_{-1} = 0, N_0 = I,     N_u = A D^(t-s+u) N_{u-1} - B_{t-s+u} D^(t-s+u-1) N_{u-2},   u = 1..s
//
// with D^(r) = diag(F'_r(z^(r))) and B_r = diag(b_r). Matrices are dense.

#include "vpamp/amp.hpp"
#include "vpamp/stats.hpp"

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace vpamp {

/// M_0^(t), ..., M_t^(t). Needs z^(0..t) in the trajectory and b_1..b_{t-1}.
std::vector<Matrix> m_recursion(const SampledMatrix& a, const AmpTrajectory& traj,
                                const NonlinearitySchedule& schedule, std::span<const Vector> onsager, int t);

/// N_0^(s), ..., N_s^(s) for horizon t, 0 <= s <= t.
std::vector<Matrix> n_recursion(const SampledMatrix& a, const AmpTrajectory& traj,
                                const NonlinearitySchedule& schedule, std::span<const Vector> onsager, int t, int s);

/// n^{-1} sum_i d0_i M(i, i).
double normalized_trace(const Matrix& m, const Vector& d0);

struct TraceInstance {
    VarianceProfile profile;
    NonlinearitySchedule schedule;
    Vector z0;
};

/// Which b_t drives both the iteration and the B_r factors.
/// Unit sets b_t = 1_n (the Chebyshev case when F is the identity).
enum class TraceOnsager { DataDriven, StateEvolution, Unit };

struct TraceDecayOptions {
    int t = 3;
    std::vector<Index> sizes;
    int seeds = 50;
    std::uint64_t base_seed = 0;
    TraceOnsager onsager = TraceOnsager::StateEvolution;
    unsigned threads = 0; // 0: AMP_THREADS
};

struct TraceCell {
    Index n = 0;
    int s = 0;
    std::string d0; // "v2" (squared first profile row) or "ones"
    SummaryStats trace;     // signed n^{-1} tr, theory 0
    SummaryStats abs_trace; // |n^{-1} tr|
};

struct TraceDiagnosticReport {
    int t = 0;
    std::vector<TraceCell> cells;
    /// Slope over n of max_{s in [t], d0} mean |n^{-1} tr|.
    RateSlope slope;
    /// Per (s, d0) slopes, in the order s = 1..t with "v2" before "ones".
    std::vector<RateSlope> cell_slopes;
    /// Set when t > log(n) / 4 for some n in the list.
    bool horizon_warning = false;
};

TraceDiagnosticReport trace_decay_test(const std::function<TraceInstance(Index)>& make_instance,
                                       const TraceDecayOptions& options);

/// Rows (n, s, d0, mean_abs_trace, stderr, seeds, mean_trace, stderr_trace).
void write_trace_report_csv(const TraceDiagnosticReport& report, const std::filesystem::path& path);

} // namespace vpamp
