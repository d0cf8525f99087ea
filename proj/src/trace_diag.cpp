#include "vpamp/trace_diag.hpp"

#include "vpamp/io.hpp"
#include "vpamp/parallel.hpp"
#include "vpamp/rng.hpp"

#include <cmath>
#include <memory>

namespace vpamp {

namespace {

constexpr std::uint64_t kTraceStratum = 0x5452; // "TR"

Vector d_diag(const AmpTrajectory& traj, const NonlinearitySchedule& schedule, int r) {
    return schedule.deriv(r, traj.z[static_cast<std::size_t>(r)]);
}

const Vector& b_vec(std::span<const Vector> onsager, int r) {
    require_domain(r >= 0 && static_cast<std::size_t>(r) < onsager.size(),
                   "onsager vector b_" + std::to_string(r) + " is not available");
    return onsager[static_cast<std::size_t>(r)];
}

void check_inputs(const SampledMatrix& a, const AmpTrajectory& traj, const NonlinearitySchedule& schedule, int t) {
    require_shape(!traj.asymmetric, "matrix recursions need a symmetric trajectory");
    require_shape(a.scale == MatrixScale::SymmetricOneOverN && a.rows() == a.cols(), "matrix must be symmetric");
    require_domain(t >= 0, "t must be nonnegative");
    require_domain(static_cast<std::size_t>(t) < traj.z.size(), "trajectory does not reach z^(t)");
    require_domain(t <= schedule.horizon(), "schedule does not reach F_t");
    require_shape(schedule.dim() == a.rows(), "schedule dimension does not match the matrix");
}

} // namespace

std::vector<Matrix> m_recursion(const SampledMatrix& a, const AmpTrajectory& traj,
                                const NonlinearitySchedule& schedule, std::span<const Vector> onsager, int t) {
    check_inputs(a, traj, schedule, t);
    std::vector<Matrix> m;
    m.reserve(static_cast<std::size_t>(t + 1));
    m.push_back(Matrix(d_diag(traj, schedule, t).asDiagonal()));
    for (int s = 1; s <= t; ++s) {
        Matrix next = m.back() * a.values;
        if (s >= 2) next -= m[static_cast<std::size_t>(s - 2)] * b_vec(onsager, t - s + 1).asDiagonal();
        next = next * d_diag(traj, schedule, t - s).asDiagonal();
        m.push_back(std::move(next));
    }
    return m;
}

std::vector<Matrix> n_recursion(const SampledMatrix& a, const AmpTrajectory& traj,
                                const NonlinearitySchedule& schedule, std::span<const Vector> onsager, int t, int s) {
    check_inputs(a, traj, schedule, t);
    require_domain(s >= 0 && s <= t, "n_recursion needs 0 <= s <= t");
    const Index n = a.rows();
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(s + 1));
    out.push_back(Matrix::Identity(n, n));
    for (int u = 1; u <= s; ++u) {
        const int r = t - s + u;
        Matrix next = a.values * (d_diag(traj, schedule, r).asDiagonal() * out.back());
        if (u >= 2) {
            const Vector scale = b_vec(onsager, r).cwiseProduct(d_diag(traj, schedule, r - 1));
            next -= scale.asDiagonal() * out[static_cast<std::size_t>(u - 2)];
        }
        out.push_back(std::move(next));
    }
    return out;
}

double normalized_trace(const Matrix& m, const Vector& d0) {
    require_shape(m.rows() == m.cols() && d0.size() == m.rows(), "normalized_trace shape mismatch");
    return m.diagonal().dot(d0) / static_cast<double>(m.rows());
}

TraceDiagnosticReport trace_decay_test(const std::function<TraceInstance(Index)>& make_instance,
                                       const TraceDecayOptions& options) {
    const int t = options.t;
    require_domain(t >= 1, "trace_decay_test needs t >= 1");
    require_domain(options.sizes.size() >= 2, "trace_decay_test needs at least two sizes");
    require_domain(options.seeds >= 2, "trace_decay_test needs at least two seeds");
    const unsigned threads = options.threads > 0 ? options.threads : thread_count();

    TraceDiagnosticReport report;
    report.t = t;
    const char* d0_names[2] = {"v2", "ones"};
    // max over (s, d0) of mean |tr| per n, and the per-cell means for the cell slopes
    std::vector<double> worst;
    std::vector<std::vector<double>> cell_means(static_cast<std::size_t>(2 * t));

    for (Index n : options.sizes) {
        if (t > std::log(static_cast<double>(n)) / 4.0) report.horizon_warning = true;
        const TraceInstance inst = make_instance(n);
        require_shape(inst.profile.kind() == ProfileKind::Symmetric && inst.profile.rows() == n,
                      "trace instance profile has the wrong size");
        const Vector d0[2] = {inst.profile.squared().row(0).transpose(), Vector::Ones(n)};

        OnsagerMode mode = onsager::DataDriven{};
        if (options.onsager == TraceOnsager::StateEvolution) {
            mode = onsager::StateEvolution{
                std::make_shared<SePath>(se_symmetric(inst.profile, inst.schedule, inst.z0, t, SeOptions{41, threads}))};
        } else if (options.onsager == TraceOnsager::Unit) {
            onsager::Supplied ones;
            ones.b.assign(static_cast<std::size_t>(t + 1), Vector::Ones(n));
            mode = ones;
        }

        // values[r][2 * (s - 1) + d]
        std::vector<std::vector<double>> values(static_cast<std::size_t>(options.seeds));
        parallel_for(
            values.size(),
            [&](std::size_t r) {
                const auto seed = derive_seed(options.base_seed, {kTraceStratum, static_cast<std::uint64_t>(n), r});
                const SampledMatrix a = sample_symmetric(inst.profile, seed);
                const AmpTrajectory traj = run_symmetric(inst.profile, a, inst.schedule, inst.z0, t + 1, mode);
                const auto m = m_recursion(a, traj, inst.schedule, traj.onsager, t);
                auto& out = values[r];
                for (int s = 1; s <= t; ++s)
                    for (int d = 0; d < 2; ++d) out.push_back(normalized_trace(m[static_cast<std::size_t>(s)], d0[d]));
            },
            threads);

        double w = 0.0;
        for (int s = 1; s <= t; ++s)
            for (int d = 0; d < 2; ++d) {
                const auto col = static_cast<std::size_t>(2 * (s - 1) + d);
                std::vector<double> signed_v, abs_v;
                for (const auto& row : values) {
                    signed_v.push_back(row[col]);
                    abs_v.push_back(std::abs(row[col]));
                }
                TraceCell cell{n, s, d0_names[d], summarize(signed_v, 0.0), summarize(abs_v, 0.0)};
                w = std::max(w, cell.abs_trace.mean);
                cell_means[col].push_back(cell.abs_trace.mean);
                report.cells.push_back(std::move(cell));
            }
        worst.push_back(w);
    }

    std::vector<double> sizes;
    for (Index n : options.sizes) sizes.push_back(static_cast<double>(n));
    report.slope = rate_slope(worst, sizes);
    for (const auto& means : cell_means) report.cell_slopes.push_back(rate_slope(means, sizes));
    return report;
}

void write_trace_report_csv(const TraceDiagnosticReport& report, const std::filesystem::path& path) {
    CsvWriter csv(path, {"n", "s", "d0", "mean_abs_trace", "stderr", "seeds", "mean_trace", "stderr_trace"});
    for (const auto& c : report.cells) {
        csv.field(static_cast<long long>(c.n))
            .field(c.s)
            .field(c.d0)
            .field(c.abs_trace.mean)
            .field(c.abs_trace.stderr_)
            .field(c.abs_trace.count)
            .field(c.trace.mean)
            .field(c.trace.stderr_);
        csv.end_row();
    }
}

} // namespace vpamp
