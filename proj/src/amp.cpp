#include "vpamp/amp.hpp"

#include "vpamp/io.hpp"
#include "vpamp/parallel.hpp"
#include "vpamp/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace vpamp {

namespace {

// Cache fresh oracle matrices only while they fit in this many doubles.
constexpr double kOracleCacheLimit = 3.2e7;

double inv(Index d) { return 1.0 / static_cast<double>(d); }

void check_horizon(const NonlinearitySchedule& s, int need, const char* what) {
    if (need >= 0 && s.horizon() < need)
        throw DomainError(std::string(what) + " schedule horizon " + std::to_string(s.horizon()) +
                          " does not cover t = " + std::to_string(need));
}

const Vector& supplied_at(const std::vector<Vector>& list, int t, Index len, const char* what) {
    if (t < 0 || t >= static_cast<int>(list.size()))
        throw DomainError(std::string("supplied ") + what + " Onsager vector missing for t = " + std::to_string(t));
    const Vector& b = list[static_cast<std::size_t>(t)];
    require_shape(b.size() == len, std::string("supplied ") + what + " Onsager vector has the wrong length");
    return b;
}

const SePath& se_path(const onsager::StateEvolution& m, SeKind kind) {
    if (!m.path) throw DomainError("StateEvolution mode needs a SePath");
    require_shape(m.path->kind == kind, "SePath kind does not match the AMP run");
    return *m.path;
}

// Fresh symmetric draws sharing z^(0), iterated in lockstep.
class SymmetricOracle {
public:
    SymmetricOracle(const VarianceProfile& profile, const onsager::MonteCarloOracle& cfg, const Vector& z0)
        : profile_(profile), seed_(cfg.seed), count_(cfg.replicates) {
        require_domain(count_ >= 1, "MonteCarloOracle needs at least one replicate");
        const auto r = static_cast<std::size_t>(count_);
        cur_.assign(r, z0);
        prev_.assign(r, Vector::Zero(z0.size()));
        const double n = static_cast<double>(profile.rows());
        if (n * n * count_ <= kOracleCacheLimit) {
            cache_.resize(r);
            parallel_for(r, [&](std::size_t i) { cache_[i] = draw(i); });
        }
    }

    Vector onsager(const NonlinearitySchedule& s, int t) const {
        const Index n = profile_.rows();
        Vector mean = Vector::Zero(n);
        for (const auto& z : cur_) mean += s.deriv(t, z);
        mean /= static_cast<double>(count_);
        return inv(n) * (profile_.squared() * mean);
    }

    void advance(const NonlinearitySchedule& s, int t, const Vector& b) {
        parallel_for(cur_.size(), [&](std::size_t i) {
            const Matrix a = cache_.empty() ? draw(i) : Matrix();
            const Matrix& ar = cache_.empty() ? a : cache_[i];
            Vector next = ar * s.eval(t, cur_[i]) - b.cwiseProduct(s.eval(t - 1, prev_[i]));
            prev_[i] = std::move(cur_[i]);
            cur_[i] = std::move(next);
        });
    }

private:
    Matrix draw(std::size_t i) const {
        return sample_symmetric(profile_, derive_seed(seed_, {0x4F52, static_cast<std::uint64_t>(i)})).values;
    }

    const VarianceProfile& profile_;
    std::uint64_t seed_;
    int count_;
    std::vector<Vector> cur_, prev_;
    std::vector<Matrix> cache_;
};

class AsymmetricOracle {
public:
    AsymmetricOracle(const VarianceProfile& profile, const onsager::MonteCarloOracle& cfg, const Vector& v0)
        : profile_(profile), seed_(cfg.seed), count_(cfg.replicates) {
        require_domain(count_ >= 1, "MonteCarloOracle needs at least one replicate");
        const auto r = static_cast<std::size_t>(count_);
        u_.assign(r, Vector::Zero(profile.rows()));
        v_.assign(r, v0);
        const double cells = static_cast<double>(profile.rows()) * static_cast<double>(profile.cols());
        if (cells * count_ <= kOracleCacheLimit) {
            cache_.resize(r);
            parallel_for(r, [&](std::size_t i) { cache_[i] = draw(i); });
        }
    }

    Vector onsager_f(const NonlinearitySchedule& f, int t) const {
        Vector mean = Vector::Zero(profile_.cols());
        for (const auto& v : v_) mean += f.deriv(t, v);
        mean /= static_cast<double>(count_);
        return inv(profile_.rows()) * (profile_.squared() * mean);
    }

    Vector onsager_g(const NonlinearitySchedule& g, int t) const {
        Vector mean = Vector::Zero(profile_.rows());
        for (const auto& u : u_) mean += g.deriv(t, u);
        mean /= static_cast<double>(count_);
        return inv(profile_.rows()) * (profile_.squared().transpose() * mean);
    }

    // u^(t+1) for every chain
    void advance_u(const NonlinearitySchedule& f, const NonlinearitySchedule& g, int t, const Vector& bf) {
        fv_prev_.resize(u_.size());
        parallel_for(u_.size(), [&](std::size_t i) {
            const Matrix a = cache_.empty() ? draw(i) : Matrix();
            const Matrix& ar = cache_.empty() ? a : cache_[i];
            const Vector gu = t >= 1 ? g.eval(t, u_[i]) : Vector::Zero(profile_.rows());
            fv_prev_[i] = f.eval(t, v_[i]);
            u_[i] = ar * fv_prev_[i] - bf.cwiseProduct(gu);
        });
    }

    // v^(t+1) for every chain, after advance_u
    void advance_v(const NonlinearitySchedule& g, int t, const Vector& bg) {
        parallel_for(v_.size(), [&](std::size_t i) {
            const Matrix a = cache_.empty() ? draw(i) : Matrix();
            const Matrix& ar = cache_.empty() ? a : cache_[i];
            v_[i] = ar.transpose() * g.eval(t + 1, u_[i]) - bg.cwiseProduct(fv_prev_[i]);
        });
    }

private:
    Matrix draw(std::size_t i) const {
        return sample_rectangular(profile_, derive_seed(seed_, {0x4F52, static_cast<std::uint64_t>(i)})).values;
    }

    const VarianceProfile& profile_;
    std::uint64_t seed_;
    int count_;
    std::vector<Vector> u_, v_;
    std::vector<Vector> fv_prev_;
    std::vector<Matrix> cache_;
};

} // namespace

std::string mode_name(const OnsagerMode& mode) {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, onsager::DataDriven>) return "data_driven";
            else if constexpr (std::is_same_v<T, onsager::StateEvolution>) return "state_evolution";
            else if constexpr (std::is_same_v<T, onsager::Supplied>) return "supplied";
            else return "mc_oracle";
        },
        mode);
}

AmpTrajectory run_symmetric(const VarianceProfile& profile, const SampledMatrix& a, const NonlinearitySchedule& schedule,
                            const Vector& z0, int horizon, const OnsagerMode& mode) {
    const Index n = profile.rows();
    require_shape(profile.kind() == ProfileKind::Symmetric, "run_symmetric needs a symmetric profile");
    require_shape(a.scale == MatrixScale::SymmetricOneOverN && a.rows() == n && a.cols() == n,
                  "matrix does not match the symmetric profile");
    require_shape(z0.size() == n, "z0 has the wrong length");
    require_shape(schedule.dim() == n, "schedule dimension does not match the matrix");
    require_domain(horizon >= 0, "horizon must be nonnegative");
    check_horizon(schedule, horizon - 1, "F");

    AmpTrajectory traj;
    traj.horizon = horizon;
    traj.mode = mode_name(mode);
    traj.seed = a.seed;
    traj.lipschitz = schedule.lipschitz();
    traj.bound = profile.bound();
    traj.z.reserve(static_cast<std::size_t>(horizon + 1));
    traj.z.push_back(z0);

    const SePath* se = nullptr;
    if (const auto* m = std::get_if<onsager::StateEvolution>(&mode)) {
        se = &se_path(*m, SeKind::Symmetric);
        require_shape(se->init.size() == n, "SePath dimension does not match the run");
        if (se->horizon + 1 < horizon - 1) throw DomainError("SePath horizon is too short for this run");
    }
    std::unique_ptr<SymmetricOracle> oracle;
    if (const auto* m = std::get_if<onsager::MonteCarloOracle>(&mode))
        oracle = std::make_unique<SymmetricOracle>(profile, *m, z0);

    Vector f_prev = Vector::Zero(n);
    for (int t = 0; t < horizon; ++t) {
        const Vector& zt = traj.z.back();
        Vector b;
        if (std::holds_alternative<onsager::DataDriven>(mode)) {
            b = inv(n) * (profile.squared() * schedule.deriv(t, zt));
        } else if (se) {
            b = se_onsager(*se, schedule, t);
        } else if (const auto* m = std::get_if<onsager::Supplied>(&mode)) {
            b = supplied_at(m->b, t, n, "symmetric");
        } else {
            b = oracle->onsager(schedule, t);
            oracle->advance(schedule, t, b);
        }
        const Vector ft = schedule.eval(t, zt);
        traj.z.push_back(a.values * ft - b.cwiseProduct(f_prev));
        traj.onsager.push_back(std::move(b));
        f_prev = ft;
    }
    return traj;
}

AmpTrajectory run_asymmetric(const VarianceProfile& profile, const SampledMatrix& a,
                             const NonlinearitySchedule& f_schedule, const NonlinearitySchedule& g_schedule,
                             const Vector& v0, int horizon, const OnsagerMode& mode) {
    require_shape(profile.kind() == ProfileKind::Rectangular, "run_asymmetric needs a rectangular profile");
    const Index m = profile.rows();
    const Index n = profile.cols();
    require_shape(a.scale == MatrixScale::RectangularOneOverM && a.rows() == m && a.cols() == n,
                  "matrix does not match the rectangular profile");
    require_shape(v0.size() == n, "v0 has the wrong length");
    require_shape(f_schedule.dim() == n, "F schedule must have dimension n");
    require_shape(g_schedule.dim() == m, "G schedule must have dimension m");
    require_domain(horizon >= 0, "horizon must be nonnegative");
    check_horizon(f_schedule, horizon - 1, "F");
    check_horizon(g_schedule, horizon, "G");

    AmpTrajectory traj;
    traj.asymmetric = true;
    traj.horizon = horizon;
    traj.mode = mode_name(mode);
    traj.seed = a.seed;
    traj.lipschitz = std::max(f_schedule.lipschitz(), g_schedule.lipschitz());
    traj.bound = profile.bound();
    traj.u.push_back(Vector::Zero(m));
    traj.v.push_back(v0);
    traj.onsager_g.push_back(Vector::Zero(n));

    const SePath* se = nullptr;
    if (const auto* md = std::get_if<onsager::StateEvolution>(&mode)) {
        se = &se_path(*md, SeKind::Asymmetric);
        require_shape(se->init.size() == n && se->profile_squared.rows() == m, "SePath dimension does not match the run");
        if (se->horizon + 1 < horizon) throw DomainError("SePath horizon is too short for this run");
    }
    std::unique_ptr<AsymmetricOracle> oracle;
    if (const auto* md = std::get_if<onsager::MonteCarloOracle>(&mode))
        oracle = std::make_unique<AsymmetricOracle>(profile, *md, v0);
    const auto* supplied = std::get_if<onsager::Supplied>(&mode);
    const double scale = inv(m);

    for (int t = 0; t < horizon; ++t) {
        const Vector& vt = traj.v.back();
        const Vector& ut = traj.u.back();
        Vector bf;
        if (std::holds_alternative<onsager::DataDriven>(mode)) bf = scale * (profile.squared() * f_schedule.deriv(t, vt));
        else if (se) bf = se_onsager_f(*se, f_schedule, t);
        else if (supplied) bf = supplied_at(supplied->f, t, m, "F");
        else {
            bf = oracle->onsager_f(f_schedule, t);
            oracle->advance_u(f_schedule, g_schedule, t, bf);
        }
        const Vector fv = f_schedule.eval(t, vt);
        const Vector gu = t >= 1 ? g_schedule.eval(t, ut) : Vector::Zero(m);
        Vector u_next = a.values * fv - bf.cwiseProduct(gu);
        const Vector g_next = g_schedule.eval(t + 1, u_next);

        Vector bg;
        if (std::holds_alternative<onsager::DataDriven>(mode))
            bg = scale * (profile.squared().transpose() * g_schedule.deriv(t + 1, u_next));
        else if (se) bg = se_onsager_g(*se, g_schedule, t + 1);
        else if (supplied) bg = supplied_at(supplied->g, t + 1, n, "G");
        else {
            bg = oracle->onsager_g(g_schedule, t + 1);
            oracle->advance_v(g_schedule, t, bg);
        }
        Vector v_next = a.values.transpose() * g_next - bg.cwiseProduct(fv);
        traj.u.push_back(std::move(u_next));
        traj.v.push_back(std::move(v_next));
        traj.onsager_f.push_back(std::move(bf));
        traj.onsager_g.push_back(std::move(bg));
    }
    return traj;
}

AmpTrajectory run_leave_out(const AmpTrajectory& reference, const VarianceProfile& profile, const SampledMatrix& a,
                            const NonlinearitySchedule& schedule, std::span<const Index> left_out) {
    require_domain(!left_out.empty(), "leave-out set must be nonempty");
    require_shape(!reference.asymmetric && !reference.z.empty(), "reference must be a symmetric trajectory");
    require_shape(reference.seed == a.seed, "reference trajectory was run on a different matrix");
    const SampledMatrix masked = mask_leave_out(a, left_out, LeaveOutMode::RowAndColumn);
    onsager::Supplied reuse;
    reuse.b = reference.onsager;
    AmpTrajectory out = run_symmetric(profile, masked, schedule, reference.z.front(), reference.horizon, reuse);
    out.mode = "leave_out:" + reference.mode;
    out.left_out.assign(left_out.begin(), left_out.end());
    return out;
}

AmpTrajectory run_leave_out_asymmetric(const AmpTrajectory& reference, const VarianceProfile& profile,
                                       const SampledMatrix& a, const NonlinearitySchedule& f_schedule,
                                       const NonlinearitySchedule& g_schedule, std::span<const Index> left_out,
                                       LeaveOutMode mode) {
    require_domain(!left_out.empty(), "leave-out set must be nonempty");
    require_shape(reference.asymmetric && !reference.v.empty(), "reference must be an asymmetric trajectory");
    require_shape(reference.seed == a.seed, "reference trajectory was run on a different matrix");
    require_domain(mode != LeaveOutMode::RowAndColumn, "asymmetric leave-out is by row or by column");
    const SampledMatrix masked = mask_leave_out(a, left_out, mode);
    onsager::Supplied reuse;
    reuse.f = reference.onsager_f;
    reuse.g = reference.onsager_g;
    AmpTrajectory out =
        run_asymmetric(profile, masked, f_schedule, g_schedule, reference.v.front(), reference.horizon, reuse);
    out.mode = std::string(mode == LeaveOutMode::RowOnly ? "leave_row_out:" : "leave_column_out:") + reference.mode;
    out.left_out.assign(left_out.begin(), left_out.end());
    return out;
}

LooError loo_representation_error(const AmpTrajectory& full, const SampledMatrix& a,
                                  const NonlinearitySchedule& schedule, const std::vector<AmpTrajectory>& leave_out,
                                  int t) {
    const Index n = a.rows();
    require_shape(!full.asymmetric, "loo_representation_error needs a symmetric trajectory");
    require_domain(t >= 0 && t + 1 <= full.horizon, "t + 1 exceeds the reference horizon");
    require_shape(static_cast<Index>(leave_out.size()) == n, "need one leave-out trajectory per coordinate");
    LooError err;
    err.per_coordinate.resize(n);
    for (Index k = 0; k < n; ++k) {
        const auto& lo = leave_out[static_cast<std::size_t>(k)];
        if (lo.left_out.size() != 1 || lo.left_out.front() != k || lo.seed != full.seed || lo.horizon < t ||
            lo.onsager.size() < static_cast<std::size_t>(t) || lo.z.front() != full.z.front())
            throw ShapeError("leave-out trajectory " + std::to_string(k) + " is inconsistent with the reference");
        for (int s = 0; s < t; ++s)
            if (lo.onsager[static_cast<std::size_t>(s)] != full.onsager[static_cast<std::size_t>(s)])
                throw ShapeError("leave-out trajectory " + std::to_string(k) + " used different Onsager vectors");
        const double inner = a.values.row(k).dot(schedule.eval(t, lo.z[static_cast<std::size_t>(t)]));
        err.per_coordinate[k] = std::abs(full.z[static_cast<std::size_t>(t + 1)][k] - inner);
    }
    err.max = n > 0 ? err.per_coordinate.maxCoeff() : 0.0;
    return err;
}

namespace {

Matrix eval_columns(const NonlinearitySchedule& s, int t, const Matrix& z) {
    Matrix out(z.rows(), z.cols());
    if (t < 0) return Matrix::Zero(z.rows(), z.cols());
    for (Index l = 0; l < z.rows(); ++l) {
        const Nonlinearity& f = s.at(t, l);
        std::visit(
            [&](const auto& fam) {
                for (Index k = 0; k < z.cols(); ++k) out(l, k) = fam.eval(z(l, k));
            },
            f.family());
    }
    return out;
}

} // namespace

LooError loo_representation_error_batched(const AmpTrajectory& full, const SampledMatrix& a,
                                          const NonlinearitySchedule& schedule, int t) {
    const Index n = a.rows();
    require_shape(!full.asymmetric && a.cols() == n, "batched leave-one-out needs a symmetric run");
    require_domain(t >= 0 && t + 1 <= full.horizon, "t + 1 exceeds the reference horizon");
    // column k holds z^(s)_[-k]
    Matrix cur = full.z.front().replicate(1, n);
    Matrix f_prev = Matrix::Zero(n, n);
    for (int s = 0; s < t; ++s) {
        Matrix f = eval_columns(schedule, s, cur);
        Matrix masked = f;
        masked.diagonal().setZero();
        Matrix next = a.values * masked;
        next.diagonal().setZero();
        next -= full.onsager[static_cast<std::size_t>(s)].asDiagonal() * f_prev;
        f_prev = std::move(f);
        cur = std::move(next);
    }
    LooError err;
    // at t = 0 every column is F_0(z^(0)); the matrix-vector product reproduces z^(1) bit for bit
    const Vector inner = t == 0 ? Vector(a.values * schedule.eval(0, full.z.front()))
                                : Vector(a.values.cwiseProduct(eval_columns(schedule, t, cur)).colwise().sum().transpose());
    err.per_coordinate = (full.z[static_cast<std::size_t>(t + 1)] - inner).cwiseAbs();
    err.max = err.per_coordinate.maxCoeff();
    return err;
}

double OnsagerGapReport::max_data_driven_vs_se() const {
    double worst = 0.0;
    for (double g : data_driven_vs_se) worst = std::max(worst, g);
    return worst;
}

OnsagerGapReport compare_onsager_modes(const VarianceProfile& profile, const SampledMatrix& a,
                                       const NonlinearitySchedule& schedule, const Vector& z0, int horizon,
                                       std::shared_ptr<const SePath> se, int mc_replicates, std::uint64_t mc_seed) {
    if (!se) throw DomainError("compare_onsager_modes needs a SePath");
    const auto dd = run_symmetric(profile, a, schedule, z0, horizon, onsager::DataDriven{});
    const auto sv = run_symmetric(profile, a, schedule, z0, horizon, onsager::StateEvolution{se});
    auto gaps = [&](const AmpTrajectory& x, const AmpTrajectory& y) {
        std::vector<double> out;
        for (int t = 0; t <= horizon; ++t)
            out.push_back((x.z[static_cast<std::size_t>(t)] - y.z[static_cast<std::size_t>(t)]).cwiseAbs().maxCoeff());
        return out;
    };
    OnsagerGapReport report;
    report.data_driven_vs_se = gaps(dd, sv);
    if (mc_replicates > 0) {
        const auto mc =
            run_symmetric(profile, a, schedule, z0, horizon, onsager::MonteCarloOracle{mc_replicates, mc_seed});
        report.data_driven_vs_mc = gaps(dd, mc);
        report.se_vs_mc = gaps(sv, mc);
    }
    return report;
}

std::vector<Vector> AsymEmbedding::embed_onsager(const std::vector<Vector>& f, const std::vector<Vector>& g) const {
    std::vector<Vector> out;
    for (int s = 0; s < sym_horizon(); ++s) {
        Vector b = Vector::Zero(m + n);
        const int t = s / 2;
        if (s % 2 == 0) b.head(m) = supplied_at(f, t, m, "F");
        else b.tail(n) = supplied_at(g, t + 1, n, "G");
        out.push_back(std::move(b));
    }
    return out;
}

AmpTrajectory AsymEmbedding::project(const AmpTrajectory& sym) const {
    require_shape(!sym.asymmetric && sym.horizon == sym_horizon(), "trajectory is not an embedded run");
    AmpTrajectory out;
    out.asymmetric = true;
    out.horizon = asym_horizon;
    out.mode = sym.mode;
    out.seed = sym.seed;
    out.lipschitz = sym.lipschitz;
    out.bound = sym.bound;
    out.u.push_back(Vector::Zero(m));
    out.v.push_back(sym.z.front().tail(n));
    out.onsager_g.push_back(Vector::Zero(n));
    for (int t = 1; t <= asym_horizon; ++t) {
        out.u.push_back(sym.z[static_cast<std::size_t>(2 * t - 1)].head(m));
        out.v.push_back(sym.z[static_cast<std::size_t>(2 * t)].tail(n));
        out.onsager_f.push_back(sym.onsager[static_cast<std::size_t>(2 * t - 2)].head(m));
        out.onsager_g.push_back(sym.onsager[static_cast<std::size_t>(2 * t - 1)].tail(n));
    }
    return out;
}

AsymEmbedding asym_to_sym_embed(const VarianceProfile& profile, const SampledMatrix& a,
                                const NonlinearitySchedule& f_schedule, const NonlinearitySchedule& g_schedule,
                                const Vector& v0, int horizon) {
    require_shape(profile.kind() == ProfileKind::Rectangular, "embedding needs a rectangular profile");
    const Index m = profile.rows();
    const Index n = profile.cols();
    require_shape(a.rows() == m && a.cols() == n && a.scale == MatrixScale::RectangularOneOverM,
                  "matrix does not match the profile");
    require_shape(v0.size() == n && f_schedule.dim() == n && g_schedule.dim() == m, "schedule or v0 dimension mismatch");
    require_domain(horizon >= 0, "horizon must be nonnegative");
    const Index big = m + n;
    const double c = std::sqrt(static_cast<double>(n) / static_cast<double>(m) + 1.0);

    Matrix vbar = Matrix::Zero(big, big);
    vbar.topRightCorner(m, n) = c * profile.entries();
    vbar.bottomLeftCorner(n, m) = c * profile.entries().transpose();
    Matrix abar = Matrix::Zero(big, big);
    abar.topRightCorner(m, n) = a.values;
    abar.bottomLeftCorner(n, m) = a.values.transpose();

    const int sched_horizon = std::min(2 * f_schedule.horizon() + 1, 2 * g_schedule.horizon());
    NonlinearitySchedule schedule(sched_horizon, big);
    const Nonlinearity zero = Nonlinearity::zero();
    for (int s = 0; s <= sched_horizon; ++s) {
        std::vector<Nonlinearity> layer(static_cast<std::size_t>(big), zero);
        if (s % 2 == 0) {
            for (Index l = 0; l < n; ++l) layer[static_cast<std::size_t>(m + l)] = f_schedule.at(s / 2, l);
        } else {
            for (Index k = 0; k < m; ++k) layer[static_cast<std::size_t>(k)] = g_schedule.at((s + 1) / 2, k);
        }
        schedule.set(s, std::move(layer));
    }
    Vector z0 = Vector::Zero(big);
    z0.tail(n) = v0;
    return AsymEmbedding{m,
                         n,
                         horizon,
                         VarianceProfile(ProfileKind::Symmetric, std::move(vbar)),
                         SampledMatrix{std::move(abar), MatrixScale::SymmetricOneOverN, a.seed},
                         std::move(schedule),
                         std::move(z0)};
}

void write_trajectory_csv(const AmpTrajectory& traj, const std::filesystem::path& path) {
    CsvWriter csv(path, {"sequence", "t", "coordinate", "value"});
    auto dump = [&](const char* name, const std::vector<Vector>& seq, int first) {
        for (std::size_t t = static_cast<std::size_t>(first); t < seq.size(); ++t)
            for (Index k = 0; k < seq[t].size(); ++k) {
                csv.field(name).field(static_cast<long long>(t)).field(static_cast<long long>(k)).field(seq[t][k]);
                csv.end_row();
            }
    };
    if (traj.asymmetric) {
        dump("u", traj.u, 1);
        dump("v", traj.v, 0);
    } else {
        dump("z", traj.z, 0);
    }
}

void write_trajectory_sidecar(const AmpTrajectory& traj, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["kind"] = traj.asymmetric ? "asymmetric" : "symmetric";
    j["seed"] = traj.seed;
    j["mode"] = traj.mode;
    j["horizon"] = traj.horizon;
    j["lipschitz"] = traj.lipschitz;
    j["profile_bound"] = traj.bound;
    j["left_out"] = traj.left_out;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace vpamp
