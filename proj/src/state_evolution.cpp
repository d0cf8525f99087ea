#include "vpamp/state_evolution.hpp"

#include "vpamp/io.hpp"
#include "vpamp/parallel.hpp"
#include "vpamp/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace vpamp {

namespace {

constexpr std::uint64_t kSeStream = 0x5345; // "SE"

// E[f(X^(s1)) g(X^(s2))] where X^(0) = x0 is deterministic and X^(s), s >= 1,
// is centered Gaussian with cov(X^(i), X^(j)) = cov(i - 1, j - 1).
double pair_moment(const Nonlinearity& f, const Nonlinearity& g, int s1, int s2, double x0, const Matrix& cov,
                   const GaussHermiteRule& rule) {
    if (s1 == 0 && s2 == 0) return f.eval(x0) * g.eval(x0);
    if (s1 == 0) return f.eval(x0) * gaussian_expectation_1d([&](double y) { return g.eval(y); }, cov(s2 - 1, s2 - 1), rule);
    if (s2 == 0) return g.eval(x0) * gaussian_expectation_1d([&](double y) { return f.eval(y); }, cov(s1 - 1, s1 - 1), rule);
    if (s1 == s2)
        return gaussian_expectation_1d([&](double y) { return f.eval(y) * g.eval(y); }, cov(s1 - 1, s1 - 1), rule);
    Eigen::Matrix2d c;
    c << cov(s1 - 1, s1 - 1), cov(s1 - 1, s2 - 1), cov(s2 - 1, s1 - 1), cov(s2 - 1, s2 - 1);
    return gaussian_expectation_2d([&](double y) { return f.eval(y); }, [&](double y) { return g.eval(y); }, c, rule);
}

double deriv_moment(const Nonlinearity& f, int s, double x0, const Matrix& cov, const GaussHermiteRule& rule) {
    if (s == 0) return f.deriv(x0);
    if (f.has_constant_derivative()) return f.deriv(0.0);
    return gaussian_expectation_1d([&](double y) { return f.deriv(y); }, cov(s - 1, s - 1), rule);
}

unsigned workers(const SeOptions& options) { return options.threads > 0 ? options.threads : thread_count(); }

double clip_psd(Matrix& m) {
    m = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    const double lo = eig.eigenvalues().minCoeff();
    if (lo >= 0.0) return 0.0;
    const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
    m = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    return -lo;
}

double clip_all(std::vector<Matrix>& blocks) {
    double worst = 0.0;
    for (auto& b : blocks) worst = std::max(worst, clip_psd(b));
    return worst;
}

void check_schedule(const NonlinearitySchedule& s, Index dim, int need, const char* what) {
    require_shape(s.dim() == dim, std::string(what) + " schedule has the wrong dimension");
    if (s.horizon() < need)
        throw DomainError(std::string(what) + " schedule horizon " + std::to_string(s.horizon()) + " is shorter than " +
                          std::to_string(need));
}

} // namespace

const std::vector<Matrix>& SePath::blocks(SeSequence which) const {
    switch (which) {
    case SeSequence::Z:
        require_shape(kind == SeKind::Symmetric, "Z sequence requested from an asymmetric path");
        return sigma;
    case SeSequence::U:
        require_shape(kind == SeKind::Asymmetric, "U sequence requested from a symmetric path");
        return sigma_u;
    case SeSequence::V:
        require_shape(kind == SeKind::Asymmetric, "V sequence requested from a symmetric path");
        return sigma_v;
    }
    throw Error("unknown sequence");
}

double SePath::variance(SeSequence which, int s, Index k) const {
    const auto& b = blocks(which);
    require_domain(s >= 1 && s <= horizon + 1, "variance requested outside the path horizon");
    require_domain(k >= 0 && k < static_cast<Index>(b.size()), "coordinate out of range");
    return b[static_cast<std::size_t>(k)](s - 1, s - 1);
}

SePath se_symmetric(const VarianceProfile& profile, const NonlinearitySchedule& schedule, const Vector& z0, int horizon,
                    const SeOptions& options) {
    require_shape(profile.kind() == ProfileKind::Symmetric, "se_symmetric needs a symmetric profile");
    require_domain(horizon >= 0, "horizon must be nonnegative");
    const Index n = profile.rows();
    require_shape(z0.size() == n, "z0 length does not match the profile");
    check_schedule(schedule, n, horizon, "F");
    const auto& rule = GaussHermiteRule::probabilists(options.quadrature_order);
    const int dim = horizon + 1;

    SePath se;
    se.kind = SeKind::Symmetric;
    se.horizon = horizon;
    se.profile_squared = profile.squared();
    se.normalization = 1.0 / static_cast<double>(n);
    se.init = z0;
    se.quadrature_order = rule.order();
    se.sigma.assign(static_cast<std::size_t>(n), Matrix::Zero(dim, dim));

    Vector moments(n);
    for (int s = 0; s <= horizon; ++s) {
        for (int r = 0; r <= s; ++r) {
            parallel_for(
                static_cast<std::size_t>(n),
                [&](std::size_t i) {
                    const auto l = static_cast<Index>(i);
                    moments[l] = pair_moment(schedule.at(s, l), schedule.at(r, l), s, r, z0[l], se.sigma[i], rule);
                },
                workers(options));
            const Vector row = se.normalization * (se.profile_squared * moments);
            for (Index k = 0; k < n; ++k) {
                se.sigma[static_cast<std::size_t>(k)](s, r) = row[k];
                se.sigma[static_cast<std::size_t>(k)](r, s) = row[k];
            }
        }
    }
    se.max_clip = clip_all(se.sigma);
    return se;
}

SePath se_asymmetric(const VarianceProfile& profile, const NonlinearitySchedule& f_schedule,
                     const NonlinearitySchedule& g_schedule, const Vector& v0, int horizon,
                     const SeOptions& options) {
    require_shape(profile.kind() == ProfileKind::Rectangular, "se_asymmetric needs a rectangular profile");
    require_domain(horizon >= 0, "horizon must be nonnegative");
    const Index m = profile.rows();
    const Index n = profile.cols();
    require_shape(v0.size() == n, "v0 length does not match the profile columns");
    check_schedule(f_schedule, n, horizon, "F");
    check_schedule(g_schedule, m, horizon + 1, "G");
    const auto& rule = GaussHermiteRule::probabilists(options.quadrature_order);
    const int dim = horizon + 1;

    SePath se;
    se.kind = SeKind::Asymmetric;
    se.horizon = horizon;
    se.profile_squared = profile.squared();
    se.normalization = 1.0 / static_cast<double>(m);
    se.init = v0;
    se.quadrature_order = rule.order();
    se.sigma_u.assign(static_cast<std::size_t>(m), Matrix::Zero(dim, dim));
    se.sigma_v.assign(static_cast<std::size_t>(n), Matrix::Zero(dim, dim));

    Vector f_moments(n);
    Vector g_moments(m);
    for (int s = 0; s <= horizon; ++s) {
        // U^(s+1) from F_s(V^(s)), with V^(0) = v0
        for (int r = 0; r <= s; ++r) {
            parallel_for(
                static_cast<std::size_t>(n),
                [&](std::size_t i) {
                    const auto l = static_cast<Index>(i);
                    f_moments[l] =
                        pair_moment(f_schedule.at(s, l), f_schedule.at(r, l), s, r, v0[l], se.sigma_v[i], rule);
                },
                workers(options));
            const Vector row = se.normalization * (se.profile_squared * f_moments);
            for (Index k = 0; k < m; ++k) {
                se.sigma_u[static_cast<std::size_t>(k)](s, r) = row[k];
                se.sigma_u[static_cast<std::size_t>(k)](r, s) = row[k];
            }
        }
        // V^(s+1) from G_{s+1}(U^(s+1))
        for (int r = 0; r <= s; ++r) {
            parallel_for(
                static_cast<std::size_t>(m),
                [&](std::size_t i) {
                    const auto k = static_cast<Index>(i);
                    g_moments[k] = pair_moment(g_schedule.at(s + 1, k), g_schedule.at(r + 1, k), s + 1, r + 1, 0.0,
                                               se.sigma_u[i], rule);
                },
                workers(options));
            const Vector row = se.normalization * (se.profile_squared.transpose() * g_moments);
            for (Index l = 0; l < n; ++l) {
                se.sigma_v[static_cast<std::size_t>(l)](s, r) = row[l];
                se.sigma_v[static_cast<std::size_t>(l)](r, s) = row[l];
            }
        }
    }
    se.max_clip = std::max(clip_all(se.sigma_u), clip_all(se.sigma_v));
    return se;
}

double sigma_star(const SePath& se, int upto) {
    require_domain(upto >= 1 && upto <= se.horizon + 1, "sigma_star horizon outside the path");
    double lo = 1.0;
    auto scan = [&](const std::vector<Matrix>& blocks) {
        for (const auto& b : blocks)
            for (int s = 0; s < upto; ++s) lo = std::min(lo, std::sqrt(std::max(b(s, s), 0.0)));
    };
    if (se.kind == SeKind::Symmetric) {
        scan(se.sigma);
    } else {
        scan(se.sigma_u);
        scan(se.sigma_v);
    }
    return lo;
}

Matrix sample_se_sequence(const SePath& se, Index k, Index count, std::uint64_t seed, SeSequence which) {
    const auto& blocks = se.blocks(which);
    require_domain(k >= 0 && k < static_cast<Index>(blocks.size()), "coordinate out of range");
    require_domain(count >= 0, "negative sample count");
    const Matrix& cov = blocks[static_cast<std::size_t>(k)];
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    const Matrix root = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    const Index dim = cov.rows();
    const CounterRng rng(derive_seed(seed, {static_cast<std::uint64_t>(which), static_cast<std::uint64_t>(k)}),
                         kSeStream);
    Matrix g(count, dim);
    for (Index b = 0; b < count; ++b)
        for (Index j = 0; j < dim; ++j) g(b, j) = rng.normal(static_cast<std::uint64_t>(b * dim + j));
    return g * root.transpose();
}

Vector se_onsager(const SePath& se, const NonlinearitySchedule& schedule, int t) {
    require_shape(se.kind == SeKind::Symmetric, "se_onsager needs a symmetric path");
    require_domain(t >= 0 && t <= se.horizon + 1, "onsager index outside the path");
    const Index n = se.init.size();
    require_shape(schedule.dim() == n, "schedule dimension does not match the path");
    const auto& rule = GaussHermiteRule::probabilists(se.quadrature_order);
    Vector d(n);
    for (Index l = 0; l < n; ++l)
        d[l] = deriv_moment(schedule.at(t, l), t, se.init[l], se.sigma[static_cast<std::size_t>(l)], rule);
    return se.normalization * (se.profile_squared * d);
}

Vector se_onsager_f(const SePath& se, const NonlinearitySchedule& f_schedule, int t) {
    require_shape(se.kind == SeKind::Asymmetric, "se_onsager_f needs an asymmetric path");
    require_domain(t >= 0 && t <= se.horizon + 1, "onsager index outside the path");
    const Index n = se.init.size();
    require_shape(f_schedule.dim() == n, "F schedule dimension does not match the path");
    const auto& rule = GaussHermiteRule::probabilists(se.quadrature_order);
    Vector d(n);
    for (Index l = 0; l < n; ++l)
        d[l] = deriv_moment(f_schedule.at(t, l), t, se.init[l], se.sigma_v[static_cast<std::size_t>(l)], rule);
    return se.normalization * (se.profile_squared * d);
}

Vector se_onsager_g(const SePath& se, const NonlinearitySchedule& g_schedule, int t) {
    require_shape(se.kind == SeKind::Asymmetric, "se_onsager_g needs an asymmetric path");
    require_domain(t >= 1 && t <= se.horizon + 1, "onsager index outside the path");
    const Index m = se.profile_squared.rows();
    require_shape(g_schedule.dim() == m, "G schedule dimension does not match the path");
    const auto& rule = GaussHermiteRule::probabilists(se.quadrature_order);
    Vector d(m);
    for (Index k = 0; k < m; ++k)
        d[k] = deriv_moment(g_schedule.at(t, k), t, 0.0, se.sigma_u[static_cast<std::size_t>(k)], rule);
    return se.normalization * (se.profile_squared.transpose() * d);
}

namespace {

const char* sequence_name(SeSequence s) {
    switch (s) {
    case SeSequence::Z: return "Z";
    case SeSequence::U: return "U";
    case SeSequence::V: return "V";
    }
    return "?";
}

std::vector<SeSequence> sequences(const SePath& se) {
    if (se.kind == SeKind::Symmetric) return {SeSequence::Z};
    return {SeSequence::U, SeSequence::V};
}

} // namespace

void write_se_csv(const SePath& se, const std::filesystem::path& path) {
    CsvWriter csv(path, {"sequence", "k", "s1", "s2", "value"});
    for (auto which : sequences(se)) {
        const auto& blocks = se.blocks(which);
        for (std::size_t k = 0; k < blocks.size(); ++k)
            for (Index i = 0; i < blocks[k].rows(); ++i)
                for (Index j = 0; j < blocks[k].cols(); ++j) {
                    csv.field(sequence_name(which)).field(static_cast<long long>(k));
                    csv.field(static_cast<long long>(i + 1)).field(static_cast<long long>(j + 1));
                    csv.field(blocks[k](i, j));
                    csv.end_row();
                }
    }
}

void write_se_variance_csv(const SePath& se, const std::filesystem::path& path) {
    CsvWriter csv(path, {"sequence", "t", "k", "variance"});
    for (auto which : sequences(se)) {
        const auto& blocks = se.blocks(which);
        for (int t = 1; t <= se.horizon + 1; ++t)
            for (std::size_t k = 0; k < blocks.size(); ++k) {
                csv.field(sequence_name(which)).field(t).field(static_cast<long long>(k));
                csv.field(blocks[k](t - 1, t - 1));
                csv.end_row();
            }
    }
}

} // namespace vpamp
