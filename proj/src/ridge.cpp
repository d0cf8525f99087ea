#include "vpamp/ridge.hpp"

#include "vpamp/io.hpp"
#include "vpamp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vpamp {

RidgeProblem::RidgeProblem(VarianceProfile profile, double lambda, Vector mu0, Vector xi)
    : profile_(std::move(profile)), lambda_(lambda), mu0_(std::move(mu0)), xi_(std::move(xi)) {
    require_shape(profile_.kind() == ProfileKind::Rectangular, "ridge needs a rectangular profile");
    require_domain(profile_.has_positive_row_and_column_norms(), "ridge needs positive row and column norms of V");
    require_domain(lambda_ > 0.0 && std::isfinite(lambda_), "ridge needs lambda > 0");
    require_shape(mu0_.size() == profile_.cols(), "mu0 must have length n");
    require_shape(xi_.size() == profile_.rows(), "xi must have length m");
    w_ = profile_.squared() / static_cast<double>(profile_.rows());
}

RidgeProblem RidgeProblem::with_lambda(double lambda) const { return RidgeProblem(profile_, lambda, mu0_, xi_); }

double dR_metric(double x, double y) {
    require_domain(x > 0.0 && y > 0.0, "dR_metric needs positive arguments");
    return (x - y) * (x - y) / (x * y);
}

double dR_metric(const Vector& x, const Vector& y) {
    require_shape(x.size() == y.size() && x.size() > 0, "dR_metric needs vectors of equal positive length");
    double worst = 0.0;
    for (Index i = 0; i < x.size(); ++i) worst = std::max(worst, dR_metric(x[i], y[i]));
    return worst;
}

Vector phi_map(const Vector& u, const RidgeProblem& problem) {
    require_shape(u.size() == problem.m(), "phi_map: u must have length m");
    require_domain((u.array() > 0.0).all(), "phi_map needs u > 0 componentwise");
    const Vector inner = (Vector::Ones(problem.n()) + problem.w().transpose() * u).cwiseInverse();
    return (Vector::Constant(problem.m(), problem.lambda()) + problem.w() * inner).cwiseInverse();
}

std::pair<double, double> phi_admissible_box(const RidgeProblem& problem) {
    const double eta = std::min(problem.lambda(), 1.0 / problem.lambda());
    const double row_max = problem.w().rowwise().sum().maxCoeff();
    return {eta / (1.0 + eta * row_max), 1.0 / eta};
}

double phi_contraction_bound(const RidgeProblem& problem) {
    const double upper = phi_admissible_box(problem).second;
    const double norm_max = std::max(problem.w().rowwise().sum().maxCoeff(), problem.w().colwise().sum().maxCoeff());
    return std::pow(1.0 + (1.0 / upper) / norm_max, -4.0);
}

namespace {

Vector tau_of(const RidgeProblem& problem, const Vector& b) {
    return (problem.w().transpose() * (Vector::Ones(problem.m()) - b)).cwiseInverse();
}

double second_equation_residual(const RidgeProblem& problem, const Vector& b, const Vector& tau) {
    const double lam = problem.lambda();
    const Vector lhs = b.array() / (1.0 - b.array());
    const Vector rhs = problem.w() * (tau.array() / (1.0 + lam * tau.array())).matrix();
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

} // namespace

RidgeFixedPoint solve_b(const RidgeProblem& problem, const SolveOptions& options) {
    require_domain(options.tol > 0.0 && options.max_iter > 0, "solve_b needs tol > 0 and max_iter > 0");
    require_domain(options.damping >= 0.0 && options.damping < 1.0, "damping must lie in [0, 1)");
    const double lam = problem.lambda();
    Vector u = (Vector::Constant(problem.m(), lam) + problem.w().rowwise().sum()).cwiseInverse();
    RidgeFixedPoint fp;
    fp.lambda = lam;
    double gap = 0.0;
    int it = 0;
    for (; it < options.max_iter; ++it) {
        Vector next = phi_map(u, problem);
        if (options.damping > 0.0) next = (1.0 - options.damping) * next + options.damping * u;
        gap = (next - u).cwiseAbs().maxCoeff();
        fp.b_gap_log.push_back(gap);
        u = std::move(next);
        if (gap <= options.tol) break;
    }
    if (gap > options.tol)
        throw ConvergenceError("solve_b did not converge in " + std::to_string(options.max_iter) + " iterations", gap);
    fp.b_iterations = it + 1;
    fp.b_gap = gap;
    fp.b = Vector::Ones(problem.m()) - lam * u;
    fp.tau = tau_of(problem, fp.b);
    fp.residual_b = second_equation_residual(problem, fp.b, fp.tau);
    return fp;
}

Vector ridge_q(const RidgeProblem& problem, const Vector& b, const Vector& tau) {
    const double lam = problem.lambda();
    const Vector shrink = (lam * tau.array() / (1.0 + lam * tau.array())).square().matrix();
    const Vector inner = problem.xi().cwiseAbs2() + problem.w() * shrink.cwiseProduct(problem.mu0().cwiseAbs2());
    const Vector one_minus_b2 = (1.0 - b.array()).square().matrix();
    return tau.cwiseAbs2().cwiseProduct(problem.w().transpose() * one_minus_b2.cwiseProduct(inner));
}

Vector psi_map(const Vector& zeta, const Vector& b, const Vector& tau, const RidgeProblem& problem) {
    require_shape(zeta.size() == problem.n() && b.size() == problem.m() && tau.size() == problem.n(),
                  "psi_map shape mismatch");
    const double lam = problem.lambda();
    const Vector q = ridge_q(problem, b, tau);
    const Vector weight = (tau.array() / (1.0 + lam * tau.array()).square()).matrix();
    const Vector one_minus_b2 = (1.0 - b.array()).square().matrix();
    const Vector back = problem.w().transpose() * one_minus_b2.cwiseProduct(problem.w() * weight.cwiseProduct(zeta));
    return q.cwiseQuotient(tau) + tau.cwiseProduct(back);
}

std::pair<double, double> fixed_point_residuals(const RidgeProblem& problem, const Vector& b, const Vector& gamma) {
    const double lam = problem.lambda();
    const Vector tau = tau_of(problem, b);
    const Vector g2 = gamma.cwiseAbs2();
    const Vector one_minus_b2 = (1.0 - b.array()).square().matrix();
    const Vector damp = (1.0 + lam * tau.array()).square().inverse().matrix();
    const Vector rhs = ridge_q(problem, b, tau) +
                       tau.cwiseAbs2().cwiseProduct(problem.w().transpose() *
                                                    one_minus_b2.cwiseProduct(problem.w() * damp.cwiseProduct(g2)));
    return {(g2 - rhs).cwiseAbs().maxCoeff(), second_equation_residual(problem, b, tau)};
}

void solve_gamma(const RidgeProblem& problem, RidgeFixedPoint& fp, const SolveOptions& options) {
    require_shape(fp.b.size() == problem.m() && fp.tau.size() == problem.n(), "solve_gamma needs b and tau from solve_b");
    Vector zeta = Vector::Zero(problem.n());
    double gap = 0.0;
    int it = 0;
    for (; it < options.max_iter; ++it) {
        Vector next = psi_map(zeta, fp.b, fp.tau, problem);
        gap = (next - zeta).cwiseAbs().maxCoeff();
        zeta = std::move(next);
        if (gap <= options.tol) break;
    }
    if (gap > options.tol)
        throw ConvergenceError("solve_gamma did not converge in " + std::to_string(options.max_iter) + " iterations",
                               gap);
    fp.gamma_iterations = it + 1;
    fp.gamma_gap = gap;
    fp.zeta = zeta;
    fp.gamma = fp.tau.cwiseProduct(zeta).cwiseSqrt();
    fp.residual_gamma = fixed_point_residuals(problem, fp.b, fp.gamma).first;
}

RidgeFixedPoint solve_fixed_point(const RidgeProblem& problem, const SolveOptions& options) {
    RidgeFixedPoint fp = solve_b(problem, options);
    solve_gamma(problem, fp, options);
    return fp;
}

Vector ridge_closed_form(const Matrix& a, const Vector& y, double lambda) {
    require_domain(lambda > 0.0, "ridge_closed_form needs lambda > 0");
    require_shape(y.size() == a.rows(), "ridge_closed_form: Y must have one entry per row of A");
    if (a.cols() <= a.rows()) {
        Matrix gram = a.transpose() * a;
        gram.diagonal().array() += lambda;
        return gram.llt().solve(a.transpose() * y);
    }
    Matrix gram = a * a.transpose();
    gram.diagonal().array() += lambda;
    return a.transpose() * gram.llt().solve(y);
}

RidgeAmpTrajectory amp_ridge_run(const RidgeProblem& problem, const RidgeFixedPoint& fp, const Matrix& a, int horizon) {
    require_shape(a.rows() == problem.m() && a.cols() == problem.n(), "design does not match the problem");
    require_shape(fp.b.size() == problem.m() && fp.tau.size() == problem.n(), "fixed point does not match the problem");
    require_domain(horizon >= 0, "horizon must be nonnegative");
    const double lam = problem.lambda();
    const Vector sb = (1.0 - fp.b.array()).sqrt().matrix();
    const Vector st = fp.tau.cwiseSqrt();
    const Matrix ab = sb.asDiagonal() * a * st.asDiagonal();
    const Vector xib = sb.cwiseProduct(problem.xi());
    const Vector theta0 = problem.mu0().cwiseQuotient(st);
    const Vector shrink = (1.0 + lam * fp.tau.array()).inverse().matrix();

    RidgeAmpTrajectory out;
    out.r.push_back(Vector::Zero(problem.m()));
    out.theta.push_back(theta0);
    for (int t = 0; t < horizon; ++t) {
        const Vector& th = out.theta.back();
        Vector r = ab * (theta0 - th) + xib + fp.b.cwiseProduct(out.r.back());
        Vector next = shrink.cwiseProduct(th + ab.transpose() * r);
        out.r.push_back(std::move(r));
        out.theta.push_back(std::move(next));
    }
    for (const auto& r : out.r) out.big_r.push_back(sb.cwiseProduct(r));
    for (const auto& th : out.theta) out.mu.push_back(st.cwiseProduct(th));
    return out;
}

RidgeAsymForm ridge_asym_form(const RidgeProblem& problem, const RidgeFixedPoint& fp, const Matrix& a, int horizon) {
    require_shape(a.rows() == problem.m() && a.cols() == problem.n(), "design does not match the problem");
    require_domain(horizon >= 1, "horizon must be at least 1");
    const double lam = problem.lambda();
    const Index m = problem.m();
    const Index n = problem.n();
    const Vector sb = (1.0 - fp.b.array()).sqrt().matrix();
    const Vector st = fp.tau.cwiseSqrt();
    const Vector theta0 = problem.mu0().cwiseQuotient(st);
    const Vector xib = sb.cwiseProduct(problem.xi());

    NonlinearitySchedule f(horizon, n);
    NonlinearitySchedule g(horizon, m);
    f.set(0, Nonlinearity::zero());
    g.set(0, Nonlinearity::zero());
    std::vector<Nonlinearity> f_layer, g_layer;
    for (Index l = 0; l < n; ++l) f_layer.emplace_back(RidgeProxAffine{lam, fp.tau[l], theta0[l]});
    for (Index k = 0; k < m; ++k) g_layer.emplace_back(Affine{1.0, -xib[k]});
    for (int t = 1; t <= horizon; ++t) {
        f.set(t, f_layer);
        g.set(t, g_layer);
    }
    Matrix vb = sb.asDiagonal() * problem.profile().entries() * st.asDiagonal();
    Matrix ab = sb.asDiagonal() * a * st.asDiagonal();
    return RidgeAsymForm{VarianceProfile(ProfileKind::Rectangular, std::move(vb)),
                         SampledMatrix{std::move(ab), MatrixScale::RectangularOneOverM, 0},
                         std::move(f),
                         std::move(g),
                         Vector::Zero(n),
                         xib,
                         theta0};
}

Moments seq_moments(const RidgeFixedPoint& fp, const Vector& mu0, Index j) {
    require_domain(j >= 0 && j < fp.tau.size() && j < mu0.size(), "seq_moments coordinate out of range");
    require_shape(fp.gamma.size() == fp.tau.size(), "seq_moments needs gamma from solve_gamma");
    const double shrink = 1.0 + fp.lambda * fp.tau[j];
    return {mu0[j] / shrink, (fp.gamma[j] / shrink) * (fp.gamma[j] / shrink)};
}

std::vector<Moments> residual_moments(const RidgeFixedPoint& fp, const RidgeProblem& problem) {
    require_shape(fp.gamma.size() == problem.n() && fp.b.size() == problem.m(), "residual_moments shape mismatch");
    const double lam = problem.lambda();
    const Vector& tau = fp.tau;
    const Vector inner = (tau.array() / (1.0 + lam * tau.array()).square() *
                          (lam * lam * tau.array() * problem.mu0().array().square() + fp.gamma.array().square() / tau.array()))
                             .matrix();
    const Vector var = (1.0 - fp.b.array()).square().matrix().cwiseProduct(problem.w() * inner);
    std::vector<Moments> out;
    for (Index i = 0; i < problem.m(); ++i) out.push_back({(1.0 - fp.b[i]) * problem.xi()[i], var[i]});
    return out;
}

double theory_l2_error(const RidgeFixedPoint& fp, const Vector& mu0) {
    require_shape(mu0.size() == fp.tau.size() && fp.gamma.size() == fp.tau.size(), "theory_l2_error shape mismatch");
    const auto shrink = 1.0 + fp.lambda * fp.tau.array();
    const auto bias = fp.lambda * fp.tau.array() * mu0.array() / shrink;
    const auto sd = fp.gamma.array() / shrink;
    return (bias.square() + sd.square()).mean();
}

void write_fixed_point_csv(const RidgeFixedPoint& fp, const std::filesystem::path& path) {
    CsvWriter csv(path, {"coordinate", "b", "tau", "gamma", "zeta"});
    const Index rows = std::max(fp.b.size(), fp.tau.size());
    auto cell = [&](const Vector& v, Index i) {
        if (i < v.size())
            csv.field(v[i]);
        else
            csv.field(std::string_view{});
    };
    for (Index i = 0; i < rows; ++i) {
        csv.field(static_cast<long long>(i));
        cell(fp.b, i);
        cell(fp.tau, i);
        cell(fp.gamma, i);
        cell(fp.zeta, i);
        csv.end_row();
    }
}

ContractionCertificate certify_contraction(const RidgeProblem& problem, const RidgeFixedPoint& fp, int pairs,
                                           std::uint64_t seed) {
    require_domain(pairs >= 1, "certify_contraction needs at least one pair");
    ContractionCertificate c;
    c.pairs = pairs;
    c.phi_bound = phi_contraction_bound(problem);
    c.max_b = fp.b.maxCoeff();
    const auto [lo, hi] = phi_admissible_box(problem);
    const double zmax = 2.0 * std::max(1.0, fp.zeta.size() > 0 ? fp.zeta.maxCoeff() : 1.0);
    SequentialRng rng(seed, 0x4354);
    const Index m = problem.m(), n = problem.n();
    for (int i = 0; i < pairs; ++i) {
        Vector u(m), w(m);
        for (Index k = 0; k < m; ++k) {
            u[k] = lo * std::pow(hi / lo, rng.uniform());
            w[k] = lo * std::pow(hi / lo, rng.uniform());
        }
        c.phi_max_ratio =
            std::max(c.phi_max_ratio, dR_metric(phi_map(u, problem), phi_map(w, problem)) / dR_metric(u, w));
        Vector z1(n), z2(n);
        for (Index l = 0; l < n; ++l) {
            z1[l] = zmax * rng.uniform();
            z2[l] = zmax * rng.uniform();
        }
        const Vector d = psi_map(z1, fp.b, fp.tau, problem) - psi_map(z2, fp.b, fp.tau, problem);
        c.psi_max_ratio = std::max(c.psi_max_ratio, d.cwiseAbs().maxCoeff() / (z1 - z2).cwiseAbs().maxCoeff());
    }
    return c;
}

} // namespace vpamp
