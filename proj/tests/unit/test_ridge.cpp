#include <gtest/gtest.h>

#include "vpamp/rng.hpp"
#include "vpamp/ridge.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace vpamp;

namespace {

VarianceProfile flat(Index m, Index n) { return VarianceProfile::constant(ProfileKind::Rectangular, m, n, 1.0); }

Vector gaussian(Index len, std::uint64_t seed) {
    SequentialRng rng(seed, 7);
    Vector v(len);
    for (Index i = 0; i < len; ++i) v[i] = rng.normal();
    return v;
}

RidgeProblem hetero(Index m, Index n, double lambda, std::uint64_t seed) {
    return RidgeProblem(VarianceProfile::iid_abs_gaussian(ProfileKind::Rectangular, m, n, 1.0, 1.0, seed), lambda,
                        Vector::Ones(n), gaussian(m, seed + 100));
}

double sup(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

} // namespace

TEST(DRMetric, Values) {
    EXPECT_EQ(dR_metric(2.0, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(dR_metric(1.0, 4.0), 9.0 / 4.0);
    EXPECT_THROW(dR_metric(0.0, 1.0), DomainError);
    EXPECT_THROW(dR_metric(1.0, -1.0), DomainError);
    EXPECT_DOUBLE_EQ(dR_metric((Vector(2) << 1, 2).finished(), (Vector(2) << 4, 2).finished()), 9.0 / 4.0);
}

TEST(DRMetric, LemmaProperties) {
    SequentialRng rng(3, 1);
    for (int i = 0; i < 200; ++i) {
        const double x = 0.01 + 10 * rng.uniform();
        const double y = 0.01 + 10 * rng.uniform();
        const double beta = 5 * rng.uniform();
        const double d = dR_metric(x, y);
        EXPECT_NEAR(dR_metric(1 / x, 1 / y), d, 1e-12 * (1 + d));
        EXPECT_NEAR(dR_metric(x + beta, y + beta), d / ((1 + beta / x) * (1 + beta / y)), 1e-12 * (1 + d));
        Vector a(4), xs(4), ys(4);
        for (Index k = 0; k < 4; ++k) {
            a[k] = rng.uniform();
            xs[k] = 0.1 + rng.uniform();
            ys[k] = 0.1 + rng.uniform();
        }
        EXPECT_LE(dR_metric(a.dot(xs), a.dot(ys)), dR_metric(xs, ys) * (1 + 1e-12));
        EXPECT_EQ(dR_metric(x, y), dR_metric(y, x));
    }
}

TEST(PhiMap, ScalarReduction) {
    const RidgeProblem p(flat(8, 8), 1.0, Vector::Ones(8), Vector::Zero(8));
    for (double c : {0.1, 1.0, 3.0}) {
        const Vector out = phi_map(Vector::Constant(8, c), p);
        EXPECT_LE(sup(out - Vector::Constant(8, 1.0 / (1.0 + 1.0 / (1.0 + c)))), 1e-15);
    }
    EXPECT_THROW(phi_map(Vector::Zero(8), p), DomainError);
    EXPECT_NO_THROW(phi_map(Vector::Constant(8, 1e-12), p));
}

TEST(SolveB, QuadraticOracle) {
    const RidgeProblem p(flat(50, 100), 1.0, Vector::Ones(100), Vector::Zero(50));
    const auto fp = solve_b(p);
    // lambda u^2 + (lambda + 1/phi - 1) u - 1 = 0 with phi = 1/2
    const double u = (-2.0 + std::sqrt(4.0 + 4.0)) / 2.0;
    for (Index k = 0; k < 50; ++k) EXPECT_NEAR(fp.b[k], 1.0 - u, 1e-8);
    for (Index l = 0; l < 100; ++l) EXPECT_NEAR(fp.tau[l], 1.0 / u, 1e-8);
    EXPECT_NEAR(fp.b[0], 0.5857864, 1e-7);
    EXPECT_LE(fp.residual_b, 1e-9);
    EXPECT_LE(fp.b_gap, 1e-10);
}

TEST(SolveB, LargeLambdaAndSecondEquation) {
    const RidgeProblem p(flat(10, 20), 1e6, Vector::Ones(20), Vector::Zero(10));
    EXPECT_LE(solve_b(p).b.maxCoeff(), 1e-5);
    const auto q = hetero(40, 70, 0.3, 9);
    const auto fp = solve_b(q);
    const Vector lhs = fp.b.array() / (1.0 - fp.b.array());
    const Vector rhs = q.w() * (fp.tau.array() / (1.0 + 0.3 * fp.tau.array())).matrix();
    EXPECT_LE(sup(lhs - rhs), 1e-9);
    EXPECT_GE(fp.b.minCoeff(), 0.0);
    EXPECT_LT(fp.b.maxCoeff(), 1.0);
    EXPECT_GT(fp.tau.minCoeff(), 0.0);
}

TEST(SolveB, ConvergenceErrorCarriesResidual) {
    SolveOptions o;
    o.max_iter = 2;
    o.tol = 1e-15;
    try {
        solve_b(hetero(20, 30, 0.1, 1), o);
        FAIL();
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.last_residual(), 0.0);
    }
}

TEST(SolveB, MonotoneInLambdaAndGapLog) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto p = hetero(15, 25, 0.5, s);
        const auto lo = solve_b(p);
        const auto hi = solve_b(p.with_lambda(0.9));
        EXPECT_TRUE(((hi.b - lo.b).array() <= 1e-12).all()) << s;
        for (std::size_t i = 6; i < lo.b_gap_log.size(); ++i) EXPECT_LE(lo.b_gap_log[i], lo.b_gap_log[i - 1]) << s;
    }
}

TEST(SolveB, DampingReachesTheSamePoint) {
    const auto p = hetero(20, 30, 0.4, 4);
    SolveOptions o;
    o.damping = 0.3;
    EXPECT_LE(sup(solve_b(p, o).b - solve_b(p).b), 1e-9);
}

TEST(PhiMap, ContractionOnRandomAdmissiblePairs) {
    const auto p = hetero(30, 60, 0.7, 2);
    const auto [lo, hi] = phi_admissible_box(p);
    const double bound = phi_contraction_bound(p);
    EXPECT_LT(bound, 1.0);
    SequentialRng rng(11, 2);
    for (int i = 0; i < 100; ++i) {
        Vector u(30), w(30);
        for (Index k = 0; k < 30; ++k) {
            u[k] = lo * std::pow(hi / lo, rng.uniform());
            w[k] = lo * std::pow(hi / lo, rng.uniform());
        }
        const Vector pu = phi_map(u, p), pw = phi_map(w, p);
        EXPECT_TRUE((pu.array() >= lo).all() && (pu.array() <= hi).all());
        const double ratio = dR_metric(pu, pw) / dR_metric(u, w);
        EXPECT_LT(ratio, 1.0);
        EXPECT_LE(ratio, bound * (1 + 1e-12));
    }
}

TEST(SolveGamma, ZeroDataGivesZero) {
    const RidgeProblem p(VarianceProfile::iid_abs_gaussian(ProfileKind::Rectangular, 10, 20, 1, 1, 3), 1.0,
                         Vector::Zero(20), Vector::Zero(10));
    const auto fp = solve_fixed_point(p);
    EXPECT_EQ(fp.gamma, Vector::Zero(20));
}

// scalar two-equation system for V = 1: 1 - 1/tau = (n/m) / (1 + lambda tau) by bisection, then
// gamma^2 (1 - (n/m) / (1 + lambda tau)^2) = |xi|^2/m + (n/m) (lambda tau / (1 + lambda tau))^2 |mu0|^2/n
TEST(SolveGamma, ScalarTwoEquationOracle) {
    constexpr Index m = 60, n = 90;
    const double lam = 0.8;
    const Vector mu0 = gaussian(n, 1).cwiseAbs();
    const Vector xi = gaussian(m, 2);
    const RidgeProblem p(flat(m, n), lam, mu0, xi);
    const auto fp = solve_fixed_point(p);
    const double ratio = static_cast<double>(n) / m;
    double a = 1.0, b = 1e6;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (a + b);
        (1.0 - 1.0 / mid - ratio / (1.0 + lam * mid) > 0.0 ? b : a) = mid;
    }
    const double tau = 0.5 * (a + b);
    const double s = lam * tau / (1.0 + lam * tau);
    const double g2 = (xi.squaredNorm() / m + ratio * s * s * mu0.squaredNorm() / n) /
                      (1.0 - ratio / ((1.0 + lam * tau) * (1.0 + lam * tau)));
    for (Index l = 0; l < n; ++l) {
        EXPECT_NEAR(fp.tau[l], tau, 1e-8);
        EXPECT_NEAR(fp.gamma[l], std::sqrt(g2), 1e-8);
    }
    EXPECT_LE(fp.residual_gamma, 1e-9);
}

TEST(SolveGamma, PsiRatioBoundedByMaxB) {
    const auto p = hetero(30, 50, 0.5, 6);
    const auto fp = solve_fixed_point(p);
    EXPECT_LE(fp.residual_gamma, 1e-9);
    EXPECT_LE(fixed_point_residuals(p, fp.b, fp.gamma).second, 1e-9);
    SequentialRng rng(2, 9);
    for (int i = 0; i < 100; ++i) {
        Vector z1(50), z2(50);
        for (Index l = 0; l < 50; ++l) {
            z1[l] = 5 * rng.uniform();
            z2[l] = 5 * rng.uniform();
        }
        const double ratio = sup(psi_map(z1, fp.b, fp.tau, p) - psi_map(z2, fp.b, fp.tau, p)) / sup(z1 - z2);
        EXPECT_LE(ratio, fp.b.maxCoeff() + 1e-12);
    }
}

TEST(ClosedForm, SmallCases) {
    const Vector y = gaussian(4, 5);
    EXPECT_LE(sup(ridge_closed_form(Matrix::Identity(4, 4), y, 1.0) - y / 2), 1e-15);
    EXPECT_EQ(ridge_closed_form(Matrix::Random(5, 3), Vector::Zero(5), 0.5), Vector::Zero(3));
    for (auto [rows, cols] : {std::pair<Index, Index>{5, 3}, {3, 5}}) {
        Matrix a(rows, cols);
        const Vector g = gaussian(rows * cols, 8);
        for (Index i = 0; i < rows * cols; ++i) a(i / cols, i % cols) = g[i];
        const Vector yy = gaussian(rows, 9);
        const Vector naive = (a.transpose() * a + 0.7 * Matrix::Identity(cols, cols)).inverse() * a.transpose() * yy;
        EXPECT_LE(sup(ridge_closed_form(a, yy, 0.7) - naive), 1e-10);
    }
    EXPECT_THROW(ridge_closed_form(Matrix::Identity(2, 2), Vector::Ones(2), 0.0), DomainError);
}

TEST(AmpRidge, ZeroDataStaysZero) {
    const RidgeProblem p(flat(10, 20), 1.0, Vector::Zero(20), Vector::Zero(10));
    const auto fp = solve_fixed_point(p);
    const auto traj = amp_ridge_run(p, fp, sample_rectangular(p.profile(), 1).values, 5);
    for (const auto& th : traj.theta) EXPECT_TRUE(th.isZero(0));
    for (const auto& r : traj.r) EXPECT_TRUE(r.isZero(0));
}

// the proximal step, checked against golden-section minimization
TEST(AmpRidge, ProxStepMatchesGenericProx) {
    const double lam = 0.6, tau = 1.7;
    const RidgeProxAffine f{lam, tau, 0.0};
    for (double y : {-3.0, -0.2, 0.0, 1.4, 5.0}) {
        double a = -10, b = 10;
        const double g = (std::sqrt(5.0) - 1) / 2;
        auto obj = [&](double x) { return 0.5 * (x - y) * (x - y) + 0.5 * lam * tau * x * x; };
        for (int i = 0; i < 200; ++i) {
            const double c = b - g * (b - a), d = a + g * (b - a);
            (obj(c) < obj(d) ? b : a) = (obj(c) < obj(d) ? d : c);
        }
        // F(v) = prox(center - v) - center with center 0
        EXPECT_NEAR(f.eval(-y), 0.5 * (a + b), 1e-7);
    }
}

TEST(AmpRidge, ConvergesToClosedForm) {
    const RidgeProblem p(VarianceProfile::iid_abs_gaussian(ProfileKind::Rectangular, 100, 200, 1, 1, 1), 1.0,
                         Vector::Ones(200), gaussian(100, 3));
    const auto fp = solve_fixed_point(p);
    const Matrix a = sample_rectangular(p.profile(), 5).values;
    const auto traj = amp_ridge_run(p, fp, a, 60);
    const Vector y = a * p.mu0() + p.xi();
    const Vector mu_hat = ridge_closed_form(a, y, 1.0);
    EXPECT_LE((traj.mu.back() - mu_hat).norm() / std::sqrt(200.0), 1e-6);
    // residual identification R = Y - A mu_hat at the limit
    EXPECT_LE((traj.big_r.back() - (y - a * mu_hat)).norm() / std::sqrt(100.0), 1e-6);
    EXPECT_LT((traj.mu[40] - mu_hat).norm(), (traj.mu[20] - mu_hat).norm());
}

TEST(AmpRidge, StandardAsymmetricFormMatches) {
    const auto p = hetero(40, 70, 0.5, 3);
    const auto fp = solve_fixed_point(p);
    const Matrix a = sample_rectangular(p.profile(), 2).values;
    const int horizon = 6;
    const auto direct = amp_ridge_run(p, fp, a, horizon);
    const auto form = ridge_asym_form(p, fp, a, horizon);
    const auto traj = run_asymmetric(form.profile, form.matrix, form.f, form.g, form.v0, horizon, onsager::DataDriven{});
    for (int t = 1; t <= horizon; ++t) {
        const auto i = static_cast<std::size_t>(t);
        EXPECT_LE(sup(form.xi_b - traj.u[i] - direct.r[i]), 1e-9 * (1 + sup(direct.r[i]))) << t;
        EXPECT_LE(sup(form.f.eval(t, traj.v[i]) + form.theta0 - direct.theta[i]), 1e-9) << t;
        if (t < horizon) EXPECT_LE(sup(traj.onsager_f[i] + fp.b), 1e-9) << t;
        EXPECT_LE(sup(traj.onsager_g[i] - Vector::Ones(70)), 1e-9) << t;
    }
    // b^F = +b* does not reproduce the iteration
    onsager::Supplied plus;
    plus.f.assign(static_cast<std::size_t>(horizon), fp.b);
    plus.g.assign(static_cast<std::size_t>(horizon + 1), Vector::Ones(70));
    const auto wrong = run_asymmetric(form.profile, form.matrix, form.f, form.g, form.v0, horizon, plus);
    EXPECT_GT(sup(form.xi_b - wrong.u[3] - direct.r[3]), 1e-3);
}

TEST(SeqMoments, ClosedFormsAndLimits) {
    RidgeFixedPoint fp;
    fp.lambda = 2.0;
    fp.tau = (Vector(2) << 0.5, 1.5).finished();
    fp.gamma = Vector::Zero(2);
    const Vector mu0 = (Vector(2) << 1.0, -2.0).finished();
    const auto s = seq_moments(fp, mu0, 1);
    EXPECT_DOUBLE_EQ(s.mean, -2.0 / 4.0);
    EXPECT_EQ(s.variance, 0.0);
    fp.lambda = 1e9;
    EXPECT_LE(std::abs(seq_moments(fp, mu0, 0).mean), 1e-8);
    EXPECT_THROW(seq_moments(fp, mu0, 2), DomainError);
}

// sequence estimator (mu0 + gamma Z) / (1 + lambda tau) sampled directly
TEST(SeqMoments, MonteCarloOracle) {
    const RidgeProblem p(flat(40, 80), 0.7, Vector::LinSpaced(80, 0.5, 1.5), gaussian(40, 4));
    const auto fp = solve_fixed_point(p);
    SequentialRng rng(99, 5);
    constexpr int draws = 1000000;
    const double shrink = 1.0 + 0.7 * fp.tau[3];
    double sum = 0, sum2 = 0;
    for (int i = 0; i < draws; ++i) {
        const double x = (p.mu0()[3] + fp.gamma[3] * rng.normal()) / shrink;
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / draws;
    const double var = sum2 / draws - mean * mean;
    const auto th = seq_moments(fp, p.mu0(), 3);
    EXPECT_LE(std::abs(mean - th.mean), 3 * std::sqrt(th.variance / draws));
    EXPECT_LE(std::abs(var - th.variance), 3 * std::sqrt(2.0 / draws) * th.variance);
}

TEST(ResidualMoments, HandExpansion) {
    Matrix v(3, 2);
    v << 1.0, 0.5, 2.0, 1.0, 0.3, 1.2;
    const Vector mu0 = (Vector(2) << 0.7, -1.1).finished();
    const Vector xi = (Vector(3) << 0.2, -0.4, 1.0).finished();
    const RidgeProblem p(VarianceProfile(ProfileKind::Rectangular, v), 0.9, mu0, xi);
    const auto fp = solve_fixed_point(p);
    const auto mom = residual_moments(fp, p);
    for (int i = 0; i < 3; ++i) {
        double var = 0.0;
        for (int l = 0; l < 2; ++l) {
            const double tl = fp.tau[l];
            const double wil = v(i, l) * v(i, l) / 3.0;
            var += wil * tl / ((1 + 0.9 * tl) * (1 + 0.9 * tl)) *
                   (0.81 * tl * mu0[l] * mu0[l] + fp.gamma[l] * fp.gamma[l] / tl);
        }
        var *= (1 - fp.b[i]) * (1 - fp.b[i]);
        EXPECT_NEAR(mom[static_cast<std::size_t>(i)].variance, var, 1e-14);
        EXPECT_NEAR(mom[static_cast<std::size_t>(i)].mean, (1 - fp.b[i]) * xi[i], 1e-15);
    }
    const RidgeProblem zero(VarianceProfile(ProfileKind::Rectangular, v), 0.9, Vector::Zero(2), Vector::Zero(3));
    for (const auto& mm : residual_moments(solve_fixed_point(zero), zero)) {
        EXPECT_EQ(mm.mean, 0.0);
        EXPECT_EQ(mm.variance, 0.0);
    }
}

TEST(TheoryL2, LimitsAndMonteCarlo) {
    const RidgeProblem z(flat(10, 20), 1.0, Vector::Zero(20), Vector::Zero(10));
    EXPECT_EQ(theory_l2_error(solve_fixed_point(z), Vector::Zero(20)), 0.0);
    const Vector mu0 = Vector::LinSpaced(20, -1, 2);
    const RidgeProblem big(flat(10, 20), 1e8, mu0, gaussian(10, 1));
    EXPECT_NEAR(theory_l2_error(solve_fixed_point(big), mu0), mu0.squaredNorm() / 20, 1e-6);

    const RidgeProblem p(VarianceProfile::iid_abs_gaussian(ProfileKind::Rectangular, 10, 20, 1, 1, 8), 0.4, mu0,
                         gaussian(10, 2));
    const auto fp = solve_fixed_point(p);
    SequentialRng rng(5, 5);
    constexpr int draws = 20000;
    std::vector<double> vals;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < draws; ++i) {
        double e = 0;
        for (Index j = 0; j < 20; ++j) {
            const double s = 1 + 0.4 * fp.tau[j];
            const double x = (mu0[j] + fp.gamma[j] * rng.normal()) / s;
            e += (x - mu0[j]) * (x - mu0[j]);
        }
        e /= 20;
        sum += e;
        sum2 += e * e;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
    EXPECT_LE(std::abs(mean - theory_l2_error(fp, mu0)), 3 * se);
}

TEST(FixedPointCsv, RowsCoverBothLengths) {
    const auto p = hetero(4, 6, 1.0, 1);
    const auto path = std::filesystem::temp_directory_path() / "vpamp_fp.csv";
    write_fixed_point_csv(solve_fixed_point(p), path);
    std::ifstream in(path);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 7u);
    EXPECT_EQ(lines[0], "coordinate,b,tau,gamma,zeta");
    EXPECT_EQ(lines[6].substr(0, 3), "5,,");
}

TEST(RidgeProblem, Validation) {
    Matrix v = Matrix::Ones(3, 4);
    v.col(2).setZero();
    EXPECT_THROW(RidgeProblem(VarianceProfile(ProfileKind::Rectangular, v), 1.0, Vector::Ones(4), Vector::Ones(3)),
                 DomainError);
    EXPECT_THROW(RidgeProblem(flat(3, 4), 0.0, Vector::Ones(4), Vector::Ones(3)), DomainError);
    EXPECT_THROW(RidgeProblem(flat(3, 4), 1.0, Vector::Ones(3), Vector::Ones(3)), ShapeError);
}

TEST(Certificate, AgreesWithDirectRatios) {
    const auto p = hetero(30, 60, 0.7, 2);
    const auto fp = solve_fixed_point(p);
    const auto c = certify_contraction(p, fp, 100, 4);
    EXPECT_EQ(c.pairs, 100);
    EXPECT_TRUE(c.phi_ok());
    EXPECT_TRUE(c.psi_ok());
    EXPECT_GT(c.phi_max_ratio, 0.0);
    EXPECT_GT(c.psi_max_ratio, 0.0);
    EXPECT_EQ(c.max_b, fp.b.maxCoeff());
    const auto again = certify_contraction(p, fp, 100, 4);
    EXPECT_EQ(again.phi_max_ratio, c.phi_max_ratio);
    EXPECT_EQ(again.psi_max_ratio, c.psi_max_ratio);
}
