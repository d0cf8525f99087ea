#include <gtest/gtest.h>

#include "vpamp/trace_diag.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace vpamp;

namespace {

VarianceProfile ones(Index n) { return VarianceProfile::constant(ProfileKind::Symmetric, n, n, 1.0); }

onsager::Supplied constant_b(int count, Index n, double value) {
    onsager::Supplied s;
    s.b.assign(static_cast<std::size_t>(count), Vector::Constant(n, value));
    return s;
}

double sup(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

struct Fixture {
    SampledMatrix a;
    NonlinearitySchedule schedule;
    AmpTrajectory traj;
};

Fixture two_by_two(int t) {
    Matrix am(2, 2);
    am << 0.4, -0.7, -0.7, 0.25;
    SampledMatrix a{am, MatrixScale::SymmetricOneOverN, 0};
    NonlinearitySchedule s(t + 1, 2, Nonlinearity(ScaledTanh{1.2, 0.9}));
    auto traj = run_symmetric(ones(2), a, s, (Vector(2) << 0.6, -1.1).finished(), t + 1, onsager::DataDriven{});
    return {a, s, traj};
}

} // namespace

TEST(MRecursion, BaseCaseIsDerivativeDiagonal) {
    const auto f = two_by_two(2);
    const auto m = m_recursion(f.a, f.traj, f.schedule, f.traj.onsager, 2);
    ASSERT_EQ(m.size(), 3u);
    const Vector d = f.schedule.deriv(2, f.traj.z[2]);
    EXPECT_EQ(m[0], Matrix(d.asDiagonal()));
}

// scalar loops, no matrix algebra
TEST(MRecursion, TwoByTwoHandExpansion) {
    const int t = 2;
    const auto f = two_by_two(t);
    const auto m = m_recursion(f.a, f.traj, f.schedule, f.traj.onsager, t);
    auto d = [&](int r, int i) { return f.schedule.at(r, i).deriv(f.traj.z[static_cast<std::size_t>(r)][i]); };
    auto b = [&](int r, int i) { return f.traj.onsager[static_cast<std::size_t>(r)][i]; };
    const Matrix& a = f.a.values;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double m1 = d(2, i) * a(i, j) * d(1, j);
            double m2 = 0.0;
            for (int k = 0; k < 2; ++k) m2 += d(2, i) * a(i, k) * d(1, k) * a(k, j) * d(0, j);
            if (i == j) m2 -= d(2, i) * b(1, i) * d(0, j);
            EXPECT_NEAR(m[1](i, j), m1, 1e-12);
            EXPECT_NEAR(m[2](i, j), m2, 1e-12);
        }
}

TEST(NRecursion, BaseCasesAndHandExpansion) {
    const int t = 3, s = 2;
    const auto f = two_by_two(t);
    const auto nm = n_recursion(f.a, f.traj, f.schedule, f.traj.onsager, t, s);
    ASSERT_EQ(nm.size(), 3u);
    EXPECT_EQ(nm[0], Matrix::Identity(2, 2));
    const Vector d2 = f.schedule.deriv(2, f.traj.z[2]);
    EXPECT_EQ(nm[1], Matrix(f.a.values * d2.asDiagonal()));
    auto d = [&](int r, int i) { return f.schedule.at(r, i).deriv(f.traj.z[static_cast<std::size_t>(r)][i]); };
    auto b = [&](int r, int i) { return f.traj.onsager[static_cast<std::size_t>(r)][i]; };
    const Matrix& a = f.a.values;
    // N_2 = A D^(3) N_1 - B_3 D^(2) N_0
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double want = 0.0;
            for (int k = 0; k < 2; ++k) want += a(i, k) * d(3, k) * a(k, j) * d(2, j);
            if (i == j) want -= b(3, i) * d(2, i);
            EXPECT_NEAR(nm[2](i, j), want, 1e-12);
        }
    EXPECT_THROW(n_recursion(f.a, f.traj, f.schedule, f.traj.onsager, t, 4), DomainError);
}

TEST(MRecursion, IdentityUnitOnsagerIsChebyshev) {
    constexpr Index n = 4;
    const int t = 4;
    const auto p = ones(n);
    const auto a = sample_symmetric(p, 17);
    const NonlinearitySchedule s(t + 1, n);
    const auto traj = run_symmetric(p, a, s, Vector::LinSpaced(n, -1, 1), t + 1, constant_b(t + 1, n, 1.0));
    const auto m = m_recursion(a, traj, s, traj.onsager, t);
    const Matrix& x = a.values;
    const Matrix id = Matrix::Identity(n, n);
    const Matrix x2 = x * x;
    // U_s(A / 2) written out
    EXPECT_LE(sup(m[0] - id), 0.0);
    EXPECT_LE(sup(m[1] - x), 1e-15);
    EXPECT_LE(sup(m[2] - (x2 - id)), 1e-14);
    EXPECT_LE(sup(m[3] - (x2 * x - 2.0 * x)), 1e-14);
    EXPECT_LE(sup(m[4] - (x2 * x2 - 3.0 * x2 + id)), 1e-13);
}

TEST(MRecursion, IdentityZeroOnsagerIsMatrixPower) {
    constexpr Index n = 3;
    const int t = 3;
    const auto p = ones(n);
    const auto a = sample_symmetric(p, 2);
    const NonlinearitySchedule s(t + 1, n);
    const auto traj = run_symmetric(p, a, s, Vector::Ones(n), t + 1, constant_b(t + 1, n, 0.0));
    const auto m = m_recursion(a, traj, s, traj.onsager, t);
    const auto nm = n_recursion(a, traj, s, traj.onsager, t, t);
    Matrix pw = Matrix::Identity(n, n);
    for (int k = 0; k <= t; ++k) {
        EXPECT_LE(sup(m[static_cast<std::size_t>(k)] - pw), 1e-15);
        EXPECT_LE(sup(nm[static_cast<std::size_t>(k)] - pw), 1e-15);
        pw = pw * a.values;
    }
}

TEST(MRecursion, ReproducibleAndChecked) {
    const auto f = two_by_two(2);
    EXPECT_EQ(m_recursion(f.a, f.traj, f.schedule, f.traj.onsager, 2),
              m_recursion(f.a, f.traj, f.schedule, f.traj.onsager, 2));
    EXPECT_THROW(m_recursion(f.a, f.traj, f.schedule, f.traj.onsager, 5), DomainError);
    EXPECT_THROW(m_recursion(f.a, f.traj, f.schedule, std::span<const Vector>(), 2), DomainError);
}

TEST(TraceDecay, ChebyshevCaseHasZeroMean) {
    TraceDecayOptions opt;
    opt.t = 3;
    opt.sizes = {60, 120};
    opt.seeds = 40;
    opt.base_seed = 5;
    opt.onsager = TraceOnsager::Unit;
    const auto report = trace_decay_test(
        [](Index n) { return TraceInstance{ones(n), NonlinearitySchedule(3, n), Vector::LinSpaced(n, -1, 1)}; }, opt);
    ASSERT_EQ(report.cells.size(), 2u * 3u * 2u);
    EXPECT_TRUE(report.horizon_warning);
    for (const auto& c : report.cells) {
        EXPECT_EQ(c.trace.count, 40);
        EXPECT_LE(std::abs(c.trace.zscore), 3.5) << c.n << " s=" << c.s << " " << c.d0;
    }
    EXPECT_EQ(report.cell_slopes.size(), 6u);
    const auto path = std::filesystem::temp_directory_path() / "vpamp_trace.csv";
    write_trace_report_csv(report, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "n,s,d0,mean_abs_trace,stderr,seeds,mean_trace,stderr_trace");
}

// n^{-1} sum_i F'F' A_ii is a mean of n weakly dependent O(n^{-1/2}) terms
TEST(TraceDecay, FirstOrderTraceConcentrates) {
    constexpr Index n = 400;
    const auto p = ones(n);
    const NonlinearitySchedule s(2, n, Nonlinearity(ScaledTanh{1.0, 1.0}));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto a = sample_symmetric(p, seed);
        const auto traj = run_symmetric(p, a, s, Vector::LinSpaced(n, -1, 1), 2, onsager::DataDriven{});
        const auto m = m_recursion(a, traj, s, traj.onsager, 1);
        EXPECT_LE(std::abs(normalized_trace(m[1], Vector::Ones(n))), 10.0 * 2.0 / std::sqrt(static_cast<double>(n)));
    }
}
