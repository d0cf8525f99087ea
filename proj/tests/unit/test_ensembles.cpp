#include <gtest/gtest.h>

#include "vpamp/ensembles.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

using namespace vpamp;

TEST(VarianceProfile, RejectsNegativeAndAsymmetric) {
    Matrix v = Matrix::Ones(3, 3);
    v(0, 1) = -1.0;
    EXPECT_THROW(VarianceProfile(ProfileKind::Rectangular, v), DomainError);
    v(0, 1) = 2.0;
    EXPECT_THROW(VarianceProfile(ProfileKind::Symmetric, v), ShapeError);
    EXPECT_NO_THROW(VarianceProfile(ProfileKind::Rectangular, v));
    EXPECT_THROW(VarianceProfile(ProfileKind::Symmetric, Matrix::Ones(2, 3)), ShapeError);
}

TEST(VarianceProfile, BoundIsAtLeastTwo) {
    EXPECT_DOUBLE_EQ(VarianceProfile::constant(ProfileKind::Symmetric, 3, 3, 1.0).bound(), 2.0);
    EXPECT_DOUBLE_EQ(VarianceProfile::constant(ProfileKind::Symmetric, 3, 3, 3.5).bound(), 3.5);
    EXPECT_THROW(VarianceProfile(ProfileKind::Symmetric, Matrix::Ones(2, 2), 1.5), DomainError);
    EXPECT_THROW(VarianceProfile(ProfileKind::Symmetric, Matrix::Constant(2, 2, 3.0), 2.5), DomainError);
}

TEST(VarianceProfile, BlockGenerator) {
    const std::vector<Index> sizes{2, 3};
    Matrix values(2, 2);
    values << 1.0, 0.5, 0.5, 2.0;
    const auto p = VarianceProfile::block(ProfileKind::Symmetric, sizes, sizes, values);
    EXPECT_EQ(p.rows(), 5);
    EXPECT_DOUBLE_EQ(p(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(p(1, 4), 0.5);
    EXPECT_DOUBLE_EQ(p(4, 4), 2.0);
}

TEST(VarianceProfile, AbsGaussianIsSymmetricAndReproducible) {
    const auto a = VarianceProfile::iid_abs_gaussian(ProfileKind::Symmetric, 6, 6, 1.0, 1.0, 3);
    const auto b = VarianceProfile::iid_abs_gaussian(ProfileKind::Symmetric, 6, 6, 1.0, 1.0, 3);
    EXPECT_EQ(a.entries(), b.entries());
    EXPECT_EQ(a.entries(), a.entries().transpose());
    EXPECT_TRUE((a.entries().array() >= 0).all());
}

TEST(VarianceProfile, CsvRoundTripAndDiagnostics) {
    const auto dir = std::filesystem::temp_directory_path();
    const auto good = dir / "vpamp_profile_ok.csv";
    std::ofstream(good) << "1,2\n3,4\n";
    const auto p = VarianceProfile::from_csv(ProfileKind::Rectangular, good);
    EXPECT_DOUBLE_EQ(p(1, 0), 3.0);
    const auto bad = dir / "vpamp_profile_bad.csv";
    std::ofstream(bad) << "1,2\n3,x\n";
    try {
        VarianceProfile::from_csv(ProfileKind::Rectangular, bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
    }
    const auto ragged = dir / "vpamp_profile_ragged.csv";
    std::ofstream(ragged) << "1,2\n3\n";
    EXPECT_THROW(VarianceProfile::from_csv(ProfileKind::Rectangular, ragged), ShapeError);
}

TEST(SampleSymmetric, ZeroProfileGivesZero) {
    const auto a = sample_symmetric(VarianceProfile::constant(ProfileKind::Symmetric, 7, 7, 0.0), 1);
    EXPECT_TRUE(a.values.isZero(0.0));
}

TEST(SampleSymmetric, DeterministicAndExactlySymmetric) {
    const auto p = VarianceProfile::iid_abs_gaussian(ProfileKind::Symmetric, 30, 30, 1.0, 1.0, 4);
    for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
        const auto a = sample_symmetric(p, seed);
        const auto b = sample_symmetric(p, seed);
        EXPECT_EQ(a.values, b.values);
        EXPECT_EQ(a.values, a.values.transpose());
        EXPECT_EQ(a.scale, MatrixScale::SymmetricOneOverN);
    }
    EXPECT_THROW(sample_symmetric(VarianceProfile::constant(ProfileKind::Rectangular, 3, 4, 1.0), 1), ShapeError);
}

TEST(SampleSymmetric, SecondMomentMatchesOneOverN) {
    constexpr Index n = 500;
    const auto a = sample_symmetric(VarianceProfile::constant(ProfileKind::Symmetric, n, n, 1.0), 11);
    double s = 0.0;
    Index count = 0;
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i <= j; ++i, ++count) s += a.values(i, j) * a.values(i, j);
    const double mean = s / static_cast<double>(count);
    // stderr of the mean of chi2_1 / n is sqrt(2 / count) / n, about 0.0028 / n
    EXPECT_NEAR(mean * n, 1.0, 0.05);
    // diagonal has the same variance as the off-diagonal
    EXPECT_NEAR(a.values.diagonal().squaredNorm(), 1.0, 0.2);
}

TEST(SampleSymmetric, OperatorNormBelowThree) {
    constexpr Index n = 500;
    const auto p = VarianceProfile::constant(ProfileKind::Symmetric, n, n, 1.0);
    int below = 0;
    constexpr int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        const auto a = sample_symmetric(p, static_cast<std::uint64_t>(s) + 100);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(a.values, Eigen::EigenvaluesOnly);
        const double norm = eig.eigenvalues().cwiseAbs().maxCoeff();
        if (norm < 3.0) ++below;
    }
    EXPECT_GE(below, 198);
}

TEST(SampleRectangular, VarianceAndShape) {
    const auto p = VarianceProfile::constant(ProfileKind::Rectangular, 100, 200, 1.0);
    const auto a = sample_rectangular(p, 5);
    EXPECT_EQ(a.rows(), 100);
    EXPECT_EQ(a.cols(), 200);
    const double var = a.values.squaredNorm() / static_cast<double>(a.values.size());
    EXPECT_NEAR(var * 100.0, 1.0, 0.05);
    EXPECT_EQ(sample_rectangular(p, 5).values, a.values);
    EXPECT_TRUE(sample_rectangular(VarianceProfile::constant(ProfileKind::Rectangular, 4, 3, 0.0), 1).values.isZero(0));
    EXPECT_THROW(sample_rectangular(VarianceProfile::constant(ProfileKind::Symmetric, 3, 3, 1.0), 1), ShapeError);
}

TEST(SampleRectangular, NonGaussianLawsHaveUnitVariance) {
    const auto p = VarianceProfile::constant(ProfileKind::Rectangular, 200, 200, 1.0);
    for (auto law : {EntryDistribution::Rademacher, EntryDistribution::StudentT10}) {
        const auto a = sample_rectangular(p, 8, law);
        const double var = a.values.squaredNorm() / static_cast<double>(a.values.size()) * 200.0;
        EXPECT_NEAR(var, 1.0, 0.03);
        EXPECT_NEAR(a.values.mean(), 0.0, 0.01);
    }
    const auto r = sample_rectangular(p, 8, EntryDistribution::Rademacher);
    EXPECT_TRUE((r.values.array().abs() - 1.0 / std::sqrt(200.0)).abs().maxCoeff() < 1e-15);
}

TEST(MaskLeaveOut, EmptyFullAndSymmetric) {
    const auto a = sample_symmetric(VarianceProfile::constant(ProfileKind::Symmetric, 6, 6, 1.0), 3);
    std::vector<Index> none;
    EXPECT_EQ(mask_leave_out(a, none, LeaveOutMode::RowAndColumn).values, a.values);
    std::vector<Index> one{2};
    const auto m = mask_leave_out(a, one, LeaveOutMode::RowAndColumn);
    EXPECT_EQ(m.values, m.values.transpose());
    EXPECT_TRUE(m.values.row(2).isZero(0));
    EXPECT_TRUE(m.values.col(2).isZero(0));
    EXPECT_NE(a.values.row(2).norm(), 0.0);
    std::vector<Index> all{0, 1, 2, 3, 4, 5};
    EXPECT_TRUE(mask_leave_out(a, all, LeaveOutMode::RowAndColumn).values.isZero(0));
    std::vector<Index> bad{6};
    EXPECT_THROW(mask_leave_out(a, bad, LeaveOutMode::RowAndColumn), DomainError);
}

TEST(MaskLeaveOut, IdempotentAndNested) {
    const auto a = sample_rectangular(VarianceProfile::constant(ProfileKind::Rectangular, 5, 7, 1.0), 3);
    std::vector<Index> p{1};
    std::vector<Index> q{1, 3};
    const auto once = mask_leave_out(a, p, LeaveOutMode::RowOnly);
    EXPECT_EQ(mask_leave_out(once, p, LeaveOutMode::RowOnly).values, once.values);
    EXPECT_EQ(mask_leave_out(once, q, LeaveOutMode::RowOnly).values, mask_leave_out(a, q, LeaveOutMode::RowOnly).values);
    const auto col = mask_leave_out(a, std::vector<Index>{6}, LeaveOutMode::ColumnOnly);
    EXPECT_TRUE(col.values.col(6).isZero(0));
    EXPECT_THROW(mask_leave_out(a, std::vector<Index>{7}, LeaveOutMode::ColumnOnly), DomainError);
    EXPECT_THROW(mask_leave_out(a, p, LeaveOutMode::RowAndColumn), ShapeError);
}
