#include <gtest/gtest.h>

#include "vpamp/nonlinearity.hpp"

#include <cmath>
#include <vector>

using namespace vpamp;

namespace {

std::vector<Nonlinearity> all_families() {
    return {Nonlinearity(Identity{}),
            Nonlinearity(Affine{2.0, 3.0}),
            Nonlinearity(ScaledTanh{1.0, 1.0}),
            Nonlinearity(ScaledTanh{-0.7, 2.5}),
            Nonlinearity(SmoothSoftThreshold{1.0, 0.1}),
            Nonlinearity(SmoothSoftThreshold{0.5, 0.05}),
            Nonlinearity(RidgeProxAffine{0.5, 2.0, 1.0})};
}

} // namespace

TEST(Nonlinearity, SpecExamples) {
    const Nonlinearity id;
    EXPECT_EQ(id.eval(1.7), 1.7);
    EXPECT_EQ(id.deriv(1.7), 1.0);
    const Nonlinearity th(ScaledTanh{1.0, 1.0});
    EXPECT_EQ(th.eval(0.0), 0.0);
    EXPECT_EQ(th.deriv(0.0), 1.0);
    NonlinearitySchedule s(0, 2, Nonlinearity(Affine{2.0, 3.0}));
    const Vector z = (Vector(2) << 1.0, -1.0).finished();
    EXPECT_EQ(s.eval(0, z), (Vector(2) << 5.0, 1.0).finished());
    EXPECT_EQ(s.deriv(0, z), (Vector(2) << 2.0, 2.0).finished());
}

TEST(Nonlinearity, DerivativeMatchesFiniteDifferences) {
    const auto grid = standard_grid();
    constexpr double h = 1e-5;
    for (const auto& f : all_families()) {
        double worst = 0.0;
        for (double z : grid) {
            const double fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
            const double d = f.deriv(z);
            worst = std::max(worst, std::abs(fd - d) / std::max(1.0, std::abs(d)));
        }
        EXPECT_LE(worst, 1e-6) << f.name();
    }
}

TEST(Nonlinearity, LipschitzClaims) {
    const auto grid = standard_grid();
    EXPECT_TRUE(check_lipschitz(Nonlinearity(), 1.0, grid));
    EXPECT_FALSE(check_lipschitz(Nonlinearity(ScaledTanh{3.0, 1.0}), 2.0, grid));
    EXPECT_TRUE(check_lipschitz(Nonlinearity(SmoothSoftThreshold{1.0, 0.1}), 1.01, grid));
    for (const auto& f : all_families()) EXPECT_TRUE(check_lipschitz(f, f.lipschitz(), grid)) << f.name();
}

TEST(Nonlinearity, SmoothSoftThresholdShape) {
    const Nonlinearity f(SmoothSoftThreshold{1.0, 0.1});
    EXPECT_EQ(f.eval(0.0), 0.0);
    EXPECT_EQ(f.eval(0.89), 0.0);
    EXPECT_DOUBLE_EQ(f.eval(3.0), 2.0);
    EXPECT_DOUBLE_EQ(f.eval(-3.0), -2.0);
    EXPECT_DOUBLE_EQ(f.eval(1.0), -f.eval(-1.0));
    // continuity of value and slope across the ramp edges
    for (double edge : {0.9, 1.1}) {
        EXPECT_NEAR(f.eval(edge - 1e-9), f.eval(edge + 1e-9), 1e-8);
        EXPECT_NEAR(f.deriv(edge - 1e-9), f.deriv(edge + 1e-9), 1e-7);
    }
}

TEST(Nonlinearity, RejectsBadParameters) {
    EXPECT_THROW(Nonlinearity(SmoothSoftThreshold{0.05, 0.1}), DomainError);
    EXPECT_THROW(Nonlinearity(SmoothSoftThreshold{1.0, 0.0}), DomainError);
    EXPECT_THROW(Nonlinearity(RidgeProxAffine{0.0, 1.0, 0.0}), DomainError);
    EXPECT_THROW(Nonlinearity(Affine{NAN, 0.0}), DomainError);
}

TEST(NonlinearitySchedule, MinusOneIsZero) {
    NonlinearitySchedule s(2, 3, Nonlinearity(Affine{1.0, 5.0}));
    const Vector z = Vector::Ones(3);
    EXPECT_TRUE(s.eval(-1, z).isZero(0));
    EXPECT_TRUE(s.deriv(-1, z).isZero(0));
    EXPECT_EQ(s.at(-1, 0).eval(4.0), 0.0);
}

TEST(NonlinearitySchedule, RangeAndLengthChecks) {
    NonlinearitySchedule s(2, 3);
    EXPECT_THROW(s.eval(3, Vector::Ones(3)), DomainError);
    EXPECT_THROW(s.eval(-2, Vector::Ones(3)), DomainError);
    EXPECT_THROW(s.eval(0, Vector::Ones(4)), ShapeError);
    EXPECT_THROW(s.set(0, std::vector<Nonlinearity>(2)), ShapeError);
}

TEST(NonlinearitySchedule, PerCoordinateAndLipschitz) {
    NonlinearitySchedule s(1, 3, Nonlinearity(ScaledTanh{1.0, 1.0}));
    s.set(1, 2, Nonlinearity(Affine{-4.0, 0.0}));
    const Vector z = (Vector(3) << 0.5, -0.5, 1.0).finished();
    const Vector out = s.eval(1, z);
    EXPECT_DOUBLE_EQ(out[0], std::tanh(0.5));
    EXPECT_DOUBLE_EQ(out[2], -4.0);
    EXPECT_DOUBLE_EQ(s.deriv(1, z)[2], -4.0);
    EXPECT_DOUBLE_EQ(s.lipschitz(), 4.0);
    EXPECT_EQ(s.at(0, 2), Nonlinearity(ScaledTanh{1.0, 1.0}));
}
