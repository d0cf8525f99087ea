#pragma once

// Gaussian random matrices with a variance profile, A = V o G.
//
// Convention: in the symmetric ensemble the diagonal has the same variance
// V_ii^2 / n as the off-diagonal entries. The upper triangle (diagonal
// included) is drawn i.i.d. and mirrored. This is NOT the GOE convention,
// whose diagonal variance is doubled.

#include "vpamp/core.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace vpamp {

enum class ProfileKind { Symmetric, Rectangular };

/// Nonnegative m x n matrix of entrywise standard deviations, with a
/// sup-norm bound K >= 2. Immutable after construction.
class VarianceProfile {
public:
    /// Validates nonnegativity, symmetry (for Symmetric) and entries <= bound.
    /// A bound below max(2, max entry) is rejected; bound <= 0 means "derive".
    VarianceProfile(ProfileKind kind, Matrix entries, double bound = 0.0);

    static VarianceProfile constant(ProfileKind kind, Index rows, Index cols, double value);
    /// Entries |N(mean, sd^2)|, mirrored from the upper triangle when symmetric.
    static VarianceProfile iid_abs_gaussian(ProfileKind kind, Index rows, Index cols, double mean, double sd,
                                            std::uint64_t seed);
    /// Piecewise-constant profile; block (a, b) covers row group a and column group b.
    static VarianceProfile block(ProfileKind kind, std::span<const Index> row_sizes, std::span<const Index> col_sizes,
                                 const Matrix& block_values);
    /// Dense, row-major, header-free CSV.
    static VarianceProfile from_csv(ProfileKind kind, const std::filesystem::path& path);

    ProfileKind kind() const noexcept { return kind_; }
    Index rows() const noexcept { return entries_.rows(); }
    Index cols() const noexcept { return entries_.cols(); }
    const Matrix& entries() const noexcept { return entries_; }
    const Matrix& squared() const noexcept { return squared_; }
    double bound() const noexcept { return bound_; }
    double operator()(Index i, Index j) const { return entries_(i, j); }

    /// Every row norm and column norm is strictly positive.
    bool has_positive_row_and_column_norms() const;

private:
    ProfileKind kind_;
    Matrix entries_;
    Matrix squared_;
    double bound_;
};

enum class MatrixScale { SymmetricOneOverN, RectangularOneOverM };

/// Entry law used by the ridge experiments. All are centered with unit
/// variance before scaling; the AMP theory itself is Gaussian only.
enum class EntryDistribution { Gaussian, Rademacher, StudentT10 };

struct SampledMatrix {
    Matrix values;
    MatrixScale scale;
    std::uint64_t seed;

    Index rows() const noexcept { return values.rows(); }
    Index cols() const noexcept { return values.cols(); }
};

/// A_ij = V_ij G_ij with G_ij ~ N(0, 1/n) for i <= j, mirrored.
SampledMatrix sample_symmetric(const VarianceProfile& profile, std::uint64_t seed);

/// A_kl = V_kl G_kl with G_kl i.i.d. of variance 1/m.
SampledMatrix sample_rectangular(const VarianceProfile& profile, std::uint64_t seed,
                                 EntryDistribution law = EntryDistribution::Gaussian);

enum class LeaveOutMode { RowAndColumn, RowOnly, ColumnOnly };

/// Copy of A with the rows and/or columns in `indices` set to zero.
SampledMatrix mask_leave_out(const SampledMatrix& a, std::span<const Index> indices, LeaveOutMode mode);

} // namespace vpamp
