#include "vpamp/ensembles.hpp"

#include "vpamp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

namespace vpamp {

namespace {

// Stream ids keep the different consumers of one seed apart.
constexpr std::uint64_t kSymmetricStream = 0x53594D;   // "SYM"
constexpr std::uint64_t kRectangularStream = 0x524543; // "REC"
constexpr std::uint64_t kProfileStream = 0x50524F;     // "PRO"

double student_t10(const CounterRng& rng, std::uint64_t slot) {
    // t(10) rescaled to unit variance: Z / sqrt(chi2_10 / 10) * sqrt(8/10)
    const std::uint64_t base = slot * 11;
    double chi2 = 0.0;
    for (std::uint64_t j = 1; j <= 10; ++j) {
        const double g = rng.normal(base + j);
        chi2 += g * g;
    }
    return rng.normal(base) / std::sqrt(chi2 / 10.0) * std::sqrt(0.8);
}

} // namespace

VarianceProfile::VarianceProfile(ProfileKind kind, Matrix entries, double bound)
    : kind_(kind), entries_(std::move(entries)) {
    require_shape(entries_.rows() > 0 && entries_.cols() > 0, "variance profile must be non-empty");
    require_domain(entries_.allFinite(), "variance profile has non-finite entries");
    require_domain((entries_.array() >= 0.0).all(), "variance profile entries must be nonnegative");
    if (kind_ == ProfileKind::Symmetric) {
        require_shape(entries_.rows() == entries_.cols(), "symmetric profile must be square");
        require_shape(entries_ == entries_.transpose(), "symmetric profile must satisfy V = V^T exactly");
    }
    const double derived = std::max(2.0, entries_.maxCoeff());
    if (bound <= 0.0) {
        bound_ = derived;
    } else {
        require_domain(bound >= 2.0, "profile bound K must be >= 2");
        require_domain(entries_.maxCoeff() <= bound, "profile entry exceeds the bound K");
        bound_ = bound;
    }
    squared_ = entries_.array().square().matrix();
}

VarianceProfile VarianceProfile::constant(ProfileKind kind, Index rows, Index cols, double value) {
    return VarianceProfile(kind, Matrix::Constant(rows, cols, value));
}

VarianceProfile VarianceProfile::iid_abs_gaussian(ProfileKind kind, Index rows, Index cols, double mean, double sd,
                                                  std::uint64_t seed) {
    const CounterRng rng(seed, kProfileStream);
    Matrix v(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) {
            if (kind == ProfileKind::Symmetric && j < i) continue;
            v(i, j) = std::abs(mean + sd * rng.normal(static_cast<std::uint64_t>(i * cols + j)));
        }
    if (kind == ProfileKind::Symmetric) v.triangularView<Eigen::StrictlyLower>() = v.transpose();
    return VarianceProfile(kind, std::move(v));
}

VarianceProfile VarianceProfile::block(ProfileKind kind, std::span<const Index> row_sizes,
                                       std::span<const Index> col_sizes, const Matrix& block_values) {
    require_shape(static_cast<Index>(row_sizes.size()) == block_values.rows() &&
                      static_cast<Index>(col_sizes.size()) == block_values.cols(),
                  "block value table does not match the block partition");
    const Index rows = std::accumulate(row_sizes.begin(), row_sizes.end(), Index{0});
    const Index cols = std::accumulate(col_sizes.begin(), col_sizes.end(), Index{0});
    Matrix v(rows, cols);
    Index r0 = 0;
    for (std::size_t a = 0; a < row_sizes.size(); ++a) {
        Index c0 = 0;
        for (std::size_t b = 0; b < col_sizes.size(); ++b) {
            v.block(r0, c0, row_sizes[a], col_sizes[b]).setConstant(block_values(a, b));
            c0 += col_sizes[b];
        }
        r0 += row_sizes[a];
    }
    return VarianceProfile(kind, std::move(v));
}

VarianceProfile VarianceProfile::from_csv(ProfileKind kind, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open profile CSV: " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw Error(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ShapeError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
        rows.push_back(std::move(row));
    }
    require_shape(!rows.empty(), "empty profile CSV: " + path.string());
    Matrix v(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < v.rows(); ++i)
        for (Index j = 0; j < v.cols(); ++j) v(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return VarianceProfile(kind, std::move(v));
}

bool VarianceProfile::has_positive_row_and_column_norms() const {
    return (squared_.rowwise().sum().array() > 0.0).all() && (squared_.colwise().sum().array() > 0.0).all();
}

SampledMatrix sample_symmetric(const VarianceProfile& profile, std::uint64_t seed) {
    require_shape(profile.kind() == ProfileKind::Symmetric, "sample_symmetric needs a symmetric profile");
    const Index n = profile.rows();
    const CounterRng rng(seed, kSymmetricStream);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Matrix a(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i <= j; ++i) {
            const auto slot = static_cast<std::uint64_t>(i * n + j);
            a(i, j) = profile(i, j) * scale * rng.normal(slot);
        }
    a.triangularView<Eigen::StrictlyLower>() = a.transpose();
    return {std::move(a), MatrixScale::SymmetricOneOverN, seed};
}

SampledMatrix sample_rectangular(const VarianceProfile& profile, std::uint64_t seed, EntryDistribution law) {
    require_shape(profile.kind() == ProfileKind::Rectangular, "sample_rectangular needs a rectangular profile");
    const Index m = profile.rows();
    const Index n = profile.cols();
    const CounterRng rng(seed, kRectangularStream);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    Matrix a(m, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < m; ++i) {
            const auto slot = static_cast<std::uint64_t>(i * n + j);
            double g = 0.0;
            switch (law) {
            case EntryDistribution::Gaussian: g = rng.normal(slot); break;
            case EntryDistribution::Rademacher: g = rng.uniform(slot) <= 0.5 ? -1.0 : 1.0; break;
            case EntryDistribution::StudentT10: g = student_t10(rng, slot); break;
            }
            a(i, j) = profile(i, j) * scale * g;
        }
    return {std::move(a), MatrixScale::RectangularOneOverM, seed};
}

SampledMatrix mask_leave_out(const SampledMatrix& a, std::span<const Index> indices, LeaveOutMode mode) {
    const bool symmetric = a.scale == MatrixScale::SymmetricOneOverN;
    if (mode == LeaveOutMode::RowAndColumn)
        require_shape(symmetric && a.rows() == a.cols(), "row-and-column masking needs a symmetric matrix");
    SampledMatrix out = a;
    for (Index k : indices) {
        const bool row_ok = k >= 0 && k < a.rows();
        const bool col_ok = k >= 0 && k < a.cols();
        switch (mode) {
        case LeaveOutMode::RowAndColumn:
            require_domain(row_ok, "leave-out index out of range");
            out.values.row(k).setZero();
            out.values.col(k).setZero();
            break;
        case LeaveOutMode::RowOnly:
            require_domain(row_ok, "leave-out row index out of range");
            out.values.row(k).setZero();
            break;
        case LeaveOutMode::ColumnOnly:
            require_domain(col_ok, "leave-out column index out of range");
            out.values.col(k).setZero();
            break;
        }
    }
    return out;
}

} // namespace vpamp
