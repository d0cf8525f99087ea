#pragma once

// Replicate orchestration and empirical-vs-theory comparisons for the AMP and
// ridge experiments.
//
// Replicate r of an experiment uses seed base_seed ^ r. Inside a replicate,
// independent draws (matrix, leave-out family, ...) take derive_seed(seed, {stratum, ...}).

#include "vpamp/amp.hpp"
#include "vpamp/ensembles.hpp"
#include "vpamp/nonlinearity.hpp"
#include "vpamp/parallel.hpp"
#include "vpamp/ridge.hpp"
#include "vpamp/state_evolution.hpp"
#include "vpamp/stats.hpp"
#include "vpamp/trace_diag.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace vpamp {

enum class ExperimentKind {
    AmpEntrywise,
    AmpAveraged,
    LooRate,
    OnsagerGap,
    TraceDecay,
    RidgeFigure1,
    RidgeAmpConvergence,
};

std::string experiment_name(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

/// Named test functions, all pseudo-Lipschitz of order <= 2. ProductWithTruth
/// is x * y with y the paired reference value: z^(1)_k for AMP, mu0_j for ridge.
struct TestFunction {
    enum class Kind { Square, Abs, ProductWithTruth, Huber, Constant };
    Kind kind = Kind::Square;
    double delta = 1.0; // Huber
    double value = 1.0; // Constant

    double operator()(double x, double y = 0.0) const;
    /// "square", "abs", "product_with_truth", "huber(1)", "constant(1)".
    std::string name() const;
    static TestFunction parse(const std::string& text);
};

/// Recipe for a variance profile at any size. Rectangular profiles have
/// m = round(aspect * n) rows.
struct ProfileSpec {
    enum class Type { Constant, Block, AbsGaussian, Csv };
    Type type = Type::Constant;
    ProfileKind kind = ProfileKind::Symmetric;
    double value = 1.0;
    /// Block: group fractions (summing to 1) and the value of each block.
    std::vector<double> row_fractions;
    std::vector<double> col_fractions; // empty: same as row_fractions
    Matrix block_values;
    double mean = 1.0;
    double sd = 1.0;
    std::uint64_t seed = 1;
    std::filesystem::path csv;
    double aspect = 0.5;

    VarianceProfile build(Index n) const;
};

/// z^(0) (or v^(0)) recipe.
struct InitSpec {
    enum class Type { Linspace, Constant, Gaussian };
    Type type = Type::Linspace;
    double low = -1.0;
    double high = 1.0;
    double value = 0.0;
    double scale = 1.0;
    std::uint64_t seed = 7;

    Vector build(Index n) const;
};

enum class OnsagerChoice { DataDriven, StateEvolution };

struct AmpSpec {
    ProfileSpec profile;
    Nonlinearity f = Nonlinearity(ScaledTanh{});
    InitSpec z0;
    OnsagerChoice onsager = OnsagerChoice::StateEvolution;
};

struct RidgeSpec {
    ProfileSpec profile;
    double mu0 = 1.0;
    std::uint64_t xi_seed = 2;
    std::vector<double> lambdas;
    std::vector<EntryDistribution> designs{EntryDistribution::Gaussian};
    /// Coordinate j whose mean and variance are compared.
    Index coordinate = 0;
    /// Lambda for the single-lambda runs (AMP convergence, fixed point).
    double lambda = 1.0;

    RidgeProblem problem(Index n, double lambda) const;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::AmpEntrywise;
    std::string name;
    AmpSpec amp;
    RidgeSpec ridge;
    std::vector<Index> sizes{500};
    int horizon = 3;
    int replicates = 100;
    std::uint64_t base_seed = 1;
    std::vector<TestFunction> psi{TestFunction{}};
    /// Entrywise: number of tested coordinates, spread evenly over [0, n).
    int coordinates = 10;
    /// KS level before the Bonferroni split.
    double alpha = 0.01;
    unsigned threads = 0; // 0: AMP_THREADS
    int quadrature_order = kDefaultQuadratureOrder;

    /// Checks B >= 2 and the per-kind requirements. Throws DomainError.
    void validate() const;
};

/// Replicate r runs body(r, base_seed ^ r). Results are stored by r. Failures
/// are collected and rethrown as one Error naming every failed seed.
template <typename R>
std::vector<R> run_replicates(int replicates, std::uint64_t base_seed,
                              const std::function<R(int, std::uint64_t)>& body, unsigned threads = 0);

/// One line of the result CSV.
struct ResultRow {
    std::string experiment;
    Index n = 0;
    std::string k_or_avg; // coordinate index, "avg", or a label such as "lambda=0.1"
    std::string psi;
    SummaryStats stats;
};

struct ExperimentResult {
    std::string experiment;
    std::vector<ResultRow> rows;
    /// Pass/fail of the experiment's own acceptance rule.
    bool pass = true;
    std::vector<std::string> messages;
    /// Extra CSV tables: file stem -> (header, rows).
    struct Table {
        std::string stem;
        std::vector<std::string> header;
        std::vector<std::vector<std::string>> rows;
    };
    std::vector<Table> tables;
    std::uint64_t base_seed = 0;
    int replicates = 0;
};

/// Theory value E psi(X^(s)_k, X^(1)_k) under the state evolution of a symmetric path, s >= 1.
/// Every named psi has a closed form in the SE covariance.
double se_expectation(const SePath& se, int s, Index k, const TestFunction& psi);

/// Empirical mean over replicates of psi(z^(s)_k, z^(1)_k) against se_expectation.
SummaryStats entrywise_compare(const std::vector<AmpTrajectory>& trajectories, const SePath& se, Index k, int s,
                               const TestFunction& psi);

/// Per replicate n^{-1} sum_k psi(z^(s)_k, z^(1)_k); summarized against n^{-1} sum_k E psi.
SummaryStats averaged_compare(const std::vector<AmpTrajectory>& trajectories, const SePath& se, int s,
                              const TestFunction& psi);

ExperimentResult run_amp_entrywise(const ExperimentConfig& config);
ExperimentResult run_amp_averaged(const ExperimentConfig& config);
ExperimentResult run_loo_rate(const ExperimentConfig& config);
ExperimentResult run_onsager_gap(const ExperimentConfig& config);
ExperimentResult run_trace_decay(const ExperimentConfig& config);
ExperimentResult run_ridge_figure1(const ExperimentConfig& config);
ExperimentResult run_ridge_amp_convergence(const ExperimentConfig& config);

/// Dispatch on config.kind.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Columns (experiment, n, k_or_avg, psi, empirical, stderr, theory, zscore).
void write_result_csv(const ExperimentResult& result, const std::filesystem::path& path);
/// Writes every extra table as <dir>/<stem>.csv; returns the paths.
std::vector<std::filesystem::path> write_tables(const ExperimentResult& result, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------

template <typename R>
std::vector<R> run_replicates(int replicates, std::uint64_t base_seed,
                              const std::function<R(int, std::uint64_t)>& body, unsigned threads) {
    require_domain(replicates >= 1, "replicate count must be positive");
    std::vector<std::optional<R>> slots(static_cast<std::size_t>(replicates));
    std::vector<std::string> failures(static_cast<std::size_t>(replicates));
    parallel_for(
        slots.size(),
        [&](std::size_t r) {
            const std::uint64_t seed = base_seed ^ static_cast<std::uint64_t>(r);
            try {
                slots[r].emplace(body(static_cast<int>(r), seed));
            } catch (const std::exception& e) {
                failures[r] = "seed " + std::to_string(seed) + ": " + e.what();
            }
        },
        threads == 0 ? thread_count() : threads);
    std::string report;
    int failed = 0;
    for (const auto& f : failures) {
        if (f.empty()) continue;
        ++failed;
        report += "\n  " + f;
    }
    if (failed > 0) throw Error(std::to_string(failed) + " of " + std::to_string(replicates) + " replicates failed:" + report);
    std::vector<R> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

} // namespace vpamp
