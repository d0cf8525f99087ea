// vpamp: command-line front end for the AMP, state-evolution and ridge experiments.
//
// Exit codes: 0 success, 2 acceptance check failed, 1 error.

#include "svg_plot.hpp"

#include "vpamp/config.hpp"
#include "vpamp/io.hpp"
#include "vpamp/montecarlo.hpp"
#include "vpamp/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace vpamp::cli {
namespace {

constexpr std::uint64_t kMatrixStratum = 0x4d41;

// m = 100, n = 200, mu0 = 1, V from |N(1, 1)|, xi from N(0, 1), B = 5000, 8 lambdas in [0.1, 10].
constexpr const char* kFigure1Default = R"j({
  "experiment": "ridge_figure1",
  "name": "figure1",
  "sizes": [200],
  "replicates": 5000,
  "seed": 20240101,
  "ridge": {
    "profile": {"type": "abs_gaussian", "mean": 1, "sd": 1, "seed": 1, "aspect": 0.5},
    "mu0": 1,
    "xi_seed": 2,
    "lambdas": {"log_low": 0.1, "log_high": 10, "count": 8},
    "designs": ["gaussian", "rademacher", "student_t10"],
    "coordinate": 0
  }
})j";

struct Options {
    std::string command;
    std::string config;
    std::string out;
    bool force = false;
    bool plot = false;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<int> replicates;
    std::vector<long long> sizes;
};

class Run {
public:
    Run(Options opt, ParsedConfig cfg) : opt_(std::move(opt)), cfg_(std::move(cfg)) {}

    int execute();

private:
    ExperimentConfig& c() { return cfg_.experiment; }
    fs::path path(const std::string& name) {
        outputs_.push_back(name);
        return fs::path(opt_.out) / name;
    }
    void log(const std::string& line) { std::cout << opt_.command << ": " << line << '\n'; }
    void require_kind(std::initializer_list<ExperimentKind> allowed);
    void horizon_warning();
    void emit(const ExperimentResult& r);
    void plot(const std::string& csv, const plot::PlotSpec& spec);
    void write_manifest();

    int amp_run();
    int se();
    int experiment(ExperimentKind kind);
    int ridge_fixedpoint();
    int ridge_verify();

    Options opt_;
    ParsedConfig cfg_;
    std::vector<std::string> outputs_;
    std::vector<std::string> messages_;
    bool pass_ = true;
};

void Run::require_kind(std::initializer_list<ExperimentKind> allowed) {
    if (!cfg_.has_kind) {
        c().kind = *allowed.begin();
        return;
    }
    if (std::find(allowed.begin(), allowed.end(), c().kind) == allowed.end())
        throw ConfigError("config names experiment '" + experiment_name(c().kind) + "', which command '" +
                          opt_.command + "' does not run");
}

void Run::horizon_warning() {
    for (Index n : c().sizes)
        if (c().horizon > std::log2(static_cast<double>(n)))
            std::cerr << "warning: horizon " << c().horizon << " exceeds log2(n) for n = " << n
                      << "; the theory is not established in this regime\n";
}

void Run::emit(const ExperimentResult& r) {
    write_result_csv(r, path("result.csv"));
    for (const auto& t : r.tables) path(t.stem + ".csv");
    write_tables(r, opt_.out);
    for (const auto& m : r.messages) {
        log(m);
        messages_.push_back(m);
    }
    pass_ = pass_ && r.pass;
    log(std::string(r.pass ? "PASS " : "FAIL ") + r.experiment + " (B = " + std::to_string(r.replicates) +
        ", base seed " + std::to_string(r.base_seed) + ")");
}

void Run::plot(const std::string& csv, const plot::PlotSpec& spec) {
    if (!opt_.plot) return;
    const std::string svg = fs::path(csv).replace_extension(".svg").string();
    plot::render(fs::path(opt_.out) / csv, spec, path(svg));
}

void Run::write_manifest() {
    json j;
    j["command"] = opt_.command;
    j["library_version"] = kLibraryVersion;
    j["config_source"] = opt_.config.empty() ? "builtin" : fs::path(opt_.config).filename().string();
    j["config_hash"] = cfg_.hash;
    j["config"] = json::parse(cfg_.canonical);
    json ov = json::object();
    if (opt_.seed) ov["seed"] = *opt_.seed;
    if (opt_.replicates) ov["B"] = *opt_.replicates;
    if (!opt_.sizes.empty()) ov["n"] = opt_.sizes;
    j["overrides"] = ov;
    j["seeds"] = {{"base_seed", c().base_seed},
                  {"rule", "replicate r uses base_seed xor r; inner draws use derive_seed(replicate seed, strata)"}};
    j["replicates"] = c().replicates;
    j["sizes"] = c().sizes;
    std::vector<std::string> files = outputs_;
    std::sort(files.begin(), files.end());
    files.erase(std::unique(files.begin(), files.end()), files.end());
    j["outputs"] = files;
    j["pass"] = pass_;
    j["messages"] = messages_;
    std::ofstream out(fs::path(opt_.out) / "manifest.json", std::ios::binary);
    if (!out) throw Error("cannot write manifest");
    out << j.dump(2) << '\n';
}

int Run::amp_run() {
    if (cfg_.has_kind) return experiment(c().kind);
    // no experiment kind: one trajectory at the first size
    const Index n = c().sizes.front();
    horizon_warning();
    const VarianceProfile profile = c().amp.profile.build(n);
    const auto schedule = NonlinearitySchedule::broadcast(c().amp.f, c().horizon + 1, n);
    const Vector z0 = c().amp.z0.build(n);
    const unsigned threads = c().threads > 0 ? c().threads : thread_count();
    OnsagerMode mode = onsager::DataDriven{};
    if (c().amp.onsager == OnsagerChoice::StateEvolution)
        mode = onsager::StateEvolution{std::make_shared<SePath>(
            se_symmetric(profile, schedule, z0, c().horizon, SeOptions{c().quadrature_order, threads}))};
    const auto a = sample_symmetric(profile, derive_seed(c().base_seed, {kMatrixStratum, static_cast<std::uint64_t>(n)}));
    AmpTrajectory tr = run_symmetric(profile, a, schedule, z0, c().horizon, mode);
    tr.seed = c().base_seed;
    write_trajectory_csv(tr, path("trajectory.csv"));
    write_trajectory_sidecar(tr, path("trajectory.json"));
    log("trajectory n = " + std::to_string(n) + ", T = " + std::to_string(c().horizon) + ", mode " + tr.mode);
    return 0;
}

int Run::se() {
    const Index n = c().sizes.front();
    horizon_warning();
    const unsigned threads = c().threads > 0 ? c().threads : thread_count();
    const VarianceProfile profile = c().amp.profile.build(n);
    const auto schedule = NonlinearitySchedule::broadcast(c().amp.f, c().horizon + 1, n);
    const SePath se = se_symmetric(profile, schedule, c().amp.z0.build(n), c().horizon,
                                   SeOptions{c().quadrature_order, threads});
    write_se_variance_csv(se, path("se_variance.csv"));
    write_se_csv(se, path("se_covariance.csv"));
    log("n = " + std::to_string(n) + ", T = " + std::to_string(c().horizon) + ", sigma_star = " +
        format_double(sigma_star(se, c().horizon)) + ", max PSD clip = " + format_double(se.max_clip));
    plot("se_variance.csv", {"State-evolution variance", "t", {{"variance", "", true}}, {"k"}, false, false});
    return 0;
}

int Run::experiment(ExperimentKind kind) {
    c().kind = kind;
    c().validate();
    if (kind != ExperimentKind::RidgeFigure1 && kind != ExperimentKind::RidgeAmpConvergence) horizon_warning();
    const ExperimentResult r = run_experiment(c());
    emit(r);
    switch (kind) {
    case ExperimentKind::AmpEntrywise:
        plot("result.csv", {"Entrywise empirical vs theory", "k_or_avg",
                            {{"empirical", "stderr", false}, {"theory", "", true}}, {"n", "psi"}, false, false});
        break;
    case ExperimentKind::LooRate:
        plot("loo_rate.csv", {"Leave-one-out error", "n", {{"median_max_error", "", true}}, {"t"}, true, true});
        break;
    case ExperimentKind::OnsagerGap:
        plot("onsager_gap.csv", {"Onsager-mode gap", "seed_index", {{"gap", "", false}}, {"n"}, false, true});
        break;
    case ExperimentKind::TraceDecay:
        plot("trace_cells.csv",
             {"Trace diagnostic", "n", {{"mean_abs_trace", "stderr_abs", true}}, {"case", "s", "d0"}, true, true});
        break;
    case ExperimentKind::RidgeFigure1: {
        const std::vector<plot::Series> s{{"empirical", "stderr", false}, {"theory", "", true}};
        plot("figure1_l2.csv", {"l2 estimation error", "lambda", s, {"design"}, true, false});
        plot("figure1_mean.csv", {"Mean of mu_hat_j", "lambda", s, {"design"}, true, false});
        plot("figure1_var.csv", {"Variance of mu_hat_j", "lambda", s, {"design"}, true, false});
        break;
    }
    case ExperimentKind::RidgeAmpConvergence:
        plot("ridge_amp_error.csv", {"AMP to ridge error", "t", {{"error", "", true}}, {"n", "replicate"}, false, true});
        break;
    case ExperimentKind::AmpAveraged: break;
    }
    return pass_ ? 0 : 2;
}

int Run::ridge_fixedpoint() {
    const Index n = c().sizes.front();
    const RidgeProblem problem = c().ridge.problem(n, c().ridge.lambda);
    const RidgeFixedPoint fp = solve_fixed_point(problem);
    write_fixed_point_csv(fp, path("fixed_point.csv"));
    log("m = " + std::to_string(problem.m()) + ", n = " + std::to_string(n) + ", lambda = " + format_double(fp.lambda));
    log("b* min = " + format_double(fp.b.minCoeff()) + ", max = " + format_double(fp.b.maxCoeff()));
    log("gamma min = " + format_double(fp.gamma.minCoeff()) + ", max = " + format_double(fp.gamma.maxCoeff()));
    log("residual_b = " + format_double(fp.residual_b) + ", residual_gamma = " + format_double(fp.residual_gamma));
    log("theory l2 error = " + format_double(theory_l2_error(fp, problem.mu0())));
    return 0;
}

int Run::ridge_verify() {
    const Index n = c().sizes.front();
    const RidgeProblem problem = c().ridge.problem(n, c().ridge.lambda);
    const RidgeFixedPoint fp = solve_fixed_point(problem);
    const auto cert = certify_contraction(problem, fp, 100, c().base_seed);
    struct Check {
        std::string name;
        double value;
        double limit;
        bool ok;
    };
    const std::vector<Check> checks{
        {"residual_b", fp.residual_b, 1e-9, fp.residual_b <= 1e-9},
        {"residual_gamma", fp.residual_gamma, 1e-9, fp.residual_gamma <= 1e-9},
        {"phi_ratio", cert.phi_max_ratio, cert.phi_bound, cert.phi_ok()},
        {"psi_ratio", cert.psi_max_ratio, cert.max_b + 1e-12, cert.psi_ok()},
    };
    {
        CsvWriter csv(path("verify.csv"), {"check", "value", "limit", "pass"});
        for (const auto& ch : checks) {
            csv.field(ch.name).field(ch.value).field(ch.limit).field(ch.ok ? "true" : "false");
            csv.end_row();
            log(std::string(ch.ok ? "PASS " : "FAIL ") + ch.name + " = " + format_double(ch.value) + " (limit " +
                format_double(ch.limit) + ")");
            if (!ch.ok) messages_.push_back(ch.name + " above its limit");
            pass_ = pass_ && ch.ok;
        }
    }
    write_fixed_point_csv(fp, path("fixed_point.csv"));
    experiment(ExperimentKind::RidgeAmpConvergence);
    return pass_ ? 0 : 2;
}

int Run::execute() {
    if (opt_.seed) c().base_seed = *opt_.seed;
    if (opt_.threads) c().threads = *opt_.threads;
    if (opt_.replicates) c().replicates = *opt_.replicates;
    if (!opt_.sizes.empty()) {
        c().sizes.clear();
        for (long long n : opt_.sizes) {
            require_domain(n > 1, "--n must be at least 2");
            c().sizes.push_back(static_cast<Index>(n));
        }
    }
    require_domain(!c().sizes.empty(), "no problem size given");

    const auto& cmd = opt_.command;
    using K = ExperimentKind;
    // kinds are checked before any output is written
    if (cmd == "amp-run") {
        if (cfg_.has_kind) require_kind({K::AmpEntrywise, K::AmpAveraged});
    } else if (cmd == "loo-check") {
        require_kind({K::LooRate});
    } else if (cmd == "onsager-gap") {
        require_kind({K::OnsagerGap});
    } else if (cmd == "trace-check") {
        require_kind({K::TraceDecay});
    } else if (cmd == "ridge-amp" || cmd == "ridge-verify") {
        require_kind({K::RidgeAmpConvergence});
    } else if (cmd == "figure1") {
        require_kind({K::RidgeFigure1});
    }

    const fs::path out(opt_.out);
    if (fs::exists(out)) {
        require_domain(fs::is_directory(out), "output path " + opt_.out + " is not a directory");
        require_domain(opt_.force || fs::is_empty(out),
                       "output directory " + opt_.out + " is not empty; pass --force to overwrite");
    } else {
        fs::create_directories(out);
    }

    int code = 0;
    if (cmd == "amp-run") code = amp_run();
    else if (cmd == "se") code = se();
    else if (cmd == "ridge-fixedpoint") code = ridge_fixedpoint();
    else if (cmd == "ridge-verify") code = ridge_verify();
    else code = experiment(c().kind);
    write_manifest();
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Approximate message passing with variance profiles: experiments and checks"};
    app.set_version_flag("--version", std::string(kLibraryVersion));
    app.require_subcommand(1);

    Options opt;
    const std::vector<std::pair<const char*, const char*>> commands{
        {"amp-run", "Run AMP: one exported trajectory, or the entrywise/averaged experiment named in the config"},
        {"se", "Compute the state-evolution covariances"},
        {"loo-check", "Leave-one-out representation error vs n"},
        {"onsager-gap", "Data-driven vs state-evolution Onsager gap vs n"},
        {"trace-check", "Trace diagnostic decay vs n"},
        {"ridge-fixedpoint", "Solve the ridge fixed point"},
        {"ridge-amp", "AMP-to-ridge convergence"},
        {"ridge-verify", "Fixed-point residuals, contraction certificates and AMP convergence"},
        {"figure1", "Empirical vs theoretical ridge error, mean and variance over lambda"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        auto* cfg = sub->add_option("-c,--config", opt.config, "JSON config file")->check(CLI::ExistingFile);
        if (std::string(name) != "figure1") cfg->required();
        sub->add_option("-o,--out", opt.out, "Output directory")->required();
        sub->add_flag("--force", opt.force, "Write into a non-empty output directory");
        sub->add_flag("--plot", opt.plot, "Render SVG plots from the CSVs");
        sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { opt.seed = v; }, "Base seed");
        sub->add_option_function<unsigned>("--threads", [&](const unsigned& v) { opt.threads = v; },
                                           "Worker threads (default: AMP_THREADS or logical cores)")
            ->check(CLI::PositiveNumber);
        sub->add_option_function<int>("-B,--B", [&](const int& v) { opt.replicates = v; }, "Replicates");
        sub->add_option("--n", opt.sizes, "Problem size (repeatable)");
        sub->callback([&opt, name = std::string(name)] { opt.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        ParsedConfig cfg = opt.config.empty() ? parse_config(kFigure1Default, "builtin figure1 config")
                                              : load_config(opt.config);
        Run run(opt, std::move(cfg));
        return run.execute();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace vpamp::cli

int main(int argc, char** argv) { return vpamp::cli::main(argc, argv); }
