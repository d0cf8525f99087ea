#include "vpamp/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace vpamp {

namespace {

using json = nlohmann::json;

class Node {
public:
    Node(const json& j, std::string path, const std::string& source) : j_(j), path_(std::move(path)), source_(source) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(source_ + ": field '" + (path_.empty() ? "<root>" : path_) + "': " + msg);
    }

    const json& raw() const { return j_; }
    const std::string& path() const { return path_; }

    bool has(const char* key) const { return j_.contains(key); }

    Node child(const char* key) const {
        if (!j_.contains(key)) Node(j_, join(key), source_).fail("missing");
        return Node(j_.at(key), join(key), source_);
    }

    Node at(std::size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]", source_); }

    void require_object() const {
        if (!j_.is_object()) fail("expected an object");
    }
    void require_array() const {
        if (!j_.is_array()) fail("expected an array");
    }

    void allow(std::initializer_list<const char*> keys) const {
        require_object();
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
                Node(it.value(), join(it.key().c_str()), source_).fail("unknown field");
        }
    }

    double number() const {
        if (!j_.is_number()) fail("expected a number");
        return j_.get<double>();
    }
    long long integer() const {
        if (!j_.is_number_integer()) fail("expected an integer");
        return j_.get<long long>();
    }
    std::uint64_t seed() const {
        if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<long long>() >= 0))
            fail("expected a nonnegative integer");
        return j_.get<std::uint64_t>();
    }
    std::string string() const {
        if (!j_.is_string()) fail("expected a string");
        return j_.get<std::string>();
    }

    double number(const char* key, double fallback) const { return has(key) ? child(key).number() : fallback; }
    long long integer(const char* key, long long fallback) const { return has(key) ? child(key).integer() : fallback; }
    std::uint64_t seed(const char* key, std::uint64_t fallback) const { return has(key) ? child(key).seed() : fallback; }
    std::string string(const char* key, const std::string& fallback) const {
        return has(key) ? child(key).string() : fallback;
    }

    std::vector<double> numbers() const {
        require_array();
        std::vector<double> out;
        for (std::size_t i = 0; i < j_.size(); ++i) out.push_back(at(i).number());
        return out;
    }

private:
    std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& j_;
    std::string path_;
    const std::string& source_;
};

template <typename F>
auto guarded(const Node& node, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        node.fail(e.what());
    }
}

Nonlinearity parse_nonlinearity(const Node& node) {
    node.require_object();
    const std::string family = node.child("family").string();
    return guarded(node, [&]() -> Nonlinearity {
        if (family == "identity") {
            node.allow({"family"});
            return Nonlinearity(Identity{});
        }
        if (family == "affine") {
            node.allow({"family", "slope", "intercept"});
            return Nonlinearity(Affine{node.number("slope", 1.0), node.number("intercept", 0.0)});
        }
        if (family == "scaled_tanh") {
            node.allow({"family", "alpha", "beta"});
            return Nonlinearity(ScaledTanh{node.number("alpha", 1.0), node.number("beta", 1.0)});
        }
        if (family == "smooth_soft_threshold") {
            node.allow({"family", "threshold", "smoothing"});
            return Nonlinearity(SmoothSoftThreshold{node.number("threshold", 1.0), node.number("smoothing", 0.05)});
        }
        if (family == "ridge_prox_affine") {
            node.allow({"family", "lambda", "tau", "center"});
            return Nonlinearity(
                RidgeProxAffine{node.number("lambda", 1.0), node.number("tau", 1.0), node.number("center", 0.0)});
        }
        node.child("family").fail("unknown family '" + family + "'");
    });
}

ProfileSpec parse_profile(const Node& node, ProfileKind kind) {
    node.require_object();
    ProfileSpec p;
    p.kind = kind;
    const std::string type = node.child("type").string();
    if (type == "constant") {
        node.allow({"type", "value", "aspect"});
        p.type = ProfileSpec::Type::Constant;
        p.value = node.number("value", 1.0);
    } else if (type == "block") {
        node.allow({"type", "row_fractions", "col_fractions", "values", "aspect"});
        p.type = ProfileSpec::Type::Block;
        p.row_fractions = node.child("row_fractions").numbers();
        if (node.has("col_fractions")) p.col_fractions = node.child("col_fractions").numbers();
        const Node values = node.child("values");
        values.require_array();
        const std::size_t rows = values.raw().size();
        const std::size_t cols = p.col_fractions.empty() ? p.row_fractions.size() : p.col_fractions.size();
        if (rows != p.row_fractions.size()) values.fail("expected " + std::to_string(p.row_fractions.size()) + " rows");
        p.block_values.resize(static_cast<Index>(rows), static_cast<Index>(cols));
        for (std::size_t i = 0; i < rows; ++i) {
            const auto row = values.at(i).numbers();
            if (row.size() != cols) values.at(i).fail("expected " + std::to_string(cols) + " entries");
            for (std::size_t k = 0; k < cols; ++k) p.block_values(static_cast<Index>(i), static_cast<Index>(k)) = row[k];
        }
    } else if (type == "abs_gaussian") {
        node.allow({"type", "mean", "sd", "seed", "aspect"});
        p.type = ProfileSpec::Type::AbsGaussian;
        p.mean = node.number("mean", 1.0);
        p.sd = node.number("sd", 1.0);
        p.seed = node.seed("seed", 1);
    } else if (type == "csv") {
        node.allow({"type", "path", "aspect"});
        p.type = ProfileSpec::Type::Csv;
        p.csv = node.child("path").string();
    } else {
        node.child("type").fail("unknown profile type '" + type + "'");
    }
    p.aspect = node.number("aspect", 0.5);
    if (!(p.aspect > 0.0)) node.child("aspect").fail("must be positive");
    return p;
}

InitSpec parse_init(const Node& node) {
    node.require_object();
    InitSpec s;
    const std::string type = node.child("type").string();
    if (type == "linspace") {
        node.allow({"type", "low", "high"});
        s.type = InitSpec::Type::Linspace;
        s.low = node.number("low", -1.0);
        s.high = node.number("high", 1.0);
    } else if (type == "constant") {
        node.allow({"type", "value"});
        s.type = InitSpec::Type::Constant;
        s.value = node.number("value", 0.0);
    } else if (type == "gaussian") {
        node.allow({"type", "scale", "seed"});
        s.type = InitSpec::Type::Gaussian;
        s.scale = node.number("scale", 1.0);
        s.seed = node.seed("seed", 7);
    } else {
        node.child("type").fail("unknown init type '" + type + "'");
    }
    return s;
}

EntryDistribution parse_design(const Node& node) {
    const std::string d = node.string();
    if (d == "gaussian") return EntryDistribution::Gaussian;
    if (d == "rademacher") return EntryDistribution::Rademacher;
    if (d == "student_t10") return EntryDistribution::StudentT10;
    node.fail("unknown design '" + d + "'");
}

std::vector<double> parse_lambdas(const Node& node) {
    if (node.raw().is_array()) return node.numbers();
    node.allow({"log_low", "log_high", "count"});
    const double lo = node.child("log_low").number();
    const double hi = node.child("log_high").number();
    const long long count = node.child("count").integer();
    if (!(lo > 0.0 && hi >= lo)) node.fail("need 0 < log_low <= log_high");
    if (count < 1) node.child("count").fail("must be positive");
    std::vector<double> out;
    for (long long i = 0; i < count; ++i)
        out.push_back(count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(count - 1)));
    return out;
}

int line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

} // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ParsedConfig parse_config(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ":" + std::to_string(line_of(text, e.byte > 0 ? e.byte - 1 : 0)) +
                          ": malformed JSON: " + e.what());
    }
    ParsedConfig out;
    out.canonical = doc.dump();
    out.hash = fnv1a_hex(out.canonical);
    const Node root(doc, "", source);
    root.allow({"experiment", "name", "sizes", "horizon", "replicates", "seed", "threads", "psi", "coordinates",
                "alpha", "quadrature_order", "amp", "ridge"});
    ExperimentConfig& c = out.experiment;
    if (root.has("experiment")) {
        out.has_kind = true;
        guarded(root.child("experiment"),
                [&] { return c.kind = parse_experiment_kind(root.child("experiment").string()), 0; });
    }
    c.name = root.string("name", "");
    if (root.has("sizes")) {
        const Node sizes = root.child("sizes");
        sizes.require_array();
        c.sizes.clear();
        for (std::size_t i = 0; i < sizes.raw().size(); ++i) {
            const long long n = sizes.at(i).integer();
            if (n < 2) sizes.at(i).fail("must be at least 2");
            c.sizes.push_back(static_cast<Index>(n));
        }
        if (c.sizes.empty()) sizes.fail("must not be empty");
    }
    c.horizon = static_cast<int>(root.integer("horizon", c.horizon));
    c.replicates = static_cast<int>(root.integer("replicates", c.replicates));
    c.base_seed = root.seed("seed", c.base_seed);
    const long long threads = root.integer("threads", 0);
    if (threads < 0) root.child("threads").fail("must be nonnegative");
    c.threads = static_cast<unsigned>(threads);
    c.coordinates = static_cast<int>(root.integer("coordinates", c.coordinates));
    c.alpha = root.number("alpha", c.alpha);
    c.quadrature_order = static_cast<int>(root.integer("quadrature_order", c.quadrature_order));
    if (root.has("psi")) {
        const Node psi = root.child("psi");
        psi.require_array();
        c.psi.clear();
        for (std::size_t i = 0; i < psi.raw().size(); ++i) {
            const Node item = psi.at(i);
            c.psi.push_back(guarded(item, [&] { return TestFunction::parse(item.string()); }));
        }
    }
    if (root.has("amp")) {
        const Node amp = root.child("amp");
        amp.allow({"profile", "nonlinearity", "z0", "onsager"});
        if (amp.has("profile")) c.amp.profile = parse_profile(amp.child("profile"), ProfileKind::Symmetric);
        if (amp.has("nonlinearity")) c.amp.f = parse_nonlinearity(amp.child("nonlinearity"));
        if (amp.has("z0")) c.amp.z0 = parse_init(amp.child("z0"));
        const std::string mode = amp.string("onsager", "state_evolution");
        if (mode == "state_evolution")
            c.amp.onsager = OnsagerChoice::StateEvolution;
        else if (mode == "data_driven")
            c.amp.onsager = OnsagerChoice::DataDriven;
        else
            amp.child("onsager").fail("expected 'state_evolution' or 'data_driven'");
    }
    c.ridge.profile.kind = ProfileKind::Rectangular;
    if (root.has("ridge")) {
        const Node ridge = root.child("ridge");
        ridge.allow({"profile", "mu0", "xi_seed", "lambdas", "lambda", "designs", "coordinate"});
        if (ridge.has("profile")) c.ridge.profile = parse_profile(ridge.child("profile"), ProfileKind::Rectangular);
        c.ridge.mu0 = ridge.number("mu0", c.ridge.mu0);
        c.ridge.xi_seed = ridge.seed("xi_seed", c.ridge.xi_seed);
        if (ridge.has("lambdas")) c.ridge.lambdas = parse_lambdas(ridge.child("lambdas"));
        c.ridge.lambda = ridge.number("lambda", c.ridge.lambda);
        if (ridge.has("designs")) {
            const Node d = ridge.child("designs");
            d.require_array();
            c.ridge.designs.clear();
            for (std::size_t i = 0; i < d.raw().size(); ++i) c.ridge.designs.push_back(parse_design(d.at(i)));
        }
        c.ridge.coordinate = static_cast<Index>(ridge.integer("coordinate", 0));
    }
    return out;
}

ParsedConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

} // namespace vpamp
