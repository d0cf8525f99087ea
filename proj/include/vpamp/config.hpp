#pragma once

// JSON experiment configs. Errors name the offending line (syntax) or the
// dotted field path (schema), e.g. "amp.profile.values[1]: expected a number".

#include "vpamp/montecarlo.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace vpamp {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct ParsedConfig {
    ExperimentConfig experiment;
    /// Whether the document named an "experiment" kind.
    bool has_kind = false;
    /// Canonical (sorted-key, compact) dump of the document.
    std::string canonical;
    /// FNV-1a 64 of `canonical`, as 16 hex digits.
    std::string hash;
};

ParsedConfig parse_config(const std::string& text, const std::string& source = "<config>");
ParsedConfig load_config(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& bytes);

} // namespace vpamp
