#pragma once

// Flat `section.key = value` configuration shared by every subcommand.
//
//   # comment
//   manifold.kind = hyperbolic
//   problem.p = 3
//
// Unknown keys and malformed values raise ConfigError; finalize() fills
// derived defaults and revalidates every physical gate.

#include "plap/dynamics.hpp"
#include "plap/exponents.hpp"
#include "plap/harness.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace plap {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct QueryConfig {
    double q = 4.0;
    std::optional<double> q0;  // defaults to the critical exponent
    std::optional<double> s;
    double q_max = 20.0;
    int samples = 1000;        // identity-suite draws
    int trials = 400;          // Rayleigh-quotient profiles
    std::uint64_t seed = 1;
    ThresholdMode threshold_mode = ThresholdMode::corrected;
    Eps1Exponent eps1_exponent = Eps1Exponent::as_written;
};

struct SweepConfig {
    SweepAxis axis = SweepAxis::amplitude;
    std::vector<double> values;
    int workers = 1;
};

struct CliConfig {
    RunConfig run = [] {
        RunConfig r;
        r.grid.nr = 1000;
        return r;
    }();
    std::optional<double> grid_R;  // unset: 20 x datum width
    QueryConfig query;
    std::string verify_family = "auto";
    SweepConfig sweep;
};

/// Sets one key; throws ConfigError on unknown keys or unparsable values.
void apply_setting(CliConfig& config, const std::string& key, const std::string& value);

/// Parses `key = value` lines ('#' starts a comment) onto `config`.
void apply_config_text(CliConfig& config, const std::string& text);

void apply_config_file(CliConfig& config, const std::filesystem::path& path);

/// Resolves derived defaults (grid radius, problem dimension) and validates
/// the run configuration. Throws ConfigError.
void finalize(CliConfig& config);

/// Canonical key/value strings of a run configuration, in a fixed order.
/// Re-applying them reproduces an equivalent configuration.
std::vector<std::pair<std::string, std::string>> run_config_echo(const RunConfig& run);

/// run_config_echo plus the query, verify and sweep keys.
std::vector<std::pair<std::string, std::string>> config_echo(const CliConfig& config);

/// Help text listing every key with its default.
std::string config_reference();

}  // namespace plap
