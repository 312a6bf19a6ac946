#pragma once

// Configuration-driven scenarios: JSON configs, the registry of named
// identity checks, and the simulate / verify / sweep drivers behind the CLI.
//
// Complex numbers in configs and reports are [re, im] pairs. Every check is
// a pure function of the config and its own seed (config seed XOR
// fnv1a(check name)), so reports do not depend on the thread count.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rstoda/flow.hpp"
#include "rstoda/model.hpp"

namespace rstoda {

struct CheckSettings {
    std::string name;
    std::optional<double> tolerance;  ///< registry default when empty
};

struct ScenarioConfig {
    ModelParams params;
    std::optional<PhaseState> state;  ///< explicit initial state; seeded draws otherwise
    std::uint64_t seed = 20240611;
    int draws = 4;                    ///< random states per check
    std::vector<FlowSpec> flows;
    std::vector<CheckSettings> checks;  ///< empty: every registered check
};

/// N = 3, gamma = 0.5, eta = 1, flows m = +-1, +-2, +-3 of duration 0.3 at rtol 1e-10.
ScenarioConfig default_config();
/// Missing keys keep the defaults above. Throws Error(ConfigError), or the
/// state check's Error(CollisionSingularity) for an explicit state.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ScenarioConfig& config);

struct CheckInfo {
    std::string name;
    std::string tag;  ///< equation label of the identity
    std::string description;
    double tolerance;
};
/// Sorted by name.
const std::vector<CheckInfo>& check_registry();

struct CheckRecord {
    std::string name;
    std::string tag;
    double residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    double runtime_s = 0.0;
    std::string detail;  ///< counts, or the error text when the check threw
};

struct VerificationReport {
    std::vector<CheckRecord> records;  ///< sorted by name
    std::size_t passed_count() const;
    bool all_passed() const;
    /// include_runtime = false drops the only field that varies between reruns.
    nlohmann::json to_json(bool include_runtime = true) const;
};

/// Thread cap from RSTODA_THREADS (unset, empty or invalid: hardware
/// concurrency; never below 1).
unsigned thread_limit();

/// Runs one registered check. Throws Error(ConfigError) for unknown names.
CheckRecord run_check(const ScenarioConfig& config, const CheckSettings& check);
/// Runs the enabled checks on up to `threads` threads (0: thread_limit()).
/// Errors thrown inside a check become failed records.
VerificationReport run_verify(const ScenarioConfig& config, unsigned threads = 0);

/// Copy of config with the sweep axis (gamma, eta, N, duration, rtol) set.
/// Throws Error(ConfigError).
ScenarioConfig with_axis_value(const ScenarioConfig& config, const std::string& axis, double value);

struct SweepResult {
    nlohmann::json table;
    bool all_passed = true;
};
/// One row per value with the residual and verdict of every check.
SweepResult run_sweep(const ScenarioConfig& config, const std::string& axis, const std::vector<double>& values,
                      unsigned threads = 0);

/// One CSV per configured flow in out_dir: tau, then x_i and p_i, then
/// tr L^k for k = 1..N, each as re/im columns in %.17e. Rows are written
/// and flushed sample by sample, so a failing flow leaves its partial file.
/// Returns the written paths; rethrows integration errors.
std::vector<std::filesystem::path> run_simulate(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Initial state of a scenario: the explicit one, or a seeded draw.
PhaseState scenario_state(const ScenarioConfig& config, std::uint64_t stream_seed);

}  // namespace rstoda
