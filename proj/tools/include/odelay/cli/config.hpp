#pragma once

// =============================================================================
// Analysis configuration (single JSON document)
// =============================================================================
// {
//   "comparator": {"G": S, "C_eff": F, "V_th": V},
//   "ramp":       {"m1": V/s, "command": V, "t_start": s, "initial": V},
//   "spectrum":   [{"omega": rad/s, "amplitude": V, "phase": rad}, ...],
//   "loop":       {"t_off": s, "m2": V/s, "n_cycles": n, "valley0": V},
//   "solver":     {"step": s, "refine_limit": n, "rel_tol": r},
//   "seed":       n
// }
// comparator and ramp are required; everything else has defaults. Unknown
// keys are rejected so typos do not silently fall back to defaults.
// =============================================================================

#include "odelay/loopsim.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace odelay::cli {

/// Schema or invariant violation; what() starts with the offending field path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(path) {}

    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct AnalysisConfig {
    ComparatorParams comparator;
    RampCycleInput ramp;
    InterferenceSpec spectrum;
    std::optional<LoopParams> loop;
    CycleSolverOptions solver;
    std::uint64_t seed = 0;
    std::size_t merged_lines = 0;  ///< spectrum entries folded into an earlier line
};

[[nodiscard]] AnalysisConfig parse_config_text(const std::string& text);
[[nodiscard]] AnalysisConfig parse_config(const std::filesystem::path& path);

} // namespace odelay::cli
