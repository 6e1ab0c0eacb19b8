#pragma once

// =============================================================================
// Subcommand dispatch
// =============================================================================

#include "odelay/cli/config.hpp"
#include "odelay/cli/report.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace odelay::cli {

struct RunFlags {
    std::optional<std::uint64_t> seed;  ///< overrides the config seed
    std::size_t draws = 100;            ///< sweep
    std::size_t threads = 1;            ///< sweep workers; 0 = hardware concurrency
    std::optional<double> x;            ///< aux
    std::optional<double> mu;           ///< aux
    IntegralBound b_convention = IntegralBound::Interval;
};

struct CommandResult {
    std::vector<ReportRow> rows;
    /// Set when the command produced partial rows and then failed (loop).
    std::optional<std::string> failure;
    int exit_code = 0;
};

/// Subcommand names accepted by run_subcommand.
[[nodiscard]] const std::vector<std::string>& subcommand_names();

/// Subcommands that run without a config (aux).
[[nodiscard]] bool needs_config(const std::string& name);

/// Runs `name`. `config` may be null only when needs_config(name) is false.
/// Library errors propagate; use exit_code_for to map them.
[[nodiscard]] CommandResult run_subcommand(const std::string& name, const AnalysisConfig* config,
                                           const RunFlags& flags);

/// Sweep relative tolerance for the containment verdicts.
inline constexpr double kContainmentRelTol = 1e-4;

/// Sector verdict tolerance, in units of m1.
inline constexpr double kSectorTolFactor = 1e-3;

/// 2 for configuration and argument errors, 3 for solver failures,
/// 4 for analysis preconditions and budgets, 1 otherwise.
[[nodiscard]] int exit_code_for(const std::exception& e) noexcept;

[[nodiscard]] IntegralBound parse_b_convention(const std::string& name);

} // namespace odelay::cli
