#pragma once

// =============================================================================
// Report rows and their CSV / JSON serializations
// =============================================================================

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace odelay::cli {

using Cell = std::variant<double, std::int64_t, bool, std::string>;
using Fields = std::vector<std::pair<std::string, Cell>>;

struct ReportRow {
    std::string analysis;
    Fields inputs;
    Fields outputs;
    Fields verdicts;  ///< booleans
    Fields margins;   ///< the numbers that decided each verdict

    void input(std::string key, Cell v) { inputs.emplace_back(std::move(key), std::move(v)); }
    void output(std::string key, Cell v) { outputs.emplace_back(std::move(key), std::move(v)); }
    /// Records verdict `key` together with margin_`key`.
    void verdict(const std::string& key, bool ok, double margin);
};

enum class Format { Csv, Json };

/// First line of every CSV report.
inline constexpr const char* kCsvVersionLine = "# odelay-lab v1";

/// CSV: version line, header (union of keys in order of first appearance),
/// one line per row; absent cells stay empty. Reals use %.17g.
void write_csv(const std::vector<ReportRow>& rows, std::ostream& out);

/// JSON array of {analysis, inputs, outputs, verdicts, margins} objects.
void write_json(const std::vector<ReportRow>& rows, std::ostream& out);

void write_report(const std::vector<ReportRow>& rows, Format format, std::ostream& out);

/// Throws std::logic_error naming the field when any real is not finite.
void check_finite(const ReportRow& row);

} // namespace odelay::cli
