#include "odelay/cli/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace odelay::cli {

namespace {

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

std::string to_text(const Cell& c) {
    struct Visitor {
        std::string operator()(double v) const { return format_real(v); }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
        std::string operator()(const std::string& v) const { return csv_escape(v); }
    };
    return std::visit(Visitor{}, c);
}

nlohmann::ordered_json to_json(const Fields& fields) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (const auto& [key, cell] : fields) {
        std::visit([&obj, &k = key](const auto& v) { obj[k] = v; }, cell);
    }
    return obj;
}

template <typename Fn>
void for_each_field(const ReportRow& row, Fn&& fn) {
    for (const Fields* group : {&row.inputs, &row.outputs, &row.verdicts, &row.margins}) {
        for (const auto& field : *group) {
            fn(field.first, field.second);
        }
    }
}

} // namespace

void ReportRow::verdict(const std::string& key, bool ok, double margin) {
    verdicts.emplace_back(key, ok);
    margins.emplace_back("margin_" + key, margin);
}

void check_finite(const ReportRow& row) {
    for_each_field(row, [&row](const std::string& key, const Cell& cell) {
        if (const double* d = std::get_if<double>(&cell); d != nullptr && !std::isfinite(*d)) {
            throw std::logic_error(row.analysis + ": field " + key + " is not finite");
        }
    });
}

void write_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
    std::vector<std::string> columns{"analysis"};
    std::unordered_map<std::string, std::size_t> index{{"analysis", 0}};
    for (const ReportRow& row : rows) {
        for_each_field(row, [&](const std::string& key, const Cell&) {
            if (index.emplace(key, columns.size()).second) {
                columns.push_back(key);
            }
        });
    }

    out << kCsvVersionLine << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out << (i ? "," : "") << columns[i];
    }
    out << '\n';

    std::vector<std::string> line(columns.size());
    for (const ReportRow& row : rows) {
        std::fill(line.begin(), line.end(), std::string{});
        line[0] = csv_escape(row.analysis);
        for_each_field(row, [&](const std::string& key, const Cell& cell) { line[index.at(key)] = to_text(cell); });
        for (std::size_t i = 0; i < line.size(); ++i) {
            out << (i ? "," : "") << line[i];
        }
        out << '\n';
    }
}

void write_json(const std::vector<ReportRow>& rows, std::ostream& out) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const ReportRow& row : rows) {
        nlohmann::ordered_json obj;
        obj["analysis"] = row.analysis;
        obj["inputs"] = to_json(row.inputs);
        obj["outputs"] = to_json(row.outputs);
        obj["verdicts"] = to_json(row.verdicts);
        obj["margins"] = to_json(row.margins);
        arr.push_back(std::move(obj));
    }
    out << arr.dump(2) << '\n';
}

void write_report(const std::vector<ReportRow>& rows, Format format, std::ostream& out) {
    for (const ReportRow& row : rows) {
        check_finite(row);
    }
    if (format == Format::Json) {
        write_json(rows, out);
    } else {
        write_csv(rows, out);
    }
}

} // namespace odelay::cli
