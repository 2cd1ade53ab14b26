#pragma once

// Tabular output shared by all subcommands. Floats are written with 17
// significant digits ("%.17g") so that reruns can be compared byte for byte;
// integers and flags are written as integers. CSV output starts with a
// `# berryphase version=<v> config_hash=<16 hex digits>` comment line and a
// header row. JSON output is one object per row, keys in column order.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "berryphase/berry.hpp"
#include "berryphase/config.hpp"
#include "berryphase/version.hpp"

namespace berryphase {

using Cell = std::variant<std::monostate, long long, double, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    /// Extra `# ...` lines written after the data rows (CSV only).
    std::vector<std::string> trailer;

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns.size()) throw InputError("Table: row width does not match the header");
        rows.push_back(std::move(row));
    }
};

inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline std::string format_cell(const Cell& c) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(long long v) const { return std::to_string(v); }
        std::string operator()(double v) const { return format_double(v); }
        std::string operator()(const std::string& v) const { return csv_escape(v); }
    };
    return std::visit(Visitor{}, c);
}

inline std::string provenance_line(std::uint64_t config_hash) {
    return std::string("# berryphase version=") + kVersion + " config_hash=" + hash_hex(config_hash);
}

inline void write_csv(std::ostream& os, const Table& t, std::uint64_t config_hash) {
    os << provenance_line(config_hash) << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
        os << '\n';
    }
    for (const std::string& line : t.trailer) os << "# " << line << '\n';
}

/// Non-finite floats become JSON null.
inline void write_json_lines(std::ostream& os, const Table& t) {
    for (const auto& row : t.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            const Cell& c = row[i];
            if (std::holds_alternative<long long>(c)) obj[t.columns[i]] = std::get<long long>(c);
            else if (std::holds_alternative<double>(c)) {
                const double v = std::get<double>(c);
                if (std::isfinite(v)) obj[t.columns[i]] = v;
                else obj[t.columns[i]] = nullptr;
            } else if (std::holds_alternative<std::string>(c)) obj[t.columns[i]] = std::get<std::string>(c);
            else obj[t.columns[i]] = nullptr;
        }
        os << obj.dump() << '\n';
    }
}

inline void write_table(std::ostream& os, const Table& t, OutputFormat fmt, std::uint64_t config_hash) {
    if (fmt == OutputFormat::csv) write_csv(os, t, config_hash);
    else write_json_lines(os, t);
}

/// Outcome of one (U, g, path) evaluation.
struct PathOutcome {
    double U = 0.0;
    double g = 0.0;
    std::string path;
    std::string status = "ok";
    std::string message;
    std::optional<BerryResult> result;
};

inline std::vector<std::string> path_columns() {
    return {"U",        "g",           "path",           "status",   "factor",
            "raw_product", "abs_raw_product", "smooth_product", "k",     "parity",
            "switches", "max_scf_iterations", "max_scf_residual", "dynamic_phase", "message"};
}

inline std::vector<Cell> path_row(const PathOutcome& o) {
    std::vector<Cell> row{o.U, o.g, o.path, o.status};
    if (o.result) {
        const BerryResult& r = *o.result;
        row.insert(row.end(), {static_cast<long long>(r.factor), r.raw_product, std::abs(r.raw_product),
                               r.smooth_product, static_cast<long long>(r.degeneracy_count),
                               static_cast<long long>(r.parity_consistent ? 1 : 0),
                               static_cast<long long>(r.switch_steps.size()),
                               static_cast<long long>(r.max_scf_iterations), r.max_scf_residual,
                               r.dynamic_phase_integral});
    } else {
        row.resize(row.size() + 10);
    }
    row.push_back(o.message);
    return row;
}

inline Table path_table(const std::vector<PathOutcome>& outcomes) {
    Table t{path_columns(), {}, {}};
    for (const PathOutcome& o : outcomes) t.add_row(path_row(o));
    return t;
}

inline Table gap_profile_table(const BerryResult& r, bool wide) {
    Table t;
    t.columns = {"arc_position", "tau_within_segment", "segment_index", "homo", "lumo",
                 "gap",          "branch_gap",         "effective_gap", "energy"};
    const Eigen::Index levels = r.gap_profile.empty() ? 0 : r.gap_profile.front().spectrum.size();
    if (wide)
        for (Eigen::Index l = 0; l < levels; ++l) t.columns.push_back("level_" + std::to_string(l));
    for (const GapPoint& p : r.gap_profile) {
        std::vector<Cell> row{p.arc,  p.tau, static_cast<long long>(p.segment), p.homo, p.lumo, p.gap,
                              p.branch_gap ? Cell{*p.branch_gap} : Cell{}, p.effective_gap(), p.energy};
        if (wide)
            for (Eigen::Index l = 0; l < levels; ++l) row.push_back(p.spectrum[l]);
        t.add_row(std::move(row));
    }
    return t;
}

}  // namespace berryphase
