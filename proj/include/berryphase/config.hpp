#pragma once

// Run configuration: a line-oriented `key = value` file. Values are numbers,
// bare words, or JSON arrays (for site lists and sweep grids). `#` starts a
// comment. Command-line flags are applied afterwards through the same
// set_key() entry point, so every flag overrides the file.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "berryphase/berry.hpp"
#include "berryphase/error.hpp"
#include "berryphase/lattice.hpp"
#include "berryphase/meanfield.hpp"

namespace berryphase {

enum class OutputFormat { csv, json };

struct RunConfig {
    ModelParams model;
    int lx = 4;
    int ly = 4;
    std::string path = "triangle";
    std::vector<Site> path_sites;
    int steps_per_segment = 33;
    ScfOptions scf;
    double degeneracy_fraction = 0.2;
    double resolution_floor = 0.1;
    bool bidirectional = true;
    std::vector<double> sweep_U;
    std::vector<double> sweep_g;
    std::vector<std::string> sweep_paths;
    std::string output;
    OutputFormat format = OutputFormat::csv;
    int workers = 1;
    std::uint64_t seed = 0;
    bool wide = false;

    LatticeGeometry lattice() const { return LatticeGeometry(lx, ly); }

    /// Explicit site list when one was given, otherwise the named catalog path.
    PathSpec path_spec() const { return resolve_path(path); }

    PathSpec resolve_path(const std::string& name) const {
        if (name == path && !path_sites.empty()) {
            PathSpec p{name, path_sites, steps_per_segment};
            p.validate(lattice());
            return p;
        }
        return path_catalog(name, steps_per_segment);
    }

    BerryOptions berry_options() const {
        BerryOptions o;
        o.scf = scf;
        o.degeneracy_fraction = degeneracy_fraction;
        o.resolution_floor = resolution_floor;
        o.bidirectional = bidirectional;
        return o;
    }

    void set_key(const std::string& key, const std::string& raw);

    void validate() const {
        LatticeGeometry lat = lattice();
        model.validate(lat);
        if (steps_per_segment < 8) throw InputError("config: steps_per_segment must be >= 8");
        if (workers < 1) throw InputError("config: workers must be >= 1");
        if (scf.tol <= 0.0 || scf.max_iter < 1) throw InputError("config: invalid SCF options");
        if (!(degeneracy_fraction > 0.0 && degeneracy_fraction < 1.0))
            throw InputError("config: degeneracy_fraction must lie in (0, 1)");
        path_spec().validate(lat);
        for (const std::string& name : sweep_paths) resolve_path(name).validate(lat);
    }

    /// Canonical JSON of everything that affects results (workers and output
    /// location excluded).
    nlohmann::json canonical() const;

    std::uint64_t hash() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw InputError("");
        return x;
    } catch (const std::exception&) {
        throw InputError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size()) throw InputError("");
        return x;
    } catch (const std::exception&) {
        throw InputError("config: key '" + key + "' expects an integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InputError("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

inline nlohmann::json parse_json(const std::string& key, const std::string& v) {
    try {
        return nlohmann::json::parse(v);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("config: key '" + key + "' has malformed list: " + e.what());
    }
}

/// Accepts a JSON list or a single scalar.
inline std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (!v.empty() && v.front() == '[') {
        const nlohmann::json j = parse_json(key, v);
        for (const auto& x : j) {
            if (!x.is_number()) throw InputError("config: key '" + key + "' expects numbers");
            out.push_back(x.get<double>());
        }
    } else {
        out.push_back(parse_double(key, v));
    }
    return out;
}

/// Accepts a JSON list of strings, a bracketed list of bare words, or a
/// comma-separated list.
inline std::vector<std::string> parse_string_list(const std::string& key, const std::string& v) {
    std::vector<std::string> out;
    std::string body = v;
    if (!v.empty() && v.front() == '[') {
        const nlohmann::json j = nlohmann::json::parse(v, nullptr, false);
        if (!j.is_discarded()) {
            if (!j.is_array()) throw InputError("config: key '" + key + "' expects a list");
            for (const auto& x : j) {
                if (!x.is_string()) throw InputError("config: key '" + key + "' expects strings");
                out.push_back(x.get<std::string>());
            }
            return out;
        }
        if (v.back() != ']') throw InputError("config: key '" + key + "' has an unterminated list");
        body = v.substr(1, v.size() - 2);
    }
    {
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
    }
    return out;
}

inline std::vector<Site> parse_sites(const std::string& key, const std::string& v) {
    const nlohmann::json j = parse_json(key, v);
    std::vector<Site> out;
    if (!j.is_array()) throw InputError("config: key '" + key + "' expects a list of [x, y] pairs");
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
            throw InputError("config: key '" + key + "' expects a list of [x, y] integer pairs");
        out.push_back({p[0].get<int>(), p[1].get<int>()});
    }
    return out;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace detail

inline void RunConfig::set_key(const std::string& key, const std::string& raw) {
    using namespace detail;
    const std::string v = trim(raw);
    if (key == "t") model.t = parse_double(key, v);
    else if (key == "U") model.U = parse_double(key, v);
    else if (key == "g") model.g = parse_double(key, v);
    else if (key == "K") model.K = parse_double(key, v);
    else if (key == "d") model.d = parse_double(key, v);
    else if (key == "n_up") model.n_up = static_cast<int>(parse_int(key, v));
    else if (key == "n_down") model.n_down = static_cast<int>(parse_int(key, v));
    else if (key == "mode") {
        if (v == "collinear") model.mode = DecouplingMode::collinear;
        else if (v == "noncollinear") model.mode = DecouplingMode::noncollinear;
        else throw InputError("config: mode must be collinear or noncollinear, got '" + v + "'");
    } else if (key == "lx") lx = static_cast<int>(parse_int(key, v));
    else if (key == "ly") ly = static_cast<int>(parse_int(key, v));
    else if (key == "path") {
        if (!v.empty() && v.front() == '[') {
            path_sites = parse_sites(key, v);
            path = "custom";
        } else {
            path = v;
            path_sites.clear();
        }
    } else if (key == "steps_per_segment" || key == "N_s") steps_per_segment = static_cast<int>(parse_int(key, v));
    else if (key == "scf_tol") scf.tol = parse_double(key, v);
    else if (key == "scf_max_iter") scf.max_iter = static_cast<int>(parse_int(key, v));
    else if (key == "scf_mixing") scf.mixing = parse_double(key, v);
    else if (key == "degeneracy_fraction") degeneracy_fraction = parse_double(key, v);
    else if (key == "resolution_floor") resolution_floor = parse_double(key, v);
    else if (key == "bidirectional") bidirectional = parse_bool(key, v);
    else if (key == "sweep_U") sweep_U = parse_double_list(key, v);
    else if (key == "sweep_g") sweep_g = parse_double_list(key, v);
    else if (key == "sweep_paths") sweep_paths = parse_string_list(key, v);
    else if (key == "output") output = v;
    else if (key == "format") {
        if (v == "csv") format = OutputFormat::csv;
        else if (v == "json") format = OutputFormat::json;
        else throw InputError("config: format must be csv or json, got '" + v + "'");
    } else if (key == "workers") workers = static_cast<int>(parse_int(key, v));
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(key, v));
    else if (key == "wide") wide = parse_bool(key, v);
    else throw InputError("config: unknown key '" + key + "'");
}

inline nlohmann::json RunConfig::canonical() const {
    nlohmann::json sites = nlohmann::json::array();
    for (const Site& s : path_sites) sites.push_back({s.x, s.y});
    return {
        {"t", model.t},
        {"U", model.U},
        {"g", model.g},
        {"K", model.K},
        {"d", model.d},
        {"mode", to_string(model.mode)},
        {"n_up", model.n_up},
        {"n_down", model.n_down},
        {"lx", lx},
        {"ly", ly},
        {"path", path},
        {"path_sites", sites},
        {"steps_per_segment", steps_per_segment},
        {"scf_tol", scf.tol},
        {"scf_max_iter", scf.max_iter},
        {"scf_mixing", scf.mixing},
        {"degeneracy_fraction", degeneracy_fraction},
        {"resolution_floor", resolution_floor},
        {"bidirectional", bidirectional},
        {"sweep_U", sweep_U},
        {"sweep_g", sweep_g},
        {"sweep_paths", sweep_paths},
        {"format", format == OutputFormat::csv ? "csv" : "json"},
        {"seed", seed},
        {"wide", wide},
    };
}

inline std::uint64_t RunConfig::hash() const { return detail::fnv1a64(canonical().dump()); }

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Applies every `key = value` line of `text` on top of `base`.
inline RunConfig parse_config(const std::string& text, RunConfig base = {}) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        try {
            base.set_key(key, line.substr(eq + 1));
        } catch (const InputError& e) {
            throw InputError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

inline RunConfig load_config(const std::string& filename, RunConfig base = {}) {
    std::ifstream in(filename);
    if (!in) throw InputError("cannot open config file '" + filename + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

}  // namespace berryphase
