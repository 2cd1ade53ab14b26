#pragma once

// Parallel evaluation of (U, g, path) cells. Each cell is one sequential
// berry_factor call; workers pull cells from a shared counter and write into
// a preallocated slot, and the caller sees the rows sorted by (U, g, path)
// whatever the scheduling was.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "berryphase/berry.hpp"
#include "berryphase/config.hpp"
#include "berryphase/report.hpp"

namespace berryphase {

struct SweepCell {
    double U = 0.0;
    double g = 0.0;
    std::string path;

    friend bool operator<(const SweepCell& a, const SweepCell& b) {
        return std::tie(a.U, a.g, a.path) < std::tie(b.U, b.g, b.path);
    }
};

/// Evaluates one cell, mapping library errors to a status string.
inline PathOutcome evaluate_cell(const RunConfig& cfg, const SweepCell& cell) {
    PathOutcome out{cell.U, cell.g, cell.path, "ok", {}, std::nullopt};
    try {
        ModelParams p = cfg.model;
        p.U = cell.U;
        p.g = cell.g;
        out.result = berry_factor(p, cfg.lattice(), cfg.resolve_path(cell.path), cfg.berry_options());
    } catch (const PathFailure& e) {
        out.status = "scf_failure";
        out.message = e.what();
    } catch (const ConvergenceError& e) {
        out.status = "scf_failure";
        out.message = e.what();
    } catch (const ResolutionError& e) {
        out.status = "resolution_failure";
        out.message = e.what();
    } catch (const Error& e) {
        out.status = "error";
        out.message = e.what();
    }
    if (out.result) out.result->states.clear();
    return out;
}

inline std::vector<SweepCell> sweep_cells(const RunConfig& cfg) {
    const std::vector<double> us = cfg.sweep_U.empty() ? std::vector<double>{cfg.model.U} : cfg.sweep_U;
    const std::vector<double> gs = cfg.sweep_g.empty() ? std::vector<double>{cfg.model.g} : cfg.sweep_g;
    const std::vector<std::string> paths =
        cfg.sweep_paths.empty() ? std::vector<std::string>{cfg.path} : cfg.sweep_paths;
    std::vector<SweepCell> cells;
    for (double u : us)
        for (double g : gs)
            for (const std::string& p : paths) cells.push_back({u, g, p});
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end(),
                            [](const SweepCell& a, const SweepCell& b) { return !(a < b) && !(b < a); }),
                cells.end());
    return cells;
}

inline std::vector<PathOutcome> run_sweep(const RunConfig& cfg, int workers) {
    const std::vector<SweepCell> cells = sweep_cells(cfg);
    if (cells.empty()) throw InputError("sweep: empty parameter grid");
    std::vector<PathOutcome> results(cells.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
            results[i] = evaluate_cell(cfg, cells[i]);
    };
    const int n = std::clamp(workers, 1, static_cast<int>(cells.size()));
    std::vector<std::thread> pool;
    for (int w = 1; w < n; ++w) pool.emplace_back(work);
    work();
    for (std::thread& t : pool) t.join();
    return results;
}

/// For each (path, g): U values where the factor changes between neighbouring
/// successful cells, with the midpoint as the boundary estimate.
inline std::vector<std::string> sign_boundary_summary(const std::vector<PathOutcome>& rows) {
    std::map<std::pair<std::string, double>, std::vector<const PathOutcome*>> groups;
    for (const PathOutcome& r : rows)
        if (r.result) groups[{r.path, r.g}].push_back(&r);
    std::vector<std::string> out;
    for (auto& [key, members] : groups) {
        std::sort(members.begin(), members.end(), [](auto* a, auto* b) { return a->U < b->U; });
        std::string line = "sign_boundary path=" + key.first + " g=" + format_double(key.second);
        bool any = false;
        for (std::size_t i = 1; i < members.size(); ++i) {
            const int f0 = members[i - 1]->result->factor;
            const int f1 = members[i]->result->factor;
            if (f0 == f1) continue;
            const double u0 = members[i - 1]->U, u1 = members[i]->U;
            line += " U_estimate=" + format_double(0.5 * (u0 + u1)) + " bracket=[" + format_double(u0) + "," +
                    format_double(u1) + "] factors=" + std::to_string(f0) + "->" + std::to_string(f1);
            any = true;
        }
        if (!any) line += " none";
        out.push_back(line);
    }
    return out;
}

/// BERRYPHASE_WORKERS overrides the configured worker count when set to a
/// positive integer.
inline int resolve_workers(int configured) {
    if (const char* env = std::getenv("BERRYPHASE_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
        throw InputError(std::string("BERRYPHASE_WORKERS must be a positive integer, got '") + env + "'");
    }
    return configured;
}

}  // namespace berryphase
