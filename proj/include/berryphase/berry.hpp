#pragma once

// Many-body Berry phase factors of mean-field ground states transported around
// closed loops in lattice-distortion space.
//
// Each segment A -> B is traced twice by SCF continuation: forward from the
// converged A state and backward from the B state reached by that forward
// chain. At every sample the lower-energy candidate is kept, which places
// unavoidable branch switches (level crossings of the self-consistent
// solutions) where the two branches cross in energy instead of at the
// spinodal of whichever chain happened to be followed.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "berryphase/error.hpp"
#include "berryphase/lattice.hpp"
#include "berryphase/meanfield.hpp"
#include "berryphase/numerics.hpp"

namespace berryphase {

/// <a|b> for two Slater determinants with matching sector shapes.
inline double slater_overlap(const SlaterState& a, const SlaterState& b) {
    if (a.mode != b.mode || a.sectors.size() != b.sectors.size())
        throw InputError("slater_overlap: states have different sector layouts");
    double out = 1.0;
    for (std::size_t s = 0; s < a.sectors.size(); ++s) {
        const OrbitalSet& x = a.sectors[s].orbitals;
        const OrbitalSet& y = b.sectors[s].orbitals;
        if (x.rows() != y.rows() || x.cols() != y.cols())
            throw InputError("slater_overlap: mismatched occupations in sector " + std::to_string(s));
        out *= det(occupied_overlap(x, y));
    }
    return out;
}

enum class SampleGrid {
    /// Shared vertex plus interior points that skip tau = 0.5: j/N for odd N,
    /// (j + 1/2)/N for even N.
    offset,
    /// Uniform grid with an even number of steps, so tau = 0.5 is sampled.
    uniform_with_midpoint,
};

/// Sample positions within one segment, starting with the shared vertex tau = 0.
inline std::vector<double> segment_taus(int steps, SampleGrid grid) {
    if (steps < 1) throw InputError("segment_taus: steps must be >= 1");
    std::vector<double> taus;
    if (grid == SampleGrid::uniform_with_midpoint) {
        const int m = steps % 2 == 0 ? steps : steps + 1;
        for (int j = 0; j < m; ++j) taus.push_back(static_cast<double>(j) / m);
    } else if (steps % 2 == 1) {
        for (int j = 0; j < steps; ++j) taus.push_back(static_cast<double>(j) / steps);
    } else {
        taus.push_back(0.0);
        for (int j = 0; j < steps; ++j) taus.push_back((j + 0.5) / steps);
    }
    return taus;
}

struct BerryOptions {
    ScfOptions scf;
    SampleGrid grid = SampleGrid::offset;
    /// |product of non-switching overlaps| below this raises ResolutionError.
    double resolution_floor = 0.1;
    /// Degeneracy threshold as a fraction of the profile's maximum gap.
    double degeneracy_fraction = 0.2;
    /// Two SCF solutions count as the same state when |overlap| >= 1 - same_state_tol.
    double same_state_tol = 1e-6;
    /// Sublattice amplitude of the Neel seed at the path's first vertex.
    double neel_amplitude = 0.4;
    /// Off: keep the forward chain only (plain adiabatic continuation).
    bool bidirectional = true;
    /// Skip the resolution check (gap-profile scans sample the exact midpoint).
    bool check_resolution = true;
};

struct GapPoint {
    double arc = 0.0;
    int segment = 0;
    double tau = 0.0;
    double homo = 0.0;
    double lumo = 0.0;
    double gap = 0.0;
    /// |E_forward - E_backward| where the two chains disagree.
    std::optional<double> branch_gap;
    double energy = 0.0;
    Vector spectrum;

    double effective_gap() const { return branch_gap ? std::min(gap, *branch_gap) : gap; }
};

struct BerryResult {
    double raw_product = 0.0;
    int factor = 0;
    /// overlap_trace[k] = <state_{k+1} | state_k>; the last entry closes the loop.
    std::vector<double> overlap_trace;
    /// Steps where the selected state is not the SCF continuation of its predecessor.
    std::vector<int> switch_steps;
    double smooth_product = 1.0;
    std::vector<GapPoint> gap_profile;
    int degeneracy_count = 0;
    double dynamic_phase_integral = 0.0;
    bool parity_consistent = false;
    int max_scf_iterations = 0;
    double max_scf_residual = 0.0;
    double max_electron_error = 0.0;
    int scf_solves = 0;
    std::vector<SlaterState> states;
    std::vector<std::string> warnings;
};

/// Local minima of a closed-loop profile below the threshold. Runs of equal
/// values count once; a constant profile has none.
inline int count_degenerate_points(std::span<const double> gaps, std::optional<double> threshold = {},
                                   double fraction = 0.2) {
    if (gaps.empty()) throw InputError("count_degenerate_points: empty profile");
    const double top = *std::max_element(gaps.begin(), gaps.end());
    const double cut = threshold.value_or(fraction * top);
    const double eq = 1e-12 * std::max(1.0, std::abs(top));

    std::vector<double> runs;
    for (double g : gaps)
        if (runs.empty() || std::abs(g - runs.back()) > eq) runs.push_back(g);
    if (runs.size() > 1 && std::abs(runs.front() - runs.back()) <= eq) runs.pop_back();
    if (runs.size() < 2) return 0;

    int count = 0;
    const std::size_t n = runs.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double prev = runs[(i + n - 1) % n];
        const double next = runs[(i + 1) % n];
        if (runs[i] < prev && runs[i] < next && runs[i] < cut) ++count;
    }
    return count;
}

inline std::vector<double> effective_gaps(const std::vector<GapPoint>& profile) {
    std::vector<double> out;
    out.reserve(profile.size());
    for (const GapPoint& p : profile) out.push_back(p.effective_gap());
    return out;
}

inline int count_degenerate_points(const std::vector<GapPoint>& profile, std::optional<double> threshold = {},
                                   double fraction = 0.2) {
    const std::vector<double> g = effective_gaps(profile);
    return count_degenerate_points(std::span<const double>(g), threshold, fraction);
}

/// Indices of strict local minima (or maxima) of a closed-loop profile; for a
/// flat run the middle index is reported.
inline std::vector<int> local_extrema(std::span<const double> values, bool minima) {
    const int n = static_cast<int>(values.size());
    std::vector<int> out;
    if (n < 3) return out;
    const double scale = *std::max_element(values.begin(), values.end(),
                                           [](double a, double b) { return std::abs(a) < std::abs(b); });
    const double eq = 1e-12 * std::max(1.0, std::abs(scale));
    auto same = [&](int a, int b) { return std::abs(values[a] - values[b]) <= eq; };
    int start = 0;
    while (start < n && same((start + n - 1) % n, start)) ++start;
    if (start == n) return out;
    for (int i = start; i < start + n;) {
        int j = i;
        while (j + 1 < start + n && same(j % n, (j + 1) % n)) ++j;
        const double v = values[i % n];
        const double prev = values[(i + n - 1) % n];
        const double next = values[(j + 1) % n];
        const bool hit = minima ? (v < prev && v < next) : (v > prev && v > next);
        if (hit) out.push_back(((i + j) / 2) % n);
        i = j + 1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Closed-loop product of consecutive overlaps, including <first|last>.
inline double loop_overlap_product(std::span<const SlaterState> states) {
    if (states.size() < 2) throw InputError("loop_overlap_product: need at least two states");
    double out = 1.0;
    for (std::size_t k = 0; k < states.size(); ++k)
        out *= slater_overlap(states[(k + 1) % states.size()], states[k]);
    return out;
}

inline bool parity_check(const BerryResult& r) {
    return r.factor == (r.degeneracy_count % 2 == 0 ? 1 : -1);
}

namespace detail {

struct Candidate {
    std::optional<ScfResult> result;
    double energy = std::numeric_limits<double>::infinity();
};

struct Sample {
    int segment = 0;
    double tau = 0.0;
    Candidate forward;
    Candidate backward;
    bool use_backward = false;
    bool chains_agree = false;

    const ScfResult& selected() const { return use_backward ? *backward.result : *forward.result; }
};

inline Candidate run_candidate(const ModelParams& p, const LatticeGeometry& lat, const DisplacementField& f,
                               const MeanFieldDensities& seed, const ScfOptions& opts, int& solves) {
    ++solves;
    Candidate c;
    ScfResult r = scf_iterate(p, lat, f, seed, opts);
    if (r.report.converged) {
        c.energy = r.state.e_total;
        c.result = std::move(r);
    }
    return c;
}

inline bool same_state(const SlaterState& a, const SlaterState& b, double tol) {
    return std::abs(slater_overlap(a, b)) >= 1.0 - tol;
}

}  // namespace detail

/// Traces the loop and returns the overlap product and diagnostics.
///
/// Throws PathFailure when no candidate converges at a sample and
/// ResolutionError when the product of non-switching overlaps is below
/// opts.resolution_floor.
inline BerryResult berry_factor(const ModelParams& p, const LatticeGeometry& lat, const PathSpec& path,
                                const BerryOptions& opts = {}) {
    p.validate(lat);
    path.validate(lat);
    if (path.steps_per_segment < 8) throw InputError("berry_factor: steps_per_segment must be >= 8");

    const int segs = path.segments();
    std::vector<DisplacementField> vertex;
    for (const Site& s : path.sites) vertex.push_back(breathing_displacement(lat, lat.index(s), p.d));
    const std::vector<double> taus = segment_taus(path.steps_per_segment, opts.grid);
    auto field_at = [&](int seg, double tau) {
        return interpolate_segment(vertex[seg], vertex[(seg + 1) % segs], tau);
    };

    BerryResult out;
    int solves = 0;
    const MeanFieldDensities neel =
        MeanFieldDensities::neel(lat, p, lat.index(path.sites.front()), opts.neel_amplitude);
    ScfResult start = [&] {
        ++solves;
        ScfResult r = scf_iterate(p, lat, vertex[0], neel, opts.scf);
        if (!r.report.converged)
            throw PathFailure("berry_factor: SCF failed at sample 0", 0, r.report.residual);
        return r;
    }();

    std::vector<detail::Sample> samples;
    MeanFieldDensities seed = start.densities;
    for (int seg = 0; seg < segs; ++seg) {
        const std::size_t first = samples.size();
        MeanFieldDensities chain = seed;
        for (double tau : taus) {
            detail::Sample s;
            s.segment = seg;
            s.tau = tau;
            s.forward = detail::run_candidate(p, lat, field_at(seg, tau), chain, opts.scf, solves);
            if (s.forward.result) chain = s.forward.result->densities;
            samples.push_back(std::move(s));
        }
        ScfResult end = scf_iterate(p, lat, vertex[(seg + 1) % segs], chain, opts.scf);
        ++solves;
        if (!end.report.converged)
            throw PathFailure("berry_factor: SCF failed at vertex " + std::to_string((seg + 1) % segs),
                              static_cast<int>(samples.size()), end.report.residual);
        if (opts.bidirectional) {
            MeanFieldDensities back = end.densities;
            for (std::size_t k = samples.size(); k-- > first;) {
                detail::Sample& s = samples[k];
                s.backward = detail::run_candidate(p, lat, field_at(seg, s.tau), back, opts.scf, solves);
                if (s.backward.result) back = s.backward.result->densities;
            }
        }
        seed = end.densities;
    }

    for (std::size_t k = 0; k < samples.size(); ++k) {
        detail::Sample& s = samples[k];
        const bool f = s.forward.result.has_value();
        const bool b = s.backward.result.has_value();
        if (!f && !b) {
            throw PathFailure("berry_factor: SCF failed at sample " + std::to_string(k), static_cast<int>(k),
                              std::numeric_limits<double>::quiet_NaN());
        }
        if (f && b) {
            s.chains_agree = detail::same_state(s.forward.result->state, s.backward.result->state,
                                                opts.same_state_tol);
            s.use_backward = !s.chains_agree && s.backward.energy < s.forward.energy;
        } else {
            s.use_backward = b;
            if (opts.bidirectional)
                out.warnings.push_back("sample " + std::to_string(k) + ": only one chain converged");
        }
    }

    const int n = static_cast<int>(samples.size());
    double product = 1.0;
    double smooth = 1.0;
    for (int k = 0; k < n; ++k) {
        const detail::Sample& cur = samples[(k + 1) % n];
        const detail::Sample& prev = samples[k];
        const double ov = slater_overlap(cur.selected().state, prev.selected().state);
        product *= ov;
        out.overlap_trace.push_back(ov);

        // Same chain and consecutive in it: continuation by construction.
        const bool within_segment = k + 1 < n && cur.segment == prev.segment;
        bool continuous = within_segment && cur.use_backward == prev.use_backward;
        if (!continuous) {
            const DisplacementField fc = field_at(cur.segment, cur.tau);
            const detail::Candidate probe =
                detail::run_candidate(p, lat, fc, prev.selected().densities, opts.scf, solves);
            continuous = probe.result &&
                         detail::same_state(probe.result->state, cur.selected().state, opts.same_state_tol);
        }
        if (continuous)
            smooth *= ov;
        else
            out.switch_steps.push_back(k);
    }
    out.raw_product = product;
    out.smooth_product = smooth;
    out.factor = product >= 0.0 ? 1 : -1;
    out.scf_solves = solves;

    for (int k = 0; k < n; ++k) {
        const detail::Sample& s = samples[k];
        const ScfResult& r = s.selected();
        out.max_scf_iterations = std::max(out.max_scf_iterations, r.report.iterations);
        out.max_scf_residual = std::max(out.max_scf_residual, r.report.residual);
        out.max_electron_error =
            std::max(out.max_electron_error, std::abs(r.densities.n.sum() - p.electrons()));
        for (const std::string& w : r.report.warnings)
            out.warnings.push_back("sample " + std::to_string(k) + ": " + w);

        GapPoint g;
        g.segment = s.segment;
        g.tau = s.tau;
        g.arc = s.segment + s.tau;
        const FrontierLevels fl = frontier_levels(r.state);
        g.homo = fl.homo;
        g.lumo = fl.lumo;
        g.gap = fl.gap();
        g.energy = r.state.e_total;
        if (s.forward.result && s.backward.result && !s.chains_agree)
            g.branch_gap = std::abs(s.forward.energy - s.backward.energy);
        Vector spec(0);
        for (const SpinSector& sec : r.state.sectors) {
            Vector joined(spec.size() + sec.spectrum.size());
            joined << spec, sec.spectrum;
            spec = std::move(joined);
        }
        g.spectrum = std::move(spec);
        out.gap_profile.push_back(std::move(g));
        out.states.push_back(r.state);
    }

    // Cyclic trapezoid rule in arc length (one unit per segment).
    for (int k = 0; k < n; ++k) {
        const double a_prev = out.gap_profile[(k + n - 1) % n].arc - (k == 0 ? segs : 0);
        const double a_next = out.gap_profile[(k + 1) % n].arc + (k == n - 1 ? segs : 0);
        out.dynamic_phase_integral += out.gap_profile[k].energy * 0.5 * (a_next - a_prev);
    }

    out.degeneracy_count = count_degenerate_points(out.gap_profile, std::nullopt, opts.degeneracy_fraction);
    out.parity_consistent = parity_check(out);

    if (out.raw_product == 0.0) throw ResolutionError("berry_factor: overlap product vanished", 0.0);
    if (opts.check_resolution && std::abs(out.smooth_product) < opts.resolution_floor)
        throw ResolutionError("berry_factor: |product| = " + std::to_string(std::abs(out.smooth_product)) +
                                  " along continuous steps; increase steps_per_segment",
                              std::abs(out.smooth_product));
    return out;
}

}  // namespace berryphase
