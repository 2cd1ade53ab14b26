#pragma once

// Hartree-Fock decoupling of the Holstein-Hubbard model on a periodic lattice
// and its self-consistent ground-state solver at fixed lattice distortion.
//
// Collinear mode keeps S_z conserved: two blocks (spin up, spin down) with a
// fixed filling each. Noncollinear mode works in the doubled basis
// (site up, site down) with the spin-flip Fock terms retained; all
// wavefunctions stay real, so <S+> = <S->.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "berryphase/error.hpp"
#include "berryphase/lattice.hpp"
#include "berryphase/numerics.hpp"

namespace berryphase {

enum class DecouplingMode { collinear, noncollinear };

inline const char* to_string(DecouplingMode m) {
    return m == DecouplingMode::collinear ? "collinear" : "noncollinear";
}

/// Couplings in units of the hopping t. g multiplies R_i (lattice-constant
/// units), so g*d is the energy scale of a breathing distortion of amplitude d.
struct ModelParams {
    double t = 1.0;
    double U = 6.0;
    double g = 6.0;
    double K = 0.0;
    double d = 0.1;
    DecouplingMode mode = DecouplingMode::collinear;
    int n_up = 7;
    int n_down = 8;

    int electrons() const noexcept { return n_up + n_down; }

    void validate(const LatticeGeometry& lat) const {
        if (!(t > 0.0)) throw InputError("ModelParams: t must be > 0");
        if (U < 0.0 || g < 0.0 || K < 0.0) throw InputError("ModelParams: U, g, K must be >= 0");
        if (!std::isfinite(U) || !std::isfinite(g) || !std::isfinite(K) || !std::isfinite(d))
            throw InputError("ModelParams: non-finite coupling");
        if (n_up < 0 || n_down < 0 || n_up > lat.size() || n_down > lat.size())
            throw InputError("ModelParams: filling does not fit the lattice");
    }
};

/// Site-resolved <n>, <S_z>, <S+>, <S->.
struct MeanFieldDensities {
    Vector n;
    Vector sz;
    Vector sp;
    Vector sm;

    Vector up() const { return 0.5 * n + sz; }
    Vector down() const { return 0.5 * n - sz; }

    static MeanFieldDensities zero(int sites) {
        return {Vector::Zero(sites), Vector::Zero(sites), Vector::Zero(sites), Vector::Zero(sites)};
    }

    /// Uniform charge with a checkerboard S_z of the given amplitude, positive
    /// on the sublattice of `origin`. A uniform offset makes sum S_z match the
    /// filling so that linear mixing preserves it from the first iteration.
    static MeanFieldDensities neel(const LatticeGeometry& lat, const ModelParams& p, int origin = 0,
                                   double amplitude = 0.4) {
        const int sites = lat.size();
        const double n0 = static_cast<double>(p.electrons()) / sites;
        const double offset = 0.5 * static_cast<double>(p.n_up - p.n_down) / sites;
        const double a = std::min(amplitude, std::max(0.0, 0.5 * n0 - std::abs(offset)));
        MeanFieldDensities out = zero(sites);
        out.n.setConstant(n0);
        for (int i = 0; i < sites; ++i)
            out.sz[i] = a * lat.sublattice_sign(i, origin) + offset;
        return out;
    }

    double max_abs_difference(const MeanFieldDensities& o) const {
        return std::max({(n - o.n).cwiseAbs().maxCoeff(), (sz - o.sz).cwiseAbs().maxCoeff(),
                         (sp - o.sp).cwiseAbs().maxCoeff(), (sm - o.sm).cwiseAbs().maxCoeff()});
    }

    MeanFieldDensities mixed(const MeanFieldDensities& next, double alpha) const {
        return {(1.0 - alpha) * n + alpha * next.n, (1.0 - alpha) * sz + alpha * next.sz,
                (1.0 - alpha) * sp + alpha * next.sp, (1.0 - alpha) * sm + alpha * next.sm};
    }
};

/// One-body mean-field Hamiltonian: {up, down} blocks in collinear mode, a single
/// 2N x 2N block in noncollinear mode.
struct HfHamiltonian {
    DecouplingMode mode = DecouplingMode::collinear;
    std::vector<SymmetricMatrix> blocks;
};

inline SymmetricMatrix hopping_matrix(const LatticeGeometry& lat, double t) {
    SymmetricMatrix h = SymmetricMatrix::zero(lat.size());
    for (int i = 0; i < lat.size(); ++i) {
        h.add_symmetric(i, lat.shifted(i, 1, 0), -t);
        h.add_symmetric(i, lat.shifted(i, 0, 1), -t);
    }
    return h;
}

inline HfHamiltonian build_hf_hamiltonian(const ModelParams& p, const LatticeGeometry& lat,
                                          const Vector& holstein, const MeanFieldDensities& dens) {
    const int sites = lat.size();
    if (holstein.size() != sites || dens.n.size() != sites)
        throw InputError("build_hf_hamiltonian: size mismatch with lattice");
    if (!holstein.allFinite()) throw InputError("build_hf_hamiltonian: non-finite coordinate");

    const Matrix hop = hopping_matrix(lat, p.t).matrix();
    Matrix up = hop, down = hop;
    for (int i = 0; i < sites; ++i) {
        const double common = -p.g * holstein[i] + p.U * 0.5 * dens.n[i];
        up(i, i) += common - p.U * dens.sz[i];
        down(i, i) += common + p.U * dens.sz[i];
    }

    HfHamiltonian out;
    out.mode = p.mode;
    if (p.mode == DecouplingMode::collinear) {
        out.blocks.emplace_back(std::move(up));
        out.blocks.emplace_back(std::move(down));
        return out;
    }
    if (dens.sp != dens.sm)
        throw InputError("build_hf_hamiltonian: <S+> != <S-> is not representable with real states");
    Matrix full = Matrix::Zero(2 * sites, 2 * sites);
    full.topLeftCorner(sites, sites) = up;
    full.bottomRightCorner(sites, sites) = down;
    for (int i = 0; i < sites; ++i) {
        full(i, sites + i) = -p.U * dens.sm[i];
        full(sites + i, i) = -p.U * dens.sp[i];
    }
    out.blocks.emplace_back(std::move(full));
    return out;
}

/// Occupied orbitals (columns) and the full spectrum of one block.
struct SpinSector {
    OrbitalSet orbitals;
    Vector spectrum;

    int occupied() const noexcept { return static_cast<int>(orbitals.cols()); }
    int dim() const noexcept { return static_cast<int>(spectrum.size()); }
};

/// Single Slater determinant: one sector per Hamiltonian block.
struct SlaterState {
    DecouplingMode mode = DecouplingMode::collinear;
    std::vector<SpinSector> sectors;
    double e_total = 0.0;

    const SpinSector& up() const { return sectors.at(0); }
    const SpinSector& down() const { return sectors.at(mode == DecouplingMode::collinear ? 1 : 0); }
};

struct AufbauResult {
    SlaterState state;
    double fermi_gap = std::numeric_limits<double>::infinity();
};

/// Fills the lowest levels of each block; inside a degenerate Fermi level the
/// eigensolver's column order decides.
inline AufbauResult aufbau_fill(const HfHamiltonian& h, const ModelParams& p) {
    AufbauResult out;
    out.state.mode = h.mode;
    std::vector<int> fill;
    if (h.mode == DecouplingMode::collinear)
        fill = {p.n_up, p.n_down};
    else
        fill = {p.electrons()};
    for (std::size_t b = 0; b < h.blocks.size(); ++b) {
        const EigenSystem es = eig_sym(h.blocks[b]);
        const int occ = fill[b];
        if (occ > 0 && occ < es.values.size())
            out.fermi_gap = std::min(out.fermi_gap, es.values[occ] - es.values[occ - 1]);
        out.state.sectors.push_back({es.vectors.leftCols(occ), es.values});
    }
    return out;
}

inline MeanFieldDensities densities_from_state(const SlaterState& s, int sites) {
    MeanFieldDensities out = MeanFieldDensities::zero(sites);
    if (s.mode == DecouplingMode::collinear) {
        const Vector up = s.up().orbitals.rowwise().squaredNorm();
        const Vector down = s.down().orbitals.rowwise().squaredNorm();
        out.n = up + down;
        out.sz = 0.5 * (up - down);
        return out;
    }
    const OrbitalSet& o = s.sectors.at(0).orbitals;
    if (o.rows() != 2 * sites) throw InputError("densities_from_state: sector dimension mismatch");
    const auto u = o.topRows(sites);
    const auto d = o.bottomRows(sites);
    const Vector up = u.rowwise().squaredNorm();
    const Vector down = d.rowwise().squaredNorm();
    out.n = up + down;
    out.sz = 0.5 * (up - down);
    out.sp = u.cwiseProduct(d).rowwise().sum();
    out.sm = out.sp;
    return out;
}

/// Sum of occupied levels plus the constant U*sum_i(<Sz>^2 + <S+><S-> - <n>^2/4)
/// of the decoupled Hamiltonian, plus the elastic energy.
inline double total_energy(const SlaterState& s, const MeanFieldDensities& dens, const ModelParams& p,
                           const DisplacementField& f) {
    double band = 0.0;
    for (const SpinSector& sec : s.sectors) band += sec.spectrum.head(sec.occupied()).sum();
    const double constant =
        p.U * (dens.sz.squaredNorm() + dens.sp.dot(dens.sm) - 0.25 * dens.n.squaredNorm());
    return band + constant + elastic_energy(f, p.K);
}

/// Expectation value of the model Hamiltonian in the determinant `s`, where `s`
/// diagonalises the mean-field Hamiltonian built from `in` and produces `out`.
/// Equals total_energy at self-consistency; away from it the error is second
/// order in (out - in) instead of first order.
inline double expectation_energy(const SlaterState& s, const MeanFieldDensities& in,
                                 const MeanFieldDensities& out, const ModelParams& p,
                                 const DisplacementField& f) {
    double band = 0.0;
    for (const SpinSector& sec : s.sectors) band += sec.spectrum.head(sec.occupied()).sum();
    const Vector up = out.up(), down = out.down();
    const double potential = p.U * ((0.5 * in.n - in.sz).dot(up) + (0.5 * in.n + in.sz).dot(down) -
                                    in.sm.dot(out.sp) - in.sp.dot(out.sm));
    const double hubbard = p.U * (up.dot(down) - out.sp.dot(out.sm));
    return band - potential + hubbard + elastic_energy(f, p.K);
}

struct ScfOptions {
    double tol = 1e-8;
    int max_iter = 500;
    double mixing = 0.5;
    double min_mixing = 1.0 / 64.0;
    double gap_floor = 1e-9;
};

struct ScfReport {
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
    double final_mixing = 0.0;
    std::vector<double> energy_history;
    std::vector<std::string> warnings;
};

struct ScfResult {
    SlaterState state;
    MeanFieldDensities densities;
    ScfReport report;
};

/// Fixed-point iteration without throwing; report.converged tells the outcome.
///
/// The returned state diagonalises the Hamiltonian built from the last input
/// densities; the returned densities are the ones that state produces.
inline ScfResult scf_iterate(const ModelParams& p, const LatticeGeometry& lat, const DisplacementField& f,
                             const MeanFieldDensities& init, const ScfOptions& opts = {}) {
    p.validate(lat);
    const int sites = lat.size();
    if (init.n.size() != sites || init.sz.size() != sites || init.sp.size() != sites ||
        init.sm.size() != sites)
        throw InputError("scf_solve: initial densities do not match the lattice");
    if (!(opts.mixing > 0.0 && opts.mixing <= 1.0)) throw InputError("scf_solve: mixing outside (0, 1]");

    const Vector holstein = holstein_coordinate(lat, f);
    MeanFieldDensities current = init;
    ScfResult out;
    double alpha = opts.mixing;
    bool warned_gap = false;

    for (int it = 1; it <= opts.max_iter; ++it) {
        AufbauResult fill = aufbau_fill(build_hf_hamiltonian(p, lat, holstein, current), p);
        MeanFieldDensities next = densities_from_state(fill.state, sites);
        double residual = next.max_abs_difference(current);
        // With U = 0 the Hamiltonian ignores the densities: the first fill is the fixed point.
        if (p.U == 0.0) residual = 0.0;
        const double energy = expectation_energy(fill.state, current, next, p, f);
        out.report.energy_history.push_back(energy);
        if (!warned_gap && fill.fermi_gap < opts.gap_floor) {
            out.report.warnings.push_back("ambiguous filling: Fermi-level gap below gap_floor");
            warned_gap = true;
        }

        out.report.iterations = it;
        out.report.residual = residual;
        if (residual <= opts.tol) {
            fill.state.e_total = energy;
            out.state = std::move(fill.state);
            out.densities = std::move(next);
            out.report.converged = true;
            out.report.final_mixing = alpha;
            return out;
        }

        const auto& e = out.report.energy_history;
        if (e.size() >= 3) {
            const double d1 = e[e.size() - 1] - e[e.size() - 2];
            const double d0 = e[e.size() - 2] - e[e.size() - 3];
            const double noise = 1e-12 * std::max(1.0, std::abs(e.back()));
            if (d1 * d0 < 0.0 && std::abs(d1) > std::abs(d0) && std::abs(d1) > noise)
                alpha = std::max(0.5 * alpha, opts.min_mixing);
        }
        fill.state.e_total = energy;
        out.state = std::move(fill.state);
        out.densities = next;
        current = current.mixed(next, alpha);
    }
    out.report.final_mixing = alpha;
    return out;
}

/// Self-consistent HF ground state at fixed distortion; throws ConvergenceError
/// when max_iter is exhausted.
inline ScfResult scf_solve(const ModelParams& p, const LatticeGeometry& lat, const DisplacementField& f,
                           const MeanFieldDensities& init, const ScfOptions& opts = {}) {
    ScfResult r = scf_iterate(p, lat, f, init, opts);
    if (!r.report.converged)
        throw ConvergenceError("scf_solve: no convergence after " + std::to_string(r.report.iterations) +
                                   " iterations, residual " + std::to_string(r.report.residual),
                               r.report.residual);
    return r;
}

enum class SpinChannel { up, down, global };

struct FrontierLevels {
    double homo = -std::numeric_limits<double>::infinity();
    double lumo = std::numeric_limits<double>::infinity();

    double gap() const { return lumo - homo; }
};

/// Highest occupied and lowest unoccupied level. Noncollinear states have a
/// single sector and always answer for it.
inline FrontierLevels frontier_levels(const SlaterState& s, SpinChannel channel = SpinChannel::global) {
    std::vector<const SpinSector*> sectors;
    if (channel == SpinChannel::global || s.mode == DecouplingMode::noncollinear) {
        for (const SpinSector& sec : s.sectors) sectors.push_back(&sec);
    } else {
        sectors.push_back(channel == SpinChannel::up ? &s.up() : &s.down());
    }
    FrontierLevels out;
    for (const SpinSector* sec : sectors) {
        const int occ = sec->occupied();
        if (occ > 0) out.homo = std::max(out.homo, sec->spectrum[occ - 1]);
        if (occ < sec->dim()) out.lumo = std::min(out.lumo, sec->spectrum[occ]);
    }
    return out;
}

inline double homo_lumo_gap(const SlaterState& s, SpinChannel channel = SpinChannel::global) {
    return frontier_levels(s, channel).gap();
}

}  // namespace berryphase
