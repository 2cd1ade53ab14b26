#pragma once

// Periodic square lattice of CuO2 units, breathing-mode oxygen displacements,
// Holstein coordinates and closed loops in distortion space.

#include <algorithm>
#include <array>
#include <string>
#include <utility>
#include <vector>

#include "berryphase/error.hpp"
#include "berryphase/numerics.hpp"

namespace berryphase {

/// Lattice site in integer coordinates; wrapped by the geometry on use.
struct Site {
    int x = 0;
    int y = 0;

    friend bool operator==(const Site&, const Site&) = default;
};

/// Lx x Ly periodic square lattice, row-major site index from (0,0).
class LatticeGeometry {
public:
    LatticeGeometry() : LatticeGeometry(4, 4) {}

    LatticeGeometry(int lx, int ly) : lx_(lx), ly_(ly) {
        // Four distinct nearest neighbours per site needs both extents >= 3.
        if (lx < 3 || ly < 3) throw InputError("LatticeGeometry: extents must be >= 3");
    }

    int lx() const noexcept { return lx_; }
    int ly() const noexcept { return ly_; }
    int size() const noexcept { return lx_ * ly_; }

    int index(int x, int y) const { return wrap(y, ly_) * lx_ + wrap(x, lx_); }
    int index(const Site& s) const { return index(s.x, s.y); }
    Site site(int i) const { return {i % lx_, i / lx_}; }

    /// Site reached from i by the displacement (dx, dy), with wrapping.
    int shifted(int i, int dx, int dy) const {
        const Site s = site(i);
        return index(s.x + dx, s.y + dy);
    }

    std::array<int, 4> neighbors(int i) const {
        return {shifted(i, 1, 0), shifted(i, -1, 0), shifted(i, 0, 1), shifted(i, 0, -1)};
    }

    /// +1 on the sublattice of `origin`, -1 on the other (checkerboard).
    int sublattice_sign(int i, int origin = 0) const {
        const Site a = site(i), b = site(origin);
        return ((a.x - b.x) + (a.y - b.y)) % 2 == 0 ? 1 : -1;
    }

    friend bool operator==(const LatticeGeometry&, const LatticeGeometry&) = default;

private:
    static int wrap(int v, int n) { return ((v % n) + n) % n; }

    int lx_;
    int ly_;
};

/// Oxygen displacements per site: dx is the oxygen on the +x bond of site i,
/// dy the one on the +y bond, in lattice-constant units.
struct DisplacementField {
    Vector dx;
    Vector dy;

    static DisplacementField zero(const LatticeGeometry& lat) {
        return {Vector::Zero(lat.size()), Vector::Zero(lat.size())};
    }
};

/// Breathing mode around `center`: the four surrounding oxygens move toward the
/// copper for positive amplitude.
inline DisplacementField breathing_displacement(const LatticeGeometry& lat, int center,
                                                double amplitude) {
    if (center < 0 || center >= lat.size())
        throw InputError("breathing_displacement: site index out of range");
    DisplacementField f = DisplacementField::zero(lat);
    f.dx[center] = -amplitude;
    f.dx[lat.shifted(center, -1, 0)] = amplitude;
    f.dy[center] = -amplitude;
    f.dy[lat.shifted(center, 0, -1)] = amplitude;
    return f;
}

/// R_i = dx_i - dx_{i-x} + dy_i - dy_{i-y}.
inline Vector holstein_coordinate(const LatticeGeometry& lat, const DisplacementField& f) {
    if (f.dx.size() != lat.size() || f.dy.size() != lat.size())
        throw InputError("holstein_coordinate: field size does not match lattice");
    Vector r(lat.size());
    for (int i = 0; i < lat.size(); ++i)
        r[i] = f.dx[i] - f.dx[lat.shifted(i, -1, 0)] + f.dy[i] - f.dy[lat.shifted(i, 0, -1)];
    return r;
}

/// (K/2) * sum_i (dx_i^2 + dy_i^2).
inline double elastic_energy(const DisplacementField& f, double spring_constant) {
    if (spring_constant < 0.0) throw InputError("elastic_energy: negative spring constant");
    return 0.5 * spring_constant * (f.dx.squaredNorm() + f.dy.squaredNorm());
}

/// (1 - tau) * a + tau * b.
inline DisplacementField interpolate_segment(const DisplacementField& a, const DisplacementField& b,
                                             double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw InputError("interpolate_segment: tau outside [0, 1]");
    if (a.dx.size() != b.dx.size() || a.dy.size() != b.dy.size())
        throw InputError("interpolate_segment: fields differ in size");
    if (tau == 0.0) return a;
    if (tau == 1.0) return b;
    return {(1.0 - tau) * a.dx + tau * b.dx, (1.0 - tau) * a.dy + tau * b.dy};
}

/// Closed loop through breathing configurations centred on `sites`; the last
/// segment returns to the first site.
struct PathSpec {
    std::string name;
    std::vector<Site> sites;
    int steps_per_segment = 33;

    int segments() const noexcept { return static_cast<int>(sites.size()); }

    void validate(const LatticeGeometry& lat) const {
        if (sites.size() < 3)
            throw InputError("PathSpec '" + name + "': a closed loop needs at least 3 segments");
        if (steps_per_segment < 1) throw InputError("PathSpec: steps_per_segment must be positive");
        for (std::size_t i = 0; i < sites.size(); ++i) {
            const Site& a = sites[i];
            const Site& b = sites[(i + 1) % sites.size()];
            if (lat.index(a) == lat.index(b))
                throw InputError("PathSpec '" + name + "': consecutive sites coincide");
        }
    }

    /// Same loop traversed backwards from the same starting site.
    PathSpec reversed() const {
        PathSpec out = *this;
        std::reverse(out.sites.begin() + 1, out.sites.end());
        return out;
    }

    /// Loop started at sites[shift] instead of sites[0].
    PathSpec rotated(int shift) const {
        PathSpec out = *this;
        const int n = static_cast<int>(sites.size());
        std::rotate(out.sites.begin(), out.sites.begin() + ((shift % n) + n) % n, out.sites.end());
        return out;
    }
};

struct CatalogEntry {
    std::string name;
    std::vector<Site> sites;
    std::string description;
};

/// Built-in loops. The default triangle and square keep every vertex on one
/// Neel sublattice; the nearest-neighbour variants cross sublattices.
inline const std::vector<CatalogEntry>& path_catalog_entries() {
    static const std::vector<CatalogEntry> entries = {
        {"triangle", {{0, 0}, {1, 1}, {2, 0}}, "same-sublattice triangle (0,0)->(1,1)->(2,0)"},
        {"square", {{0, 0}, {1, 1}, {2, 0}, {1, -1}}, "same-sublattice diamond around (1,0)"},
        {"triangle-nn", {{0, 0}, {1, 0}, {1, 1}}, "nearest-neighbour triangle (0,0)->(1,0)->(1,1)"},
        {"plaquette", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, "elementary plaquette (0,0)->(1,0)->(1,1)->(0,1)"},
        {"square-large", {{0, 0}, {2, 0}, {2, 2}, {0, 2}}, "next-nearest square with side 2"},
    };
    return entries;
}

inline PathSpec path_catalog(const std::string& name, int steps_per_segment = 33) {
    for (const CatalogEntry& e : path_catalog_entries())
        if (e.name == name) return PathSpec{e.name, e.sites, steps_per_segment};
    throw LookupError("path_catalog: unknown path '" + name + "'");
}

}  // namespace berryphase
