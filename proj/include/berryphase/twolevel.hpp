#pragma once

// Analytic two-level models: the planar real spin-1/2 Hamiltonian, its loop
// phase factor from discrete overlap products, the gauge-transformed phase,
// the vanishing field strength for real eigenstates and the complex
// monopole loop used to validate the overlap engine.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "berryphase/error.hpp"
#include "berryphase/numerics.hpp"

namespace berryphase::twolevel {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDegeneracyGap = 1e-9;

/// Closed loop theta(s) = start_angle + 2*pi*winding*s/samples, s = 0..samples,
/// with the final point identified with the first.
struct PlanarLoop {
    int winding = 1;
    double radius = 1.0;
    int samples = 256;
    double start_angle = 0.0;

    void validate() const {
        if (samples < 8) throw InputError("PlanarLoop: samples must be >= 8");
        if (!(radius > 0.0)) throw InputError("PlanarLoop: radius must be > 0");
        if (!std::isfinite(start_angle)) throw InputError("PlanarLoop: start_angle not finite");
    }

    double angle(int s) const {
        return start_angle + 2.0 * kPi * static_cast<double>(winding) * static_cast<double>(s) /
                                 static_cast<double>(samples);
    }
};

/// lambda_n(theta) = n * k * theta.
struct GaugeFunction {
    double n = 0.5;
    int k = 1;

    double operator()(double theta) const { return n * static_cast<double>(k) * theta; }
    double derivative() const { return n * static_cast<double>(k); }
};

/// [[R3, R1], [R1, -R3]] with R3 = radius*cos(theta), R1 = radius*sin(theta).
inline SymmetricMatrix planar_hamiltonian(double theta, double radius) {
    if (!(radius > 0.0))
        throw DegeneracyError("planar_hamiltonian: radius <= 0 is the singular point R = 0");
    const double r3 = radius * std::cos(theta);
    const double r1 = radius * std::sin(theta);
    Matrix h(2, 2);
    h << r3, r1, r1, -r3;
    return SymmetricMatrix(std::move(h));
}

/// Spin-along-field eigenstate (cos theta/2, sin theta/2) on the continuous
/// branch; theta is not reduced, so theta + 2*pi returns the negated state.
inline Vector planar_eigenstate(double theta) {
    Vector v(2);
    v << std::cos(0.5 * theta), std::sin(0.5 * theta);
    return v;
}

/// Product of successive overlaps around a closed list of real states; the
/// last state is closed against the first.
inline double overlap_loop_product(std::span<const Vector> states) {
    if (states.size() < 2) throw InputError("overlap_loop_product: need at least two states");
    double product = 1.0;
    for (std::size_t s = 1; s < states.size(); ++s)
        product *= states[s - 1].dot(states[s]);
    product *= states.back().dot(states.front());
    return product;
}

/// Eigenvectors of `level` sampled around the loop (s = 0..samples-1).
inline std::vector<Vector> planar_loop_states(const PlanarLoop& loop, int level = 0) {
    loop.validate();
    if (level < 0 || level > 1) throw InputError("planar_loop_states: level must be 0 or 1");
    std::vector<Vector> states;
    states.reserve(static_cast<std::size_t>(loop.samples));
    for (int s = 0; s < loop.samples; ++s) {
        const EigenSystem es = eig_sym(planar_hamiltonian(loop.angle(s), loop.radius));
        if (es.values[1] - es.values[0] < kDegeneracyGap)
            throw DegeneracyError("loop_phase_factor: degenerate levels on the loop");
        states.push_back(es.vectors.col(level));
    }
    return states;
}

/// Discrete overlap product around the planar loop. Its sign is the phase
/// factor; its magnitude approaches 1 as samples grows.
inline double loop_phase_factor(const PlanarLoop& loop, int level = 0) {
    const std::vector<Vector> states = planar_loop_states(loop, level);
    return overlap_loop_product(states);
}

/// gamma = -(lambda(theta_end) - lambda(theta_start)) = -2*pi*n*k*winding.
inline double gauge_phase(const GaugeFunction& g, const PlanarLoop& loop) {
    return -(g.n * static_cast<double>(g.k) * static_cast<double>(loop.winding)) * (2.0 * kPi) + 0.0;
}

/// Same phase by integrating the transformed connection i<n'|d/dtheta n'>
/// around the loop, with |n'> = exp(i lambda) (cos theta/2, sin theta/2).
/// Midpoint rule on the loop's samples, central differences for the derivative.
inline double gauge_phase_by_integration(const GaugeFunction& g, const PlanarLoop& loop) {
    loop.validate();
    using C = std::complex<double>;
    const auto state = [&](double theta) {
        const C phase = std::polar(1.0, g(theta));
        const Vector v = planar_eigenstate(theta);
        return Eigen::Vector2cd(phase * v[0], phase * v[1]);
    };
    const double dtheta = loop.angle(1) - loop.angle(0);
    const double h = 1e-4;
    double gamma = 0.0;
    for (int s = 0; s < loop.samples; ++s) {
        const double mid = loop.angle(s) + 0.5 * dtheta;
        const Eigen::Vector2cd psi = state(mid);
        const Eigen::Vector2cd dpsi = (state(mid + h) - state(mid - h)) / (2.0 * h);
        const C connection = C(0.0, 1.0) * psi.dot(dpsi);
        gamma += connection.real() * dtheta;
    }
    return gamma;
}

using MatrixFamily = std::function<SymmetricMatrix(const Eigen::Vector3d&)>;

/// Real 3-parameter family embedding the planar model: R -> [[R3, R1], [R1, -R3]].
/// R2 would multiply the imaginary Pauli matrix and is dropped.
inline MatrixFamily planar_family() {
    return [](const Eigen::Vector3d& r) {
        Matrix h(2, 2);
        h << r[2], r[0], r[0], -r[2];
        return SymmetricMatrix(std::move(h));
    };
}

namespace detail {

inline Matrix central_difference(const MatrixFamily& family, const Eigen::Vector3d& point, int axis,
                                 double h) {
    Eigen::Vector3d plus = point, minus = point;
    plus[axis] += h;
    minus[axis] -= h;
    return (family(plus).matrix() - family(minus).matrix()) / (2.0 * h);
}

}  // namespace detail

/// Gradient of H along each parameter axis, Richardson-extrapolated from
/// step h and h/2.
inline std::array<Matrix, 3> hamiltonian_gradient(const MatrixFamily& family,
                                                  const Eigen::Vector3d& point, double h) {
    std::array<Matrix, 3> grad;
    for (int axis = 0; axis < 3; ++axis) {
        const Matrix coarse = detail::central_difference(family, point, axis, h);
        const Matrix fine = detail::central_difference(family, point, axis, 0.5 * h);
        grad[static_cast<std::size_t>(axis)] = (4.0 * fine - coarse) / 3.0;
    }
    return grad;
}

/// Field strength of level n from the sum over states, evaluated in complex
/// arithmetic; returns its imaginary part, which vanishes for real families.
///
/// step <= 0 selects h = 1e-5 * |point|. Throws DegeneracyError when the level
/// gap is too small to exclude a crossing within the finite-difference stencil.
inline Eigen::Vector3d berry_field_real(const MatrixFamily& family, const Eigen::Vector3d& point,
                                        int level, double step = 0.0) {
    const double h = step > 0.0 ? step : 1e-5 * std::max(point.norm(), 1e-300);
    const SymmetricMatrix h0 = family(point);
    if (level < 0 || level >= h0.dim()) throw InputError("berry_field_real: level out of range");
    const EigenSystem es = eig_sym(h0);
    const auto grad = hamiltonian_gradient(family, point, h);

    double gradient_scale = 0.0;
    for (const Matrix& g : grad) gradient_scale += g.norm();
    const double stencil_shift = 2.0 * h * gradient_scale;

    using C = std::complex<double>;
    Eigen::Vector3cd field = Eigen::Vector3cd::Zero();
    const Eigen::VectorXcd n = es.vectors.col(level).cast<C>();
    for (Eigen::Index m = 0; m < h0.dim(); ++m) {
        if (m == level) continue;
        const double gap = es.values[m] - es.values[level];
        if (std::abs(gap) <= std::max(stencil_shift, kDegeneracyGap))
            throw DegeneracyError("berry_field_real: degeneracy within the finite-difference step");
        const Eigen::VectorXcd mv = es.vectors.col(m).cast<C>();
        Eigen::Vector3cd nm, mn;
        for (int axis = 0; axis < 3; ++axis) {
            const Eigen::MatrixXcd dh = grad[static_cast<std::size_t>(axis)].cast<C>();
            nm[axis] = n.dot(dh * mv);
            mn[axis] = mv.dot(dh * n);
        }
        field -= nm.cross(mn) / (gap * gap);
    }
    return field.imag();
}

/// Berry phase of the spin-aligned level of H = -sigma.n around the circle of
/// constant polar angle cone_angle, traversed with increasing azimuth.
/// Converges to -pi*(1 - cos(cone_angle)); the value is reported in (-2*pi, 0].
inline double monopole_phase(double cone_angle, int samples) {
    if (!(cone_angle >= 0.0 && cone_angle <= kPi))
        throw InputError("monopole_phase: cone angle outside [0, pi]");
    if (samples < 8) throw InputError("monopole_phase: samples must be >= 8");
    if (cone_angle == 0.0) return 0.0;
    if (cone_angle == kPi) return -2.0 * kPi;

    using C = std::complex<double>;
    const double st = std::sin(cone_angle), ct = std::cos(cone_angle);
    std::vector<Eigen::Vector2cd> states;
    states.reserve(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        const double phi = 2.0 * kPi * static_cast<double>(s) / static_cast<double>(samples);
        const C off(st * std::cos(phi), -st * std::sin(phi));
        Eigen::Matrix2cd h;
        h << -ct, -off, -std::conj(off), ct;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(h);
        states.push_back(solver.eigenvectors().col(0));
    }
    C product(1.0, 0.0);
    for (std::size_t s = 0; s < states.size(); ++s)
        product *= states[s].dot(states[(s + 1) % states.size()]);
    double gamma = -std::arg(product);
    if (gamma > 1e-12) gamma -= 2.0 * kPi;
    return gamma;
}

}  // namespace berryphase::twolevel
