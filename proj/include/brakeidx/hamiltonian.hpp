#pragma once

// Brake-symmetric Hamiltonian systems on R^{2n} with coordinates x = (p, q):
// orbit integration, brake-orbit shooting and linearized flows.

#include "brakeidx/config.hpp"
#include "brakeidx/errors.hpp"
#include "brakeidx/linalg.hpp"
#include "brakeidx/symplectic.hpp"

#include <Eigen/LU>

#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace brakeidx {

struct PolynomialTerm {
    double coeff = 0.0;
    std::vector<int> powers;  ///< exponents of (p_1..p_n, q_1..q_n)
};

struct HamiltonianSystem {
    int n = 1;
    std::string name;
    std::function<double(const Vector&)> H;
    std::function<Vector(const Vector&)> grad;
    std::function<Matrix(const Vector&)> hess;
    bool symmetric = true;  ///< claims H(N₀x) = H(x)

    Vector field(const Vector& x) const { return j0(n) * grad(x); }
};

/// H = ½|x|².
inline HamiltonianSystem harmonic(int n) {
    HamiltonianSystem s;
    s.n = n;
    s.name = "harmonic";
    s.H = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
    s.grad = [](const Vector& x) { return x; };
    s.hess = [n](const Vector&) { return Matrix(Matrix::Identity(2 * n, 2 * n)); };
    return s;
}

/// H = ½Σ(p_i² + w_i q_i²).
inline HamiltonianSystem aniso(int n, std::vector<double> weights) {
    if (static_cast<int>(weights.size()) != n) throw std::invalid_argument("aniso needs one weight per degree of freedom");
    Vector d(2 * n);
    for (int i = 0; i < n; ++i) {
        d(i) = 1.0;
        d(n + i) = weights[static_cast<std::size_t>(i)];
    }
    HamiltonianSystem s;
    s.n = n;
    s.name = "aniso";
    s.H = [d](const Vector& x) { return 0.5 * x.dot(d.asDiagonal() * x); };
    s.grad = [d](const Vector& x) { return Vector(d.asDiagonal() * x); };
    s.hess = [d](const Vector&) { return Matrix(d.asDiagonal()); };
    return s;
}

/// H = Σ c·Π x_k^{e_k}, with exact gradient and Hessian.
inline HamiltonianSystem polynomial(int n, std::vector<PolynomialTerm> terms, bool symmetric) {
    for (const auto& t : terms) {
        if (static_cast<int>(t.powers.size()) != 2 * n) throw std::invalid_argument("term needs 2n exponents");
        for (int e : t.powers) {
            if (e < 0) throw std::invalid_argument("negative exponent");
        }
    }
    auto shared = std::make_shared<const std::vector<PolynomialTerm>>(std::move(terms));
    auto monomial = [](const Vector& x, const std::vector<int>& e, int d1, int d2) {
        // ∂_{d1}∂_{d2} of Π x_k^{e_k}; d = −1 means no derivative
        double coef = 1.0, v = 1.0;
        for (int k = 0; k < static_cast<int>(e.size()); ++k) {
            int p = e[static_cast<std::size_t>(k)];
            for (int d : {d1, d2}) {
                if (d == k) {
                    coef *= p;
                    --p;
                }
            }
            if (p < 0 || coef == 0.0) return 0.0;
            v *= std::pow(x(k), p);
        }
        return coef * v;
    };
    HamiltonianSystem s;
    s.n = n;
    s.name = "polynomial";
    s.symmetric = symmetric;
    s.H = [shared, monomial](const Vector& x) {
        double h = 0.0;
        for (const auto& t : *shared) h += t.coeff * monomial(x, t.powers, -1, -1);
        return h;
    };
    s.grad = [shared, monomial, n](const Vector& x) {
        Vector g = Vector::Zero(2 * n);
        for (const auto& t : *shared)
            for (int k = 0; k < 2 * n; ++k) g(k) += t.coeff * monomial(x, t.powers, k, -1);
        return g;
    };
    s.hess = [shared, monomial, n](const Vector& x) {
        Matrix h = Matrix::Zero(2 * n, 2 * n);
        for (const auto& t : *shared)
            for (int a = 0; a < 2 * n; ++a)
                for (int b = a; b < 2 * n; ++b) h(a, b) += t.coeff * monomial(x, t.powers, a, b);
        return Matrix(h.selfadjointView<Eigen::Upper>());
    };
    return s;
}

/// A polynomial is N₀-invariant iff every term has even total degree in p.
inline bool polynomial_is_symmetric(int n, const std::vector<PolynomialTerm>& terms) {
    for (const auto& t : terms) {
        int deg = 0;
        for (int i = 0; i < n; ++i) deg += t.powers[static_cast<std::size_t>(i)];
        if (deg % 2 != 0 && t.coeff != 0.0) return false;
    }
    return true;
}

inline std::vector<Vector> random_probes(int n, int count, unsigned seed = 1) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::vector<Vector> out;
    for (int i = 0; i < count; ++i) {
        Vector x(2 * n);
        for (int k = 0; k < 2 * n; ++k) x(k) = u(rng);
        out.push_back(x);
    }
    return out;
}

struct ConsistencyReport {
    double grad_error = 0.0;      ///< relative, against centered differences of H
    double hess_error = 0.0;      ///< relative, against centered differences of grad
    double symmetry_error = 0.0;  ///< max |H(N₀x) − H(x)|
    bool ok = true;
};

inline ConsistencyReport check_consistency(const HamiltonianSystem& sys, const std::vector<Vector>& probes) {
    ConsistencyReport r;
    const Matrix N = n0(sys.n);
    const double h = 1e-5;
    for (const Vector& x : probes) {
        const Vector g = sys.grad(x);
        const Matrix He = sys.hess(x);
        Vector gfd(2 * sys.n);
        Matrix hfd(2 * sys.n, 2 * sys.n);
        for (int k = 0; k < 2 * sys.n; ++k) {
            Vector e = Vector::Zero(2 * sys.n);
            e(k) = h;
            gfd(k) = (sys.H(x + e) - sys.H(x - e)) / (2 * h);
            hfd.col(k) = (sys.grad(x + e) - sys.grad(x - e)) / (2 * h);
        }
        r.grad_error = std::max(r.grad_error, (g - gfd).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff()));
        r.hess_error = std::max(r.hess_error, max_abs(He - hfd) / std::max(1.0, max_abs(He)));
        r.symmetry_error = std::max(r.symmetry_error, std::abs(sys.H(N * x) - sys.H(x)));
    }
    r.ok = r.grad_error <= 1e-4 && r.hess_error <= 1e-4 && (!sys.symmetric || r.symmetry_error <= 1e-10);
    return r;
}

/// max over probes of ‖X_H(N₀x) + N₀X_H(x)‖∞.
inline double check_field_symmetry(const HamiltonianSystem& sys, const std::vector<Vector>& probes) {
    const Matrix N = n0(sys.n);
    double worst = 0.0;
    for (const Vector& x : probes) {
        worst = std::max(worst, (sys.field(N * x) + N * sys.field(x)).cwiseAbs().maxCoeff());
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Orbits
// ---------------------------------------------------------------------------

namespace detail {

inline Vector rk4_flow_step(const HamiltonianSystem& sys, const Vector& x, double h) {
    const Vector k1 = sys.field(x);
    const Vector k2 = sys.field(x + 0.5 * h * k1);
    const Vector k3 = sys.field(x + 0.5 * h * k2);
    const Vector k4 = sys.field(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline Vector flow(const HamiltonianSystem& sys, Vector x, double T, int steps) {
    const double h = T / steps;
    for (int i = 0; i < steps; ++i) x = rk4_flow_step(sys, x, h);
    return x;
}

}  // namespace detail

struct Orbit {
    HamiltonianSystem system;
    std::vector<double> times;
    std::vector<Vector> states;
    double period = 0.0;
    double energy = 0.0;
    double energy_drift = 0.0;       ///< max |H(x(t)) − h| / max(1, |h|)
    bool brake = false;
    double symmetry_residual = 0.0;  ///< max ‖x(−t) − N₀x(t)‖∞ for brake orbits

    /// x(t) from the nearest sample by a short RK4 run; brake orbits wrap t modulo the period.
    Vector at(double t) const {
        if (brake) {
            t = std::fmod(t, period);
            if (t < 0) t += period;
        }
        const double h = times[1] - times[0];
        const long j = std::clamp(std::lround(t / h), 0L, static_cast<long>(times.size()) - 1);
        const double dt = t - times[static_cast<std::size_t>(j)];
        if (dt == 0.0) return states[static_cast<std::size_t>(j)];
        const int sub = std::max(1, static_cast<int>(std::ceil(std::abs(dt) / h - 1e-12)));
        return detail::flow(system, states[static_cast<std::size_t>(j)], dt, sub);
    }
};

inline Orbit integrate_orbit(const HamiltonianSystem& sys, const Vector& x0, double T, int steps,
                             const Config& cfg = {}) {
    if (steps < 2) throw std::invalid_argument("integrate_orbit needs steps >= 2");
    if (!(T > 0.0)) throw std::invalid_argument("integrate_orbit needs T > 0");
    if (x0.size() != 2 * sys.n) throw std::invalid_argument("initial point has wrong dimension");
    Orbit o;
    o.system = sys;
    o.period = T;
    o.energy = sys.H(x0);
    const double h = T / steps;
    Vector x = x0;
    o.times.reserve(static_cast<std::size_t>(steps) + 1);
    o.states.reserve(static_cast<std::size_t>(steps) + 1);
    o.times.push_back(0.0);
    o.states.push_back(x);
    const double scale = std::max(1.0, std::abs(o.energy));
    for (int i = 1; i <= steps; ++i) {
        x = detail::rk4_flow_step(sys, x, h);
        o.times.push_back(i * h);
        o.states.push_back(x);
        const double e = sys.H(x);
        o.energy_drift = std::max(o.energy_drift, std::isfinite(e) ? std::abs(e - o.energy) / scale : INFINITY);
    }
    o.times.back() = T;
    if (!(o.energy_drift <= cfg.energy_tol)) {
        throw EnergyDrift("relative energy drift " + std::to_string(o.energy_drift) + " over T = " +
                          std::to_string(T) + " with " + std::to_string(steps) + " steps");
    }
    return o;
}

/// max over samples of ‖x(−t) − N₀x(t)‖∞, with x(−t) = x(τ − t) on a closed orbit of uniform samples.
inline double orbit_symmetry_residual(const Orbit& o) {
    const Matrix N = n0(o.system.n);
    const std::size_t last = o.states.size() - 1;
    double worst = 0.0;
    for (std::size_t i = 0; i <= last; ++i) {
        worst = std::max(worst, (o.states[last - i] - N * o.states[i]).cwiseAbs().maxCoeff());
    }
    return worst;
}

struct BrakeOrbitResult {
    double tau = 0.0;
    Orbit orbit;
    int iterations = 0;
    double residual = 0.0;
};

/// Finds x(0) ∈ L = {(0, q)} on H = h and τ/2 with x(τ/2) ∈ L by damped Newton
/// shooting. Unknowns are the direction u of q and τ/2; the energy is enforced
/// by rescaling q = r·u radially, and |u| = |u_guess| fixes the remaining gauge.
inline BrakeOrbitResult find_brake_orbit(const HamiltonianSystem& sys, const Vector& q_guess, double h,
                                         double tau_guess, const Config& cfg = {}) {
    const int n = sys.n;
    if (q_guess.size() != 2 * n) throw std::invalid_argument("guess has wrong dimension");
    if (q_guess.head(n).cwiseAbs().maxCoeff() > 1e-12) throw std::invalid_argument("guess must lie on L = {(0, q)}");
    if (!(tau_guess > 0.0)) throw std::invalid_argument("tau_guess must be positive");
    const Vector u0 = q_guess.tail(n);
    const double gauge = u0.squaredNorm();
    const double etol = cfg.energy_tol * std::max(1.0, std::abs(h));

    // point (0, r·u) on the energy surface, r near 1 by Newton along the ray
    auto on_surface = [&](const Vector& u) {
        Vector x = Vector::Zero(2 * n);
        double r = 1.0;
        for (int it = 0; it < 60; ++it) {
            x.tail(n) = r * u;
            const double e = sys.H(x) - h;
            if (std::abs(e) < 1e-13 * std::max(1.0, std::abs(h))) return x;
            const double slope = sys.grad(x).tail(n).dot(u);
            if (!std::isfinite(slope) || std::abs(slope) < 1e-12) break;
            r -= e / slope;
        }
        x.tail(n) = r * u;
        if (!(std::abs(sys.H(x) - h) <= etol) || !x.allFinite()) {
            throw LeftEnergySurface("no point of H = " + std::to_string(h) + " along the ray of the current guess");
        }
        return x;
    };
    const int half_steps = std::max(64, cfg.ode_steps / 2);
    auto residual = [&](const Vector& z) {
        const Vector u = z.head(n);
        const double T = z(n);
        Vector F(n + 1);
        if (!(T > 0.0)) throw NoConvergence("half period left (0, inf) during shooting");
        const Vector xT = detail::flow(sys, on_surface(u), T, half_steps);
        F.head(n) = xT.head(n);
        F(n) = u.squaredNorm() - gauge;
        return F;
    };

    Vector z(n + 1);
    z.head(n) = u0;
    z(n) = 0.5 * tau_guess;
    if (sys.grad(on_surface(u0)).cwiseAbs().maxCoeff() < 1e-10) {
        throw LeftEnergySurface("guess sits at a critical point of H");
    }
    Vector F = residual(z);
    int iter = 0;
    while (F.norm() >= 1e-8) {
        if (++iter > cfg.shooting_max_iter) {
            throw NoConvergence("shooting residual " + std::to_string(F.norm()) + " after " +
                                std::to_string(cfg.shooting_max_iter) + " iterations");
        }
        Matrix Jac(n + 1, n + 1);
        for (int k = 0; k <= n; ++k) {
            const double dk = 1e-7 * std::max(1.0, std::abs(z(k)));
            Vector zp = z, zm = z;
            zp(k) += dk;
            zm(k) -= dk;
            Jac.col(k) = (residual(zp) - residual(zm)) / (2 * dk);
        }
        const Vector step = Jac.fullPivLu().solve(-F);
        if (!step.allFinite()) throw NoConvergence("singular shooting Jacobian");
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            const Vector trial = z + lambda * step;
            try {
                const Vector Ft = residual(trial);
                if (Ft.norm() < (1.0 - 1e-4 * lambda) * F.norm()) {
                    z = trial;
                    F = Ft;
                    accepted = true;
                    break;
                }
            } catch (const NumericalError&) {
                // step left the admissible region; shorten it
            }
            lambda *= 0.5;
        }
        if (!accepted) throw NoConvergence("line search failed at residual " + std::to_string(F.norm()));
    }

    BrakeOrbitResult res;
    res.iterations = iter;
    res.residual = F.norm();
    res.tau = 2.0 * z(n);
    res.orbit = integrate_orbit(sys, on_surface(z.head(n)), res.tau, 2 * half_steps, cfg);
    res.orbit.brake = true;
    res.orbit.symmetry_residual = orbit_symmetry_residual(res.orbit);
    if (res.orbit.symmetry_residual > 1e-7) {
        throw NoConvergence("brake symmetry residual " + std::to_string(res.orbit.symmetry_residual) +
                            " of the converged orbit exceeds 1e-7");
    }
    return res;
}

/// Fundamental solution of ẏ = J₀H''(x(t))y along the orbit.
inline SymplecticPath linearized_path(const HamiltonianSystem& sys, const Orbit& orbit, const Config& cfg = {}) {
    MatrixFn B = [sys, orbit](double t) { return sys.hess(orbit.at(t)); };
    if (orbit.brake) {
        const double r = brake_symmetry_residual(B, orbit.period / 2, 64);
        if (r > 1e-6 * std::max(1.0, max_abs(B(0.0)))) {
            throw SymmetryViolated("Hessian along the brake orbit is not N0-symmetric (residual " +
                                   std::to_string(r) + ")");
        }
    }
    return fundamental_solution(std::move(B), orbit.period, cfg.ode_steps, cfg);
}

/// f with R_α = f·X_H at x on H⁻¹(h), for α = ½Σ(p dq − q dp): f = 2 / (x·∇H(x)).
inline double reeb_factor(const HamiltonianSystem& sys, const Vector& x) {
    const double d = x.dot(sys.grad(x));
    if (std::abs(d) < 1e-10) {
        throw RadialDegeneracy("x . grad H = " + std::to_string(d) + " vanishes; the surface is not radially transverse");
    }
    return 2.0 / d;
}

}  // namespace brakeidx
