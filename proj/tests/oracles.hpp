#pragma once

// Test-side oracles. None of these call into the crossing-form machinery of the
// library: Maslov indices are recomputed from eigenphase winding of unitary
// matrices, and rotation examples from closed-form crossing enumeration.

#include "brakeidx/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using brakeidx::Matrix;
using Cx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = brakeidx::kPi;

/// ½(⌊x⌋ + ⌈x⌉) in units of 2π, with a snap for values sitting on a multiple.
inline double half_floor_ceil(double theta) {
    const double x = theta / (2.0 * kPi);
    const double r = std::round(x);
    if (std::abs(x - r) < 1e-7) return r;
    return std::floor(x) + 0.5;
}

/// Unitary U = X + iY of a Lagrangian with orthonormal real frame [X; Y].
inline CMatrix unitary_of(const Matrix& frame) {
    const Matrix q = brakeidx::orthonormal_columns(frame);
    const auto m = q.cols();
    CMatrix u(m, m);
    u.real() = q.topRows(m);
    u.imag() = q.bottomRows(m);
    return u;
}

/// Maslov index of (Λ₁(t), Λ₂(t)) in standard R^{2m} from the eigenphases of
/// W = U₂U₂ᵀ·conj(U₁U₁ᵀ): every eigenphase branch contributes the change of
/// ½(⌊θ/2π⌋ + ⌈θ/2π⌉) between its unwrapped end values.
inline double maslov_by_winding(const std::function<Matrix(double)>& f1, const std::function<Matrix(double)>& f2,
                                double a, double b, int steps = 4000) {
    auto w_at = [&](double t) {
        const CMatrix u1 = unitary_of(f1(t));
        const CMatrix u2 = unitary_of(f2(t));
        const CMatrix w = u2 * u2.transpose() * (u1 * u1.transpose()).conjugate();
        Eigen::ComplexEigenSolver<CMatrix> es(w, false);
        std::vector<double> ph;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) ph.push_back(std::arg(es.eigenvalues()(i)));
        return ph;
    };
    std::vector<double> unwrapped = w_at(a);
    std::vector<double> start = unwrapped;
    for (int s = 1; s <= steps; ++s) {
        const double t = a + (b - a) * s / steps;
        std::vector<double> ph = w_at(t);
        std::vector<bool> used(ph.size(), false);
        std::vector<double> next(unwrapped.size());
        for (std::size_t i = 0; i < unwrapped.size(); ++i) {
            double best = 1e9;
            std::size_t bj = 0;
            for (std::size_t j = 0; j < ph.size(); ++j) {
                if (used[j]) continue;
                const double d = std::remainder(ph[j] - unwrapped[i], 2.0 * kPi);
                if (std::abs(d) < std::abs(best)) {
                    best = d;
                    bj = j;
                }
            }
            used[bj] = true;
            next[i] = unwrapped[i] + best;
        }
        unwrapped = next;
    }
    // branches that start on the crossing value are attributed by their direction of departure
    double total = 0.0;
    for (std::size_t i = 0; i < unwrapped.size(); ++i) total += half_floor_ceil(unwrapped[i]) - half_floor_ceil(start[i]);
    return total;
}

/// The Lagrangian pair (W, Gr Φ) for (−ω)⊕ω, carried to standard R^{4n} by
/// (x, y) ↦ (N₀x, y) and a coordinate shuffle, then measured by winding.
inline double cz_by_winding(const std::function<Matrix(double)>& phi, int n, double a, double b, int steps = 4000) {
    const Matrix N = brakeidx::n0(n);
    auto to_standard = [n](const Matrix& top, const Matrix& bottom) {
        // top/bottom are 2n×k blocks in (x, y) coords of each factor; output (x_1, x_2, y_1, y_2)
        Matrix out(4 * n, top.cols());
        out << top.topRows(n), bottom.topRows(n), top.bottomRows(n), bottom.bottomRows(n);
        return out;
    };
    auto diag = [&](double) { return to_standard(N, Matrix::Identity(2 * n, 2 * n)); };
    auto graph = [&](double t) { return to_standard(N, phi(t)); };
    return maslov_by_winding(diag, graph, a, b, steps);
}

/// μ₁ of R(ωt), t ∈ [0, τ], by listing the times where R(ωt)L₁ = L₁ (ωt ∈ πZ).
inline double rotation_mu1_by_enumeration(double omega, double tau) {
    if (omega == 0.0) return 0.0;
    const double sgn = omega > 0 ? 1.0 : -1.0;
    const double end = tau / 2.0;
    double value = 0.5 * sgn;  // t = 0
    for (int k = 1;; ++k) {
        const double t = k * kPi / std::abs(omega);
        if (t > end + 1e-12) break;
        value += (std::abs(t - end) < 1e-12 ? 0.5 : 1.0) * sgn;
    }
    return value;
}

/// μ_CZ of R(ωt)^{⊕n} on [0, T]: crossings at ωt ∈ 2πZ, each of multiplicity 2 per plane.
inline double rotation_cz_by_enumeration(double omega, int n, double T) {
    if (omega == 0.0) return 0.0;
    const double sgn = omega > 0 ? 1.0 : -1.0;
    double value = sgn;
    for (int k = 1;; ++k) {
        const double t = 2.0 * k * kPi / std::abs(omega);
        if (t > T + 1e-12) break;
        value += (std::abs(t - T) < 1e-12 ? 1.0 : 2.0) * sgn;
    }
    return n * value;
}

/// Random smooth τ-periodic B with N₀B(−t)N₀ = B(t).
struct BrakeSymmetricSystem {
    int n = 1;
    double tau = 1.0;
    std::vector<Matrix> cos_terms;  // block diagonal, commute with N₀
    std::vector<Matrix> sin_terms;  // off-diagonal, anticommute with N₀

    Matrix operator()(double t) const {
        Matrix B = Matrix::Zero(2 * n, 2 * n);
        for (std::size_t k = 0; k < cos_terms.size(); ++k) {
            B += std::cos(2.0 * kPi * k * t / tau) * cos_terms[k];
            if (k > 0) B += std::sin(2.0 * kPi * k * t / tau) * sin_terms[k];
        }
        return B;
    }
};

inline BrakeSymmetricSystem random_brake_system(std::mt19937_64& rng, int n, int modes, double scale = 3.0,
                                                double tau = 1.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    BrakeSymmetricSystem s;
    s.n = n;
    s.tau = tau;
    for (int k = 0; k <= modes; ++k) {
        Matrix P(n, n), Q(n, n), R(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                P(i, j) = g(rng);
                Q(i, j) = g(rng);
                R(i, j) = g(rng);
            }
        const double w = scale / (1.0 + k);
        Matrix C = Matrix::Zero(2 * n, 2 * n), D = Matrix::Zero(2 * n, 2 * n);
        C.topLeftCorner(n, n) = w * 0.5 * (P + P.transpose());
        C.bottomRightCorner(n, n) = w * 0.5 * (Q + Q.transpose());
        D.topRightCorner(n, n) = w * R;
        D.bottomLeftCorner(n, n) = w * R.transpose();
        s.cos_terms.push_back(C);
        s.sin_terms.push_back(D);
    }
    return s;
}

/// B(t) = a(t)·I with a even, τ-periodic and ∫₀^τ a = 2π·winding: the solution is R(∫a).
inline std::function<Matrix(double)> degenerate_scalar_system(std::mt19937_64& rng, int n, int winding,
                                                              double tau = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double c1 = u(rng), c2 = u(rng);
    return [=](double t) {
        const double a = 2.0 * kPi * winding / tau + c1 * std::cos(2.0 * kPi * t / tau) +
                         c2 * std::cos(4.0 * kPi * t / tau);
        return Matrix(a * Matrix::Identity(2 * n, 2 * n));
    };
}

}  // namespace oracle
