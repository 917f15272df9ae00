#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace brakeidx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Standard complex structure on R^{2n}, coordinates (x_1..x_n, y_1..y_n).
inline Matrix j0(int n) {
    Matrix J = Matrix::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n) = -Matrix::Identity(n, n);
    J.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
    return J;
}

/// Brake involution diag(-I_n, I_n).
inline Matrix n0(int n) {
    Matrix N = Matrix::Identity(2 * n, 2 * n);
    N.topLeftCorner(n, n) *= -1.0;
    return N;
}

/// Matrix of the standard symplectic form: ω(v, w) = vᵀ Ω w = ⟨J₀v, w⟩.
inline Matrix omega_form(int n) { return -j0(n); }

/// Matrix of (−ω) ⊕ ω on R^{2n} × R^{2n}, the form for which graphs of symplectic maps are Lagrangian.
inline Matrix product_form(int n) {
    Matrix F = Matrix::Zero(4 * n, 4 * n);
    F.topLeftCorner(2 * n, 2 * n) = -omega_form(n);
    F.bottomRightCorner(2 * n, 2 * n) = omega_form(n);
    return F;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// R(θ) block-diagonal on the (x_i, y_i) planes.
inline Matrix rotation(double theta, int n) {
    const double c = std::cos(theta), s = std::sin(theta);
    Matrix R = Matrix::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        R(i, i) = c;
        R(i, n + i) = -s;
        R(n + i, i) = s;
        R(n + i, n + i) = c;
    }
    return R;
}

inline double symplectic_residual(const Matrix& m) {
    const int n = static_cast<int>(m.rows()) / 2;
    const Matrix J = j0(n);
    const double scale = max_abs(m);
    return max_abs(m.transpose() * J * m - J) / std::max(1.0, scale * scale);
}

/// Orthonormal basis of the column span (thin Q of a Householder QR).
inline Matrix orthonormal_columns(const Matrix& frame) {
    Eigen::HouseholderQR<Matrix> qr(frame);
    return qr.householderQ() * Matrix::Identity(frame.rows(), frame.cols());
}

/// Singular values, descending.
inline Vector singular_values(const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues(); }

inline int count_below(const Vector& v, double tol) {
    return static_cast<int>((v.array().abs() < tol).count());
}

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace brakeidx
