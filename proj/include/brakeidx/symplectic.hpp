#pragma once

// Linear symplectic algebra: standard structures, Lagrangian frames, sampled
// symplectic paths, fundamental solutions and unitary loops.

#include "brakeidx/config.hpp"
#include "brakeidx/errors.hpp"
#include "brakeidx/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace brakeidx {

using MatrixFn = std::function<Matrix(double)>;

// ---------------------------------------------------------------------------
// Lagrangian subspaces
// ---------------------------------------------------------------------------

/// Rank-n subspace of R^{2n}, stored as an orthonormal 2n×n frame.
class Lagrangian {
public:
    /// Orthonormalizes `frame` and checks rank and isotropy for the form matrix `form`.
    static Lagrangian from_frame(const Matrix& frame, const Matrix& form, double tol = 1e-8) {
        if (frame.rows() != 2 * frame.cols()) {
            throw std::invalid_argument("Lagrangian frame must be 2n x n");
        }
        const Vector sv = singular_values(frame);
        if (sv.size() == 0 || sv(sv.size() - 1) < tol * std::max(1.0, sv(0))) {
            throw std::invalid_argument("Lagrangian frame is rank deficient");
        }
        Lagrangian L(orthonormal_columns(frame));
        if (L.isotropy_residual(form) > tol) {
            throw std::invalid_argument("frame is not isotropic for the given form");
        }
        return L;
    }

    const Matrix& frame() const { return frame_; }
    int ambient_dim() const { return static_cast<int>(frame_.rows()); }
    int rank() const { return static_cast<int>(frame_.cols()); }

    double isotropy_residual(const Matrix& form) const { return max_abs(frame_.transpose() * form * frame_); }

    /// Image under a linear map that preserves the form.
    Lagrangian mapped(const Matrix& m) const { return Lagrangian(orthonormal_columns(m * frame_)); }

private:
    explicit Lagrangian(Matrix frame) : frame_(std::move(frame)) {}
    Matrix frame_;
};

/// dim(A ∩ B): number of singular values of the stacked orthonormal frames [A B] below `tol`.
inline int intersection_dimension(const Lagrangian& a, const Lagrangian& b, double tol = 1e-8) {
    Matrix stacked(a.ambient_dim(), a.rank() + b.rank());
    stacked << a.frame(), b.frame();
    return count_below(singular_values(stacked), tol);
}

struct StandardStructures {
    int n = 1;
    Matrix J0;
    Matrix N0;
    Lagrangian L1;  ///< {0} × R^n, the fixed set of N0
    Lagrangian L2;  ///< R^n × {0}
    Lagrangian W;   ///< diagonal of R^{4n}

    /// Gr(M) = {(x, Mx)} ⊂ R^{4n}, Lagrangian for (−ω) ⊕ ω when M is symplectic.
    Lagrangian graph(const Matrix& M, double tol = 1e-8) const {
        Matrix frame(4 * n, 2 * n);
        frame << Matrix::Identity(2 * n, 2 * n), M;
        return Lagrangian::from_frame(frame, product_form(n), tol * std::max(1.0, max_abs(M) * max_abs(M)));
    }
};

inline Matrix l1_frame(int n) {
    Matrix f = Matrix::Zero(2 * n, n);
    f.bottomRows(n) = Matrix::Identity(n, n);
    return f;
}

inline Matrix l2_frame(int n) {
    Matrix f = Matrix::Zero(2 * n, n);
    f.topRows(n) = Matrix::Identity(n, n);
    return f;
}

inline Matrix diagonal_frame(int n) {
    Matrix f(4 * n, 2 * n);
    f << Matrix::Identity(2 * n, 2 * n), Matrix::Identity(2 * n, 2 * n);
    return f;
}

inline StandardStructures standard_structures(int n) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    return StandardStructures{n,
                              j0(n),
                              n0(n),
                              Lagrangian::from_frame(l1_frame(n), omega_form(n)),
                              Lagrangian::from_frame(l2_frame(n), omega_form(n)),
                              Lagrangian::from_frame(diagonal_frame(n), product_form(n))};
}

// ---------------------------------------------------------------------------
// Symplectic paths
// ---------------------------------------------------------------------------

/// Sampled path in Sp(2n) over [a, b]. Samples are exact; `at(t)` evaluates
/// between (and slightly beyond) them through the path's evaluator, or through
/// piecewise one-parameter-subgroup interpolation when none was supplied.
/// Immutable, cheap to copy.
class SymplecticPath {
public:
    SymplecticPath(int n, std::vector<double> times, std::vector<Matrix> values, MatrixFn evaluator = {},
                   bool based = false, double symplectic_tol = 1e-9) {
        if (n < 1) throw std::invalid_argument("n must be positive");
        if (times.size() < 2 || times.size() != values.size()) {
            throw std::invalid_argument("a symplectic path needs at least two samples and one matrix per time");
        }
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (!(times[i] > times[i - 1])) throw std::invalid_argument("sample times must be strictly increasing");
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            const Matrix& m = values[i];
            if (m.rows() != 2 * n || m.cols() != 2 * n) throw std::invalid_argument("sample matrix has wrong size");
            if (!m.allFinite()) throw std::invalid_argument("sample matrix has non-finite entries");
            if (symplectic_residual(m) > symplectic_tol) {
                throw std::invalid_argument("sample " + std::to_string(i) + " is not symplectic (residual " +
                                            std::to_string(symplectic_residual(m)) + ")");
            }
        }
        if (based && max_abs(values.front() - Matrix::Identity(2 * n, 2 * n)) > 1e-14) {
            throw std::invalid_argument("based path must start at the identity");
        }
        auto d = std::make_shared<Data>();
        d->n = n;
        d->times = std::move(times);
        d->values = std::move(values);
        d->based = based;
        if (evaluator) {
            d->eval = std::move(evaluator);
        } else {
            d->segment_logs.reserve(d->values.size() - 1);
            for (std::size_t i = 0; i + 1 < d->values.size(); ++i) {
                const Matrix step = d->values[i].inverse() * d->values[i + 1];
                d->segment_logs.push_back(step.log());
            }
        }
        d_ = std::move(d);
    }

    int n() const { return d_->n; }
    double start() const { return d_->times.front(); }
    double end() const { return d_->times.back(); }
    bool based() const { return d_->based; }
    const std::vector<double>& times() const { return d_->times; }
    const std::vector<Matrix>& values() const { return d_->values; }
    const Matrix& front() const { return d_->values.front(); }
    const Matrix& back() const { return d_->values.back(); }

    Matrix at(double t) const {
        if (d_->eval) return d_->eval(t);
        const auto& ts = d_->times;
        auto it = std::upper_bound(ts.begin(), ts.end(), t);
        std::size_t seg = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
        seg = std::min(seg, ts.size() - 2);
        if (t == ts[seg]) return d_->values[seg];
        const double frac = (t - ts[seg]) / (ts[seg + 1] - ts[seg]);
        return d_->values[seg] * (frac * d_->segment_logs[seg]).exp();
    }

    /// Sample times in [start, t_end], with t_end appended when it is not a sample.
    std::vector<double> times_until(double t_end) const {
        std::vector<double> out;
        for (double t : d_->times) {
            if (t < t_end) out.push_back(t);
        }
        out.push_back(t_end);
        return out;
    }

private:
    struct Data {
        int n = 1;
        std::vector<double> times;
        std::vector<Matrix> values;
        MatrixFn eval;
        std::vector<Matrix> segment_logs;
        bool based = false;
    };
    std::shared_ptr<const Data> d_;
};

inline std::vector<double> uniform_grid(double a, double b, int samples) {
    if (samples < 2) throw std::invalid_argument("need at least two samples");
    std::vector<double> t(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) t[static_cast<std::size_t>(i)] = a + (b - a) * i / (samples - 1);
    t.back() = b;
    return t;
}

/// diag(R(ωt), …, R(ωt)) on [a, b].
inline SymplecticPath rotation_path(double omega, int n, double a, double b, int samples) {
    auto times = uniform_grid(a, b, samples);
    std::vector<Matrix> values;
    values.reserve(times.size());
    for (double t : times) values.push_back(rotation(omega * t, n));
    return SymplecticPath(n, std::move(times), std::move(values),
                          [omega, n](double t) { return rotation(omega * t, n); }, a == 0.0);
}

namespace detail {

inline Matrix rk4_step(const MatrixFn& B, const Matrix& J, const Matrix& Y, double t, double h) {
    const Matrix k1 = J * B(t) * Y;
    const Matrix k2 = J * B(t + 0.5 * h) * (Y + 0.5 * h * k1);
    const Matrix k3 = J * B(t + 0.5 * h) * (Y + 0.5 * h * k2);
    const Matrix k4 = J * B(t + h) * (Y + h * k3);
    return Y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// One Newton step of the right polar correction M ← M G^{-1/2}, G = J⁻¹MᵀJM.
inline Matrix symplectic_projection(const Matrix& M, const Matrix& J) {
    const Matrix G = -J * M.transpose() * J * M;  // J⁻¹ = −J
    const auto dim = M.rows();
    return 0.5 * M * (3.0 * Matrix::Identity(dim, dim) - G);
}

}  // namespace detail

/// Based solution of γ̇ = J₀B(t)γ on [0, τ] by fixed-step RK4 with re-projection
/// onto Sp(2n) after every step.
inline SymplecticPath fundamental_solution(MatrixFn B, double tau, int steps, const Config& cfg = {}) {
    if (steps < 2) throw std::invalid_argument("fundamental_solution needs steps >= 2");
    if (!(tau > 0.0)) throw std::invalid_argument("fundamental_solution needs tau > 0");
    const Matrix B0 = B(0.0);
    if (B0.rows() != B0.cols() || B0.rows() % 2 != 0) throw std::invalid_argument("B(t) must be 2n x 2n");
    const int n = static_cast<int>(B0.rows()) / 2;
    const Matrix J = j0(n);
    const double h = tau / steps;

    auto samples = std::make_shared<std::vector<Matrix>>();
    samples->reserve(static_cast<std::size_t>(steps) + 1);
    std::vector<double> times(static_cast<std::size_t>(steps) + 1);
    Matrix Y = Matrix::Identity(2 * n, 2 * n);
    samples->push_back(Y);
    for (int i = 0; i < steps; ++i) {
        const double t = i * h;
        times[static_cast<std::size_t>(i)] = t;
        const Matrix Bt = B(t);
        if (max_abs(Bt - Bt.transpose()) > 1e-9 * std::max(1.0, max_abs(Bt))) {
            throw std::invalid_argument("B(t) is not symmetric at t = " + std::to_string(t));
        }
        Y = detail::symplectic_projection(detail::rk4_step(B, J, Y, t, h), J);
        const double drift = symplectic_residual(Y);
        if (!Y.allFinite() || drift > cfg.symplectic_tol) {
            throw SymplecticityLost("symplectic drift " + std::to_string(drift) + " at t = " +
                                    std::to_string(t + h) + "; increase the step count");
        }
        samples->push_back(Y);
    }
    times.back() = tau;

    MatrixFn eval = [samples, B, J, h, steps](double t) -> Matrix {
        const long j = std::clamp(std::lround(t / h), 0L, static_cast<long>(steps));
        const double t0 = j * h;
        const double dt = t - t0;
        const Matrix& base = (*samples)[static_cast<std::size_t>(j)];
        if (dt == 0.0) return base;
        const int sub = std::max(1, static_cast<int>(std::ceil(std::abs(dt) / h - 1e-12)));
        Matrix Yt = base;
        for (int k = 0; k < sub; ++k) Yt = detail::rk4_step(B, J, Yt, t0 + k * dt / sub, dt / sub);
        return Yt;
    };
    return SymplecticPath(n, std::move(times), *samples, std::move(eval), true,
                          std::max(cfg.symplectic_tol, 1e-9));
}

// ---------------------------------------------------------------------------
// Unitary loops
// ---------------------------------------------------------------------------

/// Complex n×n matrix A + iB of a real 2n×2n matrix commuting with J₀.
inline Eigen::MatrixXcd complexify(const Matrix& m) {
    const auto n = m.rows() / 2;
    Eigen::MatrixXcd u(n, n);
    u.real() = m.topLeftCorner(n, n);
    u.imag() = m.bottomLeftCorner(n, n);
    return u;
}

/// Loop in U(n) ⊂ Sp(2n) with period τ; `at` wraps time modulo τ.
class UnitaryLoop {
public:
    UnitaryLoop(int n, double period, int samples, MatrixFn evaluator, double tol = 1e-9)
        : n_(n), period_(period), eval_(std::move(evaluator)) {
        if (n < 1 || !(period > 0.0)) throw std::invalid_argument("invalid unitary loop");
        times_ = uniform_grid(0.0, period, samples);
        const Matrix I = Matrix::Identity(2 * n, 2 * n);
        const Matrix J = j0(n);
        for (double t : times_) {
            Matrix m = eval_(t);
            if (m.rows() != 2 * n || m.cols() != 2 * n) throw std::invalid_argument("loop sample has wrong size");
            if (max_abs(m.transpose() * m - I) > tol || max_abs(m * J - J * m) > tol) {
                throw std::invalid_argument("loop sample is not in U(n)");
            }
            values_.push_back(std::move(m));
        }
        if (max_abs(values_.front() - values_.back()) > tol) throw std::invalid_argument("loop does not close");
    }

    int n() const { return n_; }
    double period() const { return period_; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<Matrix>& values() const { return values_; }

    Matrix at(double t) const {
        double r = std::fmod(t, period_);
        if (r < 0) r += period_;
        return eval_(r);
    }

private:
    int n_;
    double period_;
    MatrixFn eval_;
    std::vector<double> times_;
    std::vector<Matrix> values_;
};

/// φ(t) = diag(e^{2πi k_1 t/τ}, …, e^{2πi k_n t/τ}).
inline UnitaryLoop diagonal_loop(std::vector<int> ks, double period, int samples) {
    const int n = static_cast<int>(ks.size());
    auto eval = [ks, n, period](double t) {
        Matrix m = Matrix::Zero(2 * n, 2 * n);
        for (int i = 0; i < n; ++i) {
            const double th = kTwoPi * ks[static_cast<std::size_t>(i)] * t / period;
            m(i, i) = std::cos(th);
            m(i, n + i) = -std::sin(th);
            m(n + i, i) = std::sin(th);
            m(n + i, n + i) = std::cos(th);
        }
        return m;
    };
    return UnitaryLoop(n, period, samples, eval);
}

/// Standard generator of π₁(U(n)) raised to the k-th power: diag(e^{2πikt/τ}, 1, …, 1).
inline UnitaryLoop standard_loop(int k, int n, double period, int samples) {
    std::vector<int> ks(static_cast<std::size_t>(n), 0);
    ks[0] = k;
    return diagonal_loop(std::move(ks), period, samples);
}

/// Winding number of det∘φ.
inline int loop_degree(const UnitaryLoop& phi) {
    const auto& vals = phi.values();
    if (max_abs(vals.front() - vals.back()) > 1e-8) throw std::invalid_argument("loop does not close");
    double total = 0.0;
    std::complex<double> prev = complexify(vals.front()).determinant();
    for (std::size_t i = 1; i < vals.size(); ++i) {
        const std::complex<double> cur = complexify(vals[i]).determinant();
        const double jump = std::arg(cur / prev);
        if (std::abs(jump) > kPi / 2) {
            throw PhaseJumpTooLarge("det phase jumps by " + std::to_string(jump) + " between samples " +
                                    std::to_string(i - 1) + " and " + std::to_string(i));
        }
        total += jump;
        prev = cur;
    }
    return static_cast<int>(std::lround(total / kTwoPi));
}

/// Pointwise product t ↦ φ(t)Φ(t) sampled at Φ's times.
inline SymplecticPath product(const UnitaryLoop& phi, const SymplecticPath& path) {
    if (phi.n() != path.n()) throw std::invalid_argument("loop and path dimensions differ");
    std::vector<Matrix> values;
    values.reserve(path.times().size());
    for (std::size_t i = 0; i < path.times().size(); ++i) values.push_back(phi.at(path.times()[i]) * path.values()[i]);
    const bool based = path.based() && max_abs(values.front() - Matrix::Identity(2 * path.n(), 2 * path.n())) <= 1e-14;
    if (based) values.front() = Matrix::Identity(2 * path.n(), 2 * path.n());
    return SymplecticPath(path.n(), path.times(), std::move(values),
                          [phi, path](double t) { return Matrix(phi.at(t) * path.at(t)); }, based);
}

// ---------------------------------------------------------------------------
// Brake symmetry checks
// ---------------------------------------------------------------------------

/// sup over an (samples+1)-point grid of [0, t_max] of ‖N₀X(−t)N₀ − X(t)‖∞.
/// `X` must be defined on [−t_max, t_max].
inline double brake_symmetry_residual(const MatrixFn& X, double t_max, int samples = 256) {
    const Matrix X0 = X(0.0);
    const Matrix N = n0(static_cast<int>(X0.rows()) / 2);
    double worst = 0.0;
    for (double t : uniform_grid(0.0, t_max, samples + 1)) {
        worst = std::max(worst, max_abs(N * X(-t) * N - X(t)));
    }
    return worst;
}

/// φ(−t)N₀ = N₀φ(t) over one period (negative times wrap).
inline double check_brake_symmetry(const UnitaryLoop& phi, int samples = 256) {
    return brake_symmetry_residual([&phi](double t) { return phi.at(t); }, phi.period(), samples);
}

/// γ(−t) = N₀γ(t)N₀ for a path on a symmetric interval [−a, a].
inline double check_brake_symmetry(const SymplecticPath& path) {
    if (std::abs(path.start() + path.end()) > 1e-12 * std::max(1.0, path.end())) {
        throw std::invalid_argument("path interval is not symmetric about 0");
    }
    const Matrix N = n0(path.n());
    double worst = 0.0;
    for (std::size_t i = 0; i < path.times().size(); ++i) {
        const double t = path.times()[i];
        worst = std::max(worst, max_abs(N * path.at(-t) * N - path.values()[i]));
    }
    return worst;
}

}  // namespace brakeidx
