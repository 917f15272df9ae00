#pragma once

// Maslov-type indices of Lagrangian pairs by the crossing form, and the
// derived indices of symplectic paths (Conley–Zehnder, brake indices, nullities).

#include "brakeidx/config.hpp"
#include "brakeidx/errors.hpp"
#include "brakeidx/half_int.hpp"
#include "brakeidx/linalg.hpp"
#include "brakeidx/symplectic.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace brakeidx {

/// t ↦ Λ(t), represented by a smooth (not necessarily orthonormal) frame.
/// `grid` lists the times at which the underlying data was sampled; crossing
/// detection scans these, so it should be fine enough to isolate crossings.
class LagrangianPath {
public:
    LagrangianPath(MatrixFn frame, Matrix form, std::vector<double> grid = {})
        : frame_(std::move(frame)), form_(std::move(form)), grid_(std::move(grid)) {}

    static LagrangianPath constant(const Lagrangian& L, const Matrix& form) {
        Matrix f = L.frame();
        return LagrangianPath([f](double) { return f; }, form);
    }

    /// t ↦ Φ(t)L.
    static LagrangianPath image(const SymplecticPath& path, const Lagrangian& L) {
        Matrix f = L.frame();
        return LagrangianPath([path, f](double t) { return Matrix(path.at(t) * f); }, omega_form(path.n()),
                              path.times());
    }

    /// t ↦ Gr(Φ(t)) in R^{2n} × R^{2n}.
    static LagrangianPath graph(const SymplecticPath& path) {
        const int n = path.n();
        return LagrangianPath(
            [path, n](double t) {
                Matrix f(4 * n, 2 * n);
                f << Matrix::Identity(2 * n, 2 * n), path.at(t);
                return f;
            },
            product_form(n), path.times());
    }

    Matrix frame(double t) const { return frame_(t); }
    const Matrix& form() const { return form_; }
    const std::vector<double>& grid() const { return grid_; }

private:
    MatrixFn frame_;
    Matrix form_;
    std::vector<double> grid_;
};

struct Crossing {
    double time = 0.0;
    int intersection_dim = 0;
    int signature = 0;
    bool regular = true;
};

struct IndexReport {
    HalfInt value;
    std::vector<Crossing> crossings;
    std::pair<int, int> endpoint_nullities{0, 0};

    /// The end of the path meets the reference Lagrangian.
    bool degenerate() const { return endpoint_nullities.second > 0; }
};

namespace detail {

inline double stacked_sigma_min(const Matrix& q1, const Matrix& q2) {
    Matrix s(q1.rows(), q1.cols() + q2.cols());
    s << q1, q2;
    const Vector sv = singular_values(s);
    return sv(sv.size() - 1);
}

template <class F>
double golden_minimize(F&& f, double lo, double hi, double tol) {
    constexpr double g = 0.6180339887498949;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    // the bracket ends are candidates too: the minimum may sit on an interval end
    double best = 0.5 * (lo + hi), fbest = f(best);
    for (double x : {lo, hi, x1, x2}) {
        const double fx = f(x);
        if (fx < fbest) {
            best = x;
            fbest = fx;
        }
    }
    return best;
}

inline int signature_of(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    int sig = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) sig += es.eigenvalues()(i) > 0 ? 1 : -1;
    return sig;
}

}  // namespace detail

/// Robbin–Salamon index of the pair (Λ₁, Λ₂) over [a, b]: endpoint crossings
/// weigh ½, interior crossings 1, each by the signature of the relative crossing
/// form Γ(Λ₂) − Γ(Λ₁) on Λ₁ ∩ Λ₂.
inline IndexReport rs_index(const LagrangianPath& l1, const LagrangianPath& l2, double a, double b,
                            const Config& cfg = {}) {
    if (!(b > a)) throw std::invalid_argument("rs_index needs a < b");
    const double len = b - a;

    std::set<double> pts{a, b};
    for (const auto* g : {&l1.grid(), &l2.grid()}) {
        for (double t : *g) {
            if (t > a && t < b) pts.insert(t);
        }
    }
    if (pts.size() < 65) {
        for (double t : uniform_grid(a, b, 65)) pts.insert(t);
    }
    std::vector<double> grid(pts.begin(), pts.end());
    // drop grid points that are closer together than the localisation tolerance
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [&](double x, double y) { return y - x < 1e-12 * std::max(1.0, len); }),
               grid.end());
    grid.back() = b;
    const std::size_t m = grid.size() - 1;

    auto sigma = [&](double t) {
        return detail::stacked_sigma_min(orthonormal_columns(l1.frame(t)), orthonormal_columns(l2.frame(t)));
    };
    std::vector<double> f(grid.size());
    for (std::size_t i = 0; i <= m; ++i) f[i] = sigma(grid[i]);

    const double h = cfg.fd_rel_step * len;
    auto form_on = [&](const LagrangianPath& lp, double t, const Matrix& vs) {
        const Matrix Z = lp.frame(t);
        const Matrix dZ = (lp.frame(t + h) - lp.frame(t - h)) / (2.0 * h);
        const Matrix coeffs = Z.completeOrthogonalDecomposition().solve(vs);
        return Matrix(coeffs.transpose() * symmetrized(Z.transpose() * lp.form() * dZ) * coeffs);
    };
    auto crossing_at = [&](double t) {
        const Matrix q1 = orthonormal_columns(l1.frame(t));
        const Matrix q2 = orthonormal_columns(l2.frame(t));
        Matrix s(q1.rows(), q1.cols() + q2.cols());
        s << q1, q2;
        Eigen::JacobiSVD<Matrix> svd(s, Eigen::ComputeFullV);
        const int k = std::max(1, count_below(svd.singularValues(), cfg.rank_tol));
        const Matrix null = svd.matrixV().rightCols(k);
        const Matrix vs = orthonormal_columns(q1 * null.topRows(q1.cols()));

        const Matrix gamma = symmetrized(form_on(l2, t, vs) - form_on(l1, t, vs));
        Eigen::SelfAdjointEigenSolver<Matrix> es(gamma, Eigen::EigenvaluesOnly);
        const Vector ev = es.eigenvalues();
        const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
        if (ev.cwiseAbs().minCoeff() < cfg.form_tol * scale) {
            throw IrregularCrossing("degenerate crossing form at t = " + std::to_string(t) + " (intersection dim " +
                                    std::to_string(k) + ", smallest |eigenvalue| " +
                                    std::to_string(ev.cwiseAbs().minCoeff()) + ")");
        }
        return Crossing{t, k, detail::signature_of(gamma), true};
    };

    // Each discrete local minimum of the indicator opens a window over its two
    // neighbouring intervals; the window is sub-sampled so that several
    // crossings inside one sample interval are seen (and rejected below).
    const double snap = std::max(10.0 * cfg.time_tol, 1e-9 * len);
    const double same = 1e-7 * len;
    constexpr int kSub = 16;
    std::vector<Crossing> found;
    for (std::size_t i = 0; i <= m; ++i) {
        const bool left_ok = i == 0 || f[i] <= f[i - 1];
        const bool right_ok = i == m || f[i] <= f[i + 1];
        if (!left_ok || !right_ok) continue;
        const auto st = uniform_grid(grid[i == 0 ? 0 : i - 1], grid[i == m ? m : i + 1], 2 * kSub + 1);
        std::vector<double> sf(st.size());
        for (std::size_t j = 0; j < st.size(); ++j) sf[j] = sigma(st[j]);
        const std::size_t last = st.size() - 1;
        for (std::size_t j = 0; j <= last; ++j) {
            if ((j > 0 && sf[j] > sf[j - 1]) || (j < last && sf[j] > sf[j + 1])) continue;
            double t = detail::golden_minimize(sigma, st[j == 0 ? 0 : j - 1], st[j == last ? last : j + 1],
                                               cfg.time_tol);
            if (!(sigma(t) < cfg.rank_tol)) continue;
            if (t - a < snap) t = a;
            if (b - t < snap) t = b;
            const bool known = std::any_of(found.begin(), found.end(),
                                           [&](const Crossing& c) { return std::abs(c.time - t) <= same; });
            if (!known) found.push_back(crossing_at(t));
        }
    }
    std::sort(found.begin(), found.end(), [](const Crossing& x, const Crossing& y) { return x.time < y.time; });
    for (std::size_t i = 1; i < found.size(); ++i) {
        const auto it = std::upper_bound(grid.begin(), grid.end(), found[i - 1].time);
        const double spacing = it == grid.end() ? grid[m] - grid[m - 1] : *it - *(it - 1);
        if (found[i].time - found[i - 1].time < spacing) {
            throw Undersampled("crossings at t = " + std::to_string(found[i - 1].time) + " and t = " +
                               std::to_string(found[i].time) + " lie within one sample interval");
        }
    }

    IndexReport report;
    std::int64_t doubled = 0;
    for (const Crossing& c : found) doubled += (c.time == a || c.time == b) ? c.signature : 2 * c.signature;
    report.crossings = std::move(found);
    report.value = HalfInt::from_doubled(doubled);

    auto dim_at = [&](double t) {
        const Matrix q1 = orthonormal_columns(l1.frame(t));
        const Matrix q2 = orthonormal_columns(l2.frame(t));
        Matrix s(q1.rows(), q1.cols() + q2.cols());
        s << q1, q2;
        return count_below(singular_values(s), cfg.rank_tol);
    };
    report.endpoint_nullities = {dim_at(a), dim_at(b)};
    return report;
}

/// Conley–Zehnder index as the index of (W, Gr Φ) over the whole path.
/// The sign convention gives R(πt), t ∈ [0, 1] index 1.
inline IndexReport cz_report(const SymplecticPath& path, const Config& cfg = {}) {
    if (!path.based()) throw std::invalid_argument("cz_index needs a path based at the identity");
    const auto S = standard_structures(path.n());
    return rs_index(LagrangianPath::constant(S.W, product_form(path.n())), LagrangianPath::graph(path), path.start(),
                    path.end(), cfg);
}

inline HalfInt cz_index(const SymplecticPath& path, const Config& cfg = {}) { return cz_report(path, cfg).value; }

/// μ_k of a path on [0, τ]: index of (L_k, Φ(t)L_k) on [0, τ/2].
inline IndexReport brake_report(const SymplecticPath& path, int k, const Config& cfg = {}) {
    if (k != 1 && k != 2) throw std::invalid_argument("brake index k must be 1 or 2");
    if (!path.based()) throw std::invalid_argument("brake_mu needs a path based at the identity");
    const auto S = standard_structures(path.n());
    const Lagrangian& L = k == 1 ? S.L1 : S.L2;
    const double half = path.start() + 0.5 * (path.end() - path.start());
    return rs_index(LagrangianPath::constant(L, omega_form(path.n())), LagrangianPath::image(path, L), path.start(),
                    half, cfg);
}

inline HalfInt brake_mu(const SymplecticPath& path, int k, const Config& cfg = {}) {
    return brake_report(path, k, cfg).value;
}

struct Nullities {
    int nu = 0;
    int nu1 = 0;
    int nu2 = 0;
};

inline Nullities nullities(const SymplecticPath& path, const Config& cfg = {}) {
    if (!path.based()) throw std::invalid_argument("nullities needs a path based at the identity");
    const int n = path.n();
    const auto S = standard_structures(n);
    const Matrix end = path.back();
    const Matrix mid = path.at(path.start() + 0.5 * (path.end() - path.start()));
    Nullities out;
    out.nu = count_below(singular_values(end - Matrix::Identity(2 * n, 2 * n)), cfg.rank_tol);
    out.nu1 = intersection_dimension(S.L1.mapped(mid), S.L1, cfg.rank_tol);
    out.nu2 = intersection_dimension(S.L2.mapped(mid), S.L2, cfg.rank_tol);
    return out;
}

inline void require_matching(const UnitaryLoop& phi, const SymplecticPath& path) {
    if (phi.n() != path.n()) throw std::invalid_argument("loop and path dimensions differ");
    if (std::abs(phi.period() - (path.end() - path.start())) > 1e-12 * std::max(1.0, phi.period())) {
        throw std::invalid_argument("loop period does not match the path interval");
    }
}

/// Conley–Zehnder index of t ↦ φ(t)Φ(t).
inline HalfInt loop_shift_cz(const UnitaryLoop& phi, const SymplecticPath& path, const Config& cfg = {}) {
    require_matching(phi, path);
    return cz_index(product(phi, path), cfg);
}

/// μ₁ of t ↦ φ(t)Φ(t); φ must satisfy φ(−t)N₀ = N₀φ(t).
inline HalfInt loop_shift_mu1(const UnitaryLoop& phi, const SymplecticPath& path, const Config& cfg = {}) {
    require_matching(phi, path);
    const double residual = check_brake_symmetry(phi);
    if (residual > cfg.symplectic_tol) {
        throw SymmetryViolated("loop violates the brake constraint (residual " + std::to_string(residual) + ")");
    }
    return brake_mu(product(phi, path), 1, cfg);
}

}  // namespace brakeidx
