#pragma once

// Fourier–Galerkin model of A = −J₀ d/dt − S(t) on loops, optionally restricted
// to the brake-symmetric subspace w(−t) = N₀w(t), and spectral flow of families.

#include "brakeidx/config.hpp"
#include "brakeidx/errors.hpp"
#include "brakeidx/half_int.hpp"
#include "brakeidx/linalg.hpp"
#include "brakeidx/symplectic.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace brakeidx {

enum class Domain { Full, BrakeSymmetric };

inline const char* to_string(Domain d) { return d == Domain::Full ? "full" : "brake"; }

/// τ-periodic loop of symmetric matrices, checked on a sample grid at construction.
class SymmetricLoop {
public:
    SymmetricLoop(int n, MatrixFn S, double period, bool brake_symmetric, double tol = 1e-9)
        : n_(n), S_(std::move(S)), period_(period), brake_(brake_symmetric) {
        if (n < 1 || !(period > 0.0)) throw std::invalid_argument("invalid symmetric loop");
        for (double t : uniform_grid(0.0, period, 65)) {
            const Matrix m = S_(t);
            if (m.rows() != 2 * n || m.cols() != 2 * n) throw std::invalid_argument("S(t) has wrong size");
            if (max_abs(m - m.transpose()) > tol * std::max(1.0, max_abs(m))) {
                throw std::invalid_argument("S(t) is not symmetric at t = " + std::to_string(t));
            }
        }
        if (brake_) {
            const double r = brake_symmetry_residual(S_, period, 64);
            if (r > std::max(tol, 1e-9)) {
                throw SymmetryViolated("loop flagged brake-symmetric has residual " + std::to_string(r));
            }
        }
    }

    int n() const { return n_; }
    double period() const { return period_; }
    bool brake_symmetric() const { return brake_; }
    Matrix operator()(double t) const { return S_(t); }
    const MatrixFn& fn() const { return S_; }

private:
    int n_;
    MatrixFn S_;
    double period_;
    bool brake_;
};

inline SymmetricLoop constant_loop(const Matrix& S, double period = 1.0) {
    const int n = static_cast<int>(S.rows()) / 2;
    return SymmetricLoop(n, [S](double) { return S; }, period, max_abs(n0(n) * S * n0(n) - S) == 0.0);
}

class AsymptoticOperator {
public:
    AsymptoticOperator(SymmetricLoop loop, Domain domain) : loop_(std::move(loop)), domain_(domain) {
        if (domain_ == Domain::BrakeSymmetric && !loop_.brake_symmetric()) {
            throw std::invalid_argument("brake-symmetric domain needs a brake-symmetric loop");
        }
    }
    const SymmetricLoop& loop() const { return loop_; }
    Domain domain() const { return domain_; }

    /// Dimension of the near-zero cluster compared between truncations.
    int cluster_size() const { return domain_ == Domain::Full ? 2 * loop_.n() : loop_.n(); }

private:
    SymmetricLoop loop_;
    Domain domain_;
};

/// Symmetric Galerkin matrix in the orthonormal basis {1, √2cos κ_k t, √2sin κ_k t} ⊗ e_i,
/// component-major. The brake-symmetric domain keeps sines in the first n
/// components and cosines (with the constant) in the last n.
inline Matrix galerkin_matrix(const AsymptoticOperator& op, int K) {
    if (K < 1) throw std::invalid_argument("Fourier truncation must be positive");
    const int n = op.loop().n();
    const int dim = 2 * n;
    const int nb = 2 * K + 1;
    const double tau = op.loop().period();
    const int M = 8 * K + 64;

    // columns: const, cos_1, sin_1, cos_2, sin_2, ...
    Matrix Phi(M, nb);
    for (int q = 0; q < M; ++q) {
        const double t = tau * q / M;
        Phi(q, 0) = 1.0;
        for (int k = 1; k <= K; ++k) {
            const double a = kTwoPi * k * t / tau;
            Phi(q, 2 * k - 1) = std::sqrt(2.0) * std::cos(a);
            Phi(q, 2 * k) = std::sqrt(2.0) * std::sin(a);
        }
    }
    std::vector<Matrix> samples(static_cast<std::size_t>(M));
    for (int q = 0; q < M; ++q) samples[static_cast<std::size_t>(q)] = op.loop()(tau * q / M);

    Matrix D = Matrix::Zero(nb, nb);
    for (int k = 1; k <= K; ++k) {
        const double kappa = kTwoPi * k / tau;
        D(2 * k, 2 * k - 1) = kappa;
        D(2 * k - 1, 2 * k) = -kappa;
    }
    const Matrix J = j0(n);
    Matrix A = Matrix::Zero(dim * nb, dim * nb);
    Vector w(M);
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
            for (int q = 0; q < M; ++q) w(q) = samples[static_cast<std::size_t>(q)](i, j);
            Matrix block = -(Phi.transpose() * w.asDiagonal() * Phi) / static_cast<double>(M);
            if (J(i, j) != 0.0) block += J(i, j) * D;
            A.block(i * nb, j * nb, nb, nb) = block;
            if (j != i) A.block(j * nb, i * nb, nb, nb) = block.transpose();
        }
    }
    if (op.domain() == Domain::Full) return symmetrized(A);

    std::vector<int> keep;
    for (int i = 0; i < dim; ++i) {
        for (int m = 0; m < nb; ++m) {
            const bool is_sine = m > 0 && m % 2 == 0;
            if ((i < n) == is_sine) keep.push_back(i * nb + m);
        }
    }
    Matrix B(keep.size(), keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r)
        for (std::size_t c = 0; c < keep.size(); ++c) B(r, c) = A(keep[r], keep[c]);
    return symmetrized(B);
}

inline Vector galerkin_spectrum(const AsymptoticOperator& op, int K) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(galerkin_matrix(op, K), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

struct Spectrum {
    int K = 0;
    Vector eigenvalues;          ///< ascending, truncation K
    double zero_threshold = 0.0;
    double truncation_shift = 0.0;  ///< max drift of the near-zero cluster from K to 2K
};

namespace detail {

/// Eigenvalues within the modulus of the `count`-th smallest |λ| (ties included).
inline std::vector<double> near_zero(const Vector& ev, int count) {
    std::vector<double> mags(ev.data(), ev.data() + ev.size());
    for (double& m : mags) m = std::abs(m);
    std::sort(mags.begin(), mags.end());
    const double r = mags[std::min<std::size_t>(mags.size(), static_cast<std::size_t>(count)) - 1];
    std::vector<double> v;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i)) <= r + 1e-9 * std::max(1.0, r)) v.push_back(ev(i));
    }
    return v;
}

inline double nearest_distance(double x, const Vector& ev) { return (ev.array() - x).abs().minCoeff(); }

}  // namespace detail

/// Spectrum at truncation K, with the near-zero cluster checked against 2K.
inline Spectrum discretize(const AsymptoticOperator& op, int K, const Config& cfg = {}) {
    if (K < 4) throw std::invalid_argument("discretize needs K >= 4");
    Spectrum s;
    s.K = K;
    s.eigenvalues = galerkin_spectrum(op, K);
    const Vector fine = galerkin_spectrum(op, 2 * K);
    // two-sided nearest-neighbour distance between the near-zero clusters
    for (double x : detail::near_zero(s.eigenvalues, op.cluster_size())) {
        s.truncation_shift = std::max(s.truncation_shift, detail::nearest_distance(x, fine));
    }
    for (double x : detail::near_zero(fine, op.cluster_size())) {
        s.truncation_shift = std::max(s.truncation_shift, detail::nearest_distance(x, s.eigenvalues));
    }
    if (s.truncation_shift > cfg.truncation_tol) {
        throw TruncationUnstable("near-zero eigenvalues move by " + std::to_string(s.truncation_shift) +
                                 " between K = " + std::to_string(K) + " and K = " + std::to_string(2 * K));
    }
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < fine.size(); ++i) {
        if (std::abs(fine(i)) >= cfg.zero_eig_tol) gap = std::min(gap, std::abs(fine(i)));
    }
    s.zero_threshold = std::min(cfg.zero_eig_tol, gap / 10.0);
    return s;
}

inline int kernel_dimension(const Spectrum& s) { return count_below(s.eigenvalues, s.zero_threshold); }

inline int kernel_dimension(const AsymptoticOperator& op, int K, const Config& cfg = {}) {
    return kernel_dimension(discretize(op, K, cfg));
}

/// Based solution of ẏ = J₀S(t)y over one period; its nullities describe the kernel.
inline SymplecticPath loop_fundamental_solution(const SymmetricLoop& loop, const Config& cfg = {}) {
    return fundamental_solution(loop.fn(), loop.period(), cfg.ode_steps, cfg);
}

// ---------------------------------------------------------------------------
// Families and spectral flow
// ---------------------------------------------------------------------------

using FamilyFn = std::function<Matrix(double s, double t)>;

/// s ↦ A(s) for s ∈ [s_min, s_max]; the end operators play the roles of the limits at ∓∞.
class OperatorFamily {
public:
    OperatorFamily(int n, double period, Domain domain, FamilyFn S, double s_min = 0.0, double s_max = 1.0)
        : n_(n), period_(period), domain_(domain), S_(std::move(S)), s_min_(s_min), s_max_(s_max) {
        if (!(s_max > s_min)) throw std::invalid_argument("family needs s_min < s_max");
    }

    int n() const { return n_; }
    double period() const { return period_; }
    Domain domain() const { return domain_; }
    double s_min() const { return s_min_; }
    double s_max() const { return s_max_; }

    SymmetricLoop loop(double s) const {
        FamilyFn S = S_;
        return SymmetricLoop(n_, [S, s](double t) { return S(s, t); }, period_, domain_ == Domain::BrakeSymmetric);
    }
    AsymptoticOperator op(double s) const { return AsymptoticOperator(loop(s), domain_); }

    /// Same family traversed backwards.
    OperatorFamily reversed() const {
        FamilyFn S = S_;
        const double lo = s_min_, hi = s_max_;
        return OperatorFamily(n_, period_, domain_, [S, lo, hi](double s, double t) { return S(lo + hi - s, t); },
                              s_min_, s_max_);
    }

private:
    int n_;
    double period_;
    Domain domain_;
    FamilyFn S_;
    double s_min_, s_max_;
};

/// Smoothstep 3s² − 2s³ clamped to [0, 1].
inline double smoothstep(double s) {
    s = std::clamp(s, 0.0, 1.0);
    return s * s * (3.0 - 2.0 * s);
}

/// S(s, t) = (1 − β)S⁻(t) + βS⁺(t) + β(1 − β)P(t) on s ∈ [0, 1].
inline OperatorFamily interpolating_family(MatrixFn S_minus, MatrixFn S_plus, int n, double period, Domain domain,
                                           MatrixFn P = {}) {
    return OperatorFamily(n, period, domain, [=](double s, double t) {
        const double b = smoothstep(s);
        Matrix m = (1.0 - b) * S_minus(t) + b * S_plus(t);
        if (P) m += b * (1.0 - b) * P(t);
        return m;
    });
}

struct FlowCrossing {
    double s = 0.0;
    int multiplicity = 0;
    int sign = 0;  ///< +1 when eigenvalues pass downward through 0
};

struct SpectralFlowReport {
    int flow = 0;
    std::vector<FlowCrossing> crossings;
};

/// Signed count of eigenvalues of A(s) passing through 0, downward counted
/// positively, so flow = #neg(A(s_max)) − #neg(A(s_min)) in the truncation.
/// Brackets where the negative count changes are bisected until the secant
/// slopes of the crossing eigenvalues on both halves agree with the whole bracket.
inline SpectralFlowReport spectral_flow_report(const OperatorFamily& fam, int K, const Config& cfg = {}) {
    const double lo = fam.s_min(), hi = fam.s_max();
    for (double s : {lo, hi}) {
        const int kd = kernel_dimension(fam.op(s), K, cfg);
        if (kd != 0) {
            throw EndpointDegenerate("end operator at s = " + std::to_string(s) + " has kernel of dimension " +
                                     std::to_string(kd));
        }
    }
    auto spectrum = [&](double s) { return galerkin_spectrum(fam.op(s), K); };
    auto negatives = [](const Vector& ev) { return static_cast<int>((ev.array() < 0.0).count()); };

    const int points = std::max(2, cfg.s_grid_points);
    const double floor = cfg.s_grid_floor * (hi - lo);
    std::vector<double> grid = uniform_grid(lo, hi, points);
    std::vector<Vector> specs;
    for (double s : grid) specs.push_back(spectrum(s));

    SpectralFlowReport report;
    struct Bracket {
        double l, r;
        Vector el, er;
    };
    for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
        std::vector<Bracket> todo{{grid[g], grid[g + 1], specs[g], specs[g + 1]}};
        while (!todo.empty()) {
            Bracket br = std::move(todo.back());
            todo.pop_back();
            const int nl = negatives(br.el), nr = negatives(br.er);
            if (nl == nr) continue;
            const double mid = 0.5 * (br.l + br.r);
            const Vector em = spectrum(mid);
            const int nm = negatives(em);
            const int first = std::min(nl, nr), last = std::max(nl, nr);
            bool linear = nm == nl || nm == nr;
            for (int i = first; linear && i < last; ++i) {
                const double whole = (br.er(i) - br.el(i)) / (br.r - br.l);
                const double left = (em(i) - br.el(i)) / (mid - br.l);
                const double right = (br.er(i) - em(i)) / (br.r - mid);
                linear = whole != 0.0 && std::abs(left - whole) <= 0.1 * std::abs(whole) &&
                         std::abs(right - whole) <= 0.1 * std::abs(whole);
            }
            if (linear) {
                double root = 0.0;
                for (int i = first; i < last; ++i) {
                    root += br.l - br.el(i) * (br.r - br.l) / (br.er(i) - br.el(i));
                }
                root /= (last - first);
                report.crossings.push_back(FlowCrossing{root, last - first, nr > nl ? 1 : -1});
                report.flow += nr - nl;
                continue;
            }
            if (br.r - br.l <= floor) {
                throw CrossingUnresolved("could not isolate an eigenvalue crossing near s = " + std::to_string(mid));
            }
            todo.push_back({mid, br.r, em, br.er});
            todo.push_back({br.l, mid, br.el, em});
        }
    }
    std::sort(report.crossings.begin(), report.crossings.end(),
              [](const FlowCrossing& a, const FlowCrossing& b) { return a.s < b.s; });
    // a multiple crossing can be split by rounding into nearly coincident simple ones
    std::vector<FlowCrossing> merged;
    for (const auto& c : report.crossings) {
        if (!merged.empty() && merged.back().sign == c.sign && c.s - merged.back().s <= 1e-6 * (hi - lo)) {
            merged.back().multiplicity += c.multiplicity;
        } else {
            merged.push_back(c);
        }
    }
    report.crossings = std::move(merged);
    return report;
}

inline int spectral_flow(const OperatorFamily& fam, int K, const Config& cfg = {}) {
    return spectral_flow_report(fam, K, cfg).flow;
}

/// Index of the cylinder operator with the family's end operators as asymptotics.
inline HalfInt cylinder_index(const OperatorFamily& fam, int K, const Config& cfg = {}) {
    return HalfInt::from_int(spectral_flow(fam, K, cfg));
}

}  // namespace brakeidx
