#pragma once

// Index bookkeeping for model Cauchy–Riemann operators: Fourier mode counting
// on caps, gluing ledgers and the closed-surface Riemann–Roch value.

#include "brakeidx/errors.hpp"
#include "brakeidx/half_int.hpp"
#include "brakeidx/linalg.hpp"

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace brakeidx {

enum class CapSign { Positive, Negative };

inline const char* to_string(CapSign s) { return s == CapSign::Positive ? "positive" : "negative"; }

struct CapSpec {
    CapSign sign = CapSign::Positive;
    double omega = kPi;
    int rank = 1;
};

struct KernelCokernel {
    int ker = 0;
    int coker = 0;
    int index() const { return ker - coker; }
};

namespace detail {

inline void require_nonresonant(double omega) {
    const double x = omega / kTwoPi;
    if (!std::isfinite(x) || std::abs(x - std::round(x)) < 1e-9) {
        throw OmegaResonant("omega/2pi = " + std::to_string(x) + " is an integer");
    }
}

}  // namespace detail

/// Counts the real Fourier modes solving the model equation on a cap.
/// Per rank-one block with x = ω/2π: ker = #{k : 0 ≤ k < x}, coker = #{k : x < k ≤ −1}.
/// The coker condition is read as the set condition; the threshold "ω > −1"
/// that also appears in the derivation is taken as a misprint for it.
/// A negative cap is the positive cap of the reversed end, i.e. the count at −ω.
inline KernelCokernel cap_kernel_cokernel(const CapSpec& spec) {
    if (spec.rank < 1) throw std::invalid_argument("cap rank must be positive");
    detail::require_nonresonant(spec.omega);
    const double x = (spec.sign == CapSign::Positive ? spec.omega : -spec.omega) / kTwoPi;
    KernelCokernel kc;
    if (x > 0) kc.ker = static_cast<int>(std::floor(x)) + 1;
    if (x < 0) kc.coker = static_cast<int>(std::floor(-x));
    kc.ker *= spec.rank;
    kc.coker *= spec.rank;
    return kc;
}

/// Low-resolution cross-check of `cap_kernel_cokernel` for ω = ±π. Each real
/// mode k reduces to a'(s) = (2πk − β(s)ω)a(s) on the cylinder s ∈ [−L, L],
/// β rising from 0 to 1 on (2, 3); the log-amplitude is integrated by the
/// trapezoid rule and the mode is classified by its behaviour at both ends.
inline KernelCokernel cap_kernel_cokernel_slow(const CapSpec& spec, int modes = 6, double L = 12.0,
                                               int steps = 4800) {
    if (std::abs(std::abs(spec.omega) - kPi) > 1e-6) {
        throw std::invalid_argument("the slow cap oracle is only provided for omega = +-pi");
    }
    const double omega = spec.sign == CapSign::Positive ? spec.omega : -spec.omega;
    auto beta = [](double s) {
        if (s <= 2.0) return 0.0;
        if (s >= 3.0) return 1.0;
        const double u = s - 2.0;
        return u * u * (3.0 - 2.0 * u);
    };
    const double h = 2.0 * L / steps;
    KernelCokernel kc;
    for (int k = -modes; k <= modes; ++k) {
        // log a(−L) and log a(L) for the solution normalised by a(0) = 1
        auto slope = [&](double s, double sign) { return sign * (kTwoPi * k - beta(s) * omega); };
        double left = 0.0, right = 0.0, left_adj = 0.0, right_adj = 0.0;
        for (int i = 0; i < steps / 2; ++i) {
            const double s0 = i * h, s1 = (i + 1) * h;
            right += 0.5 * h * (slope(s0, 1) + slope(s1, 1));
            right_adj += 0.5 * h * (slope(s0, -1) + slope(s1, -1));
            left -= 0.5 * h * (slope(-s0, 1) + slope(-s1, 1));
            left_adj -= 0.5 * h * (slope(-s0, -1) + slope(-s1, -1));
        }
        // bounded towards the centre (s → −∞) and decaying along the end (s → +∞)
        if (left <= 1.0 && right < -1.0) ++kc.ker;
        // the adjoint mode sits on e^{−2πks}; at the centre only k ≤ −1 is allowed
        if (k <= -1 && left_adj < -1.0 && right_adj < -1.0) ++kc.coker;
    }
    kc.ker *= spec.rank;
    kc.coker *= spec.rank;
    return kc;
}

/// rank/2 ± μ₁ for symmetric ends, rank ± μ_CZ for periodic pairs.
inline HalfInt cap_index(CapSign sign, HalfInt boundary_index, int rank, bool is_pair = false) {
    const HalfInt base = is_pair ? HalfInt::from_int(rank) : halves(rank);
    return sign == CapSign::Positive ? base + boundary_index : base - boundary_index;
}

struct Boundary {
    std::string label;
    HalfInt index;
    bool symmetric = true;
};

struct Piece {
    std::string label;
    HalfInt index;
    std::vector<Boundary> boundaries;
};

struct IndexLedger {
    std::vector<std::pair<std::string, HalfInt>> pieces;
    HalfInt total;
};

/// Sums piece indices after checking that every matched pair of boundary
/// labels exists, is used once and carries identical boundary data.
inline IndexLedger glue(const std::vector<Piece>& pieces,
                        const std::vector<std::pair<std::string, std::string>>& matches) {
    std::map<std::string, const Boundary*> by_label;
    for (const auto& p : pieces) {
        for (const auto& b : p.boundaries) {
            if (!by_label.emplace(b.label, &b).second) throw BoundaryMismatch("duplicate boundary label " + b.label);
        }
    }
    std::map<std::string, int> used;
    for (const auto& [x, y] : matches) {
        const auto ix = by_label.find(x), iy = by_label.find(y);
        if (ix == by_label.end() || iy == by_label.end()) {
            throw BoundaryMismatch("unknown boundary label in match " + x + " ~ " + y);
        }
        if (++used[x] > 1 || ++used[y] > 1 || x == y) throw BoundaryMismatch("boundary matched twice: " + x + ", " + y);
        if (ix->second->index != iy->second->index || ix->second->symmetric != iy->second->symmetric) {
            throw BoundaryMismatch("boundary data differ across " + x + " ~ " + y + " (" + ix->second->index.str() +
                                   " vs " + iy->second->index.str() + ")");
        }
    }
    IndexLedger ledger;
    for (const auto& p : pieces) {
        ledger.pieces.emplace_back(p.label, p.index);
        ledger.total += p.index;
    }
    return ledger;
}

/// (n/2)(2 − 2g) + c₁ on a closed symmetric surface of genus g.
inline HalfInt riemann_roch_brake(int genus, int c1, int rank) {
    if (genus < 0 || rank < 1) throw std::invalid_argument("riemann_roch_brake needs genus >= 0 and rank >= 1");
    return halves(static_cast<std::int64_t>(rank) * (2 - 2 * genus)) + HalfInt::from_int(c1);
}

}  // namespace brakeidx
