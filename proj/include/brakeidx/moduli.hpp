#pragma once

// Dimension bookkeeping for moduli spaces of curves with brake symmetry:
// Fredholm index, Teichmüller and automorphism dimensions, virtual dimension,
// orbit degrees, iterates and the good/bad classification of Reeb orbits.

#include "brakeidx/config.hpp"
#include "brakeidx/errors.hpp"
#include "brakeidx/half_int.hpp"
#include "brakeidx/index.hpp"
#include "brakeidx/symplectic.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace brakeidx {

enum class OrbitKind { BrakeOrbit, ReebPair };

inline const char* to_string(OrbitKind k) { return k == OrbitKind::BrakeOrbit ? "brake" : "pair"; }

/// Index data of one asymptotic end. A ReebPair stands for a symmetric pair of
/// periodic orbits and is counted once.
struct OrbitRecord {
    OrbitKind kind = OrbitKind::BrakeOrbit;
    std::optional<HalfInt> mu1;    ///< brake orbits only
    std::optional<HalfInt> mu_cz;  ///< pairs only, integer valued
    Nullities nullities;
    int multiplicity = 1;
    double period = 1.0;
    std::string label;

    static OrbitRecord brake(HalfInt mu1, std::string label = {}) {
        OrbitRecord r;
        r.kind = OrbitKind::BrakeOrbit;
        r.mu1 = mu1;
        r.label = std::move(label);
        return r;
    }
    static OrbitRecord pair(HalfInt mu_cz, std::string label = {}) {
        OrbitRecord r;
        r.kind = OrbitKind::ReebPair;
        r.mu_cz = mu_cz;
        r.label = std::move(label);
        return r;
    }

    /// μ₁ for brake orbits, μ_CZ for pairs.
    HalfInt index() const { return kind == OrbitKind::BrakeOrbit ? *mu1 : *mu_cz; }
};

struct ModuliSpec {
    int n = 3;
    int genus = 0;
    std::vector<OrbitRecord> positive_brake;
    std::vector<OrbitRecord> negative_brake;
    std::vector<OrbitRecord> positive_pairs;
    std::vector<OrbitRecord> negative_pairs;
    int c1 = 0;  ///< first Chern number of a user-chosen trivialization; 0 by default

    int s() const { return static_cast<int>(positive_brake.size() + negative_brake.size()); }
    int t() const { return static_cast<int>(positive_pairs.size() + negative_pairs.size()); }
    /// Boundary punctures plus twice the interior ones.
    int puncture_weight() const { return s() + 2 * t(); }
};

/// Throws std::invalid_argument for malformed records and DegenerateOrbit for degenerate ones.
inline void validate_record(const OrbitRecord& r, OrbitKind expected, const std::string& where) {
    const std::string name = where + (r.label.empty() ? "" : " (" + r.label + ")");
    if (r.kind != expected) throw std::invalid_argument(name + ": record kind does not match its list");
    if (r.kind == OrbitKind::BrakeOrbit && (!r.mu1 || r.mu_cz)) {
        throw std::invalid_argument(name + ": brake orbit needs mu1 and no mu_cz");
    }
    if (r.kind == OrbitKind::ReebPair) {
        if (!r.mu_cz || r.mu1) throw std::invalid_argument(name + ": Reeb pair needs mu_cz and no mu1");
        if (!r.mu_cz->is_integer()) throw std::invalid_argument(name + ": mu_cz must be an integer");
    }
    if (r.multiplicity < 1) throw std::invalid_argument(name + ": multiplicity must be positive");
    if (!(r.period > 0.0)) throw std::invalid_argument(name + ": period must be positive");
    if (r.nullities.nu != 0 || (r.kind == OrbitKind::BrakeOrbit && r.nullities.nu1 != 0)) {
        throw DegenerateOrbit(name + ": orbit is degenerate (nu = " + std::to_string(r.nullities.nu) +
                              ", nu1 = " + std::to_string(r.nullities.nu1) + ")");
    }
}

inline void validate(const ModuliSpec& spec) {
    if (spec.n < 1) throw std::invalid_argument("n must be positive");
    if (spec.genus < 0) throw std::invalid_argument("genus must be non-negative");
    auto check = [](const std::vector<OrbitRecord>& v, OrbitKind k, const std::string& list) {
        for (std::size_t i = 0; i < v.size(); ++i) validate_record(v[i], k, list + "[" + std::to_string(i) + "]");
    };
    check(spec.positive_brake, OrbitKind::BrakeOrbit, "positive_brake");
    check(spec.negative_brake, OrbitKind::BrakeOrbit, "negative_brake");
    check(spec.positive_pairs, OrbitKind::ReebPair, "positive_pairs");
    check(spec.negative_pairs, OrbitKind::ReebPair, "negative_pairs");
}

namespace detail {

inline HalfInt sum_index(const std::vector<OrbitRecord>& v) {
    HalfInt total;
    for (const auto& r : v) total += r.index();
    return total;
}

/// Σμ₁(q) − Σμ₁(q') + Σμ_CZ(p) − Σμ_CZ(p').
inline HalfInt asymptotic_terms(const ModuliSpec& spec) {
    return sum_index(spec.positive_brake) - sum_index(spec.negative_brake) + sum_index(spec.positive_pairs) -
           sum_index(spec.negative_pairs);
}

/// 2 − 2g − s − 2t
inline std::int64_t reduced_euler(const ModuliSpec& spec) { return 2 - 2 * spec.genus - spec.puncture_weight(); }

}  // namespace detail

/// Index of the total operator: (n/2)(2 − 2g − s − 2t) + asymptotic terms + N/2 + c₁, N = s + 2t.
inline HalfInt fredholm_index(const ModuliSpec& spec) {
    validate(spec);
    return halves(spec.n * detail::reduced_euler(spec)) + detail::asymptotic_terms(spec) +
           halves(spec.puncture_weight()) + HalfInt::from_int(spec.c1);
}

inline int teichmuller_dim(int genus, int s, int t) { return std::max(0, 3 * genus + s + 2 * t - 3); }

inline int aut_dim(int genus, int s, int t) { return std::max(0, 3 - 3 * genus - s - 2 * t); }

/// ((n − 3)/2)(2 − 2g − s − 2t) + asymptotic terms + c₁.
inline HalfInt closed_virtual_dimension(const ModuliSpec& spec) {
    validate(spec);
    return halves((spec.n - 3) * detail::reduced_euler(spec)) + detail::asymptotic_terms(spec) +
           HalfInt::from_int(spec.c1);
}

/// μ₁ + (n − 3)/2 for brake orbits, μ_CZ + n − 3 for pairs.
inline HalfInt degree(const OrbitRecord& r, int n) {
    return r.kind == OrbitKind::BrakeOrbit ? *r.mu1 + halves(n - 3) : *r.mu_cz + HalfInt::from_int(n - 3);
}

struct DimensionReport {
    HalfInt fredholm_index_DF;
    int teichmuller_dim = 0;
    int aut_dim = 0;
    HalfInt virtual_dim;         ///< fredholm + teichmüller − aut
    HalfInt closed_formula;      ///< the direct formula; equal to virtual_dim
    std::vector<std::pair<std::string, HalfInt>> per_orbit_degrees;
    bool half_integer = false;   ///< even n with odd s gives a proper half-integer

    bool routes_agree() const { return virtual_dim == closed_formula; }
};

inline DimensionReport virtual_dimension(const ModuliSpec& spec) {
    DimensionReport rep;
    rep.fredholm_index_DF = fredholm_index(spec);
    rep.teichmuller_dim = teichmuller_dim(spec.genus, spec.s(), spec.t());
    rep.aut_dim = aut_dim(spec.genus, spec.s(), spec.t());
    rep.virtual_dim = rep.fredholm_index_DF + HalfInt::from_int(rep.teichmuller_dim - rep.aut_dim);
    rep.closed_formula = closed_virtual_dimension(spec);
    if (!rep.routes_agree()) {
        throw std::logic_error("virtual dimension routes disagree: " + rep.virtual_dim.str() + " vs " +
                               rep.closed_formula.str());
    }
    rep.half_integer = !rep.virtual_dim.is_integer();
    auto add = [&](const std::vector<OrbitRecord>& v, const char* prefix) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string label = v[i].label.empty() ? prefix + std::to_string(i) : v[i].label;
            rep.per_orbit_degrees.emplace_back(label, degree(v[i], spec.n));
        }
    };
    add(spec.positive_brake, "q");
    add(spec.negative_brake, "q'");
    add(spec.positive_pairs, "p");
    add(spec.negative_pairs, "p'");
    return rep;
}

// ---------------------------------------------------------------------------
// Iterates and good/bad orbits
// ---------------------------------------------------------------------------

/// m-fold iterate of a based path on [0, τ]: γ_m(t) = γ(t − jτ)γ(τ)^j on [jτ, (j + 1)τ].
/// Valid when the generating B(t) is τ-periodic.
inline SymplecticPath iterate_path(const SymplecticPath& path, int m) {
    if (m < 1) throw std::invalid_argument("iterate needs m >= 1");
    if (!path.based() || path.start() != 0.0) throw std::invalid_argument("iterate needs a based path on [0, tau]");
    if (m == 1) return path;
    const double tau = path.end();
    const int dim = 2 * path.n();
    std::vector<Matrix> powers{Matrix::Identity(dim, dim)};
    for (int j = 1; j < m; ++j) powers.push_back(powers.back() * path.back());

    std::vector<double> times;
    std::vector<Matrix> values;
    for (int j = 0; j < m; ++j) {
        const auto& ts = path.times();
        for (std::size_t i = j == 0 ? 0 : 1; i < ts.size(); ++i) {
            times.push_back(ts[i] + j * tau);
            values.push_back(path.values()[i] * powers[static_cast<std::size_t>(j)]);
        }
    }
    times.back() = m * tau;
    auto eval = [path, powers, tau, m](double t) {
        const int j = std::clamp(static_cast<int>(std::floor(t / tau)), 0, m - 1);
        return Matrix(path.at(t - j * tau) * powers[static_cast<std::size_t>(j)]);
    };
    // powers of a symplectic matrix lose symplecticity only at rounding level, relative to their size
    return SymplecticPath(path.n(), std::move(times), std::move(values), eval, true, 1e-8);
}

struct IterateRow {
    int m = 1;
    HalfInt mu_cz;
    HalfInt degree;  ///< |x^m| = μ_CZ + n − 3
    int parity = 0;
    bool good = true;
};

/// |x^m| for m = 1..max_m; an even iterate is bad when its parity differs from
/// that of the odd iterates (which all share the parity of |x|).
inline std::vector<IterateRow> classify_good_bad(const SymplecticPath& path, int n, int max_m,
                                                 const Config& cfg = {}) {
    if (max_m < 1) throw std::invalid_argument("max_m must be positive");
    std::vector<IterateRow> rows;
    for (int m = 1; m <= max_m; ++m) {
        const SymplecticPath it = iterate_path(path, m);
        const int nu = nullities(it, cfg).nu;
        if (nu > 0) {
            throw DegenerateIterate("iterate m = " + std::to_string(m) + " is degenerate (nu = " +
                                    std::to_string(nu) + ")");
        }
        IterateRow row;
        row.m = m;
        row.mu_cz = cz_index(it, cfg);
        row.degree = row.mu_cz + HalfInt::from_int(n - 3);
        row.parity = row.degree.parity();
        rows.push_back(row);
    }
    for (auto& row : rows) row.good = row.m % 2 == 1 || row.parity == rows.front().parity;
    return rows;
}

}  // namespace brakeidx
