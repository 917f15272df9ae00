#pragma once

// JSON documents, configuration layering and job dispatch behind the
// `brakeidx` command-line tool. Kept header-only so tests drive `run` directly.

#include "brakeidx/asymptotic.hpp"
#include "brakeidx/config.hpp"
#include "brakeidx/errors.hpp"
#include "brakeidx/hamiltonian.hpp"
#include "brakeidx/index.hpp"
#include "brakeidx/model_operator.hpp"
#include "brakeidx/moduli.hpp"
#include "brakeidx/symplectic.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace brakeidx::cli {

using json = nlohmann::json;

inline constexpr const char* kTool = "brakeidx";
inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"index", "spectral-flow", "vdim", "brake-orbit",
                                            "cap-oracle", "classify", "selfcheck"};
    return c;
}

enum ExitCode { kOk = 0, kCheckFailed = 1, kValidation = 2, kNumerical = 3 };

// ---------------------------------------------------------------------------
// Value conversions
// ---------------------------------------------------------------------------

inline json to_json(HalfInt h) { return json{{"doubled", h.doubled()}}; }

inline json to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline json to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json to_json(const Nullities& n) { return json{{"nu", n.nu}, {"nu1", n.nu1}, {"nu2", n.nu2}}; }

inline json to_json(const IndexReport& r) {
    json cs = json::array();
    for (const auto& c : r.crossings) {
        cs.push_back({{"t", c.time}, {"dim", c.intersection_dim}, {"signature", c.signature}});
    }
    return json{{"value", to_json(r.value)},
                {"crossings", cs},
                {"endpoint_nullities", {r.endpoint_nullities.first, r.endpoint_nullities.second}}};
}

/// Accepts {"doubled": k}, an integer, or a number on the half-integer lattice.
inline HalfInt half_int_from_json(const json& j) {
    if (j.is_object()) return HalfInt::from_doubled(j.at("doubled").get<std::int64_t>());
    if (j.is_number_integer()) return HalfInt::from_int(j.get<std::int64_t>());
    return HalfInt::round(j.get<double>(), 1e-12);
}

inline Matrix matrix_from_json(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols) {
            throw std::invalid_argument("ragged matrix");
        }
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
    }
    return m;
}

inline Vector vector_from_json(const json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

// ---------------------------------------------------------------------------
// Schema validation
// ---------------------------------------------------------------------------

/// Collects schema violations as "field/path: message".
class Checker {
public:
    std::vector<std::string> violations;

    void fail(const std::string& path, const std::string& msg) { violations.push_back(path + ": " + msg); }

    bool has(const json& doc, const std::string& key, const std::string& path) {
        if (!doc.is_object() || !doc.contains(key)) {
            fail(join(path, key), "missing");
            return false;
        }
        return true;
    }
    bool number(const json& doc, const std::string& key, const std::string& path) {
        if (!has(doc, key, path)) return false;
        if (!doc[key].is_number()) {
            fail(join(path, key), "must be a number");
            return false;
        }
        return true;
    }
    bool integer(const json& doc, const std::string& key, const std::string& path, std::int64_t min) {
        if (!has(doc, key, path)) return false;
        if (!doc[key].is_number_integer()) {
            fail(join(path, key), "must be an integer");
            return false;
        }
        if (doc[key].get<std::int64_t>() < min) {
            fail(join(path, key), "must be >= " + std::to_string(min));
            return false;
        }
        return true;
    }
    bool half_int(const json& j, const std::string& path) {
        if (j.is_object() && j.contains("doubled") && j["doubled"].is_number_integer()) return true;
        if (j.is_number_integer()) return true;
        if (j.is_number()) {
            const double d = 2.0 * j.get<double>();
            if (d == std::nearbyint(d)) return true;
        }
        fail(path, "must be a half-integer ({\"doubled\": k} or a multiple of 0.5)");
        return false;
    }
    bool square_matrix(const json& j, const std::string& path, int dim) {
        if (!j.is_array() || static_cast<int>(j.size()) != dim) {
            fail(path, "must be a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
            return false;
        }
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_array() || static_cast<int>(j[i].size()) != dim) {
                fail(path + "/" + std::to_string(i), "row must have " + std::to_string(dim) + " numbers");
                return false;
            }
            for (const auto& x : j[i]) {
                if (!x.is_number()) {
                    fail(path + "/" + std::to_string(i), "entries must be numbers");
                    return false;
                }
            }
        }
        return true;
    }
    bool number_array(const json& j, const std::string& path, int size) {
        if (!j.is_array() || (size >= 0 && static_cast<int>(j.size()) != size)) {
            fail(path, size >= 0 ? "must be an array of " + std::to_string(size) + " numbers" : "must be an array");
            return false;
        }
        for (const auto& x : j) {
            if (!x.is_number()) {
                fail(path, "entries must be numbers");
                return false;
            }
        }
        return true;
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "/" + key;
    }
};

inline void check_path(Checker& c, const json& doc, const std::string& path) {
    if (!doc.is_object()) {
        c.fail(path, "must be an object");
        return;
    }
    if (doc.contains("kind")) {
        if (doc["kind"] != "rotation") {
            c.fail(Checker::join(path, "kind"), "unknown path generator (expected \"rotation\")");
            return;
        }
        c.number(doc, "omega", path);
        c.integer(doc, "n", path, 1);
        c.integer(doc, "samples", path, 2);
        if (c.has(doc, "interval", path)) {
            if (c.number_array(doc["interval"], Checker::join(path, "interval"), 2) &&
                !(doc["interval"][1].get<double>() > doc["interval"][0].get<double>())) {
                c.fail(Checker::join(path, "interval"), "must satisfy a < b");
            }
        }
        return;
    }
    if (!c.has(doc, "times", path) || !c.has(doc, "matrices", path)) return;
    const std::string tp = Checker::join(path, "times"), mp = Checker::join(path, "matrices");
    if (!c.number_array(doc["times"], tp, -1)) return;
    if (doc["times"].size() < 2) c.fail(tp, "needs at least two samples");
    for (std::size_t i = 1; i < doc["times"].size(); ++i) {
        if (!(doc["times"][i].get<double>() > doc["times"][i - 1].get<double>())) {
            c.fail(tp, "must be strictly increasing");
            break;
        }
    }
    if (!doc["matrices"].is_array() || doc["matrices"].size() != doc["times"].size()) {
        c.fail(mp, "needs one matrix per time");
        return;
    }
    const int dim = doc["matrices"].empty() ? 0 : static_cast<int>(doc["matrices"][0].size());
    if (dim < 2 || dim % 2 != 0) {
        c.fail(mp, "matrices must be 2n x 2n");
        return;
    }
    for (std::size_t i = 0; i < doc["matrices"].size(); ++i) {
        if (!c.square_matrix(doc["matrices"][i], mp + "/" + std::to_string(i), dim)) return;
    }
}

inline void check_record(Checker& c, const json& r, const std::string& path, bool brake) {
    if (!r.is_object()) {
        c.fail(path, "must be an object");
        return;
    }
    if (r.contains("kind") && r["kind"] != (brake ? "brake" : "pair")) {
        c.fail(path, "kind/list mismatch (record kind \"" + r["kind"].dump() + "\" in a " +
                         (brake ? "brake" : "pair") + " list)");
    }
    const char* own = brake ? "mu1" : "mu_cz";
    const char* other = brake ? "mu_cz" : "mu1";
    if (r.contains(other)) c.fail(path, std::string("kind/index mismatch (") + (brake ? "brake" : "pair") +
                                            " record carries " + other + ")");
    if (!r.contains(own)) {
        c.fail(Checker::join(path, own), "missing");
    } else if (c.half_int(r[own], Checker::join(path, own)) && !brake &&
               !half_int_from_json(r[own]).is_integer()) {
        c.fail(Checker::join(path, own), "must be an integer");
    }
    if (r.contains("nullities")) {
        const auto& nl = r["nullities"];
        const std::string np = Checker::join(path, "nullities");
        if (!nl.is_object()) {
            c.fail(np, "must be an object");
        } else {
            for (const char* k : {"nu", "nu1", "nu2"}) {
                if (nl.contains(k)) c.integer(nl, k, np, 0);
            }
        }
    }
    if (r.contains("multiplicity")) c.integer(r, "multiplicity", path, 1);
    if (r.contains("period") && c.number(r, "period", path) && !(r["period"].get<double>() > 0.0)) {
        c.fail(Checker::join(path, "period"), "must be positive");
    }
    if (r.contains("label") && !r["label"].is_string()) c.fail(Checker::join(path, "label"), "must be a string");
}

inline void check_system(Checker& c, const json& s, const std::string& path) {
    if (!s.is_object()) {
        c.fail(path, "must be an object");
        return;
    }
    if (!c.has(s, "kind", path) || !c.integer(s, "n", path, 1)) return;
    const int n = s["n"].get<int>();
    const std::string kind = s["kind"].is_string() ? s["kind"].get<std::string>() : "";
    if (kind == "harmonic") return;
    if (kind == "aniso") {
        if (c.has(s, "weights", path)) c.number_array(s["weights"], Checker::join(path, "weights"), n);
        return;
    }
    if (kind != "polynomial") {
        c.fail(Checker::join(path, "kind"), "unknown system (expected harmonic, aniso or polynomial)");
        return;
    }
    if (c.has(s, "symmetric", path) && !s["symmetric"].is_boolean()) {
        c.fail(Checker::join(path, "symmetric"), "must be a boolean");
    }
    if (!c.has(s, "terms", path)) return;
    if (!s["terms"].is_array()) {
        c.fail(Checker::join(path, "terms"), "must be an array");
        return;
    }
    for (std::size_t i = 0; i < s["terms"].size(); ++i) {
        const auto& t = s["terms"][i];
        const std::string tp = Checker::join(path, "terms/" + std::to_string(i));
        c.number(t, "coeff", tp);
        if (!c.has(t, "powers", tp)) continue;
        const auto& p = t["powers"];
        bool ok = p.is_array() && static_cast<int>(p.size()) == 2 * n;
        for (std::size_t k = 0; ok && k < p.size(); ++k) ok = p[k].is_number_integer() && p[k].get<int>() >= 0;
        if (!ok) c.fail(Checker::join(tp, "powers"), "must be " + std::to_string(2 * n) + " non-negative integers");
    }
}

/// Schema violations of the input document of `command`; empty iff valid.
inline std::vector<std::string> validate(const std::string& command, const json& doc) {
    Checker c;
    if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
        c.fail("command", "unknown command \"" + command + "\"");
        return c.violations;
    }
    if (command == "selfcheck") return c.violations;
    if (!doc.is_object()) {
        c.fail("", "input document must be a JSON object");
        return c.violations;
    }
    if (command == "index") {
        if (c.has(doc, "path", "")) check_path(c, doc["path"], "path");
    } else if (command == "classify") {
        if (c.has(doc, "path", "")) check_path(c, doc["path"], "path");
        c.integer(doc, "n", "", 1);
        c.integer(doc, "max_m", "", 1);
    } else if (command == "spectral-flow") {
        if (c.integer(doc, "n", "", 1)) {
            const int dim = 2 * doc["n"].get<int>();
            for (const char* k : {"s_minus", "s_plus"}) {
                if (c.has(doc, k, "")) c.square_matrix(doc[k], k, dim);
            }
        }
        if (c.number(doc, "period", "") && !(doc["period"].get<double>() > 0.0)) c.fail("period", "must be positive");
        if (c.has(doc, "domain", "") && doc["domain"] != "full" && doc["domain"] != "brake") {
            c.fail("domain", "must be \"full\" or \"brake\"");
        }
        if (doc.contains("K")) c.integer(doc, "K", "", 4);
    } else if (command == "vdim") {
        c.integer(doc, "n", "", 1);
        if (c.has(doc, "genus", "") && (!doc["genus"].is_number_integer() || doc["genus"].get<std::int64_t>() < 0)) {
            c.fail("genus", "must be a non-negative integer");
        }
        if (doc.contains("c1") && !doc["c1"].is_number_integer()) c.fail("c1", "must be an integer");
        for (const char* list : {"positive_brake", "negative_brake", "positive_pairs", "negative_pairs"}) {
            if (!doc.contains(list)) continue;
            if (!doc[list].is_array()) {
                c.fail(list, "must be an array");
                continue;
            }
            const bool brake = std::string(list).find("brake") != std::string::npos;
            for (std::size_t i = 0; i < doc[list].size(); ++i) {
                check_record(c, doc[list][i], std::string(list) + "/" + std::to_string(i), brake);
            }
        }
    } else if (command == "brake-orbit") {
        if (c.has(doc, "system", "")) check_system(c, doc["system"], "system");
        c.number(doc, "h", "");
        if (c.number(doc, "tau_guess", "") && !(doc["tau_guess"].get<double>() > 0.0)) {
            c.fail("tau_guess", "must be positive");
        }
        if (c.has(doc, "q_guess", "") && doc.contains("system") && doc["system"].is_object() &&
            doc["system"].contains("n") && doc["system"]["n"].is_number_integer()) {
            const int n = doc["system"]["n"].get<int>();
            if (c.number_array(doc["q_guess"], "q_guess", 2 * n)) {
                for (int i = 0; i < n; ++i) {
                    if (doc["q_guess"][static_cast<std::size_t>(i)].get<double>() != 0.0) {
                        c.fail("q_guess", "first n coordinates must be zero (guess on L)");
                        break;
                    }
                }
            }
        }
    } else if (command == "cap-oracle") {
        if (c.number(doc, "omega", "") && !std::isfinite(doc["omega"].get<double>())) c.fail("omega", "must be finite");
        if (doc.contains("rank")) c.integer(doc, "rank", "", 1);
        if (doc.contains("sign") && doc["sign"] != "positive" && doc["sign"] != "negative") {
            c.fail("sign", "must be \"positive\" or \"negative\"");
        }
        if (doc.contains("slow_oracle") && !doc["slow_oracle"].is_boolean()) c.fail("slow_oracle", "must be a boolean");
    }
    return c.violations;
}

// ---------------------------------------------------------------------------
// Document parsing (after validation)
// ---------------------------------------------------------------------------

inline SymplecticPath path_from_json(const json& doc, const Config& cfg) {
    if (doc.contains("kind")) {
        const auto interval = doc["interval"];
        return rotation_path(doc["omega"].get<double>(), doc["n"].get<int>(), interval[0].get<double>(),
                             interval[1].get<double>(), doc["samples"].get<int>());
    }
    std::vector<double> times = doc["times"].get<std::vector<double>>();
    std::vector<Matrix> values;
    for (const auto& m : doc["matrices"]) values.push_back(matrix_from_json(m));
    const int n = static_cast<int>(values.front().rows() / 2);
    const bool based = max_abs(values.front() - Matrix::Identity(2 * n, 2 * n)) <= 1e-14;
    return SymplecticPath(n, std::move(times), std::move(values), {}, based, cfg.symplectic_tol);
}

inline HamiltonianSystem system_from_json(const json& doc) {
    const int n = doc["n"].get<int>();
    const std::string kind = doc["kind"].get<std::string>();
    if (kind == "harmonic") return harmonic(n);
    if (kind == "aniso") return aniso(n, doc["weights"].get<std::vector<double>>());
    std::vector<PolynomialTerm> terms;
    for (const auto& t : doc["terms"]) terms.push_back({t["coeff"].get<double>(), t["powers"].get<std::vector<int>>()});
    const bool symmetric = doc.value("symmetric", polynomial_is_symmetric(n, terms));
    if (symmetric && !polynomial_is_symmetric(n, terms)) {
        throw std::invalid_argument("system/symmetric: claimed N0-symmetric but a term is odd in p");
    }
    return polynomial(n, std::move(terms), symmetric);
}

inline OrbitRecord record_from_json(const json& r, bool brake) {
    OrbitRecord rec = brake ? OrbitRecord::brake(half_int_from_json(r["mu1"]))
                            : OrbitRecord::pair(half_int_from_json(r["mu_cz"]));
    if (r.contains("nullities")) {
        rec.nullities.nu = r["nullities"].value("nu", 0);
        rec.nullities.nu1 = r["nullities"].value("nu1", 0);
        rec.nullities.nu2 = r["nullities"].value("nu2", 0);
    }
    rec.multiplicity = r.value("multiplicity", 1);
    rec.period = r.value("period", 1.0);
    rec.label = r.value("label", std::string{});
    return rec;
}

inline ModuliSpec moduli_from_json(const json& doc) {
    ModuliSpec s;
    s.n = doc["n"].get<int>();
    s.genus = doc["genus"].get<int>();
    s.c1 = doc.value("c1", 0);
    auto list = [&](const char* key, bool brake) {
        std::vector<OrbitRecord> out;
        if (doc.contains(key))
            for (const auto& r : doc[key]) out.push_back(record_from_json(r, brake));
        return out;
    };
    s.positive_brake = list("positive_brake", true);
    s.negative_brake = list("negative_brake", true);
    s.positive_pairs = list("positive_pairs", false);
    s.negative_pairs = list("negative_pairs", false);
    return s;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ConfigKey {
    const char* key;
    const char* env;
    bool integral;
};

inline const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> k{{"tol.symplectic", "BIT_TOL_SYMPLECTIC", false},
                                          {"tol.rank", "BIT_TOL_RANK", false},
                                          {"tol.zero_eig", "BIT_TOL_ZERO_EIG", false},
                                          {"ode.steps", "BIT_ODE_STEPS", true},
                                          {"fourier.K", "BIT_FOURIER_K", true},
                                          {"shooting.max_iter", "BIT_SHOOTING_MAX_ITER", true}};
    return k;
}

inline void set_config(Config& cfg, const std::string& key, double v) {
    if (key == "tol.symplectic") cfg.symplectic_tol = v;
    else if (key == "tol.rank") cfg.rank_tol = v;
    else if (key == "tol.zero_eig") cfg.zero_eig_tol = v;
    else if (key == "ode.steps") cfg.ode_steps = static_cast<int>(v);
    else if (key == "fourier.K") cfg.fourier_K = static_cast<int>(v);
    else if (key == "shooting.max_iter") cfg.shooting_max_iter = static_cast<int>(v);
}

inline json config_snapshot(const Config& cfg) {
    return json{{"tol.symplectic", cfg.symplectic_tol}, {"tol.rank", cfg.rank_tol},
                {"tol.zero_eig", cfg.zero_eig_tol},     {"ode.steps", cfg.ode_steps},
                {"fourier.K", cfg.fourier_K},           {"shooting.max_iter", cfg.shooting_max_iter}};
}

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
}

/// Defaults, then the flat config file document, then BIT_* environment variables.
inline Config resolve_config(const json& file_doc, const EnvLookup& env, std::vector<std::string>& violations) {
    Config cfg;
    auto accept = [&](const ConfigKey& k, double v, const std::string& where) {
        const bool positive = v > 0.0 && std::isfinite(v);
        if (!positive || (k.integral && v != std::floor(v))) {
            violations.push_back(where + ": must be a positive " + (k.integral ? "integer" : "number"));
            return;
        }
        set_config(cfg, k.key, v);
    };
    if (!file_doc.is_null()) {
        if (!file_doc.is_object()) {
            violations.push_back("config: must be a JSON object of dotted keys");
        } else {
            for (const auto& [key, value] : file_doc.items()) {
                const auto it = std::find_if(config_keys().begin(), config_keys().end(),
                                             [&](const ConfigKey& k) { return key == k.key; });
                if (it == config_keys().end()) {
                    violations.push_back("config/" + key + ": unknown key");
                } else if (!value.is_number()) {
                    violations.push_back("config/" + key + ": must be a number");
                } else {
                    accept(*it, value.get<double>(), "config/" + key);
                }
            }
        }
    }
    for (const auto& k : config_keys()) {
        const auto v = env(k.env);
        if (!v) continue;
        char* end = nullptr;
        const double d = std::strtod(v->c_str(), &end);
        if (end == v->c_str() || *end != '\0') {
            violations.push_back(std::string("env/") + k.env + ": not a number");
            continue;
        }
        accept(k, d, std::string("env/") + k.env);
    }
    if (cfg.fourier_K < 4) violations.push_back("fourier.K: must be >= 4");
    if (cfg.ode_steps < 2) violations.push_back("ode.steps: must be >= 2");
    return cfg;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct Job {
    std::string command;
    json input;           ///< null for commands without a document
    json config_file;     ///< null when no --config was given
    EnvLookup env = process_env;
};

struct Outcome {
    int exit_code = kOk;
    json report;
};

/// Structural check of a report document; empty iff it conforms to schema version 1.
inline std::vector<std::string> validate_report(const json& r) {
    std::vector<std::string> v;
    if (!r.is_object()) return {"report must be an object"};
    for (const char* k : {"tool", "version", "schema_version", "command", "config", "input_hash", "status"}) {
        if (!r.contains(k)) v.push_back(std::string(k) + ": missing");
    }
    if (!v.empty()) return v;
    if (r["schema_version"] != kSchemaVersion) v.push_back("schema_version: unsupported");
    const std::string status = r["status"].is_string() ? r["status"].get<std::string>() : "";
    if (status == "ok" && !r.contains("result")) v.push_back("result: missing");
    if (status == "numerical_error" && !(r.contains("error") && r["error"].contains("name"))) {
        v.push_back("error/name: missing");
    }
    if (status == "validation_error" && !r.contains("violations")) v.push_back("violations: missing");
    if (status != "ok" && status != "numerical_error" && status != "validation_error" && status != "check_failed") {
        v.push_back("status: unknown value");
    }
    return v;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace detail {

inline json run_index(const json& doc, const Config& cfg) {
    const SymplecticPath path = path_from_json(doc["path"], cfg);
    if (!path.based()) throw std::invalid_argument("path: must start at the identity");
    const IndexReport cz = cz_report(path, cfg);
    const IndexReport m1 = brake_report(path, 1, cfg);
    const IndexReport m2 = brake_report(path, 2, cfg);
    return json{{"n", path.n()},
                {"interval", {path.start(), path.end()}},
                {"mu_cz", to_json(cz)},
                {"mu1", to_json(m1)},
                {"mu2", to_json(m2)},
                {"nullities", to_json(nullities(path, cfg))}};
}

inline json run_classify(const json& doc, const Config& cfg) {
    const SymplecticPath path = path_from_json(doc["path"], cfg);
    if (!path.based()) throw std::invalid_argument("path: must start at the identity");
    json rows = json::array();
    for (const auto& r : classify_good_bad(path, doc["n"].get<int>(), doc["max_m"].get<int>(), cfg)) {
        rows.push_back({{"m", r.m},
                        {"mu_cz", to_json(r.mu_cz)},
                        {"degree", to_json(r.degree)},
                        {"parity", r.parity},
                        {"verdict", r.good ? "good" : "bad"}});
    }
    return json{{"iterates", rows}};
}

inline json run_spectral_flow(const json& doc, const Config& cfg) {
    const int n = doc["n"].get<int>();
    const double period = doc["period"].get<double>();
    const Domain domain = doc["domain"] == "full" ? Domain::Full : Domain::BrakeSymmetric;
    const Matrix Sm = matrix_from_json(doc["s_minus"]), Sp = matrix_from_json(doc["s_plus"]);
    for (const Matrix* S : {&Sm, &Sp}) {
        if (max_abs(*S - S->transpose()) > 1e-12) throw std::invalid_argument("s_minus/s_plus: must be symmetric");
    }
    if (domain == Domain::BrakeSymmetric) {
        const Matrix N = n0(n);
        for (const Matrix* S : {&Sm, &Sp}) {
            if (max_abs(N * *S * N - *S) > 1e-12) {
                throw std::invalid_argument("s_minus/s_plus: must commute with N0 on the brake domain");
            }
        }
    }
    const int K = doc.value("K", cfg.fourier_K);
    const auto fam = interpolating_family([Sm](double) { return Sm; }, [Sp](double) { return Sp; }, n, period, domain);
    const auto rep = spectral_flow_report(fam, K, cfg);
    json cs = json::array();
    for (const auto& c : rep.crossings) cs.push_back({{"s", c.s}, {"multiplicity", c.multiplicity}, {"sign", c.sign}});
    return json{{"flow", rep.flow}, {"domain", to_string(domain)}, {"K", K}, {"crossings", cs}};
}

inline json run_vdim(const json& doc) {
    const ModuliSpec spec = moduli_from_json(doc);
    const DimensionReport r = virtual_dimension(spec);
    json degrees = json::array();
    for (const auto& [label, d] : r.per_orbit_degrees) degrees.push_back({{"label", label}, {"degree", to_json(d)}});
    return json{{"fredholm_index_DF", to_json(r.fredholm_index_DF)},
                {"teichmuller_dim", r.teichmuller_dim},
                {"aut_dim", r.aut_dim},
                {"virtual_dim", to_json(r.virtual_dim)},
                {"routes",
                 {{"assembled", to_json(r.virtual_dim)},
                  {"closed_formula", to_json(r.closed_formula)},
                  {"agree", r.routes_agree()}}},
                {"half_integer", r.half_integer},
                {"per_orbit_degrees", degrees}};
}

inline json run_brake_orbit(const json& doc, const Config& cfg) {
    const HamiltonianSystem sys = system_from_json(doc["system"]);
    const auto consistency = check_consistency(sys, random_probes(sys.n, 8));
    if (!consistency.ok) throw std::invalid_argument("system: derivatives or symmetry claim are inconsistent");
    const auto res = find_brake_orbit(sys, vector_from_json(doc["q_guess"]), doc["h"].get<double>(),
                                      doc["tau_guess"].get<double>(), cfg);
    const SymplecticPath lin = linearized_path(sys, res.orbit, cfg);
    const Nullities nl = nullities(lin, cfg);
    json lin_doc{{"nullities", to_json(nl)}, {"degenerate", nl.nu > 0 || nl.nu1 > 0}, {"monodromy", to_json(lin.back())}};
    return json{{"tau", res.tau},
                {"x0", to_json(res.orbit.states.front())},
                {"x_half", to_json(res.orbit.at(res.tau / 2))},
                {"iterations", res.iterations},
                {"residual", res.residual},
                {"energy", res.orbit.energy},
                {"energy_drift", res.orbit.energy_drift},
                {"symmetry_residual", res.orbit.symmetry_residual},
                {"linearized", lin_doc}};
}

inline json run_cap(const json& doc) {
    CapSpec spec;
    spec.omega = doc["omega"].get<double>();
    spec.rank = doc.value("rank", 1);
    spec.sign = doc.value("sign", std::string("positive")) == "negative" ? CapSign::Negative : CapSign::Positive;
    const auto kc = cap_kernel_cokernel(spec);
    json out{{"omega", spec.omega},
             {"rank", spec.rank},
             {"sign", to_string(spec.sign)},
             {"ker", kc.ker},
             {"coker", kc.coker},
             {"index", kc.index()}};
    if (doc.value("slow_oracle", false)) {
        const auto slow = cap_kernel_cokernel_slow(spec);
        out["slow_oracle"] = {{"ker", slow.ker}, {"coker", slow.coker}, {"agree", slow.ker == kc.ker && slow.coker == kc.coker}};
    }
    return out;
}

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

inline std::vector<Check> selfcheck(const Config& cfg) {
    std::vector<Check> out;
    auto run = [&](const std::string& name, const std::function<std::string()>& body) {
        Check c{name};
        try {
            c.detail = body();
            c.pass = c.detail.empty();
            if (c.pass) c.detail = "ok";
        } catch (const NumericalError& e) {
            c.detail = e.name() + ": " + e.what();
        } catch (const std::exception& e) {
            c.detail = e.what();
        }
        out.push_back(c);
    };
    run("rotation brake index table", [&] {
        for (int k : {1, 3, 5, 7}) {
            const HalfInt mu = brake_mu(rotation_path(k * kPi, 1, 0.0, 1.0, 2049), 1, cfg);
            if (mu != halves(k)) return "mu1(R(" + std::to_string(k) + "pi t)) = " + mu.str();
        }
        return std::string{};
    });
    run("cap count equals 1/2 + mu1", [&] {
        for (double w : {-5.0, -2.5, 1.0, 4.0, 9.0}) {
            const auto kc = cap_kernel_cokernel({CapSign::Positive, w, 1});
            const HalfInt mu = brake_mu(rotation_path(w, 1, 0.0, 1.0, 2049), 1, cfg);
            if (HalfInt::from_int(kc.index()) != halves(1) + mu) return "mismatch at omega = " + std::to_string(w);
        }
        return std::string{};
    });
    run("loop shifts", [&] {
        const auto base = rotation_path(0.7 * kPi, 1, 0.0, 1.0, 1025);
        const HalfInt cz0 = cz_index(base, cfg), mu0 = brake_mu(base, 1, cfg);
        for (int k = -2; k <= 2; ++k) {
            const auto phi = standard_loop(k, 1, 1.0, 1025);
            if (loop_shift_cz(phi, base, cfg) != cz0 + HalfInt::from_int(2 * k)) return "cz shift at k = " + std::to_string(k);
            if (loop_shift_mu1(phi, base, cfg) != mu0 + HalfInt::from_int(k)) return "mu1 shift at k = " + std::to_string(k);
        }
        return std::string{};
    });
    run("kernel of the resonant operator", [&] {
        const AsymptoticOperator full(constant_loop(kTwoPi * Matrix::Identity(2, 2)), Domain::Full);
        const AsymptoticOperator brake(constant_loop(kTwoPi * Matrix::Identity(2, 2)), Domain::BrakeSymmetric);
        const int kf = kernel_dimension(full, cfg.fourier_K, cfg), kb = kernel_dimension(brake, cfg.fourier_K, cfg);
        if (kf != 2 || kb != 1) return "kernels " + std::to_string(kf) + ", " + std::to_string(kb);
        return std::string{};
    });
    run("virtual dimension routes", [&] {
        ModuliSpec s;
        s.n = 3;
        s.positive_brake = {OrbitRecord::brake(HalfInt::from_int(3))};
        s.negative_brake = {OrbitRecord::brake(HalfInt::from_int(1))};
        s.negative_pairs = {OrbitRecord::pair(HalfInt::from_int(1))};
        const auto r = virtual_dimension(s);
        if (!r.routes_agree() || r.virtual_dim != HalfInt::from_int(1)) return "virtual_dim " + r.virtual_dim.str();
        return std::string{};
    });
    run("harmonic brake orbit", [&] {
        Vector q(2);
        q << 0.0, 1.0;
        const auto r = find_brake_orbit(harmonic(1), q, 0.5, 6.0, cfg);
        if (std::abs(r.tau - kTwoPi) > 1e-6) return "tau = " + std::to_string(r.tau);
        if (nullities(linearized_path(harmonic(1), r.orbit, cfg), cfg).nu1 != 1) return std::string("nu1 != 1");
        return std::string{};
    });
    return out;
}

}  // namespace detail

inline Outcome run(const Job& job) {
    Outcome o;
    json& r = o.report;
    r["tool"] = kTool;
    r["version"] = kVersion;
    r["schema_version"] = kSchemaVersion;
    r["command"] = job.command;

    std::vector<std::string> violations;
    const Config cfg = resolve_config(job.config_file, job.env, violations);
    r["config"] = config_snapshot(cfg);
    r["input_hash"] = "fnv1a64:" + hex64(fnv1a64(job.command + "\n" + (job.input.is_null() ? "" : job.input.dump())));

    for (const auto& v : validate(job.command, job.input)) violations.push_back(v);
    if (!violations.empty()) {
        r["status"] = "validation_error";
        r["violations"] = violations;
        o.exit_code = kValidation;
        return o;
    }
    try {
        if (job.command == "index") r["result"] = detail::run_index(job.input, cfg);
        else if (job.command == "classify") r["result"] = detail::run_classify(job.input, cfg);
        else if (job.command == "spectral-flow") r["result"] = detail::run_spectral_flow(job.input, cfg);
        else if (job.command == "vdim") r["result"] = detail::run_vdim(job.input);
        else if (job.command == "brake-orbit") r["result"] = detail::run_brake_orbit(job.input, cfg);
        else if (job.command == "cap-oracle") r["result"] = detail::run_cap(job.input);
        else {
            json checks = json::array();
            bool all = true;
            for (const auto& c : detail::selfcheck(cfg)) {
                checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
                all = all && c.pass;
            }
            r["result"] = {{"checks", checks}, {"all_passed", all}};
            if (!all) {
                r["status"] = "check_failed";
                o.exit_code = kCheckFailed;
                return o;
            }
        }
        r["status"] = "ok";
    } catch (const NumericalError& e) {
        r.erase("result");
        r["status"] = "numerical_error";
        r["error"] = {{"name", e.name()}, {"message", e.what()}};
        o.exit_code = kNumerical;
    } catch (const std::invalid_argument& e) {
        r.erase("result");
        r["status"] = "validation_error";
        r["violations"] = {e.what()};
        o.exit_code = kValidation;
    } catch (const std::exception& e) {
        r.erase("result");
        r["status"] = "numerical_error";
        r["error"] = {{"name", "InternalError"}, {"message", e.what()}};
        o.exit_code = kNumerical;
    }
    return o;
}

/// Pretty JSON with a trailing newline; stable because objects are key-sorted.
inline std::string render(const json& report) { return report.dump(2) + "\n"; }

}  // namespace brakeidx::cli
