#include "brakeidx/cli.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace brakeidx;
using cli::json;

namespace {

cli::Job job(const std::string& command, json input) {
    cli::Job j;
    j.command = command;
    j.input = std::move(input);
    j.env = [](const std::string&) { return std::optional<std::string>{}; };
    return j;
}

json three_end_doc() {
    return json::parse(R"({
        "n": 3, "genus": 0,
        "positive_brake": [{"mu1": {"doubled": 6}, "label": "q"}],
        "negative_brake": [{"mu1": 1, "label": "q'"}],
        "negative_pairs": [{"mu_cz": {"doubled": 2}, "label": "p'"}]
    })");
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST(Cli, VdimThreeEndSpec) {
    const auto o = cli::run(job("vdim", three_end_doc()));
    ASSERT_EQ(o.exit_code, 0) << cli::render(o.report);
    const auto& r = o.report["result"];
    EXPECT_EQ(r["virtual_dim"]["doubled"], 2);
    EXPECT_EQ(r["routes"]["assembled"]["doubled"], 2);
    EXPECT_EQ(r["routes"]["closed_formula"]["doubled"], 2);
    EXPECT_EQ(r["fredholm_index_DF"]["doubled"], 0);
    EXPECT_EQ(r["teichmuller_dim"], 1);
    EXPECT_EQ(r["per_orbit_degrees"].size(), 3u);
}

TEST(Cli, CapOracleHalfTurn) {
    const auto o = cli::run(job("cap-oracle", {{"omega", 3.14159265}, {"slow_oracle", true}}));
    ASSERT_EQ(o.exit_code, 0);
    EXPECT_EQ(o.report["result"]["ker"], 1);
    EXPECT_EQ(o.report["result"]["coker"], 0);
    EXPECT_EQ(o.report["result"]["index"], 1);
}

TEST(Cli, CapOracleResonantIsNumericalError) {
    const auto o = cli::run(job("cap-oracle", {{"omega", 2 * kPi}}));
    EXPECT_EQ(o.exit_code, 3);
    EXPECT_EQ(o.report["error"]["name"], "OmegaResonant");
}

TEST(Cli, SelfcheckPasses) {
    const auto o = cli::run(job("selfcheck", nullptr));
    EXPECT_EQ(o.exit_code, 0) << cli::render(o.report);
    EXPECT_TRUE(o.report["result"]["all_passed"].get<bool>());
}

TEST(Cli, IndexOfRotationPath) {
    const auto doc = json::parse(R"({"path": {"kind": "rotation", "omega": 9.42477796076938, "n": 1,
                                              "interval": [0, 1], "samples": 2049}})");
    const auto o = cli::run(job("index", doc));
    ASSERT_EQ(o.exit_code, 0) << cli::render(o.report);
    EXPECT_EQ(o.report["result"]["mu1"]["value"]["doubled"], 3);
    EXPECT_EQ(o.report["result"]["mu_cz"]["value"]["doubled"], 6);
}

TEST(Cli, IndexFromSamples) {
    json times = json::array(), mats = json::array();
    for (int i = 0; i <= 256; ++i) {
        const double t = i / 256.0;
        times.push_back(t);
        mats.push_back(cli::to_json(rotation(0.9 * kPi * t, 1)));
    }
    const auto o = cli::run(job("index", {{"path", {{"times", times}, {"matrices", mats}}}}));
    ASSERT_EQ(o.exit_code, 0) << cli::render(o.report);
    EXPECT_EQ(o.report["result"]["mu_cz"]["value"]["doubled"], 2);
}

TEST(Cli, IdentityPathIsIrregular) {
    const auto doc = json::parse(R"({"path": {"kind": "rotation", "omega": 0, "n": 1, "interval": [0, 1],
                                              "samples": 65}})");
    const auto o = cli::run(job("index", doc));
    EXPECT_EQ(o.exit_code, 3);
    EXPECT_EQ(o.report["status"], "numerical_error");
    EXPECT_EQ(o.report["error"]["name"], "IrregularCrossing");
}

TEST(Cli, SpectralFlowBetweenConstantLoops) {
    json doc{{"n", 1}, {"period", 1.0}, {"domain", "brake"}, {"K", 16},
             {"s_minus", {{1.0, 0.0}, {0.0, 1.0}}}, {"s_plus", {{7.0, 0.0}, {0.0, 7.0}}}};
    auto o = cli::run(job("spectral-flow", doc));
    ASSERT_EQ(o.exit_code, 0) << cli::render(o.report);
    EXPECT_EQ(o.report["result"]["flow"], 1);
    doc["domain"] = "full";
    o = cli::run(job("spectral-flow", doc));
    ASSERT_EQ(o.exit_code, 0) << cli::render(o.report);
    EXPECT_EQ(o.report["result"]["flow"], 2);
}

TEST(Cli, BrakeOrbitHarmonic) {
    const auto doc = json::parse(R"({"system": {"kind": "harmonic", "n": 1}, "q_guess": [0, 1.05],
                                     "h": 0.5, "tau_guess": 6.0})");
    const auto o = cli::run(job("brake-orbit", doc));
    ASSERT_EQ(o.exit_code, 0) << cli::render(o.report);
    EXPECT_NEAR(o.report["result"]["tau"].get<double>(), 2 * kPi, 1e-6);
    EXPECT_EQ(o.report["result"]["linearized"]["nullities"]["nu1"], 1);
    EXPECT_TRUE(o.report["result"]["linearized"]["degenerate"].get<bool>());
}

TEST(Cli, ClassifyNegativeHyperbolicSamples) {
    json times = json::array(), mats = json::array();
    for (int i = 0; i <= 512; ++i) {
        const double t = i / 512.0;
        Matrix d = Matrix::Zero(2, 2);
        d(0, 0) = std::exp(std::log(2.0) * t);
        d(1, 1) = 1.0 / d(0, 0);
        times.push_back(t);
        mats.push_back(cli::to_json(Matrix(rotation(kPi * t, 1) * d)));
    }
    const auto o = cli::run(job("classify", {{"path", {{"times", times}, {"matrices", mats}}}, {"n", 3}, {"max_m", 2}}));
    ASSERT_EQ(o.exit_code, 0) << cli::render(o.report);
    EXPECT_EQ(o.report["result"]["iterates"][0]["verdict"], "good");
    EXPECT_EQ(o.report["result"]["iterates"][1]["verdict"], "bad");
}

TEST(CliValidate, BrakeRecordWithMuCz) {
    json doc = three_end_doc();
    doc["positive_brake"][0]["mu_cz"] = 1;
    const auto v = cli::validate("vdim", doc);
    EXPECT_TRUE(mentions(v, "kind/index mismatch"));
    EXPECT_TRUE(mentions(v, "positive_brake/0"));
    EXPECT_EQ(cli::run(job("vdim", doc)).exit_code, 2);
}

TEST(CliValidate, NegativeGenus) {
    json doc = three_end_doc();
    doc["genus"] = -1;
    EXPECT_TRUE(mentions(cli::validate("vdim", doc), "genus"));
}

TEST(CliValidate, HarmonicSystemIsValid) {
    const auto doc = json::parse(R"({"system": {"kind": "harmonic", "n": 1}, "q_guess": [0, 1],
                                     "h": 0.5, "tau_guess": 6.0})");
    EXPECT_TRUE(cli::validate("brake-orbit", doc).empty());
}

TEST(CliValidate, PolynomialPowersChecked) {
    const auto doc = json::parse(R"({"system": {"kind": "polynomial", "n": 1, "symmetric": true,
                                     "terms": [{"coeff": 0.5, "powers": [2]}]}, "q_guess": [0, 1],
                                     "h": 0.5, "tau_guess": 6.0})");
    EXPECT_TRUE(mentions(cli::validate("brake-orbit", doc), "system/terms/0/powers"));
}

TEST(CliValidate, DegenerateRecordIsNumerical) {
    json doc = three_end_doc();
    doc["negative_pairs"][0]["nullities"] = {{"nu", 1}};
    const auto o = cli::run(job("vdim", doc));
    EXPECT_EQ(o.exit_code, 3);
    EXPECT_EQ(o.report["error"]["name"], "DegenerateOrbit");
}

TEST(CliReport, DeterministicAndReparses) {
    const auto a = cli::render(cli::run(job("vdim", three_end_doc())).report);
    const auto b = cli::render(cli::run(job("vdim", three_end_doc())).report);
    EXPECT_EQ(a, b);
    const json back = json::parse(a);
    EXPECT_TRUE(cli::validate_report(back).empty());
    EXPECT_EQ(back["schema_version"], cli::kSchemaVersion);
    EXPECT_EQ(back["input_hash"].get<std::string>().rfind("fnv1a64:", 0), 0u);
    // hash depends on the input
    json other = three_end_doc();
    other["c1"] = 1;
    EXPECT_NE(cli::run(job("vdim", other)).report["input_hash"], back["input_hash"]);
}

TEST(CliConfig, EnvOverridesFileOverridesDefaults) {
    auto j = job("cap-oracle", {{"omega", 1.0}});
    EXPECT_EQ(cli::run(j).report["config"]["ode.steps"], Config{}.ode_steps);
    j.config_file = {{"ode.steps", 1000}, {"tol.rank", 1e-7}};
    auto r = cli::run(j).report;
    EXPECT_EQ(r["config"]["ode.steps"], 1000);
    EXPECT_EQ(r["config"]["tol.rank"], 1e-7);
    j.env = [](const std::string& k) {
        return k == "BIT_ODE_STEPS" ? std::optional<std::string>("2000") : std::nullopt;
    };
    r = cli::run(j).report;
    EXPECT_EQ(r["config"]["ode.steps"], 2000);
    EXPECT_EQ(r["config"]["tol.rank"], 1e-7);
}

TEST(CliConfig, BadValuesAreViolations) {
    auto j = job("cap-oracle", {{"omega", 1.0}});
    j.config_file = {{"fourier.K", 2.5}, {"tol.bogus", 1}};
    const auto o = cli::run(j);
    EXPECT_EQ(o.exit_code, 2);
    const auto v = o.report["violations"].get<std::vector<std::string>>();
    EXPECT_TRUE(mentions(v, "config/fourier.K"));
    EXPECT_TRUE(mentions(v, "config/tol.bogus"));
}

TEST(FnvHash, KnownVectors) {
    EXPECT_EQ(cli::fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(cli::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}
