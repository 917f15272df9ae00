#include "brakeidx/asymptotic.hpp"
#include "brakeidx/index.hpp"
#include "brakeidx/model_operator.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace brakeidx;

namespace {

SymmetricLoop scalar_loop(double c, int n = 1) { return constant_loop(c * Matrix::Identity(2 * n, 2 * n)); }

MatrixFn scalar(double c, int n = 1) {
    return [c, n](double) { return Matrix(c * Matrix::Identity(2 * n, 2 * n)); };
}

/// Flow of S = c(s)·I from c0 to c1 read off the closed-form spectrum {2πk − c}.
int scalar_flow_oracle(double c0, double c1, int multiplicity) {
    int flow = 0;
    for (int k = -50; k <= 50; ++k) {
        const double e = kTwoPi * k;
        if (c0 < e && e < c1) flow += multiplicity;
        if (c1 < e && e < c0) flow -= multiplicity;
    }
    return flow;
}

}  // namespace

TEST(Discretize, FreeOperatorSpectrum) {
    const auto s = discretize(AsymptoticOperator(scalar_loop(0.0), Domain::Full), 8);
    ASSERT_EQ(s.eigenvalues.size(), 2 * 17);
    for (int k = -8; k <= 8; ++k) {
        const int hits = static_cast<int>(((s.eigenvalues.array() - kTwoPi * k).abs() < 1e-9).count());
        EXPECT_EQ(hits, 2) << "k=" << k;
    }
}

TEST(Discretize, ShiftedSpectrumHasNoKernel) {
    const auto s = discretize(AsymptoticOperator(scalar_loop(kPi), Domain::Full), 8);
    for (int k = -8; k <= 8; ++k) {
        const int hits = static_cast<int>(((s.eigenvalues.array() - (kTwoPi * k - kPi)).abs() < 1e-9).count());
        EXPECT_EQ(hits, 2);
    }
    EXPECT_EQ(kernel_dimension(s), 0);
}

TEST(Discretize, ResonantShiftHasTwoZeroModes) {
    const auto s = discretize(AsymptoticOperator(scalar_loop(kTwoPi), Domain::Full), 8);
    EXPECT_EQ(kernel_dimension(s), 2);
    EXPECT_EQ(kernel_dimension(AsymptoticOperator(scalar_loop(kTwoPi), Domain::BrakeSymmetric), 8), 1);
    EXPECT_EQ(kernel_dimension(AsymptoticOperator(scalar_loop(kPi), Domain::BrakeSymmetric), 8), 0);
}

TEST(Discretize, BrakeDomainSize) {
    const auto op = AsymptoticOperator(scalar_loop(1.0, 2), Domain::BrakeSymmetric);
    EXPECT_EQ(galerkin_matrix(op, 5).rows(), 2 * 11);
    EXPECT_THROW(AsymptoticOperator(SymmetricLoop(1, [](double t) { return Matrix(std::sin(kTwoPi * t) *
                                                                                  Matrix::Identity(2, 2)); },
                                                  1.0, false),
                                    Domain::BrakeSymmetric),
                 std::invalid_argument);
    EXPECT_THROW(discretize(op, 3), std::invalid_argument);
}

TEST(Discretize, RoughLoopIsTruncationUnstable) {
    // a narrow pulse far beyond the resolution of K = 4
    auto S = [](double t) {
        const double d = std::remainder(t - 0.5, 1.0);
        Matrix m(2, 2);
        m << 1, 0, 0, 3;
        return Matrix(200.0 * std::exp(-d * d / (2 * 0.005 * 0.005)) * m);
    };
    EXPECT_THROW(discretize(AsymptoticOperator(SymmetricLoop(1, S, 1.0, false), Domain::Full), 4),
                 TruncationUnstable);
}

TEST(KernelDimension, MatchesNullitiesOnRandomLoops) {
    std::mt19937_64 rng(77);
    int degenerate = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 2;
        MatrixFn S = trial % 2 == 0 ? MatrixFn(oracle::degenerate_scalar_system(rng, n, 1 + trial % 3))
                                    : MatrixFn(oracle::random_brake_system(rng, n, 2, 2.0));
        const SymmetricLoop loop(n, S, 1.0, true);
        const auto nl = nullities(loop_fundamental_solution(loop));
        const int full = kernel_dimension(AsymptoticOperator(loop, Domain::Full), 32);
        const int brake = kernel_dimension(AsymptoticOperator(loop, Domain::BrakeSymmetric), 32);
        EXPECT_EQ(full, nl.nu) << "trial " << trial;
        EXPECT_EQ(brake, nl.nu1) << "trial " << trial;
        if (full > 0) ++degenerate;
    }
    EXPECT_GE(degenerate, 10);
}

TEST(SpectralFlow, ConstantFamilyIsZero) {
    const auto fam = interpolating_family(scalar(kPi), scalar(kPi), 1, 1.0, Domain::Full);
    const auto r = spectral_flow_report(fam, 16);
    EXPECT_EQ(r.flow, 0);
    EXPECT_TRUE(r.crossings.empty());
}

TEST(SpectralFlow, ScalarFamilies) {
    const auto brake = interpolating_family(scalar(kPi), scalar(3 * kPi), 1, 1.0, Domain::BrakeSymmetric);
    const auto full = interpolating_family(scalar(kPi), scalar(3 * kPi), 1, 1.0, Domain::Full);
    EXPECT_EQ(spectral_flow(brake, 32), scalar_flow_oracle(kPi, 3 * kPi, 1));
    EXPECT_EQ(spectral_flow(brake, 32), 1);
    const auto r = spectral_flow_report(full, 32);
    EXPECT_EQ(r.flow, 2);
    ASSERT_EQ(r.crossings.size(), 1u);
    EXPECT_EQ(r.crossings[0].multiplicity, 2);
    EXPECT_NEAR(smoothstep(r.crossings[0].s), 0.5, 1e-3);  // c(s) = 2π
    EXPECT_EQ(cylinder_index(brake, 32), HalfInt::from_int(1));
    const auto down = interpolating_family(scalar(5.5 * kPi, 2), scalar(-1.5 * kPi, 2), 2, 1.0, Domain::Full);
    EXPECT_EQ(spectral_flow(down, 16), scalar_flow_oracle(5.5 * kPi, -1.5 * kPi, 4));
}

TEST(SpectralFlow, DegenerateEndpointRejected) {
    const auto fam = interpolating_family(scalar(kPi), scalar(kTwoPi), 1, 1.0, Domain::Full);
    EXPECT_THROW(spectral_flow(fam, 16), EndpointDegenerate);
}

TEST(SpectralFlow, JumpingFamilyIsUnresolved) {
    const OperatorFamily fam(1, 1.0, Domain::Full, [](double s, double) {
        return Matrix((s < 0.3 ? kPi : 3 * kPi) * Matrix::Identity(2, 2));
    });
    EXPECT_THROW(spectral_flow(fam, 8), CrossingUnresolved);
}

TEST(SpectralFlow, AdditiveAndOddUnderReversal) {
    std::mt19937_64 rng(3);
    const auto Sm = oracle::random_brake_system(rng, 1, 2, 2.0);
    const auto Sp = oracle::random_brake_system(rng, 1, 2, 2.0);
    const auto P = oracle::random_brake_system(rng, 1, 2, 6.0);
    FamilyFn f = [&](double s, double t) {
        const double b = smoothstep(s);
        return Matrix((1 - b) * Sm(t) + b * Sp(t) + b * (1 - b) * P(t) + 8.0 * b * Matrix::Identity(2, 2));
    };
    const OperatorFamily whole(1, 1.0, Domain::Full, f);
    const OperatorFamily left(1, 1.0, Domain::Full, f, 0.0, 0.4);
    const OperatorFamily right(1, 1.0, Domain::Full, f, 0.4, 1.0);
    const int w = spectral_flow(whole, 24);
    EXPECT_EQ(w, spectral_flow(left, 24) + spectral_flow(right, 24));
    EXPECT_EQ(spectral_flow(whole.reversed(), 24), -w);
}

TEST(SpectralFlow, MatchesIndexDifferencesOnRandomPairs) {
    std::mt19937_64 rng(19);
    int checked = 0;
    for (int trial = 0; checked < 6 && trial < 20; ++trial) {
        const int n = 1;
        const auto Sm = oracle::random_brake_system(rng, n, 2, 3.0);
        const auto Sp = oracle::random_brake_system(rng, n, 2, 3.0);
        const auto P = oracle::random_brake_system(rng, n, 1, 5.0);
        const auto gm = fundamental_solution(Sm, 1.0, 2048);
        const auto gp = fundamental_solution(Sp, 1.0, 2048);
        const auto czm = cz_report(gm), czp = cz_report(gp);
        const auto m1m = brake_report(gm, 1), m1p = brake_report(gp, 1);
        if (czm.degenerate() || czp.degenerate() || m1m.degenerate() || m1p.degenerate()) continue;
        ++checked;
        for (Domain d : {Domain::Full, Domain::BrakeSymmetric}) {
            const auto fam = interpolating_family(Sm, Sp, n, 1.0, d, P);
            const int flow = spectral_flow(fam, 32);
            const HalfInt want = d == Domain::Full ? czp.value - czm.value : m1p.value - m1m.value;
            EXPECT_EQ(HalfInt::from_int(flow), want) << "trial " << trial << " domain " << to_string(d);
        }
        // the index differences themselves against the winding oracle
        EXPECT_EQ((czp.value - czm.value).to_double(),
                  oracle::cz_by_winding([&](double t) { return gp.at(t); }, n, 0, 1) -
                      oracle::cz_by_winding([&](double t) { return gm.at(t); }, n, 0, 1));
    }
    EXPECT_EQ(checked, 6);
}

TEST(CapOracle, Examples) {
    auto kc = cap_kernel_cokernel({CapSign::Positive, kPi, 1});
    EXPECT_EQ(kc.ker, 1);
    EXPECT_EQ(kc.coker, 0);
    kc = cap_kernel_cokernel({CapSign::Positive, -kPi, 1});
    EXPECT_EQ(kc.ker + kc.coker, 0);
    kc = cap_kernel_cokernel({CapSign::Positive, 5 * kPi, 1});
    EXPECT_EQ(kc.ker, 3);
    EXPECT_EQ(kc.coker, 0);
    EXPECT_EQ(halves(1) + brake_mu(rotation_path(5 * kPi, 1, 0, 1, 2049), 1), HalfInt::from_int(kc.index()));
    EXPECT_THROW(cap_kernel_cokernel({CapSign::Positive, 4 * kPi, 1}), OmegaResonant);
}

TEST(CapOracle, IndexLawForAllOmega) {
    for (double x = -4.93; x < 5.0; x += 0.37) {
        const double omega = kTwoPi * x;
        for (int rank : {1, 3}) {
            const auto kc = cap_kernel_cokernel({CapSign::Positive, omega, rank});
            EXPECT_TRUE(kc.ker == 0 || kc.coker == 0);
            const HalfInt mu1 = brake_mu(rotation_path(omega, 1, 0, 1, 2049), 1);
            EXPECT_EQ(HalfInt::from_int(kc.index()), rank * (halves(1) + mu1)) << omega;
            if (omega > 0) EXPECT_EQ(mu1.to_double(), 0.5 + std::floor(x));
            // the rank-r boundary operator is r copies, so its μ₁ is r·μ₁(ω)
            EXPECT_EQ(HalfInt::from_int(kc.index()), cap_index(CapSign::Positive, rank * mu1, rank));
            const auto neg = cap_kernel_cokernel({CapSign::Negative, omega, rank});
            EXPECT_EQ(HalfInt::from_int(neg.index()), cap_index(CapSign::Negative, rank * mu1, rank));
        }
    }
}

TEST(CapOracle, SlowOracleAgrees) {
    for (CapSign sign : {CapSign::Positive, CapSign::Negative}) {
        for (double omega : {kPi, -kPi}) {
            const CapSpec spec{sign, omega, 2};
            const auto fast = cap_kernel_cokernel(spec), slow = cap_kernel_cokernel_slow(spec);
            EXPECT_EQ(fast.ker, slow.ker);
            EXPECT_EQ(fast.coker, slow.coker);
        }
    }
    EXPECT_THROW(cap_kernel_cokernel_slow({CapSign::Positive, 3 * kPi, 1}), std::invalid_argument);
}

TEST(CapIndex, Examples) {
    EXPECT_EQ(cap_index(CapSign::Positive, halves(1), 1), HalfInt::from_int(1));
    EXPECT_EQ(cap_index(CapSign::Negative, halves(1), 1), HalfInt::from_int(0));
    EXPECT_EQ(cap_index(CapSign::Positive, HalfInt::from_int(3), 2, true), HalfInt::from_int(5));
    EXPECT_EQ(cap_index(CapSign::Negative, HalfInt::from_int(3), 2, true), HalfInt::from_int(-1));
}

TEST(Glue, SphereFromTwoCaps) {
    const auto a = halves(3);
    const Piece plus{"cap+", cap_index(CapSign::Positive, a, 1), {{"e", a, true}}};
    const Piece minus{"cap-", cap_index(CapSign::Negative, a, 1), {{"e'", a, true}}};
    const auto ledger = glue({plus, minus}, {{"e", "e'"}});
    EXPECT_EQ(ledger.total, HalfInt::from_int(1));
    EXPECT_EQ(ledger.total, riemann_roch_brake(0, 0, 1));
}

TEST(Glue, CapCylinderCap) {
    for (int rank : {1, 2}) {
        const HalfInt a = halves(1), b = halves(5);
        const std::vector<Piece> pieces{
            {"cap+", cap_index(CapSign::Positive, rank * a, rank), {{"x", rank * a, true}}},
            {"cyl", rank * (b - a), {{"x'", rank * a, true}, {"y", rank * b, true}}},
            {"cap-", cap_index(CapSign::Negative, rank * b, rank), {{"y'", rank * b, true}}}};
        const auto ledger = glue(pieces, {{"x", "x'"}, {"y", "y'"}});
        EXPECT_EQ(ledger.total, HalfInt::from_int(rank));
        std::vector<Piece> shuffled{pieces[2], pieces[0], pieces[1]};
        EXPECT_EQ(glue(shuffled, {{"y'", "y"}, {"x'", "x"}}).total, ledger.total);
    }
}

TEST(Glue, SinglePieceAndMismatch) {
    const Piece p{"only", halves(3), {}};
    const auto ledger = glue({p}, {});
    EXPECT_EQ(ledger.total, halves(3));
    ASSERT_EQ(ledger.pieces.size(), 1u);
    const Piece u{"u", halves(1), {{"e", halves(1), true}}};
    const Piece v{"v", halves(1), {{"f", halves(3), true}}};
    EXPECT_THROW(glue({u, v}, {{"e", "f"}}), BoundaryMismatch);
    EXPECT_THROW(glue({u, v}, {{"e", "nope"}}), BoundaryMismatch);
    const Piece w{"w", halves(1), {{"f", halves(1), false}}};
    EXPECT_THROW(glue({u, w}, {{"e", "f"}}), BoundaryMismatch);
}

TEST(RiemannRoch, Examples) {
    EXPECT_EQ(riemann_roch_brake(0, 0, 1), HalfInt::from_int(1));
    EXPECT_EQ(riemann_roch_brake(1, 0, 2), HalfInt::from_int(0));
    EXPECT_EQ(riemann_roch_brake(0, 3, 1), HalfInt::from_int(4));
    EXPECT_EQ(riemann_roch_brake(2, 0, 1), halves(-2));
}
