#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "resgrad/core.hpp"

namespace {

using resgrad::State;

TEST(Hamiltonian, Values) {
    const auto sys = resgrad::make_dho({0.1, 1.0});
    EXPECT_EQ(resgrad::hamiltonian(State{0, 0, 0, 0}, sys), 0.0);
    EXPECT_NEAR(resgrad::hamiltonian(State{0, 2.3, -3.1, 0}, sys), 7.45, 1e-14);
    EXPECT_EQ(resgrad::hamiltonian(State{0, 1.0, 0.0, 0}, sys), 0.5);
    // w is ignored
    EXPECT_EQ(resgrad::hamiltonian(State{0, 1.0, 0.0, 3.0}, sys), 0.5);
}

TEST(KEnergy, Values) {
    const auto sys = resgrad::make_dho({0.1, 1.0});
    EXPECT_NEAR(resgrad::k_energy(State{0, 2.3, -3.1, 0}, sys), 7.45, 1e-14);
    EXPECT_EQ(resgrad::k_energy(State{0, 0, 0, 0}, sys), 0.0);
    EXPECT_EQ(resgrad::k_energy(State{0, 1, 0, 0.5}, sys), 1.0);
}

TEST(KEnergy, AdditiveInReservoir) {
    oracle::Rng rng(11);
    for (const auto& sys : resgrad::builtin_systems()) {
        for (int i = 0; i < 1000; ++i) {
            const State s{0, rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-5, 5)};
            State s0 = s;
            s0.w = 0.0;
            const double h = resgrad::hamiltonian(s, sys);
            // K - K(w=0) = (H + w) - H, exact when H + w is representable
            EXPECT_NEAR(resgrad::k_energy(s, sys) - resgrad::k_energy(s0, sys), s.w,
                        4 * std::numeric_limits<double>::epsilon() * (std::abs(h) + std::abs(s.w)))
                << sys.name();
        }
    }
}

TEST(KEnergy, RejectsNonFinite) {
    const auto sys = resgrad::make_dho();
    EXPECT_THROW((void)resgrad::k_energy(State{0, std::nan(""), 0, 0}, sys), resgrad::NonFiniteStateError);
    EXPECT_THROW((void)resgrad::hamiltonian(State{0, 0, INFINITY, 0}, sys), resgrad::NonFiniteStateError);
}

TEST(ContinuousRhs, Values) {
    const auto dho = resgrad::make_dho({0.1, 1.0});
    const auto r = resgrad::continuous_rhs(State{0, 2.3, -3.1, 0}, dho);
    EXPECT_DOUBLE_EQ(r.dq, -3.1);
    EXPECT_NEAR(r.dp, -1.99, 1e-15);
    EXPECT_NEAR(r.dw, 0.961, 1e-15);

    const auto z = resgrad::continuous_rhs(State{}, dho);
    EXPECT_EQ(z.dq, 0.0);
    EXPECT_EQ(z.dp, 0.0);
    EXPECT_EQ(z.dw, 0.0);

    const auto cons = resgrad::make_dho({0.0, 1.0});
    const auto c = resgrad::continuous_rhs(State{0, 1, 2, 0}, cons);
    EXPECT_EQ(c.dq, 2.0);
    EXPECT_EQ(c.dp, -1.0);
    EXPECT_EQ(c.dw, 0.0);
}

TEST(KGradient, Values) {
    const auto dho = resgrad::make_dho({0.1, 1.0});
    const auto g = resgrad::k_gradient(State{0, 2.3, -3.1, 0}, dho);
    EXPECT_NEAR(g.gq, 1.99, 1e-15);
    EXPECT_EQ(g.gp, -3.1);

    const auto root = resgrad::k_gradient(State{0, 0.31, -3.1, 0}, dho);
    EXPECT_NEAR(root.gq, 0.0, 1e-16);

    const auto cons = resgrad::make_dho({0.0, 1.0});
    const auto c = resgrad::k_gradient(State{0, 0.7, -1.3, 0}, cons);
    EXPECT_EQ(c.gq, 0.7);
    EXPECT_EQ(c.gp, -1.3);
}

TEST(Catalog, BuiltinsAndLookup) {
    const auto all = resgrad::builtin_systems();
    ASSERT_EQ(all.size(), 3u);
    EXPECT_EQ(all[0].name(), "dho");
    EXPECT_EQ(all[1].name(), "duffing");
    EXPECT_EQ(all[2].name(), "vdp");

    EXPECT_NEAR(resgrad::make_system("dho", {.b = 0.1, .k = 1.0}).dissipation(1, 1), 0.1, 1e-17);
    EXPECT_EQ(resgrad::make_system("vdp", {.mu = 1.0}).dissipation(0, 1), -1.0);
    const auto undamped = resgrad::make_system("dho", {.b = 0.0});
    oracle::Rng rng(3);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(undamped.dissipation(rng.uniform(-5, 5), rng.uniform(-5, 5)), 0.0);

    EXPECT_THROW((void)resgrad::make_system("lorenz"), resgrad::CatalogError);
    EXPECT_THROW((void)resgrad::make_system("dho", {.b = -0.1}), resgrad::DomainError);
    EXPECT_THROW((void)resgrad::make_system("dho", {.k = 0.0}), resgrad::DomainError);
}

TEST(Catalog, OscillatorParamsOnlyForDho) {
    EXPECT_TRUE(resgrad::oscillator_params(resgrad::make_dho({0.2, 3.0})).has_value());
    EXPECT_EQ(resgrad::oscillator_params(resgrad::make_dho({0.2, 3.0}))->k, 3.0);
    EXPECT_FALSE(resgrad::oscillator_params(resgrad::make_duffing()).has_value());
    EXPECT_FALSE(resgrad::oscillator_params(resgrad::make_vdp()).has_value());
    EXPECT_FALSE(resgrad::oscillator_params(resgrad::Duffing{}).has_value());
}

TEST(Catalog, UnderdampedCheck) {
    EXPECT_TRUE((resgrad::DampedOscillatorParams{0.1, 1.0}.underdamped()));
    EXPECT_FALSE((resgrad::DampedOscillatorParams{2.0, 1.0}.underdamped()));
    EXPECT_FALSE((resgrad::DampedOscillatorParams{3.0, 1.0}.underdamped()));
}

// K is conserved by the continuous flow. Seen with w = w(q), dK/dq already carries D and
// dK/dt = gq dq + gp dp; seen with w as an independent coordinate, dK/dq = V' and the
// reservoir rate enters separately.
TEST(Properties, ContinuousConservation) {
    oracle::Rng rng(5);
    for (const auto& sys : resgrad::builtin_systems()) {
        for (int i = 0; i < 1000; ++i) {
            const State s{0, rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1, 1)};
            const auto g = resgrad::k_gradient(s, sys);
            const auto r = resgrad::continuous_rhs(s, sys);
            const double d = sys.dissipation(s.q, s.p);

            const double a = g.gq * r.dq, b = g.gp * r.dp;
            EXPECT_LE(std::abs(a + b), 1e-12 * std::max(std::abs(a) + std::abs(b), 1e-300)) << sys.name();

            const double c = (g.gq - d) * r.dq, e = r.dw;
            EXPECT_LE(std::abs(c + b + e), 1e-12 * std::max(std::abs(c) + std::abs(b) + std::abs(e), 1e-300))
                << sys.name();
        }
    }
}

TEST(Properties, DiscreteDissipationConsistency) {
    oracle::Rng rng(7);
    for (const auto& sys : resgrad::builtin_systems()) {
        for (int i = 0; i < 1000; ++i) {
            const double q = rng.uniform(-4, 4), p = rng.uniform(-4, 4);
            EXPECT_EQ(sys.discrete_dissipation(q, q, p, p), sys.dissipation(q, p)) << sys.name();
        }
    }
}

TEST(Properties, ForceIsMinusPotentialDerivative) {
    oracle::Rng rng(9);
    for (const auto& sys : resgrad::builtin_systems()) {
        const auto v = [&](double q) { return sys.potential(q); };
        for (int i = 0; i < 200; ++i) {
            const double q = rng.uniform(-3, 3);
            const double h = 1e-5;
            const double fd = (v(q + h) - v(q - h)) / (2 * h);
            const double f = sys.force(q);
            EXPECT_LE(std::abs(-fd - f), 1e-6 * std::max(1.0, std::abs(f))) << sys.name() << " q=" << q;
        }
    }
}

TEST(Properties, PotentialQuotient) {
    oracle::Rng rng(13);
    for (const auto& sys : resgrad::builtin_systems()) {
        for (int i = 0; i < 1000; ++i) {
            const double q0 = rng.uniform(-3, 3), q1 = rng.uniform(-3, 3);
            if (q0 == q1) continue;
            const double dv = sys.potential(q1) - sys.potential(q0);
            const double lhs = sys.potential_quotient(q0, q1) * (q1 - q0);
            const double scale = std::abs(sys.potential(q1)) + std::abs(sys.potential(q0));
            EXPECT_NEAR(lhs, dv, 1e-14 * std::max(1.0, scale)) << sys.name();
        }
        // analytic limit at coincident points
        for (double q : {-1.7, 0.0, 0.4, 2.5}) {
            EXPECT_NEAR(sys.potential_quotient(q, q), -sys.force(q), 1e-14 * std::max(1.0, std::abs(sys.force(q))));
        }
    }
}

TEST(CustomSystem, GuardedDifferenceQuotient) {
    // pendulum-like potential without a closed-form quotient
    const auto sys = resgrad::SystemSpec::custom(
        "pendulum", [](double q) { return 1.0 - std::cos(q); }, [](double q) { return -std::sin(q); },
        [](double, double p) { return 0.3 * p; });
    EXPECT_FALSE(sys.params().has_value());
    EXPECT_EQ(sys.potential_quotient(0.8, 0.8), std::sin(0.8));
    EXPECT_NEAR(sys.potential_quotient(0.2, 0.9), (std::cos(0.2) - std::cos(0.9)) / 0.7, 1e-15);
    EXPECT_EQ(sys.discrete_dissipation(0.1, 0.2, 1.0, 3.0), 0.5 * (0.3 + 0.9));
}

}  // namespace
