#include "odelay/errors.hpp"
#include "odelay/staticmap.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace odelay;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

// (a = 0.5, omega = 10): maximal K over offsets and phases.
constexpr double kK3OneLine = 0.17937293652797859;

InterferenceSpec one_line(double phase = 0.0) { return InterferenceSpec::from_lines({{10.0, 0.5, phase}}); }

} // namespace

// =============================================================================
// roots_psi
// =============================================================================

TEST_CASE("roots_psi without interference", "[staticmap]") {
    const RootPair r = roots_psi(InterferenceSpec{}, 3.0);
    CHECK(r.psi_l == 3.0);
    CHECK(r.psi_h == 3.0);
}

TEST_CASE("roots_psi against a 1e-6 sign scan", "[staticmap]") {
    constexpr double kLow = -0.1306440008369511;
    constexpr double kHigh = 0.38374671064990484;
    const auto spec = one_line();
    const auto roots = oracle::all_roots(oracle::static_integrand(spec, 0.0).f, -0.5, 0.5, 1e-6);
    REQUIRE(roots.size() == 3);
    CHECK_THAT(roots.front(), WithinAbs(kLow, 1e-12));
    CHECK_THAT(roots.back(), WithinAbs(kHigh, 1e-12));

    const RootPair r = roots_psi(spec, 0.0);
    CHECK_THAT(r.psi_l, WithinAbs(kLow, 1e-11));
    CHECK_THAT(r.psi_h, WithinAbs(kHigh, 1e-11));
}

TEST_CASE("roots_psi has a single root when x + w is monotone", "[staticmap]") {
    const auto spec = InterferenceSpec::from_lines({{2.0, 0.2, 0.3}, {3.0, 0.1, 1.0}});
    REQUIRE(slope_bound(spec) < 1.0);
    for (double b : {-1.0, 0.0, 0.4}) {
        const RootPair r = roots_psi(spec, b);
        CHECK(r.psi_l == r.psi_h);
        CHECK_THAT(r.psi_l + spec(r.psi_l) - b, WithinAbs(0.0, 1e-11));
    }
}

TEST_CASE("roots_psi finds a tangential root", "[staticmap]") {
    const auto spec = one_line(0.8);
    // Locate a local minimum of x + w(x) and use its value as the offset.
    const auto slope = [&](double x) { return 1.0 + eval_w_slope(spec, x); };
    double xm = 0.0;
    for (double x = -0.6; x < 0.6; x += 1e-3) {
        if (slope(x) < 0.0 && slope(x + 1e-3) >= 0.0) {
            xm = bisect_sign_change(slope, x, x + 1e-3);
            break;
        }
    }
    const double b = xm + spec(xm);
    const RootPair r = roots_psi(spec, b);
    // The dip only touches zero, so a sign scan would not see it. Near a double
    // root an offset error eps moves the root by sqrt(2 eps / g''), hence 1e-6.
    const bool tangent_is_extreme = std::abs(r.psi_l - xm) < 1e-6 || std::abs(r.psi_h - xm) < 1e-6;
    CHECK(tangent_is_extreme);
}

// =============================================================================
// eval_K and shift_transform
// =============================================================================

TEST_CASE("eval_K examples", "[staticmap]") {
    const KEvalResult e = eval_K(InterferenceSpec{}, 0.0, {});
    CHECK(e.value == 0.0);
    CHECK(e.psi_l == 0.0);
    CHECK(e.psi_h == 0.0);

    const auto flipped = one_line(kPi);
    CHECK(eval_K(flipped, 0.0, {kPi}).value == 0.0);
    CHECK(oracle::k_value(flipped, 0.0) == 0.0);

    constexpr double kPositive = 0.02962172440695672;  // offset 0.1, phase 0
    CHECK_THAT(oracle::k_value(one_line(), 0.1), WithinRel(kPositive, 1e-12));
    CHECK_THAT(eval_K(one_line(), 0.1, {0.0}).value, WithinRel(kPositive, 1e-9));

    CHECK_THROWS_AS(eval_K(one_line(), 0.0, {}), InvalidArgument);
}

TEST_CASE("eval_K against the oracle on random arguments", "[staticmap][property]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> off(-0.5, 0.5);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
    const auto spec = InterferenceSpec::from_lines({{10.0, 0.3, 0.0}, {23.0, 0.2, 0.0}});
    for (int i = 0; i < 25; ++i) {
        const double o = off(rng);
        const std::vector<double> phases{ph(rng), ph(rng)};
        const double ref = oracle::k_value(spec.with_phases(phases), o);
        CHECK_THAT(eval_K(spec, o, phases).value, WithinAbs(ref, 1e-9 * (1.0 + ref)));
    }
    // Far below the box the answer is still finite and matches.
    CHECK_THAT(eval_K(one_line(), -11.0, {0.0}).value, WithinAbs(oracle::k_value(one_line(), -11.0), 1e-12));
}

TEST_CASE("shift_transform examples", "[staticmap]") {
    const ShiftedArguments e = shift_transform(2.0, {}, InterferenceSpec{});
    CHECK(e.offset == 0.0);
    CHECK(e.phases.empty());
    CHECK(e.shift == 2.0);

    // psi_l = 0 already: b = w(0) with no lower root.
    const auto spec = InterferenceSpec::from_lines({{2.0, 0.2, 0.0}});
    const double b = spec(0.0);
    const ShiftedArguments id = shift_transform(b, spec.phases(), spec);
    CHECK_THAT(id.shift, WithinAbs(0.0, 1e-12));
    CHECK_THAT(id.offset, WithinAbs(b, 1e-12));
    CHECK_THAT(id.phases[0], WithinAbs(0.0, 1e-11));
}

TEST_CASE("shift_transform preserves K and moves psi_l to zero", "[staticmap][property]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> off(-0.5, 0.5);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
    const auto spec = one_line();
    for (int i = 0; i < 20; ++i) {
        const double o = off(rng);
        const std::vector<double> phases{ph(rng)};
        const ShiftedArguments s = shift_transform(o, phases, spec);
        const KEvalResult before = eval_K(spec, o, phases);
        const KEvalResult after = eval_K(spec, s.offset, s.phases);
        CHECK_THAT(after.value, WithinAbs(before.value, 1e-8 * std::max(1.0, before.value)));
        CHECK_THAT(after.psi_l, WithinAbs(0.0, 1e-10));
    }
}

// =============================================================================
// compute_K3
// =============================================================================

TEST_CASE("compute_K3 of the empty spectrum is zero", "[staticmap]") {
    CHECK(compute_K3(InterferenceSpec{}).value == 0.0);
}

TEST_CASE("compute_K3 one line", "[staticmap]") {
    const KEvalResult k = compute_K3(one_line(1.3));
    CHECK_THAT(k.value, WithinRel(kK3OneLine, 1e-6));
    CHECK(k.offset >= -0.5);
    CHECK(k.offset <= 0.5);

    // The optimum is a tangency; the oracle sees it once the dip is just deep enough.
    const double near = oracle::k_value(one_line().with_phases(k.phases), k.offset + 1e-7);
    CHECK(near <= k.value + 1e-9);
    CHECK_THAT(near, WithinAbs(k.value, 1e-5));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> off(-0.5, 0.5);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
    for (int i = 0; i < 500; ++i) {
        const double probe = eval_K(one_line(), off(rng), {ph(rng)}).value;
        CHECK(probe <= k.value * (1.0 + 1e-9));
    }
}

TEST_CASE("compute_K3 is invariant under a global time shift", "[staticmap][property]") {
    const auto spec = InterferenceSpec::from_lines({{10.0, 0.3, 0.0}, {23.0, 0.2, 1.0}});
    const double base = compute_K3(spec).value;
    for (double s : {0.37, 1.234}) {
        CHECK_THAT(compute_K3(spec.time_shifted(s)).value, WithinRel(base, 1e-6));
    }
}

TEST_CASE("compute_K3 enforces the dimension budget", "[staticmap]") {
    std::vector<SpectrumLine> lines;
    for (int i = 1; i <= 7; ++i) {
        lines.push_back({double(i), 0.01, 0.0});
    }
    try {
        (void)compute_K3(InterferenceSpec::from_lines(lines));
        FAIL("expected BudgetExceeded");
    } catch (const BudgetExceeded& e) {
        CHECK(e.dimension() == 7);
    }
}

// =============================================================================
// static_map, continuity, Lipschitz probe
// =============================================================================

TEST_CASE("static_map closed forms without interference", "[staticmap]") {
    CHECK_THAT(static_map(0.0, 0.5, InterferenceSpec{}), WithinAbs(1.0, 1e-10));
    CHECK_THAT(static_map(5.0, 2.0, InterferenceSpec{}), WithinAbs(7.0, 1e-10));
    CHECK_THROWS_AS(static_map(0.0, 0.0, InterferenceSpec{}), InvalidArgument);
}

TEST_CASE("static_map is monotone in b", "[staticmap][property]") {
    const InterferenceSpec none;
    double prev = static_map(-1.0, 0.3, none);
    for (int i = 1; i <= 50; ++i) {
        const double cur = static_map(-1.0 + 0.04 * i, 0.3, none);
        CHECK(cur > prev);
        prev = cur;
    }
    const auto spec = one_line(1.3);
    const double k = 1.2 * compute_K3(spec).value;
    prev = static_map(-1.0, k, spec);
    for (int i = 1; i <= 200; ++i) {
        const double cur = static_map(-1.0 + 0.01 * i, k, spec);
        CHECK(cur >= prev - 1e-12);
        prev = cur;
    }
}

TEST_CASE("static_map one line against the forward-clamp oracle", "[staticmap]") {
    constexpr double kTheta = 0.96177845937740991;  // b = 0.2, k = 0.3
    const auto spec = one_line();
    const auto p = oracle::static_integrand(spec, 0.2);
    CHECK_THAT(oracle::threshold(p, 0.2 - 0.5 - 1.0, 0.3, 1e-4, 10.0).theta, WithinAbs(kTheta, 1e-12));
    CHECK_THAT(static_map(0.2, 0.3, spec), WithinAbs(kTheta, 1e-9));
}

TEST_CASE("continuity_condition examples", "[staticmap]") {
    const ContinuityReport none = continuity_condition(InterferenceSpec{}, 3.0, 0.1, 1.0);
    CHECK(none.satisfied);
    CHECK_THAT(none.margin, WithinAbs(0.1, 1e-15));

    const ContinuityReport zero = continuity_condition(one_line(), 1.0, 0.0, 1.0);
    CHECK_FALSE(zero.satisfied);

    const auto spec = InterferenceSpec::from_lines({{30.0, 0.4, 0.0}});
    const ContinuityReport r = continuity_condition(spec, 2.0, 1.0, 1.0);
    const double k3_half = compute_K3(InterferenceSpec::from_lines({{30.0, 0.2, 0.0}})).value;
    CHECK_THAT(r.threshold_rhs, WithinRel(2.0 * k3_half, 1e-6));
    CHECK_THAT(r.k3, WithinRel(k3_half, 1e-6));
}

TEST_CASE("continuity threshold separates jumps in the physical map", "[staticmap][property]") {
    // Physical map: sat-integral of m1 x + w(x) - b reaching V*tau, i.e. the
    // normalized map at k = V*tau / m1 with w / m1.
    const double m1 = 2.0;
    const auto spec = InterferenceSpec::from_lines({{30.0, 0.4, 0.0}});
    const ContinuityReport r = continuity_condition(spec, m1, 1.0, 1.0);
    const auto adversarial = spec.scaled(1.0 / m1).with_phases(r.argmax.phases);
    const auto largest_step = [&](double vtau) {
        double worst = 0.0;
        double prev = static_map(-0.2, vtau / m1, adversarial);
        for (int i = 1; i <= 400; ++i) {
            const double th = static_map(-0.2 + 1e-3 * i, vtau / m1, adversarial);
            worst = std::max(worst, th - prev);
            prev = th;
        }
        return worst;
    };
    CHECK(largest_step(2.0 * r.threshold_rhs) < 0.02);
    CHECK(largest_step(0.5 * r.threshold_rhs) > 0.02);
}

TEST_CASE("lipschitz_probe without interference", "[staticmap]") {
    const LipschitzProbe p = lipschitz_probe(InterferenceSpec{}, 0.5, 0.3, 1e-3);
    CHECK_THAT(p.ratio, WithinAbs(1.0, 1e-6));
    CHECK(p.bound() >= 1.0);
}

TEST_CASE("lipschitz_probe ratio stays below mu2 / mu1 above K3", "[staticmap][property]") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> off(-0.5, 0.5);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
    for (int i = 0; i < 100; ++i) {
        const auto spec = one_line(ph(rng));
        const LipschitzProbe p = lipschitz_probe(spec, 2.0 * kK3OneLine, off(rng), 1e-3);
        CHECK(p.ratio <= p.bound() * (1.0 + 1e-9));
    }
}

TEST_CASE("lipschitz_probe ratio converges as delta_b shrinks", "[staticmap]") {
    const auto spec = one_line(0.4);
    double prev = lipschitz_probe(spec, 2.0 * kK3OneLine, 0.1, 1e-2).ratio;
    double diff = 1.0;
    for (double db = 5e-3; db > 1e-5; db *= 0.5) {
        const double cur = lipschitz_probe(spec, 2.0 * kK3OneLine, 0.1, db).ratio;
        diff = std::abs(cur - prev);
        prev = cur;
    }
    CHECK(diff < 1e-3);
}

TEST_CASE("lipschitz_probe flags a jump below K3", "[staticmap]") {
    const KEvalResult k = compute_K3(one_line());
    const auto adversarial = one_line().with_phases(k.phases);
    const double kk = 0.5 * k.value;
    double b_jump = std::nan("");
    double prev = static_map(-0.5, kk, adversarial);
    for (int i = 1; i <= 1000 && std::isnan(b_jump); ++i) {
        const double th = static_map(-0.5 + 1e-3 * i, kk, adversarial);
        if (th - prev > 0.05) {
            b_jump = -0.5 + 1e-3 * (i - 1);
        }
        prev = th;
    }
    REQUIRE_FALSE(std::isnan(b_jump));
    CHECK_THROWS_AS(lipschitz_probe(adversarial, kk, b_jump, 1e-3), PreconditionViolation);
}
