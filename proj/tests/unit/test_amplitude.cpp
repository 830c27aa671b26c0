#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "vegspots/amplitude.hpp"
#include "vegspots/errors.hpp"
#include "vegspots/solver.hpp"

using namespace vegspots;

namespace {

// tests/oracles/gl_oracle.py: scipy shooting, cross-checked by collocation.
constexpr double kQuadraticQ0 = 2.391956403224;
constexpr double kCubicQ0 = 2.179858126427;

ModelParams defaults(double rho = 1.5) {
    ModelParams m;
    m.rho = rho;
    return m;
}

void check_positive_decaying(const GLGroundState& g) {
    const std::size_t n = g.q.size();
    REQUIRE(n > 10);
    const auto peak = std::max_element(g.q.begin(), g.q.end()) - g.q.begin();
    for (std::size_t i = 1; i + 1 < n; ++i) CHECK(g.q[i] > 0.0);
    for (std::size_t i = peak + 1; i < n; ++i) CHECK(g.q[i] <= g.q[i - 1]);
    CHECK(g.max_residual < 1e-8);
}

}  // namespace

TEST_CASE("quadratic ground state") {
    const GLGroundState g = solve_gl_quadratic();
    CHECK(g.kind == GLKind::QuadraticPlanarRadial);
    CHECK(g.q_at_0 > 1.0);
    CHECK(g.q_at_0 == doctest::Approx(kQuadraticQ0).epsilon(1e-9));
    CHECK(g.q_at_0_shooting == doctest::Approx(kQuadraticQ0).epsilon(1e-9));
    CHECK(std::abs(g.decay_rate - 1.0) <= 0.02);
    check_positive_decaying(g);
    // The collocation profile and the shooting value agree at the core.
    CHECK(g.eval(0.0) == doctest::Approx(g.q_at_0).epsilon(1e-8));
    CHECK(g.eval(2 * g.s_max) < g.eval(g.s_max));
    CHECK(g.eval(2 * g.s_max) >= 0.0);
}

TEST_CASE("quadratic ground state is stable under grid refinement") {
    GLOptions coarse, fine;
    coarse.ds = 0.01;
    fine.ds = 0.0025;
    const GLGroundState a = solve_gl_quadratic(coarse), b = solve_gl_quadratic(fine);
    CHECK(std::abs(a.q_at_0 - b.q_at_0) < 1e-6);
    for (double s : {0.5, 1.0, 3.0, 8.0}) CHECK(std::abs(a.eval(s) - b.eval(s)) < 1e-6);
}

TEST_CASE("quadratic shooting bracket") {
    // q(0) = 1 is the uniform solution and never decays; far above the ground
    // state the orbit overshoots through zero.
    const GLGroundState g = solve_gl_quadratic();
    CHECK(g.q_at_0 > 1.0);
    CHECK(g.q_at_0 < 4.0);
}

TEST_CASE("cubic ground state") {
    const GLGroundState g = solve_gl_cubic(1.0, -1.0);
    CHECK(g.kind == GLKind::CubicHalfPower);
    CHECK(g.q_at_0 == doctest::Approx(kCubicQ0).epsilon(1e-8));
    CHECK(g.q_at_0_shooting == doctest::Approx(kCubicQ0).epsilon(1e-8));
    CHECK(std::abs(g.decay_rate - 1.0) <= 0.02);
    check_positive_decaying(g);
    // q ~ q0 sqrt(s) near the origin.
    for (double s : {1e-3, 1e-2}) CHECK(std::abs(g.eval(s) / std::sqrt(s) - g.q_at_0) <= 1e-3 * g.q_at_0);
}

TEST_CASE("cubic existence iff c3 < 0") {
    CHECK_THROWS_AS(solve_gl_cubic(1.0, 0.1), NoGroundState);
    CHECK_THROWS_AS(solve_gl_cubic(1.0, 0.0), NoGroundState);
    CHECK_THROWS_AS(solve_gl_cubic(1.0, 1.0), NoGroundState);
    CHECK_THROWS_AS(solve_gl_cubic(0.0, -1.0), InvalidParams);
    CHECK_THROWS_AS(solve_gl_cubic(-1.0, -1.0), InvalidParams);
    CHECK_NOTHROW(solve_gl_cubic(1.0, -1e-3));
}

TEST_CASE("cubic decay rate follows sqrt(c0)") {
    for (double c0 : {0.25, 0.476936, 1.0, 2.0}) {
        const GLGroundState g = solve_gl_cubic(c0, -0.8);
        CHECK(std::abs(g.decay_rate - std::sqrt(c0)) <= 0.02 * std::sqrt(c0));
    }
}

TEST_CASE("cubic rescaling covariance") {
    const GLGroundState ref = solve_gl_cubic(1.0, -1.0);
    for (auto [c0, c3] : {std::pair{0.5, -0.7}, std::pair{2.0, -3.0}, std::pair{0.476936, -0.735443}}) {
        const GLGroundState g = solve_gl_cubic(c0, c3);
        const double amp = std::sqrt(c0 / std::abs(c3));
        for (double s : {0.2, 0.7, 1.5, 3.0, 6.0}) {
            CHECK(std::abs(g.eval(s) - amp * ref.eval(std::sqrt(c0) * s)) < 1e-6);
        }
        // q0 transforms with the extra factor c0^(1/4) from the sqrt(s) prefactor.
        CHECK(g.q_at_0 == doctest::Approx(amp * std::pow(c0, 0.25) * ref.q_at_0).epsilon(1e-6));
    }
}

TEST_CASE("leading-order spots") {
    const ReducedParams rp = reduced_params(defaults());
    const double k = rp.turing->k, omega = rp.turing->omega;
    const double N0 = std::pow(k, 4) / (1 - rp.a * rp.b);
    const RadialGrid g = build_grid(40.0, 801);

    SUBCASE("eps = 0 is the uniform vegetated state") {
        const SystemDef sys = SystemDef::reduced(rp);
        const auto v = sys.vegetated_state(rp.turing->P0);
        for (SpotFamily f : {SpotFamily::SpotA, SpotFamily::SpotB, SpotFamily::RingPlus, SpotFamily::RingMinus}) {
            const LeadingOrderProfile lo = leading_order_spot(rp, 0.0, f, g);
            for (std::size_t i = 0; i < lo.N.size(); ++i) {
                CHECK(std::abs(lo.N[i] - v[0]) < 1e-13);
                CHECK(std::abs(lo.W[i] - v[1]) < 1e-13);
            }
        }
    }
    SUBCASE("spot A core amplitude") {
        for (double eps : {0.01, 0.05, 0.1}) {
            const LeadingOrderProfile lo = leading_order_spot(rp, eps, SpotFamily::SpotA, g);
            CHECK((lo.N[0] - N0) / eps == doctest::Approx(N0 * (std::sqrt(3.0) / omega) / (k * k)).epsilon(1e-12));
            CHECK(lo.P == doctest::Approx(rp.turing->P0 - eps * eps).epsilon(1e-14));
        }
        // Numeric value of the coefficient N0 (sqrt 3 / omega) / k^2 at rho = 1.5.
        CHECK(N0 * (std::sqrt(3.0) / omega) / (k * k) ==
              doctest::Approx(1.2741098727878072676).epsilon(1e-12));
    }
    SUBCASE("extremum locations") {
        const double eps = 0.1;
        auto argmax_dev = [&](const LeadingOrderProfile& lo) {
            std::size_t best = 0;
            for (std::size_t i = 0; i < lo.N.size(); ++i) {
                if (std::abs(lo.N[i] - N0) > std::abs(lo.N[best] - N0)) best = i;
            }
            return best;
        };
        CHECK(argmax_dev(leading_order_spot(rp, eps, SpotFamily::SpotA, g)) == 0);
        CHECK(argmax_dev(leading_order_spot(rp, eps, SpotFamily::SpotB, g)) == 0);
        CHECK(argmax_dev(leading_order_spot(rp, eps, SpotFamily::RingPlus, g)) > 0);
        CHECK(argmax_dev(leading_order_spot(rp, eps, SpotFamily::RingMinus, g)) > 0);
        CHECK(leading_order_spot(rp, eps, SpotFamily::SpotA, g).N[0] > N0);
        CHECK(leading_order_spot(rp, eps, SpotFamily::SpotB, g).N[0] < N0);
    }
    SUBCASE("ring: N perturbation vanishes at the core, W perturbation does not") {
        const double eps = 0.1;
        const LeadingOrderProfile lo = leading_order_spot(rp, eps, SpotFamily::RingPlus, g);
        const LeadingOrderProfile base = leading_order_spot(rp, 0.0, SpotFamily::RingPlus, g);
        CHECK(std::abs(lo.N[0] - N0) < 1e-14);
        CHECK(std::abs(lo.W[0] - base.W[0]) > 1e-6);
    }
    SUBCASE("amplitude orders") {
        auto dev = [&](SpotFamily f, double eps) {
            const LeadingOrderProfile lo = leading_order_spot(rp, eps, f, g);
            double m = 0;
            for (double v : lo.N) m = std::max(m, std::abs(v - N0));
            return m;
        };
        CHECK(dev(SpotFamily::SpotA, 0.02) / dev(SpotFamily::SpotA, 0.01) == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(dev(SpotFamily::SpotB, 0.02) / dev(SpotFamily::SpotB, 0.01) ==
              doctest::Approx(std::pow(2.0, 0.75)).epsilon(1e-10));
        CHECK(dev(SpotFamily::RingPlus, 0.02) / dev(SpotFamily::RingPlus, 0.01) ==
              doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-10));
    }
    SUBCASE("spot B and rings need omega > 30/23") {
        const ReducedParams low = ReducedParams::from_ab(0.1, 1.5);
        REQUIRE(low.turing.has_value());
        REQUIRE(low.turing->omega < kOmegaStar);
        CHECK_NOTHROW(leading_order_spot(low, 0.1, SpotFamily::SpotA, g));
        CHECK_THROWS_AS(leading_order_spot(low, 0.1, SpotFamily::SpotB, g), FamilyUnavailable);
        CHECK_THROWS_AS(leading_order_spot(low, 0.1, SpotFamily::RingPlus, g), FamilyUnavailable);
        CHECK_THROWS_AS(leading_order_spot(low, 0.1, SpotFamily::RingMinus, g), FamilyUnavailable);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(leading_order_spot(ReducedParams::from_ab(0.1, 0.5), 0.1, SpotFamily::SpotA, g), NoTuringPoint);
        CHECK_THROWS_AS(leading_order_spot(rp, -0.1, SpotFamily::SpotA, g), InvalidParams);
    }
    SUBCASE("mapping to model variables") {
        const ModelParams m = defaults();
        const RadialGrid mg = build_grid(300.0, 1001);
        const double eps = 0.2;
        const LeadingOrderProfile full = leading_order_spot(m, eps, SpotFamily::SpotA, mg);
        const RadialGrid rg = build_grid(300.0 / std::sqrt(30.0), 1001);
        const LeadingOrderProfile red = leading_order_spot(rp, eps, SpotFamily::SpotA, rg);
        CHECK_FALSE(full.reduced_scale);
        CHECK(full.p == doctest::Approx(0.15625 + (rp.turing->P0 - eps * eps) / (1.024 * 30.0)).epsilon(1e-13));
        for (std::size_t i = 0; i < full.n_of_r.size(); i += 50) {
            CHECK(full.n_of_r[i] == doctest::Approx(red.N[i] / 30.0).epsilon(1e-12));
            CHECK(full.w_of_r[i] == doctest::Approx(full.p + 3.0 * red.W[i] / 30.0).epsilon(1e-12));
        }
        CHECK(full.physical);
    }
}

TEST_CASE("leading-order gaps") {
    const ReducedParams rp = reduced_params(defaults());
    const RadialGrid g = build_grid(60.0, 1201);
    for (GapBranch b : {GapBranch::SubBare, GapBranch::SuperVegetated}) {
        CAPTURE(static_cast<int>(b));
        const double eps = 0.3;
        const LeadingOrderProfile lo = leading_order_gap(rp, eps, b, g);
        const double baseN = b == GapBranch::SubBare ? 0.0 : eps * eps / (1 - rp.a * rp.b);
        CHECK(lo.P == doctest::Approx(b == GapBranch::SubBare ? -eps * eps : eps * eps).epsilon(1e-15));
        double mind = INFINITY;
        for (std::size_t i = 0; i < lo.N.size(); ++i) {
            mind = std::min(mind, lo.N[i] - baseN);
            CHECK(std::abs((lo.W[i] - rp.a * baseN) - rp.a * (lo.N[i] - baseN)) < 1e-14);
        }
        CHECK(mind < 0.0);
        CHECK(lo.N[0] - baseN == doctest::Approx(-eps * eps * kQuadraticQ0 / 0.785).epsilon(1e-8));

        // Peak depth scales like eps^2.
        const LeadingOrderProfile half = leading_order_gap(rp, eps / 2, b, g);
        const double baseHalf = b == GapBranch::SubBare ? 0.0 : eps * eps / 4 / (1 - rp.a * rp.b);
        CHECK((lo.N[0] - baseN) / (half.N[0] - baseHalf) == doctest::Approx(4.0).epsilon(1e-10));
    }
    SUBCASE("sub-critical gap is unphysical in model variables") {
        const LeadingOrderProfile lo = leading_order_gap(defaults(), 0.3, GapBranch::SubBare, build_grid(300, 1000));
        CHECK(lo.n_of_r[0] < 0.0);
        CHECK_FALSE(lo.physical);
        CHECK(lo.p < 0.15625);
    }
    SUBCASE("eps = 0 gives the base state") {
        const LeadingOrderProfile lo = leading_order_gap(rp, 0.0, GapBranch::SuperVegetated, g);
        for (double v : lo.N) CHECK(v == 0.0);
    }
}

TEST_CASE("leading-order spot A seeds the reduced Newton solver") {
    // Near onset the converged spot stays within the O(eps) neighbourhood of
    // the leading-order profile.
    const ReducedParams rp = reduced_params(defaults());
    const SystemDef sys = SystemDef::reduced(rp);
    const RadialGrid g = build_grid(200.0, 2000);
    const double k = rp.turing->k;
    for (double eps : {0.1, 0.05}) {
        CAPTURE(eps);
        const LeadingOrderProfile lo = leading_order_spot(rp, eps, SpotFamily::SpotA, g);
        const Eigen::VectorXd n = Eigen::Map<const Eigen::VectorXd>(lo.N.data(), g.T);
        const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(lo.W.data(), g.T);
        NewtonOptions no;
        no.max_iter = 100;
        const Profile pr = newton_solve(sys, stack_state(n, w), lo.P, g, no);
        REQUIRE(pr.converged);
        double dev = 0.0, amp = 0.0;
        for (int i = 0; i < g.T; ++i) {
            if (g.r[i] > 5 * M_PI / k) break;
            dev = std::max(dev, std::abs(pr.n[i] - lo.N[i]));
        }
        amp = std::abs(lo.N[0] - lo.N[g.T - 1]);
        CHECK(dev < amp);
        CHECK(pr.n[0] - pr.n[g.T - 1] > 0.5 * amp);
    }
}
