#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vegspots/continuation.hpp"
#include "vegspots/errors.hpp"
#include "vegspots/model.hpp"

using namespace vegspots;

namespace {

Profile uniform_profile(const SystemDef& sys, const RadialGrid& g, double param) {
    const auto v = sys.vegetated_state(param);
    const Eigen::VectorXd U =
        stack_state(Eigen::VectorXd::Constant(g.T, v[0]), Eigen::VectorXd::Constant(g.T, v[1]));
    Profile p = newton_solve(sys, U, param, g);
    REQUIRE(p.converged);
    return p;
}

// Uniform state on the middle root of the w* cubic.
Profile middle_sheet(const SystemDef& sys, const RadialGrid& g, double p) {
    const ModelParams& m = sys.model();
    const std::vector<double> roots = vegetated_water_roots(m.with_p(p));
    REQUIRE(roots.size() == 3);
    const double w = roots[1];
    const double n = m.gamma * w / (1.0 + m.sigma * w) - m.nu_mort;
    Profile prof = newton_solve(sys, stack_state(Eigen::VectorXd::Constant(g.T, n), Eigen::VectorXd::Constant(g.T, w)), p, g);
    REQUIRE(prof.converged);
    return prof;
}

void check_branch_invariants(const Branch& br, const ContinuationOptions& opts) {
    const auto& pts = br.points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        REQUIRE(pts[i].residual_norm < opts.newton.tol);
        if (i > 0) {
            REQUIRE(pts[i].ds >= opts.ds_min);
            REQUIRE(pts[i].ds <= opts.ds_max * (1 + 1e-12));
        }
        if (i > 0 && i + 1 < pts.size()) {
            const double d0 = pts[i].param - pts[i - 1].param;
            const double d1 = pts[i + 1].param - pts[i].param;
            REQUIRE(pts[i].fold_here == (d0 * d1 < 0.0));
        }
    }
}

// A branch given directly as (p, amplitude) pairs, arclength from the pairs.
Branch synthetic(const std::vector<std::pair<double, double>>& pa) {
    Branch br;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        BranchPoint bp;
        bp.param = pa[i].first;
        bp.amplitude = pa[i].second;
        bp.l2norm = pa[i].second;
        if (i > 0) bp.ds = std::hypot(pa[i].first - pa[i - 1].first, pa[i].second - pa[i - 1].second);
        br.points.push_back(bp);
    }
    return br;
}

}  // namespace

TEST_CASE("names") {
    CHECK(std::string(to_string(Stability::Stable)) == "Stable");
    CHECK(std::string(to_string(BranchFamily::GapSuper)) == "GapSuper");
    CHECK(std::string(to_string(Termination::AmplitudeBelowTol)) == "AmplitudeBelowTol");
    CHECK(stability_from(Verdict::Stable) == Stability::Stable);
    CHECK(stability_from(Verdict::Unstable) == Stability::Unstable);
    CHECK(stability_from(Verdict::Marginal) == Stability::Unknown);
    CHECK(stability_from(Verdict::Unknown) == Stability::Unknown);
}

TEST_CASE("reduced uniform branch follows the closed form") {
    const ReducedParams rp = reduced_params(ModelParams{});
    const SystemDef sys = SystemDef::reduced(rp);
    const RadialGrid g = build_grid(20.0, 40);
    ContinuationOptions opts;
    opts.ds_max = 0.05;
    opts.p_min = -0.5;
    opts.p_max = 1.5;
    for (int dir : {1, -1}) {
        const Branch br = continue_branch(sys, uniform_profile(sys, g, 0.4), g, dir, BranchFamily::UniformVegetated, opts);
        CHECK(br.terminated_reason == Termination::HitParameterBound);
        REQUIRE(br.points.size() > 10);
        check_branch_invariants(br, opts);
        double worst = 0.0;
        for (const BranchPoint& bp : br.points) {
            const double N0 = bp.param / (1.0 - rp.a * rp.b);
            worst = std::max(worst, std::abs(bp.l2norm / std::sqrt(g.T) - std::abs(N0)));
            worst = std::max(worst, std::abs(bp.amplitude));
        }
        CHECK(worst < 1e-8);
        const BranchPoint& last = br.points.back();
        REQUIRE(last.profile);
        const double N0 = last.param / (1.0 - rp.a * rp.b);
        CHECK((last.profile->n.array() - N0).abs().maxCoeff() < 1e-8);
        CHECK((last.profile->w.array() - rp.a * N0).abs().maxCoeff() < 1e-8);
        CHECK((dir > 0 ? last.param > 1.0 : last.param < 0.0));
    }
}

TEST_CASE("uniform branch above the reduction bound turns at a fold") {
    // Above the bound two vegetated sheets meet at a fold just above p_c.
    ModelParams m;
    m.rho = 7.0;
    const SystemDef sys = SystemDef::full(m);
    const RadialGrid g = build_grid(10.0, 8);
    ContinuationOptions opts;
    opts.ds_max = 0.01;
    opts.p_min = 0.0;
    opts.p_max = 0.35;
    opts.max_steps = 400;
    const Branch br = continue_branch(sys, middle_sheet(sys, g, 0.1), g, 1, BranchFamily::UniformVegetated, opts);
    CHECK(br.terminated_reason == Termination::HitParameterBound);
    check_branch_invariants(br, opts);
    REQUIRE(br.fold_count() == 1);
    const Fold f = br.folds().front();
    CHECK(br.points[f.index].fold_here);

    // Oracle: largest p at which the w* cubic has three positive roots.
    double lo = 0.1, hi = 0.2;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (vegetated_water_roots(m.with_p(mid)).size() >= 3 ? lo : hi) = mid;
    }
    CHECK(f.param > critical_precipitation(m));
    CHECK(f.param == doctest::Approx(lo).epsilon(1e-5));
    double pmax = 0.0;
    for (const BranchPoint& bp : br.points) pmax = std::max(pmax, bp.param);
    CHECK(f.param >= pmax - 1e-12);
    CHECK(f.param - pmax < opts.ds_max * opts.ds_max);
}

TEST_CASE("continuation is reversible through a fold") {
    ModelParams m;
    m.rho = 7.0;
    const SystemDef sys = SystemDef::full(m);
    const RadialGrid g = build_grid(10.0, 8);
    ContinuationOptions opts;
    opts.ds_max = 0.01;
    opts.max_steps = 400;
    opts.p_min = 0.0;
    opts.p_max = 0.35;
    opts.store_profile_every = 1;
    const double p0 = 0.1;
    const Profile start = middle_sheet(sys, g, p0);
    const Branch fwd = continue_branch(sys, start, g, 1, BranchFamily::UniformVegetated, opts);
    REQUIRE(fwd.fold_count() == 1);
    const std::size_t k = std::min(fwd.folds().front().index + 10, fwd.points.size() - 1);
    const BranchPoint& end = fwd.points[k];
    REQUIRE(end.profile);
    const int dir = end.param > fwd.points[k - 1].param ? -1 : 1;
    opts.store_profile_every = 0;
    opts.max_steps = 200;
    opts.p_min = p0 - 0.02;
    const Branch back = continue_branch(sys, *end.profile, g, dir, BranchFamily::UniformVegetated, opts);
    REQUIRE(back.fold_count() == 1);

    // Bracket p0 on the returning sheet and correct onto it.
    const auto& bp = back.points;
    std::size_t j = 0;
    for (std::size_t i = back.folds().front().index + 1; i < bp.size(); ++i) {
        if (bp[i].param <= p0) {
            j = i;
            break;
        }
    }
    REQUIRE(j > 0);
    REQUIRE(bp[j].profile.has_value() == (j + 1 == bp.size()));
    const double n_interp = bp[j - 1].l2norm + (bp[j].l2norm - bp[j - 1].l2norm) * (p0 - bp[j - 1].param) /
                                                   (bp[j].param - bp[j - 1].param);
    CHECK(std::abs(n_interp - start.l2norm()) <= 1e-4 * std::abs(start.l2norm()));
    Eigen::VectorXd guess = start.state();
    guess.head(g.T).setConstant(n_interp / std::sqrt(g.T));
    const Profile again = newton_solve(sys, guess, p0, g);
    REQUIRE(again.converged);
    CHECK((again.state() - start.state()).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("amplitude below tolerance terminates at the uniform branch") {
    const SystemDef sys = SystemDef::full(ModelParams{});
    const RadialGrid g = build_grid(50.0, 60);
    ContinuationOptions opts;
    opts.check_amplitude = true;
    opts.amplitude_tol = 1e-6;
    const Branch br = continue_branch(sys, uniform_profile(sys, g, 0.2), g, -1, BranchFamily::SpotA, opts);
    CHECK(br.terminated_reason == Termination::AmplitudeBelowTol);
    REQUIRE(br.points.size() == 2);
    CHECK(br.points.back().amplitude < 1e-6);
    CHECK(br.points.back().param < 0.2);
    REQUIRE(br.points.back().profile);
    CHECK(br.points.front().profile);
}

TEST_CASE("bad starts are rejected") {
    const SystemDef sys = SystemDef::full(ModelParams{});
    const RadialGrid g = build_grid(50.0, 60);
    Profile p = uniform_profile(sys, g, 0.2);
    CHECK_THROWS_AS(continue_branch(sys, p, g, 0, BranchFamily::SpotA), InvalidParams);
    CHECK_THROWS_AS(continue_branch(sys, p, build_grid(50.0, 61), 1, BranchFamily::SpotA), DimensionMismatch);
    p.converged = false;
    CHECK_THROWS_AS(continue_branch(sys, p, g, 1, BranchFamily::SpotA), InvalidParams);
}

TEST_CASE("max steps and step failure are recorded") {
    const SystemDef sys = SystemDef::full(ModelParams{});
    const RadialGrid g = build_grid(50.0, 60);
    ContinuationOptions opts;
    opts.max_steps = 5;
    const Branch br = continue_branch(sys, uniform_profile(sys, g, 0.2), g, 1, BranchFamily::UniformVegetated, opts);
    CHECK(br.terminated_reason == Termination::MaxSteps);
    CHECK(br.points.size() == 6);
    CHECK(br.points.back().profile);

    ContinuationOptions hard = opts;
    hard.newton.max_iter = 0;
    hard.newton.tol = 1e-30;
    hard.ds_init = 1e-3;
    hard.ds_min = 1e-4;
    const Branch sf = continue_branch(sys, uniform_profile(sys, g, 0.2), g, 1, BranchFamily::UniformVegetated, hard);
    CHECK(sf.terminated_reason == Termination::StepFailure);
    CHECK(sf.points.size() == 1);
    CHECK_FALSE(sf.message.empty());
}

TEST_CASE("onset extrapolation on synthetic branches") {
    // p = 0.2 - 0.5 A^2 + 0.3 A^4 near A = 0, fold where dp/dA = 0.
    std::vector<std::pair<double, double>> pa;
    for (int i = 0; i <= 60; ++i) {
        const double A = 0.02 * i;
        pa.emplace_back(0.2 - 0.5 * A * A + 0.3 * std::pow(A, 4), A);
    }
    const Branch br = synthetic(pa);
    ApproachOptions ao;
    ao.approach_fraction = 0.3;
    CHECK(detect_onset(br, ao) == doctest::Approx(0.2).epsilon(1e-10));

    Branch reversed = br;
    std::reverse(reversed.points.begin(), reversed.points.end());
    for (std::size_t i = 0; i < reversed.points.size(); ++i)
        reversed.points[i].ds = i == 0 ? 0.0 : br.points[br.points.size() - i].ds;
    CHECK(detect_onset(reversed, ao) == doctest::Approx(0.2).epsilon(1e-10));

    REQUIRE(br.fold_count() == 1);
    const double A2 = 0.5 / 0.6;
    const double p_fold = 0.2 - 0.5 * A2 + 0.3 * A2 * A2;
    // Three-point parabola on a 0.02 amplitude spacing.
    CHECK(std::abs(br.folds().front().param - p_fold) <= 1e-5);
    CHECK(std::abs(branch_extent_in_p(br, ao) - (0.2 - p_fold)) <= 1e-3 * std::abs(0.2 - p_fold));
    CHECK(branch_extent_in_p(br, 0.25) == doctest::Approx(0.25 - br.folds().front().param));

    ApproachOptions lin = ao;
    lin.amplitude_exponent = 1.0;
    std::vector<std::pair<double, double>> gap;
    for (int i = 0; i <= 20; ++i) gap.emplace_back(0.15625 + 0.01 * i, 0.02 * i);
    CHECK(detect_onset(synthetic(gap), lin) == doctest::Approx(0.15625).epsilon(1e-12));
}

TEST_CASE("missing landmarks and no approach") {
    std::vector<std::pair<double, double>> mono;
    for (int i = 0; i <= 20; ++i) mono.emplace_back(0.2 - 0.001 * i, 0.01 * i);
    CHECK(synthetic(mono).fold_count() == 0);
    CHECK_THROWS_AS(branch_extent_in_p(synthetic(mono)), MissingLandmarks);
    CHECK_THROWS_AS(branch_extent_in_p(synthetic(mono), 0.2), MissingLandmarks);

    std::vector<std::pair<double, double>> flat;
    for (int i = 0; i <= 20; ++i) flat.emplace_back(0.2 + 0.001 * i, 0.0);
    CHECK_THROWS_AS(detect_onset(synthetic(flat)), NoApproach);
    CHECK_THROWS_AS(detect_onset(synthetic({{0.2, 0.1}, {0.21, 0.1}})), NoApproach);

    // Amplitude that never gets small at either end.
    std::vector<std::pair<double, double>> big;
    for (int i = 0; i <= 20; ++i) big.emplace_back(0.2 + 0.001 * i, 1.0 + 0.01 * i);
    CHECK_THROWS_AS(detect_onset(synthetic(big)), NoApproach);

    // A fold but no approach is still missing a landmark.
    std::vector<std::pair<double, double>> loop;
    for (int i = 0; i <= 40; ++i) {
        const double t = 0.05 * i;
        loop.emplace_back(0.2 - (t - 1) * (t - 1), 1.0 + 0.02 * t);
    }
    CHECK(synthetic(loop).fold_count() == 1);
    CHECK_THROWS_AS(branch_extent_in_p(synthetic(loop)), MissingLandmarks);
}

TEST_CASE("joining two traces") {
    Branch back = synthetic({{0.2, 0.0}, {0.19, 0.1}, {0.18, 0.2}});
    Branch fwd = synthetic({{0.2, 0.0}, {0.21, 0.1}});
    back.terminated_reason = Termination::HitParameterBound;
    fwd.terminated_reason = Termination::MaxSteps;
    fwd.family = BranchFamily::GapSub;
    const Branch j = join_branches(back, fwd);
    REQUIRE(j.points.size() == 4);
    CHECK(j.points[0].param == 0.18);
    CHECK(j.points[2].param == 0.2);
    CHECK(j.points[3].param == 0.21);
    CHECK(j.points[0].ds == 0.0);
    CHECK(j.points[1].ds == back.points[2].ds);
    CHECK(j.points[2].ds == back.points[1].ds);
    CHECK(j.points[3].ds == fwd.points[1].ds);
    CHECK(j.family == BranchFamily::GapSub);
    CHECK(j.terminated_reason == Termination::MaxSteps);
    CHECK(j.fold_count() == 0);

    const Branch v = join_branches(synthetic({{0.2, 0.0}, {0.21, 0.1}}), synthetic({{0.2, 0.0}, {0.21, 0.1}}));
    REQUIRE(v.points.size() == 3);
    CHECK(v.points[1].fold_here);
    CHECK(v.fold_count() == 1);
}

TEST_CASE("far-field reseeding") {
    const SystemDef sys = SystemDef::full(ModelParams{});
    const RadialGrid g = build_grid(50.0, 60);
    const Profile veg = uniform_profile(sys, g, 0.2);
    const Profile bare = reseed_far_field(sys, veg, g, 0.15, Background::Bare);
    REQUIRE(bare.converged);
    CHECK(bare.n.cwiseAbs().maxCoeff() < 1e-10);
    CHECK((bare.w.array() - 0.15).abs().maxCoeff() < 1e-10);
    const Profile back = reseed_far_field(sys, bare, g, 0.2, Background::Vegetated);
    REQUIRE(back.converged);
    CHECK((back.state() - veg.state()).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK_THROWS_AS(reseed_far_field(sys, veg, build_grid(50.0, 61), 0.2, Background::Bare), DimensionMismatch);
}

TEST_CASE("spot A at rho 1.5: one fold, onset near p1, stability gained at the fold") {
    const ModelParams m;
    const SystemDef sys = SystemDef::full(m);
    const RadialGrid g = build_grid(300.0, 1000);
    ContinuationOptions opts;
    opts.ds_max = 2e-3;
    opts.p_min = 0.0;
    opts.p_max = 0.5;
    opts.check_amplitude = true;
    opts.check_tail = true;
    opts.compute_stability = true;
    opts.stability.method = EigenMethod::IterativeRightmost;
    const Branch br = trace_localised_branch(sys, spot_a_start(m, g), g, BranchFamily::SpotA, opts);
    check_branch_invariants(br, opts);
    REQUIRE(br.fold_count() == 1);

    const TuringOnset on = turing_onset_full(m);
    const double onset = detect_onset(br);
    CHECK(std::abs(onset - on.p1) <= 1e-3);
    CHECK(std::abs(onset - on.p1) < 1e-3);

    const Fold f = br.folds().front();
    CHECK(f.param < on.p1);
    const double extent = branch_extent_in_p(br);
    CHECK(extent > 0.0);

    // Small-amplitude side unstable, large side stable, switching within
    // one step of the fold.
    const auto& pts = br.points;
    const bool front_small = pts.front().amplitude <= pts.back().amplitude;
    auto side = [&](std::size_t i) { return front_small ? (i < f.index ? -1 : 1) : (i > f.index ? -1 : 1); };
    std::size_t first_stable = pts.size(), last_unstable = 0;
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) order[i] = front_small ? i : pts.size() - 1 - i;
    bool switched = false;
    std::size_t switch_at = 0;
    for (std::size_t t = 1; t < order.size(); ++t) {
        if (pts[order[t - 1]].stability == Stability::Unstable && pts[order[t]].stability == Stability::Stable) {
            switched = true;
            switch_at = order[t];
            break;
        }
    }
    REQUIRE(switched);
    CHECK(std::abs(static_cast<long>(switch_at) - static_cast<long>(f.index)) <= 1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (std::abs(static_cast<long>(i) - static_cast<long>(f.index)) <= 1) continue;
        if (side(i) < 0 && pts[i].amplitude > 1e-3) CHECK(pts[i].stability == Stability::Unstable);
        if (side(i) > 0 && pts[i].stability == Stability::Stable) first_stable = std::min(first_stable, i);
        if (side(i) < 0 && pts[i].stability == Stability::Unstable) last_unstable = std::max(last_unstable, i);
    }
    CHECK(first_stable < pts.size());
    CHECK(last_unstable > 0);
}
