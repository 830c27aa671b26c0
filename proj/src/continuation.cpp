#include "vegspots/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "vegspots/errors.hpp"
#include "vegspots/specfun.hpp"

namespace vegspots {

const char* to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "Stable";
        case Stability::Unstable: return "Unstable";
        case Stability::Unknown: return "Unknown";
    }
    return "?";
}

const char* to_string(BranchFamily f) {
    switch (f) {
        case BranchFamily::SpotA: return "SpotA";
        case BranchFamily::GapSub: return "GapSub";
        case BranchFamily::GapSuper: return "GapSuper";
        case BranchFamily::UniformVegetated: return "UniformVegetated";
        case BranchFamily::UniformBare: return "UniformBare";
    }
    return "?";
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::HitParameterBound: return "HitParameterBound";
        case Termination::AmplitudeBelowTol: return "AmplitudeBelowTol";
        case Termination::OscillationsReachBoundary: return "OscillationsReachBoundary";
        case Termination::StepFailure: return "StepFailure";
        case Termination::MaxSteps: return "MaxSteps";
        case Termination::FarFieldCrossing: return "FarFieldCrossing";
    }
    return "?";
}

Stability stability_from(Verdict v) {
    switch (v) {
        case Verdict::Stable: return Stability::Stable;
        case Verdict::Unstable: return Stability::Unstable;
        default: return Stability::Unknown;
    }
}

std::vector<Fold> Branch::folds() const {
    std::vector<Fold> out;
    const std::size_t n = points.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d0 = points[i].param - points[i - 1].param;
        const double d1 = points[i + 1].param - points[i].param;
        if (d0 * d1 >= 0.0) continue;
        // Parabola p(s) through three points in cumulative arclength.
        const double s0 = 0.0;
        const double s1 = points[i].ds;
        const double s2 = s1 + points[i + 1].ds;
        const double p0 = points[i - 1].param, p1 = points[i].param, p2 = points[i + 1].param;
        const double a = ((p2 - p1) / (s2 - s1) - (p1 - p0) / (s1 - s0)) / (s2 - s0);
        const double b = (p1 - p0) / (s1 - s0) - a * (s1 + s0);
        double pf = p1;
        if (!(s1 > s0 && s2 > s1)) {
            out.push_back({i, pf});
            continue;
        }
        if (a != 0.0) {
            const double sv = -b / (2.0 * a);
            if (sv > s0 && sv < s2) pf = p0 + a * (sv * sv - s0 * s0) + b * (sv - s0);
        }
        out.push_back({i, pf});
    }
    return out;
}

namespace {

double amplitude_of(const Eigen::VectorXd& U, int T) {
    const double edge = U[T - 1];
    double m = 0.0;
    for (int i = 0; i < T; ++i) m = std::max(m, std::abs(U[i] - edge));
    return m;
}

double tail_deviation(const Eigen::VectorXd& U, const RadialGrid& grid, double fraction) {
    const int T = grid.T;
    const double cut = grid.r_star * (1.0 - fraction);
    const double edge = U[T - 1];
    double m = 0.0;
    for (int i = T - 1; i >= 0 && grid.r[i] >= cut; --i) m = std::max(m, std::abs(U[i] - edge));
    return m;
}

struct Corrected {
    bool ok = false;
    Eigen::VectorXd U;
    double p = 0.0;
    double fnorm = INFINITY;
    int iterations = 0;
};

// Newton on the bordered system  F(U, p) = 0,
//   w tU.(U - Upred) + tp (p - ppred) = 0,   w = 1/(2T).
Corrected correct(const SystemDef& sys, const RadialGrid& grid, const Eigen::VectorXd& Upred, double ppred,
                  const Eigen::VectorXd& tU, double tp, const NewtonOptions& nopt) {
    const int n = static_cast<int>(Upred.size());
    const double w = 1.0 / n;
    Corrected c;
    c.U = Upred;
    c.p = ppred;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool analysed = false;
    for (int it = 0; it <= nopt.max_iter; ++it) {
        const Eigen::VectorXd F = residual(sys, c.U, c.p, grid);
        const double g = w * tU.dot(c.U - Upred) + tp * (c.p - ppred);
        c.fnorm = F.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(c.fnorm)) return c;
        if (c.fnorm < nopt.tol && std::abs(g) < nopt.tol) {
            c.ok = true;
            c.iterations = it;
            return c;
        }
        if (it == nopt.max_iter) break;

        const Eigen::SparseMatrix<double> J = jacobian(sys, c.U, c.p, grid);
        const Eigen::VectorXd Fp = param_derivative(sys, c.U, c.p, grid);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(J.nonZeros()) + 2 * n + 1);
        for (int k = 0; k < J.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator itj(J, k); itj; ++itj) {
                trip.emplace_back(static_cast<int>(itj.row()), static_cast<int>(itj.col()), itj.value());
            }
        }
        for (int i = 0; i < n; ++i) {
            if (Fp[i] != 0.0) trip.emplace_back(i, n, Fp[i]);
            if (tU[i] != 0.0) trip.emplace_back(n, i, w * tU[i]);
        }
        trip.emplace_back(n, n, tp);
        Eigen::SparseMatrix<double> B(n + 1, n + 1);
        B.setFromTriplets(trip.begin(), trip.end());
        if (!analysed) {
            lu.analyzePattern(B);
            analysed = true;
        }
        lu.factorize(B);
        if (lu.info() != Eigen::Success) return c;
        Eigen::VectorXd rhs(n + 1);
        rhs.head(n) = -F;
        rhs[n] = -g;
        const Eigen::VectorXd d = lu.solve(rhs);
        if (!d.allFinite()) return c;
        c.U += d.head(n);
        c.p += d[n];
    }
    return c;
}

}  // namespace

Branch continue_branch(const SystemDef& sys, const Profile& start, const RadialGrid& grid, int direction,
                       BranchFamily family, const ContinuationOptions& opts) {
    if (!start.converged) throw InvalidParams("continuation needs a converged start profile");
    if (start.size() != grid.T) throw DimensionMismatch("start profile does not match the grid");
    if (direction != 1 && direction != -1) throw InvalidParams("direction must be +1 or -1");

    const int T = grid.T;
    const int n = 2 * T;
    const double w = 1.0 / n;

    Branch br;
    br.family = family;

    auto make_point = [&](const Eigen::VectorXd& U, double p, double ds, double fnorm, int iters) {
        BranchPoint bp;
        bp.param = p;
        bp.l2norm = U.head(T).norm();
        bp.amplitude = amplitude_of(U, T);
        bp.min_n = U.head(T).minCoeff();
        bp.tail = tail_deviation(U, grid, opts.tail_fraction);
        bp.ds = ds;
        bp.residual_norm = fnorm;
        bp.newton_iterations = iters;
        bp.rightmost_real = NAN;
        if (opts.compute_stability) {
            Profile prof = Profile::from_state(U, p);
            prof.converged = true;
            prof.residual_norm = fnorm;
            const EigenReport rep = radial_stability(sys, prof, grid, opts.stability);
            bp.stability = stability_from(rep.classification);
            bp.rightmost_real = rep.max_real();
        }
        return bp;
    };
    auto attach_profile = [&](BranchPoint& bp, const Eigen::VectorXd& U) {
        Profile prof = Profile::from_state(U, bp.param);
        prof.converged = true;
        prof.residual_norm = bp.residual_norm;
        bp.profile = std::move(prof);
    };

    Eigen::VectorXd U = start.state();
    double p = start.param;
    br.points.push_back(make_point(U, p, 0.0, start.residual_norm, start.iterations));
    attach_profile(br.points.back(), U);

    // Initial tangent from J tU = -Fp with tp = direction.
    Eigen::VectorXd tU;
    double tp = direction;
    {
        const Eigen::SparseMatrix<double> J = jacobian(sys, U, p, grid);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
        if (lu.info() != Eigen::Success) {
            br.terminated_reason = Termination::StepFailure;
            br.message = "singular Jacobian at the start point";
            return br;
        }
        tU = lu.solve(-param_derivative(sys, U, p, grid)) * static_cast<double>(direction);
        const double nrm = std::sqrt(w * tU.squaredNorm() + tp * tp);
        tU /= nrm;
        tp /= nrm;
    }

    double ds = opts.ds_init;
    int easy = 0;
    bool have_prev = false;
    Eigen::VectorXd U_before;           // state of the point before that

    for (int step = 0; step < opts.max_steps; ++step) {
        Corrected c;
        for (;;) {
            const Eigen::VectorXd Upred = U + ds * tU;
            const double ppred = p + ds * tp;
            c = correct(sys, grid, Upred, ppred, tU, tp, opts.newton);
            if (c.ok) break;
            ds *= 0.5;
            easy = 0;
            if (ds < opts.ds_min) {
                br.terminated_reason = Termination::StepFailure;
                br.message = "corrector failed at ds_min near p = " + std::to_string(p);
                if (!br.points.back().profile) attach_profile(br.points.back(), U);
                return br;
            }
        }

        if (c.p < opts.p_min || c.p > opts.p_max) {
            br.terminated_reason = Termination::HitParameterBound;
            if (!br.points.back().profile) attach_profile(br.points.back(), U);
            return br;
        }

        if (opts.stop_at_far_field_crossing) {
            const double bare = sys.bare_state(c.p)[0];
            if (U[T - 1] - bare >= -opts.crossing_tol && c.U[T - 1] - bare < -opts.crossing_tol) {
                br.terminated_reason = Termination::FarFieldCrossing;
                br.message = "far field crossed the bare state near p = " + std::to_string(c.p);
                if (!br.points.back().profile) attach_profile(br.points.back(), U);
                return br;
            }
        }

        // Secant tangent for the next predictor.
        Eigen::VectorXd dU = c.U - U;
        double dp = c.p - p;
        const double nrm = std::sqrt(w * dU.squaredNorm() + dp * dp);
        tU = dU / nrm;
        tp = dp / nrm;

        U_before = U;
        have_prev = true;
        U = c.U;
        p = c.p;
        br.points.push_back(make_point(U, p, ds, c.fnorm, c.iterations));
        const std::size_t k = br.points.size() - 1;
        if (opts.store_profile_every > 0 && k % static_cast<std::size_t>(opts.store_profile_every) == 0) {
            attach_profile(br.points[k], U);
        }
        if (k >= 2) {
            const double d0 = br.points[k - 1].param - br.points[k - 2].param;
            const double d1 = br.points[k].param - br.points[k - 1].param;
            if (d0 * d1 < 0.0) {
                br.points[k - 1].fold_here = true;
                if (opts.store_fold_profiles && have_prev) attach_profile(br.points[k - 1], U_before);
            }
        }

        if (opts.check_amplitude && br.points[k].amplitude < opts.amplitude_tol) {
            br.terminated_reason = Termination::AmplitudeBelowTol;
            attach_profile(br.points[k], U);
            return br;
        }
        if (opts.check_tail && br.points[k].tail > opts.tail_tol &&
            std::abs(p - sys.homogeneous_point()) >= opts.tail_exempt_window) {
            br.terminated_reason = Termination::OscillationsReachBoundary;
            attach_profile(br.points[k], U);
            return br;
        }

        if (c.iterations <= 3) {
            if (++easy >= opts.grow_after) {
                ds = std::min(2.0 * ds, opts.ds_max);
                easy = 0;
            }
        } else {
            easy = 0;
        }
    }
    br.terminated_reason = Termination::MaxSteps;
    attach_profile(br.points.back(), U);
    return br;
}

Branch join_branches(const Branch& backward, const Branch& forward) {
    Branch out;
    out.family = forward.family;
    // Reverse the backward trace; arclength steps belong to the later point.
    const std::size_t nb = backward.points.size();
    for (std::size_t i = nb; i-- > 0;) {
        BranchPoint bp = backward.points[i];
        bp.ds = (i + 1 < nb) ? backward.points[i + 1].ds : 0.0;
        bp.fold_here = false;
        out.points.push_back(std::move(bp));
    }
    for (std::size_t i = 1; i < forward.points.size(); ++i) {
        BranchPoint bp = forward.points[i];
        bp.fold_here = false;
        out.points.push_back(std::move(bp));
    }
    if (out.points.empty() && !forward.points.empty()) out.points.push_back(forward.points.front());
    for (std::size_t i = 1; i + 1 < out.points.size(); ++i) {
        const double d0 = out.points[i].param - out.points[i - 1].param;
        const double d1 = out.points[i + 1].param - out.points[i].param;
        out.points[i].fold_here = d0 * d1 < 0.0;
    }
    out.terminated_reason = forward.terminated_reason;
    out.message = "backward: " + std::string(to_string(backward.terminated_reason)) +
                  "; forward: " + to_string(forward.terminated_reason);
    return out;
}

Profile reseed_far_field(const SystemDef& sys, const Profile& profile, const RadialGrid& grid, double param,
                         Background target, const NewtonOptions& newton) {
    if (profile.size() != grid.T) throw DimensionMismatch("profile does not match the grid");
    const std::array<double, 2> far =
        target == Background::Vegetated ? sys.vegetated_state(param) : sys.bare_state(param);
    const int T = grid.T;
    Eigen::VectorXd n = profile.n.array() + (far[0] - profile.n[T - 1]);
    Eigen::VectorXd w = profile.w.array() + (far[1] - profile.w[T - 1]);
    return newton_solve(sys, stack_state(n, w), param, grid, newton);
}

namespace {

void append_segment(Branch& chain, const Branch& seg, bool first) {
    for (std::size_t i = 0; i < seg.points.size(); ++i) {
        if (!first && i == 0) {
            BranchPoint bp = seg.points[0];
            bp.ds = 0.0;
            chain.points.push_back(std::move(bp));
        } else {
            chain.points.push_back(seg.points[i]);
        }
    }
    chain.terminated_reason = seg.terminated_reason;
    if (!chain.message.empty()) chain.message += " | ";
    chain.message += to_string(seg.terminated_reason);
    if (!seg.message.empty()) chain.message += " (" + seg.message + ")";
}

Branch trace_one_way(const SystemDef& sys, const Profile& start, const RadialGrid& grid, int direction,
                     BranchFamily family, const ContinuationOptions& opts, const ExchangeOptions& ex) {
    ContinuationOptions co = opts;
    co.stop_at_far_field_crossing = true;
    co.tail_exempt_window = std::max(co.tail_exempt_window, ex.offset);
    Branch chain;
    chain.family = family;
    Branch seg = continue_branch(sys, start, grid, direction, family, co);
    append_segment(chain, seg, true);
    const double ph = sys.homogeneous_point();
    for (int k = 0; k < ex.max_exchanges && seg.terminated_reason == Termination::FarFieldCrossing; ++k) {
        const BranchPoint& last = seg.points.back();
        if (!last.profile || seg.points.size() < 2) break;
        const double dp = last.param - seg.points[seg.points.size() - 2].param;
        const int dir = dp < 0.0 ? -1 : 1;
        const double p_new = ph + dir * ex.offset;
        const Background bg = p_new > ph ? Background::Vegetated : Background::Bare;
        Profile restart;
        try {
            restart = reseed_far_field(sys, *last.profile, grid, p_new, bg, opts.newton);
        } catch (const Error& e) {
            chain.message += " | exchange failed: " + std::string(e.what());
            break;
        }
        if (!restart.converged) {
            NewtonOptions slow = opts.newton;
            slow.max_iter = std::max(slow.max_iter, 50);
            slow.max_backtracks = std::max(slow.max_backtracks, 12);
            restart = reseed_far_field(sys, *last.profile, grid, p_new, bg, slow);
        }
        if (!restart.converged) {
            chain.message += " | exchange did not converge";
            break;
        }
        chain.message += " | exchanged to " + std::string(bg == Background::Bare ? "bare" : "vegetated") +
                         " background at p = " + std::to_string(p_new);
        seg = continue_branch(sys, restart, grid, dir, family, co);
        append_segment(chain, seg, false);
    }
    return chain;
}

}  // namespace

Branch trace_localised_branch(const SystemDef& sys, const Profile& start, const RadialGrid& grid,
                              BranchFamily family, const ContinuationOptions& opts, const ExchangeOptions& exchange) {
    const Branch backward = trace_one_way(sys, start, grid, -1, family, opts, exchange);
    const Branch forward = trace_one_way(sys, start, grid, 1, family, opts, exchange);
    Branch out = join_branches(backward, forward);
    out.message = "backward: " + backward.message + "; forward: " + forward.message;
    return out;
}

Profile spot_a_start(const ModelParams& params, const RadialGrid& grid, const SpotStartOptions& opts) {
    params.validate();
    if (!(opts.rho_step > 0.0)) throw InvalidParams("rho_step must be positive");
    const ModelParams ref = params.with_rho(opts.rho_ref);
    const TuringOnset on = turing_onset_full(ref);
    const double dp = opts.offset / params.delta;
    double p = on.p1 - dp;
    const SystemDef sys0 = SystemDef::full(ref);
    const std::array<double, 2> v = sys0.vegetated_state(p);
    const int T = grid.T;
    Eigen::VectorXd n(T), w(T);
    for (int i = 0; i < T; ++i) {
        const double kr = on.k1 * grid.r[i];
        const double bump = opts.gain * std::exp(-kr * kr / 16.0) * bessel_j0(kr);
        n[i] = v[0] * (1.0 + bump);
        w[i] = v[1] * (1.0 - 0.3 * bump);
    }
    Profile prof = newton_solve(sys0, stack_state(n, w), p, grid, opts.newton);
    if (!prof.converged) throw SeedFailure("explicit spot guess did not converge at rho = " + std::to_string(ref.rho));

    const int steps = static_cast<int>(std::ceil(std::abs(params.rho - opts.rho_ref) / opts.rho_step));
    for (int j = 1; j <= steps; ++j) {
        const double rho = opts.rho_ref + (params.rho - opts.rho_ref) * j / steps;
        const ModelParams mj = params.with_rho(rho);
        p = turing_onset_full(mj).p1 - dp;
        prof = newton_solve(SystemDef::full(mj), prof.state(), p, grid, opts.newton);
        if (!prof.converged) throw SeedFailure("homotopy step failed at rho = " + std::to_string(rho));
    }
    if (prof.n[0] - prof.n[T - 1] < 1e-3 * std::max(1.0, std::abs(prof.n[T - 1]))) {
        throw SeedFailure("guess collapsed to the uniform state");
    }
    return prof;
}

double detect_onset(const Branch& branch, const ApproachOptions& opts) {
    const auto& pts = branch.points;
    if (pts.size() < static_cast<std::size_t>(opts.min_points)) throw NoApproach("branch has too few points");
    double amax = 0.0;
    for (const auto& bp : pts) amax = std::max(amax, bp.amplitude);
    if (!(amax > 0.0)) throw NoApproach("branch has zero amplitude throughout");
    const double cut = opts.approach_fraction * amax;

    // Small-amplitude end: whichever end has the smaller amplitude.
    const bool from_front = pts.front().amplitude <= pts.back().amplitude;
    std::vector<std::pair<double, double>> xy;
    for (std::size_t t = 0; t < pts.size(); ++t) {
        const BranchPoint& bp = from_front ? pts[t] : pts[pts.size() - 1 - t];
        if (bp.amplitude >= cut || static_cast<int>(xy.size()) >= opts.max_points) break;
        if (bp.amplitude <= opts.uniform_fraction * amax) continue;
        xy.emplace_back(bp.param, std::pow(bp.amplitude, opts.amplitude_exponent));
    }
    if (xy.size() < static_cast<std::size_t>(opts.min_points)) {
        throw NoApproach("amplitude never falls below " + std::to_string(opts.approach_fraction) +
                         " of its maximum at a branch end");
    }
    // Least squares p = c0 + c1 x + ... with x = amplitude^e; c0 is the onset.
    const int order = std::clamp(opts.fit_order, 1, static_cast<int>(xy.size()) - 1);
    Eigen::MatrixXd X(xy.size(), order + 1);
    Eigen::VectorXd y(xy.size());
    double xmax = 0.0;
    for (const auto& pr : xy) xmax = std::max(xmax, pr.second);
    if (!(xmax > 0.0)) throw NoApproach("approach points have zero amplitude");
    for (std::size_t i = 0; i < xy.size(); ++i) {
        const double x = xy[i].second / xmax;
        double xp = 1.0;
        for (int j = 0; j <= order; ++j, xp *= x) X(static_cast<Eigen::Index>(i), j) = xp;
        y[static_cast<Eigen::Index>(i)] = xy[i].first;
    }
    const Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
    if (std::abs(c[1]) < 1e-14 * (std::abs(c[0]) + 1.0) && order == 1) {
        throw NoApproach("amplitude does not vary with the parameter");
    }
    return c[0];
}

double branch_extent_in_p(const Branch& branch, double p_bifurcation) {
    const std::vector<Fold> f = branch.folds();
    if (f.empty()) throw MissingLandmarks("branch has no fold");
    const auto& pts = branch.points;
    const bool from_front = pts.front().amplitude <= pts.back().amplitude;
    const Fold& first = from_front ? f.front() : f.back();
    return p_bifurcation - first.param;
}

double branch_extent_in_p(const Branch& branch, const ApproachOptions& opts) {
    if (branch.folds().empty()) throw MissingLandmarks("branch has no fold");
    double pb = 0.0;
    try {
        pb = detect_onset(branch, opts);
    } catch (const NoApproach& e) {
        throw MissingLandmarks(std::string("no bifurcation landmark: ") + e.what());
    }
    return branch_extent_in_p(branch, pb);
}

}  // namespace vegspots
