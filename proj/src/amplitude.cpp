#include "vegspots/amplitude.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <boost/numeric/odeint.hpp>

#include "vegspots/errors.hpp"
#include "vegspots/specfun.hpp"

namespace vegspots {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;

// Both equations are written for a regular unknown v with
//   v'' + ((d - 1)/s) v' = g(s, v),
// d = 2 and v = q for the quadratic equation, d = 3 and v = q/sqrt(s) for the
// cubic one, where the substitution removes the half-power singularity.
struct GLProblem {
    GLKind kind;
    double c0;
    double c3;

    [[nodiscard]] double dim() const { return kind == GLKind::QuadraticPlanarRadial ? 2.0 : 3.0; }
    [[nodiscard]] double kappa() const { return std::sqrt(c0); }

    [[nodiscard]] double g(double s, double v) const {
        if (kind == GLKind::QuadraticPlanarRadial) return v - v * v;
        return c0 * v + c3 * s * v * v * v;
    }
    [[nodiscard]] double dg(double s, double v) const {
        if (kind == GLKind::QuadraticPlanarRadial) return 1.0 - 2.0 * v;
        return c0 + 3.0 * c3 * s * v * v;
    }

    // Two-term expansion about s = 0 with v(0) = A.
    [[nodiscard]] State series_start(double A, double s) const {
        if (kind == GLKind::QuadraticPlanarRadial) {
            const double g0 = A - A * A;
            return {A + g0 * s * s / 4.0, g0 * s / 2.0};
        }
        return {A + c0 * A * s * s / 6.0 + c3 * A * A * A * s * s * s / 12.0,
                c0 * A * s / 3.0 + c3 * A * A * A * s * s / 4.0};
    }

    [[nodiscard]] double q_of(double s, double v) const {
        return kind == GLKind::QuadraticPlanarRadial ? v : std::sqrt(s) * v;
    }
    [[nodiscard]] double dq_of(double s, double v, double dv) const {
        if (kind == GLKind::QuadraticPlanarRadial) return dv;
        return v / (2.0 * std::sqrt(s)) + std::sqrt(s) * dv;
    }

    // Logarithmic derivative of the linear decaying solution in v.
    [[nodiscard]] double tail_log_slope(double s) const {
        if (kind == GLKind::QuadraticPlanarRadial) {
            return -bessel_k_scaled(1, s) / bessel_k_scaled(0, s);
        }
        return -kappa() - 1.0 / s;
    }
    // Linear decaying solution in q, up to a constant.
    [[nodiscard]] double q_tail(double s) const {
        if (kind == GLKind::QuadraticPlanarRadial) return bessel_k_scaled(0, s) * std::exp(-s);
        return std::exp(-kappa() * s) / std::sqrt(s);
    }
};

enum class Outcome { Undershoot, Overshoot, Undecided };

struct ShotSample {
    double s, v, dv;
};

struct Shot {
    Outcome outcome = Outcome::Undecided;
    double s_end = 0.0;
    std::vector<ShotSample> path;
};

Shot shoot(const GLProblem& prob, double A, const GLOptions& opts, double s_cap, bool keep_path) {
    const double dim1 = prob.dim() - 1.0;
    auto rhs = [&](const State& y, State& dy, double s) {
        dy[0] = y[1];
        dy[1] = prob.g(s, y[0]) - dim1 * y[1] / s;
    };
    State y = prob.series_start(A, opts.s0);
    auto stepper = odeint::make_dense_output(opts.rk_tol, opts.rk_tol, odeint::runge_kutta_dopri5<State>());
    stepper.initialize(y, opts.s0, 1e-3 / prob.kappa());

    Shot shot;
    bool seen_decrease = false;
    if (keep_path) shot.path.push_back({opts.s0, y[0], y[1]});
    while (stepper.current_time() < s_cap) {
        stepper.do_step(rhs);
        const double s = stepper.current_time();
        const State& st = stepper.current_state();
        if (keep_path) shot.path.push_back({s, st[0], st[1]});
        const double q = prob.q_of(s, st[0]);
        const double dq = prob.dq_of(s, st[0], st[1]);
        if (!std::isfinite(q)) {
            shot.outcome = Outcome::Overshoot;
            shot.s_end = s;
            return shot;
        }
        if (q < 0.0) {
            shot.outcome = Outcome::Overshoot;
            shot.s_end = s;
            return shot;
        }
        if (dq < 0.0) seen_decrease = true;
        if (seen_decrease && dq > 0.0) {
            shot.outcome = Outcome::Undershoot;
            shot.s_end = s;
            return shot;
        }
    }
    shot.s_end = stepper.current_time();
    return shot;
}

void fail_shooting(const std::string& why) { throw ShootingFailed(why); }

// Finite-difference solution of the regular-variable BVP with a Robin
// condition at s_max; returns v on the uniform grid and the max interior
// residual.
struct BVPResult {
    std::vector<double> s;
    std::vector<double> v;
    double max_residual = 0.0;
};

BVPResult solve_bvp(const GLProblem& prob, const std::vector<double>& s, std::vector<double> v) {
    const int M = static_cast<int>(s.size());
    const double h = s[1] - s[0];
    const double dim1 = prob.dim() - 1.0;
    const double theta = -prob.tail_log_slope(s[M - 1]);
    const double h2 = h * h;

    auto assemble = [&](const std::vector<double>& x, Eigen::VectorXd& F, Eigen::SparseMatrix<double>* J) {
        std::vector<Eigen::Triplet<double>> trip;
        if (J) trip.reserve(static_cast<std::size_t>(M) * 3);
        F.resize(M);
        // Row 0: d v''(0) with the symmetric ghost node.
        const double d = prob.dim();
        F[0] = d * 2.0 * (x[1] - x[0]) / h2 - prob.g(0.0, x[0]);
        if (J) {
            trip.emplace_back(0, 0, -2.0 * d / h2 - prob.dg(0.0, x[0]));
            trip.emplace_back(0, 1, 2.0 * d / h2);
        }
        for (int i = 1; i < M - 1; ++i) {
            const double lo = 1.0 / h2 - dim1 / (2.0 * h * s[i]);
            const double up = 1.0 / h2 + dim1 / (2.0 * h * s[i]);
            F[i] = lo * x[i - 1] - 2.0 / h2 * x[i] + up * x[i + 1] - prob.g(s[i], x[i]);
            if (J) {
                trip.emplace_back(i, i - 1, lo);
                trip.emplace_back(i, i, -2.0 / h2 - prob.dg(s[i], x[i]));
                trip.emplace_back(i, i + 1, up);
            }
        }
        // Last row: ghost v_{M} = v_{M-2} - 2 h theta v_{M-1}.
        {
            const int i = M - 1;
            const double lo = 1.0 / h2 - dim1 / (2.0 * h * s[i]);
            const double up = 1.0 / h2 + dim1 / (2.0 * h * s[i]);
            const double c_prev = lo + up;
            const double c_self = -2.0 / h2 - up * 2.0 * h * theta;
            F[i] = c_prev * x[i - 1] + c_self * x[i] - prob.g(s[i], x[i]);
            if (J) {
                trip.emplace_back(i, i - 1, c_prev);
                trip.emplace_back(i, i, c_self - prob.dg(s[i], x[i]));
            }
        }
        if (J) {
            J->resize(M, M);
            J->setFromTriplets(trip.begin(), trip.end());
        }
    };

    Eigen::VectorXd F;
    Eigen::SparseMatrix<double> J;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    double fnorm = 0.0;
    for (int it = 0; it < 40; ++it) {
        assemble(v, F, &J);
        fnorm = F.lpNorm<Eigen::Infinity>();
        if (fnorm < 1e-11) break;
        if (it == 0) lu.analyzePattern(J);
        lu.factorize(J);
        if (lu.info() != Eigen::Success) fail_shooting("singular Jacobian in the ground-state BVP");
        const Eigen::VectorXd dx = lu.solve(-F);
        for (int i = 0; i < M; ++i) v[i] += dx[i];
    }
    assemble(v, F, nullptr);
    BVPResult out;
    out.s = s;
    out.v = std::move(v);
    out.max_residual = F.segment(1, M - 2).lpNorm<Eigen::Infinity>();
    return out;
}

// Dense-output style interpolation of the stored path (linear in s between
// accepted RK steps is too coarse, so use the cubic Hermite form).
double hermite(const std::vector<ShotSample>& path, double s) {
    std::size_t lo = 0, hi = path.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (path[mid].s <= s) lo = mid;
        else hi = mid;
    }
    const ShotSample& a = path[lo];
    const ShotSample& b = path[hi];
    const double hstep = b.s - a.s;
    const double t = (s - a.s) / hstep;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    return h00 * a.v + h10 * hstep * a.dv + h01 * b.v + h11 * hstep * b.dv;
}

GLGroundState solve_ground_state(const GLProblem& prob, double lo, double hi, const GLOptions& opts) {
    const double kappa = prob.kappa();
    const double s_cap = 4.0 * opts.s_max_factor / kappa;

    Shot lo_shot = shoot(prob, lo, opts, s_cap, false);
    Shot hi_shot = shoot(prob, hi, opts, s_cap, false);
    if (lo_shot.outcome != Outcome::Undershoot || hi_shot.outcome != Outcome::Overshoot) {
        fail_shooting("bracket endpoints do not straddle the ground state");
    }
    for (int it = 0; it < 200 && (hi - lo) > opts.bisect_rel_tol * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const Shot m = shoot(prob, mid, opts, s_cap, false);
        if (m.outcome == Outcome::Overshoot) hi = mid;
        else lo = mid;
    }
    const double A = 0.5 * (lo + hi);
    lo_shot = shoot(prob, lo, opts, s_cap, true);

    // Initial BVP guess: the undershooting trajectory up to the point where
    // |q| is smallest, continued with the linear tail.
    const double s_max = opts.s_max_factor / kappa;
    std::size_t i_min = 0;
    double q_min = INFINITY;
    for (std::size_t i = 0; i < lo_shot.path.size(); ++i) {
        const double q = std::fabs(prob.q_of(lo_shot.path[i].s, lo_shot.path[i].v));
        if (q < q_min) {
            q_min = q;
            i_min = i;
        }
    }
    const double s_join = lo_shot.path[i_min].s;
    const double q_join = prob.q_of(s_join, lo_shot.path[i_min].v);
    auto solve_on = [&](double h) {
        const int M = static_cast<int>(std::lround(s_max / h)) + 1;
        std::vector<double> s(M), v(M);
        for (int i = 0; i < M; ++i) {
            s[i] = i * h;
            const double si = s[i];
            if (si < opts.s0) {
                v[i] = prob.series_start(A, si)[0];
            } else if (si <= s_join) {
                v[i] = hermite(lo_shot.path, si);
            } else {
                const double q = q_join * prob.q_tail(si) / prob.q_tail(s_join);
                v[i] = prob.kind == GLKind::QuadraticPlanarRadial ? q : q / std::sqrt(si);
            }
        }
        s[M - 1] = s_max;
        return solve_bvp(prob, s, std::move(v));
    };

    // Richardson extrapolation of the second-order scheme over h and h/2.
    const double h = s_max / std::lround(s_max / (opts.ds / kappa));
    const BVPResult coarse = solve_on(h);
    const BVPResult fine = solve_on(0.5 * h);
    const int M = static_cast<int>(coarse.s.size());
    BVPResult bvp = coarse;
    for (int i = 0; i < M; ++i) bvp.v[i] = (4.0 * fine.v[2 * i] - coarse.v[i]) / 3.0;
    bvp.max_residual = std::max(coarse.max_residual, fine.max_residual);
    const std::vector<double>& s = bvp.s;

    GLGroundState gs;
    gs.kind = prob.kind;
    gs.c0 = prob.c0;
    gs.c3 = prob.c3;
    gs.s_max = s_max;
    gs.s_grid = bvp.s;
    gs.q.resize(M);
    for (int i = 0; i < M; ++i) gs.q[i] = prob.q_of(bvp.s[i], bvp.v[i]);
    gs.regular = bvp.v;
    gs.max_residual = bvp.max_residual;
    gs.q_at_0_shooting = A;

    if (prob.kind == GLKind::QuadraticPlanarRadial) {
        gs.q_at_0 = A;
    } else {
        // Least-squares fit of q/sqrt(s) = q0 + alpha s^2 + beta s^3 near the core.
        const int nfit = 60;
        const double s_hi = 0.1 / kappa;
        Eigen::MatrixXd X(nfit, 3);
        Eigen::VectorXd y(nfit);
        for (int i = 0; i < nfit; ++i) {
            const double si = opts.s0 + (s_hi - opts.s0) * i / (nfit - 1);
            const double vi = hermite(lo_shot.path, si);
            X(i, 0) = 1.0;
            X(i, 1) = si * si;
            X(i, 2) = si * si * si;
            y[i] = vi;
        }
        const Eigen::Vector3d coef = X.colPivHouseholderQr().solve(y);
        gs.q_at_0 = coef[0];
    }

    // Log-linear fit of q sqrt(s) on the middle of the tail.
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (int i = 0; i < M; ++i) {
            const double si = s[i];
            if (si < 0.25 * s_max || si > 0.5 * s_max || gs.q[i] <= 0.0) continue;
            const double yi = std::log(gs.q[i] * std::sqrt(si));
            sx += si;
            sy += yi;
            sxx += si * si;
            sxy += si * yi;
            ++cnt;
        }
        if (cnt < 2) fail_shooting("tail too short for a decay fit");
        const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        gs.decay_rate = -slope;
    }
    return gs;
}

}  // namespace

double GLGroundState::eval(double s) const {
    if (s_grid.empty()) return 0.0;
    if (s < 0.0) s = -s;
    const int M = static_cast<int>(s_grid.size());
    const GLProblem prob{kind, c0, c3};
    if (s >= s_grid.back()) return q.back() * prob.q_tail(s) / prob.q_tail(s_grid.back());
    const double h = s_grid[1] - s_grid[0];
    int i = static_cast<int>(s / h);
    i = std::clamp(i - 1, 0, M - 4);
    // four-point Lagrange interpolation of the regular variable
    double val = 0.0;
    for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (b != a) w *= (s - s_grid[i + b]) / (s_grid[i + a] - s_grid[i + b]);
        }
        val += w * regular[i + a];
    }
    return prob.q_of(s, val);
}

GLGroundState solve_gl_quadratic(const GLOptions& opts) {
    const GLProblem prob{GLKind::QuadraticPlanarRadial, 1.0, -1.0};
    const double s_cap = 4.0 * opts.s_max_factor;
    double lo = 1.05;
    if (shoot(prob, lo, opts, s_cap, false).outcome != Outcome::Undershoot) {
        fail_shooting("q(0) just above 1 does not undershoot");
    }
    double hi = lo;
    for (int i = 0; i < 80; ++i) {
        const double trial = hi * 1.15;
        const Outcome o = shoot(prob, trial, opts, s_cap, false).outcome;
        if (o == Outcome::Overshoot) {
            hi = trial;
            break;
        }
        lo = hi = trial;
    }
    if (hi == lo) fail_shooting("no overshooting q(0) found");
    return solve_ground_state(prob, lo, hi, opts);
}

GLGroundState solve_gl_cubic(double c0, double c3, const GLOptions& opts) {
    if (!(c0 > 0.0) || !std::isfinite(c0)) throw InvalidParams("c0 must be positive");
    if (!(c3 < 0.0)) throw NoGroundState("localised ground states require c3 < 0, got " + std::to_string(c3));
    const GLProblem prob{GLKind::CubicHalfPower, c0, c3};
    const double s_cap = 4.0 * opts.s_max_factor / std::sqrt(c0);
    // Natural amplitude scale from the covariance of the equation.
    const double scale = std::sqrt(c0 / -c3) * std::pow(c0, 0.25);
    double prev = scale * 1e-2;
    Outcome prev_o = shoot(prob, prev, opts, s_cap, false).outcome;
    for (int i = 0; i < 120; ++i) {
        const double trial = prev * 1.2;
        const Outcome o = shoot(prob, trial, opts, s_cap, false).outcome;
        if (prev_o == Outcome::Undershoot && o == Outcome::Overshoot) {
            return solve_ground_state(prob, prev, trial, opts);
        }
        prev = trial;
        prev_o = o;
    }
    fail_shooting("no undershoot/overshoot bracket for the cubic equation");
    return {};
}

const char* to_string(ProfileFamily f) {
    switch (f) {
        case ProfileFamily::SpotA: return "SpotA";
        case ProfileFamily::SpotB: return "SpotB";
        case ProfileFamily::RingPlus: return "RingPlus";
        case ProfileFamily::RingMinus: return "RingMinus";
        case ProfileFamily::GapSub: return "GapSub";
        case ProfileFamily::GapSuper: return "GapSuper";
    }
    return "?";
}

namespace {

ProfileFamily as_profile_family(SpotFamily f) {
    switch (f) {
        case SpotFamily::SpotA: return ProfileFamily::SpotA;
        case SpotFamily::SpotB: return ProfileFamily::SpotB;
        case SpotFamily::RingPlus: return ProfileFamily::RingPlus;
        case SpotFamily::RingMinus: return ProfileFamily::RingMinus;
    }
    return ProfileFamily::SpotA;
}

void check_eps(double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidParams("eps must be nonnegative and finite");
}

void finish_reduced(LeadingOrderProfile& prof) {
    prof.reduced_scale = true;
    prof.n_of_r = prof.N;
    prof.w_of_r = prof.W;
    prof.physical = true;
    for (double v : prof.n_of_r) prof.physical = prof.physical && v >= 0.0;
}

// Sample the reduced profile at r/sqrt(delta) and map to model variables.
LeadingOrderProfile to_model(const ModelParams& params, const ReducedParams& rp, LeadingOrderProfile red,
                             const RadialGrid& grid) {
    LeadingOrderProfile out = std::move(red);
    const double delta = params.delta;
    out.reduced_scale = false;
    out.p = rp.p_c + out.P / (rp.b0 * delta);
    out.r = grid.r;
    out.n_of_r.resize(out.N.size());
    out.w_of_r.resize(out.W.size());
    out.physical = true;
    for (std::size_t i = 0; i < out.N.size(); ++i) {
        out.n_of_r[i] = out.N[i] / delta;
        out.w_of_r[i] = out.p + params.beta * out.W[i] / delta;
        out.physical = out.physical && out.n_of_r[i] >= 0.0;
    }
    return out;
}

RadialGrid scaled_grid(const RadialGrid& grid, double factor) {
    RadialGrid g = grid;
    g.r_star *= factor;
    g.h *= factor;
    for (double& x : g.r) x *= factor;
    return g;
}

}  // namespace

LeadingOrderProfile leading_order_spot(const ReducedParams& rp, double eps, SpotFamily family,
                                       const RadialGrid& reduced_grid) {
    check_eps(eps);
    if (!rp.turing) throw NoTuringPoint("reduced parameters have K >= 0");
    const TuringData& td = *rp.turing;
    const double k = td.k;
    const double omega = td.omega;
    const double k2 = k * k, k4 = k2 * k2;
    const double ab = rp.a * rp.b;
    const double N0 = k4 / (1.0 - ab);

    double q0 = 0.0;
    if (family != SpotFamily::SpotA) {
        if (!(omega > kOmegaStar)) {
            throw FamilyUnavailable("spot B and rings need omega > 30/23, omega = " + std::to_string(omega));
        }
        if (eps > 0.0) {
            const NormalFormCoeffs nf = normal_form_turing(rp);
            q0 = solve_gl_cubic(nf.c0, nf.c3).q_at_0;
        }
    }

    LeadingOrderProfile prof;
    prof.family = as_profile_family(family);
    prof.eps = eps;
    prof.P = td.P0 - eps * eps;
    prof.r = reduced_grid.r;
    const std::size_t T = prof.r.size();
    prof.N.resize(T);
    prof.W.resize(T);
    const double sq3w = std::sqrt(3.0) / omega;
    for (std::size_t i = 0; i < T; ++i) {
        const double r = prof.r[i];
        const double j0 = bessel_j0(k * r);
        double core_n = 0.0, core_w = 0.0, far = 0.0;
        switch (family) {
            case SpotFamily::SpotA:
                core_n = sq3w * eps / k2 * j0;
                core_w = core_n;
                far = -sq3w * eps / k4 * j0;
                break;
            case SpotFamily::SpotB: {
                const double m = std::sqrt(q0 * std::sqrt(3.0) / omega) * std::pow(eps, 0.75);
                core_n = -m / std::pow(k, 1.5) * j0;
                core_w = core_n;
                far = m / std::pow(k, 3.5) * j0;
                break;
            }
            case SpotFamily::RingPlus:
            case SpotFamily::RingMinus: {
                const double sgn = family == SpotFamily::RingPlus ? 1.0 : -1.0;
                const double amp = q0 * std::pow(eps, 1.5);
                const double j1 = bessel_j1(k * r);
                core_n = sgn * amp / k2 * r * j1;
                core_w = core_n;
                far = -sgn * amp / std::pow(k, 5.0) * (k * r * j1 - 2.0 * j0);
                break;
            }
        }
        prof.N[i] = N0 * (1.0 + core_n);
        prof.W[i] = N0 / rp.b * (1.0 + core_w) - k4 / rp.b * (1.0 + far);
    }
    finish_reduced(prof);
    return prof;
}

LeadingOrderProfile leading_order_spot(const ModelParams& params, double eps, SpotFamily family,
                                       const RadialGrid& grid) {
    const ReducedParams rp = reduced_params(params);
    const RadialGrid red = scaled_grid(grid, 1.0 / std::sqrt(params.delta));
    return to_model(params, rp, leading_order_spot(rp, eps, family, red), grid);
}

LeadingOrderProfile leading_order_gap(const ReducedParams& rp, double eps, GapBranch branch,
                                      const RadialGrid& reduced_grid) {
    check_eps(eps);
    const NormalFormCoeffs nf = normal_form_homogeneous(rp);
    if (!(nf.c2 > 0.0)) throw OutOfValidity("depressed spikes need c2 = 1 - ab > 0");

    LeadingOrderProfile prof;
    prof.family = branch == GapBranch::SubBare ? ProfileFamily::GapSub : ProfileFamily::GapSuper;
    prof.eps = eps;
    prof.P = branch == GapBranch::SubBare ? -eps * eps : eps * eps;
    const double denom = 1.0 - rp.a * rp.b;
    const double N_base = branch == GapBranch::SubBare ? 0.0 : prof.P / denom;
    const double W_base = rp.a * N_base;

    prof.r = reduced_grid.r;
    const std::size_t T = prof.r.size();
    prof.N.assign(T, N_base);
    prof.W.assign(T, W_base);
    if (eps > 0.0) {
        const GLGroundState gs = solve_gl_quadratic();
        const double sc = std::sqrt(nf.c0) * eps;
        for (std::size_t i = 0; i < T; ++i) {
            const double A = -eps * eps * gs.eval(sc * prof.r[i]) / nf.c2;
            prof.N[i] += A;
            prof.W[i] += rp.a * A;
        }
    }
    finish_reduced(prof);
    return prof;
}

LeadingOrderProfile leading_order_gap(const ModelParams& params, double eps, GapBranch branch,
                                      const RadialGrid& grid) {
    const ReducedParams rp = reduced_params(params);
    const RadialGrid red = scaled_grid(grid, 1.0 / std::sqrt(params.delta));
    return to_model(params, rp, leading_order_gap(rp, eps, branch, red), grid);
}

}  // namespace vegspots
