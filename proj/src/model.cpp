#include "vegspots/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "vegspots/errors.hpp"

namespace vegspots {

namespace {

std::complex<double> csqrt(std::complex<double> z) { return std::sqrt(z); }

double uniform_residual(const ModelParams& prm, double n, double w) {
    const double growth = prm.gamma * w / (1.0 + prm.sigma * w) - n - prm.nu_mort;
    const double r1 = growth * n;
    const double r2 = -(w - prm.p) + (prm.rho - w) * w * n;
    return std::max(std::abs(r1), std::abs(r2));
}

}  // namespace

void ModelParams::validate() const {
    const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(gamma) || !positive(sigma) || !positive(nu_mort) || !positive(beta) ||
        !positive(delta) || !positive(rho) || !positive(p)) {
        throw InvalidParams("all model parameters must be finite and strictly positive");
    }
    if (gamma <= nu_mort * sigma) {
        throw InvalidParams("gamma must exceed nu_mort*sigma so that p_c > 0");
    }
}

double ModelParams::reduction_rho_bound() const {
    const double pc = critical_precipitation(*this);
    const double s = 1.0 + sigma * pc;
    return s * s / (gamma * pc) + pc;
}

bool ModelParams::within_reduction_bound() const { return rho < reduction_rho_bound(); }

double critical_precipitation(const ModelParams& params) {
    const double denom = params.gamma - params.nu_mort * params.sigma;
    if (!(denom > 0.0)) {
        throw InvalidParams("gamma <= nu_mort*sigma, critical precipitation undefined");
    }
    return params.nu_mort / denom;
}

std::vector<double> vegetated_water_roots(const ModelParams& prm) {
    const double g = prm.gamma, s = prm.sigma, nu = prm.nu_mort, rho = prm.rho, p = prm.p;
    // -(g - s nu) w^3 + (rho (g - s nu) + nu - s) w^2 + (p s - 1 - rho nu) w + p = 0
    const double c3 = -(g - s * nu);
    const double c2 = rho * (g - s * nu) + nu - s;
    const double c1 = p * s - 1.0 - rho * nu;
    const double c0 = p;
    const auto cubic = [&](double w) { return ((c3 * w + c2) * w + c1) * w + c0; };
    const auto dcubic = [&](double w) { return (3.0 * c3 * w + 2.0 * c2) * w + c1; };

    // Companion matrix of the monic cubic w^3 + e2 w^2 + e1 w + e0.
    Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    companion(0, 2) = -c0 / c3;
    companion(1, 2) = -c1 / c3;
    companion(2, 2) = -c2 / c3;
    const Eigen::Vector3cd eig = companion.eigenvalues();

    std::vector<double> roots;
    for (const auto& z : eig) {
        if (std::abs(z.imag()) > 1e-7 * std::max(1.0, std::abs(z))) continue;
        double w = z.real();
        for (int it = 0; it < 8; ++it) {
            const double d = dcubic(w);
            if (d == 0.0) break;
            const double step = cubic(w) / d;
            w -= step;
            if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(w))) break;
        }
        if (w > 0.0) roots.push_back(w);
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double x, double y) { return std::abs(x - y) < 1e-12; }),
                roots.end());
    return roots;
}

std::vector<UniformState> uniform_states(const ModelParams& params) {
    params.validate();
    std::vector<UniformState> out;
    UniformState bare;
    bare.kind = UniformKind::Bare;
    bare.n_star = 0.0;
    bare.w_star = params.p;
    bare.physical = true;
    bare.residual = 0.0;
    out.push_back(bare);

    for (double w : vegetated_water_roots(params)) {
        double n = params.gamma * w / (1.0 + params.sigma * w) - params.nu_mort;
        if (n < -1e-13) continue;
        if (n < 0.0) n = 0.0;
        UniformState veg;
        veg.kind = UniformKind::Vegetated;
        veg.n_star = n;
        veg.w_star = w;
        veg.physical = n <= 1.0 / params.rho && w >= 0.0;
        veg.residual = uniform_residual(params, n, w);
        out.push_back(veg);
    }
    return out;
}

std::optional<UniformState> primary_vegetated_state(const ModelParams& params) {
    const auto roots = vegetated_water_roots(params);
    if (roots.empty()) return std::nullopt;
    const double w = roots.front();
    UniformState veg;
    veg.kind = UniformKind::Vegetated;
    veg.w_star = w;
    veg.n_star = params.gamma * w / (1.0 + params.sigma * w) - params.nu_mort;
    veg.physical = veg.n_star >= 0.0 && veg.n_star <= 1.0 / params.rho;
    veg.residual = uniform_residual(params, veg.n_star, w);
    return veg;
}

ReducedParams ReducedParams::from_ab(double a, double b) {
    ReducedParams rp;
    rp.a = a;
    rp.b = b;
    const double one_minus_ab = 1.0 - a * b;
    if (!(one_minus_ab > 0.0)) throw OutOfValidity("a*b >= 1");
    rp.K = (1.0 - b) / one_minus_ab;
    if (rp.K < 0.0) {
        const double root = std::sqrt(1.0 - rp.K);
        TuringData t;
        t.P0 = (2.0 - rp.K + 2.0 * root) / (rp.K * rp.K);
        t.k = std::sqrt((1.0 + root) / (-rp.K));
        const double k2 = t.k * t.k;
        t.omega = (k2 + 1.0) / k2;
        rp.turing = t;
    }
    return rp;
}

ReducedParams reduced_params(const ModelParams& params) {
    params.validate();
    const double pc = critical_precipitation(params);
    if (!params.within_reduction_bound()) {
        throw OutOfValidity("rho = " + std::to_string(params.rho) + " exceeds the reduction bound " +
                            std::to_string(params.reduction_rho_bound()));
    }
    const double a0 = (params.rho - pc) * pc;
    const double s = 1.0 + params.sigma * pc;
    const double b0 = params.gamma / (s * s);
    ReducedParams rp = ReducedParams::from_ab(a0 / params.beta, b0 * params.beta);
    rp.p_c = pc;
    rp.a0 = a0;
    rp.b0 = b0;
    return rp;
}

Quartet spatial_eigenvalues_bare(double P) {
    const std::complex<double> r = csqrt(std::complex<double>(-P, 0.0));
    return {std::complex<double>(1.0, 0.0), std::complex<double>(-1.0, 0.0), r, -r};
}

Quartet spatial_eigenvalues_vegetated(const ReducedParams& rp, double P) {
    // lambda^2 = mu solves mu^2 - (1 + K P) mu + P = 0.
    const double bq = 1.0 + rp.K * P;
    const std::complex<double> disc = csqrt(std::complex<double>(bq * bq - 4.0 * P, 0.0));
    // Stable split of the two quadratic roots: the larger-magnitude one first.
    const std::complex<double> big = 0.5 * (bq + (bq >= 0.0 ? disc : -disc));
    std::complex<double> small;
    if (std::abs(big) > 0.0) {
        small = std::complex<double>(P, 0.0) / big;
    } else {
        small = 0.0;
    }
    // Order so that mu_- is the one with smaller real part (case P = 0 gives {0, 1}).
    std::complex<double> mu_minus = small, mu_plus = big;
    if (mu_minus.real() > mu_plus.real()) std::swap(mu_minus, mu_plus);
    const std::complex<double> l1 = csqrt(mu_minus);
    const std::complex<double> l2 = csqrt(mu_plus);
    return {l1, -l1, l2, -l2};
}

NormalFormCoeffs normal_form_homogeneous(const ReducedParams& rp) {
    NormalFormCoeffs nf;
    nf.kind = NormalFormCase::Homogeneous;
    nf.c0 = (1.0 + rp.a) / (1.0 + rp.a * rp.a);
    nf.c2 = 1.0 - rp.a * rp.b;
    return nf;
}

double turing_cubic_coefficient(double omega) { return -omega * (23.0 * omega - 30.0) / 36.0; }

NormalFormCoeffs normal_form_turing(const ReducedParams& rp) {
    if (!rp.turing) throw NoTuringPoint("K = " + std::to_string(rp.K) + " >= 0");
    const double omega = rp.turing->omega;
    NormalFormCoeffs nf;
    nf.kind = NormalFormCase::Turing;
    nf.c0 = omega / 4.0;
    nf.c3 = turing_cubic_coefficient(omega);
    nf.nu_core = omega * std::sqrt(std::numbers::pi / 6.0);
    return nf;
}

ReactionJacobian reaction_jacobian(const ModelParams& prm, double n, double w) {
    const double s = 1.0 + prm.sigma * w;
    ReactionJacobian j;
    j.nn = prm.gamma * w / s - 2.0 * n - prm.nu_mort;
    j.nw = prm.gamma * n / (s * s);
    j.wn = (prm.rho - w) * w;
    j.ww = (prm.rho - 2.0 * w) * n - 1.0;
    return j;
}

double dispersion_growth_rate(const ModelParams& prm, double n, double w, double q) {
    const ReactionJacobian j = reaction_jacobian(prm, n, w);
    const double Q = q * q;
    const double m11 = j.nn - Q;
    const double m12 = j.nw;
    const double m21 = j.wn + prm.delta * prm.beta * Q;
    const double m22 = j.ww - prm.delta * Q;
    const double tr = m11 + m22;
    const double det = m11 * m22 - m12 * m21;
    const double disc = 0.25 * tr * tr - det;
    return disc >= 0.0 ? 0.5 * tr + std::sqrt(disc) : 0.5 * tr;
}

namespace {

// det(J - Q D) = delta Q^2 - B Q + det J, minimised over Q at Q* = B / (2 delta).
struct MarginalCurve {
    double min_det = 0.0;
    double q_star_sq = 0.0;
    double trace_at_star = 0.0;
};

MarginalCurve marginal_curve(const ModelParams& prm, double n, double w) {
    const ReactionJacobian j = reaction_jacobian(prm, n, w);
    const double d = prm.delta;
    const double B = j.ww + d * j.nn + d * prm.beta * j.nw;
    const double detJ = j.nn * j.ww - j.nw * j.wn;
    MarginalCurve mc;
    mc.q_star_sq = B / (2.0 * d);
    mc.min_det = detJ - B * B / (4.0 * d);
    mc.trace_at_star = j.nn + j.ww - mc.q_star_sq * (1.0 + d);
    return mc;
}

}  // namespace

TuringOnset turing_onset_full(const ModelParams& params, const OnsetOptions& opts) {
    params.validate();
    const double pc = critical_precipitation(params);

    // Turing function: negative once a band of q > 0 has det(J - q^2 D) < 0.
    // NaN when the vegetated state does not exist at p.
    const auto turing_fn = [&](double p) -> double {
        const ModelParams at = params.with_p(p);
        const auto veg = primary_vegetated_state(at);
        if (!veg || veg->n_star <= 0.0) return std::nan("");
        const MarginalCurve mc = marginal_curve(at, veg->n_star, veg->w_star);
        if (mc.q_star_sq <= 0.0) return std::abs(mc.min_det) + 1.0;
        return mc.min_det;
    };

    // Log-spaced scan in p - p_c, since p1 - p_c shrinks like 1/delta.
    const int m = std::max(opts.scan_points, 16);
    const double lo = 1e-7 * std::max(pc, 1e-3);
    const double hi = opts.p_upper_offset;
    double prev_p = std::nan(""), prev_f = std::nan("");
    std::optional<std::pair<double, double>> bracket;
    bool any_state = false;
    for (int i = 0; i < m; ++i) {
        const double t = static_cast<double>(i) / (m - 1);
        const double p = pc + lo * std::pow(hi / lo, t);
        const double f = turing_fn(p);
        if (std::isnan(f)) {
            prev_p = prev_f = std::nan("");
            continue;
        }
        any_state = true;
        if (!std::isnan(prev_f) && prev_f > 0.0 && f <= 0.0) {
            bracket = std::make_pair(prev_p, p);
            break;
        }
        prev_p = p;
        prev_f = f;
    }
    if (!any_state) throw NoOnsetFound("no vegetated state on the scanned bracket");
    if (!bracket) throw NoOnsetFound("no marginal wavenumber on the scanned bracket");

    // The Turing function switches branch (q* crossing zero) only away from
    // the root, so a bracketing solver on the smooth min_det piece is safe.
    boost::uintmax_t max_iter = 200;
    const auto tol = [&](double x, double y) { return std::abs(x - y) <= opts.p_tol; };
    const auto root = boost::math::tools::toms748_solve(turing_fn, bracket->first, bracket->second,
                                                       tol, max_iter);
    const double p1 = 0.5 * (root.first + root.second);

    const ModelParams at = params.with_p(p1);
    const auto veg = primary_vegetated_state(at);
    const MarginalCurve mc = marginal_curve(at, veg->n_star, veg->w_star);

    TuringOnset out;
    out.p1 = p1;
    out.k1 = std::sqrt(std::max(mc.q_star_sq, 0.0));
    out.within_reduction_bound = params.within_reduction_bound();
    if (out.within_reduction_bound) {
        const ReducedParams rp = reduced_params(params);
        if (rp.turing) out.p1_reduced_estimate = pc + rp.turing->P0 / (rp.b0 * params.delta);
    }
    return out;
}

}  // namespace vegspots
