#include "vegspots/solver.hpp"

#include <cmath>
#include <string>

#include <Eigen/SparseLU>

#include "vegspots/errors.hpp"

namespace vegspots {

SystemDef SystemDef::full(const ModelParams& params) {
    params.validate();
    SystemDef s;
    s.kind_ = SystemKind::FullVonHardenberg;
    s.model_ = params;
    s.diffusion_ = {1.0, 0.0, -params.delta * params.beta, params.delta};
    return s;
}

SystemDef SystemDef::reduced(const ReducedParams& rp) {
    SystemDef s;
    s.kind_ = SystemKind::ReducedNW;
    s.reduced_ = rp;
    s.diffusion_ = {1.0, 0.0, 0.0, 1.0};
    return s;
}

std::string SystemDef::name() const {
    return kind_ == SystemKind::FullVonHardenberg ? "FullVonHardenberg" : "ReducedNW";
}

std::array<double, 2> SystemDef::reaction(double n, double w, double param) const {
    if (kind_ == SystemKind::FullVonHardenberg) {
        const ModelParams& m = model_;
        const double growth = m.gamma * w / (1.0 + m.sigma * w) - n - m.nu_mort;
        return {growth * n, -(w - param) + (m.rho - w) * w * n};
    }
    // Lap N = -P N - (b W - N) N,  Lap W = W - a N - P N - (b W - N) N
    const double a = reduced_.a, b = reduced_.b;
    const double shared = param * n + (b * w - n) * n;
    return {shared, -w + a * n + shared};
}

ReactionJacobian SystemDef::reaction_jacobian(double n, double w, double param) const {
    if (kind_ == SystemKind::FullVonHardenberg) {
        ModelParams m = model_;
        m.p = param;
        return vegspots::reaction_jacobian(m, n, w);
    }
    const double a = reduced_.a, b = reduced_.b;
    const double dn = param + b * w - 2.0 * n;
    const double dw = b * n;
    ReactionJacobian j;
    j.nn = dn;
    j.nw = dw;
    j.wn = a + dn;
    j.ww = -1.0 + dw;
    return j;
}

std::array<double, 2> SystemDef::reaction_param_derivative(double n, double /*w*/,
                                                           double /*param*/) const {
    if (kind_ == SystemKind::FullVonHardenberg) return {0.0, 1.0};
    return {n, n};
}

std::array<double, 2> SystemDef::vegetated_state(double param) const {
    if (kind_ == SystemKind::FullVonHardenberg) {
        const auto veg = primary_vegetated_state(model_.with_p(param));
        if (!veg) throw NoOnsetFound("no vegetated state at p = " + std::to_string(param));
        return {veg->n_star, veg->w_star};
    }
    const double denom = 1.0 - reduced_.a * reduced_.b;
    return {param / denom, reduced_.a * param / denom};
}

std::array<double, 2> SystemDef::bare_state(double param) const {
    if (kind_ == SystemKind::FullVonHardenberg) return {0.0, param};
    return {0.0, 0.0};
}

double SystemDef::homogeneous_point() const {
    if (kind_ == SystemKind::FullVonHardenberg) return critical_precipitation(model_);
    return 0.0;
}

Eigen::VectorXd stack_state(const Eigen::VectorXd& n, const Eigen::VectorXd& w) {
    if (n.size() != w.size()) throw DimensionMismatch("n and w sample counts differ");
    Eigen::VectorXd U(2 * n.size());
    U << n, w;
    return U;
}

Eigen::VectorXd Profile::state() const { return stack_state(n, w); }

Profile Profile::from_state(const Eigen::VectorXd& U, double param) {
    if (U.size() % 2 != 0) throw DimensionMismatch("state vector has odd length");
    const Eigen::Index T = U.size() / 2;
    Profile p;
    p.param = param;
    p.n = U.head(T);
    p.w = U.tail(T);
    return p;
}

namespace {

int check_dims(const Eigen::VectorXd& U, const RadialGrid& grid) {
    if (U.size() != 2 * static_cast<Eigen::Index>(grid.T)) {
        throw DimensionMismatch("state of length " + std::to_string(U.size()) + " on grid with T = " +
                                std::to_string(grid.T));
    }
    return grid.T;
}

}  // namespace

Eigen::VectorXd residual(const SystemDef& sys, const Eigen::VectorXd& U, double param,
                         const RadialGrid& grid) {
    const int T = check_dims(U, grid);
    const RadialLaplacian lap(grid);
    const auto d = sys.diffusion_block();
    const Eigen::VectorXd lap_n = lap.apply(Eigen::VectorXd(U.head(T)));
    const Eigen::VectorXd lap_w = lap.apply(Eigen::VectorXd(U.tail(T)));

    Eigen::VectorXd F(2 * T);
    for (int i = 0; i < T; ++i) {
        const auto r = sys.reaction(U[i], U[T + i], param);
        F[i] = d[0] * lap_n[i] + d[1] * lap_w[i] + r[0];
        F[T + i] = d[2] * lap_n[i] + d[3] * lap_w[i] + r[1];
    }
    return F;
}

Eigen::SparseMatrix<double> jacobian(const SystemDef& sys, const Eigen::VectorXd& U, double param,
                                     const RadialGrid& grid) {
    const int T = check_dims(U, grid);
    const RadialLaplacian lap(grid);
    const auto d = sys.diffusion_block();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(T) * 10);
    const auto add_lap_block = [&](int row_off, int col_off, double coef) {
        if (coef == 0.0) return;
        for (int i = 0; i < T; ++i) {
            if (i > 0) trip.emplace_back(row_off + i, col_off + i - 1, coef * lap.lower(i));
            trip.emplace_back(row_off + i, col_off + i, coef * lap.diag(i));
            if (i < T - 1) trip.emplace_back(row_off + i, col_off + i + 1, coef * lap.upper(i));
        }
    };
    add_lap_block(0, 0, d[0]);
    add_lap_block(0, T, d[1]);
    add_lap_block(T, 0, d[2]);
    add_lap_block(T, T, d[3]);

    for (int i = 0; i < T; ++i) {
        const ReactionJacobian j = sys.reaction_jacobian(U[i], U[T + i], param);
        trip.emplace_back(i, i, j.nn);
        trip.emplace_back(i, T + i, j.nw);
        trip.emplace_back(T + i, i, j.wn);
        trip.emplace_back(T + i, T + i, j.ww);
    }
    Eigen::SparseMatrix<double> J(2 * T, 2 * T);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
}

Eigen::VectorXd param_derivative(const SystemDef& sys, const Eigen::VectorXd& U, double param,
                                 const RadialGrid& grid) {
    const int T = check_dims(U, grid);
    Eigen::VectorXd Fp(2 * T);
    for (int i = 0; i < T; ++i) {
        const auto dp = sys.reaction_param_derivative(U[i], U[T + i], param);
        Fp[i] = dp[0];
        Fp[T + i] = dp[1];
    }
    return Fp;
}

Profile newton_solve(const SystemDef& sys, const Eigen::VectorXd& U0, double param,
                     const RadialGrid& grid, const NewtonOptions& opts) {
    check_dims(U0, grid);
    if (!U0.allFinite()) throw DimensionMismatch("initial state contains non-finite values");

    Eigen::VectorXd U = U0;
    Eigen::VectorXd F = residual(sys, U, param, grid);
    double fnorm = F.lpNorm<Eigen::Infinity>();
    std::vector<double> history{fnorm};
    int it = 0;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool pattern_ready = false;
    while (fnorm >= opts.tol && it < opts.max_iter) {
        const Eigen::SparseMatrix<double> J = jacobian(sys, U, param, grid);
        if (!pattern_ready) {
            lu.analyzePattern(J);
            pattern_ready = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success) {
            throw LinearSolveFailure("singular Jacobian at Newton iteration " + std::to_string(it));
        }
        const Eigen::VectorXd step = lu.solve(-F);
        if (!step.allFinite()) throw LinearSolveFailure("non-finite Newton step");

        // Armijo backtracking on ||F||_2^2 / 2, whose directional derivative along
        // the Newton step is -||F||_2^2.
        const double merit = 0.5 * F.squaredNorm();
        double lambda = 1.0;
        Eigen::VectorXd trial;
        Eigen::VectorXd Ftrial;
        bool accepted = false;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
            trial = U + lambda * step;
            Ftrial = residual(sys, trial, param, grid);
            const double trial_merit = 0.5 * Ftrial.squaredNorm();
            if (std::isfinite(trial_merit) && trial_merit <= (1.0 - 2.0 * opts.armijo * lambda) * merit) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        // A stalled line search still takes the smallest step; the iteration
        // budget decides convergence.
        U = trial;
        F = Ftrial;
        fnorm = F.lpNorm<Eigen::Infinity>();
        history.push_back(fnorm);
        ++it;
        if (!accepted && !std::isfinite(fnorm)) break;
    }

    Profile out = Profile::from_state(U, param);
    out.residual_norm = fnorm;
    out.converged = std::isfinite(fnorm) && fnorm < opts.tol;
    out.iterations = it;
    out.residual_history = std::move(history);
    return out;
}

double tail_flatness(const Profile& profile, const RadialGrid& grid, double fraction) {
    const int T = grid.T;
    const double r_cut = grid.r_star * (1.0 - fraction);
    const double edge = profile.n[T - 1];
    double dev = 0.0;
    for (int i = T - 1; i >= 0 && grid.r[i] >= r_cut; --i) dev = std::max(dev, std::abs(profile.n[i] - edge));
    return dev;
}

}  // namespace vegspots
