#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "vegspots/discretize.hpp"
#include "vegspots/model.hpp"

namespace vegspots {

enum class SystemKind { FullVonHardenberg, ReducedNW };

/// A two-component stationary radial system  0 = Lap(D U) + R(U; param),
/// with D a constant 2x2 block. The full model's active parameter is the
/// precipitation p; the reduced (N, W) system's is the scaled P.
class SystemDef {
public:
    static SystemDef full(const ModelParams& params);
    static SystemDef reduced(const ReducedParams& rp);

    [[nodiscard]] SystemKind kind() const { return kind_; }
    [[nodiscard]] std::string name() const;
    [[nodiscard]] const ModelParams& model() const { return model_; }
    [[nodiscard]] const ReducedParams& reduced_constants() const { return reduced_; }

    /// Row-major 2x2 diffusion block: {d_nn, d_nw, d_wn, d_ww}.
    [[nodiscard]] std::array<double, 4> diffusion_block() const { return diffusion_; }

    [[nodiscard]] std::array<double, 2> reaction(double n, double w, double param) const;
    [[nodiscard]] ReactionJacobian reaction_jacobian(double n, double w, double param) const;
    /// d R / d param at (n, w).
    [[nodiscard]] std::array<double, 2> reaction_param_derivative(double n, double w, double param) const;

    /// Uniform vegetated state of this system at param (n may be negative
    /// below the homogeneous point). Throws NoOnsetFound if none exists.
    [[nodiscard]] std::array<double, 2> vegetated_state(double param) const;
    /// Bare state of this system at param.
    [[nodiscard]] std::array<double, 2> bare_state(double param) const;
    /// Parameter value where the vegetated state meets the bare state.
    [[nodiscard]] double homogeneous_point() const;

private:
    SystemKind kind_ = SystemKind::FullVonHardenberg;
    ModelParams model_;
    ReducedParams reduced_;
    std::array<double, 4> diffusion_{1.0, 0.0, 0.0, 1.0};
};

/// Discretised stationary solution. n and w hold samples at the grid nodes.
struct Profile {
    double param = 0.0;
    Eigen::VectorXd n;
    Eigen::VectorXd w;
    bool converged = false;
    double residual_norm = 0.0;
    int iterations = 0;
    /// Max-norm residuals of every Newton iterate, starting with the initial guess.
    std::vector<double> residual_history;

    /// Plain discrete Euclidean norm of the n samples.
    [[nodiscard]] double l2norm() const { return n.norm(); }
    [[nodiscard]] int size() const { return static_cast<int>(n.size()); }
    /// Stacked state (n_1..n_T, w_1..w_T).
    [[nodiscard]] Eigen::VectorXd state() const;
    static Profile from_state(const Eigen::VectorXd& U, double param);
};

/// Stack n and w samples into the block state vector (n, w).
Eigen::VectorXd stack_state(const Eigen::VectorXd& n, const Eigen::VectorXd& w);

/// Residual F(U; param) of length 2T in block layout (n rows first).
Eigen::VectorXd residual(const SystemDef& sys, const Eigen::VectorXd& U, double param,
                         const RadialGrid& grid);

/// Analytic Jacobian dF/dU as a sparse 2T x 2T matrix in block layout.
Eigen::SparseMatrix<double> jacobian(const SystemDef& sys, const Eigen::VectorXd& U, double param,
                                     const RadialGrid& grid);

/// d F / d param, length 2T.
Eigen::VectorXd param_derivative(const SystemDef& sys, const Eigen::VectorXd& U, double param,
                                 const RadialGrid& grid);

struct NewtonOptions {
    double tol = 1e-10;       ///< on the max-norm of the residual
    int max_iter = 50;
    double armijo = 1e-4;
    int max_backtracks = 12;
};

/// Damped Newton with Armijo backtracking and sparse direct solves. Returns
/// the last iterate with converged = false when the budget runs out. Throws
/// LinearSolveFailure on a singular Jacobian.
Profile newton_solve(const SystemDef& sys, const Eigen::VectorXd& U0, double param,
                     const RadialGrid& grid, const NewtonOptions& opts = {});

/// max |n(r) - n(r_star)| over the outer `fraction` of the domain.
double tail_flatness(const Profile& profile, const RadialGrid& grid, double fraction = 0.1);

}  // namespace vegspots
