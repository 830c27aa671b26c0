#pragma once

#include <vector>

#include "vegspots/discretize.hpp"
#include "vegspots/model.hpp"

namespace vegspots {

enum class GLKind { QuadraticPlanarRadial, CubicHalfPower };

/// Localised ground state of an amplitude equation on the half-line.
///   QuadraticPlanarRadial: q'' + q'/s = q - q^2,                 q'(0) = 0
///   CubicHalfPower:        (d/ds + 1/(2s))^2 q = c0 q + c3 q^3,  q ~ q0 sqrt(s)
struct GLGroundState {
    GLKind kind = GLKind::QuadraticPlanarRadial;
    double c0 = 1.0;
    double c3 = 0.0;
    std::vector<double> s_grid;
    std::vector<double> q;
    std::vector<double> regular;  ///< q for the quadratic case, q/sqrt(s) for the cubic one
    double q_at_0 = 0.0;       ///< q(0), or the q0 coefficient for the cubic case
    double q_at_0_shooting = 0.0;
    double decay_rate = 0.0;   ///< fitted rate of q sqrt(s) ~ exp(-rate s)
    double max_residual = 0.0; ///< discrete ODE residual over interior nodes
    double s_max = 0.0;

    /// q at arbitrary s >= 0: four-point Lagrange interpolation of `regular`
    /// inside the sampled range and the linearised tail beyond it.
    [[nodiscard]] double eval(double s) const;
};

struct GLOptions {
    double rk_tol = 1e-12;
    double s0 = 1e-4;          ///< series start for the shooting integration
    double bisect_rel_tol = 1e-14;
    double s_max_factor = 40.0;  ///< truncation s_max = factor / sqrt(c0)
    double ds = 0.005;         ///< BVP spacing in units of 1/sqrt(c0)
};

/// Throws ShootingFailed if no undershoot/overshoot bracket is found.
GLGroundState solve_gl_quadratic(const GLOptions& opts = {});

/// Throws NoGroundState when c3 >= 0 and InvalidParams when c0 <= 0.
GLGroundState solve_gl_cubic(double c0, double c3, const GLOptions& opts = {});

enum class SpotFamily { SpotA, SpotB, RingPlus, RingMinus };
enum class GapBranch { SubBare, SuperVegetated };
enum class ProfileFamily { SpotA, SpotB, RingPlus, RingMinus, GapSub, GapSuper };

const char* to_string(ProfileFamily f);

/// Leading-order localised profile. N, W are the reduced variables at the
/// reduced radii; n_of_r, w_of_r the model variables on the given grid. For
/// a reduced-scale evaluation the two pairs coincide.
struct LeadingOrderProfile {
    ProfileFamily family = ProfileFamily::SpotA;
    double eps = 0.0;
    double P = 0.0;            ///< reduced parameter value
    double p = 0.0;            ///< model precipitation (0 for reduced-scale output)
    bool reduced_scale = false;
    std::vector<double> r;
    std::vector<double> N;
    std::vector<double> W;
    std::vector<double> n_of_r;
    std::vector<double> w_of_r;
    bool physical = true;      ///< n_of_r >= 0 everywhere
};

/// Evaluates the core expansions for spots and rings about the vegetated state
/// at P = P0 - eps^2 in reduced variables on a grid of reduced radii.
/// Throws NoTuringPoint without Turing data and FamilyUnavailable for SpotB
/// and the rings when omega <= 30/23.
LeadingOrderProfile leading_order_spot(const ReducedParams& rp, double eps, SpotFamily family,
                                       const RadialGrid& reduced_grid);

/// Same, mapped to model variables on a grid of model radii using
/// r_reduced = r/sqrt(delta), n = N/delta, w = p + beta W/delta and
/// p = p_c + P/(b0 delta).
LeadingOrderProfile leading_order_spot(const ModelParams& params, double eps, SpotFamily family,
                                       const RadialGrid& grid);

/// Depressed spike A(r) (1, a) with A(r) = -eps^2 q(sqrt(c0) eps r)/c2 on the
/// bare state at P = -eps^2 or the vegetated state at P = +eps^2.
LeadingOrderProfile leading_order_gap(const ReducedParams& rp, double eps, GapBranch branch,
                                      const RadialGrid& reduced_grid);
LeadingOrderProfile leading_order_gap(const ModelParams& params, double eps, GapBranch branch,
                                      const RadialGrid& grid);

}  // namespace vegspots
