#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vegspots/discretize.hpp"
#include "vegspots/model.hpp"
#include "vegspots/solver.hpp"
#include "vegspots/stability.hpp"

namespace vegspots {

enum class Stability { Stable, Unstable, Unknown };
enum class BranchFamily { SpotA, GapSub, GapSuper, UniformVegetated, UniformBare };
enum class Termination {
    HitParameterBound,
    AmplitudeBelowTol,
    OscillationsReachBoundary,
    StepFailure,
    MaxSteps,
    FarFieldCrossing,  ///< the far field left the physical side of the homogeneous point
};

const char* to_string(Stability s);
const char* to_string(BranchFamily f);
const char* to_string(Termination t);

/// Marginal and Unknown verdicts both map to Unknown.
Stability stability_from(Verdict v);

struct BranchPoint {
    double param = 0.0;
    double l2norm = 0.0;
    double amplitude = 0.0;   ///< max |n(r) - n(r_star)|
    double min_n = 0.0;
    double tail = 0.0;        ///< max |n - n(r_star)| over the outer tail_fraction of the domain
    Stability stability = Stability::Unknown;
    bool fold_here = false;
    double ds = 0.0;          ///< arclength step that produced this point (0 at the start)
    double residual_norm = 0.0;
    int newton_iterations = 0;
    double rightmost_real = 0.0;  ///< NaN when stability was not computed
    std::optional<Profile> profile;
};

struct Fold {
    std::size_t index = 0;    ///< branch point next to the turning point
    double param = 0.0;       ///< parabolic interpolation through three points
};

struct Branch {
    BranchFamily family = BranchFamily::SpotA;
    std::vector<BranchPoint> points;
    Termination terminated_reason = Termination::MaxSteps;
    std::string message;

    [[nodiscard]] std::vector<Fold> folds() const;
    [[nodiscard]] std::size_t fold_count() const { return folds().size(); }
};

struct ContinuationOptions {
    double ds_init = 1e-3;
    double ds_min = 1e-6;
    double ds_max = 5e-2;
    int max_steps = 2000;
    double p_min = -INFINITY;
    double p_max = INFINITY;
    NewtonOptions newton{1e-10, 12, 1e-4, 6};
    int grow_after = 3;            ///< consecutive easy successes before doubling ds
    bool check_amplitude = false;
    double amplitude_tol = 1e-6;
    bool check_tail = false;
    double tail_fraction = 0.05;
    double tail_tol = 1e-6;
    /// The tail check is skipped while |param - homogeneous point| is below this.
    double tail_exempt_window = 0.0;
    bool compute_stability = false;
    StabilityOptions stability;
    int store_profile_every = 0;   ///< 0: only the first and the last point
    bool store_fold_profiles = true;
    /// Stop (without accepting the point) once n(r_star) falls below the bare
    /// value by more than crossing_tol.
    bool stop_at_far_field_crossing = false;
    double crossing_tol = 1e-8;
};

/// Pseudo-arclength continuation in the active parameter from a converged
/// start profile. direction = +1 or -1 sets the initial sign of d(param).
/// The arclength metric is ||dU||^2/(2T) + dparam^2.
Branch continue_branch(const SystemDef& sys, const Profile& start, const RadialGrid& grid, int direction,
                       BranchFamily family, const ContinuationOptions& opts = {});

/// Joins a backward and a forward trace from the same start into one branch
/// ordered by arclength (backward part reversed, start shared once).
Branch join_branches(const Branch& backward, const Branch& forward);

enum class Background { Vegetated, Bare };

/// Replaces the far field of a localised profile by the chosen uniform state
/// at param and re-solves. The core r-profile is kept; only the uniform
/// offset changes. The result may be unconverged.
Profile reseed_far_field(const SystemDef& sys, const Profile& profile, const RadialGrid& grid, double param,
                         Background target, const NewtonOptions& newton = {});

struct ExchangeOptions {
    double offset = 3e-3;   ///< distance from the homogeneous point at which a crossed branch is restarted
    int max_exchanges = 4;  ///< per direction
};

/// Traces a localised branch both ways from start. Whenever a trace reaches
/// the homogeneous point and its far field would turn unphysical, the branch
/// is restarted on the other uniform background (bare below, vegetated
/// above) at the same side of the homogeneous point it was heading to.
/// Segments are joined in arclength order.
Branch trace_localised_branch(const SystemDef& sys, const Profile& start, const RadialGrid& grid,
                              BranchFamily family, const ContinuationOptions& opts = {},
                              const ExchangeOptions& exchange = {});

struct SpotStartOptions {
    double offset = 0.27;    ///< start at p1 - offset/delta, on the upper (large-core) branch
    double rho_ref = 1.5;    ///< shading value at which the explicit guess is solved
    double rho_step = 0.025; ///< largest shading step of the homotopy to the target value
    double gain = 1.0;       ///< relative core height of the explicit guess
    NewtonOptions newton{1e-10, 100, 1e-4, 12};
};

/// Converged spot A of the full model on the large-core branch below p1.
/// An explicit guess n = n_v (1 + g e^(-(k1 r/4)^2) J0(k1 r)) is solved at
/// rho_ref and carried to params.rho by a Newton homotopy in (rho, p) with
/// p tracking p1(rho) - offset/delta. Throws SeedFailure when a step fails.
Profile spot_a_start(const ModelParams& params, const RadialGrid& grid, const SpotStartOptions& opts = {});

struct ApproachOptions {
    double approach_fraction = 0.6;   ///< use points with amplitude below this fraction of the branch max
    int min_points = 3;
    int max_points = 6;               ///< only the points nearest the branch end enter the fit
    double amplitude_exponent = 2.0;  ///< spots: amplitude^2 linear in p; gaps: amplitude linear in p
    int fit_order = 2;                ///< degree of p as a polynomial in amplitude^e
    double uniform_fraction = 1e-3;   ///< points below this fraction of the max sit on the uniform state and are skipped
};

/// Fits p as a polynomial in amplitude^e over the small-amplitude end of the
/// branch and returns its value at zero amplitude. Throws NoApproach when
/// the branch never gets small.
double detect_onset(const Branch& branch, const ApproachOptions& opts = {});

/// p_bifurcation - p_fold for the first fold met from the small-amplitude
/// end. Throws MissingLandmarks when the branch has no fold or no approach.
double branch_extent_in_p(const Branch& branch, const ApproachOptions& opts = {});
double branch_extent_in_p(const Branch& branch, double p_bifurcation);

}  // namespace vegspots
