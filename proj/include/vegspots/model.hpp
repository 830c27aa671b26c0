#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

namespace vegspots {

/// Dimensionless parameters of the stationary von Hardenberg model
///
///   0 = (gamma w / (1 + sigma w)) n - n^2 - nu_mort n + Lap n
///   0 = p - w + (rho - w) w n + delta Lap (w - beta n)
///
/// The mortality rate is called nu_mort to keep it apart from the core
/// coefficient nu_core of the Turing normal form.
struct ModelParams {
    double gamma = 1.6;
    double sigma = 1.6;
    double nu_mort = 0.2;
    double beta = 3.0;
    double delta = 30.0;
    double rho = 1.5;
    double p = 0.2;

    /// Throws InvalidParams unless every field is positive and gamma > nu_mort*sigma.
    void validate() const;

    /// True when rho lies below the bound that keeps a*b < 1 in the reduced model.
    [[nodiscard]] bool within_reduction_bound() const;
    /// (1 + sigma p_c)^2 / (gamma p_c) + p_c; about 6.41 at the default values.
    [[nodiscard]] double reduction_rho_bound() const;

    [[nodiscard]] ModelParams with_p(double precipitation) const {
        ModelParams out = *this;
        out.p = precipitation;
        return out;
    }
    [[nodiscard]] ModelParams with_rho(double shading) const {
        ModelParams out = *this;
        out.rho = shading;
        return out;
    }
};

enum class UniformKind { Bare, Vegetated };

struct UniformState {
    UniformKind kind = UniformKind::Bare;
    double n_star = 0.0;
    double w_star = 0.0;
    bool physical = true;
    double residual = 0.0;  ///< max-norm residual of the algebraic system
};

/// Constants of the weakly nonlinear (N, W) reduction.
struct TuringData {
    double P0 = 0.0;     ///< reduced Turing point, equal to k^4
    double k = 0.0;      ///< critical spatial wavenumber
    double omega = 0.0;  ///< (k^2 + 1)/k^2, equal to sqrt(1 - K)
};

struct ReducedParams {
    double p_c = 0.0;
    double a0 = 0.0;
    double b0 = 0.0;
    double a = 0.0;
    double b = 0.0;
    double K = 0.0;
    std::optional<TuringData> turing;  ///< present only when K < 0

    /// Reduced constants from the two coefficients of the (N, W) system alone.
    /// p_c, a0 and b0 are left at zero; used for synthetic checks.
    [[nodiscard]] static ReducedParams from_ab(double a, double b);
};

enum class NormalFormCase { Homogeneous, Turing };

struct NormalFormCoeffs {
    NormalFormCase kind = NormalFormCase::Homogeneous;
    double c0 = 0.0;
    double c2 = 0.0;       ///< Homogeneous only
    double c3 = 0.0;       ///< Turing only
    double nu_core = 0.0;  ///< Turing only, omega sqrt(pi/6)
};

/// Threshold above which rings and spot B exist: c3 < 0 iff omega > 30/23.
inline constexpr double kOmegaStar = 30.0 / 23.0;

double critical_precipitation(const ModelParams& params);

/// Bare state first, then every vegetated state with n* >= 0 sorted by w*.
std::vector<UniformState> uniform_states(const ModelParams& params);

/// Roots of the w* cubic that are real and positive, sorted, polished.
/// n* is not filtered here, so this also returns the n* < 0 continuation
/// of the vegetated branch below p_c.
std::vector<double> vegetated_water_roots(const ModelParams& params);

/// The vegetated state that bifurcates from the bare state at p_c, i.e. the
/// smallest positive cubic root. n* may be negative when p < p_c.
std::optional<UniformState> primary_vegetated_state(const ModelParams& params);

ReducedParams reduced_params(const ModelParams& params);

using Quartet = std::array<std::complex<double>, 4>;

/// Roots of (lambda^2 + P)(lambda^2 - 1): {1, -1, sqrt(-P), -sqrt(-P)}.
Quartet spatial_eigenvalues_bare(double P);

/// Roots of lambda^4 - (1 + K P) lambda^2 + P, ordered as
/// {+sqrt(mu_-), -sqrt(mu_-), +sqrt(mu_+), -sqrt(mu_+)}.
Quartet spatial_eigenvalues_vegetated(const ReducedParams& rp, double P);

NormalFormCoeffs normal_form_homogeneous(const ReducedParams& rp);
NormalFormCoeffs normal_form_turing(const ReducedParams& rp);

/// c3 as a function of omega alone.
double turing_cubic_coefficient(double omega);

/// 2x2 linearisation of the reaction terms.
struct ReactionJacobian {
    double nn = 0.0, nw = 0.0, wn = 0.0, ww = 0.0;
};

ReactionJacobian reaction_jacobian(const ModelParams& params, double n, double w);

/// Rightmost temporal growth rate of a Fourier mode with wavenumber q about
/// the uniform state (n, w): largest Re(lambda) of J - q^2 D.
double dispersion_growth_rate(const ModelParams& params, double n, double w, double q);

struct TuringOnset {
    double p1 = 0.0;
    double k1 = 0.0;
    /// Reduced-model estimate p_c + delta^{-1} P0 / b0, for comparison.
    std::optional<double> p1_reduced_estimate;
    bool within_reduction_bound = true;
};

struct OnsetOptions {
    double p_upper_offset = 2.0;  ///< search p in (p_c, p_c + offset]
    int scan_points = 400;
    double p_tol = 1e-12;
};

/// Smallest p > p_c at which the vegetated state becomes marginally unstable
/// to a mode with nonzero wavenumber.
TuringOnset turing_onset_full(const ModelParams& params, const OnsetOptions& opts = {});

}  // namespace vegspots
