#pragma once

namespace vegspots {

enum class BesselKind { J, Y, I, K };

struct BesselEval {
    int order = 0;
    BesselKind kind = BesselKind::J;
    double argument = 0.0;
    double value = 0.0;
};

/// Bessel functions of integer order 0 or 1 for real x >= 0.
///
/// J, Y: power series (in long double) for x < 14, Hankel asymptotic
/// expansion beyond. I: power series for x < 25, asymptotic beyond. K: series
/// for x <= 2, trapezoidal rule on int_0^inf exp(-x cosh t) cosh(nu t) dt up to
/// x = 25, asymptotic beyond. I overflows and K underflows near x = 700; use
/// the scaled variants there.
///
/// Throws DomainError for x < 0, order outside {0, 1}, and Y or K at x = 0.
double bessel(BesselKind kind, int order, double x);

/// exp(-x) I_order(x).
double bessel_i_scaled(int order, double x);
/// exp(x) K_order(x).
double bessel_k_scaled(int order, double x);

BesselEval evaluate_bessel(BesselKind kind, int order, double x);

inline double bessel_j0(double x) { return bessel(BesselKind::J, 0, x); }
inline double bessel_j1(double x) { return bessel(BesselKind::J, 1, x); }

}  // namespace vegspots
