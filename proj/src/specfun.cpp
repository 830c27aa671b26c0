#include "vegspots/specfun.hpp"

#include <cmath>
#include <string>

#include "vegspots/errors.hpp"

namespace vegspots {

namespace {

using ld = long double;

constexpr ld kEulerGamma = 0.57721566490153286060651209008240243L;
constexpr ld kPi = 3.14159265358979323846264338327950288L;
constexpr double kJYSwitch = 14.0;
constexpr double kISwitch = 25.0;
constexpr double kKSeriesMax = 2.0;
constexpr double kKSwitch = 25.0;

// sum_k s^k (x/2)^(2k+n) / (k! (k+n)!), with s = -1 for J and +1 for I.
ld power_series(int n, ld x, int s) {
    const ld h = x / 2;
    const ld h2 = h * h;
    ld term = (n == 0) ? 1.0L : h;
    ld sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= s * h2 / (static_cast<ld>(k) * (k + n));
        sum += term;
        if (std::fabs(term) < 1e-21L * std::fabs(sum) && k > 2) break;
    }
    return sum;
}

// Coefficients of the large-argument expansions: a_m = prod_{j=1}^m (mu - (2j-1)^2) / (m! 8^m).
// Summation stops at the smallest term.
struct Hankel {
    ld P = 0, Q = 0;
};

Hankel hankel_pq(int n, ld x) {
    const ld mu = 4.0L * n * n;
    Hankel out;
    ld term = 1.0L;
    ld prev = INFINITY;
    out.P = 1.0L;
    for (int m = 1; m < 200; ++m) {
        term *= (mu - static_cast<ld>(2 * m - 1) * (2 * m - 1)) / (static_cast<ld>(m) * 8.0L * x);
        const ld mag = std::fabs(term);
        if (mag > prev || mag < 1e-22L) break;
        prev = mag;
        // m even -> P with sign (-1)^{m/2}; m odd -> Q with sign (-1)^{(m-1)/2}
        const int half = m / 2;
        const ld sgn = (half % 2 == 0) ? 1.0L : -1.0L;
        if (m % 2 == 0) out.P += sgn * term;
        else out.Q += sgn * term;
    }
    return out;
}

// sum_m (+-1)^m a_m / x^m; sign = -1 for I, +1 for K.
ld modified_asymptotic(int n, ld x, int sign) {
    const ld mu = 4.0L * n * n;
    ld term = 1.0L;
    ld sum = 1.0L;
    ld prev = INFINITY;
    for (int m = 1; m < 200; ++m) {
        term *= sign * (mu - static_cast<ld>(2 * m - 1) * (2 * m - 1)) / (static_cast<ld>(m) * 8.0L * x);
        const ld mag = std::fabs(term);
        if (mag > prev || mag < 1e-22L) break;
        prev = mag;
        sum += term;
    }
    return sum;
}

ld harmonic(int k) {
    ld s = 0;
    for (int j = 1; j <= k; ++j) s += 1.0L / j;
    return s;
}

double j_or_y_asymptotic(BesselKind kind, int n, double x) {
    const Hankel pq = hankel_pq(n, x);
    const ld c = std::cos(static_cast<ld>(x));
    const ld s = std::sin(static_cast<ld>(x));
    const ld r2 = 0.70710678118654752440084436210484904L;
    ld cchi, schi;
    if (n == 0) {
        cchi = (c + s) * r2;
        schi = (s - c) * r2;
    } else {
        cchi = (s - c) * r2;
        schi = -(s + c) * r2;
    }
    const ld amp = std::sqrt(2.0L / (kPi * x));
    if (kind == BesselKind::J) return static_cast<double>(amp * (pq.P * cchi - pq.Q * schi));
    return static_cast<double>(amp * (pq.P * schi + pq.Q * cchi));
}

double y_series(int n, ld x) {
    const ld h = x / 2;
    const ld h2 = h * h;
    const ld lg = std::log(h);
    if (n == 0) {
        const ld j0 = power_series(0, x, -1);
        ld term = 1.0L;
        ld sum = 0.0L;
        for (int k = 1; k < 500; ++k) {
            term *= -h2 / (static_cast<ld>(k) * k);
            const ld add = -term * harmonic(k);
            sum += add;
            if (std::fabs(add) < 1e-21L * std::fabs(sum) && k > 2) break;
        }
        return static_cast<double>((2.0L / kPi) * ((lg + kEulerGamma) * j0 + sum));
    }
    const ld j1 = power_series(1, x, -1);
    // psi(k+1) + psi(k+2) = H_k + H_{k+1} - 2 gamma
    ld term = h;  // (x/2)^{2k+1} / (k! (k+1)!) at k = 0, times (-1)^k
    ld Hk = 0.0L;
    ld sum = term * (Hk + 1.0L - 2.0L * kEulerGamma);
    for (int k = 1; k < 500; ++k) {
        term *= -h2 / (static_cast<ld>(k) * (k + 1));
        Hk += 1.0L / k;
        const ld add = term * (Hk + Hk + 1.0L / (k + 1) - 2.0L * kEulerGamma);
        sum += add;
        if (std::fabs(add) < 1e-21L * std::fabs(sum) && k > 2) break;
    }
    return static_cast<double>(-2.0L / (kPi * x) + (2.0L / kPi) * lg * j1 - sum / kPi);
}

double k_series(int n, ld x) {
    const ld h = x / 2;
    const ld h2 = h * h;
    const ld lg = std::log(h);
    if (n == 0) {
        const ld i0 = power_series(0, x, 1);
        ld term = 1.0L;
        ld sum = 0.0L;
        for (int k = 1; k < 500; ++k) {
            term *= h2 / (static_cast<ld>(k) * k);
            const ld add = term * harmonic(k);
            sum += add;
            if (add < 1e-21L * sum && k > 2) break;
        }
        return static_cast<double>(-(lg + kEulerGamma) * i0 + sum);
    }
    const ld i1 = power_series(1, x, 1);
    ld term = 1.0L;  // (x^2/4)^k / (k! (k+1)!)
    ld Hk = 0.0L;
    ld sum = term * (1.0L - 2.0L * kEulerGamma);
    for (int k = 1; k < 500; ++k) {
        term *= h2 / (static_cast<ld>(k) * (k + 1));
        Hk += 1.0L / k;
        const ld add = term * (2.0L * Hk + 1.0L / (k + 1) - 2.0L * kEulerGamma);
        sum += add;
        if (std::fabs(add) < 1e-21L * std::fabs(sum) && k > 2) break;
    }
    return static_cast<double>(1.0L / x + lg * i1 - 0.5L * h * sum);
}

// exp(x) K_n(x) = int_0^inf exp(-x (cosh t - 1)) cosh(n t) dt. The integrand is
// entire and decays doubly exponentially, so the trapezoidal rule converges
// geometrically in 1/h.
double k_scaled_quadrature(int n, ld x) {
    const ld h = 0.05L;
    ld sum = 0.5L;
    for (int j = 1; j < 100000; ++j) {
        const ld t = j * h;
        const ld f = std::exp(-x * (std::cosh(t) - 1.0L)) * (n == 0 ? 1.0L : std::cosh(t));
        sum += f;
        if (f < 1e-22L * sum) break;
    }
    return static_cast<double>(h * sum);
}

void check_args(BesselKind kind, int order, double x) {
    if (order != 0 && order != 1) throw DomainError("only orders 0 and 1 are provided, got " + std::to_string(order));
    if (!(x >= 0.0)) throw DomainError("argument must be nonnegative, got " + std::to_string(x));
    if (x == 0.0 && (kind == BesselKind::Y || kind == BesselKind::K)) {
        throw DomainError("Y and K diverge at x = 0");
    }
}

}  // namespace

double bessel_i_scaled(int order, double x) {
    check_args(BesselKind::I, order, x);
    if (x < kISwitch) return static_cast<double>(std::exp(-static_cast<ld>(x)) * power_series(order, x, 1));
    return static_cast<double>(modified_asymptotic(order, x, -1) / std::sqrt(2.0L * kPi * x));
}

double bessel_k_scaled(int order, double x) {
    check_args(BesselKind::K, order, x);
    if (x <= kKSeriesMax) return static_cast<double>(std::exp(static_cast<ld>(x)) * k_series(order, x));
    if (x < kKSwitch) return k_scaled_quadrature(order, x);
    return static_cast<double>(std::sqrt(kPi / (2.0L * x)) * modified_asymptotic(order, x, 1));
}

double bessel(BesselKind kind, int order, double x) {
    check_args(kind, order, x);
    switch (kind) {
        case BesselKind::J:
            if (x < kJYSwitch) return static_cast<double>(power_series(order, x, -1));
            return j_or_y_asymptotic(kind, order, x);
        case BesselKind::Y:
            if (x < kJYSwitch) return y_series(order, x);
            return j_or_y_asymptotic(kind, order, x);
        case BesselKind::I:
            if (x < kISwitch) return static_cast<double>(power_series(order, x, 1));
            return static_cast<double>(std::exp(static_cast<ld>(x)) * bessel_i_scaled(order, x));
        case BesselKind::K:
            if (x <= kKSeriesMax) return k_series(order, x);
            return static_cast<double>(std::exp(-static_cast<ld>(x)) * bessel_k_scaled(order, x));
    }
    throw DomainError("unknown Bessel kind");
}

BesselEval evaluate_bessel(BesselKind kind, int order, double x) {
    return BesselEval{order, kind, x, bessel(kind, order, x)};
}

}  // namespace vegspots
