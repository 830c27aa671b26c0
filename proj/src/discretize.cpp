#include "vegspots/discretize.hpp"

#include <cmath>
#include <string>

#include "vegspots/errors.hpp"

namespace vegspots {

RadialGrid build_grid(double r_star, int T) {
    if (!(std::isfinite(r_star) && r_star > 0.0)) {
        throw BadGrid("outer radius must be positive, got " + std::to_string(r_star));
    }
    if (T < 4) throw BadGrid("need at least 4 nodes, got " + std::to_string(T));
    RadialGrid g;
    g.r_star = r_star;
    g.T = T;
    g.h = r_star / (T - 1);
    g.r.resize(T);
    for (int i = 0; i < T; ++i) g.r[i] = i * g.h;
    g.r[T - 1] = r_star;
    return g;
}

RadialLaplacian::RadialLaplacian(const RadialGrid& grid)
    : lower_(grid.T, 0.0), diag_(grid.T, 0.0), upper_(grid.T, 0.0) {
    const int T = grid.T;
    const double h = grid.h;
    const double ih2 = 1.0 / (h * h);

    // r = 0: Lap u -> 2 u_rr, ghost u_{-1} = u_1.
    diag_[0] = -4.0 * ih2;
    upper_[0] = 4.0 * ih2;

    for (int i = 1; i < T - 1; ++i) {
        const double c = 1.0 / (2.0 * h * grid.r[i]);
        lower_[i] = ih2 - c;
        diag_[i] = -2.0 * ih2;
        upper_[i] = ih2 + c;
    }

    // r = r_star: ghost u_T = u_{T-2}, the first-derivative term cancels.
    lower_[T - 1] = 2.0 * ih2;
    diag_[T - 1] = -2.0 * ih2;
}

void RadialLaplacian::apply(std::span<const double> u, std::span<double> out) const {
    const int T = size();
    if (static_cast<int>(u.size()) != T || static_cast<int>(out.size()) != T) {
        throw DimensionMismatch("Laplacian of size " + std::to_string(T) + " applied to vector of size " +
                                std::to_string(u.size()));
    }
    // Difference form, so constants map to zero exactly.
    out[0] = upper_[0] * (u[1] - u[0]);
    for (int i = 1; i < T - 1; ++i) {
        out[i] = lower_[i] * (u[i - 1] - u[i]) + upper_[i] * (u[i + 1] - u[i]);
    }
    out[T - 1] = lower_[T - 1] * (u[T - 2] - u[T - 1]);
}

Eigen::VectorXd RadialLaplacian::apply(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(u.size());
    apply(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())),
          std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
    return out;
}

}  // namespace vegspots
