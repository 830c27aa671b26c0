#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace vegspots {

/// Uniform radial grid r_i = i h, i = 0..T-1, on [0, r_star].
struct RadialGrid {
    double r_star = 0.0;
    int T = 0;
    double h = 0.0;
    std::vector<double> r;

    [[nodiscard]] int size() const { return T; }
};

/// Throws BadGrid unless r_star > 0 and T >= 4.
RadialGrid build_grid(double r_star, int T);

/// Tridiagonal finite-difference approximation of d^2/dr^2 + (1/r) d/dr with
/// homogeneous Neumann conditions at both ends, closed by ghost-node
/// elimination. Row 0 uses the limit 2 d^2/dr^2, never evaluating 1/r at 0.
class RadialLaplacian {
public:
    explicit RadialLaplacian(const RadialGrid& grid);

    [[nodiscard]] int size() const { return static_cast<int>(diag_.size()); }

    /// Row i couples to i-1 (lower), i (diag), i+1 (upper); lower(0) and
    /// upper(T-1) are zero.
    [[nodiscard]] double lower(int i) const { return lower_[i]; }
    [[nodiscard]] double diag(int i) const { return diag_[i]; }
    [[nodiscard]] double upper(int i) const { return upper_[i]; }

    void apply(std::span<const double> u, std::span<double> out) const;
    [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& u) const;

private:
    std::vector<double> lower_, diag_, upper_;
};

}  // namespace vegspots
