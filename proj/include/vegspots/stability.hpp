#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "vegspots/discretize.hpp"
#include "vegspots/solver.hpp"

namespace vegspots {

enum class EigenMethod { DenseFull, IterativeRightmost, Auto };
enum class Verdict { Stable, Unstable, Marginal, Unknown };

const char* to_string(EigenMethod m);
const char* to_string(Verdict v);

inline constexpr const char* kRadialCaveat =
    "radial stability is necessary but not sufficient for stability in the plane; "
    "non-radial perturbations are not examined";

struct StabilityOptions {
    EigenMethod method = EigenMethod::Auto;
    int count = 10;              ///< number of rightmost eigenvalues reported (m)
    double tol_zero = 1e-7;
    int dense_limit = 2000;      ///< Auto uses the dense solver when 2T <= dense_limit
    int certify_nodes = 200;     ///< coarse grid used to place the shift and certify
    int krylov_dim = 80;
};

struct EigenReport {
    std::vector<std::complex<double>> rightmost;  ///< sorted by decreasing real part
    EigenMethod method = EigenMethod::DenseFull;
    Verdict classification = Verdict::Unknown;
    double tol_zero = 1e-7;
    bool certified = false;      ///< dense runs are certified by construction
    std::string banner = kRadialCaveat;
    std::string note;

    [[nodiscard]] double max_real() const;
};

/// Every eigenvalue of a (small) sparse matrix via LAPACK dgeev, sorted by
/// decreasing real part. Throws EigenFailure if LAPACK reports failure.
std::vector<std::complex<double>> dense_spectrum(const Eigen::SparseMatrix<double>& A);

/// The `count` eigenvalues nearest the real shift, by shift-invert Arnoldi,
/// sorted by decreasing real part. Throws EigenFailure when the Ritz values do
/// not converge.
std::vector<std::complex<double>> shift_invert_eigenvalues(const Eigen::SparseMatrix<double>& A, double shift,
                                                           int count, int krylov_dim = 80);

/// Radial linear stability of a converged profile from the spectrum of the
/// discretised Jacobian. Non-convergent iterations give an Unknown verdict.
EigenReport radial_stability(const SystemDef& sys, const Profile& profile, const RadialGrid& grid,
                             const StabilityOptions& opts = {});

/// Verdict from a list of eigenvalues and the dead-band width.
Verdict classify_spectrum(const std::vector<std::complex<double>>& eig, double tol_zero);

}  // namespace vegspots
