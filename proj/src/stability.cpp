#include "vegspots/stability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <lapacke.h>

#include "vegspots/errors.hpp"

namespace vegspots {

using cplx = std::complex<double>;

const char* to_string(EigenMethod m) {
    switch (m) {
        case EigenMethod::DenseFull: return "DenseFull";
        case EigenMethod::IterativeRightmost: return "IterativeRightmost";
        case EigenMethod::Auto: return "Auto";
    }
    return "?";
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "Stable";
        case Verdict::Unstable: return "Unstable";
        case Verdict::Marginal: return "Marginal";
        case Verdict::Unknown: return "Unknown";
    }
    return "?";
}

double EigenReport::max_real() const {
    double m = -INFINITY;
    for (const cplx& z : rightmost) m = std::max(m, z.real());
    return m;
}

namespace {

void sort_by_real_desc(std::vector<cplx>& v) {
    std::sort(v.begin(), v.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
}

}  // namespace

std::vector<cplx> dense_spectrum(const Eigen::SparseMatrix<double>& A) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw DimensionMismatch("matrix is not square");
    Eigen::MatrixXd D = Eigen::MatrixXd(A);
    std::vector<double> wr(n), wi(n);
    const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, D.data(), n, wr.data(), wi.data(),
                                          nullptr, 1, nullptr, 1);
    if (info != 0) throw EigenFailure("dgeev returned " + std::to_string(info));
    std::vector<cplx> out(n);
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(wr[i]) || !std::isfinite(wi[i])) throw EigenFailure("non-finite eigenvalue");
        out[i] = cplx(wr[i], wi[i]);
    }
    sort_by_real_desc(out);
    return out;
}

std::vector<cplx> shift_invert_eigenvalues(const Eigen::SparseMatrix<double>& A, double shift, int count,
                                           int krylov_dim) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n) throw DimensionMismatch("matrix is not square");
    count = std::min(count, n);
    Eigen::SparseMatrix<double> S = A;
    for (int i = 0; i < n; ++i) S.coeffRef(i, i) -= shift;
    S.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(S);
    if (lu.info() != Eigen::Success) throw EigenFailure("shift coincides with an eigenvalue");

    // Deterministic, generic start vector.
    Eigen::VectorXd start(n);
    for (int i = 0; i < n; ++i) start[i] = 1.0 + 0.5 * std::sin(0.7 * i + 0.3) + 0.25 * std::cos(1.9 * i);

    for (int m = std::min(n, std::max(krylov_dim, 3 * count)); ; m = std::min(n, 2 * m)) {
        Eigen::MatrixXd V(n, m + 1);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
        V.col(0) = start.normalized();
        int built = m;
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd w = lu.solve(V.col(j));
            for (int pass = 0; pass < 2; ++pass) {
                const Eigen::VectorXd c = V.leftCols(j + 1).transpose() * w;
                w -= V.leftCols(j + 1) * c;
                H.col(j).head(j + 1) += c;
            }
            const double beta = w.norm();
            H(j + 1, j) = beta;
            if (beta < 1e-14 * H.col(j).head(j + 1).norm()) {
                built = j + 1;
                break;
            }
            V.col(j + 1) = w / beta;
        }
        const Eigen::MatrixXd Hm = H.topLeftCorner(built, built);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Hm.cast<cplx>());
        if (es.info() != Eigen::Success) throw EigenFailure("Hessenberg eigenproblem failed");
        const double hnext = built < m ? 0.0 : H(built, built - 1);

        std::vector<int> idx(built);
        for (int i = 0; i < built; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](int a, int b) { return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]); });
        const int want = std::min(count, built);
        bool ok = true;
        std::vector<cplx> lam;
        for (int t = 0; t < want; ++t) {
            const int i = idx[t];
            const cplx theta = es.eigenvalues()[i];
            const double resid = hnext * std::abs(es.eigenvectors()(built - 1, i));
            if (!(resid <= 1e-10 * std::abs(theta))) ok = false;
            lam.push_back(shift + 1.0 / theta);
        }
        if (ok) {
            sort_by_real_desc(lam);
            return lam;
        }
        if (m >= n || m >= 800) throw EigenFailure("shift-invert Arnoldi did not converge");
    }
}

Verdict classify_spectrum(const std::vector<cplx>& eig, double tol_zero) {
    if (eig.empty()) return Verdict::Unknown;
    double mx = -INFINITY;
    for (const cplx& z : eig) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return Verdict::Unknown;
        mx = std::max(mx, z.real());
    }
    if (mx > tol_zero) return Verdict::Unstable;
    if (mx < -tol_zero) return Verdict::Stable;
    return Verdict::Marginal;
}

namespace {

Profile interpolate_profile(const Profile& prof, const RadialGrid& from, const RadialGrid& to) {
    Profile out;
    out.param = prof.param;
    out.n.resize(to.T);
    out.w.resize(to.T);
    for (int i = 0; i < to.T; ++i) {
        const double r = std::min(to.r[i], from.r_star);
        int j = std::min(static_cast<int>(r / from.h), from.T - 2);
        const double t = (r - from.r[j]) / from.h;
        out.n[i] = (1 - t) * prof.n[j] + t * prof.n[j + 1];
        out.w[i] = (1 - t) * prof.w[j] + t * prof.w[j + 1];
    }
    out.converged = prof.converged;
    return out;
}

}  // namespace

EigenReport radial_stability(const SystemDef& sys, const Profile& profile, const RadialGrid& grid,
                             const StabilityOptions& opts) {
    if (profile.size() != grid.T) throw DimensionMismatch("profile does not match the grid");
    if (!profile.converged) throw InvalidParams("stability requires a converged profile");

    EigenReport rep;
    rep.tol_zero = opts.tol_zero;

    const Eigen::SparseMatrix<double> J = jacobian(sys, profile.state(), profile.param, grid);
    const int n2 = 2 * grid.T;
    EigenMethod method = opts.method;
    if (method == EigenMethod::Auto) {
        method = n2 <= opts.dense_limit ? EigenMethod::DenseFull : EigenMethod::IterativeRightmost;
    }

    auto run_dense = [&]() {
        std::vector<cplx> all = dense_spectrum(J);
        all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(std::max(opts.count, 1))));
        rep.rightmost = std::move(all);
        rep.method = EigenMethod::DenseFull;
        rep.certified = true;
        rep.classification = classify_spectrum(rep.rightmost, opts.tol_zero);
    };

    try {
        if (method == EigenMethod::DenseFull) {
            run_dense();
            return rep;
        }

        // Coarse dense spectrum: places the shift and certifies the result.
        const int Tc = std::min(grid.T, std::max(opts.certify_nodes, 8));
        const RadialGrid coarse = build_grid(grid.r_star, Tc);
        const Profile cp = interpolate_profile(profile, grid, coarse);
        const std::vector<cplx> coarse_eig = dense_spectrum(jacobian(sys, cp.state(), cp.param, coarse));
        const double lc = coarse_eig.front().real();
        const double shift = lc + std::max(0.01, 0.05 * std::abs(lc));

        rep.rightmost = shift_invert_eigenvalues(J, shift, std::max(opts.count, 10), opts.krylov_dim);
        rep.rightmost.resize(std::min<std::size_t>(rep.rightmost.size(), static_cast<std::size_t>(std::max(opts.count, 10))));
        rep.method = EigenMethod::IterativeRightmost;
        const double lf = rep.max_real();
        const double margin = 0.05 * std::abs(lc) + 1e-3;
        rep.certified = lf >= lc - margin;
        rep.classification = classify_spectrum(rep.rightmost, opts.tol_zero);
        if (!rep.certified) {
            rep.note = "iterative rightmost " + std::to_string(lf) + " misses coarse rightmost " + std::to_string(lc);
            if (n2 <= 2 * opts.dense_limit) {
                run_dense();
                rep.note += "; dense fallback used";
            } else if (rep.classification == Verdict::Stable) {
                rep.classification = Verdict::Unknown;
            }
        }
    } catch (const EigenFailure& e) {
        rep.classification = Verdict::Unknown;
        rep.certified = false;
        rep.note = e.what();
    }
    return rep;
}

}  // namespace vegspots
