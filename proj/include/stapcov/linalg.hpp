#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#include "stapcov/types.hpp"

namespace stapcov {

/// Eigendecomposition of a Hermitian matrix: input = U diag(d) U^H with d descending.
struct EigenPair {
    CMatrix U;
    RVector d;

    CMatrix reconstruct() const { return U * d.cast<cdouble>().asDiagonal() * U.adjoint(); }
};

/// (C + C^H) / 2. Removes rounding asymmetry left by products such as X X^H.
inline CMatrix hermitian_part(const CMatrix& c) { return 0.5 * (c + c.adjoint()); }

/// Hermitian eigendecomposition with a reproducible layout.
///
/// Eigenvalues are sorted descending with a stable sort, and each eigenvector is
/// rotated so that its largest-magnitude component (first one on ties) is real and
/// positive. Only the lower triangle of `a` is read.
inline EigenPair hermitian_eigen(const CMatrix& a) {
    if (a.rows() != a.cols()) throw Error("hermitian_eigen: matrix is not square");
    const Eigen::Index p = a.rows();
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(a, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw Error("hermitian_eigen: eigensolver did not converge");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const RVector& ascending = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return ascending(i) > ascending(j); });

    EigenPair out{CMatrix(p, p), RVector(p)};
    for (Eigen::Index k = 0; k < p; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.d(k) = ascending(src);
        CVector v = solver.eigenvectors().col(src);
        Eigen::Index pivot = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < p; ++i) {
            if (std::abs(v(i)) > best) {
                best = std::abs(v(i));
                pivot = i;
            }
        }
        if (best > 0.0) v *= std::conj(v(pivot)) / best;
        out.U.col(k) = v;
    }
    return out;
}

/// Hermitian square root of a PSD matrix; eigenvalues below zero are clamped to zero.
inline CMatrix hermitian_sqrt(const CMatrix& a) {
    const EigenPair eig = hermitian_eigen(a);
    const RVector root = eig.d.cwiseMax(0.0).cwiseSqrt();
    return hermitian_part(eig.U * root.cast<cdouble>().asDiagonal() * eig.U.adjoint());
}

/// p x p exchange matrix (ones on the anti-diagonal).
inline Eigen::MatrixXd exchange_matrix(Eigen::Index p) {
    return Eigen::MatrixXd::Identity(p, p).rowwise().reverse();
}

/// J C^T J, computed by index reversal.
inline CMatrix exchange_transpose(const CMatrix& c) { return c.transpose().reverse(); }

inline double relative_frobenius(const CMatrix& a, const CMatrix& reference) {
    const double denom = reference.norm();
    return denom > 0.0 ? (a - reference).norm() / denom : (a - reference).norm();
}

/// max |R - R^H|.
inline double hermitian_deviation(const CMatrix& r) { return (r - r.adjoint()).cwiseAbs().maxCoeff(); }

/// ||R - J R^T J||_F / ||R||_F.
inline double persymmetry_deviation(const CMatrix& r) { return relative_frobenius(exchange_transpose(r), r); }

/// Largest deviation from Toeplitz-block-Toeplitz structure for a temporal-major
/// space-time matrix (index = pulse * elements + element), relative to max |R|.
/// Every entry is compared with the entry sharing its (pulse lag, element lag).
inline double tbt_deviation(const CMatrix& r, int pulses, int elements) {
    const int p = pulses * elements;
    if (r.rows() != p || r.cols() != p) throw Error("tbt_deviation: dimension mismatch");
    const int pulse_lags = 2 * pulses - 1;
    const int element_lags = 2 * elements - 1;
    std::vector<cdouble> ref(static_cast<std::size_t>(pulse_lags * element_lags));
    std::vector<bool> seen(ref.size(), false);
    double worst = 0.0;
    for (int n1 = 0; n1 < pulses; ++n1)
        for (int m1 = 0; m1 < elements; ++m1)
            for (int n2 = 0; n2 < pulses; ++n2)
                for (int m2 = 0; m2 < elements; ++m2) {
                    const auto slot = static_cast<std::size_t>((n1 - n2 + pulses - 1) * element_lags +
                                                               (m1 - m2 + elements - 1));
                    const cdouble value = r(n1 * elements + m1, n2 * elements + m2);
                    if (!seen[slot]) {
                        seen[slot] = true;
                        ref[slot] = value;
                    } else {
                        worst = std::max(worst, std::abs(value - ref[slot]));
                    }
                }
    const double scale = r.cwiseAbs().maxCoeff();
    return scale > 0.0 ? worst / scale : worst;
}

inline double min_eigenvalue(const CMatrix& r) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(r, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

}  // namespace stapcov
