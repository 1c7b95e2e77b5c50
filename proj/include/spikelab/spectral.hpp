/*
   Copyright 2026 the spikelab authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// Dense symmetric eigendecomposition (LAPACK-backed), resolvent quadratic
// forms, the master determinant equation locating outliers, spectral
// projections, and the deterministic interlacing / perturbation identities.

#pragma once

#include <lapacke.h>

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "spikelab/ensemble.hpp"
#include "spikelab/mp_law.hpp"

namespace spikelab {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Full eigensystem of a symmetric matrix, sorted nonincreasing, with the
// deterministic sign convention that each vector's largest-magnitude
// component is positive.
struct Eigensystem {
    Vector values;   // nonincreasing
    Matrix vectors;  // columns match values; empty if not requested
    int topCount = 0;  // number of leading vectors actually stored

    bool hasVector(int i) const { return i < topCount; }
};

namespace detail {

inline void checkSymmetric(const Matrix& A, double tol = 1e-10) {
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > tol * scale)
        throw DomainError("decompose: matrix not symmetric within tolerance");
}

inline void fixSigns(Matrix& vectors) {
    for (int j = 0; j < vectors.cols(); ++j) {
        int arg = 0;
        double best = -1.0;
        for (int i = 0; i < vectors.rows(); ++i) {
            const double a = std::abs(vectors(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (vectors(arg, j) < 0.0) vectors.col(j) = -vectors.col(j);
    }
}

}  // namespace detail

// Full decomposition (values and, optionally, all eigenvectors).
inline Eigensystem decompose(const Matrix& A, bool wantVectors = true) {
    detail::checkSymmetric(A);
    const int n = static_cast<int>(A.rows());
    Matrix work = A;
    Vector w(n);
    const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, wantVectors ? 'V' : 'N',
                                    'L', n, work.data(), n, w.data());
    if (info != 0)
        throw NumericError("decompose: dsyevd failed with info " +
                           std::to_string(info));
    Eigensystem es;
    es.values = w.reverse();
    if (wantVectors) {
        es.vectors = work.rowwise().reverse();
        detail::fixSigns(es.vectors);
        es.topCount = n;
    }
    return es;
}

// All eigenvalues but only the eigenvectors of the k largest eigenvalues.
// Cheaper than the full decomposition when k << n.
inline Eigensystem decomposeTop(const Matrix& A, int k) {
    detail::checkSymmetric(A);
    const int n = static_cast<int>(A.rows());
    if (k < 0 || k > n) throw DomainError("decomposeTop: bad k");
    Eigensystem es;
    {
        Matrix work = A;
        Vector w(n);
        const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n,
                                        work.data(), n, w.data());
        if (info != 0)
            throw NumericError("decomposeTop: dsyevd failed with info " +
                               std::to_string(info));
        es.values = w.reverse();
    }
    if (k > 0) {
        Matrix work = A;
        Vector w(n);
        Matrix Z(n, k);
        std::vector<lapack_int> isuppz(2 * std::max(1, k));
        lapack_int found = 0;
        const int info = LAPACKE_dsyevr(
            LAPACK_COL_MAJOR, 'V', 'I', 'L', n, work.data(), n, 0.0, 0.0,
            n - k + 1, n, 0.0, &found, w.data(), Z.data(), n, isuppz.data());
        if (info != 0 || found != k)
            throw NumericError("decomposeTop: dsyevr failed");
        es.vectors = Z.rowwise().reverse();
        detail::fixSigns(es.vectors);
        es.topCount = k;
    }
    return es;
}

// ---------------------------------------------------------------------------
// Resolvent quadratic forms.
// ---------------------------------------------------------------------------

enum class ResolventMethod { EigenExpansion, DirectSolve };

// <v, (A - z)^{-1} w> from the eigensystem (all eigenvalues, kernel
// included) or by a direct shifted solve on the original matrix.
inline Complex resolventForm(const Eigensystem& es, Complex z, const Vector& v,
                             const Vector& w) {
    if (es.topCount < es.values.size())
        throw DomainError("resolventForm: needs the full eigenvector set");
    for (int i = 0; i < es.values.size(); ++i)
        if (z.imag() == 0.0 && std::abs(es.values(i) - z.real()) < 1e-14)
            throw DomainError("resolventForm: z hits an eigenvalue");
    const Vector pv = es.vectors.transpose() * v;
    const Vector pw = es.vectors.transpose() * w;
    Complex sum = 0.0;
    for (int i = 0; i < es.values.size(); ++i)
        sum += pv(i) * pw(i) / (es.values(i) - z);
    return sum;
}

inline Complex resolventFormDirect(const Matrix& A, Complex z, const Vector& v,
                                   const Vector& w) {
    const int n = static_cast<int>(A.rows());
    if (z.imag() == 0.0) {
        Matrix shifted = A - z.real() * Matrix::Identity(n, n);
        const Vector x = shifted.partialPivLu().solve(w);
        return v.dot(x);
    }
    ComplexMatrix shifted = A.cast<Complex>();
    shifted.diagonal().array() -= z;
    const ComplexVector x = shifted.partialPivLu().solve(w.cast<Complex>());
    Complex out = 0.0;
    for (int i = 0; i < n; ++i) out += v(i) * x(i);
    return out;
}

// F(z) = sqrt(phi) (1 + z G(z)) compressed to the spike subspace:
// W(z) = V* F(z) V, an |R| x |R| matrix built from H's eigensystem.
class WMatrix {
public:
    WMatrix(const Eigensystem& h, const Matrix& V, double phi)
        : lambda_(h.values), phi_(phi) {
        if (h.topCount < h.values.size())
            throw DomainError("WMatrix: needs the full eigenvector set");
        if (V.cols() > 0 &&
            (V.transpose() * V - Matrix::Identity(V.cols(), V.cols()))
                    .cwiseAbs()
                    .maxCoeff() > 1e-10)
            throw DomainError("WMatrix: V is not an isometry");
        proj_ = h.vectors.transpose() * V;  // M x |R|
    }

    int rank() const { return static_cast<int>(proj_.cols()); }

    ComplexMatrix operator()(Complex z) const {
        const int r = rank();
        ComplexMatrix W = ComplexMatrix::Identity(r, r);
        if (r == 0) return W;
        ComplexMatrix acc = ComplexMatrix::Zero(r, r);
        for (int i = 0; i < lambda_.size(); ++i) {
            const Complex g = 1.0 / (lambda_(i) - z);
            const auto p = proj_.row(i);
            acc += g * (p.transpose() * p).cast<Complex>();
        }
        W += z * acc;
        return std::sqrt(phi_) * W;
    }

    Matrix real(double x) const {
        const int r = rank();
        Matrix W = Matrix::Identity(r, r);
        if (r == 0) return W;
        Matrix acc = Matrix::Zero(r, r);
        for (int i = 0; i < lambda_.size(); ++i) {
            const double g = 1.0 / (lambda_(i) - x);
            const auto p = proj_.row(i);
            acc.noalias() += g * (p.transpose() * p);
        }
        W += x * acc;
        return std::sqrt(phi_) * W;
    }

    const Vector& lambda() const { return lambda_; }

private:
    Vector lambda_;
    Matrix proj_;
    double phi_;
};

inline ComplexMatrix wMatrix(const Eigensystem& h, const Matrix& V, double phi,
                             Complex z) {
    return WMatrix(h, V, phi)(z);
}

// ---------------------------------------------------------------------------
// Master determinant equation: x off the spectrum of H is an eigenvalue of Q
// iff det(D^{-1} + W(x)) = 0.
// ---------------------------------------------------------------------------

struct MasterRoot {
    double x = 0.0;
    bool fromSignChange = true;  // false: located at a |det| local minimum
};

inline std::vector<MasterRoot> masterEquationRoots(
    const Eigensystem& h, const Matrix& V, const Vector& d, double phi,
    double lo, double hi, int pointsPerUnit = 10000) {
    if (d.size() != V.cols()) throw DomainError("masterEquationRoots: D/V mismatch");
    for (int i = 0; i < d.size(); ++i)
        if (d(i) == 0.0) throw DomainError("masterEquationRoots: singular D");
    for (int i = 0; i < h.values.size(); ++i)
        if (h.values(i) >= lo && h.values(i) <= hi)
            throw DomainError(
                "masterEquationRoots: search interval touches the spectrum of H");
    std::vector<MasterRoot> roots;
    if (d.size() == 0) return roots;

    WMatrix W(h, V, phi);
    Matrix Dinv = d.cwiseInverse().asDiagonal();
    auto det = [&](double x) { return (Dinv + W.real(x)).determinant(); };

    const int nGrid = std::max(
        16, static_cast<int>(std::ceil((hi - lo) * pointsPerUnit)));
    double prevX = lo;
    double prevF = det(lo);
    std::vector<double> xs(1, lo), fs(1, prevF);
    for (int k = 1; k <= nGrid; ++k) {
        const double x = lo + (hi - lo) * k / static_cast<double>(nGrid);
        const double f = det(x);
        if ((f > 0) != (prevF > 0) || f == 0.0) {
            const double root = solveBracketed(det, prevX, x, 1e-12);
            roots.push_back({root, true});
        }
        xs.push_back(x);
        fs.push_back(f);
        prevX = x;
        prevF = f;
    }
    // Degenerate (double) roots touch zero without a sign change: look for
    // interior local minima of |det| below threshold.
    for (std::size_t k = 1; k + 1 < xs.size(); ++k) {
        if (std::abs(fs[k]) < 1e-10 && std::abs(fs[k]) <= std::abs(fs[k - 1]) &&
            std::abs(fs[k]) <= std::abs(fs[k + 1])) {
            bool nearKnown = false;
            for (const auto& r : roots)
                if (std::abs(r.x - xs[k]) <
                    2.0 * (hi - lo) / static_cast<double>(nGrid))
                    nearKnown = true;
            if (!nearKnown) roots.push_back({xs[k], false});
        }
    }
    std::sort(roots.begin(), roots.end(),
              [](const MasterRoot& a, const MasterRoot& b) { return a.x < b.x; });
    return roots;
}

// ---------------------------------------------------------------------------
// Spectral projections.
// ---------------------------------------------------------------------------

// <v, P_A w> with P_A = sum_{i in A} xi_i xi_i*.
inline double spectralProjectionForm(const Eigensystem& es,
                                     const std::vector<int>& A, const Vector& v,
                                     const Vector& w) {
    double sum = 0.0;
    for (int i : A) {
        if (i < 0 || i >= es.values.size())
            throw DomainError("spectralProjectionForm: index out of range");
        if (!es.hasVector(i))
            throw DomainError("spectralProjectionForm: eigenvector not stored");
        const auto xi = es.vectors.col(i);
        sum += v.dot(xi) * xi.dot(w);
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Interlacing.
// ---------------------------------------------------------------------------

struct InterlacingReport {
    bool pass = true;
    int offendingIndex = -1;
    double violation = 0.0;
};

// Rank-one chains: for d > 0, mu_1 >= lambda_1 >= mu_2 >= ...; mirrored for
// d < 0. Slack is relative to the spectral scale.
inline InterlacingReport interlacingCheckRankOne(const Vector& mu,
                                                 const Vector& lambda,
                                                 double d,
                                                 double slack = 1e-10) {
    if (mu.size() != lambda.size())
        throw DomainError("interlacingCheck: dimension mismatch");
    if (d == 0.0) throw DomainError("interlacingCheck: d = 0");
    const int M = static_cast<int>(mu.size());
    const double tol =
        slack * std::max({1.0, std::abs(mu(0)), std::abs(lambda(0))});
    InterlacingReport report;
    auto fail = [&](int idx, double gap) {
        if (gap < -tol && (report.pass || gap < report.violation)) {
            report.pass = false;
            report.offendingIndex = idx;
            report.violation = gap;
        }
    };
    for (int i = 0; i < M; ++i) {
        if (d > 0) {
            fail(i, mu(i) - lambda(i));
            if (i + 1 < M) fail(i, lambda(i) - mu(i + 1));
        } else {
            fail(i, lambda(i) - mu(i));
            if (i + 1 < M) fail(i, mu(i) - lambda(i + 1));
        }
    }
    return report;
}

// General bounded-rank form: mu_i in [lambda_{i+shift}, lambda_{i-shift}]
// with lambda_j = +inf for j < 1 and 0 for j beyond the list.
inline InterlacingReport interlacingCheckGeneral(const Vector& mu,
                                                 const Vector& lambda,
                                                 int shift,
                                                 double slack = 1e-10) {
    const int M = static_cast<int>(mu.size());
    const double tol =
        slack * std::max({1.0, std::abs(mu(0)), std::abs(lambda(0))});
    InterlacingReport report;
    for (int i = 0; i < M; ++i) {
        const int loIdx = i + shift;
        const int hiIdx = i - shift;
        const double lower = loIdx < static_cast<int>(lambda.size())
                                 ? (loIdx < 0 ? std::numeric_limits<double>::infinity()
                                              : lambda(loIdx))
                                 : 0.0;
        const double upper = hiIdx < 0 ? std::numeric_limits<double>::infinity()
                                       : lambda(std::min<int>(hiIdx, lambda.size() - 1));
        if (mu(i) < lower - tol || mu(i) > upper + tol) {
            report.pass = false;
            report.offendingIndex = i;
            report.violation =
                std::max(lower - mu(i), mu(i) - upper);
            return report;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Perturbation identities.
// ---------------------------------------------------------------------------

// Residual of the Woodbury-form identity
//   Sigma^{1/2} (Q - z)^{-1} Sigma^{1/2}
//     = G - G V [sqrt(phi) z / (D^{-1} + W)] V* G,
// with the left side from Q's eigensystem and the right side from H's.
inline double identityResidualPert2(const Population& pop,
                                    const Eigensystem& q,
                                    const Eigensystem& h, Complex z,
                                    const Vector& v, const Vector& w) {
    const double phi = pop.aspect.phi;
    const Vector a = pop.SigmaHalf * v;
    const Vector b = pop.SigmaHalf * w;
    const Complex lhs = resolventForm(q, z, a, b);

    const Complex gvw = resolventForm(h, z, v, w);
    const int r = static_cast<int>(pop.V.cols());
    Complex rhs = gvw;
    if (r > 0) {
        ComplexVector gv(r), gw(r);
        for (int k = 0; k < r; ++k) {
            gv(k) = resolventForm(h, z, pop.V.col(k), v);
            gw(k) = resolventForm(h, z, pop.V.col(k), w);
        }
        ComplexMatrix core =
            pop.d.cwiseInverse().asDiagonal().toDenseMatrix().cast<Complex>() +
            wMatrix(h, pop.V, phi, z);
        Eigen::PartialPivLU<ComplexMatrix> lu(core);
        if (std::abs(lu.determinant()) < 1e-300)
            throw NumericError("identityResidualPert2: singular D^{-1} + W");
        const ComplexVector solved = lu.solve(gw);
        // Plain transpose contraction: G is complex symmetric, not Hermitian.
        rhs -= std::sqrt(phi) * z * (gv.array() * solved.array()).sum();
    }
    return std::abs(lhs - rhs);
}

// Spike-block resolvent of Q expressed through W(z) alone:
//   V* (Q-z)^{-1} V = (1/(sqrt(phi) z)) [D^{-1} - S (D^{-1}+W)^{-1} S],
// with S = sqrt(1 + sqrt(phi) D) / D.
inline ComplexMatrix spikeBlockResolvent(const Population& pop,
                                         const Eigensystem& h, Complex z) {
    const double phi = pop.aspect.phi;
    const int r = static_cast<int>(pop.V.cols());
    ComplexMatrix out(r, r);
    if (r == 0) return out;
    Vector s(r);
    for (int i = 0; i < r; ++i) {
        const double arg = 1.0 + std::sqrt(phi) * pop.d(i);
        if (arg <= 1e-12)
            throw DomainError("spikeBlockResolvent: 1 + sqrt(phi) d at the edge of positivity");
        s(i) = std::sqrt(arg) / pop.d(i);
    }
    ComplexMatrix core =
        pop.d.cwiseInverse().asDiagonal().toDenseMatrix().cast<Complex>() +
        wMatrix(h, pop.V, phi, z);
    ComplexMatrix inv = core.partialPivLu().inverse();
    ComplexMatrix Dinv =
        pop.d.cwiseInverse().asDiagonal().toDenseMatrix().cast<Complex>();
    ComplexMatrix S = s.asDiagonal().toDenseMatrix().cast<Complex>();
    out = (Dinv - S * inv * S) / (std::sqrt(phi) * z);
    return out;
}

// Contour integral of the spike-block resolvent around an isolated
// eigenvalue: reproduces <v_i, P v_j> for the enclosed eigenprojection.
inline Matrix spikeProjectionViaContour(const Population& pop,
                                        const Eigensystem& h, double center,
                                        double radius, int nodes = 256) {
    const int r = static_cast<int>(pop.V.cols());
    ComplexMatrix acc = ComplexMatrix::Zero(r, r);
    for (int k = 0; k < nodes; ++k) {
        const double t = 2.0 * kPi * k / nodes;
        const Complex z = center + radius * Complex(std::cos(t), std::sin(t));
        const Complex dz = radius * Complex(-std::sin(t), std::cos(t)) *
                           (2.0 * kPi / nodes);
        acc += spikeBlockResolvent(pop, h, z) * dz;
    }
    // (Q - z)^{-1} has residue -P at an enclosed eigenvalue.
    const ComplexMatrix proj = -acc / Complex(0.0, 2.0 * kPi);
    return proj.real();
}

}  // namespace spikelab
