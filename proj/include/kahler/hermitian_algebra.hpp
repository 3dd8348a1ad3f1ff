#pragma once

// Pointwise linear algebra relating the real Hessian H of a function on C^n
// to its complex Hessians A = (u_{i jbar}) and B = (u_{ij}).
//
// Coordinates are z_k = x_k + i y_k and H is partitioned as
//
//     H = [ U   V ]      U = (u_{x_i x_j}),  V = (u_{x_i y_j}),  W = (u_{y_i y_j}).
//         [ V^T W ]
//
// Then A = (U + W + i(V - V^T)) / 4 and B = (U - W - i(V + V^T)) / 4, and
// H > 0 iff A > 0 and M = A - B conj(A)^{-1} conj(B) > 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>

#include "kahler/errors.hpp"

namespace kahler {

template <typename Real>
using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using ComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

/// Largest absolute entry. All matrix norms in this library are entrywise max norms.
template <typename Derived>
auto max_abs(const Eigen::MatrixBase<Derived>& m) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    if (m.size() == 0) return Real(0);
    return static_cast<Real>(m.cwiseAbs().maxCoeff());
}

/// Scale-relative strictness margin: 1e-9 * (1 + max|X|).
template <typename Derived>
auto default_tolerance(const Eigen::MatrixBase<Derived>& m) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    return Real(1e-9) * (Real(1) + max_abs(m));
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(std::abs(m(i, j)))) return false;
    return true;
}

template <typename Derived>
auto hermitian_defect(const Eigen::MatrixBase<Derived>& m) {
    return max_abs(m - m.adjoint());
}

template <typename Derived>
auto symmetric_defect(const Eigen::MatrixBase<Derived>& m) {
    return max_abs(m - m.transpose());
}

namespace detail {
template <typename Derived>
void require_invariant(bool ok, const char* what, const Eigen::MatrixBase<Derived>& m) {
    if (ok) return;
    std::ostringstream os;
    os << what << "\n" << m;
    throw InvariantError(os.str());
}

template <typename Real>
Real structure_tolerance(Real scale) {
    return Real(64) * Eigen::NumTraits<Real>::epsilon() * (Real(1) + scale);
}
}  // namespace detail

template <typename Real>
struct RealHessian {
    RealMatrix<Real> U, V, W;

    RealHessian() = default;
    RealHessian(RealMatrix<Real> u, RealMatrix<Real> v, RealMatrix<Real> w)
        : U(std::move(u)), V(std::move(v)), W(std::move(w)) {
        validate();
    }

    /// Splits a full 2n x 2n symmetric matrix ordered (x_1..x_n, y_1..y_n).
    static RealHessian from_full(const RealMatrix<Real>& h) {
        if (h.rows() != h.cols() || h.rows() % 2 != 0)
            throw DimensionError("real Hessian must be 2n x 2n");
        const Eigen::Index n = h.rows() / 2;
        detail::require_invariant(symmetric_defect(h) <= detail::structure_tolerance(max_abs(h)),
                                  "real Hessian is not symmetric", h);
        return RealHessian(h.topLeftCorner(n, n), h.topRightCorner(n, n),
                           h.bottomRightCorner(n, n));
    }

    int n() const { return static_cast<int>(U.rows()); }

    RealMatrix<Real> full() const {
        const Eigen::Index k = U.rows();
        RealMatrix<Real> h(2 * k, 2 * k);
        h << U, V, V.transpose(), W;
        return h;
    }

    void validate() const {
        const auto k = U.rows();
        if (U.cols() != k || V.rows() != k || V.cols() != k || W.rows() != k || W.cols() != k)
            throw DimensionError("U, V, W blocks must all be n x n");
        detail::require_invariant(all_finite(U) && all_finite(V) && all_finite(W),
                                  "real Hessian has non-finite entries", full());
        detail::require_invariant(symmetric_defect(U) <= detail::structure_tolerance(max_abs(U)),
                                  "U block is not symmetric", U);
        detail::require_invariant(symmetric_defect(W) <= detail::structure_tolerance(max_abs(W)),
                                  "W block is not symmetric", W);
    }
};

template <typename Real>
struct WirtingerHessian {
    ComplexMatrix<Real> A;  // u_{i jbar}, Hermitian
    ComplexMatrix<Real> B;  // u_{ij}, complex symmetric

    WirtingerHessian() = default;
    WirtingerHessian(ComplexMatrix<Real> a, ComplexMatrix<Real> b)
        : A(std::move(a)), B(std::move(b)) {
        validate();
    }

    int n() const { return static_cast<int>(A.rows()); }

    void validate() const {
        const auto k = A.rows();
        if (A.cols() != k || B.rows() != k || B.cols() != k)
            throw DimensionError("A and B must both be n x n");
        detail::require_invariant(all_finite(A) && all_finite(B),
                                  "Wirtinger Hessian has non-finite entries", A);
        detail::require_invariant(hermitian_defect(A) <= detail::structure_tolerance(max_abs(A)),
                                  "A is not Hermitian", A);
        detail::require_invariant(symmetric_defect(B) <= detail::structure_tolerance(max_abs(B)),
                                  "B is not complex symmetric", B);
    }
};

template <typename Real>
struct BlockMatrixQ {
    ComplexMatrix<Real> Q;  // [[A, B], [conj(B), conj(A)]]
    int n() const { return static_cast<int>(Q.rows() / 2); }
};

template <typename Real>
struct EigenReport {
    Real min_eigenvalue = std::numeric_limits<Real>::quiet_NaN();
    bool is_positive_definite = false;
    Real tolerance = Real(0);
    bool computed = true;  // false when a prerequisite failed (e.g. M when A is not PD)

    static EigenReport not_computed(Real tol) {
        EigenReport r;
        r.tolerance = tol;
        r.computed = false;
        return r;
    }
};

template <typename Real>
WirtingerHessian<Real> real_to_wirtinger(const RealHessian<Real>& h) {
    h.validate();
    using C = std::complex<Real>;
    const C i(0, 1);
    const RealMatrix<Real> vt = h.V.transpose();
    ComplexMatrix<Real> a = ((h.U + h.W).template cast<C>() + i * (h.V - vt).template cast<C>()) / Real(4);
    ComplexMatrix<Real> b = ((h.U - h.W).template cast<C>() - i * (h.V + vt).template cast<C>()) / Real(4);
    return WirtingerHessian<Real>(std::move(a), std::move(b));
}

template <typename Real>
RealHessian<Real> wirtinger_to_real(const WirtingerHessian<Real>& ab) {
    ab.validate();
    RealMatrix<Real> u = Real(2) * (ab.A + ab.B).real();
    RealMatrix<Real> w = Real(2) * (ab.A - ab.B).real();
    RealMatrix<Real> v = Real(2) * (ab.A.imag() - ab.B.imag());
    // A Hermitian and B symmetric make U, W symmetric up to the validated defect.
    u = (u + u.transpose().eval()) / Real(2);
    w = (w + w.transpose().eval()) / Real(2);
    return RealHessian<Real>(std::move(u), std::move(v), std::move(w));
}

/// Minimum eigenvalue of a Hermitian (or real symmetric) matrix.
template <typename Derived>
auto min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
    using Plain = typename Derived::PlainObject;
    Eigen::SelfAdjointEigenSolver<Plain> es(m.eval(), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

template <typename Derived>
auto eigenvalues(const Eigen::MatrixBase<Derived>& m) {
    using Plain = typename Derived::PlainObject;
    Eigen::SelfAdjointEigenSolver<Plain> es(m.eval(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().eval();
}

/// Fast certificate: Cholesky of (X - tol I) succeeds iff min eig(X) > tol.
template <typename Derived>
bool is_positive_definite(const Eigen::MatrixBase<Derived>& m,
                          typename Eigen::NumTraits<typename Derived::Scalar>::Real tol) {
    using Plain = typename Derived::PlainObject;
    Plain shifted = m;
    shifted.diagonal().array() -= tol;
    Eigen::LLT<Plain> llt(shifted);
    return llt.info() == Eigen::Success;
}

/// Eigenvalue report for a Hermitian matrix; the decision is min eig > tol.
template <typename Derived>
auto eigen_report(const Eigen::MatrixBase<Derived>& m,
                  std::optional<typename Eigen::NumTraits<typename Derived::Scalar>::Real> tol = std::nullopt) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    EigenReport<Real> r;
    r.tolerance = tol ? *tol : default_tolerance(m);
    r.min_eigenvalue = static_cast<Real>(min_eigenvalue(m));
    r.is_positive_definite = r.min_eigenvalue > r.tolerance;
    return r;
}

/// conj(A)^{-1} conj(B), with the singularity check on A.
template <typename Real>
ComplexMatrix<Real> conj_a_inverse_times_conj_b(const WirtingerHessian<Real>& ab,
                                                 std::optional<Real> tol = std::nullopt) {
    const auto evals = eigenvalues(ab.A);
    const Real min_abs = evals.cwiseAbs().minCoeff();
    const Real t = tol ? *tol : default_tolerance(ab.A);
    if (!(min_abs > t)) {
        std::ostringstream os;
        os << "A is singular to tolerance " << t << " (min |eigenvalue| = " << min_abs << ")";
        throw SingularMatrixError(os.str(), static_cast<double>(min_abs));
    }
    const ComplexMatrix<Real> a_bar = ab.A.conjugate();
    return a_bar.partialPivLu().solve(ab.B.conjugate());
}

/// M = A - B conj(A)^{-1} conj(B), returned exactly Hermitian.
template <typename Real>
ComplexMatrix<Real> schur_complement_M(const WirtingerHessian<Real>& ab,
                                       std::optional<Real> tol = std::nullopt) {
    ComplexMatrix<Real> m = ab.A - ab.B * conj_a_inverse_times_conj_b(ab, tol);
    return (m + m.adjoint().eval()) / Real(2);
}

template <typename Real>
BlockMatrixQ<Real> assemble_Q(const WirtingerHessian<Real>& ab) {
    ab.validate();
    const Eigen::Index k = ab.A.rows();
    BlockMatrixQ<Real> q;
    q.Q.resize(2 * k, 2 * k);
    q.Q << ab.A, ab.B, ab.B.conjugate(), ab.A.conjugate();
    return q;
}

/// The left and right change-of-basis factors with P_L H P_R = 4 Q.
template <typename Real>
ComplexMatrix<Real> left_factor(int n) {
    using C = std::complex<Real>;
    const auto id = ComplexMatrix<Real>::Identity(n, n);
    ComplexMatrix<Real> p(2 * n, 2 * n);
    p << id, C(0, -1) * id, id, C(0, 1) * id;
    return p;
}

template <typename Real>
ComplexMatrix<Real> right_factor(int n) {
    using C = std::complex<Real>;
    const auto id = ComplexMatrix<Real>::Identity(n, n);
    ComplexMatrix<Real> p(2 * n, 2 * n);
    p << id, id, C(0, 1) * id, C(0, -1) * id;
    return p;
}

/// (1/4) P_L H P_R; equals assemble_Q(real_to_wirtinger(H)).
template <typename Real>
ComplexMatrix<Real> q_from_real(const RealHessian<Real>& h) {
    const int n = h.n();
    using C = std::complex<Real>;
    return left_factor<Real>(n) * h.full().template cast<C>() * right_factor<Real>(n) / Real(4);
}

/// max | diag(M, conj(A)) - L Q L^* |  with  L = [[I, -B conj(A)^{-1}], [0, I]].
/// Evaluated in long double: the X conj(A) X^* block cancels terms of size
/// |B|^2 / lambda_min(A), which swamps double precision when cond(A) ~ 1e6.
template <typename Real>
Real congruence_factorization_check(const WirtingerHessian<Real>& ab,
                                    std::optional<Real> tol = std::nullopt) {
    using Wide = long double;
    (void)conj_a_inverse_times_conj_b(ab, tol);  // singularity check
    const WirtingerHessian<Wide> wide(ab.A.template cast<std::complex<Wide>>(),
                                      ab.B.template cast<std::complex<Wide>>());
    const Eigen::Index k = wide.A.rows();
    const ComplexMatrix<Wide> a_bar = wide.A.conjugate();
    // X = B conj(A)^{-1} solves X conj(A) = B, i.e. A X^T = B^T = B.
    const ComplexMatrix<Wide> b_abar_inv = wide.A.partialPivLu().solve(wide.B).transpose();

    ComplexMatrix<Wide> l = ComplexMatrix<Wide>::Identity(2 * k, 2 * k);
    l.topRightCorner(k, k) = -b_abar_inv;
    const ComplexMatrix<Wide> lql = l * assemble_Q(wide).Q * l.adjoint();

    ComplexMatrix<Wide> target = ComplexMatrix<Wide>::Zero(2 * k, 2 * k);
    target.topLeftCorner(k, k) = schur_complement_M(wide, std::optional<Wide>(Wide(0)));
    target.bottomRightCorner(k, k) = a_bar;
    return static_cast<Real>(max_abs(target - lql));
}

template <typename Real>
struct ConvexityTriple {
    EigenReport<Real> h, a, m;
    bool a_near_singular = false;  // |lambda_min(A)| inside the margin: verdict undetermined

    bool complex_test() const { return a.is_positive_definite && m.computed && m.is_positive_definite; }
    bool agrees() const { return h.is_positive_definite == complex_test(); }
};

/// Positive-definiteness of H, A and M at one point. With tol unset each
/// matrix uses its own scale-relative tolerance.
template <typename Real>
ConvexityTriple<Real> convexity_triple(const RealHessian<Real>& h, std::optional<Real> tol = std::nullopt) {
    ConvexityTriple<Real> t;
    const RealMatrix<Real> full = h.full();
    t.h = eigen_report(full, tol);
    const auto ab = real_to_wirtinger(h);
    t.a = eigen_report(ab.A, tol);
    const Real tol_a = t.a.tolerance;
    if (!t.a.is_positive_definite) {
        // Either A is indefinite, or |lambda_min(A)| sits inside the margin.
        t.a_near_singular = std::abs(t.a.min_eigenvalue) <= tol_a;
        t.m = EigenReport<Real>::not_computed(tol ? *tol : Real(0));
        return t;
    }
    const ComplexMatrix<Real> m = schur_complement_M(ab, std::optional<Real>(tol_a));
    t.m = eigen_report(m, tol);
    return t;
}

/// det [[v, v_jbar], [v_i, v_{i jbar}]] for v with Wirtinger gradient (v_i)
/// and mixed Hessian (v_{i jbar}).
template <typename Real>
std::complex<Real> bordered_determinant(Real v, const ComplexVector<Real>& grad, const ComplexMatrix<Real>& ddbar) {
    const Eigen::Index n = grad.size();
    if (ddbar.rows() != n || ddbar.cols() != n) throw DimensionError("bordered_determinant: gradient and Hessian sizes differ");
    ComplexMatrix<Real> m(n + 1, n + 1);
    m(0, 0) = v;
    for (Eigen::Index j = 0; j < n; ++j) {
        m(0, j + 1) = std::conj(grad(j));  // v_jbar
        m(j + 1, 0) = grad(j);             // v_i
    }
    m.bottomRightCorner(n, n) = ddbar;
    return m.determinant();
}

}  // namespace kahler
