#pragma once

// Finite-difference Wirtinger calculus on grid fields.
//
// Second derivatives of u use the standard 3-point and 4-point central
// differences, exact on quadratics. Third and fourth order quantities are
// central differences of the A and B fields, so every check at a node reads
// u on its radius-2 neighbourhood and converges at O(h^2).
//
// Index convention: G = conj(A^{-1}) holds the inverse metric, G_ij = u^{i jbar},
// and the operator L[X] = u^{i jbar} d_i d_jbar X is sum_ij G_ij d_i d_jbar X.

#include <array>
#include <complex>
#include <string>
#include <type_traits>
#include <vector>

#include "kahler/grid.hpp"
#include "kahler/hermitian_algebra.hpp"

namespace kahler {

using CMat = ComplexMatrix<double>;
using CVec = ComplexVector<double>;

namespace stencil {

template <typename T>
struct complexified {
    using type = T;
};
template <>
struct complexified<double> {
    using type = std::complex<double>;
};
template <typename T>
using complexified_t = typename complexified<std::decay_t<T>>::type;

inline constexpr std::complex<double> I{0.0, 1.0};

/// Central first difference along axis a.
template <typename F>
auto first(const GridGeometry& g, NodeIndex node, int a, F&& f) {
    using T = std::decay_t<decltype(f(node))>;
    return T((f(g.shifted(node, a, 1)) - f(g.shifted(node, a, -1))) / (2.0 * g.h()));
}

/// Central second difference along axes a and b.
template <typename F>
auto second(const GridGeometry& g, NodeIndex node, int a, int b, F&& f) {
    using T = std::decay_t<decltype(f(node))>;
    const double h = g.h();
    if (a == b)
        return T((f(g.shifted(node, a, 1)) - 2.0 * f(node) + f(g.shifted(node, a, -1))) / (h * h));
    return T((f(g.shifted(node, a, 1, b, 1)) - f(g.shifted(node, a, 1, b, -1)) -
              f(g.shifted(node, a, -1, b, 1)) + f(g.shifted(node, a, -1, b, -1))) /
             (4.0 * h * h));
}

/// d_k = (d_{x_k} - i d_{y_k}) / 2.
template <typename F>
auto holomorphic(const GridGeometry& g, NodeIndex node, int k, F&& f) {
    using T = complexified_t<decltype(f(node))>;
    return T(0.5 * (T(first(g, node, k, f)) - I * T(first(g, node, g.n() + k, f))));
}

/// d_kbar = (d_{x_k} + i d_{y_k}) / 2.
template <typename F>
auto antiholomorphic(const GridGeometry& g, NodeIndex node, int k, F&& f) {
    using T = complexified_t<decltype(f(node))>;
    return T(0.5 * (T(first(g, node, k, f)) + I * T(first(g, node, g.n() + k, f))));
}

/// d_i d_jbar = (d_{x_i x_j} + d_{y_i y_j} + i (d_{x_i y_j} - d_{y_i x_j})) / 4.
template <typename F>
auto mixed(const GridGeometry& g, NodeIndex node, int i, int j, F&& f) {
    using T = complexified_t<decltype(f(node))>;
    const int n = g.n();
    return T(0.25 * (T(second(g, node, i, j, f)) + T(second(g, node, n + i, n + j, f)) +
                     I * (T(second(g, node, i, n + j, f)) - T(second(g, node, n + i, j, f)))));
}

}  // namespace stencil

Eigen::VectorXd real_gradient_at(const ScalarField& f, NodeIndex node);
/// Full 2n x 2n finite-difference Hessian, exactly symmetric.
Eigen::MatrixXd real_hessian_at(const ScalarField& f, NodeIndex node);
/// (d_1 f, ..., d_n f).
CVec wirtinger_gradient_at(const ScalarField& f, NodeIndex node);
WirtingerHessian<double> wirtinger_hessian_at(const ScalarField& f, NodeIndex node);

/// A, B, the gradient and (where A is invertible) M at every jet-ready node
/// of a field, stored compactly.
class JetField {
public:
    explicit JetField(const ScalarField& field);

    const ScalarField& field() const { return *field_; }
    const GridGeometry& geometry() const { return field_->grid.geometry; }
    int n() const { return n_; }

    bool ready(NodeIndex node) const { return slot(node) >= 0; }
    bool invertible(NodeIndex node) const;

    CMat A(NodeIndex node) const { return block(a_, node); }
    CMat B(NodeIndex node) const { return block(b_, node); }
    /// Schur complement; throws SingularMatrixError where A is singular.
    CMat M(NodeIndex node) const;
    CVec grad(NodeIndex node) const;
    double u(NodeIndex node) const { return (*field_)[node]; }

private:
    std::int64_t slot(NodeIndex node) const { return slots_[static_cast<std::size_t>(node)]; }
    std::int64_t require_slot(NodeIndex node) const;
    CMat block(const std::vector<std::complex<double>>& store, NodeIndex node) const;

    const ScalarField* field_;
    int n_;
    std::vector<std::int64_t> slots_;
    std::vector<std::complex<double>> a_, b_, m_, grad_;
    std::vector<char> invertible_;
};

/// Third-order Wirtinger data at a node.
struct WirtingerJet {
    NodeIndex node = 0;
    double u = 0.0;
    CVec grad;                       // u_p
    WirtingerHessian<double> hessian;
    CMat a_inv;                      // A^{-1}; u^{i jbar} = a_inv(j, i)
    std::vector<CMat> dA;            // d_k A
    std::vector<CMat> dA_bar;        // d_kbar A
    std::vector<CMat> dB;            // d_k B
    std::vector<CMat> dB_bar;        // d_jbar B

    /// d_k conj(A) = conj(d_kbar A).
    CMat dAbar(int k) const { return dA_bar[static_cast<std::size_t>(k)].conjugate(); }
    /// G = conj(A^{-1}), G_ij = u^{i jbar}.
    CMat inverse_metric() const { return a_inv.conjugate(); }
};

/// Requires a safe node (radius-2 stencil) with invertible A.
WirtingerJet wirtinger_jet(const JetField& jets, NodeIndex node);

struct ObstructionTensor {
    std::vector<CMat> scriptB;  // d_i B - B conj(A^{-1}) d_i conj(A)
};

ObstructionTensor obstruction_tensor(const WirtingerJet& jet);

/// max_i | d_i(B conj(A^{-1})) - scriptB_i conj(A^{-1}) |, the left side by central differences.
double obstruction_relation_residual(const JetField& jets, NodeIndex node);

enum class IdentityKind { grad, dda_bb, dda_aa, ddb_ab, ddb_ba };
inline constexpr std::array<IdentityKind, 5> kAllIdentityKinds = {
    IdentityKind::grad, IdentityKind::dda_bb, IdentityKind::dda_aa, IdentityKind::ddb_ab, IdentityKind::ddb_ba};

std::string to_string(IdentityKind kind);
IdentityKind identity_kind_from_string(const std::string& name);

/// Pointwise violation |log det A - (n+1) u| above this marks a field as a non-solution.
inline constexpr double kDefaultSolutionTolerance = 5e-2;

struct IdentityResidual {
    double residual = 0.0;            // max-entry norm of LHS - RHS
    double equation_violation = 0.0;  // |log det A - (n+1) u| at the node
    bool non_solution = false;
};

/// Residual of one derivative identity of log det A = (n+1) u at a safe node:
///   grad    u^{i jbar} u_{p i jbar} = (n+1) u_p
///   dda_bb  L[A] = u^{i jbar} d_jbar B conj(A^{-1}) d_i conj(B) + (n+1) A
///   dda_aa  L[A] = u^{i jbar} d_i A A^{-1} d_jbar A + (n+1) A
///   ddb_ab  L[B] = u^{i jbar} d_i A A^{-1} d_jbar B + (n+1) B
///   ddb_ba  L[B] = u^{i jbar} d_jbar B conj(A^{-1}) d_i conj(A) + (n+1) B
IdentityResidual identity_residual(const JetField& jets, NodeIndex node, IdentityKind kind,
                                   double solution_tolerance = kDefaultSolutionTolerance);

struct EllipticMResidual {
    CMat lhs;  // L[M] - (n+1) M
    CMat rhs;  // -u^{i jbar} scriptB_i conj(A^{-1}) scriptB_j^*
    double residual = 0.0;
    double rhs_max_eigenvalue = 0.0;
};

EllipticMResidual elliptic_M_residual(const JetField& jets, NodeIndex node);

/// Scalar form for a direction s: L[m] - (n+1) m with m = s^T M conj(s).
double directional_elliptic_check(const JetField& jets, NodeIndex node, const CVec& s);

struct NodeRecord {
    NodeIndex node = 0;
    double value = 0.0;
    bool flagged = false;  // degenerate A in the stencil: no value
};

struct SweepSummary {
    std::vector<NodeRecord> records;  // ordered by node index
    double max_value = 0.0;
    NodeIndex argmax = -1;
    std::size_t flagged = 0;
    std::size_t non_solution = 0;
};

SweepSummary sweep_identity(const JetField& jets, const std::vector<NodeIndex>& nodes, IdentityKind kind,
                            double solution_tolerance = kDefaultSolutionTolerance);

struct EllipticSweep {
    SweepSummary residual;
    double max_rhs_eigenvalue = -std::numeric_limits<double>::infinity();
    NodeIndex max_rhs_node = -1;
    bool sign_ok = true;  // lambda_max(RHS) <= 1e-8 (1 + |RHS|) everywhere
    double max_obstruction = 0.0;
};

EllipticSweep sweep_elliptic(const JetField& jets, const std::vector<NodeIndex>& nodes);

/// Nodes of the finer grid at the physical locations of the given coarse
/// nodes; the grids must nest with h_fine = h_coarse / 2.
std::vector<NodeIndex> nested_nodes(const GridGeometry& coarse, const GridGeometry& fine,
                                    const std::vector<NodeIndex>& coarse_nodes);

}  // namespace kahler
