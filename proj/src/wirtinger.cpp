#include "kahler/wirtinger.hpp"

#include <cmath>
#include <sstream>

namespace kahler {

namespace {

double sample(const ScalarField& f, NodeIndex node) { return f[node]; }

void require_stencil(bool ok, NodeIndex node, const char* what) {
    if (ok) return;
    std::ostringstream os;
    os << "insufficient stencil at node " << node << ": " << what;
    throw StencilError(os.str());
}

}  // namespace

Eigen::VectorXd real_gradient_at(const ScalarField& f, NodeIndex node) {
    const auto& g = f.grid.geometry;
    require_stencil(f.grid.jet_ready(node), node, "first derivatives need valued neighbours");
    Eigen::VectorXd grad(g.axes());
    auto s = [&](NodeIndex j) { return sample(f, j); };
    for (int a = 0; a < g.axes(); ++a) grad(a) = stencil::first(g, node, a, s);
    return grad;
}

Eigen::MatrixXd real_hessian_at(const ScalarField& f, NodeIndex node) {
    const auto& g = f.grid.geometry;
    require_stencil(f.grid.jet_ready(node), node, "second derivatives need valued neighbours");
    auto s = [&](NodeIndex j) { return sample(f, j); };
    Eigen::MatrixXd hess(g.axes(), g.axes());
    for (int a = 0; a < g.axes(); ++a) {
        for (int b = a; b < g.axes(); ++b) {
            hess(a, b) = stencil::second(g, node, a, b, s);
            hess(b, a) = hess(a, b);
        }
    }
    return hess;
}

CVec wirtinger_gradient_at(const ScalarField& f, NodeIndex node) {
    const auto& g = f.grid.geometry;
    require_stencil(f.grid.jet_ready(node), node, "first derivatives need valued neighbours");
    auto s = [&](NodeIndex j) { return sample(f, j); };
    CVec grad(g.n());
    for (int k = 0; k < g.n(); ++k) grad(k) = stencil::holomorphic(g, node, k, s);
    return grad;
}

WirtingerHessian<double> wirtinger_hessian_at(const ScalarField& f, NodeIndex node) {
    return real_to_wirtinger(RealHessian<double>::from_full(real_hessian_at(f, node)));
}

JetField::JetField(const ScalarField& field) : field_(&field), n_(field.n()) {
    const auto& g = field.grid.geometry;
    const auto nn = static_cast<std::size_t>(n_ * n_);
    slots_.assign(static_cast<std::size_t>(g.size()), -1);
    std::int64_t next = 0;
    for (NodeIndex i = 0; i < g.size(); ++i)
        if (field.grid.jet_ready(i)) slots_[static_cast<std::size_t>(i)] = next++;
    const auto count = static_cast<std::size_t>(next);
    a_.resize(count * nn);
    b_.resize(count * nn);
    m_.resize(count * nn);
    grad_.resize(count * static_cast<std::size_t>(n_));
    invertible_.assign(count, 0);

    for (NodeIndex i = 0; i < g.size(); ++i) {
        const auto s = slot(i);
        if (s < 0) continue;
        const auto off = static_cast<std::size_t>(s) * nn;
        const auto ab = wirtinger_hessian_at(field, i);
        const CVec grad = wirtinger_gradient_at(field, i);
        Eigen::Map<CMat>(a_.data() + off, n_, n_) = ab.A;
        Eigen::Map<CMat>(b_.data() + off, n_, n_) = ab.B;
        Eigen::Map<CVec>(grad_.data() + static_cast<std::size_t>(s) * static_cast<std::size_t>(n_), n_) = grad;
        const double min_abs = eigenvalues(ab.A).cwiseAbs().minCoeff();
        if (min_abs > default_tolerance(ab.A)) {
            invertible_[static_cast<std::size_t>(s)] = 1;
            Eigen::Map<CMat>(m_.data() + off, n_, n_) = schur_complement_M(ab);
        }
    }
}

std::int64_t JetField::require_slot(NodeIndex node) const {
    const auto s = slot(node);
    require_stencil(s >= 0, node, "node has no second-derivative jet");
    return s;
}

CMat JetField::block(const std::vector<std::complex<double>>& store, NodeIndex node) const {
    const auto off = static_cast<std::size_t>(require_slot(node)) * static_cast<std::size_t>(n_ * n_);
    return Eigen::Map<const CMat>(store.data() + off, n_, n_);
}

bool JetField::invertible(NodeIndex node) const {
    const auto s = slot(node);
    return s >= 0 && invertible_[static_cast<std::size_t>(s)];
}

CMat JetField::M(NodeIndex node) const {
    if (!invertible(node)) {
        const CMat a = A(node);
        std::ostringstream os;
        os << "A is singular at node " << node;
        throw SingularMatrixError(os.str(), eigenvalues(a).cwiseAbs().minCoeff());
    }
    return block(m_, node);
}

CVec JetField::grad(NodeIndex node) const {
    const auto s = static_cast<std::size_t>(require_slot(node));
    return Eigen::Map<const CVec>(grad_.data() + s * static_cast<std::size_t>(n_), n_);
}

namespace {

void require_safe(const JetField& jets, NodeIndex node) {
    bool ok = jets.ready(node);
    for (NodeIndex off : jets.geometry().stencil_offsets()) ok = ok && jets.ready(node + off);
    require_stencil(ok, node, "third-order quantities need a radius-2 neighbourhood");
}

void require_invertible(const JetField& jets, NodeIndex node) {
    if (jets.invertible(node)) return;
    (void)jets.M(node);  // throws with the diagnostic
}

}  // namespace

WirtingerJet wirtinger_jet(const JetField& jets, NodeIndex node) {
    require_safe(jets, node);
    require_invertible(jets, node);
    const auto& g = jets.geometry();
    const int n = jets.n();
    WirtingerJet jet;
    jet.node = node;
    jet.u = jets.u(node);
    jet.grad = jets.grad(node);
    jet.hessian = WirtingerHessian<double>(jets.A(node), jets.B(node));
    jet.a_inv = jet.hessian.A.inverse();
    auto a_field = [&](NodeIndex j) { return jets.A(j); };
    auto b_field = [&](NodeIndex j) { return jets.B(j); };
    for (int k = 0; k < n; ++k) {
        jet.dA.push_back(stencil::holomorphic(g, node, k, a_field));
        jet.dA_bar.push_back(stencil::antiholomorphic(g, node, k, a_field));
        jet.dB.push_back(stencil::holomorphic(g, node, k, b_field));
        jet.dB_bar.push_back(stencil::antiholomorphic(g, node, k, b_field));
    }
    return jet;
}

ObstructionTensor obstruction_tensor(const WirtingerJet& jet) {
    ObstructionTensor t;
    const CMat b_abar_inv = jet.hessian.B * jet.inverse_metric();
    for (std::size_t i = 0; i < jet.dB.size(); ++i)
        t.scriptB.push_back(jet.dB[i] - b_abar_inv * jet.dAbar(static_cast<int>(i)));
    return t;
}

double obstruction_relation_residual(const JetField& jets, NodeIndex node) {
    const auto jet = wirtinger_jet(jets, node);
    const auto t = obstruction_tensor(jet);
    const auto& g = jets.geometry();
    auto product = [&](NodeIndex j) -> CMat {
        require_invertible(jets, j);
        return jets.B(j) * jets.A(j).inverse().conjugate();
    };
    double worst = 0.0;
    for (int i = 0; i < jets.n(); ++i) {
        const CMat lhs = stencil::holomorphic(g, node, i, product);
        worst = std::max(worst, max_abs(lhs - t.scriptB[static_cast<std::size_t>(i)] * jet.inverse_metric()));
    }
    return worst;
}

std::string to_string(IdentityKind kind) {
    switch (kind) {
        case IdentityKind::grad: return "GRAD";
        case IdentityKind::dda_bb: return "DDA_BB";
        case IdentityKind::dda_aa: return "DDA_AA";
        case IdentityKind::ddb_ab: return "DDB_AB";
        case IdentityKind::ddb_ba: return "DDB_BA";
    }
    return "?";
}

IdentityKind identity_kind_from_string(const std::string& name) {
    for (auto k : kAllIdentityKinds)
        if (to_string(k) == name) return k;
    throw InvariantError("unknown identity kind '" + name + "'");
}

namespace {

// L[X] = sum_ij G_ij d_i d_jbar X
template <typename F>
CMat elliptic_operator(const GridGeometry& g, NodeIndex node, const CMat& metric, F&& field) {
    const int n = g.n();
    CMat out;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const CMat d = stencil::mixed(g, node, i, j, field);
            if (out.size() == 0)
                out = metric(i, j) * d;
            else
                out += metric(i, j) * d;
        }
    }
    return out;
}

double log_det_hermitian(const CMat& a) {
    Eigen::LLT<CMat> llt(a);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (Eigen::Index k = 0; k < a.rows(); ++k) s += 2.0 * std::log(std::real(llt.matrixLLT()(k, k)));
    return s;
}

}  // namespace

IdentityResidual identity_residual(const JetField& jets, NodeIndex node, IdentityKind kind,
                                   double solution_tolerance) {
    const auto jet = wirtinger_jet(jets, node);
    const auto& g = jets.geometry();
    const int n = jets.n();
    const CMat G = jet.inverse_metric();
    const CMat& A = jet.hessian.A;
    const CMat& B = jet.hessian.B;
    const CMat& Ainv = jet.a_inv;
    const CMat Ainv_bar = G;

    IdentityResidual r;
    const double logdet = log_det_hermitian(A);
    r.equation_violation = std::isfinite(logdet) ? std::abs(logdet - (n + 1) * jet.u)
                                                 : std::numeric_limits<double>::infinity();
    r.non_solution = !(r.equation_violation <= solution_tolerance);

    if (kind == IdentityKind::grad) {
        double worst = 0.0;
        for (int p = 0; p < n; ++p) {
            const std::complex<double> lhs = (Ainv * jet.dA[static_cast<std::size_t>(p)]).trace();
            worst = std::max(worst, std::abs(lhs - double(n + 1) * jet.grad(p)));
        }
        r.residual = worst;
        return r;
    }

    const bool on_A = kind == IdentityKind::dda_bb || kind == IdentityKind::dda_aa;
    auto a_field = [&](NodeIndex j) { return jets.A(j); };
    auto b_field = [&](NodeIndex j) { return jets.B(j); };
    const CMat lhs = on_A ? elliptic_operator(g, node, G, a_field) : elliptic_operator(g, node, G, b_field);

    CMat rhs = (n + 1) * (on_A ? A : B);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
            CMat term;
            switch (kind) {
                case IdentityKind::dda_bb:
                    term = jet.dB_bar[uj] * Ainv_bar * jet.dB_bar[ui].conjugate();
                    break;
                case IdentityKind::dda_aa:
                    term = jet.dA[ui] * Ainv * jet.dA_bar[uj];
                    break;
                case IdentityKind::ddb_ab:
                    term = jet.dA[ui] * Ainv * jet.dB_bar[uj];
                    break;
                case IdentityKind::ddb_ba:
                    term = jet.dB_bar[uj] * Ainv_bar * jet.dAbar(i);
                    break;
                case IdentityKind::grad:
                    break;
            }
            rhs += G(i, j) * term;
        }
    }
    r.residual = max_abs(lhs - rhs);
    return r;
}

EllipticMResidual elliptic_M_residual(const JetField& jets, NodeIndex node) {
    const auto jet = wirtinger_jet(jets, node);
    const auto& g = jets.geometry();
    const int n = jets.n();
    const CMat G = jet.inverse_metric();
    auto m_field = [&](NodeIndex j) { return jets.M(j); };

    EllipticMResidual out;
    out.lhs = elliptic_operator(g, node, G, m_field) - (n + 1) * jets.M(node);

    const auto t = obstruction_tensor(jet);
    out.rhs = CMat::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.rhs -= G(i, j) * t.scriptB[static_cast<std::size_t>(i)] * G *
                       t.scriptB[static_cast<std::size_t>(j)].adjoint();
    out.residual = max_abs(out.lhs - out.rhs);
    const CMat herm = (out.rhs + out.rhs.adjoint()) / 2.0;
    out.rhs_max_eigenvalue = eigenvalues(herm).maxCoeff();
    return out;
}

double directional_elliptic_check(const JetField& jets, NodeIndex node, const CVec& s) {
    require_safe(jets, node);
    require_invertible(jets, node);
    const auto& g = jets.geometry();
    const int n = jets.n();
    const CVec w = s.conjugate();
    auto m_field = [&](NodeIndex j) { return std::real(w.dot(jets.M(j) * w)); };
    const CMat G = jets.A(node).inverse().conjugate();
    std::complex<double> lm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) lm += G(i, j) * stencil::mixed(g, node, i, j, m_field);
    return std::real(lm) - (n + 1) * m_field(node);
}

SweepSummary sweep_identity(const JetField& jets, const std::vector<NodeIndex>& nodes, IdentityKind kind,
                            double solution_tolerance) {
    SweepSummary s;
    s.records.reserve(nodes.size());
    for (NodeIndex node : nodes) {
        NodeRecord rec{node, 0.0, false};
        try {
            const auto r = identity_residual(jets, node, kind, solution_tolerance);
            rec.value = r.residual;
            s.non_solution += r.non_solution;
            if (rec.value > s.max_value || s.argmax < 0) {
                s.max_value = rec.value;
                s.argmax = node;
            }
        } catch (const SingularMatrixError&) {
            rec.flagged = true;
            ++s.flagged;
        }
        s.records.push_back(rec);
    }
    return s;
}

EllipticSweep sweep_elliptic(const JetField& jets, const std::vector<NodeIndex>& nodes) {
    EllipticSweep s;
    s.residual.records.reserve(nodes.size());
    for (NodeIndex node : nodes) {
        NodeRecord rec{node, 0.0, false};
        try {
            const auto r = elliptic_M_residual(jets, node);
            rec.value = r.residual;
            if (rec.value > s.residual.max_value || s.residual.argmax < 0) {
                s.residual.max_value = rec.value;
                s.residual.argmax = node;
            }
            if (r.rhs_max_eigenvalue > s.max_rhs_eigenvalue) {
                s.max_rhs_eigenvalue = r.rhs_max_eigenvalue;
                s.max_rhs_node = node;
            }
            if (r.rhs_max_eigenvalue > 1e-8 * (1.0 + max_abs(r.rhs))) s.sign_ok = false;
            const auto t = obstruction_tensor(wirtinger_jet(jets, node));
            for (const auto& b : t.scriptB) s.max_obstruction = std::max(s.max_obstruction, max_abs(b));
        } catch (const SingularMatrixError&) {
            rec.flagged = true;
            ++s.residual.flagged;
        }
        s.residual.records.push_back(rec);
    }
    return s;
}

std::vector<NodeIndex> nested_nodes(const GridGeometry& coarse, const GridGeometry& fine,
                                    const std::vector<NodeIndex>& coarse_nodes) {
    if (coarse.n() != fine.n()) throw DimensionError("nested grids must share the dimension");
    if (coarse.h() != 2.0 * fine.h()) {
        std::ostringstream os;
        os << "meshes are not nested: h = " << coarse.h() << " and " << fine.h() << " (ratio must be exactly 2)";
        throw InvariantError(os.str());
    }
    std::vector<NodeIndex> out;
    out.reserve(coarse_nodes.size());
    for (NodeIndex c : coarse_nodes) {
        auto k = coarse.lattice(c);
        for (auto& v : k) v *= 2;
        const auto f = fine.node_at_lattice(k);
        if (!f) throw InvariantError("coarse node has no counterpart on the fine mesh");
        out.push_back(*f);
    }
    return out;
}

}  // namespace kahler
