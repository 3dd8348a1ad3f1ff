#include "kahler/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

#include "kahler/wirtinger.hpp"

namespace kahler {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

CMat complex_hessian(const ScalarField& u, NodeIndex node) {
    const auto& g = u.grid.geometry;
    const int n = g.n();
    auto s = [&](NodeIndex j) { return u[j]; };
    CMat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = stencil::mixed(g, node, i, j, s);
    return (a + a.adjoint().eval()) / 2.0;
}

[[noreturn]] void positivity_failure(const CMat& a, NodeIndex node, const Point& where) {
    const double lam = eigenvalues(a).minCoeff();
    std::ostringstream os;
    os << "A_h is not positive definite at node " << node << " (" << where.transpose()
       << "), lambda_min = " << lam;
    throw PositivityError(os.str(), node, lam);
}

// Positive-definite factor of A at an interior node, or PositivityError.
Eigen::LLT<CMat> factor(const ScalarField& u, NodeIndex node, CMat& a) {
    a = complex_hessian(u, node);
    Eigen::LLT<CMat> llt(a);
    if (llt.info() != Eigen::Success || !is_positive_definite(a, 0.0))
        positivity_failure(a, node, u.grid.geometry.coordinates(node));
    return llt;
}

double log_det(const Eigen::LLT<CMat>& llt) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < llt.matrixLLT().rows(); ++k) s += 2.0 * std::log(std::real(llt.matrixLLT()(k, k)));
    return s;
}

struct Unknowns {
    std::vector<NodeIndex> nodes;     // interior nodes in grid order
    std::vector<std::int64_t> index;  // grid node -> unknown, -1 when fixed
};

Unknowns number_unknowns(const MaskedGrid& grid) {
    Unknowns u;
    u.nodes = grid.interior_nodes();
    u.index.assign(static_cast<std::size_t>(grid.geometry.size()), -1);
    for (std::size_t k = 0; k < u.nodes.size(); ++k) u.index[static_cast<std::size_t>(u.nodes[k])] = static_cast<std::int64_t>(k);
    return u;
}

// Jacobian of F: per row, sum_ab c_ab D_ab - (n+1) with c the real
// coefficients of u^{i jbar} d_i d_jbar written in x/y second differences.
SparseMatrix jacobian(const ScalarField& u, const Unknowns& unk) {
    const auto& g = u.grid.geometry;
    const int n = g.n();
    const int d = 2 * n;
    const double h2 = g.h() * g.h();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(unk.nodes.size() * (1 + g.stencil_offsets().size()));
    const std::complex<double> I(0.0, 1.0);

    for (std::size_t row = 0; row < unk.nodes.size(); ++row) {
        const NodeIndex node = unk.nodes[row];
        CMat a;
        const auto llt = factor(u, node, a);
        const CMat G = llt.solve(CMat::Identity(n, n)).conjugate();  // G_ij = u^{i jbar}

        CMat c = CMat::Zero(d, d);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const std::complex<double> q = G(i, j) / 4.0;
                c(i, j) += q;
                c(n + i, n + j) += q;
                c(i, n + j) += I * q;
                c(n + i, j) -= I * q;
            }
        }
        auto add = [&](NodeIndex col_node, double w) {
            const auto col = unk.index[static_cast<std::size_t>(col_node)];
            if (col >= 0) trips.emplace_back(static_cast<int>(row), static_cast<int>(col), w);
        };
        double diag = -(n + 1);
        for (int a_ = 0; a_ < d; ++a_) {
            const double caa = std::real(c(a_, a_));
            add(g.shifted(node, a_, 1), caa / h2);
            add(g.shifted(node, a_, -1), caa / h2);
            diag -= 2.0 * caa / h2;
            for (int b = a_ + 1; b < d; ++b) {
                const double cab = std::real(c(a_, b) + c(b, a_)) / (4.0 * h2);
                if (cab == 0.0) continue;
                add(g.shifted(node, a_, 1, b, 1), cab);
                add(g.shifted(node, a_, -1, b, -1), cab);
                add(g.shifted(node, a_, 1, b, -1), -cab);
                add(g.shifted(node, a_, -1, b, 1), -cab);
            }
        }
        add(node, diag);
    }
    const auto m = static_cast<int>(unk.nodes.size());
    SparseMatrix j(m, m);
    j.setFromTriplets(trips.begin(), trips.end());
    return j;
}

struct LinearSolve {
    Eigen::VectorXd x;
    bool ok = false;
    std::string method;
};

LinearSolve solve_linear(const SparseMatrix& j, const Eigen::VectorXd& rhs, int n, const SolverConfig& cfg) {
    LinearSolve out;
    // 4D stencils fill in badly under LU; ILUT-BiCGSTAB is ~3x faster there.
    const bool direct = cfg.linear_solver == LinearSolverKind::direct ||
                        (cfg.linear_solver == LinearSolverKind::automatic &&
                         (n == 1 || static_cast<std::size_t>(j.rows()) <= cfg.direct_solver_limit));
    if (direct) {
        out.method = "sparse-lu";
        Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(j);
        lu.factorize(j);
        if (lu.info() != Eigen::Success) return out;
        out.x = lu.solve(rhs);
        out.ok = lu.info() == Eigen::Success;
        return out;
    }
    out.method = "bicgstab-ilut";
    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>> it;
    it.setTolerance(cfg.linear_solver_tolerance);
    it.setMaxIterations(10000);
    it.preconditioner().setDroptol(1e-4);
    it.preconditioner().setFillfactor(20);
    it.compute(j);
    if (it.info() != Eigen::Success) return out;
    out.x = it.solve(rhs);
    out.ok = it.info() == Eigen::Success;
    return out;
}

}  // namespace

DiscreteResidual discrete_residual(const ScalarField& u) {
    const auto& g = u.grid.geometry;
    const int n = g.n();
    DiscreteResidual r;
    r.values.assign(static_cast<std::size_t>(g.size()), 0.0);
    for (NodeIndex node = 0; node < g.size(); ++node) {
        if (!u.grid.interior(node)) continue;
        CMat a;
        const auto llt = factor(u, node, a);
        const double f = log_det(llt) - (n + 1) * u[node];
        r.values[static_cast<std::size_t>(node)] = f;
        if (std::abs(f) > r.sup_norm || r.argmax < 0) {
            r.sup_norm = std::abs(f);
            r.argmax = node;
        }
    }
    return r;
}

void SolverConfig::validate() const {
    if (max_iterations < 1) throw InvariantError("solver max_iterations must be >= 1");
    if (!(residual_target > 0.0)) throw InvariantError("solver residual_target must be positive");
    if (!(damping_floor > 0.0 && damping_floor <= 1.0)) throw InvariantError("solver damping_floor must lie in (0, 1]");
    if (!(linear_solver_tolerance > 0.0)) throw InvariantError("linear_solver_tolerance must be positive");
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_iterations: return "max_iterations";
        case SolveStatus::damping_failed: return "damping_failed";
        case SolveStatus::linear_solver_failed: return "linear_solver_failed";
    }
    return "?";
}

SolveReport newton_solve(const TruncatedGrid& grid, const std::vector<double>& dirichlet, const SolverConfig& config) {
    return newton_solve(initial_guess(grid, dirichlet), config);
}

SolveReport newton_solve(ScalarField initial, const SolverConfig& config) {
    config.validate();
    initial.validate();
    SolveReport report;
    report.field = std::move(initial);
    auto& u = report.field;
    const Unknowns unk = number_unknowns(u.grid);

    DiscreteResidual f = discrete_residual(u);  // precondition: A_h(u0) > 0
    report.residual_history.push_back(f.sup_norm);

    while (true) {
        if (f.sup_norm <= config.residual_target) {
            report.status = SolveStatus::converged;
            break;
        }
        if (report.iterations >= config.max_iterations) {
            report.status = SolveStatus::max_iterations;
            report.offending_node = f.argmax;
            report.message = "maximum number of Newton iterations reached";
            break;
        }

        const SparseMatrix j = jacobian(u, unk);
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(unk.nodes.size()));
        for (std::size_t k = 0; k < unk.nodes.size(); ++k)
            rhs(static_cast<Eigen::Index>(k)) = -f.values[static_cast<std::size_t>(unk.nodes[k])];
        const auto step = solve_linear(j, rhs, u.n(), config);
        report.linear_solver = step.method;
        if (!step.ok) {
            report.status = SolveStatus::linear_solver_failed;
            report.message = "linear solve of the Newton system failed";
            break;
        }

        bool accepted = false;
        NodeIndex last_bad = f.argmax;
        for (double alpha = 1.0; alpha >= config.damping_floor; alpha /= 2.0) {
            ScalarField trial = u;
            for (std::size_t k = 0; k < unk.nodes.size(); ++k)
                trial[unk.nodes[k]] += alpha * step.x(static_cast<Eigen::Index>(k));
            try {
                DiscreteResidual ft = discrete_residual(trial);
                if (ft.sup_norm < f.sup_norm) {
                    u = std::move(trial);
                    f = std::move(ft);
                    report.step_lengths.push_back(alpha);
                    accepted = true;
                    break;
                }
                last_bad = ft.argmax;
            } catch (const PositivityError& e) {
                last_bad = e.node();
            }
        }
        if (!accepted) {
            report.status = SolveStatus::damping_failed;
            report.offending_node = last_bad;
            std::ostringstream os;
            os << "no damped step below the floor " << config.damping_floor
               << " kept A_h positive definite and decreased |F|; last offending node " << last_bad;
            report.message = os.str();
            break;
        }
        ++report.iterations;
        report.residual_history.push_back(f.sup_norm);
    }
    return report;
}

BorderedCheck bordered_ma_check(const ScalarField& v) {
    BorderedCheck out;
    const double target = (v.n() % 2 == 0) ? 1.0 : -1.0;
    for (NodeIndex node : v.grid.safe_nodes()) {
        const auto ab = wirtinger_hessian_at(v, node);
        const double r = std::abs(bordered_determinant(v[node], wirtinger_gradient_at(v, node), ab.A) - target);
        out.nodes.push_back(node);
        out.residuals.push_back(r);
        if (r > out.max_residual || out.argmax < 0) {
            out.max_residual = r;
            out.argmax = node;
        }
    }
    return out;
}

ScalarField transform_u_v(const ScalarField& field, Transform direction) {
    ScalarField out = field;
    for (NodeIndex i = 0; i < field.grid.geometry.size(); ++i) {
        if (!field.grid.valued(i)) continue;
        if (direction == Transform::u_to_v) {
            out[i] = std::exp(-field[i]);
        } else {
            if (!(field[i] > 0.0)) {
                std::ostringstream os;
                os << "v must be positive to take -log v; v = " << field[i] << " at node " << i;
                throw InvariantError(os.str());
            }
            out[i] = -std::log(field[i]);
        }
    }
    return out;
}

}  // namespace kahler
