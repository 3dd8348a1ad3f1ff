#pragma once

#include <string>
#include <vector>

#include "kahler/grid.hpp"
#include "kahler/hermitian_algebra.hpp"

namespace kahler {

/// A_h(u) lost positive definiteness at a node.
class PositivityError : public Error {
public:
    PositivityError(const std::string& what, NodeIndex node, double lambda_min)
        : Error(what), node_(node), lambda_min_(lambda_min) {}
    NodeIndex node() const noexcept { return node_; }
    double lambda_min() const noexcept { return lambda_min_; }

private:
    NodeIndex node_;
    double lambda_min_;
};

struct DiscreteResidual {
    std::vector<double> values;  // per grid node; zero off the interior
    double sup_norm = 0.0;
    NodeIndex argmax = -1;
};

/// F(u) = log det A_h(u) - (n+1) u on interior nodes. Throws PositivityError
/// where A_h is not positive definite.
DiscreteResidual discrete_residual(const ScalarField& u);

enum class LinearSolverKind { automatic, direct, iterative };

struct SolverConfig {
    int max_iterations = 50;
    double residual_target = 1e-10;
    double damping_floor = 1.0 / (1 << 20);
    double linear_solver_tolerance = 1e-13;
    LinearSolverKind linear_solver = LinearSolverKind::automatic;
    std::size_t direct_solver_limit = 2000;  // automatic, n >= 2: direct LU up to this many unknowns

    void validate() const;
};

enum class SolveStatus { converged, max_iterations, damping_failed, linear_solver_failed };
std::string to_string(SolveStatus s);

struct SolveReport {
    SolveStatus status = SolveStatus::max_iterations;
    int iterations = 0;
    std::vector<double> residual_history;  // sup norm of F, one entry per iterate
    std::vector<double> step_lengths;      // damping factor of each accepted step
    ScalarField field;
    bool positivity_maintained = true;
    std::string linear_solver;
    std::string message;
    NodeIndex offending_node = -1;

    bool converged() const { return status == SolveStatus::converged; }
};

/// Damped Newton iteration for F(u) = 0 with the dirichlet values held fixed.
/// The linearisation is DF[d] = u^{i jbar} d_i d_jbar d - (n+1) d. Steps are
/// halved until A_h stays positive definite and |F| decreases.
SolveReport newton_solve(const TruncatedGrid& grid, const std::vector<double>& dirichlet, const SolverConfig& config);

/// Same, from an explicit starting field (dirichlet values taken from it).
SolveReport newton_solve(ScalarField initial, const SolverConfig& config);

struct BorderedCheck {
    std::vector<NodeIndex> nodes;
    std::vector<double> residuals;  // |det - (-1)^n|
    double max_residual = 0.0;
    NodeIndex argmax = -1;
};

/// Bordered determinant residual of a v field at every safe node.
BorderedCheck bordered_ma_check(const ScalarField& v);

enum class Transform { u_to_v, v_to_u };

/// v = e^{-u} or u = -log v on valued nodes.
ScalarField transform_u_v(const ScalarField& field, Transform direction);

}  // namespace kahler
