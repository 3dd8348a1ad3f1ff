#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "kahler/domain.hpp"
#include "kahler/grid.hpp"
#include "kahler/wirtinger.hpp"

namespace kahler {

enum class Verdict { strictly_convex, degenerate, failed };
std::string to_string(Verdict v);

/// lambda_min > kCertificationTolerance * (1 + |X|) certifies X > 0.
inline constexpr double kCertificationTolerance = 1e-7;

struct NodeCertificate {
    NodeIndex node = 0;
    double lambda_h = 0.0;
    double lambda_a = 0.0;
    double lambda_m = std::numeric_limits<double>::quiet_NaN();  // NaN when A is not positive definite
    double tol_h = 0.0, tol_a = 0.0, tol_m = 0.0;
    bool h_positive = false;
    bool complex_positive = false;  // A > 0 and M > 0
    bool undetermined = false;      // some |lambda| within 10 tol: no lemma comparison
    bool a_singular = false;        // excluded from the verdict
    bool disagrees = false;
};

struct GlobalMin {
    double value = std::numeric_limits<double>::infinity();
    NodeIndex node = -1;
};

struct IdentitySummary {
    std::string kind;
    double max_residual = 0.0;
    NodeIndex argmax = -1;
    std::size_t flagged = 0;
    std::size_t non_solution = 0;
};

struct ConvexityCertificate {
    Verdict verdict = Verdict::failed;
    double margin = 0.0;  // global min lambda_min(M)
    GlobalMin min_h, min_a, min_m;
    std::size_t nodes = 0;
    std::size_t certified = 0;  // strictly convex nodes
    std::size_t undetermined = 0;
    std::size_t disagreements = 0;
    std::size_t singular_a = 0;
    std::vector<NodeCertificate> records;  // safe nodes in grid order
    std::vector<IdentitySummary> identities;
    bool elliptic_sign_ok = true;
    double max_elliptic_rhs_eigenvalue = 0.0;
};

struct CertifyOptions {
    bool identities = true;  // also sweep the derivative identities and the M equation
};

/// Per safe node: finite-difference real Hessian H, its Wirtinger blocks A and
/// B, and M = A - B conj(A)^{-1} conj(B); a node certifies when all three are
/// positive definite. Verdict is strictly_convex iff every non-singular node
/// certifies and the H test agrees with the (A, M) test wherever decidable,
/// failed on any disagreement or when no node could be tested.
ConvexityCertificate certify(const ScalarField& u, const CertifyOptions& options = {});

struct DirectionalReport {
    CVec s;  // unit norm, first nonzero entry real and positive
    std::vector<NodeIndex> nodes;
    std::vector<double> m;      // s^p M_{p qbar} conj(s^q) at nodes
    std::vector<double> check;  // L[m] - (n+1) m, NaN off safe nodes
    std::vector<double> scale;  // 1 + |L[m]| + (n+1)|m|
    GlobalMin min_m;
    double max_check = -std::numeric_limits<double>::infinity();
    NodeIndex max_check_node = -1;
    double max_relative_check = -std::numeric_limits<double>::infinity();  // max check / scale
    NodeIndex max_relative_node = -1;
    GlobalMin ring_min_m;  // over interior nodes next to the dirichlet band
    bool ring_positive = false;
    bool all_positive = false;
    bool elliptic_ok = false;  // check <= tolerance * scale at every safe node
    std::size_t skipped_singular = 0;
};

/// Unit vector with the phase fixed so that the first nonzero entry is real positive.
CVec canonical_direction(const CVec& s);

/// m field for direction s over interior nodes with invertible A, and the
/// elliptic inequality L[m] <= (n+1) m at safe nodes.
DirectionalReport directional_m(const JetField& jets, const CVec& s, double tolerance = 1e-8);

/// count unit directions in C^n drawn from a seeded normal distribution.
std::vector<CVec> seeded_directions(int n, int count, std::uint64_t seed);

struct BoundaryLayerParams {
    double r = 0.0;  // band 0 < dist(x, boundary) < r
};

struct BoundaryLayerReport {
    double r = 0.0;
    std::size_t band_nodes = 0;
    // (i) grad v != 0
    bool gradient_ok = true;
    double min_gradient = std::numeric_limits<double>::infinity();
    NodeIndex min_gradient_node = -1;
    // (ii) -D^2 v > 0 on the tangent space of the level set
    bool tangential_ok = true;
    double min_tangential = std::numeric_limits<double>::infinity();
    NodeIndex min_tangential_node = -1;
    // (iii) -D^2 v + grad v grad v^T / v > 0 for v <= v_threshold
    double v_threshold = 0.0;
    double r_empirical = 0.0;  // all three hold on band nodes closer than this
    bool full_ok = true;
    NodeIndex first_full_failure = -1;
};

/// Boundary layer argument for v = e^{-u} on jet-ready nodes within distance
/// r of the boundary.
BoundaryLayerReport boundary_layer_check(const ScalarField& v, const Domain& domain, const BoundaryLayerParams& params);

}  // namespace kahler
