#pragma once

// Multi-step runs shared by the command line tool and the acceptance suite.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kahler/config.hpp"
#include "kahler/verifier.hpp"

namespace kahler {

struct SolveRun {
    TruncatedGrid grid;
    SolveReport report;
};

/// Builds the domain and grid from the config (at spacing h when given) and
/// runs Newton. Throws InvariantError/ConfigError when the setup is invalid.
SolveRun run_solve(const ExperimentConfig& config, std::optional<double> h = std::nullopt);

/// Closed-form ball potential sampled on the config's grid. Ball domains only.
ScalarField exact_ball_field(const ExperimentConfig& config, std::optional<double> h = std::nullopt);

struct CertifyRun {
    ConvexityCertificate certificate;
    std::vector<DirectionalReport> directions;
    std::optional<BoundaryLayerReport> boundary_layer;
    std::string boundary_layer_note;  // why the boundary layer was not checked

    bool directions_positive() const;
    bool directions_elliptic_ok() const;
};

/// certify, then directional_m for the configured seeded directions, then the
/// boundary layer check of v = e^{-u} when a domain is given. The band
/// defaults to epsilon + 3h.
CertifyRun run_certify(const ScalarField& u, const VerifyConfig& verify, const Domain* domain = nullptr,
                       double epsilon = 0.0);

nlohmann::json to_json(const CertifyRun& run);

struct VerifyRow {
    std::string kind;
    double h = 0.0;
    double max_residual = 0.0;
    NodeIndex argmax = -1;
    std::optional<double> order;  // against the previous, coarser mesh
};

struct VerifyTable {
    std::vector<VerifyRow> rows;
    std::size_t compared_nodes = 0;
    bool orders_ok = true;
    bool sign_ok = true;
    bool solution_ok = true;
    std::vector<std::string> problems;  // one line per violation, naming the node
};

inline constexpr double kRequiredOrder = 1.9;
/// Residuals at or below this on the coarser mesh are at rounding level and need no order.
inline constexpr double kResidualFloor = 1e-11;

/// Residual table over the coarsest mesh's safe nodes, mapped onto each finer
/// mesh. Fields are sorted coarse to fine; successive spacings must halve.
VerifyTable verify_fields(std::vector<ScalarField> fields, const VerifyConfig& verify);

void write_verify_csv(std::ostream& out, const VerifyTable& table);

}  // namespace kahler
