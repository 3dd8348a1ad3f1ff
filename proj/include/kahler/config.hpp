#pragma once

// Experiment configuration, read from JSON. Unknown keys are errors.
// The schema is documented in docs/config.md.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kahler/domain.hpp"
#include "kahler/grid.hpp"
#include "kahler/solver.hpp"
#include "kahler/wirtinger.hpp"

namespace kahler {

class ConfigError : public Error {
public:
    using Error::Error;
};

enum class FieldSource { solve, exact };

struct VerifyConfig {
    std::vector<IdentityKind> kinds{kAllIdentityKinds.begin(), kAllIdentityKinds.end()};
    bool elliptic = true;
    bool identities = true;  // identity sweep inside certify
    int directions = 16;
    std::uint64_t seed = 0;
    std::optional<double> band;  // boundary layer r; default 2 epsilon
    double tolerance = 1e-8;     // directional elliptic check
    FieldSource source = FieldSource::solve;
};

struct ExperimentConfig {
    DomainSpec domain = BallSpec{};
    double h = 1.0 / 32;
    double epsilon = 0.125;
    GridOptions grid_options;
    BoundaryMode boundary = BoundaryMode::asymptotic;
    SolverConfig solver;
    VerifyConfig verify;
    std::string output;  // empty: not set
};

/// Numbers may be given as JSON numbers or as "p/q" strings.
double parse_fraction(const std::string& text);

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

std::string to_string(BoundaryMode mode);

}  // namespace kahler
