#include "kahler/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace kahler {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!ok.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
    }
}

double real(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return parse_fraction(j.get<std::string>());
    throw ConfigError(where + " must be a number or a \"p/q\" string");
}

template <typename T>
T integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
        if (j.is_number_unsigned()) return j.get<T>();
        if (j.get<std::int64_t>() < 0) throw ConfigError(where + " must be non-negative");
    }
    return j.get<T>();
}

bool boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) throw ConfigError(where + " must be true or false");
    return j.get<bool>();
}

std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + " must be a string");
    return j.get<std::string>();
}

std::vector<double> reals(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + " must be an array");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(real(x, where));
    return out;
}

DomainSpec parse_domain(const json& j) {
    if (!j.is_object() || !j.contains("kind")) throw ConfigError("domain needs a \"kind\"");
    const auto kind = text(j["kind"], "domain.kind");
    if (kind == "ball") {
        only_keys(j, "domain", {"kind", "radius", "n"});
        BallSpec b;
        if (j.contains("radius")) b.radius = real(j["radius"], "domain.radius");
        if (j.contains("n")) b.n = integer<int>(j["n"], "domain.n");
        return b;
    }
    if (kind == "ellipsoid") {
        only_keys(j, "domain", {"kind", "ax", "by"});
        if (!j.contains("ax") || !j.contains("by")) throw ConfigError("ellipsoid needs \"ax\" and \"by\"");
        return EllipsoidSpec{reals(j["ax"], "domain.ax"), reals(j["by"], "domain.by")};
    }
    throw ConfigError("unknown domain kind \"" + kind + "\"");
}

BoundaryMode parse_boundary(const std::string& s) {
    if (s == "exact-ball") return BoundaryMode::exact_ball;
    if (s == "asymptotic") return BoundaryMode::asymptotic;
    if (s == "asymptotic-corrected") return BoundaryMode::asymptotic_corrected;
    throw ConfigError("unknown boundary mode \"" + s + "\"");
}

void parse_solver(const json& j, SolverConfig& c) {
    only_keys(j, "solver", {"max_iterations", "residual_target", "damping_floor", "linear_solver_tolerance",
                            "linear_solver", "direct_solver_limit"});
    if (j.contains("max_iterations")) c.max_iterations = integer<int>(j["max_iterations"], "solver.max_iterations");
    if (j.contains("residual_target")) c.residual_target = real(j["residual_target"], "solver.residual_target");
    if (j.contains("damping_floor")) c.damping_floor = real(j["damping_floor"], "solver.damping_floor");
    if (j.contains("linear_solver_tolerance"))
        c.linear_solver_tolerance = real(j["linear_solver_tolerance"], "solver.linear_solver_tolerance");
    if (j.contains("direct_solver_limit"))
        c.direct_solver_limit = integer<std::size_t>(j["direct_solver_limit"], "solver.direct_solver_limit");
    if (j.contains("linear_solver")) {
        const auto s = text(j["linear_solver"], "solver.linear_solver");
        if (s == "auto")
            c.linear_solver = LinearSolverKind::automatic;
        else if (s == "direct")
            c.linear_solver = LinearSolverKind::direct;
        else if (s == "iterative")
            c.linear_solver = LinearSolverKind::iterative;
        else
            throw ConfigError("solver.linear_solver must be auto, direct or iterative");
    }
    try {
        c.validate();
    } catch (const InvariantError& e) {
        throw ConfigError(std::string("solver: ") + e.what());
    }
}

void parse_verify(const json& j, VerifyConfig& v) {
    only_keys(j, "verify", {"kinds", "elliptic", "identities", "directions", "seed", "band", "tolerance", "source"});
    if (j.contains("kinds")) {
        if (!j["kinds"].is_array()) throw ConfigError("verify.kinds must be an array");
        v.kinds.clear();
        for (const auto& k : j["kinds"]) {
            try {
                v.kinds.push_back(identity_kind_from_string(text(k, "verify.kinds")));
            } catch (const InvariantError& e) {
                throw ConfigError(std::string("verify.kinds: ") + e.what());
            }
        }
    }
    if (j.contains("elliptic")) v.elliptic = boolean(j["elliptic"], "verify.elliptic");
    if (j.contains("identities")) v.identities = boolean(j["identities"], "verify.identities");
    if (j.contains("directions")) v.directions = integer<int>(j["directions"], "verify.directions");
    if (v.directions < 0) throw ConfigError("verify.directions must be non-negative");
    if (j.contains("seed")) v.seed = integer<std::uint64_t>(j["seed"], "verify.seed");
    if (j.contains("band")) {
        v.band = real(j["band"], "verify.band");
        if (!(*v.band > 0.0)) throw ConfigError("verify.band must be positive");
    }
    if (j.contains("tolerance")) {
        v.tolerance = real(j["tolerance"], "verify.tolerance");
        if (!(v.tolerance > 0.0)) throw ConfigError("verify.tolerance must be positive");
    }
    if (j.contains("source")) {
        const auto s = text(j["source"], "verify.source");
        if (s == "solve")
            v.source = FieldSource::solve;
        else if (s == "exact")
            v.source = FieldSource::exact;
        else
            throw ConfigError("verify.source must be solve or exact");
    }
}

}  // namespace

double parse_fraction(const std::string& s) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        const auto slash = s.find('/');
        if (slash == std::string::npos) {
            value = std::stod(s, &used);
            if (used != s.size()) throw ConfigError("");
        } else {
            const std::string num = s.substr(0, slash), den = s.substr(slash + 1);
            const double p = std::stod(num, &used);
            if (used != num.size()) throw ConfigError("");
            const double q = std::stod(den, &used);
            if (used != den.size() || q == 0.0) throw ConfigError("");
            value = p / q;
        }
    } catch (const std::exception&) {
        throw ConfigError("cannot read \"" + s + "\" as a number or fraction");
    }
    if (!std::isfinite(value)) throw ConfigError("\"" + s + "\" is not finite");
    return value;
}

ExperimentConfig parse_config(const json& j) {
    only_keys(j, "config", {"domain", "grid", "boundary", "solver", "verify", "output"});
    ExperimentConfig c;
    if (!j.contains("domain")) throw ConfigError("config needs a \"domain\"");
    c.domain = parse_domain(j["domain"]);
    if (!j.contains("grid")) throw ConfigError("config needs a \"grid\"");
    const auto& g = j["grid"];
    only_keys(g, "grid", {"h", "epsilon", "node_cap"});
    if (!g.contains("h") || !g.contains("epsilon")) throw ConfigError("grid needs \"h\" and \"epsilon\"");
    c.h = real(g["h"], "grid.h");
    c.epsilon = real(g["epsilon"], "grid.epsilon");
    if (g.contains("node_cap")) c.grid_options.node_cap = integer<std::int64_t>(g["node_cap"], "grid.node_cap");

    c.boundary = std::holds_alternative<BallSpec>(c.domain) ? BoundaryMode::exact_ball : BoundaryMode::asymptotic_corrected;
    if (j.contains("boundary")) c.boundary = parse_boundary(text(j["boundary"], "boundary"));
    if (j.contains("solver")) parse_solver(j["solver"], c.solver);
    if (j.contains("verify")) parse_verify(j["verify"], c.verify);
    if (j.contains("output")) c.output = text(j["output"], "output");
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(j);
}

std::string to_string(BoundaryMode mode) {
    switch (mode) {
        case BoundaryMode::exact_ball: return "exact-ball";
        case BoundaryMode::asymptotic: return "asymptotic";
        case BoundaryMode::asymptotic_corrected: return "asymptotic-corrected";
    }
    return "?";
}

}  // namespace kahler
