#include "kahler/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "kahler/io.hpp"

namespace kahler {

namespace {

TruncatedGrid grid_for(const ExperimentConfig& config, std::optional<double> h) {
    return build_grid(make_domain(config.domain), h.value_or(config.h), config.epsilon, config.grid_options);
}

bool all_safe(const MaskedGrid& g, const std::vector<NodeIndex>& nodes, std::vector<char>& keep) {
    bool any = false;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (keep[k] && !g.safe(nodes[k])) keep[k] = 0;
        any = any || keep[k];
    }
    return any;
}

std::string h_label(double h) {
    std::ostringstream os;
    const double inv = 1.0 / h;
    if (inv == std::round(inv))
        os << "1/" << static_cast<long long>(inv);
    else
        os << h;
    return os.str();
}

}  // namespace

SolveRun run_solve(const ExperimentConfig& config, std::optional<double> h) {
    auto grid = grid_for(config, h);
    const auto data = dirichlet_data(grid, config.boundary);
    auto report = newton_solve(grid, data, config.solver);
    return {std::move(grid), std::move(report)};
}

ScalarField exact_ball_field(const ExperimentConfig& config, std::optional<double> h) {
    const auto* ball = std::get_if<BallSpec>(&config.domain);
    if (!ball) throw ConfigError("exact fields need a ball domain");
    const auto grid = grid_for(config, h);
    const double radius = ball->radius;
    return sample_field(grid.grid, [radius](const Point& p) { return exact_ball_value(p, radius); });
}

bool CertifyRun::directions_positive() const {
    return std::all_of(directions.begin(), directions.end(), [](const auto& d) { return d.all_positive; });
}

bool CertifyRun::directions_elliptic_ok() const {
    return std::all_of(directions.begin(), directions.end(), [](const auto& d) { return d.elliptic_ok; });
}

CertifyRun run_certify(const ScalarField& u, const VerifyConfig& verify, const Domain* domain, double epsilon) {
    CertifyRun run;
    run.certificate = certify(u, CertifyOptions{verify.identities});
    if (verify.directions > 0) {
        const JetField jets(u);
        for (const auto& s : seeded_directions(u.n(), verify.directions, verify.seed))
            run.directions.push_back(directional_m(jets, s, verify.tolerance));
    }
    if (!domain) {
        run.boundary_layer_note = "no domain given";
    } else if (domain->n() != u.n()) {
        run.boundary_layer_note = "domain dimension does not match the field";
    } else {
        const double r = verify.band.value_or(epsilon + 3.0 * u.h());
        try {
            run.boundary_layer = boundary_layer_check(transform_u_v(u, Transform::u_to_v), *domain, {r});
        } catch (const Error& e) {
            run.boundary_layer_note = e.what();
        }
    }
    return run;
}

nlohmann::json to_json(const CertifyRun& run) {
    nlohmann::json dirs = nlohmann::json::array();
    for (const auto& d : run.directions) dirs.push_back(to_json(d));
    nlohmann::json out = to_json(run.certificate);
    out["directions"] = dirs;
    out["directions_positive"] = run.directions_positive();
    out["directions_elliptic_ok"] = run.directions_elliptic_ok();
    if (run.boundary_layer)
        out["boundary_layer"] = to_json(*run.boundary_layer);
    else
        out["boundary_layer"] = {{"skipped", run.boundary_layer_note}};
    return out;
}

VerifyTable verify_fields(std::vector<ScalarField> fields, const VerifyConfig& verify) {
    if (fields.empty()) throw InvariantError("verify needs at least one field");
    std::stable_sort(fields.begin(), fields.end(), [](const auto& a, const auto& b) { return a.h() > b.h(); });

    // Coarse safe nodes, carried down the mesh hierarchy.
    std::vector<std::vector<NodeIndex>> nodes{fields[0].grid.safe_nodes()};
    for (std::size_t i = 1; i < fields.size(); ++i)
        nodes.push_back(nested_nodes(fields[i - 1].grid.geometry, fields[i].grid.geometry, nodes.back()));
    std::vector<char> keep(nodes[0].size(), 1);
    for (std::size_t i = 0; i < fields.size(); ++i)
        if (!all_safe(fields[i].grid, nodes[i], keep)) throw InvariantError("the meshes share no safe node");
    for (auto& list : nodes) {
        std::vector<NodeIndex> kept;
        for (std::size_t k = 0; k < list.size(); ++k)
            if (keep[k]) kept.push_back(list[k]);
        list = std::move(kept);
    }

    VerifyTable table;
    table.compared_nodes = nodes[0].size();
    std::vector<std::string> kinds;
    for (auto k : verify.kinds) kinds.push_back(to_string(k));
    if (verify.elliptic) kinds.push_back("ELLIPTIC_M");
    std::vector<std::vector<VerifyRow>> by_kind(kinds.size());

    for (std::size_t i = 0; i < fields.size(); ++i) {
        const JetField jets(fields[i]);
        const std::string at = " at h=" + h_label(fields[i].h());
        for (std::size_t k = 0; k < verify.kinds.size(); ++k) {
            const auto s = sweep_identity(jets, nodes[i], verify.kinds[k]);
            by_kind[k].push_back({kinds[k], fields[i].h(), s.max_value, s.argmax, std::nullopt});
            if (s.non_solution > 0) {
                table.solution_ok = false;
                NodeIndex first = -1;
                for (NodeIndex node : nodes[i]) {
                    try {
                        if (identity_residual(jets, node, verify.kinds[k]).non_solution) {
                            first = node;
                            break;
                        }
                    } catch (const SingularMatrixError&) {
                    }
                }
                std::ostringstream os;
                os << kinds[k] << at << ": field is not a solution (" << s.non_solution
                   << " nodes violate log det A = (n+1)u), first at node " << first;
                table.problems.push_back(os.str());
            }
        }
        if (verify.elliptic) {
            const auto e = sweep_elliptic(jets, nodes[i]);
            by_kind.back().push_back({kinds.back(), fields[i].h(), e.residual.max_value, e.residual.argmax, std::nullopt});
            if (!e.sign_ok) {
                table.sign_ok = false;
                std::ostringstream os;
                os << "ELLIPTIC_M" << at << ": lambda_max(RHS) = " << e.max_rhs_eigenvalue << " > 0 at node "
                   << e.max_rhs_node;
                table.problems.push_back(os.str());
            }
        }
    }

    for (auto& rows : by_kind) {
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double coarse = rows[i - 1].max_residual, fine = rows[i].max_residual;
            if (coarse <= kResidualFloor) continue;
            rows[i].order = std::log2(coarse / fine);
            if (!(*rows[i].order >= kRequiredOrder)) {
                table.orders_ok = false;
                std::ostringstream os;
                os << rows[i].kind << " at h=" << h_label(rows[i].h) << ": observed order " << *rows[i].order
                   << " < " << kRequiredOrder << ", worst node " << rows[i].argmax;
                table.problems.push_back(os.str());
            }
        }
        table.rows.insert(table.rows.end(), rows.begin(), rows.end());
    }
    return table;
}

void write_verify_csv(std::ostream& out, const VerifyTable& table) {
    out << "kind,h,max_residual,order\n";
    for (const auto& r : table.rows) {
        out << r.kind << ',' << format_double(r.h) << ',' << format_double(r.max_residual) << ',';
        if (r.order) out << format_double(*r.order);
        out << '\n';
    }
}

}  // namespace kahler
