// ke: solve, certify, verify, fuzz-lemma.
//
// Exit codes
//   solve       0 converged, 1 config or I/O error, 2 solver failure
//   certify     0 strictly convex, 1 config or I/O error, 3 degenerate or failed verdict
//   verify      0 all checks hold, 1 config or I/O error, 2 property violated
//   fuzz-lemma  0 no disagreement, 1 bad arguments, 2 disagreement

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "kahler/config.hpp"
#include "kahler/io.hpp"
#include "kahler/lemma_fuzz.hpp"
#include "kahler/pipeline.hpp"

namespace fs = std::filesystem;
using namespace kahler;

namespace {

struct Options {
    std::string config;
    std::vector<std::string> in;
    std::string out;
    std::string meshes;
    std::uint64_t seed = 42;
    bool seed_given = false;
    long long count = 1000;
};

// --out, then the config's output, then KE_OUT_DIR, then the working directory.
fs::path output_dir(const Options& o, const std::string& from_config) {
    fs::path dir = ".";
    if (!o.out.empty())
        dir = o.out;
    else if (!from_config.empty())
        dir = from_config;
    else if (const char* env = std::getenv("KE_OUT_DIR"); env && *env)
        dir = env;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path.string(), j.dump(2) + "\n"); }

template <typename F>
void write_stream(const fs::path& path, F&& f) {
    std::ostringstream os;
    f(os);
    write_text(path.string(), os.str());
}

std::vector<double> parse_meshes(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_fraction(item));
    if (out.empty()) throw ConfigError("--meshes lists no spacing");
    return out;
}

int cmd_solve(const Options& o) {
    if (o.config.empty()) throw ConfigError("solve needs --config");
    const auto config = load_config(o.config);
    SolveRun run;
    try {
        run = run_solve(config);
    } catch (const InvariantError& e) {
        throw ConfigError(e.what());
    } catch (const DimensionError& e) {
        throw ConfigError(e.what());
    }
    const auto dir = output_dir(o, config.output);
    write_json(dir / "solve_report.json", to_json(run.report));
    write_stream(dir / "field.csv", [&](std::ostream& os) { write_field_csv(os, run.report.field); });
    write_dump((dir / "field.kegrid").string(), run.report.field);

    const auto& r = run.report;
    std::cerr << "solve: " << to_string(r.status) << " after " << r.iterations << " iterations, |F| = "
              << (r.residual_history.empty() ? 0.0 : r.residual_history.back()) << "\n";
    if (!r.converged()) {
        std::cerr << "solve: " << r.message << "\n";
        return 2;
    }
    return 0;
}

int cmd_certify(const Options& o) {
    if (o.in.size() != 1) throw ConfigError("certify needs exactly one --in dump");
    const auto field = read_dump(o.in.front());
    std::optional<ExperimentConfig> config;
    if (!o.config.empty()) config = load_config(o.config);
    VerifyConfig verify = config ? config->verify : VerifyConfig{};
    if (o.seed_given) verify.seed = o.seed;

    std::optional<Domain> domain;
    if (config) {
        try {
            domain = make_domain(config->domain);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }
    const auto run = run_certify(field, verify, domain ? &*domain : nullptr, config ? config->epsilon : 0.0);

    const auto dir = output_dir(o, config ? config->output : "");
    write_json(dir / "certificate.json", to_json(run));
    write_stream(dir / "certificate.csv",
                 [&](std::ostream& os) { write_certificate_csv(os, field, run.certificate, run.directions); });

    const auto& c = run.certificate;
    std::cerr << "certify: " << to_string(c.verdict) << ", margin " << c.margin << " at node " << c.min_m.node << ", "
              << c.certified << "/" << c.nodes << " nodes certified, " << c.disagreements << " disagreements\n";
    return c.verdict == Verdict::strictly_convex ? 0 : 3;
}

int cmd_verify(const Options& o) {
    std::optional<ExperimentConfig> config;
    if (!o.config.empty()) config = load_config(o.config);
    const VerifyConfig verify = config ? config->verify : VerifyConfig{};

    std::vector<ScalarField> fields;
    for (const auto& path : o.in) fields.push_back(read_dump(path));
    if (!o.meshes.empty()) {
        const auto hs = parse_meshes(o.meshes);
        if (!o.in.empty()) {
            // Cross-check: the listed spacings must be those of the dumps.
            if (hs.size() != fields.size()) throw ConfigError("--meshes and --in list different numbers of meshes");
            for (std::size_t i = 0; i < hs.size(); ++i)
                if (std::abs(hs[i] - fields[i].h()) > 1e-12 * hs[i])
                    throw ConfigError("--meshes entry " + std::to_string(i + 1) + " does not match the dump's h");
        } else {
            if (!config) throw ConfigError("--meshes without --in needs --config");
            for (double h : hs) {
                try {
                    if (config->verify.source == FieldSource::exact) {
                        fields.push_back(exact_ball_field(*config, h));
                    } else {
                        auto run = run_solve(*config, h);
                        if (!run.report.converged()) {
                            std::cerr << "verify: solve at h=" << h << " failed: " << run.report.message << "\n";
                            return 2;
                        }
                        fields.push_back(std::move(run.report.field));
                    }
                } catch (const InvariantError& e) {
                    throw ConfigError(e.what());
                }
            }
        }
    }
    if (fields.empty()) throw ConfigError("verify needs --in dumps or --config with --meshes");

    VerifyTable table;
    try {
        table = verify_fields(std::move(fields), verify);
    } catch (const InvariantError& e) {
        throw ConfigError(e.what());
    } catch (const DimensionError& e) {
        throw ConfigError(e.what());
    }
    const auto dir = output_dir(o, config ? config->output : "");
    write_stream(dir / "residuals.csv", [&](std::ostream& os) { write_verify_csv(os, table); });
    write_verify_csv(std::cout, table);
    for (const auto& p : table.problems) std::cerr << "verify: " << p << "\n";
    return table.orders_ok && table.sign_ok && table.solution_ok ? 0 : 2;
}

int cmd_fuzz(const Options& o) {
    if (o.count < 1) {
        std::cerr << "fuzz-lemma: --count must be at least 1\n";
        return 1;
    }
    std::vector<LemmaFuzzStats> stats;
    for (int n : {1, 2, 3}) stats.push_back(fuzz_lemma(n, static_cast<std::size_t>(o.count), o.seed));
    const auto summary = format_summary(stats, o.seed);
    std::cout << summary;
    if (!o.out.empty()) write_text((output_dir(o, "") / "fuzz_summary.txt").string(), summary);
    bool bad = false;
    for (const auto& s : stats) {
        for (const auto& h : s.disagreeing) {
            bad = true;
            Eigen::IOFormat full(Eigen::FullPrecision);
            std::cerr << "fuzz-lemma: disagreement at n=" << s.n << ", H =\n" << h.format(full) << "\n";
        }
    }
    return bad ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kahler-Einstein potentials on convex domains: solve, certify, verify, fuzz-lemma"};
    app.require_subcommand(1);
    Options o;

    auto* solve = app.add_subcommand("solve", "Newton solve from a JSON config");
    solve->add_option("--config", o.config, "experiment config (JSON)")->required();
    solve->add_option("--out", o.out, "output directory");

    auto* cert = app.add_subcommand("certify", "convexity certificate of a grid dump");
    cert->add_option("--in", o.in, "grid dump")->required();
    cert->add_option("--config", o.config, "config for directions, seed, band and domain");
    cert->add_option("--seed", o.seed, "direction seed (overrides the config)");
    cert->add_option("--out", o.out, "output directory");

    auto* ver = app.add_subcommand("verify", "identity residual table, with orders across nested meshes");
    ver->add_option("--in", o.in, "grid dump, repeatable");
    ver->add_option("--config", o.config, "config for kinds, or for solving at --meshes");
    ver->add_option("--meshes", o.meshes, "comma separated spacings, e.g. 1/32,1/64");
    ver->add_option("--out", o.out, "output directory");

    auto* fuzz = app.add_subcommand("fuzz-lemma", "random check of H > 0 <=> A > 0 and M > 0 for n = 1, 2, 3");
    fuzz->add_option("--count", o.count, "samples per dimension");
    fuzz->add_option("--seed", o.seed, "seed");
    fuzz->add_option("--out", o.out, "also write fuzz_summary.txt here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    o.seed_given = cert->count("--seed") > 0;

    try {
        if (*solve) return cmd_solve(o);
        if (*cert) return cmd_certify(o);
        if (*ver) return cmd_verify(o);
        if (*fuzz) return cmd_fuzz(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
