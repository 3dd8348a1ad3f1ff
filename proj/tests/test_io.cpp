#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "kahler/config.hpp"
#include "kahler/io.hpp"
#include "kahler/pipeline.hpp"

using namespace kahler;

namespace {

ScalarField disc_field(double h = 1.0 / 16) {
    const auto g = build_grid(make_domain(BallSpec{1, 1.0}), h, 0.25);
    return sample_field(g.grid, [](const Point& p) { return exact_ball_value(p); });
}

std::string dump_bytes(const ScalarField& f) {
    std::ostringstream os;
    write_dump(os, f);
    return os.str();
}

ScalarField reread(const std::string& bytes) {
    std::istringstream is(bytes);
    return read_dump(is);
}

}  // namespace

TEST(Dump, HeaderLayout) {
    const auto f = disc_field();
    const auto bytes = dump_bytes(f);
    ASSERT_GE(bytes.size(), kDumpHeaderBytes);
    EXPECT_EQ(bytes.substr(0, 7), "KEGRID1");
    EXPECT_EQ(static_cast<int>(bytes[7]), 1);
    double h = 0.0;
    std::memcpy(&h, bytes.data() + 8, 8);
    EXPECT_EQ(h, 1.0 / 16);
    const std::size_t nodes = static_cast<std::size_t>(f.grid.geometry.size());
    EXPECT_EQ(bytes.size(), 16 + 4 * 4 + nodes * 9);
}

TEST(Dump, RoundTripIsBitExact) {
    auto f = disc_field();
    f.values[0] = -0.0;  // exterior values survive too
    const auto g = reread(dump_bytes(f));
    EXPECT_EQ(g.grid.geometry.dims(), f.grid.geometry.dims());
    EXPECT_EQ(g.grid.geometry.lo(), f.grid.geometry.lo());
    EXPECT_EQ(g.grid.mask, f.grid.mask);
    ASSERT_EQ(g.values.size(), f.values.size());
    EXPECT_EQ(std::memcmp(g.values.data(), f.values.data(), f.values.size() * sizeof(double)), 0);
    EXPECT_EQ(dump_bytes(g), dump_bytes(f));
}

TEST(Dump, CorruptInputs) {
    const auto bytes = dump_bytes(disc_field());
    auto bad = bytes;
    bad[0] = 'X';
    try {
        reread(bad);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("magic header mismatch"), std::string::npos);
    }
    EXPECT_THROW(reread(bytes.substr(0, 5)), IoError);
    EXPECT_THROW(reread(bytes.substr(0, bytes.size() - 1)), IoError);
    EXPECT_THROW(reread(bytes + "x"), IoError);
    bad = bytes;
    bad[bytes.size() - 1] = 7;  // mask value
    EXPECT_THROW(reread(bad), IoError);
}

TEST(Csv, RowsAndRoundTrip) {
    const auto f = disc_field();
    std::ostringstream os;
    write_field_csv(os, f);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "node,x1,y1,u,mask");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        ASSERT_EQ(cells.size(), 5u);
        const NodeIndex node = std::stoll(cells[0]);
        EXPECT_EQ(std::stod(cells[3]), f[node]);
        ++rows;
    }
    EXPECT_EQ(rows, f.grid.count(NodeMask::interior) + f.grid.count(NodeMask::dirichlet));
}

TEST(Csv, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0 / 64), "0.015625");
    const double x = 1.0 / 3.0;
    EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Json, SolveReportFields) {
    const auto g = build_grid(make_domain(BallSpec{1, 1.0}), 1.0 / 32, 0.125);
    const auto r = newton_solve(g, dirichlet_data(g, BoundaryMode::exact_ball), SolverConfig{});
    const auto j = to_json(r);
    EXPECT_EQ(j["status"], "converged");
    EXPECT_EQ(j["iterations"], r.iterations);
    EXPECT_EQ(j["residual_history"].size(), r.residual_history.size());
    EXPECT_EQ(j["offending_node"], nullptr);
    EXPECT_EQ(j["grid"]["h"], 1.0 / 32);
}

TEST(Config, FullSchema) {
    const auto c = parse_config(nlohmann::json::parse(R"({
        "domain": {"kind": "ellipsoid", "ax": [1, 1.5], "by": ["1/2", 2]},
        "grid": {"h": "1/8", "epsilon": 0.6, "node_cap": 1000000},
        "boundary": "asymptotic",
        "solver": {"max_iterations": 9, "residual_target": 1e-9, "linear_solver": "direct"},
        "verify": {"kinds": ["GRAD", "DDB_AB"], "elliptic": false, "directions": 4, "seed": 3, "band": 0.3},
        "output": "out"
    })"));
    const auto& e = std::get<EllipsoidSpec>(c.domain);
    EXPECT_EQ(e.by[0], 0.5);
    EXPECT_EQ(c.h, 0.125);
    EXPECT_EQ(c.grid_options.node_cap, 1000000);
    EXPECT_EQ(c.boundary, BoundaryMode::asymptotic);
    EXPECT_EQ(c.solver.max_iterations, 9);
    EXPECT_EQ(c.solver.linear_solver, LinearSolverKind::direct);
    EXPECT_EQ(c.verify.kinds.size(), 2u);
    EXPECT_FALSE(c.verify.elliptic);
    EXPECT_EQ(c.verify.seed, 3u);
    EXPECT_EQ(*c.verify.band, 0.3);
    EXPECT_EQ(c.output, "out");
}

TEST(Config, DefaultBoundaryByDomain) {
    auto c = parse_config(nlohmann::json::parse(R"({"domain": {"kind": "ball"}, "grid": {"h": 0.1, "epsilon": 0.5}})"));
    EXPECT_EQ(c.boundary, BoundaryMode::exact_ball);
    c = parse_config(nlohmann::json::parse(
        R"({"domain": {"kind": "ellipsoid", "ax": [1], "by": [2]}, "grid": {"h": 0.1, "epsilon": 0.5}})"));
    EXPECT_EQ(c.boundary, BoundaryMode::asymptotic_corrected);
}

TEST(Config, UnknownKeysRejected) {
    const char* bad[] = {
        R"({"domain": {"kind": "ball"}, "grid": {"h": 0.1, "epsilon": 0.5}, "extra": 1})",
        R"({"domain": {"kind": "ball", "centre": 0}, "grid": {"h": 0.1, "epsilon": 0.5}})",
        R"({"domain": {"kind": "ball"}, "grid": {"h": 0.1, "epsilon": 0.5, "eps": 1}})",
        R"({"domain": {"kind": "ball"}, "grid": {"h": 0.1, "epsilon": 0.5}, "solver": {"tol": 1}})",
        R"({"domain": {"kind": "ball"}, "grid": {"h": 0.1, "epsilon": 0.5}, "verify": {"dirs": 1}})",
    };
    for (const char* text : bad) EXPECT_THROW(parse_config(nlohmann::json::parse(text)), ConfigError) << text;
}

TEST(Config, BadValuesRejected) {
    const char* bad[] = {
        R"({"domain": {"kind": "torus"}, "grid": {"h": 0.1, "epsilon": 0.5}})",
        R"({"domain": {"kind": "ball"}, "grid": {"h": "1/0", "epsilon": 0.5}})",
        R"({"domain": {"kind": "ball"}, "grid": {"h": "abc", "epsilon": 0.5}})",
        R"({"domain": {"kind": "ball"}, "grid": {"epsilon": 0.5}})",
        R"({"domain": {"kind": "ball"}, "grid": {"h": 0.1, "epsilon": 0.5}, "boundary": "exact"})",
        R"({"domain": {"kind": "ball"}, "grid": {"h": 0.1, "epsilon": 0.5}, "verify": {"kinds": ["NOPE"]}})",
        R"({"domain": {"kind": "ball"}, "grid": {"h": 0.1, "epsilon": 0.5}, "verify": {"seed": -1}})",
        R"({"domain": {"kind": "ball"}, "grid": {"h": 0.1, "epsilon": 0.5}, "solver": {"max_iterations": 0}})",
        R"({"grid": {"h": 0.1, "epsilon": 0.5}})",
    };
    for (const char* text : bad) EXPECT_THROW(parse_config(nlohmann::json::parse(text)), ConfigError) << text;
}

TEST(Config, Fractions) {
    EXPECT_EQ(parse_fraction("1/64"), 1.0 / 64);
    EXPECT_EQ(parse_fraction("0.25"), 0.25);
    EXPECT_THROW(parse_fraction("1/"), ConfigError);
    EXPECT_THROW(parse_fraction("1/2x"), ConfigError);
}

TEST(VerifyTable, ExactDiscOrders) {
    ExperimentConfig c;
    c.domain = BallSpec{1, 1.0};
    c.epsilon = 0.125;
    std::vector<ScalarField> fields;
    for (double h : {1.0 / 64, 1.0 / 32}) fields.push_back(exact_ball_field(c, h));  // any order
    const auto t = verify_fields(fields, VerifyConfig{});
    EXPECT_TRUE(t.orders_ok);
    EXPECT_TRUE(t.sign_ok);
    EXPECT_TRUE(t.solution_ok);
    EXPECT_EQ(t.rows.size(), 12u);
    for (std::size_t k = 0; k < t.rows.size(); k += 2) {
        EXPECT_EQ(t.rows[k].h, 1.0 / 32);
        EXPECT_FALSE(t.rows[k].order);
        ASSERT_TRUE(t.rows[k + 1].order);
        EXPECT_GT(*t.rows[k + 1].order, 1.9);
    }
}

TEST(VerifyTable, NonNestedMeshesRejected) {
    ExperimentConfig c;
    c.domain = BallSpec{1, 1.0};
    c.epsilon = 0.125;
    std::vector<ScalarField> fields{exact_ball_field(c, 1.0 / 32), exact_ball_field(c, 1.0 / 48)};
    EXPECT_THROW(verify_fields(fields, VerifyConfig{}), InvariantError);
}

TEST(VerifyTable, NonSolutionFlagged) {
    const auto g = build_grid(make_domain(BallSpec{1, 1.0}), 1.0 / 32, 0.125);
    const auto f = sample_field(g.grid, [](const Point& p) { return p.squaredNorm(); });
    const auto t = verify_fields({f}, VerifyConfig{});
    EXPECT_FALSE(t.solution_ok);
    ASSERT_FALSE(t.problems.empty());
    EXPECT_EQ(t.problems.front().rfind("GRAD", 0), 0u);
    EXPECT_NE(t.problems.front().find("node"), std::string::npos);
}
