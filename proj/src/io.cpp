#include "kahler/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace kahler {

namespace {

template <typename T>
void put(std::ostream& out, T x) {
    out.write(reinterpret_cast<const char*>(&x), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
    T x{};
    if (!in.read(reinterpret_cast<char*>(&x), sizeof(T))) throw IoError(std::string("dump truncated while reading ") + what);
    return x;
}

nlohmann::json number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

nlohmann::json node_or_null(NodeIndex node) {
    if (node < 0) return nullptr;
    return node;
}

nlohmann::json global_min(const GlobalMin& m) { return {{"value", number(m.value)}, {"node", node_or_null(m.node)}}; }

void coords(std::ostream& out, const GridGeometry& geo, NodeIndex node) {
    const Point p = geo.coordinates(node);
    for (Eigen::Index a = 0; a < p.size(); ++a) out << ',' << format_double(p(a));
}

void coord_header(std::ostream& out, int n) {
    for (int k = 1; k <= n; ++k) out << ",x" << k;
    for (int k = 1; k <= n; ++k) out << ",y" << k;
}

}  // namespace

void write_dump(std::ostream& out, const ScalarField& field) {
    field.grid.validate();
    const auto& geo = field.grid.geometry;
    if (geo.n() > 255) throw IoError("dimension does not fit the dump header");
    out.write(kDumpMagic, sizeof(kDumpMagic));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(geo.n()));
    put<double>(out, geo.h());
    for (int d : geo.dims()) put<std::int32_t>(out, d);
    for (int l : geo.lo()) put<std::int32_t>(out, l);
    out.write(reinterpret_cast<const char*>(field.values.data()),
              static_cast<std::streamsize>(field.values.size() * sizeof(double)));
    for (NodeMask m : field.grid.mask) put<std::uint8_t>(out, static_cast<std::uint8_t>(m));
    if (!out) throw IoError("failed writing grid dump");
}

void write_dump(const std::string& path, const ScalarField& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_dump(out, field);
}

ScalarField read_dump(std::istream& in) {
    char magic[sizeof(kDumpMagic)] = {};
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kDumpMagic, sizeof(magic)) != 0)
        throw IoError("magic header mismatch: not a KEGRID1 dump");
    const int n = get<std::uint8_t>(in, "n");
    const double h = get<double>(in, "h");
    if (n < 1) throw IoError("dump header has n = 0");
    if (!(h > 0.0) || !std::isfinite(h)) throw IoError("dump header has a non-positive h");

    std::vector<int> dims(static_cast<std::size_t>(2 * n)), lo(dims.size());
    double size = 1.0;
    for (auto& d : dims) {
        d = get<std::int32_t>(in, "dims");
        if (d < 1) throw IoError("dump has a non-positive extent");
        size *= d;
    }
    for (auto& l : lo) l = get<std::int32_t>(in, "lower corner");
    if (size > 4e9) throw IoError("dump extents are implausibly large");

    ScalarField field{MaskedGrid{GridGeometry(n, h, lo, dims), {}}, {}};
    const auto count = static_cast<std::size_t>(field.grid.geometry.size());
    field.values.resize(count);
    if (!in.read(reinterpret_cast<char*>(field.values.data()), static_cast<std::streamsize>(count * sizeof(double))))
        throw IoError("dump truncated while reading values");
    field.grid.mask.resize(count);
    for (auto& m : field.grid.mask) {
        const auto raw = get<std::uint8_t>(in, "masks");
        if (raw > 2) throw IoError("dump has an unknown mask value");
        m = static_cast<NodeMask>(raw);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes after grid dump");
    try {
        field.validate();
    } catch (const InvariantError& e) {
        throw IoError(std::string("dump is inconsistent: ") + e.what());
    }
    return field;
}

ScalarField read_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_dump(in);
}

std::string format_double(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, r.ptr);
}

void write_field_csv(std::ostream& out, const ScalarField& field) {
    const auto& geo = field.grid.geometry;
    out << "node";
    coord_header(out, geo.n());
    out << ",u,mask\n";
    for (NodeIndex i = 0; i < geo.size(); ++i) {
        if (!field.grid.valued(i)) continue;
        out << i;
        coords(out, geo, i);
        out << ',' << format_double(field[i]) << ',' << static_cast<int>(field.grid.mask[static_cast<std::size_t>(i)])
            << '\n';
    }
}

nlohmann::json to_json(const SolveReport& r) {
    nlohmann::json residuals = nlohmann::json::array(), steps = nlohmann::json::array();
    for (double x : r.residual_history) residuals.push_back(number(x));
    for (double x : r.step_lengths) steps.push_back(number(x));
    const auto& geo = r.field.grid.geometry;
    return {
        {"status", to_string(r.status)},
        {"converged", r.converged()},
        {"iterations", r.iterations},
        {"final_residual", r.residual_history.empty() ? nlohmann::json(nullptr) : number(r.residual_history.back())},
        {"residual_history", residuals},
        {"step_lengths", steps},
        {"positivity_maintained", r.positivity_maintained},
        {"linear_solver", r.linear_solver},
        {"message", r.message},
        {"offending_node", node_or_null(r.offending_node)},
        {"grid",
         {{"n", geo.n()},
          {"h", geo.h()},
          {"nodes", geo.size()},
          {"interior", r.field.grid.count(NodeMask::interior)},
          {"dirichlet", r.field.grid.count(NodeMask::dirichlet)}}},
    };
}

nlohmann::json to_json(const ConvexityCertificate& c) {
    nlohmann::json ids = nlohmann::json::array();
    for (const auto& s : c.identities)
        ids.push_back({{"kind", s.kind},
                       {"max_residual", number(s.max_residual)},
                       {"argmax", node_or_null(s.argmax)},
                       {"flagged", s.flagged},
                       {"non_solution", s.non_solution}});
    return {
        {"verdict", to_string(c.verdict)},
        {"margin", number(c.margin)},
        {"tolerance", kCertificationTolerance},
        {"min_lambda_h", global_min(c.min_h)},
        {"min_lambda_a", global_min(c.min_a)},
        {"min_lambda_m", global_min(c.min_m)},
        {"nodes", c.nodes},
        {"certified", c.certified},
        {"undetermined", c.undetermined},
        {"disagreements", c.disagreements},
        {"singular_a", c.singular_a},
        {"identities", ids},
        {"elliptic_sign_ok", c.elliptic_sign_ok},
        {"max_elliptic_rhs_eigenvalue", number(c.max_elliptic_rhs_eigenvalue)},
    };
}

nlohmann::json to_json(const DirectionalReport& r) {
    nlohmann::json s = nlohmann::json::array();
    for (Eigen::Index k = 0; k < r.s.size(); ++k) s.push_back({r.s(k).real(), r.s(k).imag()});
    return {
        {"s", s},
        {"nodes", r.nodes.size()},
        {"min_m", global_min(r.min_m)},
        {"ring_min_m", global_min(r.ring_min_m)},
        {"ring_positive", r.ring_positive},
        {"all_positive", r.all_positive},
        {"max_check", number(r.max_check)},
        {"max_check_node", node_or_null(r.max_check_node)},
        {"max_relative_check", number(r.max_relative_check)},
        {"max_relative_node", node_or_null(r.max_relative_node)},
        {"elliptic_ok", r.elliptic_ok},
        {"skipped_singular", r.skipped_singular},
    };
}

nlohmann::json to_json(const BoundaryLayerReport& r) {
    return {
        {"r", r.r},
        {"band_nodes", r.band_nodes},
        {"gradient_ok", r.gradient_ok},
        {"min_gradient", number(r.min_gradient)},
        {"min_gradient_node", node_or_null(r.min_gradient_node)},
        {"tangential_ok", r.tangential_ok},
        {"min_tangential", number(r.min_tangential)},
        {"min_tangential_node", node_or_null(r.min_tangential_node)},
        {"full_ok", r.full_ok},
        {"v_threshold", number(r.v_threshold)},
        {"r_empirical", number(r.r_empirical)},
        {"first_full_failure", node_or_null(r.first_full_failure)},
    };
}

void write_certificate_csv(std::ostream& out, const ScalarField& field, const ConvexityCertificate& cert,
                           const std::vector<DirectionalReport>& directions) {
    const auto& geo = field.grid.geometry;
    // Position of each node within every direction's m vector.
    std::vector<std::vector<std::int64_t>> where;
    for (const auto& d : directions) {
        std::vector<std::int64_t> w(static_cast<std::size_t>(geo.size()), -1);
        for (std::size_t k = 0; k < d.nodes.size(); ++k) w[static_cast<std::size_t>(d.nodes[k])] = static_cast<std::int64_t>(k);
        where.push_back(std::move(w));
    }
    out << "node";
    coord_header(out, geo.n());
    out << ",lambda_h,lambda_a,lambda_m";
    for (std::size_t j = 1; j <= directions.size(); ++j) out << ",m_" << j;
    out << '\n';
    auto cell = [&](double x) {
        if (std::isfinite(x)) out << format_double(x);
    };
    for (const auto& rec : cert.records) {
        out << rec.node;
        coords(out, geo, rec.node);
        out << ',';
        cell(rec.lambda_h);
        out << ',';
        cell(rec.lambda_a);
        out << ',';
        cell(rec.lambda_m);
        for (std::size_t j = 0; j < directions.size(); ++j) {
            out << ',';
            const auto k = where[j][static_cast<std::size_t>(rec.node)];
            if (k >= 0) cell(directions[j].m[static_cast<std::size_t>(k)]);
        }
        out << '\n';
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size())))
        throw IoError("cannot write " + path);
}

}  // namespace kahler
