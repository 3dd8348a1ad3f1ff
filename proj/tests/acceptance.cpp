// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exits non-zero when any criterion fails.

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kahler/io.hpp"
#include "kahler/lemma_fuzz.hpp"
#include "kahler/pipeline.hpp"

using namespace kahler;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, bool pass, const std::string& what) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    failures += !pass;
}

template <typename... T>
void note(const char* fmt, T... args) {
    std::printf("       ");
    std::printf(fmt, args...);
    std::printf("\n");
}

double peak_memory_gb() {
    rusage r{};
    getrusage(RUSAGE_SELF, &r);
    return static_cast<double>(r.ru_maxrss) / (1024.0 * 1024.0);  // ru_maxrss is in KiB
}

ExperimentConfig ball_config(int n, double h, double eps) {
    ExperimentConfig c;
    c.domain = BallSpec{n, 1.0};
    c.h = h;
    c.epsilon = eps;
    c.boundary = BoundaryMode::exact_ball;
    return c;
}

// ---------------------------------------------------------------- 1, 2

void lemma_criteria() {
    const auto t0 = Clock::now();
    std::vector<LemmaFuzzStats> stats;
    for (int n : {1, 2, 3}) stats.push_back(fuzz_lemma(n, 1000, 42));
    const double t = seconds_since(t0);

    std::size_t disagreements = 0, decided = 0, checked = 0;
    double q = 0.0, congruence = 0.0;
    for (const auto& s : stats) {
        disagreements += s.disagreements + s.q_disagreements;
        decided += s.samples - s.undetermined;
        checked += s.congruence_checked;
        q = std::max(q, s.max_q_residual);
        congruence = std::max(congruence, s.max_congruence_residual);
    }
    verdict(1, disagreements == 0 && t < 5.0, "H > 0 <=> (A > 0 and M > 0) on 1000 samples per n in {1,2,3}");
    note("decided %zu of 3000, disagreements %zu, %.2f s (limit 5 s)", decided, disagreements, t);

    verdict(2, q < 1e-12 && congruence < 1e-10 && checked > 0, "|4Q - P H P_R| < 1e-12, congruence residual < 1e-10");
    note("max|4Q - P H P_R| = %.3e, max congruence residual = %.3e over %zu samples with cond(A) < 1e6", q, congruence,
           checked);
}

// ---------------------------------------------------------------- 3

template <typename Real>
Real log_det(const ComplexMatrix<Real>& a) {
    const Eigen::LLT<ComplexMatrix<Real>> llt(a);
    Real sum = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) sum += 2 * std::log(llt.matrixL()(i, i).real());
    return sum;
}

// The metric is evaluated in long double: near |z| = 1 cond(A) ~ 1/(1 - |z|^2),
// and rounding A to double alone moves log det by about 2e-16 cond(A).
void exact_solution_criterion() {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    long double worst_eq = 0;
    double worst_double = 0.0, worst_bordered = 0.0, worst_t = 1.0;
    for (int n : {1, 2}) {
        for (int k = 0; k < 10000; ++k) {
            Point p(2 * n);
            for (int a = 0; a < 2 * n; ++a) p(a) = normal(rng);
            p *= std::pow(unit(rng), 1.0 / (2 * n)) / p.norm();  // uniform in the unit ball
            const CVec z = to_complex(p);

            const auto m = exact_ball_metric<long double>(z.cast<std::complex<long double>>());
            worst_eq = std::max(worst_eq, std::abs(log_det(m.A) - (n + 1) * m.u));
            const auto md = exact_ball_metric<double>(z);
            const double e = std::abs(log_det(md.A) - (n + 1) * md.u);
            if (e > worst_double) {
                worst_double = e;
                worst_t = 1.0 - p.squaredNorm();
            }

            const double v = 1.0 - z.squaredNorm();
            const CVec grad = -z.conjugate();         // d_i v = -conj(z_i)
            const CMat ddbar = -CMat::Identity(n, n);  // d_i d_jbar v
            const auto det = bordered_determinant(v, grad, ddbar);
            worst_bordered = std::max(worst_bordered, std::abs(det - std::pow(-1.0, n)));
        }
    }
    verdict(3, worst_eq < 1e-12L && worst_bordered < 1e-12,
            "exact ball: |log det A - (n+1) u| < 1e-12 and bordered det of 1 - |z|^2 = (-1)^n to 1e-12");
    note("10^4 points per n in {1,2}: max equation residual %.3Le (long double), max bordered residual %.3e",
         worst_eq, worst_bordered);
    note("same points in double: max equation residual %.3e at 1 - |z|^2 = %.2e", worst_double, worst_t);
}

// ---------------------------------------------------------------- 4, 5

struct MeshSet {
    int n;
    double eps;
    std::vector<double> hs;
};

const std::vector<MeshSet> kMeshes = {{1, 0.125, {1.0 / 32, 1.0 / 64, 1.0 / 128}}, {2, 0.5, {1.0 / 8, 1.0 / 16}}};

double min_order(const VerifyTable& t, bool elliptic) {
    double worst = INFINITY;
    for (const auto& r : t.rows)
        if ((r.kind == "ELLIPTIC_M") == elliptic && r.order) worst = std::min(worst, *r.order);
    return worst;
}

// Order of max |scriptB| on nested nodes.
double obstruction_order(const std::vector<ScalarField>& fields, std::vector<double>& maxima) {
    std::vector<NodeIndex> nodes = fields[0].grid.safe_nodes();
    double worst = INFINITY;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) nodes = nested_nodes(fields[i - 1].grid.geometry, fields[i].grid.geometry, nodes);
        const JetField jets(fields[i]);
        maxima.push_back(sweep_elliptic(jets, nodes).max_obstruction);
        if (i > 0) worst = std::min(worst, std::log2(maxima[i - 1] / maxima[i]));
    }
    return worst;
}

struct BallElliptic {
    bool ok = true;
    std::vector<std::string> lines;
};

BallElliptic identity_criteria() {
    const auto t0 = Clock::now();
    bool ok4 = true;
    BallElliptic five;
    std::vector<std::string> lines4;
    for (const auto& set : kMeshes) {
        std::vector<ScalarField> fields;
        for (double h : set.hs) fields.push_back(exact_ball_field(ball_config(set.n, h, set.eps), h));
        const auto table = verify_fields(fields, VerifyConfig{});
        const double o4 = min_order(table, false), o5 = min_order(table, true);
        ok4 = ok4 && o4 >= 1.9;
        std::vector<double> maxima;
        const double ob = obstruction_order(fields, maxima);
        five.ok = five.ok && o5 >= 1.9 && ob >= 1.9 && table.sign_ok;

        std::ostringstream os4, os5;
        os4 << "n=" << set.n << " eps=" << set.eps << ", " << table.compared_nodes << " nested nodes, orders:";
        for (const auto& r : table.rows)
            if (r.kind != "ELLIPTIC_M" && r.order) os4 << " " << r.kind << " " << std::setprecision(3) << *r.order;
        lines4.push_back(os4.str());
        os5 << "ball n=" << set.n << ": ELLIPTIC_M order " << std::setprecision(3) << o5 << ", max|scriptB|";
        for (double m : maxima) os5 << " " << m;
        os5 << " (order " << ob << "), sign " << (table.sign_ok ? "ok" : "violated");
        five.lines.push_back(os5.str());
    }
    const double t = seconds_since(t0);
    verdict(4, ok4 && t < 120.0, "five identity kinds converge at order >= 1.9 on exact ball data");
    for (const auto& l : lines4) note("%s", l.c_str());
    note("%.1f s (limit 120 s); n=2 uses eps = 1/2, the smallest dyadic eps resolvable at h = 1/8", t);
    return five;
}

// ---------------------------------------------------------------- 6

struct Artifacts {
    std::vector<std::string> files;
    bool operator==(const Artifacts& o) const { return files == o.files; }
};

void add_solve(Artifacts& a, const SolveReport& r) {
    a.files.push_back(to_json(r).dump(2));
    std::ostringstream os;
    write_field_csv(os, r.field);
    a.files.push_back(os.str());
}

double interior_error(const ScalarField& u) {
    double e = 0.0;
    for (NodeIndex node : u.grid.interior_nodes())
        e = std::max(e, std::abs(u[node] - exact_ball_value(u.grid.geometry.coordinates(node))));
    return e;
}

Artifacts disc_solve(SolveReport* out = nullptr) {
    const auto run = run_solve(ball_config(1, 1.0 / 64, 0.125));
    Artifacts a;
    add_solve(a, run.report);
    if (out) *out = run.report;
    return a;
}

void solver_criterion(Artifacts& artifacts) {
    SolveReport disc;
    artifacts = disc_solve(&disc);
    const bool disc_ok = disc.converged() && disc.iterations <= 20 && disc.residual_history.back() <= 1e-10;

    std::vector<double> errors;
    bool all_converged = true;
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        const auto r = run_solve(ball_config(1, h, 0.125)).report;
        all_converged = all_converged && r.converged();
        errors.push_back(interior_error(r.field));
    }
    const bool decreasing = all_converged && errors[1] < errors[0] && errors[2] < errors[1];

    const auto t0 = Clock::now();
    const auto ball2 = run_solve(ball_config(2, 1.0 / 8, 0.5)).report;
    const double t = seconds_since(t0);
    const double mem = peak_memory_gb();
    const bool ball2_ok = ball2.converged() && t < 600.0 && mem <= 4.0;

    verdict(6, disc_ok && decreasing && ball2_ok, "Newton converges on the disc and the n=2 ball; error falls with h");
    note("disc h=1/64 eps=1/8: %s in %d iterations, |F| = %.2e", to_string(disc.status).c_str(), disc.iterations,
           disc.residual_history.back());
    note("interior sup error at h = 1/32, 1/64, 1/128: %.3e %.3e %.3e", errors[0], errors[1], errors[2]);
    note("n=2 ball h=1/8 eps=1/2: %s in %d iterations, |F| = %.2e, %.1f s, peak memory %.2f GB (%s)",
           to_string(ball2.status).c_str(), ball2.iterations, ball2.residual_history.back(), t, mem,
           ball2.linear_solver.c_str());
}

// ---------------------------------------------------------------- 5 (ellipsoids), 7

struct Ellipsoid {
    std::vector<double> ax, by;
    double h, eps;
};

const std::vector<Ellipsoid> kEllipsoids = {
    {{1.0}, {2.0}, 1.0 / 64, 0.25},
    {{1.0}, {3.0}, 1.0 / 64, 0.25},
    {{2.0}, {1.5}, 1.0 / 64, 0.25},
    {{1.0, 1.0}, {1.25, 1.0}, 1.0 / 8, 0.6},
    {{1.0, 1.1}, {1.0, 1.2}, 1.0 / 8, 0.6},
    {{1.2, 1.0}, {1.0, 1.1}, 1.0 / 8, 0.6},
};

struct EllipsoidOutcome {
    std::string label;
    bool converged = false;
    ConvexityCertificate cert;
    CertifyRun run;
    bool pass = false;
    std::string line;
};

std::string label(const Ellipsoid& e) {
    std::ostringstream os;
    os << "n=" << e.ax.size() << " ax=(";
    for (std::size_t k = 0; k < e.ax.size(); ++k) os << (k ? "," : "") << e.ax[k];
    os << ") by=(";
    for (std::size_t k = 0; k < e.by.size(); ++k) os << (k ? "," : "") << e.by[k];
    os << ") h=1/" << static_cast<int>(std::round(1.0 / e.h)) << " eps=" << e.eps;
    return os.str();
}

EllipsoidOutcome ellipsoid_pipeline(const Ellipsoid& e, Artifacts& artifacts) {
    ExperimentConfig c;
    c.domain = EllipsoidSpec{e.ax, e.by};
    c.h = e.h;
    c.epsilon = e.eps;
    c.boundary = BoundaryMode::asymptotic_corrected;
    c.verify.directions = 16;
    c.verify.seed = 7;

    EllipsoidOutcome out;
    out.label = label(e);
    const auto solve = run_solve(c);
    add_solve(artifacts, solve.report);
    out.converged = solve.report.converged();
    if (!out.converged) {
        out.line = out.label + ": solve " + to_string(solve.report.status) + ": " + solve.report.message;
        return out;
    }
    const auto& u = solve.report.field;
    out.run = run_certify(u, c.verify, &solve.grid.domain, c.epsilon);
    artifacts.files.push_back(to_json(out.run).dump(2));
    std::ostringstream csv;
    write_certificate_csv(csv, u, out.run.certificate, out.run.directions);
    artifacts.files.push_back(csv.str());

    const auto& cert = out.run.certificate;
    double min_m = INFINITY, worst_rel = -INFINITY;
    NodeIndex worst_node = -1;
    for (const auto& d : out.run.directions) {
        min_m = std::min(min_m, d.min_m.value);
        if (d.max_relative_check > worst_rel) {
            worst_rel = d.max_relative_check;
            worst_node = d.max_relative_node;
        }
    }
    const bool bl = out.run.boundary_layer && out.run.boundary_layer->gradient_ok &&
                    out.run.boundary_layer->tangential_ok && out.run.boundary_layer->full_ok;
    out.pass = cert.verdict == Verdict::strictly_convex && cert.margin > 0.0 && out.run.directions_positive() &&
               out.run.directions_elliptic_ok() && bl;

    std::ostringstream os;
    os << std::setprecision(3) << out.label << ": " << to_string(cert.verdict) << ", margin " << cert.margin
       << ", min m " << min_m << ", max (L[m] - (n+1)m)/scale " << worst_rel;
    if (worst_node >= 0) os << " at (" << u.grid.geometry.coordinates(worst_node).transpose() << ")";
    os << (out.run.directions_elliptic_ok() ? " ok" : " > 1e-8");
    if (out.run.boundary_layer)
        os << ", boundary layer " << (bl ? "ok" : "failed") << " (r_emp " << out.run.boundary_layer->r_empirical << ")";
    else
        os << ", boundary layer skipped: " << out.run.boundary_layer_note;
    out.line = os.str();
    return out;
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    lemma_criteria();
    exact_solution_criterion();
    const auto five = identity_criteria();

    Artifacts ellipsoid_artifacts;
    std::vector<EllipsoidOutcome> outcomes;
    for (const auto& e : kEllipsoids) outcomes.push_back(ellipsoid_pipeline(e, ellipsoid_artifacts));

    bool sign_ok = true;
    std::vector<std::string> sign_lines;
    for (const auto& o : outcomes) {
        if (!o.converged) {
            sign_ok = false;
            continue;
        }
        const auto& c = o.run.certificate;
        sign_ok = sign_ok && c.elliptic_sign_ok;
        std::ostringstream os;
        os << o.label << ": lambda_max(RHS) = " << std::setprecision(3) << c.max_elliptic_rhs_eigenvalue;
        sign_lines.push_back(os.str());
    }
    verdict(5, five.ok && sign_ok,
            "elliptic M identity converges at order >= 1.9, scriptB = O(h^2) on the ball, lambda_max(RHS) <= 0 on ellipsoids");
    for (const auto& l : five.lines) note("%s", l.c_str());
    for (const auto& l : sign_lines) note("%s", l.c_str());

    Artifacts disc_artifacts;
    solver_criterion(disc_artifacts);

    bool all = true;
    for (const auto& o : outcomes) all = all && o.pass;
    verdict(7, all,
            "three ellipsoids per n in {1,2}: strictly convex, m > 0 and L[m] <= (n+1)m + 1e-8 scale for 16 directions");
    for (const auto& o : outcomes) note("%s", o.line.c_str());

    Artifacts disc_again = disc_solve(), ellipsoid_again;
    for (const auto& e : kEllipsoids) ellipsoid_pipeline(e, ellipsoid_again);
    const bool same = disc_again == disc_artifacts && ellipsoid_again == ellipsoid_artifacts;
    verdict(8, same, "repeated runs of criteria 6 and 7 give byte-identical JSON and CSV artifacts");
    note("%zu artifacts compared", disc_artifacts.files.size() + ellipsoid_artifacts.files.size());

    std::printf("%d of 8 criteria failed, %.1f s\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
