#include "kahler/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace kahler {

namespace {

double cert_tol(double max_entry) { return kCertificationTolerance * (1.0 + max_entry); }

void update(GlobalMin& g, double v, NodeIndex node) {
    if (v < g.value || g.node < 0) {
        g.value = v;
        g.node = node;
    }
}

NodeCertificate certify_node(const ScalarField& u, NodeIndex node) {
    NodeCertificate c;
    c.node = node;
    const Eigen::MatrixXd h = real_hessian_at(u, node);
    const auto ab = real_to_wirtinger(RealHessian<double>::from_full(h));

    c.tol_h = cert_tol(max_abs(h));
    c.lambda_h = min_eigenvalue(h);
    c.tol_a = cert_tol(max_abs(ab.A));
    c.lambda_a = min_eigenvalue(ab.A);
    c.h_positive = c.lambda_h > c.tol_h;
    c.undetermined = std::abs(c.lambda_h) <= 10.0 * c.tol_h || std::abs(c.lambda_a) <= 10.0 * c.tol_a;

    if (std::abs(c.lambda_a) <= c.tol_a) {
        c.a_singular = true;
        return c;
    }
    if (c.lambda_a > c.tol_a) {
        const CMat m = schur_complement_M(ab, std::optional<double>(c.tol_a));
        c.tol_m = cert_tol(max_abs(m));
        c.lambda_m = min_eigenvalue(m);
        c.complex_positive = c.lambda_m > c.tol_m;
        c.undetermined = c.undetermined || std::abs(c.lambda_m) <= 10.0 * c.tol_m;
    }
    c.disagrees = !c.undetermined && c.h_positive != c.complex_positive;
    return c;
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::strictly_convex: return "strictly-convex";
        case Verdict::degenerate: return "degenerate";
        case Verdict::failed: return "failed";
    }
    return "?";
}

ConvexityCertificate certify(const ScalarField& u, const CertifyOptions& options) {
    u.validate();
    ConvexityCertificate cert;
    const auto nodes = u.grid.safe_nodes();
    cert.nodes = nodes.size();
    cert.records.reserve(nodes.size());
    bool all_positive = true;
    for (NodeIndex node : nodes) {
        auto c = certify_node(u, node);
        update(cert.min_h, c.lambda_h, node);
        update(cert.min_a, c.lambda_a, node);
        if (c.a_singular) {
            ++cert.singular_a;
        } else {
            if (!std::isnan(c.lambda_m)) update(cert.min_m, c.lambda_m, node);
            const bool ok = c.h_positive && c.complex_positive;
            cert.certified += ok;
            all_positive = all_positive && ok;
        }
        cert.undetermined += c.undetermined;
        cert.disagreements += c.disagrees;
        cert.records.push_back(c);
    }
    cert.margin = cert.min_m.node >= 0 ? cert.min_m.value : 0.0;

    const std::size_t tested = cert.nodes - cert.singular_a;
    if (cert.disagreements > 0 || tested == 0)
        cert.verdict = Verdict::failed;
    else if (all_positive)
        cert.verdict = Verdict::strictly_convex;
    else
        cert.verdict = Verdict::degenerate;

    if (options.identities && tested > 0) {
        const JetField jets(u);
        for (auto kind : kAllIdentityKinds) {
            const auto s = sweep_identity(jets, nodes, kind);
            cert.identities.push_back({to_string(kind), s.max_value, s.argmax, s.flagged, s.non_solution});
        }
        const auto e = sweep_elliptic(jets, nodes);
        cert.identities.push_back({"ELLIPTIC_M", e.residual.max_value, e.residual.argmax, e.residual.flagged,
                                   e.residual.non_solution});
        cert.elliptic_sign_ok = e.sign_ok;
        cert.max_elliptic_rhs_eigenvalue = e.max_rhs_eigenvalue;
    }
    return cert;
}

CVec canonical_direction(const CVec& s) {
    const double norm = s.norm();
    if (s.size() == 0 || !(norm > 0.0) || !std::isfinite(norm)) throw InvariantError("direction s must be a nonzero finite vector");
    Eigen::Index k = 0;
    while (s(k) == 0.0) ++k;
    const std::complex<double> phase = std::conj(s(k)) / std::abs(s(k));
    CVec out = s * phase / norm;
    out(k) = std::abs(s(k)) / norm;  // exactly real
    return out;
}

DirectionalReport directional_m(const JetField& jets, const CVec& s_in, double tolerance) {
    if (s_in.size() != jets.n()) throw DimensionError("direction has the wrong dimension");
    DirectionalReport r;
    r.s = canonical_direction(s_in);
    const CVec w = r.s.conjugate();
    const auto& grid = jets.field().grid;
    const auto& g = grid.geometry;
    const int n = jets.n();

    const auto offsets = g.stencil_offsets();
    r.ring_positive = true;
    r.all_positive = true;
    r.elliptic_ok = true;
    for (NodeIndex node : grid.interior_nodes()) {
        if (!jets.invertible(node)) {
            ++r.skipped_singular;
            continue;
        }
        const double m = std::real(w.dot(jets.M(node) * w));
        double check = std::numeric_limits<double>::quiet_NaN();
        double scale = std::numeric_limits<double>::quiet_NaN();
        if (grid.safe(node)) {
            try {
                check = directional_elliptic_check(jets, node, r.s);
                scale = 1.0 + std::abs(check + (n + 1) * m) + (n + 1) * std::abs(m);
            } catch (const SingularMatrixError&) {
                ++r.skipped_singular;
            }
        }
        r.nodes.push_back(node);
        r.m.push_back(m);
        r.check.push_back(check);
        r.scale.push_back(scale);

        update(r.min_m, m, node);
        r.all_positive = r.all_positive && m > 0.0;
        bool ring = false;
        for (NodeIndex off : offsets) ring = ring || grid.mask[static_cast<std::size_t>(node + off)] == NodeMask::dirichlet;
        if (ring) {
            update(r.ring_min_m, m, node);
            r.ring_positive = r.ring_positive && m > 0.0;
        }
        if (!std::isnan(check)) {
            if (check > r.max_check) {
                r.max_check = check;
                r.max_check_node = node;
            }
            if (check / scale > r.max_relative_check) {
                r.max_relative_check = check / scale;
                r.max_relative_node = node;
            }
            r.elliptic_ok = r.elliptic_ok && check <= tolerance * scale;
        }
    }
    if (r.ring_min_m.node < 0) r.ring_positive = false;
    if (r.nodes.empty()) r.all_positive = false;
    return r;
}

std::vector<CVec> seeded_directions(int n, int count, std::uint64_t seed) {
    if (n < 1 || count < 0) throw InvariantError("seeded_directions needs n >= 1 and count >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<CVec> out;
    while (static_cast<int>(out.size()) < count) {
        CVec s(n);
        for (int i = 0; i < n; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            s(i) = {re, im};
        }
        if (s.norm() > 1e-8) out.push_back(canonical_direction(s));
    }
    return out;
}

BoundaryLayerReport boundary_layer_check(const ScalarField& v, const Domain& domain, const BoundaryLayerParams& params) {
    if (!(params.r > 0.0)) throw InvariantError("boundary layer band r must be positive");
    const auto& grid = v.grid;
    const int d = 2 * v.n();
    BoundaryLayerReport rep;
    rep.r = params.r;

    struct Sample {
        NodeIndex node;
        double dist, v;
        bool ok_all, ok_full;
    };
    std::vector<Sample> samples;
    for (NodeIndex node = 0; node < grid.geometry.size(); ++node) {
        if (!grid.valued(node) || !grid.jet_ready(node)) continue;
        const Point x = grid.geometry.coordinates(node);
        const double dist = domain.distance_to_boundary(x);
        if (!(dist > 0.0 && dist < params.r)) continue;
        const double val = v[node];
        if (!(val > 0.0)) {
            std::ostringstream os;
            os << "v must be positive in the boundary band; v = " << val << " at node " << node;
            throw InvariantError(os.str());
        }
        const Eigen::VectorXd grad = real_gradient_at(v, node);
        const Eigen::MatrixXd neg_hess = -real_hessian_at(v, node);

        const double gnorm = grad.norm();
        const bool ok_grad = gnorm > cert_tol(std::abs(val));
        if (gnorm < rep.min_gradient) {
            rep.min_gradient = gnorm;
            rep.min_gradient_node = node;
        }

        bool ok_tan = false;
        if (ok_grad) {
            const Eigen::VectorXd e = grad / gnorm;
            const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(d, d) - e * e.transpose();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(proj);
            const Eigen::MatrixXd t = es.eigenvectors().rightCols(d - 1);  // eigenvalue 1: tangent space
            const Eigen::MatrixXd tan = t.transpose() * neg_hess * t;
            const double lam = d > 1 ? min_eigenvalue(tan) : std::numeric_limits<double>::infinity();
            ok_tan = lam > cert_tol(max_abs(neg_hess));
            if (lam < rep.min_tangential) {
                rep.min_tangential = lam;
                rep.min_tangential_node = node;
            }
        }
        const Eigen::MatrixXd full = neg_hess + grad * grad.transpose() / val;
        const bool ok_full = min_eigenvalue(full) > cert_tol(max_abs(full));

        rep.gradient_ok = rep.gradient_ok && ok_grad;
        rep.tangential_ok = rep.tangential_ok && ok_tan;
        samples.push_back({node, dist, val, ok_grad && ok_tan && ok_full, ok_full});
    }
    rep.band_nodes = samples.size();
    if (samples.empty()) throw InvariantError("boundary layer band contains no jet-ready nodes; increase r");

    // Largest v below which (iii) held everywhere tested.
    std::stable_sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) { return a.v < b.v; });
    rep.v_threshold = 0.0;
    for (const auto& s : samples) {
        if (!s.ok_full) {
            rep.full_ok = false;
            rep.first_full_failure = s.node;
            break;
        }
        rep.v_threshold = s.v;
    }
    // Distance below which (i)-(iii) held everywhere tested.
    std::stable_sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) { return a.dist < b.dist; });
    rep.r_empirical = params.r;
    for (const auto& s : samples) {
        if (!s.ok_all) {
            rep.r_empirical = s.dist;
            break;
        }
    }
    return rep;
}

}  // namespace kahler
