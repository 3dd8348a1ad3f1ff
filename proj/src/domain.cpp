#include "kahler/domain.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace kahler {

namespace {

double sum_squares(const Point& p) { return p.squaredNorm(); }

void require(bool ok, const std::string& what) {
    if (!ok) throw InvariantError(what);
}

// Visits every lattice point of the box with the given number of samples per axis.
template <typename F>
void for_each_lattice_point(const Eigen::VectorXd& half_widths, int samples, F&& f) {
    const Eigen::Index dim = half_widths.size();
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    Point p(dim);
    while (true) {
        for (Eigen::Index a = 0; a < dim; ++a)
            p(a) = -half_widths(a) + 2.0 * half_widths(a) * idx[static_cast<std::size_t>(a)] / (samples - 1);
        f(p);
        Eigen::Index a = 0;
        while (a < dim && ++idx[static_cast<std::size_t>(a)] == samples) idx[static_cast<std::size_t>(a++)] = 0;
        if (a == dim) return;
    }
}

}  // namespace

PhiEvaluation Domain::phi(const Point& p) const {
    if (p.size() != 2 * n_) throw DimensionError("point dimension does not match domain");
    if (kind_ == DomainKind::custom) return custom_(p);
    PhiEvaluation e;
    e.gradient.resize(2 * n_);
    e.hessian = Eigen::MatrixXd::Zero(2 * n_, 2 * n_);
    if (kind_ == DomainKind::ball) {
        e.value = sum_squares(p) - radius_ * radius_;
        e.gradient = 2.0 * p;
        e.hessian.diagonal().setConstant(2.0);
        return e;
    }
    e.value = -1.0;
    for (int k = 0; k < n_; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        e.value += ax_[uk] * p(k) * p(k) + by_[uk] * p(n_ + k) * p(n_ + k);
        e.gradient(k) = 2.0 * ax_[uk] * p(k);
        e.gradient(n_ + k) = 2.0 * by_[uk] * p(n_ + k);
        e.hessian(k, k) = 2.0 * ax_[uk];
        e.hessian(n_ + k, n_ + k) = 2.0 * by_[uk];
    }
    return e;
}

double Domain::phi_value(const Point& p) const {
    if (kind_ == DomainKind::ball) return sum_squares(p) - radius_ * radius_;
    return phi(p).value;
}

double Domain::max_gradient_norm(double epsilon) const {
    switch (kind_) {
        case DomainKind::ball:
            // |grad phi| = 2|z| <= 2 sqrt(R^2 - eps)
            return 2.0 * std::sqrt(std::max(radius_ * radius_ - epsilon, 0.0));
        case DomainKind::ellipsoid: {
            // |grad phi|^2 = 4 sum w_k^2 c_k^2 over sum w_k c_k^2 <= 1 - eps peaks at an axis vertex
            double w = 0.0;
            for (int k = 0; k < n_; ++k)
                w = std::max({w, ax_[static_cast<std::size_t>(k)], by_[static_cast<std::size_t>(k)]});
            return 2.0 * std::sqrt(w * std::max(1.0 - epsilon, 0.0));
        }
        case DomainKind::custom: {
            double best = 0.0;
            for_each_lattice_point(half_widths_, samples_per_axis_, [&](const Point& p) {
                const auto e = custom_(p);
                if (e.value <= -epsilon) best = std::max(best, e.gradient.norm());
            });
            return best;
        }
    }
    return 0.0;
}

double Domain::distance_to_boundary(const Point& p) const {
    if (kind_ == DomainKind::ball) return radius_ - p.norm();
    const auto e = phi(p);
    const double g = e.gradient.norm();
    if (g == 0.0) return std::numeric_limits<double>::infinity();
    return -e.value / g;
}

double Domain::radius() const {
    if (kind_ != DomainKind::ball) throw InvariantError("radius requested for a non-ball domain");
    return radius_;
}

Domain make_domain(const DomainSpec& spec) {
    Domain d;
    if (const auto* ball = std::get_if<BallSpec>(&spec)) {
        require(ball->n >= 1 && ball->n <= 2, "ball dimension must be 1 or 2");
        require(std::isfinite(ball->radius) && ball->radius > 0.0, "ball radius must be positive");
        d.n_ = ball->n;
        d.kind_ = DomainKind::ball;
        d.radius_ = ball->radius;
        d.half_widths_ = Eigen::VectorXd::Constant(2 * d.n_, ball->radius);
        return d;
    }
    if (const auto* ell = std::get_if<EllipsoidSpec>(&spec)) {
        require(!ell->ax.empty() && ell->ax.size() == ell->by.size(),
                "ellipsoid needs equally many ax and by weights");
        for (double w : ell->ax) require(std::isfinite(w) && w > 0.0, "ellipsoid weights must be positive");
        for (double w : ell->by) require(std::isfinite(w) && w > 0.0, "ellipsoid weights must be positive");
        require(ell->ax.size() <= 2, "ellipsoid dimension must be 1 or 2");
        d.n_ = static_cast<int>(ell->ax.size());
        d.kind_ = DomainKind::ellipsoid;
        d.ax_ = ell->ax;
        d.by_ = ell->by;
        d.half_widths_.resize(2 * d.n_);
        for (int k = 0; k < d.n_; ++k) {
            d.half_widths_(k) = 1.0 / std::sqrt(d.ax_[static_cast<std::size_t>(k)]);
            d.half_widths_(d.n_ + k) = 1.0 / std::sqrt(d.by_[static_cast<std::size_t>(k)]);
        }
        return d;
    }
    const auto& custom = std::get<CustomSpec>(spec);
    require(custom.n >= 1 && custom.n <= 2, "custom domain dimension must be 1 or 2");
    require(static_cast<bool>(custom.phi), "custom domain needs a defining function");
    require(custom.half_widths.size() == 2 * custom.n && (custom.half_widths.array() > 0.0).all(),
            "custom domain needs 2n positive half widths");
    require(custom.samples_per_axis >= 3, "custom domain needs at least 3 samples per axis");

    bool any_inside = false;
    const double slack = 1e-2;
    for_each_lattice_point(custom.half_widths, custom.samples_per_axis, [&](const Point& p) {
        const auto e = custom.phi(p);
        const bool on_box_face = ((p.array().abs() - custom.half_widths.array()).abs() < 1e-12).any();
        if (on_box_face && e.value <= 0.0) {
            std::ostringstream os;
            os << "custom domain is not contained in its box: phi <= 0 at " << p.transpose();
            throw InvariantError(os.str());
        }
        if (e.value < 0.0) any_inside = true;
        if (e.value > slack) return;
        const double lam = min_eigenvalue(e.hessian);
        if (!(lam > default_tolerance(e.hessian))) {
            std::ostringstream os;
            os << "custom defining function is not strictly convex: Hessian min eigenvalue " << lam
               << " at witness point (" << p.transpose() << ")";
            throw InvariantError(os.str());
        }
    });
    require(any_inside, "custom domain is empty on the sampling lattice");

    d.n_ = custom.n;
    d.kind_ = DomainKind::custom;
    d.custom_ = custom.phi;
    d.half_widths_ = custom.half_widths;
    d.samples_per_axis_ = custom.samples_per_axis;
    return d;
}

double exact_ball_value(const Point& p, double radius) {
    const int n = static_cast<int>(p.size() / 2);
    const double t = radius * radius - p.squaredNorm();
    if (!(t > 0.0)) throw InvariantError("exact ball potential evaluated outside the ball");
    return -std::log(t) + 2.0 / (n + 1) * std::log(radius);
}

BallJet exact_ball_potential(const Point& p, double radius) {
    const int n = static_cast<int>(p.size() / 2);
    const ComplexVector<double> z = to_complex(p);
    const ComplexVector<double> zb = z.conjugate();
    auto metric = exact_ball_metric(z, radius);
    const double s = 1.0 / (radius * radius - p.squaredNorm());

    BallJet jet;
    jet.u = metric.u;
    jet.grad = zb * s;

    // B_ij = zbar_i zbar_j s^2
    ComplexMatrix<double> b = zb * zb.transpose() * (s * s);
    jet.hessian = WirtingerHessian<double>(std::move(metric.A), std::move(b));

    const auto delta = [](int i, int j) { return i == j ? 1.0 : 0.0; };
    const double s2 = s * s, s3 = s2 * s;
    jet.dA.assign(static_cast<std::size_t>(n), ComplexMatrix<double>(n, n));
    jet.dA_bar = jet.dA;
    jet.dB = jet.dA;
    jet.dB_bar = jet.dA;
    for (int k = 0; k < n; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                jet.dA[uk](i, j) = delta(i, j) * zb(k) * s2 + zb(i) * delta(j, k) * s2 + 2.0 * zb(i) * z(j) * zb(k) * s3;
                jet.dA_bar[uk](i, j) = delta(i, j) * z(k) * s2 + delta(i, k) * z(j) * s2 + 2.0 * zb(i) * z(j) * z(k) * s3;
                jet.dB[uk](i, j) = 2.0 * zb(i) * zb(j) * zb(k) * s3;
                jet.dB_bar[uk](i, j) = (delta(i, k) * zb(j) + zb(i) * delta(j, k)) * s2 + 2.0 * zb(i) * zb(j) * z(k) * s3;
            }
        }
    }
    return jet;
}

double j_invariant(const Domain& domain, const Point& p) {
    const int n = domain.n();
    const auto e = domain.phi(p);
    ComplexVector<double> grad(n);
    for (int k = 0; k < n; ++k) grad(k) = -0.5 * std::complex<double>(e.gradient(k), -e.gradient(n + k));
    const auto ab = real_to_wirtinger(RealHessian<double>::from_full(-e.hessian));
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    return sign * std::real(bordered_determinant(-e.value, grad, ab.A));
}

}  // namespace kahler
