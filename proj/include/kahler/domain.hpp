#pragma once

#include <Eigen/Dense>

#include <functional>
#include <variant>
#include <vector>

#include "kahler/hermitian_algebra.hpp"

namespace kahler {

/// A point of R^{2n} ordered (x_1, ..., x_n, y_1, ..., y_n), z_k = x_k + i y_k.
using Point = Eigen::VectorXd;

inline ComplexVector<double> to_complex(const Point& p) {
    const Eigen::Index n = p.size() / 2;
    ComplexVector<double> z(n);
    for (Eigen::Index k = 0; k < n; ++k) z(k) = {p(k), p(n + k)};
    return z;
}

struct PhiEvaluation {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

enum class DomainKind { ball, ellipsoid, custom };

struct BallSpec {
    int n = 1;
    double radius = 1.0;
};

/// phi = sum_k ax_k x_k^2 + by_k y_k^2 - 1.
struct EllipsoidSpec {
    std::vector<double> ax;
    std::vector<double> by;
};

/// User-supplied defining function. The domain must lie inside the box
/// [-half_width, half_width]^{2n} centred at the origin; strict convexity is
/// checked on a lattice with samples_per_axis points per axis.
struct CustomSpec {
    int n = 1;
    std::function<PhiEvaluation(const Point&)> phi;
    Eigen::VectorXd half_widths;
    int samples_per_axis = 41;
};

using DomainSpec = std::variant<BallSpec, EllipsoidSpec, CustomSpec>;

/// Bounded strictly convex domain {phi < 0} in C^n.
class Domain {
public:
    int n() const { return n_; }
    DomainKind kind() const { return kind_; }

    PhiEvaluation phi(const Point& p) const;
    double phi_value(const Point& p) const;

    /// Half widths of an origin-centred box containing the domain.
    const Eigen::VectorXd& half_widths() const { return half_widths_; }

    /// Upper bound of |grad phi| over the truncated region {phi <= -epsilon}.
    double max_gradient_norm(double epsilon) const;

    /// Euclidean distance to the boundary for balls; -phi / |grad phi| otherwise.
    double distance_to_boundary(const Point& p) const;

    double radius() const;  // balls only
    const std::vector<double>& ax() const { return ax_; }
    const std::vector<double>& by() const { return by_; }

private:
    friend Domain make_domain(const DomainSpec& spec);

    int n_ = 1;
    DomainKind kind_ = DomainKind::ball;
    double radius_ = 1.0;
    std::vector<double> ax_, by_;
    std::function<PhiEvaluation(const Point&)> custom_;
    Eigen::VectorXd half_widths_;
    int samples_per_axis_ = 0;
};

/// Validates the spec and returns the domain; a non-convex custom phi is
/// rejected with the witness point in the message.
Domain make_domain(const DomainSpec& spec);

/// J(-phi) = (-1)^n det [[v, v_jbar], [v_i, v_{i jbar}]] at v = -phi; equals 1
/// for the unit ball's 1 - |z|^2. The boundary value of the solution's
/// bounded part u + log(-phi) is log J / (n+1).
double j_invariant(const Domain& domain, const Point& p);

/// Closed-form solution u = -log(R^2 - |z|^2) + (2/(n+1)) log R of
/// det(u_{i jbar}) = e^{(n+1)u} on the ball of radius R, with its Wirtinger
/// derivatives through third order.
struct BallJet {
    double u = 0.0;
    ComplexVector<double> grad;             // u_k
    WirtingerHessian<double> hessian;       // A = u_{i jbar}, B = u_{ij}
    std::vector<ComplexMatrix<double>> dA;      // d_k A
    std::vector<ComplexMatrix<double>> dA_bar;  // d_{kbar} A
    std::vector<ComplexMatrix<double>> dB;      // d_k B
    std::vector<ComplexMatrix<double>> dB_bar;  // d_{kbar} B
};

/// u and A = u_{i jbar} of the ball potential at z, in any real scalar type.
template <typename Real>
struct BallMetric {
    Real u;
    ComplexMatrix<Real> A;  // delta_ij / t + zbar_i z_j / t^2, t = R^2 - |z|^2
};

template <typename Real>
BallMetric<Real> exact_ball_metric(const ComplexVector<Real>& z, Real radius = Real(1)) {
    const Eigen::Index n = z.size();
    const Real t = radius * radius - z.squaredNorm();
    if (!(t > Real(0))) throw InvariantError("exact ball potential evaluated outside the ball (|z| >= R)");
    const Real s = Real(1) / t;
    const ComplexVector<Real> zb = z.conjugate();
    return {-std::log(t) + Real(2) / Real(n + 1) * std::log(radius),
            ComplexMatrix<Real>::Identity(n, n) * s + zb * z.transpose() * (s * s)};
}

BallJet exact_ball_potential(const Point& p, double radius = 1.0);
double exact_ball_value(const Point& p, double radius = 1.0);

}  // namespace kahler
