#include "kahler/grid.hpp"

#include <cmath>
#include <sstream>

namespace kahler {

GridGeometry::GridGeometry(int n, double h, std::vector<int> lo, std::vector<int> dims)
    : n_(n), h_(h), lo_(std::move(lo)), dims_(std::move(dims)) {
    if (n < 1) throw DimensionError("grid dimension must be >= 1");
    if (!(h > 0.0) || !std::isfinite(h)) throw InvariantError("grid spacing must be positive");
    if (lo_.size() != static_cast<std::size_t>(2 * n) || dims_.size() != lo_.size())
        throw DimensionError("grid needs 2n lower corners and 2n extents");
    strides_.resize(dims_.size());
    size_ = 1;
    for (std::size_t a = 0; a < dims_.size(); ++a) {
        if (dims_[a] < 1) throw DimensionError("grid extents must be positive");
        strides_[a] = size_;
        size_ *= dims_[a];
    }
    for (int a = 0; a < 2 * n; ++a) {
        for (int s : {-1, 1}) stencil_.push_back(s * stride(a));
        for (int b = a + 1; b < 2 * n; ++b)
            for (int sa : {-1, 1})
                for (int sb : {-1, 1}) stencil_.push_back(sa * stride(a) + sb * stride(b));
    }
}

std::vector<int> GridGeometry::multi_index(NodeIndex node) const {
    std::vector<int> idx(dims_.size());
    for (std::size_t a = 0; a < dims_.size(); ++a) {
        idx[a] = static_cast<int>(node % dims_[a]);
        node /= dims_[a];
    }
    return idx;
}

std::vector<int> GridGeometry::lattice(NodeIndex node) const {
    auto idx = multi_index(node);
    for (std::size_t a = 0; a < idx.size(); ++a) idx[a] += lo_[a];
    return idx;
}

std::optional<NodeIndex> GridGeometry::node_at_lattice(const std::vector<int>& k) const {
    if (k.size() != dims_.size()) return std::nullopt;
    NodeIndex node = 0;
    for (std::size_t a = 0; a < k.size(); ++a) {
        const int i = k[a] - lo_[a];
        if (i < 0 || i >= dims_[a]) return std::nullopt;
        node += i * strides_[a];
    }
    return node;
}

Point GridGeometry::coordinates(NodeIndex node) const {
    Point p(static_cast<Eigen::Index>(dims_.size()));
    for (std::size_t a = 0; a < dims_.size(); ++a) {
        p(static_cast<Eigen::Index>(a)) = (lo_[a] + static_cast<int>(node % dims_[a])) * h_;
        node /= dims_[a];
    }
    return p;
}

int GridGeometry::distance_to_box_edge(NodeIndex node) const {
    int best = dims_[0];
    for (std::size_t a = 0; a < dims_.size(); ++a) {
        const int i = static_cast<int>(node % dims_[a]);
        node /= dims_[a];
        best = std::min({best, i, dims_[a] - 1 - i});
    }
    return best;
}

bool MaskedGrid::jet_ready(NodeIndex node) const {
    if (!valued(node)) return false;
    for (NodeIndex off : geometry.stencil_offsets())
        if (!valued(node + off)) return false;
    return true;
}

bool MaskedGrid::safe(NodeIndex node) const {
    if (!interior(node) || !jet_ready(node)) return false;
    for (NodeIndex off : geometry.stencil_offsets())
        if (!jet_ready(node + off)) return false;
    return true;
}

std::vector<NodeIndex> MaskedGrid::interior_nodes() const {
    std::vector<NodeIndex> out;
    for (NodeIndex i = 0; i < geometry.size(); ++i)
        if (interior(i)) out.push_back(i);
    return out;
}

std::vector<NodeIndex> MaskedGrid::safe_nodes() const {
    std::vector<char> ready(mask.size(), 0);
    for (NodeIndex i = 0; i < geometry.size(); ++i) ready[static_cast<std::size_t>(i)] = jet_ready(i);
    std::vector<NodeIndex> out;
    for (NodeIndex i = 0; i < geometry.size(); ++i) {
        if (!interior(i) || !ready[static_cast<std::size_t>(i)]) continue;
        bool ok = true;
        for (NodeIndex off : geometry.stencil_offsets()) {
            if (!ready[static_cast<std::size_t>(i + off)]) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(i);
    }
    return out;
}

std::size_t MaskedGrid::count(NodeMask m) const {
    std::size_t c = 0;
    for (auto v : mask) c += (v == m);
    return c;
}

void MaskedGrid::validate() const {
    if (mask.size() != static_cast<std::size_t>(geometry.size()))
        throw InvariantError("mask size does not match the grid");
    for (NodeIndex i = 0; i < geometry.size(); ++i) {
        if (!valued(i)) continue;
        if (geometry.distance_to_box_edge(i) < 3) {
            std::ostringstream os;
            os << "valued node " << i << " lies within three nodes of the grid box";
            throw InvariantError(os.str());
        }
        if (interior(i) && !jet_ready(i)) {
            std::ostringstream os;
            os << "interior node " << i << " has an exterior stencil neighbour";
            throw InvariantError(os.str());
        }
    }
}

void ScalarField::validate() const {
    grid.validate();
    if (values.size() != grid.mask.size()) throw InvariantError("field size does not match the grid");
    for (NodeIndex i = 0; i < grid.geometry.size(); ++i) {
        if (grid.valued(i) && !std::isfinite(values[static_cast<std::size_t>(i)])) {
            std::ostringstream os;
            os << "non-finite field value at node " << i;
            throw InvariantError(os.str());
        }
    }
}

TruncatedGrid build_grid(const Domain& domain, double h, double epsilon, const GridOptions& options) {
    if (!(h > 0.0) || !std::isfinite(h)) throw InvariantError("grid spacing h must be positive");
    if (!(epsilon > 0.0)) throw InvariantError("truncation epsilon must be positive");
    const double reach = 2.0 * h * domain.max_gradient_norm(epsilon);
    if (!(epsilon > reach)) {
        std::ostringstream os;
        os << "boundary layer not resolvable: need epsilon > 2 h max|grad phi| = " << reach
           << " but epsilon = " << epsilon;
        throw InvariantError(os.str());
    }

    const int n = domain.n();
    std::vector<int> lo(static_cast<std::size_t>(2 * n)), dims(lo.size());
    double nodes = 1.0;
    for (int a = 0; a < 2 * n; ++a) {
        // {phi < -eps} is the domain shrunk by sqrt(1 - eps) for balls (R^2 - eps) and ellipsoids.
        double hw = domain.half_widths()(a);
        if (domain.kind() == DomainKind::ball)
            hw = std::sqrt(std::max(domain.radius() * domain.radius() - epsilon, 0.0));
        else if (domain.kind() == DomainKind::ellipsoid)
            hw *= std::sqrt(std::max(1.0 - epsilon, 0.0));
        const int k = static_cast<int>(std::ceil(hw / h)) + 4;
        lo[static_cast<std::size_t>(a)] = -k;
        dims[static_cast<std::size_t>(a)] = 2 * k + 1;
        nodes *= 2 * k + 1;
    }
    if (nodes > static_cast<double>(options.node_cap)) {
        std::ostringstream os;
        os << "grid needs " << nodes << " nodes, above the cap of " << options.node_cap;
        throw InvariantError(os.str());
    }

    TruncatedGrid tg{domain, epsilon, MaskedGrid{GridGeometry(n, h, std::move(lo), std::move(dims)), {}}};
    const auto& geo = tg.grid.geometry;
    auto& mask = tg.grid.mask;
    mask.assign(static_cast<std::size_t>(geo.size()), NodeMask::exterior);
    std::size_t interior = 0;
    for (NodeIndex i = 0; i < geo.size(); ++i) {
        if (domain.phi_value(geo.coordinates(i)) < -epsilon) {
            mask[static_cast<std::size_t>(i)] = NodeMask::interior;
            ++interior;
        }
    }
    if (interior == 0) throw InvariantError("truncated domain has no interior grid nodes");

    for (NodeIndex i = 0; i < geo.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)] != NodeMask::interior) continue;
        for (NodeIndex off : geo.stencil_offsets()) {
            const auto j = static_cast<std::size_t>(i + off);
            if (mask[j] != NodeMask::exterior) continue;
            const Point p = geo.coordinates(static_cast<NodeIndex>(j));
            if (!(domain.phi_value(p) < 0.0)) {
                std::ostringstream os;
                os << "dirichlet node at (" << p.transpose() << ") lies outside the domain; "
                   << "increase epsilon or refine h";
                throw InvariantError(os.str());
            }
            mask[j] = NodeMask::dirichlet;
        }
    }
    tg.grid.validate();
    return tg;
}

std::vector<double> dirichlet_data(const TruncatedGrid& grid, BoundaryMode mode) {
    if (mode == BoundaryMode::exact_ball && grid.domain.kind() != DomainKind::ball)
        throw InvariantError("exact-ball boundary data requires a ball domain");
    const auto& geo = grid.grid.geometry;
    std::vector<double> out(static_cast<std::size_t>(geo.size()), 0.0);
    for (NodeIndex i = 0; i < geo.size(); ++i) {
        if (grid.grid.mask[static_cast<std::size_t>(i)] != NodeMask::dirichlet) continue;
        const Point p = geo.coordinates(i);
        double value = 0.0;
        switch (mode) {
            case BoundaryMode::exact_ball: value = exact_ball_value(p, grid.domain.radius()); break;
            case BoundaryMode::asymptotic: value = -std::log(-grid.domain.phi_value(p)); break;
            case BoundaryMode::asymptotic_corrected: {
                const double j = j_invariant(grid.domain, p);
                if (!(j > 0.0)) {
                    std::ostringstream os;
                    os << "J(-phi) = " << j << " is not positive at node " << i;
                    throw InvariantError(os.str());
                }
                value = -std::log(-grid.domain.phi_value(p)) + std::log(j) / (grid.n() + 1);
                break;
            }
        }
        out[static_cast<std::size_t>(i)] = value;
    }
    return out;
}

ScalarField initial_guess(const TruncatedGrid& grid, const std::vector<double>& dirichlet) {
    const auto& geo = grid.grid.geometry;
    ScalarField u{grid.grid, std::vector<double>(static_cast<std::size_t>(geo.size()), 0.0)};
    for (NodeIndex i = 0; i < geo.size(); ++i) {
        switch (grid.grid.mask[static_cast<std::size_t>(i)]) {
            case NodeMask::interior:
                u[i] = -std::log(std::max(-grid.domain.phi_value(geo.coordinates(i)), grid.epsilon));
                break;
            case NodeMask::dirichlet:
                u[i] = dirichlet[static_cast<std::size_t>(i)];
                break;
            case NodeMask::exterior:
                break;
        }
    }
    return u;
}

}  // namespace kahler
