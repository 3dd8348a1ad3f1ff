#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kahler/domain.hpp"

namespace kahler {

enum class NodeMask : std::uint8_t { exterior = 0, interior = 1, dirichlet = 2 };

using NodeIndex = std::int64_t;

/// Uniform tensor grid over R^{2n}. Node coordinates are exact multiples of h,
/// x_a = (lo[a] + i_a) h, so grids whose spacings differ by powers of two nest.
/// Axis a < n is x_{a+1}; axis n + k is y_{k+1}. Axis 0 varies fastest.
class GridGeometry {
public:
    GridGeometry() = default;
    GridGeometry(int n, double h, std::vector<int> lo, std::vector<int> dims);

    int n() const { return n_; }
    int axes() const { return 2 * n_; }
    double h() const { return h_; }
    const std::vector<int>& lo() const { return lo_; }
    const std::vector<int>& dims() const { return dims_; }
    NodeIndex size() const { return size_; }
    NodeIndex stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

    std::vector<int> multi_index(NodeIndex node) const;
    /// Integer lattice coordinates (lo + i) of a node.
    std::vector<int> lattice(NodeIndex node) const;
    std::optional<NodeIndex> node_at_lattice(const std::vector<int>& k) const;
    Point coordinates(NodeIndex node) const;

    /// Node shifted by da along axis a and db along axis b (b may equal -1 for none).
    NodeIndex shifted(NodeIndex node, int a, int da, int b = -1, int db = 0) const {
        NodeIndex r = node + da * strides_[static_cast<std::size_t>(a)];
        if (b >= 0) r += db * strides_[static_cast<std::size_t>(b)];
        return r;
    }

    /// Offsets of the second-order stencil: +-e_a and +-e_a +-e_b (a < b).
    const std::vector<NodeIndex>& stencil_offsets() const { return stencil_; }

    /// Distance in nodes from a node to the nearest face of the box.
    int distance_to_box_edge(NodeIndex node) const;

private:
    int n_ = 0;
    double h_ = 0.0;
    std::vector<int> lo_, dims_;
    std::vector<NodeIndex> strides_;
    NodeIndex size_ = 0;
    std::vector<NodeIndex> stencil_;
};

/// Grid geometry plus per-node masks. Valued nodes (interior or dirichlet)
/// stay at least three nodes away from the box faces, so radius-2 stencil
/// lookups from valued nodes never leave the box.
struct MaskedGrid {
    GridGeometry geometry;
    std::vector<NodeMask> mask;

    bool valued(NodeIndex node) const { return mask[static_cast<std::size_t>(node)] != NodeMask::exterior; }
    bool interior(NodeIndex node) const { return mask[static_cast<std::size_t>(node)] == NodeMask::interior; }

    /// All stencil neighbours valued: u's second derivatives are available.
    bool jet_ready(NodeIndex node) const;
    /// Interior node whose stencil neighbours are all jet-ready: third and
    /// fourth order quantities are available. Nodes within two cells of the
    /// mask boundary fail this.
    bool safe(NodeIndex node) const;

    std::vector<NodeIndex> interior_nodes() const;
    std::vector<NodeIndex> safe_nodes() const;
    std::size_t count(NodeMask m) const;

    /// Throws IoError/InvariantError when the masks break the layout contract.
    void validate() const;
};

struct ScalarField {
    MaskedGrid grid;
    std::vector<double> values;  // 0 on exterior nodes

    int n() const { return grid.geometry.n(); }
    double h() const { return grid.geometry.h(); }
    double operator[](NodeIndex node) const { return values[static_cast<std::size_t>(node)]; }
    double& operator[](NodeIndex node) { return values[static_cast<std::size_t>(node)]; }

    /// Values finite on every valued node.
    void validate() const;
};

/// Discretisation of the truncated domain {phi < -epsilon}.
struct TruncatedGrid {
    Domain domain;
    double epsilon = 0.0;
    MaskedGrid grid;

    double h() const { return grid.geometry.h(); }
    int n() const { return domain.n(); }
};

struct GridOptions {
    std::int64_t node_cap = 40'000'000;
};

/// Interior nodes have phi < -epsilon; dirichlet nodes are the remaining
/// nodes in the stencil neighbourhood of an interior node. Requires
/// epsilon > 2 h max|grad phi| and phi < 0 on every dirichlet node.
TruncatedGrid build_grid(const Domain& domain, double h, double epsilon, const GridOptions& options = {});

/// exact_ball: closed-form potential. asymptotic: -log(-phi).
/// asymptotic_corrected: -log(-phi) + log J(-phi) / (n+1).
enum class BoundaryMode { exact_ball, asymptotic, asymptotic_corrected };

/// Values on dirichlet nodes, indexed like the grid (0 elsewhere).
std::vector<double> dirichlet_data(const TruncatedGrid& grid, BoundaryMode mode);

/// u0 = -log(max(-phi, epsilon)) on interior nodes, dirichlet data on the band.
ScalarField initial_guess(const TruncatedGrid& grid, const std::vector<double>& dirichlet);

/// Samples f at every valued node.
template <typename F>
ScalarField sample_field(const MaskedGrid& grid, F&& f) {
    ScalarField field{grid, std::vector<double>(static_cast<std::size_t>(grid.geometry.size()), 0.0)};
    for (NodeIndex i = 0; i < grid.geometry.size(); ++i)
        if (grid.valued(i)) field[i] = f(grid.geometry.coordinates(i));
    return field;
}

}  // namespace kahler
