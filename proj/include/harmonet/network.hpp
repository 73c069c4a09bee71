#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "harmonet/common.hpp"
#include "harmonet/vertex_id.hpp"

namespace harmonet {

struct NeighborEntry {
    VertexId to;
    double conductance;
};

/// A weighted network given by a lazy neighbor oracle. Implementations must
/// return, for every valid vertex, the finite list of (neighbor, conductance)
/// pairs in ascending neighbor order, with strictly positive conductances,
/// symmetric across the edge, and without loops. Networks are immutable after
/// construction and safe for concurrent reads.
class Network {
public:
    virtual ~Network() = default;

    /// Appends nothing on entry; fills `out` with the neighbor list of `x`.
    /// Throws InvalidVertexError for encodings outside the vertex universe.
    virtual void neighbors(const VertexId& x, std::vector<NeighborEntry>& out) const = 0;

    virtual bool contains(const VertexId& x) const = 0;

    virtual std::string name() const { return "network"; }

    std::optional<VertexId> origin() const { return origin_; }

    std::vector<NeighborEntry> neighbors_of(const VertexId& x) const {
        std::vector<NeighborEntry> out;
        neighbors(x, out);
        return out;
    }

protected:
    std::optional<VertexId> origin_;
};

/// Total conductance c(x) = sum of incident edge conductances.
double total_conductance(const Network& net, const VertexId& x);

/// Outer boundary bd(W) = { x not in W : x ~ y for some y in W }, ascending.
std::vector<VertexId> outer_boundary(const Network& net, const std::vector<VertexId>& w);

/// A finite materialization of part of a network: an ascending vertex list,
/// the edges with both endpoints inside, and an interior/boundary flag per
/// vertex. Ball windows flag by hop distance (dist < radius interior);
/// custom windows flag a vertex interior when all its neighbors are inside.
class FiniteWindow {
public:
    struct Edge {
        std::size_t a, b;  // window indices, vertices()[a] < vertices()[b]
        double c;
    };

    /// max_vertices > 0 aborts construction (NumericalError) when the ball
    /// exceeds the budget.
    static std::shared_ptr<const FiniteWindow> ball(std::shared_ptr<const Network> net,
                                                    const VertexId& root, int radius,
                                                    std::size_t max_vertices = 0);
    static std::shared_ptr<const FiniteWindow> from_vertices(std::shared_ptr<const Network> net,
                                                             std::vector<VertexId> verts);

    std::size_t size() const { return verts_.size(); }
    const std::vector<VertexId>& vertices() const { return verts_; }
    const VertexId& vertex(std::size_t i) const { return verts_[i]; }

    std::optional<std::size_t> index_of(const VertexId& v) const;

    bool is_interior(std::size_t i) const { return interior_[i]; }
    const std::vector<std::size_t>& interior_indices() const { return interior_idx_; }
    std::vector<VertexId> interior_vertices() const;
    std::vector<VertexId> boundary_vertices() const;

    /// All oracle neighbors of vertex i lie inside the window (so the
    /// Laplacian is evaluable at i from window data alone).
    bool has_full_neighborhood(std::size_t i) const { return full_nbhd_[i]; }

    /// c(x) from the full oracle, including neighbors outside the window.
    double full_conductance(std::size_t i) const { return full_c_[i]; }

    const std::vector<Edge>& edges() const { return edges_; }
    std::optional<std::size_t> edge_index(std::size_t a, std::size_t b) const;

    /// Number of edges with exactly one endpoint inside the window. These are
    /// excluded from window energy sums; the count makes the truncation explicit.
    std::size_t crossing_edge_count() const { return crossing_edges_; }

    int radius() const { return radius_; }
    const Network& network() const { return *net_; }
    std::shared_ptr<const Network> network_ptr() const { return net_; }

    /// Hop distance from the ball root (ball windows only; -1 otherwise).
    int distance(std::size_t i) const { return dist_.empty() ? -1 : dist_[i]; }

private:
    void build_edges();

    std::shared_ptr<const Network> net_;
    std::vector<VertexId> verts_;  // ascending
    std::vector<int> dist_;
    std::vector<bool> interior_;
    std::vector<bool> full_nbhd_;
    std::vector<double> full_c_;
    std::vector<std::size_t> interior_idx_;
    std::vector<Edge> edges_;
    std::unordered_map<std::uint64_t, std::size_t> edge_map_;
    std::size_t crossing_edges_ = 0;
    int radius_ = -1;
};

using WindowPtr = std::shared_ptr<const FiniteWindow>;

/// Report-style validation of Definition-level network invariants on a window:
/// conductance symmetry (bitwise), positivity, no loops, no isolated vertices.
struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate(const Network& net, const FiniteWindow& window);

/// Finite network from an explicit symmetric edge list.
class ExplicitNetwork : public Network {
public:
    /// Throws SpecError naming the offending pair on asymmetry, nonpositive
    /// conductance, loops, or conflicting duplicates.
    ExplicitNetwork(std::vector<std::tuple<VertexId, VertexId, double>> edges,
                    std::optional<VertexId> origin = std::nullopt);

    void neighbors(const VertexId& x, std::vector<NeighborEntry>& out) const override;
    bool contains(const VertexId& x) const override;
    std::string name() const override { return "explicit"; }

    const std::vector<VertexId>& all_vertices() const { return verts_; }

private:
    std::map<VertexId, std::vector<NeighborEntry>> adj_;
    std::vector<VertexId> verts_;
};

/// Convenience: path 0-1-...-(k-1) with unit conductances.
std::shared_ptr<ExplicitNetwork> make_path_network(int k);
/// Convenience: triangle {0,1,2} with unit conductances.
std::shared_ptr<ExplicitNetwork> make_triangle_network();

}  // namespace harmonet
