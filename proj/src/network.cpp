#include "harmonet/network.hpp"

#include <algorithm>
#include <cstring>
#include <set>

namespace harmonet {

double total_conductance(const Network& net, const VertexId& x) {
    if (!net.contains(x))
        throw InvalidVertexError("unknown vertex " + x.to_string() + " in " + net.name());
    std::vector<NeighborEntry> nbrs;
    net.neighbors(x, nbrs);
    CompensatedSum s;
    for (const auto& e : nbrs) s.add(e.conductance);
    return s.value();
}

std::vector<VertexId> outer_boundary(const Network& net, const std::vector<VertexId>& w) {
    std::set<VertexId> inside(w.begin(), w.end());
    std::set<VertexId> bd;
    std::vector<NeighborEntry> nbrs;
    for (const auto& x : w) {
        net.neighbors(x, nbrs);
        for (const auto& e : nbrs)
            if (!inside.count(e.to)) bd.insert(e.to);
        nbrs.clear();
    }
    return {bd.begin(), bd.end()};
}

namespace {
std::uint64_t pack_pair(std::size_t a, std::size_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}
}  // namespace

std::shared_ptr<const FiniteWindow> FiniteWindow::ball(std::shared_ptr<const Network> net,
                                                       const VertexId& root, int radius,
                                                       std::size_t max_vertices) {
    if (radius < 0) throw SpecError("ball radius must be >= 0");
    if (!net->contains(root))
        throw InvalidVertexError("unknown vertex " + root.to_string());

    std::map<VertexId, int> dist;
    dist[root] = 0;
    std::vector<VertexId> frontier{root};
    std::vector<NeighborEntry> nbrs;
    for (int d = 1; d <= radius && !frontier.empty(); ++d) {
        std::vector<VertexId> next;
        for (const auto& x : frontier) {
            net->neighbors(x, nbrs);
            for (const auto& e : nbrs)
                if (dist.emplace(e.to, d).second) next.push_back(e.to);
            nbrs.clear();
            if (max_vertices && dist.size() > max_vertices)
                throw NumericalError("ball exceeds the vertex budget at radius " +
                                     std::to_string(d));
        }
        std::sort(next.begin(), next.end());
        frontier = std::move(next);
    }

    auto w = std::make_shared<FiniteWindow>();
    w->net_ = std::move(net);
    w->radius_ = radius;
    w->verts_.reserve(dist.size());
    w->dist_.reserve(dist.size());
    for (const auto& [v, d] : dist) {
        w->verts_.push_back(v);
        w->dist_.push_back(d);
        w->interior_.push_back(d < radius);
    }
    w->build_edges();
    return w;
}

std::shared_ptr<const FiniteWindow> FiniteWindow::from_vertices(std::shared_ptr<const Network> net,
                                                                std::vector<VertexId> verts) {
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    for (const auto& v : verts)
        if (!net->contains(v)) throw InvalidVertexError("unknown vertex " + v.to_string());

    auto w = std::make_shared<FiniteWindow>();
    w->net_ = std::move(net);
    w->verts_ = std::move(verts);
    w->build_edges();
    // interior := all neighbors inside
    w->interior_.assign(w->verts_.size(), false);
    w->interior_idx_.clear();
    for (std::size_t i = 0; i < w->verts_.size(); ++i) w->interior_[i] = w->full_nbhd_[i];
    for (std::size_t i = 0; i < w->verts_.size(); ++i)
        if (w->interior_[i]) w->interior_idx_.push_back(i);
    return w;
}

void FiniteWindow::build_edges() {
    const std::size_t n = verts_.size();
    full_nbhd_.assign(n, true);
    full_c_.assign(n, 0.0);
    crossing_edges_ = 0;
    std::vector<NeighborEntry> nbrs;
    for (std::size_t i = 0; i < n; ++i) {
        net_->neighbors(verts_[i], nbrs);
        CompensatedSum c;
        for (const auto& e : nbrs) {
            c.add(e.conductance);
            auto j = index_of(e.to);
            if (!j) {
                full_nbhd_[i] = false;
                ++crossing_edges_;
                continue;
            }
            if (i < *j) {
                edge_map_.emplace(pack_pair(i, *j), edges_.size());
                edges_.push_back({i, *j, e.conductance});
            }
        }
        full_c_[i] = c.value();
        nbrs.clear();
    }
    if (interior_.size() == n) {
        interior_idx_.clear();
        for (std::size_t i = 0; i < n; ++i)
            if (interior_[i]) interior_idx_.push_back(i);
    }
}

std::optional<std::size_t> FiniteWindow::index_of(const VertexId& v) const {
    auto it = std::lower_bound(verts_.begin(), verts_.end(), v);
    if (it == verts_.end() || *it != v) return std::nullopt;
    return static_cast<std::size_t>(it - verts_.begin());
}

std::vector<VertexId> FiniteWindow::interior_vertices() const {
    std::vector<VertexId> out;
    for (std::size_t i : interior_idx_) out.push_back(verts_[i]);
    return out;
}

std::vector<VertexId> FiniteWindow::boundary_vertices() const {
    std::vector<VertexId> out;
    for (std::size_t i = 0; i < verts_.size(); ++i)
        if (!interior_[i]) out.push_back(verts_[i]);
    return out;
}

std::optional<std::size_t> FiniteWindow::edge_index(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    auto it = edge_map_.find(pack_pair(a, b));
    if (it == edge_map_.end()) return std::nullopt;
    return it->second;
}

ValidationReport validate(const Network& net, const FiniteWindow& window) {
    ValidationReport rep;
    std::vector<NeighborEntry> nbrs, back;
    for (std::size_t i = 0; i < window.size(); ++i) {
        const VertexId& x = window.vertex(i);
        net.neighbors(x, nbrs);
        if (nbrs.empty())
            rep.violations.push_back("isolated vertex " + x.to_string());
        for (const auto& e : nbrs) {
            if (e.to == x)
                rep.violations.push_back("loop at " + x.to_string());
            if (!(e.conductance > 0.0))
                rep.violations.push_back("nonpositive conductance " + std::to_string(e.conductance) +
                                         " on (" + x.to_string() + "," + e.to.to_string() + ")");
            if (!window.index_of(e.to)) continue;  // symmetry checked on window pairs only
            net.neighbors(e.to, back);
            bool found = false;
            for (const auto& r : back) {
                if (r.to == x) {
                    found = true;
                    if (std::memcmp(&r.conductance, &e.conductance, sizeof(double)) != 0)
                        rep.violations.push_back("asymmetric conductance on (" + x.to_string() + "," +
                                                 e.to.to_string() + "): " +
                                                 std::to_string(e.conductance) + " vs " +
                                                 std::to_string(r.conductance));
                    break;
                }
            }
            if (!found)
                rep.violations.push_back("edge (" + x.to_string() + "," + e.to.to_string() +
                                         ") missing in reverse direction");
            back.clear();
        }
        nbrs.clear();
    }
    return rep;
}

ExplicitNetwork::ExplicitNetwork(std::vector<std::tuple<VertexId, VertexId, double>> edges,
                                 std::optional<VertexId> origin) {
    for (const auto& [x, y, c] : edges) {
        if (x == y) throw SpecError("loop edge at " + x.to_string());
        if (!(c > 0.0))
            throw SpecError("nonpositive conductance on (" + x.to_string() + "," + y.to_string() +
                            "): " + std::to_string(c));
        for (auto [a, b] : {std::pair{x, y}, std::pair{y, x}}) {
            auto& lst = adj_[a];
            for (const auto& e : lst)
                if (e.to == b && e.conductance != c)
                    throw SpecError("conflicting conductances on (" + a.to_string() + "," +
                                    b.to_string() + "): " + std::to_string(e.conductance) + " vs " +
                                    std::to_string(c));
            bool dup = false;
            for (const auto& e : lst) dup = dup || e.to == b;
            if (!dup) lst.push_back({b, c});
        }
    }
    for (auto& [v, lst] : adj_) {
        std::sort(lst.begin(), lst.end(),
                  [](const NeighborEntry& a, const NeighborEntry& b) { return a.to < b.to; });
        verts_.push_back(v);
    }
    origin_ = origin;
    if (!origin_ && !verts_.empty()) origin_ = verts_.front();
}

void ExplicitNetwork::neighbors(const VertexId& x, std::vector<NeighborEntry>& out) const {
    auto it = adj_.find(x);
    if (it == adj_.end()) throw InvalidVertexError("unknown vertex " + x.to_string());
    out = it->second;
}

bool ExplicitNetwork::contains(const VertexId& x) const { return adj_.count(x) > 0; }

std::shared_ptr<ExplicitNetwork> make_path_network(int k) {
    std::vector<std::tuple<VertexId, VertexId, double>> edges;
    for (int i = 0; i + 1 < k; ++i)
        edges.emplace_back(VertexId::of(i), VertexId::of(i + 1), 1.0);
    return std::make_shared<ExplicitNetwork>(std::move(edges), VertexId::of(0));
}

std::shared_ptr<ExplicitNetwork> make_triangle_network() {
    std::vector<std::tuple<VertexId, VertexId, double>> edges{
        {VertexId::of(0), VertexId::of(1), 1.0},
        {VertexId::of(1), VertexId::of(2), 1.0},
        {VertexId::of(0), VertexId::of(2), 1.0},
    };
    return std::make_shared<ExplicitNetwork>(std::move(edges), VertexId::of(0));
}

}  // namespace harmonet
