#include "harmonet/operators.hpp"

#include <algorithm>
#include <cmath>

namespace harmonet {

VertexFunction::VertexFunction(WindowPtr window, Eigen::VectorXd values)
    : window_(std::move(window)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != window_->size())
        throw SpecError("VertexFunction values length does not match window size");
}

VertexFunction VertexFunction::zeros(WindowPtr window) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(long(window->size()));
    return VertexFunction(std::move(window), std::move(v));
}

VertexFunction VertexFunction::delta(WindowPtr window, const VertexId& x) {
    auto i = window->index_of(x);
    if (!i) throw WindowTooSmallError("delta vertex outside window", x.to_string());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(long(window->size()));
    v[long(*i)] = 1.0;
    return VertexFunction(std::move(window), std::move(v));
}

VertexFunction VertexFunction::sample(WindowPtr window, const PointwiseFn& fn) {
    Eigen::VectorXd v(long(window->size()));
    for (std::size_t i = 0; i < window->size(); ++i) v[long(i)] = fn(window->vertex(i));
    return VertexFunction(std::move(window), std::move(v));
}

double VertexFunction::at(const VertexId& x) const {
    auto i = window_->index_of(x);
    if (!i)
        throw WindowTooSmallError("evaluation outside window at " + x.to_string(), x.to_string());
    return values_[long(*i)];
}

PointwiseFn VertexFunction::as_fn() const {
    auto w = window_;
    auto vals = values_;
    return [w, vals](const VertexId& x) -> double {
        auto i = w->index_of(x);
        if (!i) throw WindowTooSmallError("evaluation outside window at " + x.to_string(), x.to_string());
        return vals[long(*i)];
    };
}

EdgeFlow::EdgeFlow(WindowPtr window, Eigen::VectorXd edge_values)
    : window_(std::move(window)), values_(std::move(edge_values)) {
    if (static_cast<std::size_t>(values_.size()) != window_->edges().size())
        throw SpecError("EdgeFlow values length does not match window edge count");
}

double EdgeFlow::value(const VertexId& from, const VertexId& to) const {
    auto a = window_->index_of(from), b = window_->index_of(to);
    if (!a || !b) throw WindowTooSmallError("flow edge endpoint outside window");
    auto e = window_->edge_index(*a, *b);
    if (!e) throw WindowTooSmallError("not a window edge: (" + from.to_string() + "," + to.to_string() + ")");
    double v = values_[long(*e)];
    return from < to ? v : -v;
}

namespace ops {

namespace {

void check_same_window(const VertexFunction& u, const VertexFunction& v) {
    if (u.window_ptr() == v.window_ptr()) return;
    if (u.window().vertices() != v.window().vertices())
        throw SpecError("window mismatch between vertex functions");
}

}  // namespace

VertexFunction laplacian_apply(const Network& net, const VertexFunction& f,
                               const std::vector<VertexId>& at) {
    auto out_window = FiniteWindow::from_vertices(f.window().network_ptr(), at);
    Eigen::VectorXd out(long(out_window->size()));
    std::vector<NeighborEntry> nbrs;
    for (std::size_t k = 0; k < out_window->size(); ++k) {
        const VertexId& x = out_window->vertex(k);
        double fx = f.at(x);
        net.neighbors(x, nbrs);
        CompensatedSum s;
        for (const auto& e : nbrs) {
            auto j = f.window().index_of(e.to);
            if (!j)
                throw WindowTooSmallError("laplacian needs neighbor " + e.to.to_string() +
                                              " of " + x.to_string() + " inside the window",
                                          e.to.to_string());
            s.add(e.conductance * (fx - f[*j]));
        }
        nbrs.clear();
        out[long(k)] = s.value();
    }
    return VertexFunction(out_window, std::move(out));
}

VertexFunction markov_apply(const Network& net, const VertexFunction& f,
                            const std::vector<VertexId>& at) {
    auto out_window = FiniteWindow::from_vertices(f.window().network_ptr(), at);
    Eigen::VectorXd out(long(out_window->size()));
    std::vector<NeighborEntry> nbrs;
    for (std::size_t k = 0; k < out_window->size(); ++k) {
        const VertexId& x = out_window->vertex(k);
        net.neighbors(x, nbrs);
        CompensatedSum num;
        CompensatedSum den;
        for (const auto& e : nbrs) {
            auto j = f.window().index_of(e.to);
            if (!j)
                throw WindowTooSmallError("markov operator needs neighbor " + e.to.to_string() +
                                              " of " + x.to_string() + " inside the window",
                                          e.to.to_string());
            num.add(e.conductance * f[*j]);
            den.add(e.conductance);
        }
        nbrs.clear();
        out[long(k)] = num.value() / den.value();
    }
    return VertexFunction(out_window, std::move(out));
}

double energy_form(const VertexFunction& u, const VertexFunction& v) {
    check_same_window(u, v);
    CompensatedSum s;
    for (const auto& e : u.window().edges())
        s.add(e.c * (u[e.a] - u[e.b]) * (v[e.a] - v[e.b]));
    return s.value();
}

Norms norms(const Network& net, const VertexFunction& u) {
    Norms out{};
    CompensatedSum l2, l2c;
    for (std::size_t i = 0; i < u.size(); ++i) {
        l2.add(u[i] * u[i]);
        l2c.add(u.window().full_conductance(i) * u[i] * u[i]);
    }
    (void)net;
    out.l2 = std::sqrt(l2.value());
    out.l2c = std::sqrt(l2c.value());
    out.energy = std::sqrt(std::max(0.0, energy_form(u, u)));
    return out;
}

SparseLaplacian assemble_laplacian(const Network& net, WindowPtr window) {
    (void)net;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(window->size() + 2 * window->edges().size());
    for (std::size_t i = 0; i < window->size(); ++i)
        trip.emplace_back(long(i), long(i), window->full_conductance(i));
    for (const auto& e : window->edges()) {
        trip.emplace_back(long(e.a), long(e.b), -e.c);
        trip.emplace_back(long(e.b), long(e.a), -e.c);
    }
    SparseLaplacian out;
    out.window = window;
    out.m.resize(long(window->size()), long(window->size()));
    out.m.setFromTriplets(trip.begin(), trip.end());
    return out;
}

EdgeFlow drop(const Network& net, const VertexFunction& u) {
    (void)net;
    const auto& edges = u.window().edges();
    Eigen::VectorXd vals(long(edges.size()));
    for (std::size_t e = 0; e < edges.size(); ++e)
        vals[long(e)] = edges[e].c * (u[edges[e].a] - u[edges[e].b]);
    return EdgeFlow(u.window_ptr(), std::move(vals));
}

double dissipation_norm(const EdgeFlow& flow) {
    CompensatedSum s;
    const auto& edges = flow.window().edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
        s.add(flow[e] * flow[e] / edges[e].c);
    return std::sqrt(std::max(0.0, s.value()));
}

double cycle_pairing(const EdgeFlow& flow, const std::vector<VertexId>& cycle) {
    if (cycle.empty()) return 0.0;
    if (cycle.front() != cycle.back())
        throw SpecError("cycle walk must be closed (first vertex == last)");
    CompensatedSum s;
    const auto& w = flow.window();
    for (std::size_t k = 0; k + 1 < cycle.size(); ++k) {
        auto a = w.index_of(cycle[k]);
        auto b = w.index_of(cycle[k + 1]);
        if (!a || !b)
            throw WindowTooSmallError("cycle vertex outside window");
        auto e = w.edge_index(*a, *b);
        if (!e)
            throw WindowTooSmallError("cycle step (" + cycle[k].to_string() + "," +
                                      cycle[k + 1].to_string() + ") is not a window edge");
        s.add(flow.value(cycle[k], cycle[k + 1]) / w.edges()[*e].c);
    }
    return s.value();
}

HarmonicEnergyResult harmonic_energy_via_P(const Network& net, const VertexFunction& f, double tol) {
    HarmonicEnergyResult out{0.0, 0.0, 0};
    CompensatedSum total;
    std::vector<NeighborEntry> nbrs;
    for (std::size_t i = 0; i < f.window().size(); ++i) {
        if (!f.window().has_full_neighborhood(i)) continue;
        const VertexId& x = f.window().vertex(i);
        net.neighbors(x, nbrs);
        CompensatedSum lap, pf2;
        double scale = 1.0;
        for (const auto& e : nbrs) {
            double fy = f[*f.window().index_of(e.to)];
            lap.add(e.conductance * (f[i] - fy));
            pf2.add(e.conductance * fy * fy);
            scale = std::max(scale, e.conductance * std::max(1.0, std::abs(f[i])));
        }
        nbrs.clear();
        double cx = f.window().full_conductance(i);
        out.max_residual = std::max(out.max_residual, std::abs(lap.value()) / scale);
        total.add(0.5 * (pf2.value() - cx * f[i] * f[i]));
        ++out.vertices_used;
    }
    if (out.max_residual > tol)
        throw PreconditionError("function is not harmonic on the window interior (max residual " +
                                    std::to_string(out.max_residual) + ")",
                                out.max_residual);
    out.value = total.value();
    return out;
}

double energy_incidence_sum(const Network& net, const VertexFunction& f) {
    CompensatedSum total;
    std::vector<NeighborEntry> nbrs;
    for (std::size_t i = 0; i < f.window().size(); ++i) {
        if (!f.window().has_full_neighborhood(i)) continue;
        net.neighbors(f.window().vertex(i), nbrs);
        for (const auto& e : nbrs) {
            double d = f[i] - f[*f.window().index_of(e.to)];
            total.add(0.5 * e.conductance * d * d);
        }
        nbrs.clear();
    }
    return total.value();
}

}  // namespace ops
}  // namespace harmonet
