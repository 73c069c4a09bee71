#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCore>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "harmonet/network.hpp"

namespace harmonet {

using PointwiseFn = std::function<double(const VertexId&)>;

/// A real-valued function on a finite window. Evaluation outside the window
/// throws; it is never silently zero.
class VertexFunction {
public:
    VertexFunction(WindowPtr window, Eigen::VectorXd values);

    static VertexFunction zeros(WindowPtr window);
    static VertexFunction delta(WindowPtr window, const VertexId& x);
    static VertexFunction sample(WindowPtr window, const PointwiseFn& fn);

    const FiniteWindow& window() const { return *window_; }
    WindowPtr window_ptr() const { return window_; }

    double at(const VertexId& x) const;
    double operator[](std::size_t i) const { return values_[long(i)]; }
    double& operator[](std::size_t i) { return values_[long(i)]; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::VectorXd& values() { return values_; }

    PointwiseFn as_fn() const;

private:
    WindowPtr window_;
    Eigen::VectorXd values_;
};

/// Antisymmetric edge function stored once per unordered edge on the
/// canonical orientation (smaller VertexId -> larger VertexId).
class EdgeFlow {
public:
    EdgeFlow(WindowPtr window, Eigen::VectorXd edge_values);

    const FiniteWindow& window() const { return *window_; }
    WindowPtr window_ptr() const { return window_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    double operator[](std::size_t e) const { return values_[long(e)]; }
    const Eigen::VectorXd& values() const { return values_; }

    /// Signed value on the oriented edge (from, to); throws if not a window edge.
    double value(const VertexId& from, const VertexId& to) const;

private:
    WindowPtr window_;
    Eigen::VectorXd values_;
};

namespace ops {

/// (Delta f)(x) = sum_{y ~ x} c_xy (f(x) - f(y)) at each vertex of `at`.
/// Every vertex of `at` must have its whole neighborhood inside f's window.
VertexFunction laplacian_apply(const Network& net, const VertexFunction& f,
                               const std::vector<VertexId>& at);

/// (P f)(x) = sum p(x,y) f(y), p(x,y) = c_xy / c(x).
VertexFunction markov_apply(const Network& net, const VertexFunction& f,
                            const std::vector<VertexId>& at);

/// Energy form over window edges: sum_e c_e (u(a)-u(b))(v(a)-v(b)).
/// Edges crossing the window boundary are excluded; their count is available
/// from the window (crossing_edge_count).
double energy_form(const VertexFunction& u, const VertexFunction& v);

struct Norms {
    double l2;
    double l2c;      // sum c(x) u(x)^2, with c(x) from the full oracle
    double energy;   // seminorm over window edges
};
Norms norms(const Network& net, const VertexFunction& u);

/// Window Laplacian as a sparse symmetric matrix: diagonal c(x) from the full
/// oracle, off-diagonal -c_xy for window edges.
struct SparseLaplacian {
    WindowPtr window;
    Eigen::SparseMatrix<double> m;
};
SparseLaplacian assemble_laplacian(const Network& net, WindowPtr window);

/// Drop operator: (d u)(x,y) = c_xy (u(x) - u(y)) on canonical orientations.
EdgeFlow drop(const Network& net, const VertexFunction& u);

/// sqrt( sum_e r_e f(e)^2 ), r_e = 1/c_e.
double dissipation_norm(const EdgeFlow& flow);

/// <flow, chi_C>_D = sum over the oriented closed walk of r_e * flow(e).
/// The walk is a vertex sequence whose consecutive pairs are window edges and
/// whose first and last vertices coincide; the empty walk pairs to 0.
double cycle_pairing(const EdgeFlow& flow, const std::vector<VertexId>& cycle);

struct HarmonicEnergyResult {
    double value;         // 1/2 sum_{x in S} c(x) ((P f^2)(x) - f(x)^2)
    double max_residual;  // max |Delta f| over S
    std::size_t vertices_used;
};

/// Energy of a harmonic function via the Markov identity, summed over the
/// window vertices with full neighborhoods. Throws PreconditionError if f is
/// not harmonic there within `tol` (relative to the local conductance scale).
HarmonicEnergyResult harmonic_energy_via_P(const Network& net, const VertexFunction& f,
                                           double tol = 1e-9);

/// Matching direct sum for harmonic_energy_via_P comparisons:
/// 1/2 sum_{x in S} sum_{y ~ x} c_xy (f(x)-f(y))^2 over the same vertex set S
/// (edges inside S counted twice-halved, edges leaving S counted half).
double energy_incidence_sum(const Network& net, const VertexFunction& f);

}  // namespace ops
}  // namespace harmonet
