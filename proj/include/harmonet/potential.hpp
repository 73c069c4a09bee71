#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "harmonet/operators.hpp"

namespace harmonet::potential {

enum class SolverBackend { direct, iterative };

struct DirichletProblem {
    WindowPtr window;                 // must contain V1, bd(V1), and all neighbors of V1
    std::vector<VertexId> interior;   // V1, ascending
    std::map<VertexId, double> source;        // g on V1 (missing entries = 0)
    std::map<VertexId, double> boundary_data; // f on bd(V1); must cover bd(V1)
};

DirichletProblem make_dirichlet(WindowPtr window, std::vector<VertexId> interior,
                                const PointwiseFn& g, const PointwiseFn& f);

/// Solves Delta u = g on V1, u = f on bd(V1). Unique for finite V1 with
/// nonempty boundary. The result lives on the window restricted to
/// V1 union bd(V1). Throws NumericalError on solver failure.
VertexFunction solve_dirichlet(const DirichletProblem& p,
                               SolverBackend backend = SolverBackend::direct);

struct MaximumPrincipleReport {
    bool constant = false;     // principle vacuous
    bool max_on_boundary = false;
    bool min_on_boundary = false;
    VertexId argmax, argmin;
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks that a function harmonic on V1 attains its extrema over
/// V1 union bd(V1) on bd(V1), unless constant.
MaximumPrincipleReport maximum_principle_check(const Network& net, const VertexFunction& u,
                                               const std::vector<VertexId>& v1,
                                               double tol = 1e-9);

enum class Verdict {
    converged,
    not_converged,
    transient_consistent,
    recurrent_consistent,
    inconclusive,
};

std::string to_string(Verdict v);

struct PotentialResult {
    VertexFunction values;                 // last window's solution
    std::vector<int> radii;                // usable schedule entries
    std::vector<double> energy_by_radius;  // grounded-truncation energies
    Verdict verdict = Verdict::inconclusive;
    double final_residual = 0.0;           // max |Delta v - rhs| on last interior
};

struct ExhaustionSchedule {
    std::vector<int> radii;   // increasing
    double rel_tol = 1e-8;    // converged when two consecutive relative
                              // energy increments fall below this
    static ExhaustionSchedule doubling(int max_exponent);  // 2,4,...,2^K
};

/// Grounded-truncation dipole: on each ball window solves
/// Delta v = delta_x - delta_y with v = 0 on the window boundary.
PotentialResult dipole(std::shared_ptr<const Network> net, const VertexId& x, const VertexId& y,
                       const ExhaustionSchedule& schedule);

/// Grounded-truncation monopole: Delta w = delta_x. Verdict reports whether
/// the energy trend is transient-consistent (increments decaying) or
/// recurrent-consistent (non-vanishing increments).
PotentialResult monopole(std::shared_ptr<const Network> net, const VertexId& x,
                         const ExhaustionSchedule& schedule);

/// Delta v = delta_x0 - sum alpha_i delta_{x_i}; weights must be positive and
/// sum to 1, points distinct from x0.
PotentialResult multipole(std::shared_ptr<const Network> net, const VertexId& x0,
                          const std::vector<std::pair<VertexId, double>>& points,
                          const ExhaustionSchedule& schedule);

/// ||v_xy||_E^2 of the converged dipole. Throws NumericalError if the dipole
/// did not converge, unless allow_unconverged.
double resistance_distance(std::shared_ptr<const Network> net, const VertexId& x, const VertexId& y,
                           const ExhaustionSchedule& schedule, bool allow_unconverged = false);

/// dv/dn(x) = sum_{y in H} c_xy (v(x) - v(y)) for x in bd(H).
double normal_derivative(const Network& net, const std::vector<VertexId>& h, const PointwiseFn& v,
                         const VertexId& x);

struct GaussGreenRow {
    int radius;
    double interior_sum;   // sum over the window of u * Delta v
    double boundary_sum;   // sum over the outer boundary of u * dv/dn
    double total;
    double window_energy_inner_product;  // <u, v>_E over window edges
};

struct GaussGreenReport {
    std::vector<GaussGreenRow> rows;          // identity with u as supplied
    std::vector<GaussGreenRow> rows_gauged;   // identity with u - u(o)
    double boundary_limit = 0.0;              // last boundary sum
    bool boundary_nonvanishing = false;       // transience signal
};

/// Per-window Gauss-Green split along an exhaustion of balls around `center`.
/// Both displayed forms are evaluated: with u as given and with u - u(o).
GaussGreenReport gauss_green_split(std::shared_ptr<const Network> net, const PointwiseFn& u,
                                   const PointwiseFn& v, const std::vector<int>& radii,
                                   const VertexId& center, double nonvanishing_tol = 1e-6);

struct RoydenSplit {
    VertexFunction fin;    // span of interior deltas
    VertexFunction harm;   // energy-orthogonal complement, harmonic on the interior
    double cross_energy;   // <fin, harm>_E on the window
    double harm_residual;  // max |Delta harm| over the interior
};

RoydenSplit royden_split(WindowPtr window, const VertexFunction& u);

}  // namespace harmonet::potential
