#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "harmonet/network.hpp"
#include "harmonet/operators.hpp"

namespace harmonet::bratteli {

/// A leveled diagram given by per-level incidence matrices in the A_n
/// orientation: incidence[n] is |V_n| x |V_{n+1}| with entries in N_0
/// (multiplicities), and conductance[n] has the same support with the
/// per-pair conductance (multiplicity already folded in).
struct BratteliDiagram {
    std::vector<Eigen::MatrixXi> incidence;
    std::vector<Eigen::MatrixXd> conductance;

    std::size_t bundles() const { return incidence.size(); }  // edge bundles E_0..E_{K-1}
    std::size_t levels() const { return incidence.size() + 1; }
    std::size_t level_size(std::size_t n) const;
    bool zero_one() const;

    /// Total conductance of vertex (n, i): forward row sum plus backward column sum.
    double vertex_conductance(std::size_t n, std::size_t i) const;
};

/// Validates shapes (chained dimensions), Definition-level conditions (no zero
/// row/column in any incidence matrix), and support agreement between the
/// incidence and conductance matrices. With require_01, entries > 1 are
/// rejected; apply split_multi_edges first.
BratteliDiagram build_diagram(std::vector<Eigen::MatrixXi> incidence, double lambda,
                              bool require_01 = false);
BratteliDiagram build_diagram(std::vector<Eigen::MatrixXi> incidence,
                              std::vector<Eigen::MatrixXd> conductance, bool require_01 = false);

/// Explicit 0-1 reduction: each parallel edge bundle is split by one middle
/// vertex per edge; the two half-edges carry conductance 2c so the series
/// conductance is preserved. Doubles the number of levels minus one.
BratteliDiagram split_multi_edges(const BratteliDiagram& d);

/// Stationary helper: K copies of the same incidence matrix with c = lambda^n.
BratteliDiagram stationary_diagram(const Eigen::MatrixXi& a, double lambda, std::size_t bundles);

/// Pascal diagram truncated to the given number of edge bundles.
BratteliDiagram pascal_diagram(std::size_t bundles, double lambda = 1.0);

struct ArrowMatrices {
    Eigen::MatrixXd left;   // |V_n| x |V_{n+1}|, entries c^(n)_{xz} / c_n(x)
    Eigen::MatrixXd right;  // |V_n| x |V_{n-1}|, entries c^(n-1)_{yx} / c_n(x); empty at n=0
};

ArrowMatrices arrow_matrices(const BratteliDiagram& d, std::size_t n);

struct HarmonicExtension {
    Eigen::VectorXd particular;   // minimal-norm solution for f_{n+1}
    Eigen::MatrixXd kernel;       // orthonormal basis of ker C_n (solution set direction)
    double residual;              // || C_n particular - rhs ||; ~0 iff rhs in Col(C_n)
};

/// Solves C_n f_{n+1} = D_n f_n - C_{n-1}^T f_{n-1} (conductance assembly) or
/// the equivalent arrow form; the affine solution set is particular + span(kernel).
HarmonicExtension harmonic_extend(const BratteliDiagram& d, const Eigen::VectorXd& f_prev,
                                  const Eigen::VectorXd& f_cur, std::size_t n,
                                  bool arrow_form = false);

struct ExistenceReport {
    bool exists = false;
    int failing_depth = -1;            // first n where Col(P_left_n) meets G_n trivially
    std::vector<Eigen::VectorXd> witness;  // harmonic prefix f_0 = 0, f_1, ..., f_depth
};

/// Paper criterion: builds the N_n / G_n chain and checks
/// Col(P_left_n) intersect G_n != {0} up to `depth`; the witness is a joint
/// null-space solve of the full prefix system (f_0 = 0, root equation included).
ExistenceReport harmonic_exists(const BratteliDiagram& d, std::size_t depth);

struct CurrentReport {
    Eigen::VectorXd incoming;  // I_in(x), x in V_n
    Eigen::VectorXd outgoing;  // I_out(x)
    double level_total;        // I_n = sum_x I_in(x)
    double max_imbalance;      // max |I_in - I_out| = max |Delta f| on V_n
};

CurrentReport currents(const BratteliDiagram& d, const std::vector<Eigen::VectorXd>& f,
                       std::size_t n);

/// I_1 = sum_{x in V_1} c_ox (f_1(x) - f_0(o)).
double base_current(const BratteliDiagram& d, const std::vector<Eigen::VectorXd>& f);

struct ExtremaReport {
    std::vector<double> max_per_level;  // M_n over the range
    std::vector<double> min_per_level;  // m_n
    bool max_strictly_increasing = false;
    bool min_strictly_decreasing = false;
};

/// Per-level extrema of a harmonic nonconstant function (residual-checked,
/// including the level-0 equations). Throws PreconditionError otherwise.
ExtremaReport level_extrema(const BratteliDiagram& d, const std::vector<Eigen::VectorXd>& f,
                            std::size_t n_min, std::size_t n_max, double tol = 1e-9);

struct EnergyBoundResult {
    std::vector<double> partial;  // partial sums of I_1^2 / (beta_n |V_n|)
    std::vector<double> beta;     // beta_n = max c(x) on V_n
    double i1 = 0.0;
    bool diverging_trend = false;  // partial sums keep growing at the last depth
};

EnergyBoundResult energy_lower_bound(const BratteliDiagram& d,
                                     const std::vector<Eigen::VectorXd>& f, std::size_t n_max);

/// Energy of the edge bundle between levels n and n+1.
double bundle_energy(const BratteliDiagram& d, const std::vector<Eigen::VectorXd>& f,
                     std::size_t n);

struct LevelingReport {
    bool ok = false;
    std::string violation;  // names the failed condition and witness
    std::vector<std::vector<VertexId>> levels;
    BratteliDiagram diagram;  // filled when ok
};

/// BFS leveling of a graph from `root` up to `depth` levels; succeeds iff no
/// intra-level edges, every materialized vertex has a next-level neighbor, and
/// deg >= 2 everywhere except at most one vertex.
LevelingReport graph_to_bratteli(std::shared_ptr<const Network> net, const VertexId& root,
                                 std::size_t depth);

/// The diagram as a Network with VertexId (level, index). Vertices beyond the
/// materialized levels are rejected, so windows and capped walks must stay
/// strictly inside.
std::shared_ptr<const Network> diagram_network(std::shared_ptr<const BratteliDiagram> d);

/// Evaluates a level function on diagram vertex ids.
PointwiseFn level_function(std::shared_ptr<const std::vector<Eigen::VectorXd>> f);

}  // namespace harmonet::bratteli
