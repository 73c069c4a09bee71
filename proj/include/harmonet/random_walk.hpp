#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "harmonet/bratteli.hpp"
#include "harmonet/operators.hpp"
#include "harmonet/rng.hpp"

namespace harmonet::walk {

struct WalkParams {
    std::uint64_t samples = 100000;
    std::int64_t horizon = 10000;
    std::uint64_t seed = 1;
    int workers = 0;             // 0 = HARMONET_WORKERS env var, else 1
    std::int64_t range_cap = -1; // censor when the radial coordinate exceeds this
    bool assume_transient = false;
};

struct WalkEstimate {
    std::string quantity;
    double point = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
    std::int64_t horizon = 0;
    double censored = 0.0;  // fraction of paths truncated at the horizon/range cap
    std::uint64_t seed = 0;
};

/// Radial coordinate used for range capping: the level for leveled networks
/// (rank-2 encodings), max |coordinate| otherwise.
std::int64_t radial_bound(const VertexId& v);

struct StopRule {
    enum class Kind { fixed_length, hit_set, hit_set_capped } kind = Kind::fixed_length;
    std::int64_t length = 0;              // fixed_length
    std::vector<VertexId> targets;        // hit_set*, ascending
    std::int64_t horizon = -1;            // hit_set_capped
    static StopRule fixed(std::int64_t n);
    static StopRule hit(std::vector<VertexId> targets);
    static StopRule hit_capped(std::vector<VertexId> targets, std::int64_t horizon);
};

/// One sampled trajectory, reproducible for a fixed seed.
std::vector<VertexId> sample_path(const Network& net, const VertexId& start, const StopRule& stop,
                                  std::uint64_t seed, std::int64_t range_cap = -1);

/// Pr[walk from x ever hits y], horizon-censored (misses are counted as
/// not-hit, biasing the estimate downward; the censored fraction reports them).
WalkEstimate estimate_F(const Network& net, const VertexId& x, const VertexId& y,
                        const WalkParams& params);

struct UEstimate {
    WalkEstimate direct;         // return before the horizon (hitting time >= 1)
    WalkEstimate via_neighbors;  // sum_y p(x,y) estimate_F(y, x)
};
UEstimate estimate_U(const Network& net, const VertexId& x, const WalkParams& params);

/// Expected visits to y from x within the horizon (Green kernel estimator).
WalkEstimate estimate_green_visits(const Network& net, const VertexId& x, const VertexId& y,
                                   const WalkParams& params);

struct GreenSeries {
    std::vector<double> partial;  // partial[n] = sum_{k<=n} p^(k)(x,y)
    double block_ratio = 0.0;     // (S_N - S_{N/2}) / (S_{N/2} - S_{N/4})
    double tail_estimate = 0.0;   // geometric extrapolation of the remaining mass
    bool recurrent_consistent = false;
};

/// Exact partial sums of the Green series by window-restricted kernel powers.
/// The window must contain the ball of radius N around x; a leak throws
/// WindowTooSmallError naming the required radius.
GreenSeries green_truncated(const Network& net, const VertexId& x, const VertexId& y,
                            const WindowPtr& window, int n_steps);

struct IdentityCheck {
    std::string name;
    double lhs = 0.0, rhs = 0.0, sigma = 0.0;
    bool ok = false;
};

struct GreenIdentitiesReport {
    std::vector<IdentityCheck> checks;
    bool all_ok() const;
};

/// Monte-Carlo checks of G(x,y) = F(x,y) G(y,y), G(x,x)(1-U(x,x)) = 1,
/// c(x)F(x,y) = c(y)F(y,x), c(x)G(x,y) = c(y)G(y,x), each within 3 combined
/// standard errors.
GreenIdentitiesReport green_identities_report(const Network& net, const VertexId& x,
                                              const VertexId& y, const WalkParams& params);

struct ProbabilisticMonopole {
    VertexFunction values;            // a -> G(a,x)/c(x) over the eval set
    std::vector<double> stderrs;      // aligned with the eval window
    double max_interior_residual;     // max |Delta w - delta_x| where evaluable
    std::size_t residual_vertices;
};

/// Monopole via the Green estimator. Refuses recurrent networks unless
/// params.assume_transient is set (classification via transience_test).
ProbabilisticMonopole monopole_probabilistic(std::shared_ptr<const Network> net, const VertexId& x,
                                             const std::vector<VertexId>& eval_set,
                                             const WalkParams& params);

struct HittingMatrixD {
    Eigen::Matrix2d direct;        // (Delta h_j)(x_i) with first-hitting h's
    Eigen::Matrix2d direct_sigma;
    Eigen::Matrix2d factorized;    // diag(c) [[1-U1, -F12], [-F21, 1-U2]]
    double det_direct = 0.0;
    double det_factorized = 0.0;
    double det_green_formula = 0.0;  // c1 c2 (1 - G12 G21) / (G11 G22)
    bool near_singular = false;
};

HittingMatrixD hitting_matrix_D(const Network& net, const VertexId& x1, const VertexId& x2,
                                const WalkParams& params);

struct ProbabilisticDipole {
    VertexFunction combination;       // alpha h_1 + beta h_2, direct-D coefficients
    VertexFunction monopole_diff;     // G(a,x1)/c(x1) - G(a,x2)/c(x2)
    double alpha = 0.0, beta = 0.0;
    double residual_combination = 0.0;   // max |Delta v - (delta_x1 - delta_x2)|
    double residual_monopole_diff = 0.0;
    double difference_harmonic_residual = 0.0;  // max |Delta (A - B)| on eval interior
};

ProbabilisticDipole dipole_probabilistic(std::shared_ptr<const Network> net, const VertexId& x1,
                                         const VertexId& x2, const std::vector<VertexId>& eval_set,
                                         const WalkParams& params);

struct HarmonicExtension {
    VertexFunction values;        // Phi(a) = sum phi(x_i) h_i(a)
    std::vector<double> stderrs;
    std::vector<double> hit_mass;  // sum_i h_i(a); ~1 when F is hit a.s.
};

HarmonicExtension harmonic_extension(std::shared_ptr<const Network> net,
                                     const std::vector<VertexId>& f_set,
                                     const std::vector<double>& phi,
                                     const std::vector<VertexId>& eval_set,
                                     const WalkParams& params);

enum class Classification { transient, recurrent, inconclusive };
std::string to_string(Classification c);

struct TransienceParams {
    WalkParams walk{10000, 4000, 1, 0, -1, false};
    int green_steps = 0;            // 0 = auto from vertex budget
    std::size_t window_vertex_budget = 200000;
    std::vector<int> monopole_radii;  // empty = auto
};

struct TransienceReport {
    Classification verdict = Classification::inconclusive;
    Classification u_signal = Classification::inconclusive;
    Classification green_signal = Classification::inconclusive;
    Classification monopole_signal = Classification::inconclusive;
    WalkEstimate u_estimate;
    std::vector<std::string> evidence;
};

/// Majority verdict of the U-estimate, Green partial-sum growth, and grounded
/// monopole energy trend. Heuristic by design; inconclusive is allowed.
TransienceReport transience_test(std::shared_ptr<const Network> net, const VertexId& x,
                                 const TransienceParams& params);

struct LevelHittingResult {
    std::vector<int> levels;
    std::vector<double> h;        // h_n(x) estimates
    std::vector<double> stderrs;
    std::vector<double> compatibility_residual;  // || P_left_n f_{n+1} - f_n ||_inf
    std::optional<int> stabilization_level;      // first n with overlapping CIs
};

/// h_n(x) = E_x[ f_n(X_{tau(V_n)}) ] on a Bratteli-diagram network.
/// If compat_tol is finite, throws PreconditionError when the compatibility
/// residual exceeds it; otherwise the residuals are only reported.
LevelHittingResult level_hitting_sequence(const bratteli::BratteliDiagram& diagram,
                                          const std::vector<Eigen::VectorXd>& f_levels,
                                          const VertexId& x, int n_min, int n_max,
                                          const WalkParams& params,
                                          double compat_tol = std::numeric_limits<double>::infinity());

}  // namespace harmonet::walk
