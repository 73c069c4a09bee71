#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "harmonet/network.hpp"

namespace harmonet::models {

using PointwiseFn = std::function<double(const VertexId&)>;

/// A named exact evaluator attached to a fixture, together with the residual
/// equation it satisfies: Delta(f) == residual_rhs pointwise.
struct ClosedForm {
    std::string name;
    PointwiseFn eval;
    /// Expected Delta(f) as a finitely supported map (empty for harmonic).
    std::map<VertexId, double> delta_rhs;
    std::string notes;
};

enum class WalkClass { transient, recurrent };

struct Fixture {
    std::string name;
    std::shared_ptr<const Network> net;
    std::map<std::string, ClosedForm> forms;
    std::optional<WalkClass> expected_walk;
    std::optional<bool> finite_energy_harmonic;  // non-constant harmonic of finite energy exists
    /// Generic walkers must not step farther than this from their start
    /// (vertex encodings overflow beyond it); <0 means unlimited.
    std::int64_t walker_range_cap = -1;
    std::string notes;

    const ClosedForm& form(const std::string& n) const;
};

/// Line fixtures over N0 or Z. Variants:
///   n0_linear    — V = N0, c_{n,n+1} = n+1
///   z_unit       — V = Z,  c == 1; dipole family attached via z_unit_dipole()
///   z_summable   — V = Z,  c_{n,n+1} = lambda^{n+1}; summable resistances on
///                  the right ray; attaches the increment-built function
///                  (harmonic off the origin, Delta u = -delta_0, energy
///                  1/(lambda-1)), whose boundary sum converges to 1/(lambda-1)
///   z_geometric  — V = Z,  c_{i,i+1} = lambda^{max(|i|,|i+1|)}; attaches the
///                  monopole w_0 and a bounded harmonic function
///   n0_geometric — V = N0, c_{i,i+1} = lambda^i; attaches the monopole at 0
Fixture line_fixture(const std::string& variant, double lambda = 2.0);

/// Exact dipole v_n on the unit Z line (piecewise 0 / i / n), n != 0.
ClosedForm z_unit_dipole(std::int64_t n);

/// Binary tree with root (0,1), level-n vertices (n, 1..2^n), and edge
/// conductance lambda^n between levels n and n+1. Attaches the symmetric
/// harmonic function f_lambda (top-ray values (1+...+lambda^{n-1})/lambda^{n-2},
/// mirrored at the bottom, frozen on the off-ray subtrees) and, for lambda = 1,
/// the monopole 2^{-dist}.
Fixture binary_tree_fixture(double lambda);

/// Pascal graph: level n has vertices (n, 0..n); (n,i) ~ (n+1,i), (n+1,i+1).
/// c rule: "unit" or lambda^n on level-n edges. For c == 1 attaches the
/// integer-valued harmonic h(n,i) = n(n+1)/2 - i(n+1).
Fixture pascal_fixture(const std::string& c_rule = "unit", double lambda = 1.0);

/// Stationary diagram with d x d incidence A (symmetric, invertible,
/// nonnegative integer, no zero row/column) and c_e = lambda^n on level-n
/// edges. Attaches the harmonic family member with constant f_1
/// (f_n = f1 * sum_{i<n} lambda^{-i}); see harmonic_family() for general f_1.
Fixture stationary_fixture(const std::vector<std::vector<int>>& a, double lambda);

/// The sequence f_{n+1}(x) = f1(x) * sum_{i=0}^{n} lambda^{-i} with f_0 = 0.
/// Genuinely harmonic only for constant f1; exposed for energy dichotomy tests.
PointwiseFn stationary_family(const std::vector<double>& f1, double lambda);

/// Unit-conductance lattice Z^d, d in {1,2,3}.
Fixture lattice_fixture(int d);

/// Registry: list fixture names; construct by name with JSON-ish params
/// (lambda, d, variant) already resolved by the caller.
std::vector<std::string> fixture_names();
Fixture make_fixture(const std::string& name, double lambda = 2.0, int d = 2);

}  // namespace harmonet::models
