#pragma once

#include <Eigen/Dense>
#include <vector>

#include "harmonet/bratteli.hpp"

namespace harmonet::transfer {

/// Probability-vector propagation system on a leveled graph: row-stochastic
/// matrices R_n (|V_n| x |V_{n+1}|, positive exactly on edges), the propagated
/// strictly positive level vectors q^(n), and the dual matrices S_n
/// (|V_{n+1}| x |V_n|) with s_{v,w} = (q^(n)_w / q^(n+1)_v) r_{w,v}.
struct TransferSystem {
    std::vector<Eigen::MatrixXd> r;
    std::vector<Eigen::VectorXd> q;  // q[0..N]
    std::vector<Eigen::MatrixXd> s;

    std::size_t bundles() const { return r.size(); }
    std::size_t level_size(std::size_t n) const {
        return n < r.size() ? std::size_t(r[n].rows()) : std::size_t(r.back().cols());
    }
};

/// Validates q0 > 0, row-stochastic R on edge supports, rejects zero columns
/// (they would zero a q entry), propagates q, and builds the duals.
TransferSystem make_transfer(Eigen::VectorXd q0, std::vector<Eigen::MatrixXd> r);

/// q^(n+1)_v = sum_w q^(n)_w r^(n)_{w,v}; mass is conserved level to level.
std::vector<Eigen::VectorXd> propagate_q(const Eigen::VectorXd& q0,
                                         const std::vector<Eigen::MatrixXd>& r);

std::vector<Eigen::MatrixXd> dual_matrices(const std::vector<Eigen::MatrixXd>& r,
                                           const std::vector<Eigen::VectorXd>& q);

enum class Direction { r, s };

/// T_{R_n}: H_{n+1} -> H_n (f on level n+1); T_{S_n}: H_n -> H_{n+1}.
/// Both are positive and contractive in the weighted norms.
Eigen::VectorXd apply_transfer(const TransferSystem& sys, Direction dir, std::size_t n,
                               const Eigen::VectorXd& f);

/// Weighted inner product of level-n vectors: sum q^(n)_v a(v) b(v).
double level_inner(const TransferSystem& sys, std::size_t n, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b);
double level_norm(const TransferSystem& sys, std::size_t n, const Eigen::VectorXd& a);

/// Induced conductances c^(n)_{vu} = 1/2 q^(n)_v r^(n)_{v,u}. Symmetric across
/// the edge by the duality identity; the induced total conductance equals
/// q^(n)_v at interior levels and q^(0)_v / 2 at the root level.
std::vector<Eigen::MatrixXd> conductance_from_transfer(const TransferSystem& sys);

/// The induced weighted diagram (incidence = support of R).
bratteli::BratteliDiagram induced_diagram(const TransferSystem& sys);

/// Weighted residuals || 2 f_n - R_n f_{n+1} - S_{n-1} f_{n-1} ||_{H_n} for n
/// in 1..N-1; zero exactly when f is harmonic for the induced Markov kernel.
std::vector<double> harmonic_check_transfer(const TransferSystem& sys,
                                            const std::vector<Eigen::VectorXd>& f);

/// || q^(n) M - (q^(n+1) + q^(n-1))/2 ||_inf for the induced kernel M.
double q_markov_identity_residual(const TransferSystem& sys, std::size_t n);

struct EnergySeries {
    std::vector<double> series_partial;  // partial sums of the displayed terms
    std::vector<double> direct_energy;   // window energies of the induced network
                                         // (the series telescopes to twice these)
};

/// Terms ||f_n||^2 - 2 <f_n, T_R f_{n+1}> + ||f_{n+1}||^2 for n = 0..N-1,
/// alongside the direct bundle-energy partial sums.
EnergySeries finite_energy_series(const TransferSystem& sys,
                                  const std::vector<Eigen::VectorXd>& f, std::size_t n_max);

/// Pascal fixture: R_n rows (1/2, 1/2) on the Pascal support; q becomes the
/// binomial distribution binom(n,i)/2^n.
TransferSystem pascal_binomial_transfer(std::size_t bundles);

}  // namespace harmonet::transfer
