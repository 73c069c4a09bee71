#include "harmonet/transfer.hpp"

#include <cmath>

namespace harmonet::transfer {

std::vector<Eigen::VectorXd> propagate_q(const Eigen::VectorXd& q0,
                                         const std::vector<Eigen::MatrixXd>& r) {
    if (q0.size() == 0 || q0.minCoeff() <= 0.0)
        throw SpecError("q0 must be strictly positive");
    std::vector<Eigen::VectorXd> q{q0};
    for (std::size_t n = 0; n < r.size(); ++n) {
        const auto& m = r[n];
        if (m.rows() != q[n].size())
            throw SpecError("R dimension mismatch at level " + std::to_string(n));
        if (m.minCoeff() < 0.0) throw SpecError("R entries must be nonnegative");
        for (long w = 0; w < m.rows(); ++w)
            if (std::abs(m.row(w).sum() - 1.0) > 1e-12)
                throw SpecError("R row " + std::to_string(w) + " at level " + std::to_string(n) +
                                " is not stochastic");
        for (long v = 0; v < m.cols(); ++v)
            if (m.col(v).maxCoeff() <= 0.0)
                throw SpecError("zero column " + std::to_string(v) + " in R at level " +
                                std::to_string(n) + " would zero a q entry");
        Eigen::VectorXd next = m.transpose() * q[n];
        if (std::abs(next.sum() - q[n].sum()) > 1e-14 * std::max(1.0, q[n].sum()))
            throw NumericalError("probability mass not conserved at level " + std::to_string(n));
        q.push_back(std::move(next));
    }
    return q;
}

std::vector<Eigen::MatrixXd> dual_matrices(const std::vector<Eigen::MatrixXd>& r,
                                           const std::vector<Eigen::VectorXd>& q) {
    std::vector<Eigen::MatrixXd> s;
    for (std::size_t n = 0; n < r.size(); ++n) {
        Eigen::MatrixXd sn(r[n].cols(), r[n].rows());
        for (long v = 0; v < sn.rows(); ++v)
            for (long w = 0; w < sn.cols(); ++w)
                sn(v, w) = q[n][w] / q[n + 1][v] * r[n](w, v);
        s.push_back(std::move(sn));
    }
    return s;
}

TransferSystem make_transfer(Eigen::VectorXd q0, std::vector<Eigen::MatrixXd> r) {
    TransferSystem sys;
    sys.q = propagate_q(q0, r);
    sys.s = dual_matrices(r, sys.q);
    sys.r = std::move(r);
    return sys;
}

Eigen::VectorXd apply_transfer(const TransferSystem& sys, Direction dir, std::size_t n,
                               const Eigen::VectorXd& f) {
    if (n >= sys.bundles()) throw SpecError("transfer level out of range");
    if (dir == Direction::r) {
        if (f.size() != sys.r[n].cols())
            throw SpecError("T_R expects a level-" + std::to_string(n + 1) + " vector");
        return sys.r[n] * f;
    }
    if (f.size() != sys.s[n].cols())
        throw SpecError("T_S expects a level-" + std::to_string(n) + " vector");
    return sys.s[n] * f;
}

double level_inner(const TransferSystem& sys, std::size_t n, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b) {
    CompensatedSum acc;
    for (long v = 0; v < a.size(); ++v) acc.add(sys.q[n][v] * a[v] * b[v]);
    return acc.value();
}

double level_norm(const TransferSystem& sys, std::size_t n, const Eigen::VectorXd& a) {
    return std::sqrt(std::max(0.0, level_inner(sys, n, a, a)));
}

std::vector<Eigen::MatrixXd> conductance_from_transfer(const TransferSystem& sys) {
    std::vector<Eigen::MatrixXd> c;
    for (std::size_t n = 0; n < sys.bundles(); ++n) {
        Eigen::MatrixXd cn = sys.r[n];
        for (long v = 0; v < cn.rows(); ++v) cn.row(v) *= 0.5 * sys.q[n][v];
        c.push_back(std::move(cn));
    }
    return c;
}

bratteli::BratteliDiagram induced_diagram(const TransferSystem& sys) {
    std::vector<Eigen::MatrixXi> inc;
    auto cond = conductance_from_transfer(sys);
    for (const auto& cn : cond) {
        Eigen::MatrixXi a(cn.rows(), cn.cols());
        for (long i = 0; i < cn.rows(); ++i)
            for (long j = 0; j < cn.cols(); ++j) a(i, j) = cn(i, j) > 0 ? 1 : 0;
        inc.push_back(std::move(a));
    }
    return bratteli::build_diagram(std::move(inc), std::move(cond));
}

std::vector<double> harmonic_check_transfer(const TransferSystem& sys,
                                            const std::vector<Eigen::VectorXd>& f) {
    if (f.size() < 3) throw SpecError("harmonic_check_transfer needs at least three levels");
    std::vector<double> residuals;
    for (std::size_t n = 1; n + 1 < f.size() && n < sys.bundles(); ++n) {
        Eigen::VectorXd lhs = 2.0 * f[n] - sys.r[n] * f[n + 1] - sys.s[n - 1] * f[n - 1];
        residuals.push_back(level_norm(sys, n, lhs));
    }
    return residuals;
}

double q_markov_identity_residual(const TransferSystem& sys, std::size_t n) {
    if (n < 1 || n >= sys.bundles()) throw SpecError("q identity needs 1 <= n < bundle count");
    // (q^(n) M) restricted to level n+1 is (1/2) q^(n) R_n; restricted to level
    // n-1 it is (1/2) q^(n) S_{n-1}.
    Eigen::VectorXd up = 0.5 * (sys.r[n].transpose() * sys.q[n]);
    Eigen::VectorXd down = 0.5 * (sys.s[n - 1].transpose() * sys.q[n]);
    double r1 = (up - 0.5 * sys.q[n + 1]).cwiseAbs().maxCoeff();
    double r2 = (down - 0.5 * sys.q[n - 1]).cwiseAbs().maxCoeff();
    return std::max(r1, r2);
}

EnergySeries finite_energy_series(const TransferSystem& sys,
                                  const std::vector<Eigen::VectorXd>& f, std::size_t n_max) {
    EnergySeries out;
    auto diagram = induced_diagram(sys);
    CompensatedSum series, direct;
    for (std::size_t n = 0; n < n_max && n + 1 < f.size() && n < sys.bundles(); ++n) {
        double t = level_inner(sys, n, f[n], f[n]) -
                   2.0 * level_inner(sys, n, f[n], sys.r[n] * f[n + 1]) +
                   level_inner(sys, n + 1, f[n + 1], f[n + 1]);
        series.add(t);
        out.series_partial.push_back(series.value());
        direct.add(bratteli::bundle_energy(diagram, f, n));
        out.direct_energy.push_back(direct.value());
    }
    return out;
}

TransferSystem pascal_binomial_transfer(std::size_t bundles) {
    std::vector<Eigen::MatrixXd> r;
    for (std::size_t n = 0; n < bundles; ++n) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(long(n + 1), long(n + 2));
        for (std::size_t i = 0; i <= n; ++i) {
            m(long(i), long(i)) = 0.5;
            m(long(i), long(i) + 1) = 0.5;
        }
        r.push_back(std::move(m));
    }
    Eigen::VectorXd q0(1);
    q0[0] = 1.0;
    return make_transfer(q0, std::move(r));
}

}  // namespace harmonet::transfer
