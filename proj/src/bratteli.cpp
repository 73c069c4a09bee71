#include "harmonet/bratteli.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace harmonet::bratteli {

namespace {

void check_chain(const std::vector<Eigen::MatrixXi>& inc) {
    if (inc.empty()) throw SpecError("diagram needs at least one incidence matrix");
    for (std::size_t n = 0; n < inc.size(); ++n) {
        const auto& a = inc[n];
        if (a.rows() == 0 || a.cols() == 0) throw SpecError("empty incidence matrix");
        if (n + 1 < inc.size() && a.cols() != inc[n + 1].rows())
            throw SpecError("incidence dimension mismatch between levels " + std::to_string(n) +
                            " and " + std::to_string(n + 1));
        if (a.minCoeff() < 0) throw SpecError("incidence entries must be nonnegative");
        for (long i = 0; i < a.rows(); ++i)
            if (a.row(i).sum() == 0)
                throw SpecError("zero row in incidence matrix " + std::to_string(n));
        for (long j = 0; j < a.cols(); ++j)
            if (a.col(j).sum() == 0)
                throw SpecError("zero column in incidence matrix " + std::to_string(n));
    }
}

Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& m, double tol = 1e-10) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double scale = sv.size() ? sv[0] : 0.0;
    long rank = 0;
    for (long k = 0; k < sv.size(); ++k)
        if (sv[k] > tol * std::max(scale, 1.0)) ++rank;
    return svd.matrixV().rightCols(m.cols() - rank);
}

// Orthonormal basis of the column span.
Eigen::MatrixXd span_basis(const Eigen::MatrixXd& m, double tol = 1e-10) {
    if (m.cols() == 0) return Eigen::MatrixXd(m.rows(), 0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    double scale = sv.size() ? sv[0] : 0.0;
    long rank = 0;
    for (long k = 0; k < sv.size(); ++k)
        if (sv[k] > tol * std::max(scale, 1.0)) ++rank;
    return svd.matrixU().leftCols(rank);
}

// dim(span(a) intersect span(b)) for orthonormal bases a, b.
long intersection_dim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() == 0 || b.cols() == 0) return 0;
    Eigen::MatrixXd stacked(a.rows(), a.cols() + b.cols());
    stacked << a, -b;
    return kernel_basis(stacked).cols();
}

}  // namespace

std::size_t BratteliDiagram::level_size(std::size_t n) const {
    if (n < incidence.size()) return static_cast<std::size_t>(incidence[n].rows());
    if (n == incidence.size()) return static_cast<std::size_t>(incidence.back().cols());
    throw SpecError("level " + std::to_string(n) + " beyond diagram depth");
}

bool BratteliDiagram::zero_one() const {
    for (const auto& a : incidence)
        if (a.maxCoeff() > 1) return false;
    return true;
}

double BratteliDiagram::vertex_conductance(std::size_t n, std::size_t i) const {
    double c = 0.0;
    if (n < bundles()) c += conductance[n].row(long(i)).sum();
    if (n > 0) c += conductance[n - 1].col(long(i)).sum();
    return c;
}

BratteliDiagram build_diagram(std::vector<Eigen::MatrixXi> incidence, double lambda,
                              bool require_01) {
    std::vector<Eigen::MatrixXd> cond;
    cond.reserve(incidence.size());
    for (std::size_t n = 0; n < incidence.size(); ++n)
        cond.push_back(incidence[n].cast<double>() * std::pow(lambda, double(n)));
    return build_diagram(std::move(incidence), std::move(cond), require_01);
}

BratteliDiagram build_diagram(std::vector<Eigen::MatrixXi> incidence,
                              std::vector<Eigen::MatrixXd> conductance, bool require_01) {
    check_chain(incidence);
    if (conductance.size() != incidence.size())
        throw SpecError("conductance matrices must match incidence matrices");
    for (std::size_t n = 0; n < incidence.size(); ++n) {
        if (conductance[n].rows() != incidence[n].rows() ||
            conductance[n].cols() != incidence[n].cols())
            throw SpecError("conductance shape mismatch at level " + std::to_string(n));
        for (long i = 0; i < incidence[n].rows(); ++i)
            for (long j = 0; j < incidence[n].cols(); ++j) {
                bool edge = incidence[n](i, j) > 0;
                bool pos = conductance[n](i, j) > 0.0;
                if (edge != pos)
                    throw SpecError("conductance support mismatch at level " + std::to_string(n));
                if (require_01 && incidence[n](i, j) > 1)
                    throw SpecError("multi-edge at level " + std::to_string(n) +
                                    "; apply split_multi_edges first");
            }
    }
    BratteliDiagram d;
    d.incidence = std::move(incidence);
    d.conductance = std::move(conductance);
    return d;
}

BratteliDiagram split_multi_edges(const BratteliDiagram& d) {
    BratteliDiagram out;
    for (std::size_t n = 0; n < d.bundles(); ++n) {
        const auto& a = d.incidence[n];
        long edge_count = a.sum();
        Eigen::MatrixXi up(a.rows(), edge_count), down(edge_count, a.cols());
        Eigen::MatrixXd cup(a.rows(), edge_count), cdown(edge_count, a.cols());
        up.setZero();
        down.setZero();
        cup.setZero();
        cdown.setZero();
        long e = 0;
        for (long i = 0; i < a.rows(); ++i)
            for (long j = 0; j < a.cols(); ++j)
                for (int m = 0; m < a(i, j); ++m) {
                    // per-edge conductance: c_pair / multiplicity, halves doubled
                    double ce = d.conductance[n](i, j) / a(i, j);
                    up(i, e) = 1;
                    down(e, j) = 1;
                    cup(i, e) = 2.0 * ce;
                    cdown(e, j) = 2.0 * ce;
                    ++e;
                }
        out.incidence.push_back(up);
        out.incidence.push_back(down);
        out.conductance.push_back(cup);
        out.conductance.push_back(cdown);
    }
    return out;
}

BratteliDiagram stationary_diagram(const Eigen::MatrixXi& a, double lambda, std::size_t bundles) {
    std::vector<Eigen::MatrixXi> inc(bundles, a);
    return build_diagram(std::move(inc), lambda);
}

BratteliDiagram pascal_diagram(std::size_t bundles, double lambda) {
    std::vector<Eigen::MatrixXi> inc;
    for (std::size_t n = 0; n < bundles; ++n) {
        Eigen::MatrixXi a(n + 1, n + 2);
        a.setZero();
        for (std::size_t i = 0; i <= n; ++i) {
            a(long(i), long(i)) = 1;
            a(long(i), long(i) + 1) = 1;
        }
        inc.push_back(a);
    }
    return build_diagram(std::move(inc), lambda);
}

ArrowMatrices arrow_matrices(const BratteliDiagram& d, std::size_t n) {
    if (n >= d.bundles())
        throw SpecError("arrow matrices need levels n-1, n, n+1 inside the diagram");
    ArrowMatrices out;
    const std::size_t vn = d.level_size(n);
    out.left.resize(long(vn), d.conductance[n].cols());
    out.right.resize(long(vn), n == 0 ? 0 : d.conductance[n - 1].rows());
    for (std::size_t x = 0; x < vn; ++x) {
        double cx = d.vertex_conductance(n, x);
        out.left.row(long(x)) = d.conductance[n].row(long(x)) / cx;
        if (n > 0) out.right.row(long(x)) = d.conductance[n - 1].col(long(x)).transpose() / cx;
    }
    return out;
}

HarmonicExtension harmonic_extend(const BratteliDiagram& d, const Eigen::VectorXd& f_prev,
                                  const Eigen::VectorXd& f_cur, std::size_t n, bool arrow_form) {
    if (n < 1 || n >= d.bundles())
        throw SpecError("harmonic_extend needs 1 <= n < bundle count");
    if (f_prev.size() != long(d.level_size(n - 1)) || f_cur.size() != long(d.level_size(n)))
        throw SpecError("level vector dimensions do not match the diagram");

    Eigen::MatrixXd lhs;
    Eigen::VectorXd rhs;
    if (!arrow_form) {
        // C_n f_{n+1} = D_n f_n - C_{n-1}^T f_{n-1}
        lhs = d.conductance[n];
        Eigen::VectorXd dn(long(d.level_size(n)));
        for (std::size_t x = 0; x < d.level_size(n); ++x)
            dn[long(x)] = d.vertex_conductance(n, x);
        rhs = dn.cwiseProduct(f_cur) - d.conductance[n - 1].transpose() * f_prev;
    } else {
        // P_left_n f_{n+1} = f_n - P_right_{n-1} f_{n-1}
        auto arrows = arrow_matrices(d, n);
        lhs = arrows.left;
        rhs = f_cur - arrows.right * f_prev;
    }

    HarmonicExtension out;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(lhs);
    out.particular = cod.solve(rhs);
    out.kernel = kernel_basis(lhs);
    out.residual = (lhs * out.particular - rhs).norm();
    return out;
}

ExistenceReport harmonic_exists(const BratteliDiagram& d, std::size_t depth) {
    depth = std::min(depth, d.bundles() - 1);
    ExistenceReport rep;

    // N_1 = ker C_0 (as a map R^{|V_1|} -> R^{|V_0|}); the chain then tracks
    // G_n = N_n + P_right_{n-1} N_{n-1} and N_{n+1} = preimage of G_n under P_left_n.
    Eigen::MatrixXd c0 = d.conductance[0];
    Eigen::MatrixXd n_prev;  // basis of N_{n-1}
    Eigen::MatrixXd n_cur = kernel_basis(c0);
    if (n_cur.cols() == 0) {
        rep.failing_depth = 0;
        return rep;
    }

    for (std::size_t n = 1; n <= depth; ++n) {
        auto arrows = arrow_matrices(d, n);
        Eigen::MatrixXd g;
        if (n == 1 || n_prev.cols() == 0) {
            g = span_basis(n_cur);
        } else {
            Eigen::MatrixXd both(n_cur.rows(), n_cur.cols() + n_prev.cols());
            both << n_cur, arrows.right * n_prev;
            g = span_basis(both);
        }
        Eigen::MatrixXd col = span_basis(arrows.left);
        bool full_rank = col.cols() == long(d.level_size(n));
        long meet = full_rank ? g.cols() : intersection_dim(col, g);
        if (meet == 0) {
            rep.failing_depth = int(n);
            return rep;
        }
        // N_{n+1} = { f : P_left_n f in G_n } = ker( (I - g g^T) P_left_n )
        Eigen::MatrixXd proj_out =
            Eigen::MatrixXd::Identity(g.rows(), g.rows()) - g * g.transpose();
        n_prev = n_cur;
        n_cur = kernel_basis(proj_out * arrows.left);
        if (n_cur.cols() == 0) {
            rep.failing_depth = int(n);
            return rep;
        }
    }
    rep.exists = true;

    // Witness from the joint prefix system (f_0 = 0): root equation C_0 f_1 = 0
    // plus the level equations up to `depth`.
    std::size_t cols = 0;
    for (std::size_t n = 1; n <= depth + 1; ++n) cols += d.level_size(n);
    std::vector<std::size_t> col_off(depth + 2, 0);
    for (std::size_t n = 2; n <= depth + 1; ++n)
        col_off[n] = col_off[n - 1] + d.level_size(n - 1);
    std::size_t rows = d.level_size(0);
    for (std::size_t n = 1; n <= depth; ++n) rows += d.level_size(n);
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(long(rows), long(cols));
    big.block(0, long(col_off[1]), long(d.level_size(0)), long(d.level_size(1))) =
        d.conductance[0];
    std::size_t row = d.level_size(0);
    for (std::size_t n = 1; n <= depth; ++n) {
        long vn = long(d.level_size(n));
        Eigen::VectorXd dn(vn);
        for (std::size_t x = 0; x < d.level_size(n); ++x)
            dn[long(x)] = d.vertex_conductance(n, x);
        if (n >= 2)
            big.block(long(row), long(col_off[n - 1]), vn, long(d.level_size(n - 1))) =
                d.conductance[n - 1].transpose();
        big.block(long(row), long(col_off[n]), vn, vn) = -Eigen::MatrixXd(dn.asDiagonal());
        big.block(long(row), long(col_off[n + 1]), vn, long(d.level_size(n + 1))) =
            d.conductance[n];
        row += d.level_size(n);
    }
    Eigen::MatrixXd null_basis = kernel_basis(big);
    if (null_basis.cols() == 0) {
        rep.exists = false;
        rep.failing_depth = int(depth);
        return rep;
    }
    Eigen::VectorXd w = null_basis.col(0);
    double peak = w.cwiseAbs().maxCoeff();
    if (peak > 0) w /= peak;
    rep.witness.push_back(Eigen::VectorXd::Zero(long(d.level_size(0))));
    for (std::size_t n = 1; n <= depth + 1; ++n)
        rep.witness.push_back(w.segment(long(col_off[n]), long(d.level_size(n))));
    return rep;
}

CurrentReport currents(const BratteliDiagram& d, const std::vector<Eigen::VectorXd>& f,
                       std::size_t n) {
    if (n < 1 || n >= d.bundles() || f.size() <= n + 1)
        throw SpecError("currents need f on levels n-1, n, n+1 with 1 <= n < bundle count");
    const long vn = long(d.level_size(n));
    CurrentReport rep{Eigen::VectorXd::Zero(vn), Eigen::VectorXd::Zero(vn), 0.0, 0.0};
    for (long x = 0; x < vn; ++x) {
        CompensatedSum in, out;
        for (long y = 0; y < f[n - 1].size(); ++y) {
            double c = d.conductance[n - 1](y, x);
            if (c > 0) in.add(c * (f[n][x] - f[n - 1][y]));
        }
        for (long z = 0; z < f[n + 1].size(); ++z) {
            double c = d.conductance[n](x, z);
            if (c > 0) out.add(c * (f[n + 1][z] - f[n][x]));
        }
        rep.incoming[x] = in.value();
        rep.outgoing[x] = out.value();
        rep.max_imbalance = std::max(rep.max_imbalance, std::abs(in.value() - out.value()));
    }
    rep.level_total = rep.incoming.sum();
    return rep;
}

double base_current(const BratteliDiagram& d, const std::vector<Eigen::VectorXd>& f) {
    CompensatedSum s;
    for (long w = 0; w < f[0].size(); ++w)
        for (long x = 0; x < f[1].size(); ++x) {
            double c = d.conductance[0](w, x);
            if (c > 0) s.add(c * (f[1][x] - f[0][w]));
        }
    return s.value();
}

namespace {

double harmonic_residual(const BratteliDiagram& d, const std::vector<Eigen::VectorXd>& f,
                         std::size_t n_max_excl) {
    // residual of the level equations at levels 0 .. n_max_excl-1
    double worst = 0.0;
    for (std::size_t n = 0; n < n_max_excl && n + 1 < f.size(); ++n) {
        for (long x = 0; x < f[n].size(); ++x) {
            CompensatedSum lap;
            double scale = 1.0;
            if (n > 0)
                for (long y = 0; y < f[n - 1].size(); ++y) {
                    double c = d.conductance[n - 1](y, x);
                    if (c > 0) {
                        lap.add(c * (f[n][x] - f[n - 1][y]));
                        scale = std::max(scale, c * std::max(1.0, std::abs(f[n][x])));
                    }
                }
            for (long z = 0; z < f[n + 1].size(); ++z) {
                double c = d.conductance[n](x, z);
                if (c > 0) {
                    lap.add(c * (f[n][x] - f[n + 1][z]));
                    scale = std::max(scale, c * std::max(1.0, std::abs(f[n][x])));
                }
            }
            worst = std::max(worst, std::abs(lap.value()) / scale);
        }
    }
    return worst;
}

}  // namespace

ExtremaReport level_extrema(const BratteliDiagram& d, const std::vector<Eigen::VectorXd>& f,
                            std::size_t n_min, std::size_t n_max, double tol) {
    if (n_max + 1 >= f.size()) throw SpecError("level_extrema needs f through level n_max + 1");
    double res = harmonic_residual(d, f, n_max + 1);
    if (res > tol)
        throw PreconditionError("function is not harmonic on the checked levels (residual " +
                                    std::to_string(res) + ")",
                                res);
    double lo = f[0].minCoeff(), hi = f[0].maxCoeff();
    for (std::size_t n = 1; n <= n_max; ++n) {
        lo = std::min(lo, f[n].minCoeff());
        hi = std::max(hi, f[n].maxCoeff());
    }
    if (hi - lo <= tol * std::max(1.0, std::abs(hi)))
        throw PreconditionError("constant function rejected by level_extrema");

    ExtremaReport rep;
    for (std::size_t n = n_min; n <= n_max; ++n) {
        rep.max_per_level.push_back(f[n].maxCoeff());
        rep.min_per_level.push_back(f[n].minCoeff());
    }
    rep.max_strictly_increasing = true;
    rep.min_strictly_decreasing = true;
    for (std::size_t k = 1; k < rep.max_per_level.size(); ++k) {
        rep.max_strictly_increasing &= rep.max_per_level[k] > rep.max_per_level[k - 1];
        rep.min_strictly_decreasing &= rep.min_per_level[k] < rep.min_per_level[k - 1];
    }
    return rep;
}

EnergyBoundResult energy_lower_bound(const BratteliDiagram& d,
                                     const std::vector<Eigen::VectorXd>& f, std::size_t n_max) {
    EnergyBoundResult out;
    out.i1 = base_current(d, f);
    CompensatedSum acc;
    for (std::size_t n = 0; n <= n_max && n < d.bundles(); ++n) {
        double beta = 0.0;
        for (std::size_t x = 0; x < d.level_size(n); ++x)
            beta = std::max(beta, d.vertex_conductance(n, x));
        out.beta.push_back(beta);
        acc.add(out.i1 * out.i1 / (beta * double(d.level_size(n))));
        out.partial.push_back(acc.value());
    }
    // dyadic block test: the trend diverges when the last block of terms is
    // not collapsing relative to the previous block (harmonic-series rate)
    std::size_t m = out.partial.size();
    if (m >= 8) {
        double b2 = out.partial[m - 1] - out.partial[m / 2];
        double b1 = out.partial[m / 2] - out.partial[m / 4];
        out.diverging_trend = b1 > 0 && b2 > 0.5 * b1;
    }
    return out;
}

double bundle_energy(const BratteliDiagram& d, const std::vector<Eigen::VectorXd>& f,
                     std::size_t n) {
    CompensatedSum s;
    for (long x = 0; x < f[n].size(); ++x)
        for (long z = 0; z < f[n + 1].size(); ++z) {
            double c = d.conductance[n](x, z);
            if (c > 0) {
                double diff = f[n][x] - f[n + 1][z];
                s.add(c * diff * diff);
            }
        }
    return s.value();
}

LevelingReport graph_to_bratteli(std::shared_ptr<const Network> net, const VertexId& root,
                                 std::size_t depth) {
    LevelingReport rep;
    std::map<VertexId, std::pair<std::size_t, std::size_t>> level_of;  // vertex -> (level, idx)
    rep.levels.push_back({root});
    level_of[root] = {0, 0};
    std::vector<NeighborEntry> nbrs;
    for (std::size_t n = 0; n < depth; ++n) {
        std::set<VertexId> next;
        for (const auto& x : rep.levels[n]) {
            net->neighbors(x, nbrs);
            for (const auto& e : nbrs)
                if (!level_of.count(e.to)) next.insert(e.to);
            nbrs.clear();
        }
        if (next.empty()) break;
        rep.levels.emplace_back(next.begin(), next.end());
        std::size_t idx = 0;
        for (const auto& v : rep.levels.back()) level_of[v] = {n + 1, idx++};
    }

    // (ii) no intra-level edges, (iii) next-level neighbor for every vertex,
    // (i) deg >= 2 for all but at most one vertex
    std::size_t small_degree = 0;
    VertexId small_witness;
    for (std::size_t n = 0; n < rep.levels.size(); ++n) {
        for (const auto& x : rep.levels[n]) {
            net->neighbors(x, nbrs);
            if (nbrs.size() < 2) {
                ++small_degree;
                small_witness = x;
            }
            bool has_next = false;
            for (const auto& e : nbrs) {
                auto it = level_of.find(e.to);
                if (it == level_of.end()) {
                    has_next = true;  // beyond materialized depth
                    continue;
                }
                if (it->second.first == n) {
                    rep.violation = "intra-level edge (" + x.to_string() + "," + e.to.to_string() +
                                    ") at level " + std::to_string(n);
                    nbrs.clear();
                    return rep;
                }
                if (it->second.first == n + 1) has_next = true;
            }
            nbrs.clear();
            if (!has_next && n + 1 < rep.levels.size()) {
                rep.violation = "vertex " + x.to_string() + " at level " + std::to_string(n) +
                                " has no neighbor at level " + std::to_string(n + 1);
                return rep;
            }
        }
    }
    if (small_degree > 1) {
        rep.violation = "more than one vertex of degree < 2 (e.g. " + small_witness.to_string() + ")";
        return rep;
    }

    for (std::size_t n = 0; n + 1 < rep.levels.size(); ++n) {
        Eigen::MatrixXi a(long(rep.levels[n].size()), long(rep.levels[n + 1].size()));
        Eigen::MatrixXd c(a.rows(), a.cols());
        a.setZero();
        c.setZero();
        for (std::size_t i = 0; i < rep.levels[n].size(); ++i) {
            net->neighbors(rep.levels[n][i], nbrs);
            for (const auto& e : nbrs) {
                auto it = level_of.find(e.to);
                if (it != level_of.end() && it->second.first == n + 1) {
                    a(long(i), long(it->second.second)) = 1;
                    c(long(i), long(it->second.second)) = e.conductance;
                }
            }
            nbrs.clear();
        }
        rep.diagram.incidence.push_back(a);
        rep.diagram.conductance.push_back(c);
    }
    rep.ok = true;
    return rep;
}

namespace {

class DiagramNetwork : public Network {
public:
    explicit DiagramNetwork(std::shared_ptr<const BratteliDiagram> d) : d_(std::move(d)) {
        origin_ = VertexId::of(0, 0);
    }

    bool contains(const VertexId& x) const override {
        if (x.rank() != 2 || x[0] < 0 || x[1] < 0) return false;
        std::int64_t n = x[0];
        if (n >= std::int64_t(d_->levels())) return false;
        return x[1] < std::int64_t(d_->level_size(std::size_t(n)));
    }

    void neighbors(const VertexId& x, std::vector<NeighborEntry>& out) const override {
        if (!contains(x))
            throw InvalidVertexError("vertex " + x.to_string() + " outside the materialized diagram");
        auto n = std::size_t(x[0]);
        auto i = long(x[1]);
        if (n > 0) {
            const auto& c = d_->conductance[n - 1];
            for (long y = 0; y < c.rows(); ++y)
                if (c(y, i) > 0) out.push_back({VertexId::of(std::int64_t(n) - 1, y), c(y, i)});
        }
        if (n < d_->bundles()) {
            const auto& c = d_->conductance[n];
            for (long z = 0; z < c.cols(); ++z)
                if (c(i, z) > 0) out.push_back({VertexId::of(std::int64_t(n) + 1, z), c(i, z)});
        }
    }

    std::string name() const override { return "bratteli_diagram"; }

private:
    std::shared_ptr<const BratteliDiagram> d_;
};

}  // namespace

std::shared_ptr<const Network> diagram_network(std::shared_ptr<const BratteliDiagram> d) {
    return std::make_shared<DiagramNetwork>(std::move(d));
}

PointwiseFn level_function(std::shared_ptr<const std::vector<Eigen::VectorXd>> f) {
    return [f](const VertexId& v) -> double {
        auto n = std::size_t(v[0]);
        if (n >= f->size() || v[1] >= (*f)[n].size())
            throw WindowTooSmallError("level function undefined at " + v.to_string());
        return (*f)[n][v[1]];
    };
}

}  // namespace harmonet::bratteli
