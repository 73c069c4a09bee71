#include "harmonet/random_walk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "harmonet/potential.hpp"

namespace harmonet::walk {

namespace {

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HARMONET_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    return 1;
}

// One step of the conductance-weighted walk. Returns false when the move
// would leave the range cap (the caller censors the path).
class Stepper {
public:
    Stepper(const Network& net, std::int64_t range_cap) : net_(net), cap_(range_cap) {}

    bool step(VertexId& pos, CounterRng& rng) {
        net_.neighbors(pos, nbrs_);
        double total = 0.0;
        for (const auto& e : nbrs_) total += e.conductance;
        double u = rng.next_double() * total;
        double acc = 0.0;
        const NeighborEntry* chosen = &nbrs_.back();
        for (const auto& e : nbrs_) {
            acc += e.conductance;
            if (u < acc) {
                chosen = &e;
                break;
            }
        }
        if (cap_ >= 0 && radial_bound(chosen->to) > cap_) {
            nbrs_.clear();
            return false;
        }
        pos = chosen->to;
        nbrs_.clear();
        return true;
    }

private:
    const Network& net_;
    std::int64_t cap_;
    std::vector<NeighborEntry> nbrs_;
};

struct ReplicateStats {
    CompensatedSum sum, sum_sq;
    std::uint64_t n = 0;
    std::uint64_t censored = 0;
};

// Deterministic parallel Monte Carlo: worker w runs local replicates
// 0..n_w-1 with streams keyed by (seed, stream, w, replicate); partial sums
// are combined in worker order.
template <typename Fn>
ReplicateStats run_replicated(const WalkParams& params, std::uint64_t stream, Fn&& replicate) {
    int workers = resolve_workers(params.workers);
    std::vector<ReplicateStats> partial(static_cast<std::size_t>(workers));
    auto work = [&](int w) {
        std::uint64_t n_local = params.samples / std::uint64_t(workers) +
                                (std::uint64_t(w) < params.samples % std::uint64_t(workers) ? 1 : 0);
        ReplicateStats st;
        for (std::uint64_t r = 0; r < n_local; ++r) {
            CounterRng rng(params.seed, stream, std::uint32_t(w), std::uint32_t(r));
            auto [value, censored] = replicate(rng);
            st.sum.add(value);
            st.sum_sq.add(value * value);
            ++st.n;
            if (censored) ++st.censored;
        }
        partial[static_cast<std::size_t>(w)] = st;
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    ReplicateStats total;
    for (const auto& st : partial) {
        total.sum.add(st.sum.value());
        total.sum_sq.add(st.sum_sq.value());
        total.n += st.n;
        total.censored += st.censored;
    }
    return total;
}

WalkEstimate finish(const std::string& quantity, const WalkParams& params,
                    const ReplicateStats& st, bool binomial) {
    WalkEstimate est;
    est.quantity = quantity;
    est.samples = st.n;
    est.horizon = params.horizon;
    est.seed = params.seed;
    est.censored = st.n ? double(st.censored) / double(st.n) : 0.0;
    double n = double(st.n);
    est.point = st.sum.value() / n;
    if (binomial) {
        est.stderr_ = std::sqrt(std::max(0.0, est.point * (1.0 - est.point)) / n);
    } else {
        double var = (st.sum_sq.value() - n * est.point * est.point) / std::max(1.0, n - 1.0);
        est.stderr_ = std::sqrt(std::max(0.0, var) / n);
    }
    return est;
}

// First-hitting distribution over a small target set F: index of the hit
// vertex (tau >= 0, so a start inside F hits immediately), or -1 when censored.
int walk_to_set(Stepper& stepper, VertexId pos, const std::vector<VertexId>& targets,
                std::int64_t horizon, CounterRng& rng) {
    auto find = [&](const VertexId& v) -> int {
        auto it = std::lower_bound(targets.begin(), targets.end(), v);
        if (it != targets.end() && *it == v) return int(it - targets.begin());
        return -1;
    };
    int k = find(pos);
    if (k >= 0) return k;
    for (std::int64_t s = 1; s <= horizon; ++s) {
        if (!stepper.step(pos, rng)) return -1;
        k = find(pos);
        if (k >= 0) return k;
    }
    return -1;
}

}  // namespace

std::int64_t radial_bound(const VertexId& v) {
    if (v.rank() == 2) return std::int64_t(std::llabs(v[0]));  // level comes first
    std::int64_t m = 0;
    for (int k = 0; k < v.rank(); ++k) m = std::max(m, std::int64_t(std::llabs(v[k])));
    return m;
}

StopRule StopRule::fixed(std::int64_t n) { return {Kind::fixed_length, n, {}, -1}; }
StopRule StopRule::hit(std::vector<VertexId> targets) {
    std::sort(targets.begin(), targets.end());
    return {Kind::hit_set, 0, std::move(targets), -1};
}
StopRule StopRule::hit_capped(std::vector<VertexId> targets, std::int64_t horizon) {
    std::sort(targets.begin(), targets.end());
    return {Kind::hit_set_capped, 0, std::move(targets), horizon};
}

std::vector<VertexId> sample_path(const Network& net, const VertexId& start, const StopRule& stop,
                                  std::uint64_t seed, std::int64_t range_cap) {
    if (!net.contains(start)) throw InvalidVertexError("unknown start " + start.to_string());
    std::vector<VertexId> path{start};
    Stepper stepper(net, range_cap);
    CounterRng rng(seed, 0, 0, 0);
    auto hit = [&](const VertexId& v) {
        return std::binary_search(stop.targets.begin(), stop.targets.end(), v);
    };
    VertexId pos = start;
    std::int64_t limit = stop.kind == StopRule::Kind::fixed_length ? stop.length
                         : stop.kind == StopRule::Kind::hit_set_capped
                             ? stop.horizon
                             : std::numeric_limits<std::int64_t>::max();
    if (stop.kind != StopRule::Kind::fixed_length && hit(pos)) return path;
    for (std::int64_t s = 0; s < limit; ++s) {
        if (!stepper.step(pos, rng)) break;
        path.push_back(pos);
        if (stop.kind != StopRule::Kind::fixed_length && hit(pos)) break;
    }
    return path;
}

WalkEstimate estimate_F(const Network& net, const VertexId& x, const VertexId& y,
                        const WalkParams& params) {
    if (x == y) throw SpecError("estimate_F needs x != y");
    if (!net.contains(x) || !net.contains(y)) throw InvalidVertexError("unknown vertex");
    auto st = run_replicated(params, 1, [&](CounterRng& rng) -> std::pair<double, bool> {
        Stepper stepper(net, params.range_cap);
        VertexId pos = x;
        for (std::int64_t s = 1; s <= params.horizon; ++s) {
            if (!stepper.step(pos, rng)) return {0.0, true};
            if (pos == y) return {1.0, false};
        }
        return {0.0, true};
    });
    return finish("F(" + x.to_string() + "->" + y.to_string() + ")", params, st, true);
}

UEstimate estimate_U(const Network& net, const VertexId& x, const WalkParams& params) {
    UEstimate out;
    auto st = run_replicated(params, 2, [&](CounterRng& rng) -> std::pair<double, bool> {
        Stepper stepper(net, params.range_cap);
        VertexId pos = x;
        for (std::int64_t s = 1; s <= params.horizon; ++s) {
            if (!stepper.step(pos, rng)) return {0.0, true};
            if (pos == x) return {1.0, false};
        }
        return {0.0, true};
    });
    out.direct = finish("U(" + x.to_string() + ")", params, st, true);

    auto nbrs = net.neighbors_of(x);
    double cx = 0.0;
    for (const auto& e : nbrs) cx += e.conductance;
    double point = 0.0, var = 0.0, censored = 0.0;
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
        WalkParams sub = params;
        sub.seed = params.seed;
        // distinct stream per neighbor
        auto stk = run_replicated(sub, 100 + k, [&](CounterRng& rng) -> std::pair<double, bool> {
            Stepper stepper(net, params.range_cap);
            VertexId pos = nbrs[k].to;
            if (pos == x) return {1.0, false};
            for (std::int64_t s = 1; s <= params.horizon; ++s) {
                if (!stepper.step(pos, rng)) return {0.0, true};
                if (pos == x) return {1.0, false};
            }
            return {0.0, true};
        });
        auto est = finish("F", sub, stk, true);
        double p = nbrs[k].conductance / cx;
        point += p * est.point;
        var += p * p * est.stderr_ * est.stderr_;
        censored += p * est.censored;
    }
    out.via_neighbors = out.direct;
    out.via_neighbors.quantity = "U_via_F(" + x.to_string() + ")";
    out.via_neighbors.point = point;
    out.via_neighbors.stderr_ = std::sqrt(var);
    out.via_neighbors.censored = censored;
    return out;
}

WalkEstimate estimate_green_visits(const Network& net, const VertexId& x, const VertexId& y,
                                   const WalkParams& params) {
    auto st = run_replicated(params, 3, [&](CounterRng& rng) -> std::pair<double, bool> {
        Stepper stepper(net, params.range_cap);
        VertexId pos = x;
        double visits = pos == y ? 1.0 : 0.0;
        for (std::int64_t s = 1; s <= params.horizon; ++s) {
            if (!stepper.step(pos, rng)) break;
            if (pos == y) visits += 1.0;
        }
        return {visits, true};  // the series is infinite; every path is truncated
    });
    return finish("G(" + x.to_string() + "," + y.to_string() + ")", params, st, false);
}

GreenSeries green_truncated(const Network& net, const VertexId& x, const VertexId& y,
                            const WindowPtr& window, int n_steps) {
    auto xi = window->index_of(x), yi = window->index_of(y);
    if (!xi || !yi) throw WindowTooSmallError("green_truncated endpoints must lie in the window");

    // Window-restricted kernel rows; a row is unusable when the vertex has
    // neighbors outside the window (mass would leak).
    const std::size_t n = window->size();
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
    std::vector<bool> complete(n, true);
    std::vector<NeighborEntry> nbrs;
    for (std::size_t i = 0; i < n; ++i) {
        net.neighbors(window->vertex(i), nbrs);
        double total = 0.0;
        for (const auto& e : nbrs) total += e.conductance;
        for (const auto& e : nbrs) {
            auto j = window->index_of(e.to);
            if (!j) {
                complete[i] = false;
                rows[i].clear();
                break;
            }
            rows[i].emplace_back(*j, e.conductance / total);
        }
        nbrs.clear();
    }

    GreenSeries out;
    std::vector<double> mass(n, 0.0), next(n, 0.0);
    mass[*xi] = 1.0;
    CompensatedSum partial;
    partial.add(mass[*yi]);
    out.partial.push_back(partial.value());
    for (int step = 1; step <= n_steps; ++step) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (mass[i] == 0.0) continue;
            if (!complete[i])
                throw WindowTooSmallError(
                    "green_truncated window too small: reachable vertex " +
                        window->vertex(i).to_string() + " has neighbors outside; need radius >= " +
                        std::to_string(n_steps),
                    window->vertex(i).to_string());
            for (const auto& [j, p] : rows[i]) next[j] += mass[i] * p;
        }
        std::swap(mass, next);
        partial.add(mass[*yi]);
        out.partial.push_back(partial.value());
    }

    // Dyadic block trend for the recurrence flag.
    const auto& s = out.partial;
    std::size_t m = s.size() - 1;
    if (m >= 8) {
        double b2 = s[m] - s[m / 2];
        double b1 = s[m / 2] - s[m / 4];
        out.block_ratio = b1 > 0 ? b2 / b1 : 0.0;
        if (out.block_ratio > 0 && out.block_ratio < 1.0)
            out.tail_estimate = b2 * out.block_ratio / (1.0 - out.block_ratio);
        else if (b2 > 0)
            out.tail_estimate = std::numeric_limits<double>::infinity();
        out.recurrent_consistent = out.block_ratio >= 0.95;
    }
    return out;
}

bool GreenIdentitiesReport::all_ok() const {
    for (const auto& c : checks)
        if (!c.ok) return false;
    return true;
}

GreenIdentitiesReport green_identities_report(const Network& net, const VertexId& x,
                                              const VertexId& y, const WalkParams& params) {
    GreenIdentitiesReport rep;
    auto gxy = estimate_green_visits(net, x, y, params);
    auto gyx = estimate_green_visits(net, y, x, params);
    auto gxx = estimate_green_visits(net, x, x, params);
    auto gyy = estimate_green_visits(net, y, y, params);
    auto fxy = estimate_F(net, x, y, params);
    auto fyx = estimate_F(net, y, x, params);
    auto ux = estimate_U(net, x, params);
    double cx = total_conductance(net, x);
    double cy = total_conductance(net, y);

    auto add = [&](const std::string& name, double lhs, double slhs, double rhs, double srhs) {
        IdentityCheck c;
        c.name = name;
        c.lhs = lhs;
        c.rhs = rhs;
        c.sigma = std::sqrt(slhs * slhs + srhs * srhs);
        c.ok = std::abs(lhs - rhs) <= 3.0 * std::max(c.sigma, 1e-12);
        rep.checks.push_back(c);
    };

    add("G(x,y) = F(x,y) G(y,y)", gxy.point, gxy.stderr_, fxy.point * gyy.point,
        std::abs(fxy.point) * gyy.stderr_ + std::abs(gyy.point) * fxy.stderr_);
    add("G(x,x) (1 - U(x,x)) = 1", gxx.point * (1.0 - ux.direct.point),
        std::abs(1.0 - ux.direct.point) * gxx.stderr_ + std::abs(gxx.point) * ux.direct.stderr_,
        1.0, 0.0);
    add("c(x) F(x,y) = c(y) F(y,x)", cx * fxy.point, cx * fxy.stderr_, cy * fyx.point,
        cy * fyx.stderr_);
    add("c(x) G(x,y) = c(y) G(y,x)", cx * gxy.point, cx * gxy.stderr_, cy * gyx.point,
        cy * gyx.stderr_);
    return rep;
}

namespace {

// Residual of Delta w against a finitely supported rhs over the eval window
// vertices whose neighborhoods lie inside the window.
std::pair<double, std::size_t> delta_residual(const Network& net, const VertexFunction& w,
                                              const std::map<VertexId, double>& rhs) {
    double worst = 0.0;
    std::size_t used = 0;
    std::vector<NeighborEntry> nbrs;
    for (std::size_t i = 0; i < w.window().size(); ++i) {
        if (!w.window().has_full_neighborhood(i)) continue;
        const VertexId& v = w.window().vertex(i);
        net.neighbors(v, nbrs);
        CompensatedSum lap;
        for (const auto& e : nbrs) lap.add(e.conductance * (w[i] - w[*w.window().index_of(e.to)]));
        nbrs.clear();
        auto it = rhs.find(v);
        double want = it == rhs.end() ? 0.0 : it->second;
        worst = std::max(worst, std::abs(lap.value() - want));
        ++used;
    }
    return {worst, used};
}

}  // namespace

ProbabilisticMonopole monopole_probabilistic(std::shared_ptr<const Network> net, const VertexId& x,
                                             const std::vector<VertexId>& eval_set,
                                             const WalkParams& params) {
    if (!params.assume_transient) {
        TransienceParams tp;
        tp.walk.seed = params.seed;
        tp.walk.range_cap = params.range_cap;
        auto cls = transience_test(net, x, tp);
        if (cls.verdict != Classification::transient)
            throw PreconditionError(
                "monopole_probabilistic: network not classified transient (" +
                to_string(cls.verdict) + "); pass assume_transient to override");
    }
    auto window = FiniteWindow::from_vertices(net, eval_set);
    ProbabilisticMonopole out{VertexFunction::zeros(window), {}, 0.0, 0};
    double cx = total_conductance(*net, x);
    out.stderrs.resize(window->size());
    for (std::size_t i = 0; i < window->size(); ++i) {
        auto est = estimate_green_visits(*net, window->vertex(i), x, params);
        out.values[i] = est.point / cx;
        out.stderrs[i] = est.stderr_ / cx;
    }
    std::map<VertexId, double> rhs{{x, 1.0}};
    auto [res, used] = delta_residual(*net, out.values, rhs);
    out.max_interior_residual = res;
    out.residual_vertices = used;
    return out;
}

HittingMatrixD hitting_matrix_D(const Network& net, const VertexId& x1, const VertexId& x2,
                                const WalkParams& params) {
    if (x1 == x2) throw SpecError("hitting_matrix_D needs x1 != x2");
    HittingMatrixD out;
    std::vector<VertexId> targets{x1, x2};
    std::sort(targets.begin(), targets.end());
    int idx1 = targets[0] == x1 ? 0 : 1;

    // h_j(a) = Pr_a[first hit of {x1,x2} lands on x_j]; estimated at the
    // neighbors of x_i; exact delta_ij at x_i themselves.
    VertexId xs[2] = {x1, x2};
    for (int i = 0; i < 2; ++i) {
        auto nbrs = net.neighbors_of(xs[i]);
        double cx = total_conductance(net, xs[i]);
        double h_at[2] = {i == 0 ? 1.0 : 0.0, i == 1 ? 1.0 : 0.0};
        double lap[2] = {cx * h_at[0], cx * h_at[1]};
        double var[2] = {0.0, 0.0};
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
            auto st = run_replicated(
                params, 200 + std::uint64_t(i) * 64 + k,
                [&](CounterRng& rng) -> std::pair<double, bool> {
                    Stepper stepper(net, params.range_cap);
                    int hit = walk_to_set(stepper, nbrs[k].to, targets, params.horizon, rng);
                    // encode: which target was hit first (0/1 for h-indices, censored -> neither)
                    if (hit < 0) return {-1.0, true};
                    bool is_x1 = (hit == idx1);
                    return {is_x1 ? 1.0 : 0.0, false};
                });
            // st.sum counted -1 for censored paths; recompute the two shares
            double n = double(st.n);
            double hits_x1 = (st.sum.value() + double(st.censored)) ;
            double p1 = hits_x1 / n;
            double p2 = (n - hits_x1 - double(st.censored)) / n;
            double s1 = std::sqrt(std::max(0.0, p1 * (1 - p1)) / n);
            double s2 = std::sqrt(std::max(0.0, p2 * (1 - p2)) / n);
            lap[0] -= nbrs[k].conductance * p1;
            lap[1] -= nbrs[k].conductance * p2;
            var[0] += nbrs[k].conductance * nbrs[k].conductance * s1 * s1;
            var[1] += nbrs[k].conductance * nbrs[k].conductance * s2 * s2;
        }
        for (int j = 0; j < 2; ++j) {
            out.direct(i, j) = lap[j];
            out.direct_sigma(i, j) = std::sqrt(var[j]);
        }
    }

    auto u1 = estimate_U(net, x1, params);
    auto u2 = estimate_U(net, x2, params);
    auto f12 = estimate_F(net, x1, x2, params);
    auto f21 = estimate_F(net, x2, x1, params);
    double c1 = total_conductance(net, x1), c2 = total_conductance(net, x2);
    out.factorized << c1 * (1.0 - u1.direct.point), -c1 * f12.point,
        -c2 * f21.point, c2 * (1.0 - u2.direct.point);

    auto g11 = estimate_green_visits(net, x1, x1, params);
    auto g22 = estimate_green_visits(net, x2, x2, params);
    auto g12 = estimate_green_visits(net, x1, x2, params);
    auto g21 = estimate_green_visits(net, x2, x1, params);
    out.det_direct = out.direct.determinant();
    out.det_factorized = out.factorized.determinant();
    out.det_green_formula =
        c1 * c2 * (1.0 - g12.point * g21.point) / (g11.point * g22.point);
    double scale = std::max({std::abs(out.det_direct), c1 * c2 * 1e-3, 1e-9});
    out.near_singular = std::abs(out.det_direct) < 0.05 * scale;
    return out;
}

ProbabilisticDipole dipole_probabilistic(std::shared_ptr<const Network> net, const VertexId& x1,
                                         const VertexId& x2, const std::vector<VertexId>& eval_set,
                                         const WalkParams& params) {
    if (x1 == x2) throw SpecError("dipole_probabilistic needs x1 != x2");
    auto d = hitting_matrix_D(*net, x1, x2, params);
    if (std::abs(d.det_direct) < 1e-9)
        throw NumericalError("hitting matrix D is singular; dipole coefficients undefined");
    Eigen::Vector2d ab = d.direct.colPivHouseholderQr().solve(Eigen::Vector2d(1.0, -1.0));

    auto window = FiniteWindow::from_vertices(net, eval_set);
    ProbabilisticDipole out{VertexFunction::zeros(window), VertexFunction::zeros(window)};
    out.alpha = ab[0];
    out.beta = ab[1];

    std::vector<VertexId> targets{x1, x2};
    std::sort(targets.begin(), targets.end());
    int idx1 = targets[0] == x1 ? 0 : 1;
    double c1 = total_conductance(*net, x1), c2 = total_conductance(*net, x2);
    for (std::size_t i = 0; i < window->size(); ++i) {
        const VertexId& a = window->vertex(i);
        double h1, h2;
        if (a == x1) {
            h1 = 1.0;
            h2 = 0.0;
        } else if (a == x2) {
            h1 = 0.0;
            h2 = 1.0;
        } else {
            auto st = run_replicated(params, 4000 + i, [&](CounterRng& rng) -> std::pair<double, bool> {
                Stepper stepper(*net, params.range_cap);
                int hit = walk_to_set(stepper, a, targets, params.horizon, rng);
                if (hit < 0) return {-1.0, true};
                return {hit == idx1 ? 1.0 : 0.0, false};
            });
            double n = double(st.n);
            double hits_x1 = st.sum.value() + double(st.censored);
            h1 = hits_x1 / n;
            h2 = (n - hits_x1 - double(st.censored)) / n;
        }
        out.combination[i] = out.alpha * h1 + out.beta * h2;
        auto gx1 = estimate_green_visits(*net, a, x1, params);
        auto gx2 = estimate_green_visits(*net, a, x2, params);
        out.monopole_diff[i] = gx1.point / c1 - gx2.point / c2;
    }

    std::map<VertexId, double> rhs{{x1, 1.0}, {x2, -1.0}};
    out.residual_combination = delta_residual(*net, out.combination, rhs).first;
    out.residual_monopole_diff = delta_residual(*net, out.monopole_diff, rhs).first;
    VertexFunction diff(window, out.combination.values() - out.monopole_diff.values());
    out.difference_harmonic_residual = delta_residual(*net, diff, {}).first;
    return out;
}

HarmonicExtension harmonic_extension(std::shared_ptr<const Network> net,
                                     const std::vector<VertexId>& f_set,
                                     const std::vector<double>& phi,
                                     const std::vector<VertexId>& eval_set,
                                     const WalkParams& params) {
    if (f_set.empty() || f_set.size() != phi.size())
        throw SpecError("harmonic_extension needs a nonempty F with matching values");
    std::vector<std::size_t> order(f_set.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return f_set[a] < f_set[b]; });
    std::vector<VertexId> targets;
    std::vector<double> values;
    for (std::size_t k : order) {
        targets.push_back(f_set[k]);
        values.push_back(phi[k]);
    }

    auto window = FiniteWindow::from_vertices(net, eval_set);
    HarmonicExtension out{VertexFunction::zeros(window), {}, {}};
    out.stderrs.resize(window->size());
    out.hit_mass.resize(window->size());
    for (std::size_t i = 0; i < window->size(); ++i) {
        const VertexId& a = window->vertex(i);
        auto at = std::lower_bound(targets.begin(), targets.end(), a);
        if (at != targets.end() && *at == a) {
            out.values[i] = values[size_t(at - targets.begin())];  // tau = 0, exact
            out.hit_mass[i] = 1.0;
            out.stderrs[i] = 0.0;
            continue;
        }
        auto st = run_replicated(params, 5000 + i, [&](CounterRng& rng) -> std::pair<double, bool> {
            Stepper stepper(*net, params.range_cap);
            int hit = walk_to_set(stepper, a, targets, params.horizon, rng);
            if (hit < 0) return {0.0, true};
            return {values[size_t(hit)], false};
        });
        auto est = finish("Phi", params, st, false);
        out.values[i] = est.point;
        out.stderrs[i] = est.stderr_;
        out.hit_mass[i] = 1.0 - est.censored;
    }
    return out;
}

std::string to_string(Classification c) {
    switch (c) {
        case Classification::transient: return "transient";
        case Classification::recurrent: return "recurrent";
        case Classification::inconclusive: return "inconclusive";
    }
    return "?";
}

TransienceReport transience_test(std::shared_ptr<const Network> net, const VertexId& x,
                                 const TransienceParams& params) {
    TransienceReport rep;

    // (a) return probability with CI
    auto u = estimate_U(*net, x, params.walk);
    rep.u_estimate = u.direct;
    double hi = u.direct.point + 3.0 * u.direct.stderr_;
    if (u.direct.point < 0.95 && hi < 1.0)
        rep.u_signal = Classification::transient;
    else if (u.direct.point >= 0.95)
        rep.u_signal = Classification::recurrent;
    rep.evidence.push_back("U(x,x) ~ " + std::to_string(u.direct.point) + " +- " +
                           std::to_string(u.direct.stderr_));

    // (b) Green partial-sum growth on the largest affordable ball
    int steps_target = params.green_steps > 0 ? params.green_steps : 2048;
    int radius = 1;
    WindowPtr window;
    for (int r = 2; r <= steps_target; r *= 2) {
        std::int64_t cap = params.walk.range_cap;
        if (cap >= 0 && r > cap) break;
        WindowPtr w;
        try {
            w = FiniteWindow::ball(net, x, r, params.window_vertex_budget);
        } catch (const Error&) {
            break;
        }
        window = w;
        radius = r;
    }
    if (window) {
        int steps = std::min(steps_target, radius);
        auto series = green_truncated(*net, x, x, window, steps);
        double s = series.partial.back();
        if (series.recurrent_consistent)
            rep.green_signal = Classification::recurrent;
        else if (series.block_ratio < 0.95 && series.tail_estimate < 0.05 * s)
            rep.green_signal = Classification::transient;
        rep.evidence.push_back("green partial sum S_" + std::to_string(steps) + " = " +
                               std::to_string(s) + ", block ratio " +
                               std::to_string(series.block_ratio));
    }

    // (c) grounded monopole energy trend
    {
        potential::ExhaustionSchedule sched;
        if (!params.monopole_radii.empty()) {
            sched.radii = params.monopole_radii;
        } else {
            for (int r = 2; r <= radius; r *= 2) sched.radii.push_back(r);
            if (sched.radii.size() < 3) sched.radii = {2, 4, 8};
        }
        try {
            auto res = potential::monopole(net, x, sched);
            if (res.verdict == potential::Verdict::transient_consistent)
                rep.monopole_signal = Classification::transient;
            else if (res.verdict == potential::Verdict::recurrent_consistent)
                rep.monopole_signal = Classification::recurrent;
            rep.evidence.push_back("monopole energies verdict: " + to_string(res.verdict));
        } catch (const Error& e) {
            rep.evidence.push_back(std::string("monopole probe failed: ") + e.what());
        }
    }

    int transient_votes = 0, recurrent_votes = 0;
    for (auto s : {rep.u_signal, rep.green_signal, rep.monopole_signal}) {
        transient_votes += s == Classification::transient;
        recurrent_votes += s == Classification::recurrent;
    }
    if (transient_votes >= 2 && transient_votes > recurrent_votes)
        rep.verdict = Classification::transient;
    else if (recurrent_votes >= 2 && recurrent_votes > transient_votes)
        rep.verdict = Classification::recurrent;
    return rep;
}

LevelHittingResult level_hitting_sequence(const bratteli::BratteliDiagram& diagram,
                                          const std::vector<Eigen::VectorXd>& f_levels,
                                          const VertexId& x, int n_min, int n_max,
                                          const WalkParams& params, double compat_tol) {
    if (n_max >= int(f_levels.size()) || n_max >= int(diagram.levels()))
        throw SpecError("level_hitting_sequence needs f and diagram through n_max");
    LevelHittingResult out;
    // compatibility residuals || P_left_n f_{n+1} - f_n ||_inf over the range
    for (int n = std::max(1, n_min); n < n_max; ++n) {
        auto arrows = arrow_matrices(diagram, std::size_t(n));
        double res = (arrows.left * f_levels[size_t(n) + 1] - f_levels[size_t(n)])
                         .cwiseAbs()
                         .maxCoeff();
        out.compatibility_residual.push_back(res);
        if (res > compat_tol)
            throw PreconditionError("level compatibility P_left f_{n+1} = f_n fails at level " +
                                        std::to_string(n) + " (residual " + std::to_string(res) + ")",
                                    res);
    }

    auto dptr = std::make_shared<const bratteli::BratteliDiagram>(diagram);
    auto net = bratteli::diagram_network(dptr);
    for (int n = n_min; n <= n_max; ++n) {
        if (x[0] >= n) {
            // tau(V_n) = 0 at and beyond the level: defined only at the level itself
            if (x[0] == n) {
                out.levels.push_back(n);
                out.h.push_back(f_levels[size_t(n)][x[1]]);
                out.stderrs.push_back(0.0);
            }
            continue;
        }
        auto st = run_replicated(params, 6000 + std::uint64_t(n),
                                 [&](CounterRng& rng) -> std::pair<double, bool> {
                                     Stepper stepper(*net, std::int64_t(n));
                                     VertexId pos = x;
                                     for (std::int64_t s = 1; s <= params.horizon; ++s) {
                                         if (!stepper.step(pos, rng)) return {0.0, true};
                                         if (pos[0] == n)
                                             return {f_levels[size_t(n)][pos[1]], false};
                                     }
                                     return {0.0, true};
                                 });
        auto est = finish("h_n", params, st, false);
        out.levels.push_back(n);
        out.h.push_back(est.point);
        out.stderrs.push_back(est.stderr_);
    }
    for (std::size_t k = 1; k < out.h.size(); ++k) {
        if (std::abs(out.h[k] - out.h[k - 1]) <=
            3.0 * (out.stderrs[k] + out.stderrs[k - 1] + 1e-12)) {
            out.stabilization_level = out.levels[k];
            break;
        }
    }
    return out;
}

}  // namespace harmonet::walk
