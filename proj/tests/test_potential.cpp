#include <doctest.h>

#include <cmath>

#include "harmonet/models.hpp"
#include "harmonet/potential.hpp"
#include "harmonet/rng.hpp"

using namespace harmonet;
using potential::ExhaustionSchedule;
using potential::Verdict;

TEST_SUITE_BEGIN("potential");

TEST_CASE("dirichlet solves: hand values, constants, linear interpolation") {
    auto p3 = make_path_network(3);
    auto w = FiniteWindow::ball(p3, VertexId::of(1), 1);
    auto p = potential::make_dirichlet(
        w, {VertexId::of(1)}, [](const VertexId&) { return 0.0; },
        [](const VertexId& v) { return v[0] == 2 ? 1.0 : 0.0; });
    auto u = potential::solve_dirichlet(p);
    CHECK(u.at(VertexId::of(1)) == doctest::Approx(0.5).epsilon(1e-14));

    // constant boundary data propagates as the constant
    auto pc = potential::make_dirichlet(
        w, {VertexId::of(1)}, [](const VertexId&) { return 0.0; },
        [](const VertexId&) { return 4.5; });
    CHECK(potential::solve_dirichlet(pc).at(VertexId::of(1)) == doctest::Approx(4.5));

    // Z line: u(k) = k solves the discrete Laplace equation with ramp data
    auto z = models::line_fixture("z_unit");
    auto zw = FiniteWindow::ball(z.net, VertexId::of(2), 4);
    std::vector<VertexId> v1;
    for (int k = 1; k <= 4; ++k) v1.push_back(VertexId::of(k));
    auto zp = potential::make_dirichlet(
        zw, v1, [](const VertexId&) { return 0.0; },
        [](const VertexId& v) { return double(v[0]); });
    auto zu = potential::solve_dirichlet(zp);
    for (int k = 1; k <= 4; ++k)
        CHECK(zu.at(VertexId::of(k)) == doctest::Approx(double(k)).epsilon(1e-13));
}

TEST_CASE("direct and iterative backends agree") {
    auto tree = models::binary_tree_fixture(2.0);
    auto w = FiniteWindow::ball(tree.net, VertexId::of(0, 1), 5);
    auto p = potential::make_dirichlet(
        w, w->interior_vertices(), [](const VertexId& v) { return v[0] == 2 ? 1.0 : 0.0; },
        [&](const VertexId& v) { return tree.form("f_lambda").eval(v); });
    auto direct = potential::solve_dirichlet(p, potential::SolverBackend::direct);
    auto iter = potential::solve_dirichlet(p, potential::SolverBackend::iterative);
    CHECK((direct.values() - iter.values()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("maximum principle") {
    auto p3 = make_path_network(3);
    auto w = FiniteWindow::ball(p3, VertexId::of(1), 1);
    auto p = potential::make_dirichlet(
        w, {VertexId::of(1)}, [](const VertexId&) { return 0.0; },
        [](const VertexId& v) { return v[0] == 2 ? 1.0 : 0.0; });
    auto u = potential::solve_dirichlet(p);
    auto rep = potential::maximum_principle_check(*p3, u, {VertexId::of(1)});
    CHECK(rep.ok());
    CHECK(rep.max_on_boundary);
    CHECK(rep.argmax == VertexId::of(2));

    auto c = VertexFunction::sample(w, [](const VertexId&) { return 2.0; });
    auto repc = potential::maximum_principle_check(*p3, c, {VertexId::of(1)});
    CHECK(repc.constant);

    // Pascal h on levels <= n: extrema at level n
    auto pascal = models::pascal_fixture();
    auto pw = FiniteWindow::ball(pascal.net, VertexId::of(0, 0), 5);
    auto h = VertexFunction::sample(pw, pascal.form("h_symmetric").eval);
    std::vector<VertexId> v1;
    for (int l = 0; l <= 3; ++l)
        for (int i = 0; i <= l; ++i) v1.push_back(VertexId::of(l, i));
    auto prep = potential::maximum_principle_check(*pascal.net, h, v1);
    CHECK(prep.ok());
    CHECK(prep.argmax == VertexId::of(4, 0));
    CHECK(prep.argmin == VertexId::of(4, 4));

    auto bad = VertexFunction::delta(pw, VertexId::of(1, 0));
    CHECK_THROWS_AS(potential::maximum_principle_check(*pascal.net, bad, v1), PreconditionError);
}

TEST_CASE("dipole on P3 and the reproducing property") {
    auto p3 = make_path_network(3);
    auto res = potential::dipole(p3, VertexId::of(0), VertexId::of(1),
                                 ExhaustionSchedule::doubling(3));
    CHECK(res.verdict == Verdict::converged);
    double base = res.values.at(VertexId::of(1));
    CHECK(res.values.at(VertexId::of(0)) - base == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(res.values.at(VertexId::of(2)) - base == doctest::Approx(0.0).epsilon(1e-13));

    // <v, u>_E = u(0) - u(1) for arbitrary u on the full window
    CounterRng rng(3, 0, 0, 0);
    for (int t = 0; t < 25; ++t) {
        Eigen::VectorXd uv(3);
        for (int i = 0; i < 3; ++i) uv[i] = rng.next_double() * 4.0 - 2.0;
        VertexFunction u(res.values.window_ptr(), uv);
        double ip = ops::energy_form(res.values, u);
        CHECK(ip == doctest::Approx(u.at(VertexId::of(0)) - u.at(VertexId::of(1))).epsilon(1e-12));
    }

    auto same = potential::dipole(p3, VertexId::of(1), VertexId::of(1),
                                  ExhaustionSchedule::doubling(3));
    CHECK(same.verdict == Verdict::converged);
    CHECK(same.values.values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("z-line dipole converges to the piecewise form") {
    auto z = models::line_fixture("z_unit");
    ExhaustionSchedule sched;
    sched.radii = {8, 16, 32, 64};
    auto res = potential::dipole(z.net, VertexId::of(3), VertexId::of(0), sched);
    // grounded truncations tilt against the exact dipole by exactly
    // -(n / 2R) * i after regauging at 0
    auto exact = models::z_unit_dipole(3);
    double gauge = res.values.at(VertexId::of(0));
    double tilt = -3.0 / (2.0 * 64.0);
    for (int i = -4; i <= 6; ++i) {
        double approx_v = res.values.at(VertexId::of(i)) - gauge;
        CHECK(approx_v - exact.eval(VertexId::of(i)) ==
              doctest::Approx(tilt * i).epsilon(1e-9));
    }
    // residual equation holds exactly on the final interior
    CHECK(res.final_residual < 1e-12);
    // energies increase toward the resistance n = 3
    CHECK(res.energy_by_radius.front() < res.energy_by_radius.back());
    CHECK(res.energy_by_radius.back() < 3.0);
    CHECK(res.energy_by_radius.back() > 2.8);
}

TEST_CASE("monopole verdicts: tree transient, z-line recurrent, geometric closed form") {
    auto tree = models::binary_tree_fixture(1.0);
    ExhaustionSchedule sched;
    sched.radii = {2, 4, 8, 12};
    auto res = potential::monopole(tree.net, VertexId::of(0, 1), sched);
    CHECK(res.verdict == Verdict::transient_consistent);
    // w(a) = 2^{-dist}, up to the 2^{-R} grounding offset
    for (int d = 0; d <= 3; ++d) {
        double got = res.values.at(VertexId::of(d, 1));
        CHECK(got == doctest::Approx(std::pow(2.0, -d)).epsilon(2e-3));
    }

    auto z = models::line_fixture("z_unit");
    auto zres = potential::monopole(z.net, VertexId::of(0), sched);
    CHECK(zres.verdict == Verdict::recurrent_consistent);
    CHECK(zres.energy_by_radius.back() > zres.energy_by_radius.front());

    // geometric line: grounded solves approach r/(2(1-r)) r^{|n|}
    auto geo = models::line_fixture("z_geometric", 2.0);
    ExhaustionSchedule gsched;
    gsched.radii = {4, 8, 16, 32};
    auto gres = potential::monopole(geo.net, VertexId::of(0), gsched);
    CHECK(gres.verdict == Verdict::transient_consistent);
    const auto& w0 = geo.form("monopole_0");
    for (int n = -3; n <= 3; ++n) {
        double got = gres.values.at(VertexId::of(n));
        CHECK(got == doctest::Approx(w0.eval(VertexId::of(n))).epsilon(1e-6));
    }
}

TEST_CASE("multipole") {
    auto p3 = make_path_network(3);
    std::vector<std::pair<VertexId, double>> pts{{VertexId::of(0), 0.5}, {VertexId::of(2), 0.5}};
    auto res = potential::multipole(p3, VertexId::of(1), pts, ExhaustionSchedule::doubling(3));
    CHECK(res.verdict == Verdict::converged);
    // Delta v = delta_1 - (delta_0 + delta_2)/2: v = [-1/2, 0, -1/2] + const
    double base = res.values.at(VertexId::of(1));
    CHECK(res.values.at(VertexId::of(0)) - base == doctest::Approx(-0.5).epsilon(1e-13));
    CHECK(res.values.at(VertexId::of(2)) - base == doctest::Approx(-0.5).epsilon(1e-13));

    // single point reduces to the dipole
    auto single = potential::multipole(p3, VertexId::of(0), {{VertexId::of(1), 1.0}},
                                       ExhaustionSchedule::doubling(3));
    auto dip = potential::dipole(p3, VertexId::of(0), VertexId::of(1),
                                 ExhaustionSchedule::doubling(3));
    for (int i = 0; i < 3; ++i) {
        double a = single.values.at(VertexId::of(i)) - single.values.at(VertexId::of(1));
        double b = dip.values.at(VertexId::of(i)) - dip.values.at(VertexId::of(1));
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }

    // residual self-check on the z-line with weights 0.3 / 0.7
    auto z = models::line_fixture("z_unit");
    ExhaustionSchedule sched;
    sched.radii = {8, 16, 32};
    auto zres = potential::multipole(z.net, VertexId::of(0),
                                     {{VertexId::of(-2), 0.3}, {VertexId::of(3), 0.7}}, sched);
    CHECK(zres.final_residual < 1e-10);

    CHECK_THROWS_AS(potential::multipole(p3, VertexId::of(0), {{VertexId::of(1), 0.4}},
                                         ExhaustionSchedule::doubling(2)),
                    SpecError);
}

TEST_CASE("resistance distance: series, parallel, metric axioms") {
    auto p3 = make_path_network(3);
    auto sched = ExhaustionSchedule::doubling(3);
    CHECK(potential::resistance_distance(p3, VertexId::of(0), VertexId::of(2), sched) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(potential::resistance_distance(p3, VertexId::of(0), VertexId::of(0), sched) == 0.0);

    auto tri = make_triangle_network();
    CHECK(potential::resistance_distance(tri, VertexId::of(0), VertexId::of(1), sched) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // symmetry + triangle inequality on all pairs of a 4-cycle with a chord
    auto net = std::make_shared<ExplicitNetwork>(
        std::vector<std::tuple<VertexId, VertexId, double>>{
            {VertexId::of(0), VertexId::of(1), 1.0},
            {VertexId::of(1), VertexId::of(2), 2.0},
            {VertexId::of(2), VertexId::of(3), 1.0},
            {VertexId::of(3), VertexId::of(0), 1.0},
            {VertexId::of(0), VertexId::of(2), 0.5}});
    double d01 = potential::resistance_distance(net, VertexId::of(0), VertexId::of(1), sched);
    double d12 = potential::resistance_distance(net, VertexId::of(1), VertexId::of(2), sched);
    double d02 = potential::resistance_distance(net, VertexId::of(0), VertexId::of(2), sched);
    CHECK(d01 == doctest::Approx(potential::resistance_distance(net, VertexId::of(1),
                                                                VertexId::of(0), sched)));
    CHECK(d02 <= d01 + d12 + 1e-12);
    CHECK(d01 <= d02 + d12 + 1e-12);
}

TEST_CASE("normal derivative") {
    auto p3 = make_path_network(3);
    auto v = [](const VertexId& x) { return x[0] == 0 ? 0.0 : x[0] == 1 ? 1.0 : 3.0; };
    CHECK(potential::normal_derivative(*p3, {VertexId::of(0), VertexId::of(1)}, v,
                                       VertexId::of(2)) == 2.0);
    auto c = [](const VertexId&) { return 1.0; };
    CHECK(potential::normal_derivative(*p3, {VertexId::of(0), VertexId::of(1)}, c,
                                       VertexId::of(2)) == 0.0);
    CHECK_THROWS_AS(
        potential::normal_derivative(*p3, {VertexId::of(0)}, v, VertexId::of(2)),
        PreconditionError);
}

TEST_CASE("gauss-green split on finite explicit networks is exact") {
    auto tri = make_triangle_network();
    auto dip = potential::dipole(tri, VertexId::of(1), VertexId::of(0),
                                 ExhaustionSchedule::doubling(3));
    auto vfn = dip.values.as_fn();
    CounterRng rng(17, 0, 0, 0);
    Eigen::VectorXd uv(3);
    for (int i = 0; i < 3; ++i) uv[i] = rng.next_double();
    auto ufn = [&](const VertexId& x) { return uv[long(x[0])]; };
    auto rep = potential::gauss_green_split(tri, ufn, vfn, {2, 3}, VertexId::of(0));
    for (const auto& row : rep.rows) {
        CHECK(row.boundary_sum == 0.0);  // full window, no outer boundary
        CHECK(row.interior_sum ==
              doctest::Approx(row.window_energy_inner_product).epsilon(1e-12));
    }
    CHECK_FALSE(rep.boundary_nonvanishing);
}

TEST_CASE("gauss-green boundary term on the summable line converges to 1") {
    auto fix = models::line_fixture("z_summable", 2.0);
    const auto& u = fix.form("example3_harmonic");
    auto rep = potential::gauss_green_split(fix.net, u.eval, u.eval, {5, 10, 20, 40},
                                            VertexId::of(0));
    CHECK(rep.rows.back().boundary_sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.boundary_nonvanishing);  // transient
    // interior sum vanishes in the u(o) = 0 gauge: Delta u = -delta_0, u(0) = 0
    CHECK(rep.rows.back().interior_sum == doctest::Approx(0.0).epsilon(1e-12));
    // both displayed forms agree here since u(o) = 0 already
    CHECK(rep.rows_gauged.back().total == doctest::Approx(rep.rows.back().total).epsilon(1e-12));

    // zero function: everything zero
    auto zero = [](const VertexId&) { return 0.0; };
    auto zrep = potential::gauss_green_split(fix.net, zero, u.eval, {5, 10}, VertexId::of(0));
    CHECK(zrep.rows.back().interior_sum == 0.0);
    CHECK(zrep.rows.back().boundary_sum == 0.0);
}

TEST_CASE("royden split: reconstruction, orthogonality, harmonic input") {
    auto p5 = make_path_network(5);
    auto w = FiniteWindow::ball(p5, VertexId::of(2), 2);
    CounterRng rng(23, 0, 0, 0);
    Eigen::VectorXd uv(5);
    for (int i = 0; i < 5; ++i) uv[i] = rng.next_double() * 2.0 - 1.0;
    VertexFunction u(w, uv);
    auto split = potential::royden_split(w, u);
    CHECK((split.fin.values() + split.harm.values() - u.values()).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(std::abs(split.cross_energy) < 1e-10);
    CHECK(split.harm_residual < 1e-12);

    // delta at an interior vertex: fin carries it, pieces still recombine
    auto d = VertexFunction::delta(w, VertexId::of(2));
    auto dsplit = potential::royden_split(w, d);
    CHECK((dsplit.fin.values() + dsplit.harm.values() - d.values()).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(std::abs(dsplit.cross_energy) < 1e-10);

    // harmonic input: fin vanishes
    VertexFunction lin(w, [] {
        Eigen::VectorXd v(5);
        v << 0, 1, 2, 3, 4;
        return v;
    }());
    auto lsplit = potential::royden_split(w, lin);
    CHECK(lsplit.fin.values().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("delta is the conductance combination of dipoles (finite network)") {
    // delta_x = c(x) v_x - sum_y c_xy v_y with v_x the dipoles to the origin
    auto tri = make_triangle_network();
    auto sched = ExhaustionSchedule::doubling(3);
    auto o = VertexId::of(0);
    auto v1 = potential::dipole(tri, VertexId::of(1), o, sched);
    auto v2 = potential::dipole(tri, VertexId::of(2), o, sched);
    for (int probe = 0; probe < 3; ++probe) {
        VertexId p = VertexId::of(probe);
        auto val = [&](const potential::PotentialResult& r, const VertexId& q) {
            return r.values.at(q) - r.values.at(o);
        };
        // c(1) v_1 - c_10 v_0 - c_12 v_2 = delta_1 (v_0 = 0)
        double lhs = 2.0 * val(v1, p) - 1.0 * 0.0 - 1.0 * val(v2, p);
        double expect = p == VertexId::of(1) ? 1.0 : 0.0;
        CHECK(lhs == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("monopole difference equals the dipole on a transient fixture") {
    auto tree = models::binary_tree_fixture(1.0);
    ExhaustionSchedule sched;
    sched.radii = {4, 8, 12, 14};
    auto wx = potential::monopole(tree.net, VertexId::of(0, 1), sched);
    auto wy = potential::monopole(tree.net, VertexId::of(1, 1), sched);
    auto v = potential::dipole(tree.net, VertexId::of(0, 1), VertexId::of(1, 1), sched);
    for (auto probe : {VertexId::of(0, 1), VertexId::of(1, 1), VertexId::of(2, 2),
                       VertexId::of(3, 5)}) {
        double diff = wx.values.at(probe) - wy.values.at(probe);
        double direct = v.values.at(probe);
        CHECK(diff == doctest::Approx(direct).epsilon(5e-3));
    }
}

TEST_SUITE_END();
