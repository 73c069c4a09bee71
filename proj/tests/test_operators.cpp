#include <doctest.h>

#include "harmonet/models.hpp"
#include "harmonet/operators.hpp"
#include "harmonet/rng.hpp"

using namespace harmonet;

TEST_SUITE_BEGIN("operators");

namespace {

VertexFunction p3_function(std::shared_ptr<const Network> net, std::vector<double> vals) {
    auto w = FiniteWindow::ball(net, VertexId::of(1), 1);
    Eigen::VectorXd v(3);
    for (int i = 0; i < 3; ++i) v[i] = vals[size_t(i)];
    return VertexFunction(w, v);
}

}  // namespace

TEST_CASE("laplacian pointwise values") {
    auto p3 = make_path_network(3);
    auto f = p3_function(p3, {0, 1, 0});
    auto lap = ops::laplacian_apply(*p3, f, {VertexId::of(1)});
    CHECK(lap.at(VertexId::of(1)) == 2.0);

    // harmonic on the Pascal graph at (1,0)
    auto pascal = models::pascal_fixture();
    auto w = FiniteWindow::ball(pascal.net, VertexId::of(0, 0), 3);
    auto h = VertexFunction::sample(w, pascal.form("h_symmetric").eval);
    auto laph = ops::laplacian_apply(*pascal.net, h, {VertexId::of(1, 0)});
    CHECK(laph.at(VertexId::of(1, 0)) == 0.0);

    // constants are annihilated at every interior vertex
    auto c = VertexFunction::sample(w, [](const VertexId&) { return 3.25; });
    auto lapc = ops::laplacian_apply(*pascal.net, c, w->interior_vertices());
    CHECK(lapc.values().cwiseAbs().maxCoeff() == 0.0);

    // neighbor outside the window is an error naming the vertex
    auto small = FiniteWindow::ball(p3, VertexId::of(0), 1);
    VertexFunction g(small, Eigen::VectorXd::Zero(2));
    CHECK_THROWS_AS(ops::laplacian_apply(*p3, g, {VertexId::of(1)}), WindowTooSmallError);
}

TEST_CASE("markov operator and the identity Delta f = c (f - P f)") {
    auto p3 = make_path_network(3);
    auto f = p3_function(p3, {0, 1, 0});
    auto pf = ops::markov_apply(*p3, f, {VertexId::of(1)});
    CHECK(pf.at(VertexId::of(1)) == 0.0);

    auto tree = models::binary_tree_fixture(2.0);
    auto w = FiniteWindow::ball(tree.net, VertexId::of(0, 1), 5);
    auto g = VertexFunction::sample(w, tree.form("f_lambda").eval);
    auto at = w->interior_vertices();
    auto lap = ops::laplacian_apply(*tree.net, g, at);
    auto pg = ops::markov_apply(*tree.net, g, at);
    for (std::size_t i = 0; i < at.size(); ++i) {
        double cx = total_conductance(*tree.net, at[i]);
        double lhs = lap.at(at[i]);
        double rhs = cx * (g.at(at[i]) - pg.at(at[i]));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
        // harmonic: P f = f
        CHECK(std::abs(pg.at(at[i]) - g.at(at[i])) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    }

    // rows of P sum to 1: constants are fixed
    auto c = VertexFunction::sample(w, [](const VertexId&) { return -7.5; });
    auto pc = ops::markov_apply(*tree.net, c, at);
    for (const auto& x : at) CHECK(pc.at(x) == doctest::Approx(-7.5).epsilon(1e-15));
}

TEST_CASE("energy form on deltas reproduces conductances exactly") {
    auto p3 = make_path_network(3);
    auto w = FiniteWindow::ball(p3, VertexId::of(1), 1);
    auto d0 = VertexFunction::delta(w, VertexId::of(0));
    auto d1 = VertexFunction::delta(w, VertexId::of(1));
    auto d2 = VertexFunction::delta(w, VertexId::of(2));
    CHECK(ops::energy_form(d1, d1) == 2.0);   // E(delta_x) = c(x)
    CHECK(ops::energy_form(d0, d1) == -1.0);  // E(delta_x, delta_y) = -c_xy
    CHECK(ops::energy_form(d0, d2) == 0.0);   // non-neighbors
    auto c = VertexFunction::sample(w, [](const VertexId&) { return 4.0; });
    CHECK(ops::energy_form(c, c) == 0.0);
}

TEST_CASE("norms") {
    // delta_n on the linear N0 line: energy^2 = 2n+1
    auto line = models::line_fixture("n0_linear");
    auto w = FiniteWindow::ball(line.net, VertexId::of(0), 8);
    for (std::int64_t n : {0, 3, 6}) {
        auto d = VertexFunction::delta(w, VertexId::of(n));
        auto res = ops::norms(*line.net, d);
        CHECK(res.energy * res.energy == doctest::Approx(double(2 * n + 1)).epsilon(1e-14));
        CHECK(res.l2 == 1.0);
        CHECK(res.l2c * res.l2c == doctest::Approx(double(2 * n + 1)).epsilon(1e-14));
    }

    auto p3 = make_path_network(3);
    auto u = p3_function(p3, {0, 1, 3});
    CHECK(ops::energy_form(u, u) == 5.0);
    auto z = VertexFunction::zeros(u.window_ptr());
    auto zn = ops::norms(*p3, z);
    CHECK(zn.l2 == 0.0);
    CHECK(zn.l2c == 0.0);
    CHECK(zn.energy == 0.0);

    // the energy seminorm is gauge independent
    auto shifted = p3_function(p3, {10, 11, 13});
    CHECK(ops::energy_form(shifted, shifted) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("assembled laplacian matches the operator and the energy form") {
    auto p3 = make_path_network(3);
    auto w = FiniteWindow::ball(p3, VertexId::of(1), 1);
    auto m = ops::assemble_laplacian(*p3, w);
    Eigen::MatrixXd dense = Eigen::MatrixXd(m.m);
    Eigen::MatrixXd expect(3, 3);
    expect << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    CHECK((dense - expect).cwiseAbs().maxCoeff() == 0.0);

    // symmetry and the finite-graph identity x^T M x = E(x, x), ratio 1
    CounterRng rng(7, 0, 0, 0);
    Eigen::VectorXd x(3);
    for (int i = 0; i < 3; ++i) x[i] = rng.next_double() - 0.5;
    VertexFunction xf(w, x);
    double quad = x.dot(m.m * x);
    CHECK(quad == doctest::Approx(ops::energy_form(xf, xf)).epsilon(1e-14));

    // diagonal uses the full oracle even when the window truncates the star
    auto line = models::line_fixture("n0_linear");
    auto lw = FiniteWindow::ball(line.net, VertexId::of(0), 3);
    auto lm = ops::assemble_laplacian(*line.net, lw);
    CHECK(Eigen::MatrixXd(lm.m)(3, 3) == 7.0);  // c(3) = 3 + 4 with vertex 4 outside

    // <Mu, v> = <u, Mv> for interior-supported vectors
    auto tw = FiniteWindow::ball(models::binary_tree_fixture(1.0).net, VertexId::of(0, 1), 3);
    auto tm = ops::assemble_laplacian(*FiniteWindow::ball(models::binary_tree_fixture(1.0).net,
                                                          VertexId::of(0, 1), 3)
                                           ->network_ptr()
                                           .get(),
                                      tw);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(long(tw->size()));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(long(tw->size()));
    for (std::size_t i : tw->interior_indices()) {
        a[long(i)] = std::sin(double(i) + 1.0);
        b[long(i)] = std::cos(2.0 * double(i));
    }
    CHECK((tm.m * a).dot(b) == doctest::Approx(a.dot(tm.m * b)).epsilon(1e-14));
}

TEST_CASE("drop operator, dissipation norm, isometry") {
    auto p3 = make_path_network(3);
    auto u = p3_function(p3, {0, 1, 3});
    auto flow = ops::drop(*p3, u);
    CHECK(flow.value(VertexId::of(0), VertexId::of(1)) == -1.0);
    CHECK(flow.value(VertexId::of(1), VertexId::of(2)) == -2.0);
    double d = ops::dissipation_norm(flow);
    CHECK(d * d == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(d * d == doctest::Approx(ops::energy_form(u, u)).epsilon(1e-15));

    auto c = VertexFunction::sample(u.window_ptr(), [](const VertexId&) { return 2.0; });
    CHECK(ops::dissipation_norm(ops::drop(*p3, c)) == 0.0);

    auto d1 = VertexFunction::delta(u.window_ptr(), VertexId::of(1));
    auto f1 = ops::drop(*p3, d1);
    CHECK(f1.value(VertexId::of(0), VertexId::of(1)) == -1.0);
    CHECK(f1.value(VertexId::of(1), VertexId::of(2)) == 1.0);
    double dd = ops::dissipation_norm(f1);
    CHECK(dd * dd == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("cycle pairing vanishes on gradients") {
    auto tri = make_triangle_network();
    auto w = FiniteWindow::ball(tri, VertexId::of(0), 1);
    Eigen::VectorXd vals(3);
    vals << 0.3, -1.7, 2.4;
    VertexFunction u(w, vals);
    std::vector<VertexId> cycle{VertexId::of(0), VertexId::of(1), VertexId::of(2), VertexId::of(0)};
    CHECK(ops::cycle_pairing(ops::drop(*tri, u), cycle) == doctest::Approx(0.0).epsilon(1e-15));

    // the unit cycle flow pairs to its own length for c == 1
    Eigen::VectorXd chi(w->edges().size());
    for (std::size_t e = 0; e < w->edges().size(); ++e) chi[long(e)] = 0.0;
    EdgeFlow chi_flow = [&] {
        Eigen::VectorXd cv(w->edges().size());
        cv.setZero();
        for (std::size_t k = 0; k + 1 < cycle.size(); ++k) {
            auto a = *w->index_of(cycle[k]);
            auto b = *w->index_of(cycle[k + 1]);
            auto e = *w->edge_index(a, b);
            cv[long(e)] = cycle[k] < cycle[k + 1] ? 1.0 : -1.0;
        }
        return EdgeFlow(w, cv);
    }();
    CHECK(ops::cycle_pairing(chi_flow, cycle) == doctest::Approx(3.0));
    CHECK(ops::cycle_pairing(chi_flow, {}) == 0.0);
    CHECK_THROWS_AS(
        ops::cycle_pairing(chi_flow, {VertexId::of(0), VertexId::of(1), VertexId::of(2)}),
        SpecError);
}

TEST_CASE("harmonic energy via the Markov identity") {
    // constant: zero
    auto p3 = make_path_network(3);
    auto c = p3_function(p3, {5, 5, 5});
    auto rc = ops::harmonic_energy_via_P(*p3, c);
    CHECK(rc.value == 0.0);

    // tree f_lambda at lambda = 2: matches the incidence-weighted direct sum
    auto tree = models::binary_tree_fixture(2.0);
    auto w = FiniteWindow::ball(tree.net, VertexId::of(0, 1), 4);
    auto f = VertexFunction::sample(w, tree.form("f_lambda").eval);
    auto viaP = ops::harmonic_energy_via_P(*tree.net, f);
    double direct = ops::energy_incidence_sum(*tree.net, f);
    CHECK(viaP.value == doctest::Approx(direct).epsilon(1e-12));

    // Pascal h: same comparison structure on the same window
    auto pascal = models::pascal_fixture();
    auto pw = FiniteWindow::ball(pascal.net, VertexId::of(0, 0), 6);
    auto h = VertexFunction::sample(pw, pascal.form("h_symmetric").eval);
    auto hp = ops::harmonic_energy_via_P(*pascal.net, h);
    CHECK(hp.value == doctest::Approx(ops::energy_incidence_sum(*pascal.net, h)).epsilon(1e-12));

    // non-harmonic input is a precondition error carrying the residual
    auto bad = p3_function(p3, {0, 1, 0});
    CHECK_THROWS_AS(ops::harmonic_energy_via_P(*p3, bad), PreconditionError);
}

TEST_CASE("markov contraction in l2(V,c)") {
    auto tree = models::binary_tree_fixture(1.0);
    auto w = FiniteWindow::ball(tree.net, VertexId::of(0, 1), 5);
    CounterRng rng(11, 0, 0, 0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(long(w->size()));
        for (std::size_t i : w->interior_indices()) u[long(i)] = rng.next_double() - 0.5;
        VertexFunction uf(w, u);
        auto pu = ops::markov_apply(*tree.net, uf, w->interior_vertices());
        double upu = 0.0, norm2 = 0.0;
        for (std::size_t i = 0; i < w->size(); ++i) {
            double cx = w->full_conductance(i);
            norm2 += cx * u[long(i)] * u[long(i)];
            if (w->is_interior(i)) upu += cx * u[long(i)] * pu.at(w->vertex(i));
        }
        CHECK(std::abs(upu) <= norm2 * (1.0 + 1e-12));
    }
}

TEST_SUITE_END();
