#include <doctest.h>

#include <cmath>

#include "harmonet/models.hpp"
#include "harmonet/operators.hpp"

using namespace harmonet;

TEST_SUITE_BEGIN("models");

namespace {

// max |Delta f - rhs| over the full-neighborhood vertices of a ball window
double residual_on_ball(const models::Fixture& fix, const models::ClosedForm& form, int radius) {
    auto w = FiniteWindow::ball(fix.net, fix.net->origin().value(), radius);
    double worst = 0.0;
    std::vector<NeighborEntry> nbrs;
    for (std::size_t i = 0; i < w->size(); ++i) {
        if (!w->has_full_neighborhood(i)) continue;
        const VertexId& x = w->vertex(i);
        fix.net->neighbors(x, nbrs);
        CompensatedSum lap;
        for (const auto& e : nbrs) lap.add(e.conductance * (form.eval(x) - form.eval(e.to)));
        nbrs.clear();
        auto it = form.delta_rhs.find(x);
        double want = it == form.delta_rhs.end() ? 0.0 : it->second;
        worst = std::max(worst, std::abs(lap.value() - want));
    }
    return worst;
}

}  // namespace

TEST_CASE("z_unit dipole closed form is residual-exact") {
    auto fix = models::line_fixture("z_unit");
    for (std::int64_t n : {3, 1, -2}) {
        auto v = models::z_unit_dipole(n);
        models::Fixture probe = fix;
        probe.forms.clear();
        double worst = residual_on_ball(fix, v, 8);
        CHECK(worst == 0.0);
        // piecewise values
        if (n == 3) {
            CHECK(v.eval(VertexId::of(-5)) == 0.0);
            CHECK(v.eval(VertexId::of(2)) == 2.0);
            CHECK(v.eval(VertexId::of(3)) == 3.0);
            CHECK(v.eval(VertexId::of(9)) == 3.0);
        }
    }
    CHECK_THROWS_AS(models::z_unit_dipole(0), SpecError);
}

TEST_CASE("z_summable: increments, energy, residual at the origin") {
    auto fix = models::line_fixture("z_summable", 2.0);
    const auto& u = fix.form("example3_harmonic");
    // u(n) - u(n-1) = 1/c_{n-1,n} on the right ray, zero on the left
    for (int n = 1; n <= 10; ++n) {
        double inc = u.eval(VertexId::of(n)) - u.eval(VertexId::of(n - 1));
        CHECK(inc == doctest::Approx(std::pow(2.0, -n)).epsilon(1e-14));
    }
    CHECK(u.eval(VertexId::of(-7)) == 0.0);
    // harmonic off the origin; Delta u(0) = -1 exactly
    CHECK(residual_on_ball(fix, u, 10) == doctest::Approx(0.0).epsilon(1e-14));
    // window energy approaches sum 1/c = 1
    auto w = FiniteWindow::ball(fix.net, VertexId::of(0), 30);
    auto uf = VertexFunction::sample(w, u.eval);
    CHECK(ops::energy_form(uf, uf) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(fix.expected_walk == models::WalkClass::transient);
}

TEST_CASE("z_geometric monopole and odd harmonic function") {
    for (double lambda : {2.0, 3.0}) {
        auto fix = models::line_fixture("z_geometric", lambda);
        // absolute residuals at the scale of conductances lambda^8
        CHECK(residual_on_ball(fix, fix.form("monopole_0"), 8) < 1e-11);
        CHECK(residual_on_ball(fix, fix.form("harmonic_odd"), 8) < 1e-11);
        double r = 1.0 / lambda;
        CHECK(fix.form("monopole_0").eval(VertexId::of(0)) ==
              doctest::Approx(r / (2.0 * (1.0 - r))));
    }
    // finite-energy nonconstant harmonic function exists here
    auto fix = models::line_fixture("z_geometric", 2.0);
    auto w = FiniteWindow::ball(fix.net, VertexId::of(0), 25);
    auto h = VertexFunction::sample(w, fix.form("harmonic_odd").eval);
    double e25 = ops::energy_form(h, h);
    auto w2 = FiniteWindow::ball(fix.net, VertexId::of(0), 26);
    auto h2 = VertexFunction::sample(w2, fix.form("harmonic_odd").eval);
    // per-edge tail decays like lambda^{-n}
    CHECK(ops::energy_form(h2, h2) - e25 < 1e-7);
}

TEST_CASE("n0_geometric monopole") {
    auto fix = models::line_fixture("n0_geometric", 2.0);
    CHECK(residual_on_ball(fix, fix.form("monopole_0"), 10) < 1e-12);
    CHECK(fix.form("monopole_0").eval(VertexId::of(0)) == doctest::Approx(2.0));
}

TEST_CASE("binary tree f_lambda: paper values and harmonicity") {
    auto fix = models::binary_tree_fixture(2.0);
    const auto& f = fix.form("f_lambda");
    CHECK(f.eval(VertexId::of(0, 1)) == 0.0);
    CHECK(f.eval(VertexId::of(1, 1)) == 2.0);
    CHECK(f.eval(VertexId::of(1, 2)) == -2.0);
    CHECK(f.eval(VertexId::of(2, 1)) == 3.0);  // (1 + lambda) / lambda^0
    CHECK(f.eval(VertexId::of(2, 4)) == -3.0);
    CHECK(f.eval(VertexId::of(3, 1)) == 3.5);
    // frozen subtrees: the second child of the top ray carries the parent value
    CHECK(f.eval(VertexId::of(2, 2)) == 2.0);
    CHECK(f.eval(VertexId::of(3, 3)) == 2.0);
    CHECK(f.eval(VertexId::of(3, 4)) == 2.0);
    CHECK(f.eval(VertexId::of(3, 6)) == -2.0);
    CHECK(residual_on_ball(fix, f, 6) == 0.0);  // dyadic values, exact

    // n <= 6 ray values match (1 + ... + lambda^{n-1}) / lambda^{n-2}
    for (int n = 1; n <= 6; ++n) {
        double num = 0.0;
        for (int i = 0; i < n; ++i) num += std::pow(2.0, i);
        double expect = num / std::pow(2.0, n - 2);
        CHECK(f.eval(VertexId::of(n, 1)) == doctest::Approx(expect).epsilon(1e-14));
    }

    // lambda = 1: integer ray values, still harmonic
    auto unit = models::binary_tree_fixture(1.0);
    const auto& f1 = unit.form("f_lambda");
    CHECK(f1.eval(VertexId::of(5, 1)) == 5.0);
    CHECK(residual_on_ball(unit, f1, 6) == 0.0);
    CHECK(residual_on_ball(unit, unit.form("monopole_root"), 6) == 0.0);
    CHECK_THROWS_AS(models::binary_tree_fixture(0.0), SpecError);
}

TEST_CASE("binary tree partial energies: finite iff lambda > 1") {
    // ray-edge sums: E(f_lambda) = 2 lambda^3 / (lambda - 1) for lambda > 1
    auto energy_to_depth = [](double lambda, int depth) {
        auto fix = models::binary_tree_fixture(lambda);
        const auto& f = fix.form("f_lambda");
        CompensatedSum e;
        for (int n = 0; n < depth; ++n) {
            double c = std::pow(lambda, n);
            double d1 = f.eval(VertexId::of(n, 1)) - f.eval(VertexId::of(n + 1, 1));
            e.add(2.0 * c * d1 * d1);  // top ray + mirrored bottom ray
        }
        return e.value();
    };
    double e2 = energy_to_depth(2.0, 40);
    CHECK(e2 == doctest::Approx(16.0).epsilon(1e-9));
    double e1_12 = energy_to_depth(1.0, 12);
    double e1_24 = energy_to_depth(1.0, 24);
    CHECK(e1_12 == doctest::Approx(24.0));
    CHECK(e1_24 == doctest::Approx(48.0));  // grows without bound
}

TEST_CASE("pascal fixture h") {
    auto fix = models::pascal_fixture();
    const auto& h = fix.form("h_symmetric");
    CHECK(h.eval(VertexId::of(2, 1)) == 0.0);
    CHECK(h.eval(VertexId::of(2, 0)) == 3.0);
    CHECK(h.eval(VertexId::of(2, 2)) == -3.0);
    for (int n = 0; n <= 8; ++n)
        for (int i = 0; i <= n; ++i)
            CHECK(h.eval(VertexId::of(n, i)) + h.eval(VertexId::of(n, n - i)) == 0.0);
    CHECK(residual_on_ball(fix, h, 8) == 0.0);
}

TEST_CASE("stationary fixture: constant-f1 family is harmonic, others are not") {
    auto fix = models::stationary_fixture({{2, 1}, {1, 2}}, 2.0);
    const auto& f = fix.form("harmonic_const_f1");
    CHECK(residual_on_ball(fix, f, 7) < 1e-13);
    CHECK(f.eval(VertexId::of(1, 0)) == 1.0);
    CHECK(f.eval(VertexId::of(3, 1)) == doctest::Approx(1.75));  // s_3 = 2 - 2^{-2}
    // bounded by lambda/(lambda-1) = 2
    for (int n = 1; n <= 20; ++n) CHECK(std::abs(f.eval(VertexId::of(n, 0))) <= 2.0);

    // the same family with f1 = (1,-1) fails the residual equation: the
    // closed-form recursion only solves the network Laplacian for constant f1
    auto bad = models::stationary_family({1.0, -1.0}, 2.0);
    std::vector<NeighborEntry> nbrs;
    fix.net->neighbors(VertexId::of(1, 0), nbrs);
    double lap = 0.0;
    for (const auto& e : nbrs)
        lap += e.conductance * (bad(VertexId::of(1, 0)) - bad(e.to));
    CHECK(std::abs(lap) > 1.0);

    CHECK_THROWS_AS(models::stationary_fixture({{1, 1}, {1, 1}}, 2.0), SpecError);  // singular
    CHECK_THROWS_AS(models::stationary_fixture({{2, 1}, {0, 2}}, 2.0), SpecError);  // asymmetric
    CHECK_THROWS_AS(models::stationary_fixture({{0, 0}, {0, 1}}, 2.0), SpecError);  // zero row
}

TEST_CASE("stationary energy dichotomy within the closed-form family") {
    // constant f1: finite energy; nonconstant f1: bundle energies grow
    double lambda = 2.0;
    auto fix = models::stationary_fixture({{2, 1}, {1, 2}}, lambda);
    auto bundle = [&](const models::PointwiseFn& f, int n) {
        double c = std::pow(lambda, n);
        double e = 0.0;
        int a[2][2] = {{2, 1}, {1, 2}};
        for (int x = 0; x < 2; ++x)
            for (int u = 0; u < 2; ++u) {
                double d = f(VertexId::of(n, x)) - f(VertexId::of(n + 1, u));
                e += c * a[x][u] * d * d;
            }
        return e;
    };
    auto good = models::stationary_family({1.0, 1.0}, lambda);
    auto badf = models::stationary_family({1.0, -1.0}, lambda);
    // constant f1: bundle energy decays like 6 lambda^{-n}
    CHECK(bundle(good, 12) == doctest::Approx(6.0 * std::pow(2.0, -12.0)).epsilon(1e-10));
    CHECK(bundle(good, 24) < bundle(good, 12) / 1000.0);
    // nonconstant f1: growing weights against a nonvanishing cross difference
    CHECK(bundle(badf, 12) > bundle(badf, 6));
    CHECK(bundle(badf, 12) > 1e3);
    (void)fix;
}

TEST_CASE("lattice fixtures") {
    auto z1 = models::lattice_fixture(1);
    auto z2 = models::lattice_fixture(2);
    auto z3 = models::lattice_fixture(3);
    CHECK(total_conductance(*z1.net, VertexId::of(0)) == 2.0);
    CHECK(total_conductance(*z2.net, VertexId::of(0, 0)) == 4.0);
    CHECK(total_conductance(*z3.net, VertexId::of(0, 0, 0)) == 6.0);
    CHECK(z2.expected_walk == models::WalkClass::recurrent);
    CHECK(z3.expected_walk == models::WalkClass::transient);
    CHECK_THROWS_AS(models::lattice_fixture(4), SpecError);

    // d = 1 matches the unit z line
    auto zu = models::line_fixture("z_unit");
    for (int n = -3; n <= 3; ++n) {
        auto a = z1.net->neighbors_of(VertexId::of(n));
        auto b = zu.net->neighbors_of(VertexId::of(n));
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(a[k].to == b[k].to);
            CHECK(a[k].conductance == b[k].conductance);
        }
    }
}

TEST_CASE("registry") {
    auto names = models::fixture_names();
    CHECK(names.size() == 9);
    for (const auto& n : names) {
        if (n == "lattice_zd") continue;
        auto fix = models::make_fixture(n, 2.0);
        CHECK(fix.net != nullptr);
        CHECK(fix.net->origin().has_value());
    }
    CHECK_THROWS_AS(models::make_fixture("nope"), SpecError);
}

TEST_SUITE_END();
