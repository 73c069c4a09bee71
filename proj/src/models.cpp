#include "harmonet/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace harmonet::models {

namespace {

// Conductances like lambda^n leave double range near n ~ 1000/log2(lambda);
// model oracles refuse vertices beyond this band instead of returning inf or 0.
constexpr std::int64_t kGeomBand = 900;

std::int64_t band_for(double lambda) {
    double b = 280.0 / std::log10(std::max(lambda, 1.0 + 1e-9));
    return std::min<std::int64_t>(kGeomBand, std::int64_t(b));
}

class LineNetwork : public Network {
public:
    enum class Domain { n0, z };
    LineNetwork(std::string name, Domain dom, std::function<double(std::int64_t)> c_right,
                std::int64_t band = -1)
        : name_(std::move(name)), dom_(dom), c_right_(std::move(c_right)), band_(band) {
        origin_ = VertexId::of(0);
    }

    bool contains(const VertexId& x) const override {
        if (x.rank() != 1) return false;
        std::int64_t n = x[0];
        if (dom_ == Domain::n0 && n < 0) return false;
        if (band_ > 0 && (n > band_ || n < -band_)) return false;
        return true;
    }

    void neighbors(const VertexId& x, std::vector<NeighborEntry>& out) const override {
        if (!contains(x)) throw InvalidVertexError("unknown vertex " + x.to_string() + " on " + name_);
        std::int64_t n = x[0];
        if (dom_ == Domain::z || n > 0) out.push_back({VertexId::of(n - 1), c_right_(n - 1)});
        out.push_back({VertexId::of(n + 1), c_right_(n)});
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    Domain dom_;
    std::function<double(std::int64_t)> c_right_;  // conductance of edge (n, n+1)
    std::int64_t band_;
};

class BinaryTreeNetwork : public Network {
public:
    explicit BinaryTreeNetwork(double lambda) : lambda_(lambda) { origin_ = VertexId::of(0, 1); }

    static constexpr std::int64_t kMaxLevel = 62;

    bool contains(const VertexId& x) const override {
        if (x.rank() != 2) return false;
        std::int64_t n = x[0], i = x[1];
        if (n < 0 || n > kMaxLevel) return false;
        return i >= 1 && i <= (std::int64_t{1} << n);
    }

    void neighbors(const VertexId& x, std::vector<NeighborEntry>& out) const override {
        if (!contains(x)) throw InvalidVertexError("unknown vertex " + x.to_string() + " on binary_tree");
        std::int64_t n = x[0], i = x[1];
        if (n > 0) out.push_back({VertexId::of(n - 1, (i + 1) / 2), std::pow(lambda_, double(n - 1))});
        if (n + 1 > kMaxLevel)
            throw InvalidVertexError("binary_tree oracle exceeds representable depth at " + x.to_string());
        double c = std::pow(lambda_, double(n));
        out.push_back({VertexId::of(n + 1, 2 * i - 1), c});
        out.push_back({VertexId::of(n + 1, 2 * i), c});
    }

    std::string name() const override { return "binary_tree"; }

private:
    double lambda_;
};

class PascalNetwork : public Network {
public:
    PascalNetwork(bool unit, double lambda) : unit_(unit), lambda_(lambda) {
        origin_ = VertexId::of(0, 0);
    }

    bool contains(const VertexId& x) const override {
        if (x.rank() != 2) return false;
        std::int64_t n = x[0], i = x[1];
        if (n < 0 || (!unit_ && n > band_for(lambda_))) return false;
        return i >= 0 && i <= n;
    }

    void neighbors(const VertexId& x, std::vector<NeighborEntry>& out) const override {
        if (!contains(x)) throw InvalidVertexError("unknown vertex " + x.to_string() + " on pascal");
        std::int64_t n = x[0], i = x[1];
        double cu = unit_ ? 1.0 : std::pow(lambda_, double(n - 1));
        double cd = unit_ ? 1.0 : std::pow(lambda_, double(n));
        if (n > 0) {
            if (i - 1 >= 0) out.push_back({VertexId::of(n - 1, i - 1), cu});
            if (i <= n - 1) out.push_back({VertexId::of(n - 1, i), cu});
        }
        out.push_back({VertexId::of(n + 1, i), cd});
        out.push_back({VertexId::of(n + 1, i + 1), cd});
    }

    std::string name() const override { return "pascal"; }

private:
    bool unit_;
    double lambda_;
};

class StationaryNetwork : public Network {
public:
    StationaryNetwork(std::vector<std::vector<int>> a, double lambda)
        : a_(std::move(a)), d_(static_cast<std::int64_t>(a_.size())), lambda_(lambda) {
        origin_ = VertexId::of(0, 0);
    }

    bool contains(const VertexId& x) const override {
        if (x.rank() != 2) return false;
        std::int64_t n = x[0], i = x[1];
        return n >= 0 && n <= band_for(lambda_) && i >= 0 && i < d_;
    }

    void neighbors(const VertexId& x, std::vector<NeighborEntry>& out) const override {
        if (!contains(x)) throw InvalidVertexError("unknown vertex " + x.to_string() + " on stationary");
        std::int64_t n = x[0], i = x[1];
        if (n > 0) {
            double cu = std::pow(lambda_, double(n - 1));
            for (std::int64_t w = 0; w < d_; ++w)
                if (a_[size_t(w)][size_t(i)] > 0)
                    out.push_back({VertexId::of(n - 1, w), cu * a_[size_t(w)][size_t(i)]});
        }
        double cd = std::pow(lambda_, double(n));
        for (std::int64_t u = 0; u < d_; ++u)
            if (a_[size_t(i)][size_t(u)] > 0)
                out.push_back({VertexId::of(n + 1, u), cd * a_[size_t(i)][size_t(u)]});
    }

    std::string name() const override { return "stationary_bratteli"; }

private:
    std::vector<std::vector<int>> a_;
    std::int64_t d_;
    double lambda_;
};

class LatticeNetwork : public Network {
public:
    explicit LatticeNetwork(int d) : d_(d) {
        origin_ = d == 1 ? VertexId::of(0) : d == 2 ? VertexId::of(0, 0) : VertexId::of(0, 0, 0);
    }

    bool contains(const VertexId& x) const override { return x.rank() == d_; }

    void neighbors(const VertexId& x, std::vector<NeighborEntry>& out) const override {
        if (!contains(x)) throw InvalidVertexError("unknown vertex " + x.to_string() + " on lattice");
        // ascending lexicographic order: -e_1, -e_2, ..., +e_d, ..., +e_1
        auto push = [&](int k, std::int64_t s) {
            std::array<std::int64_t, 3> c{0, 0, 0};
            for (int j = 0; j < d_; ++j) c[size_t(j)] = x[j];
            c[size_t(k)] += s;
            out.push_back({d_ == 1   ? VertexId::of(c[0])
                           : d_ == 2 ? VertexId::of(c[0], c[1])
                                     : VertexId::of(c[0], c[1], c[2]),
                           1.0});
        };
        for (int k = 0; k < d_; ++k) push(k, -1);
        for (int k = d_ - 1; k >= 0; --k) push(k, +1);
    }

    std::string name() const override { return "lattice_z" + std::to_string(d_); }

private:
    int d_;
};

// Top-ray values of the symmetric tree harmonic function. M(0)=0, M(1)=lambda,
// then M(k+1) = M(k) + (M(k) - M(k-1))/lambda.
std::vector<double> tree_ray_values(double lambda, int depth) {
    std::vector<double> m(size_t(depth) + 1, 0.0);
    if (depth >= 1) m[1] = lambda;
    for (int k = 1; k < depth; ++k)
        m[size_t(k) + 1] = m[size_t(k)] + (m[size_t(k)] - m[size_t(k) - 1]) / lambda;
    return m;
}

double tree_symmetric_value(double lambda, std::int64_t n, std::int64_t i) {
    static thread_local std::map<double, std::vector<double>> cache;
    auto& m = cache[lambda];
    if (std::int64_t(m.size()) <= n) m = tree_ray_values(lambda, int(std::max<std::int64_t>(n, 63)));
    if (n == 0) return 0.0;
    if (i == 1) return m[size_t(n)];
    if (i == (std::int64_t{1} << n)) return -m[size_t(n)];
    // ancestor index at level k is ((i-1) >> (n-k)) + 1
    for (std::int64_t k = n - 1; k >= 0; --k) {
        std::int64_t a = ((i - 1) >> (n - k)) + 1;
        if (a == 1) return m[size_t(k)];                       // frozen below (k+1, 2)
        if (a == (std::int64_t{1} << k)) return -m[size_t(k)]; // frozen below (k+1, 2^{k+1}-1)
    }
    return 0.0;  // unreachable
}

void validate_forms(const Fixture& fix, double tol = 1e-12) {
    auto root = fix.net->origin().value();
    auto w = FiniteWindow::ball(fix.net, root, 6);
    std::vector<NeighborEntry> nbrs;
    for (const auto& [name, form] : fix.forms) {
        for (std::size_t k = 0; k < w->size(); ++k) {
            if (!w->has_full_neighborhood(k)) continue;
            const VertexId& x = w->vertex(k);
            double fx = form.eval(x);
            fix.net->neighbors(x, nbrs);
            CompensatedSum lap;
            double scale = 1.0;
            for (const auto& e : nbrs) {
                lap.add(e.conductance * (fx - form.eval(e.to)));
                scale = std::max(scale, e.conductance * std::abs(fx));
            }
            nbrs.clear();
            auto it = form.delta_rhs.find(x);
            double expected = it == form.delta_rhs.end() ? 0.0 : it->second;
            if (std::abs(lap.value() - expected) > tol * scale)
                throw NumericalError("fixture " + fix.name + " closed form '" + name +
                                     "' fails its residual equation at " + x.to_string());
        }
    }
}

}  // namespace

const ClosedForm& Fixture::form(const std::string& n) const {
    auto it = forms.find(n);
    if (it == forms.end()) throw SpecError("fixture " + name + " has no closed form '" + n + "'");
    return it->second;
}

Fixture line_fixture(const std::string& variant, double lambda) {
    Fixture fix;
    fix.name = "line_" + variant;
    if (variant == "n0_linear") {
        fix.net = std::make_shared<LineNetwork>("line_n0_linear", LineNetwork::Domain::n0,
                                                [](std::int64_t n) { return double(n + 1); });
        fix.expected_walk = WalkClass::recurrent;
        fix.notes = "||delta_n||_E^2 = 2n+1";
    } else if (variant == "z_unit") {
        fix.net = std::make_shared<LineNetwork>("line_z_unit", LineNetwork::Domain::z,
                                                [](std::int64_t) { return 1.0; });
        fix.expected_walk = WalkClass::recurrent;
        fix.finite_energy_harmonic = false;
        fix.forms["dipole_3_0"] = z_unit_dipole(3);
    } else if (variant == "z_summable") {
        if (!(lambda > 1.0)) throw SpecError("z_summable needs lambda > 1");
        fix.net = std::make_shared<LineNetwork>(
            "line_z_summable", LineNetwork::Domain::z,
            [lambda](std::int64_t n) { return std::pow(lambda, double(n + 1)); }, band_for(lambda));
        fix.expected_walk = WalkClass::transient;
        fix.walker_range_cap = band_for(lambda) - 2;
        // u(0)=0, u(n)-u(n-1)=1/c_{n-1,n} on the summable right ray, constant on
        // the left ray. Harmonic off the origin with Delta u = -delta_0; its
        // energy and exhaustion boundary sum both equal 1/(lambda-1).
        ClosedForm u;
        u.name = "example3_harmonic";
        u.eval = [lambda](const VertexId& v) {
            std::int64_t n = v[0];
            if (n <= 0) return 0.0;
            return (1.0 - std::pow(lambda, double(-n))) / (lambda - 1.0);
        };
        u.delta_rhs[VertexId::of(0)] = -1.0;
        u.notes = "boundary sum over exhaustions converges to 1/(lambda-1)";
        fix.forms["example3_harmonic"] = u;
        fix.notes = "negated form is a monopole at 0; finite-energy harmonic space is trivial";
    } else if (variant == "z_geometric") {
        if (!(lambda > 1.0)) throw SpecError("z_geometric needs lambda > 1");
        auto cfun = [lambda](std::int64_t n) {
            double e = double(std::max(std::llabs(n), std::llabs(n + 1)));
            return std::pow(lambda, e);
        };
        fix.net = std::make_shared<LineNetwork>("line_z_geometric", LineNetwork::Domain::z, cfun,
                                                band_for(lambda));
        fix.expected_walk = WalkClass::transient;
        fix.finite_energy_harmonic = true;
        fix.walker_range_cap = band_for(lambda) - 2;
        double r = 1.0 / lambda;
        ClosedForm w0;
        w0.name = "monopole_0";
        w0.eval = [r](const VertexId& v) {
            return r / (2.0 * (1.0 - r)) * std::pow(r, double(std::llabs(v[0])));
        };
        w0.delta_rhs[VertexId::of(0)] = 1.0;
        w0.notes = "w_0(n) = r/(2(1-r)) r^|n| with r = 1/lambda; scale fixed by the residual at 0";
        fix.forms["monopole_0"] = w0;
        ClosedForm h;
        h.name = "harmonic_odd";
        h.eval = [r](const VertexId& v) {
            std::int64_t n = v[0];
            double s = n > 0 ? 1.0 : n < 0 ? -1.0 : 0.0;
            return s * (1.0 - std::pow(r, double(std::llabs(n))));
        };
        h.notes = "sgn(n)(1 - r^{|n|}); bounded, finite energy";
        fix.forms["harmonic_odd"] = h;
    } else if (variant == "n0_geometric") {
        if (!(lambda > 1.0)) throw SpecError("n0_geometric needs lambda > 1");
        fix.net = std::make_shared<LineNetwork>(
            "line_n0_geometric", LineNetwork::Domain::n0,
            [lambda](std::int64_t n) { return std::pow(lambda, double(n)); }, band_for(lambda));
        fix.expected_walk = WalkClass::transient;
        fix.walker_range_cap = band_for(lambda) - 2;
        ClosedForm w0;
        w0.name = "monopole_0";
        w0.eval = [lambda](const VertexId& v) {
            return std::pow(lambda, double(1 - v[0])) / (lambda - 1.0);
        };
        w0.delta_rhs[VertexId::of(0)] = 1.0;
        fix.forms["monopole_0"] = w0;
        fix.notes = "for lambda=2 this carries the radial part of the unit binary tree walk";
    } else {
        throw SpecError("unknown line fixture variant '" + variant + "'");
    }
    validate_forms(fix);
    return fix;
}

ClosedForm z_unit_dipole(std::int64_t n) {
    if (n == 0) throw SpecError("z_unit dipole needs n != 0");
    ClosedForm v;
    v.name = "dipole_" + std::to_string(n) + "_0";
    v.eval = [n](const VertexId& vv) {
        std::int64_t i = vv[0];
        if (n > 0) {
            if (i <= 0) return 0.0;
            if (i >= n) return double(n);
            return double(i);
        }
        if (i >= 0) return 0.0;
        if (i <= n) return double(-n);
        return double(-i);
    };
    v.delta_rhs[VertexId::of(n)] = 1.0;
    v.delta_rhs[VertexId::of(0)] = -1.0;
    return v;
}

Fixture binary_tree_fixture(double lambda) {
    if (!(lambda > 0.0)) throw SpecError("binary_tree needs lambda > 0");
    Fixture fix;
    fix.name = "binary_tree";
    fix.net = std::make_shared<BinaryTreeNetwork>(lambda);
    fix.walker_range_cap = 60;
    fix.expected_walk = 2.0 * lambda > 1.0 ? WalkClass::transient : WalkClass::recurrent;
    fix.finite_energy_harmonic = lambda > 1.0;

    ClosedForm f;
    f.name = "f_lambda";
    f.eval = [lambda](const VertexId& v) { return tree_symmetric_value(lambda, v[0], v[1]); };
    f.notes = "symmetric harmonic function; energy 2 lambda^3/(lambda-1), finite iff lambda > 1";
    fix.forms["f_lambda"] = f;

    if (lambda == 1.0) {
        ClosedForm w;
        w.name = "monopole_root";
        w.eval = [](const VertexId& v) { return std::pow(2.0, double(-v[0])); };
        w.delta_rhs[VertexId::of(0, 1)] = 1.0;
        fix.forms["monopole_root"] = w;
    }
    validate_forms(fix);
    return fix;
}

Fixture pascal_fixture(const std::string& c_rule, double lambda) {
    Fixture fix;
    fix.name = "pascal";
    bool unit = c_rule == "unit" || (c_rule == "lambda_pow_n" && lambda == 1.0);
    fix.net = std::make_shared<PascalNetwork>(unit, lambda);
    if (unit) {
        fix.expected_walk = WalkClass::recurrent;
        fix.finite_energy_harmonic = false;
        ClosedForm h;
        h.name = "h_symmetric";
        h.eval = [](const VertexId& v) {
            double n = double(v[0]), i = double(v[1]);
            return n * (n + 1.0) / 2.0 - i * (n + 1.0);
        };
        h.notes = "h(n,i) = n(n+1)/2 - i(n+1); integer-valued, h(n,i) = -h(n,n-i)";
        fix.forms["h_symmetric"] = h;
        fix.notes = "no non-constant harmonic function of finite energy";
    }
    validate_forms(fix);
    return fix;
}

PointwiseFn stationary_family(const std::vector<double>& f1, double lambda) {
    return [f1, lambda](const VertexId& v) {
        std::int64_t n = v[0];
        if (n == 0) return 0.0;
        double s = lambda == 1.0
                       ? double(n)
                       : (1.0 - std::pow(lambda, double(-n))) / (1.0 - 1.0 / lambda);
        return f1.at(size_t(v[1])) * s;
    };
}

Fixture stationary_fixture(const std::vector<std::vector<int>>& a, double lambda) {
    const std::size_t d = a.size();
    if (d == 0) throw SpecError("stationary incidence must be nonempty");
    Eigen::MatrixXd m(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        if (a[i].size() != d) throw SpecError("stationary incidence must be square");
        bool row_zero = true;
        for (std::size_t j = 0; j < d; ++j) {
            if (a[i][j] < 0) throw SpecError("stationary incidence must be nonnegative");
            if (a[i][j] != a[j][i]) throw SpecError("stationary incidence must be symmetric");
            row_zero = row_zero && a[i][j] == 0;
            m(long(i), long(j)) = a[i][j];
        }
        if (row_zero) throw SpecError("stationary incidence has a zero row");
    }
    if (Eigen::FullPivLU<Eigen::MatrixXd>(m).rank() != long(d))
        throw SpecError("stationary incidence must be invertible");
    if (!(lambda > 0.0)) throw SpecError("stationary needs lambda > 0");

    Fixture fix;
    fix.name = "stationary_bratteli";
    fix.net = std::make_shared<StationaryNetwork>(a, lambda);
    fix.walker_range_cap = band_for(lambda) - 2;
    if (lambda > 1.0) fix.expected_walk = WalkClass::transient;

    ClosedForm f;
    f.name = "harmonic_const_f1";
    f.eval = stationary_family(std::vector<double>(d, 1.0), lambda);
    // With f_0 = 0 the level-0 vertices are not harmonic: Delta f = -(row sum) there.
    for (std::size_t w = 0; w < d; ++w) {
        int rs = 0;
        for (std::size_t u = 0; u < d; ++u) rs += a[w][u];
        f.delta_rhs[VertexId::of(0, std::int64_t(w))] = -double(rs);
    }
    f.notes = "f_{n+1} = f_1 sum_{i<=n} lambda^{-i} with constant f_1; bounded iff lambda > 1";
    fix.forms["harmonic_const_f1"] = f;
    validate_forms(fix);
    return fix;
}

Fixture lattice_fixture(int d) {
    if (d < 1 || d > 3) throw SpecError("lattice dimension must be 1, 2, or 3");
    Fixture fix;
    fix.name = "lattice_z" + std::to_string(d);
    fix.net = std::make_shared<LatticeNetwork>(d);
    fix.expected_walk = d <= 2 ? WalkClass::recurrent : WalkClass::transient;
    return fix;
}

std::vector<std::string> fixture_names() {
    return {"line_n0_linear", "line_z_unit",  "line_z_summable", "line_z_geometric",
            "line_n0_geometric", "binary_tree", "pascal",        "stationary_bratteli",
            "lattice_zd"};
}

Fixture make_fixture(const std::string& name, double lambda, int d) {
    if (name.rfind("line_", 0) == 0) return line_fixture(name.substr(5), lambda);
    if (name == "binary_tree") return binary_tree_fixture(lambda);
    if (name == "pascal") return pascal_fixture(lambda == 1.0 ? "unit" : "lambda_pow_n", lambda);
    if (name == "stationary_bratteli") return stationary_fixture({{2, 1}, {1, 2}}, lambda);
    if (name == "lattice_zd") return lattice_fixture(d);
    throw SpecError("unknown fixture '" + name + "'");
}

}  // namespace harmonet::models
