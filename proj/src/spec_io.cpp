#include "harmonet/spec_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace harmonet::io {

namespace {

VertexId parse_vertex_json(const json& v) {
    if (v.is_number_integer()) return VertexId::of(v.get<std::int64_t>());
    if (v.is_string()) return VertexId::parse(v.get<std::string>());
    if (v.is_array()) {
        if (v.size() == 2) return VertexId::of(v[0].get<std::int64_t>(), v[1].get<std::int64_t>());
        if (v.size() == 3)
            return VertexId::of(v[0].get<std::int64_t>(), v[1].get<std::int64_t>(),
                                v[2].get<std::int64_t>());
    }
    throw SpecError("bad vertex encoding in spec: " + v.dump());
}

Eigen::MatrixXi parse_int_matrix(const json& m) {
    if (!m.is_array() || m.empty() || !m[0].is_array())
        throw SpecError("incidence must be a matrix (array of arrays)");
    Eigen::MatrixXi a(m.size(), m[0].size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i].size() != m[0].size()) throw SpecError("ragged incidence matrix");
        for (std::size_t j = 0; j < m[i].size(); ++j) a(long(i), long(j)) = m[i][j].get<int>();
    }
    return a;
}

Eigen::MatrixXd parse_double_matrix(const json& m) {
    Eigen::MatrixXd a(m.size(), m[0].size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j) a(long(i), long(j)) = m[i][j].get<double>();
    return a;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

models::Fixture parse_network_spec(const json& spec) {
    if (!spec.contains("model")) throw SpecError("network spec needs a \"model\" field");
    std::string model = spec.at("model").get<std::string>();
    json params = spec.value("params", json::object());

    if (model == "explicit") {
        if (!params.contains("edges")) throw SpecError("explicit model needs params.edges");
        std::vector<std::tuple<VertexId, VertexId, double>> edges;
        for (const auto& e : params.at("edges")) {
            if (!e.is_array() || e.size() != 3)
                throw SpecError("explicit edge must be [x, y, c]: " + e.dump());
            edges.emplace_back(parse_vertex_json(e[0]), parse_vertex_json(e[1]),
                               e[2].get<double>());
        }
        std::optional<VertexId> origin;
        if (params.contains("origin")) origin = parse_vertex_json(params.at("origin"));
        models::Fixture fix;
        fix.name = "explicit";
        fix.net = std::make_shared<ExplicitNetwork>(std::move(edges), origin);
        return fix;
    }
    double lambda = params.value("lambda", 2.0);
    int d = params.value("d", 2);
    if (model == "stationary_bratteli" && params.contains("incidence")) {
        Eigen::MatrixXi a = parse_int_matrix(params.at("incidence"));
        std::vector<std::vector<int>> am(std::size_t(a.rows()),
                                         std::vector<int>(std::size_t(a.cols())));
        for (long i = 0; i < a.rows(); ++i)
            for (long j = 0; j < a.cols(); ++j) am[size_t(i)][size_t(j)] = a(i, j);
        return models::stationary_fixture(am, lambda);
    }
    return models::make_fixture(model, lambda, d);
}

models::Fixture parse_network_file(const std::string& path) {
    return parse_network_spec(load_json_file(path));
}

bratteli::BratteliDiagram parse_diagram_spec(const json& spec) {
    if (!spec.contains("incidence")) throw SpecError("diagram spec needs \"incidence\"");
    const json& inc = spec.at("incidence");
    std::vector<Eigen::MatrixXi> matrices;
    bool single = inc.is_array() && !inc.empty() && inc[0].is_array() && !inc[0].empty() &&
                  inc[0][0].is_number();
    if (single) {
        Eigen::MatrixXi a = parse_int_matrix(inc);
        std::size_t k = 0;
        const json& levels = spec.value("levels", json("stationary"));
        if (levels.is_number_integer())
            k = levels.get<std::size_t>();
        else if (levels.is_string() && levels.get<std::string>() == "stationary")
            k = 8;  // default materialized depth for stationary specs
        else
            throw SpecError("diagram \"levels\" must be an integer or \"stationary\"");
        if (a.rows() != a.cols()) throw SpecError("stationary incidence must be square");
        matrices.assign(k, a);
    } else {
        for (const auto& m : inc) matrices.push_back(parse_int_matrix(m));
    }

    json cond = spec.value("conductance", json{{"rule", "lambda_pow_n"}, {"lambda", 1.0}});
    std::string rule = cond.value("rule", "lambda_pow_n");
    if (rule == "lambda_pow_n")
        return bratteli::build_diagram(std::move(matrices), cond.value("lambda", 1.0));
    if (rule == "explicit") {
        std::vector<Eigen::MatrixXd> cm;
        for (const auto& m : cond.at("matrices")) cm.push_back(parse_double_matrix(m));
        return bratteli::build_diagram(std::move(matrices), std::move(cm));
    }
    throw SpecError("unknown conductance rule '" + rule + "'");
}

bratteli::BratteliDiagram parse_diagram_file(const std::string& path) {
    return parse_diagram_spec(load_json_file(path));
}

transfer::TransferSystem parse_transfer_spec(const json& spec) {
    if (spec.contains("fixture")) {
        std::string name = spec.at("fixture").get<std::string>();
        if (name == "pascal_binomial")
            return transfer::pascal_binomial_transfer(spec.value("depth", std::size_t{12}));
        throw SpecError("unknown transfer fixture '" + name + "'");
    }
    if (!spec.contains("q0") || !spec.contains("R"))
        throw SpecError("transfer spec needs \"q0\" and \"R\"");
    const json& q0j = spec.at("q0");
    Eigen::VectorXd q0(q0j.size());
    for (std::size_t i = 0; i < q0j.size(); ++i) q0[long(i)] = q0j[i].get<double>();
    std::vector<Eigen::MatrixXd> r;
    for (const auto& m : spec.at("R")) r.push_back(parse_double_matrix(m));
    return transfer::make_transfer(std::move(q0), std::move(r));
}

transfer::TransferSystem parse_transfer_file(const std::string& path) {
    return parse_transfer_spec(load_json_file(path));
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open spec file " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SpecError("malformed JSON in " + path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SpecError("cannot write " + path);
    out << content;
}

std::string vertex_function_csv(const VertexFunction& f, const json& config) {
    std::ostringstream os;
    os << "# harmonet " << kVersion << "\n# config: " << config.dump() << "\n";
    os << "vertex,value\n";
    for (std::size_t i = 0; i < f.size(); ++i)
        os << f.window().vertex(i).to_string() << "," << fmt(f[i]) << "\n";
    return os.str();
}

std::string sparse_laplacian_triplets(const ops::SparseLaplacian& m, const json& config) {
    std::ostringstream os;
    os << "# harmonet " << kVersion << "\n# config: " << config.dump() << "\n";
    os << "# row col value\n";
    for (int k = 0; k < m.m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m.m, k); it; ++it)
            os << it.row() << " " << it.col() << " " << fmt(it.value()) << "\n";
    return os.str();
}

std::string plot_columns(const std::vector<double>& x, const std::vector<double>& y,
                         const json& config) {
    std::ostringstream os;
    os << "# harmonet " << kVersion << "\n# config: " << config.dump() << "\n";
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
        os << fmt(x[i]) << " " << fmt(y[i]) << "\n";
    return os.str();
}

std::string result_json(const json& payload, const json& config) {
    json out = payload;
    out["config"] = config;
    out["version"] = kVersion;
    return out.dump(2) + "\n";
}

}  // namespace harmonet::io
