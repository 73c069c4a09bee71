#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "harmonet/cli.hpp"
#include "harmonet/spec_io.hpp"

using namespace harmonet;
using io::json;

TEST_SUITE_BEGIN("io_cli");

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("harmonet_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("network spec parsing") {
    // explicit 3-vertex path
    json spec = {{"model", "explicit"},
                 {"params", {{"edges", {{0, 1, 1.0}, {1, 2, 1.0}}}, {"origin", 0}}}};
    auto fix = io::parse_network_spec(spec);
    CHECK(fix.net->contains(VertexId::of(2)));
    CHECK(total_conductance(*fix.net, VertexId::of(1)) == 2.0);

    // named models
    json line = {{"model", "line_z_geometric"}, {"params", {{"lambda", 3.0}}}};
    auto lf = io::parse_network_spec(line);
    CHECK(lf.net->name() == "line_z_geometric");

    // loops and nonpositive conductances are rejected with diagnostics
    json loop = {{"model", "explicit"}, {"params", {{"edges", {{0, 0, 1.0}}}}}};
    CHECK_THROWS_AS(io::parse_network_spec(loop), SpecError);
    json neg = {{"model", "explicit"}, {"params", {{"edges", {{0, 1, -2.0}}}}}};
    CHECK_THROWS_AS(io::parse_network_spec(neg), SpecError);
    // conflicting duplicate pair: rejected naming the pair
    json dup = {{"model", "explicit"},
                {"params", {{"edges", {{0, 1, 1.0}, {1, 0, 2.0}}}}}};
    try {
        io::parse_network_spec(dup);
        CHECK(false);
    } catch (const SpecError& e) {
        CHECK(std::string(e.what()).find("0") != std::string::npos);
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
    CHECK_THROWS_AS(io::parse_network_spec(json{{"params", json::object()}}), SpecError);
}

TEST_CASE("diagram spec parsing") {
    // explicit pascal-shaped chain
    json spec = {{"levels", 3},
                 {"incidence", {{{1, 1}}, {{1, 1, 0}, {0, 1, 1}}}},
                 {"conductance", {{"rule", "lambda_pow_n"}, {"lambda", 1.0}}}};
    auto d = io::parse_diagram_spec(spec);
    CHECK(d.levels() == 3);
    CHECK(d.level_size(0) == 1);
    CHECK(d.level_size(2) == 3);

    // stationary shorthand: single matrix
    json st = {{"levels", 5},
               {"incidence", {{2, 1}, {1, 2}}},
               {"conductance", {{"rule", "lambda_pow_n"}, {"lambda", 2.0}}}};
    auto sd = io::parse_diagram_spec(st);
    CHECK(sd.levels() == 6);
    CHECK(sd.conductance[2](0, 0) == doctest::Approx(8.0));

    json bad = {{"incidence", {{{1, 0}}}}};
    CHECK_THROWS_AS(io::parse_diagram_spec(bad), SpecError);
}

TEST_CASE("transfer spec parsing") {
    json spec = {{"q0", {1.0}}, {"R", {{{0.5, 0.5}}}}};
    auto sys = io::parse_transfer_spec(spec);
    CHECK(sys.q[1][0] == 0.5);
    json fx = {{"fixture", "pascal_binomial"}, {"depth", 4}};
    CHECK(io::parse_transfer_spec(fx).bundles() == 4);
    CHECK_THROWS_AS(io::parse_transfer_spec(json{{"q0", {1.0}}}), SpecError);
}

TEST_CASE("cli fixtures and monopole command") {
    TempDir tmp;
    CHECK(cli::run({"fixtures", "--list", "--out", tmp.file("names.json")}) == 0);
    auto names = json::parse(slurp(tmp.file("names.json")));
    CHECK(names.at("fixtures").size() == 9);
    CHECK(names.contains("config"));
    CHECK(names.at("version").get<std::string>() == kVersion);

    // monopole on the unit tree: w(a) = 2^{-dist}
    int rc = cli::run({"monopole", "--fixture", "binary_tree", "--lambda", "1", "--x", "root",
                       "--radii", "2,4,8,12", "--out", tmp.file("w.json")});
    CHECK(rc == 0);
    auto w = json::parse(slurp(tmp.file("w.json")));
    CHECK(w.at("verdict").get<std::string>() == "transient_consistent");
    double w11 = w.at("values").at("(1,1)").get<double>();
    CHECK(w11 == doctest::Approx(0.5).epsilon(2e-3));
}

TEST_CASE("cli green on the unit z line flags recurrence (exit 1)") {
    TempDir tmp;
    int rc = cli::run({"green", "--fixture", "line_z_unit", "--x", "0", "--y", "0", "--N", "600",
                       "--out", tmp.file("g.json")});
    CHECK(rc == 1);
    auto g = json::parse(slurp(tmp.file("g.json")));
    CHECK(g.at("recurrent_consistent").get<bool>());
    CHECK(g.at("partial_sums").size() == 601);
}

TEST_CASE("cli usage and failure exit codes") {
    CHECK(cli::run({"no-such-command"}) == 2);
    CHECK(cli::run({"dipole", "--fixture", "binary_tree"}) == 2);      // missing --x
    CHECK(cli::run({"hitting", "--fixture", "binary_tree", "--x", "root"}) == 2);  // seed required
    CHECK(cli::run({"monopole", "--fixture", "nope", "--x", "0"}) == 2);
    // asymmetric explicit spec rejected as usage error
    TempDir tmp;
    write(tmp.file("bad.json"),
          R"({"model":"explicit","params":{"edges":[[0,1,1.0],[1,0,2.0]]}})");
    CHECK(cli::run({"validate", "--spec", tmp.file("bad.json")}) == 2);
}

TEST_CASE("cli outputs are byte-identical for identical configurations") {
    TempDir tmp;
    auto run_once = [&](const std::string& name) {
        CHECK(cli::run({"hitting", "--fixture", "binary_tree", "--lambda", "1", "--x", "root",
                        "--y", "(1,1)", "--seed", "99", "--samples", "2000", "--horizon", "2000",
                        "--workers", "2", "--out", tmp.file(name)}) == 0);
        return slurp(tmp.file(name));
    };
    auto a = run_once("a.json");
    auto b = run_once("b.json");
    CHECK(a == b);
    CHECK(a.find("\"seed\": 99") != std::string::npos);
}

TEST_CASE("cli validate and gauss-green run clean on fixtures") {
    TempDir tmp;
    CHECK(cli::run({"validate", "--fixture", "pascal", "--lambda", "1", "--radius", "5",
                    "--out", tmp.file("v.json")}) == 0);
    CHECK(cli::run({"gauss-green", "--fixture", "line_z_summable", "--lambda", "2", "--radii",
                    "5,10,20,40", "--out", tmp.file("gg.json")}) == 0);
    auto gg = json::parse(slurp(tmp.file("gg.json")));
    CHECK(gg.at("boundary_limit").get<double>() == doctest::Approx(1.0).epsilon(1e-6));

    // bratteli-check on a written diagram spec
    write(tmp.file("pascal.json"),
          R"({"incidence": [[[1,1]],[[1,1,0],[0,1,1]],[[1,1,0,0],[0,1,1,0],[0,0,1,1]]],
              "conductance": {"rule": "lambda_pow_n", "lambda": 1.0}})");
    CHECK(cli::run({"bratteli-check", "--spec", tmp.file("pascal.json"), "--depth", "2",
                    "--out", tmp.file("bc.json")}) == 0);
    auto bc = json::parse(slurp(tmp.file("bc.json")));
    CHECK(bc.at("harmonic_exists").get<bool>());

    CHECK(cli::run({"transfer-check", "--depth", "6", "--out", tmp.file("tc.json")}) == 0);
    auto tc = json::parse(slurp(tmp.file("tc.json")));
    CHECK(tc.at("max_total_conductance_deviation").get<double>() < 1e-12);
}

TEST_CASE("csv and plot exports embed the config") {
    TempDir tmp;
    CHECK(cli::run({"energy", "--fixture", "pascal", "--lambda", "1", "--radius", "4", "--out",
                    tmp.file("e.json"), "--csv", tmp.file("h.csv")}) == 0);
    auto csv = slurp(tmp.file("h.csv"));
    CHECK(csv.find("# harmonet") != std::string::npos);
    CHECK(csv.find("vertex,value") != std::string::npos);
    CHECK(csv.find("(2,0),3") != std::string::npos);
}

TEST_SUITE_END();
