#include "harmonet/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "harmonet/potential.hpp"
#include "harmonet/random_walk.hpp"
#include "harmonet/spec_io.hpp"

namespace harmonet::cli {

namespace {

using io::json;

struct CommonOpts {
    std::string fixture;
    std::string spec_path;
    double lambda = 2.0;
    int dim = 2;
    std::string out;
    int workers = 0;
};

models::Fixture resolve_network(const CommonOpts& o) {
    if (!o.spec_path.empty()) return io::parse_network_file(o.spec_path);
    if (o.fixture.empty()) throw SpecError("either --fixture or --spec is required");
    return models::make_fixture(o.fixture, o.lambda, o.dim);
}

VertexId resolve_vertex(const models::Fixture& fix, const std::string& text) {
    if (text == "root" || text == "o" || text == "origin") {
        auto org = fix.net->origin();
        if (!org) throw SpecError("network has no designated origin");
        return *org;
    }
    VertexId v = VertexId::parse(text);
    if (!fix.net->contains(v)) throw InvalidVertexError("unknown vertex " + text);
    return v;
}

std::vector<int> parse_radii(const std::string& text) {
    std::vector<int> out;
    std::string cur;
    for (char ch : text + ",") {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(std::stoi(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (out.empty()) throw SpecError("empty radius schedule");
    return out;
}

json config_json(const std::string& command, const CommonOpts& o, const json& extra) {
    json c = extra;
    c["command"] = command;
    if (!o.fixture.empty()) c["fixture"] = o.fixture;
    if (!o.spec_path.empty()) c["spec"] = o.spec_path;
    c["lambda"] = o.lambda;
    c["workers"] = o.workers;
    return c;
}

void emit(const CommonOpts& o, const json& payload, const json& config) {
    std::string text = io::result_json(payload, config);
    if (o.out.empty())
        std::cout << text;
    else
        io::write_text_file(o.out, text);
}

json potential_result_json(const potential::PotentialResult& res) {
    json values = json::object();
    for (std::size_t i = 0; i < res.values.size(); ++i)
        values[res.values.window().vertex(i).to_string()] = res.values[i];
    return json{{"values", values},
                {"radii", res.radii},
                {"energy_by_radius", res.energy_by_radius},
                {"verdict", potential::to_string(res.verdict)},
                {"final_residual", res.final_residual}};
}

json estimate_json(const walk::WalkEstimate& e) {
    return json{{"quantity", e.quantity}, {"point", e.point},     {"stderr", e.stderr_},
                {"samples", e.samples},   {"horizon", e.horizon}, {"censored", e.censored},
                {"seed", e.seed}};
}

int run_checked(const std::vector<std::string>& argv) {
    CLI::App app{"harmonet: potential theory on weighted networks"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string x_text, y_text = "root";
    std::string radii_text = "2,4,8,16,32";
    std::uint64_t seed = 0;
    bool have_seed = false;
    std::uint64_t samples = 100000;
    std::int64_t horizon = 10000;
    int green_n = 100;
    double weight_a = 0.5, weight_b = 0.5;
    std::string point_a, point_b;
    int depth = 8;
    bool assume_transient = false;
    std::string csv_out;

    auto add_common = [&](CLI::App* cmd, bool needs_seed) {
        cmd->add_option("--fixture", o.fixture, "fixture name (see `fixtures --list`)");
        cmd->add_option("--spec", o.spec_path, "network/diagram/transfer spec JSON");
        cmd->add_option("--lambda", o.lambda, "fixture parameter lambda");
        cmd->add_option("--d", o.dim, "lattice dimension");
        cmd->add_option("--out", o.out, "output file (default stdout)");
        cmd->add_option("--csv", csv_out, "optional CSV export path");
        cmd->add_option("--workers", o.workers, "worker count (default HARMONET_WORKERS or 1)");
        auto* s = cmd->add_option("--seed", seed, "RNG seed");
        if (needs_seed) s->required();
        return s;
    };

    auto* fixtures = app.add_subcommand("fixtures", "list the fixture registry");
    bool list_only = false;
    fixtures->add_flag("--list", list_only, "print fixture names");
    fixtures->add_option("--out", o.out, "output file (default stdout)");

    auto* validate = app.add_subcommand("validate", "check network invariants on a window");
    add_common(validate, false);
    int validate_radius = 4;
    validate->add_option("--radius", validate_radius, "window radius");
    validate->add_option("--x", x_text, "window center (default origin)");

    auto* dipole_cmd = app.add_subcommand("dipole", "grounded-truncation dipole");
    add_common(dipole_cmd, false);
    dipole_cmd->add_option("--x", x_text)->required();
    dipole_cmd->add_option("--y", y_text);
    dipole_cmd->add_option("--radii", radii_text, "exhaustion schedule");

    auto* monopole_cmd = app.add_subcommand("monopole", "grounded-truncation monopole");
    add_common(monopole_cmd, false);
    monopole_cmd->add_option("--x", x_text)->required();
    monopole_cmd->add_option("--radii", radii_text);

    auto* multipole_cmd = app.add_subcommand("multipole", "two-point multipole");
    add_common(multipole_cmd, false);
    multipole_cmd->add_option("--x", x_text, "source vertex x0")->required();
    multipole_cmd->add_option("--p1", point_a, "first sink vertex")->required();
    multipole_cmd->add_option("--p2", point_b, "second sink vertex");
    multipole_cmd->add_option("--a1", weight_a, "first weight");
    multipole_cmd->add_option("--a2", weight_b, "second weight");
    multipole_cmd->add_option("--radii", radii_text);

    auto* green_cmd = app.add_subcommand("green", "truncated Green series");
    add_common(green_cmd, false);
    green_cmd->add_option("--x", x_text)->required();
    green_cmd->add_option("--y", y_text);
    green_cmd->add_option("--N", green_n, "series truncation");

    auto* hitting = app.add_subcommand("hitting", "Monte-Carlo F/U/D estimates");
    add_common(hitting, true);
    hitting->add_option("--x", x_text)->required();
    hitting->add_option("--y", y_text);
    hitting->add_option("--samples", samples);
    hitting->add_option("--horizon", horizon);

    auto* transience = app.add_subcommand("transience", "transient/recurrent classification");
    add_common(transience, true);
    transience->add_option("--x", x_text, "start vertex (default origin)");
    transience->add_option("--samples", samples);
    transience->add_option("--horizon", horizon);

    auto* energy = app.add_subcommand("energy", "norms of a fixture closed form");
    add_common(energy, false);
    std::string form_name = "";
    energy->add_option("--form", form_name, "closed-form name (default: first attached)");
    int energy_radius = 6;
    energy->add_option("--radius", energy_radius, "window radius");

    auto* gg = app.add_subcommand("gauss-green", "boundary/interior split along an exhaustion");
    add_common(gg, false);
    gg->add_option("--form", form_name, "closed-form name used for u = v");
    gg->add_option("--radii", radii_text);

    auto* bratteli_check = app.add_subcommand("bratteli-check", "diagram validation and recursion");
    add_common(bratteli_check, false);
    bratteli_check->add_option("--depth", depth, "levels to extend");

    auto* transfer_check = app.add_subcommand("transfer-check", "transfer-system identities");
    add_common(transfer_check, false);
    transfer_check->add_option("--depth", depth, "levels to check");

    auto* harmonic = app.add_subcommand("harmonic", "level recursion for harmonic functions");
    add_common(harmonic, false);
    harmonic->add_option("--depth", depth, "levels to extend");

    monopole_cmd->add_flag("--assume-transient", assume_transient,
                           "skip the transience gate for probabilistic estimates");

    std::vector<std::string> args = argv;
    std::vector<const char*> cargs;
    cargs.push_back("harmonet");
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
        app.parse(int(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            std::cout << app.help() << std::flush;
            return 0;
        }
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    if (*fixtures) {
        json names = models::fixture_names();
        json payload{{"fixtures", names}};
        emit(o, payload, json{{"command", "fixtures"}});
        return 0;
    }

    if (*validate) {
        auto fix = resolve_network(o);
        VertexId center = x_text.empty() ? fix.net->origin().value() : resolve_vertex(fix, x_text);
        auto w = FiniteWindow::ball(fix.net, center, validate_radius);
        auto rep = harmonet::validate(*fix.net, *w);
        json payload{{"ok", rep.ok()}, {"violations", rep.violations}, {"window_size", w->size()}};
        emit(o, payload, config_json("validate", o, {{"radius", validate_radius}}));
        return rep.ok() ? 0 : 1;
    }

    if (*dipole_cmd || *monopole_cmd || *multipole_cmd) {
        auto fix = resolve_network(o);
        potential::ExhaustionSchedule sched;
        sched.radii = parse_radii(radii_text);
        potential::PotentialResult res = [&] {
            if (*dipole_cmd)
                return potential::dipole(fix.net, resolve_vertex(fix, x_text),
                                         resolve_vertex(fix, y_text), sched);
            if (*monopole_cmd)
                return potential::monopole(fix.net, resolve_vertex(fix, x_text), sched);
            std::vector<std::pair<VertexId, double>> pts{
                {resolve_vertex(fix, point_a), weight_a}};
            if (!point_b.empty()) pts.emplace_back(resolve_vertex(fix, point_b), weight_b);
            return potential::multipole(fix.net, resolve_vertex(fix, x_text), pts, sched);
        }();
        std::string cmd = *dipole_cmd ? "dipole" : *monopole_cmd ? "monopole" : "multipole";
        json config = config_json(cmd, o, {{"x", x_text}, {"radii", radii_text}});
        emit(o, potential_result_json(res), config);
        if (!csv_out.empty())
            io::write_text_file(csv_out, io::vertex_function_csv(res.values, config));
        bool negative = res.verdict == potential::Verdict::recurrent_consistent ||
                        res.verdict == potential::Verdict::not_converged;
        return negative ? 1 : 0;
    }

    if (*green_cmd) {
        auto fix = resolve_network(o);
        VertexId x = resolve_vertex(fix, x_text);
        VertexId y = y_text == "root" && !fix.net->origin() ? x : resolve_vertex(fix, y_text);
        auto w = FiniteWindow::ball(fix.net, x, green_n, 2000000);
        auto series = walk::green_truncated(*fix.net, x, y, w, green_n);
        json payload{{"partial_sums", series.partial},
                     {"block_ratio", series.block_ratio},
                     {"tail_estimate", series.tail_estimate},
                     {"recurrent_consistent", series.recurrent_consistent}};
        json config = config_json("green", o, {{"x", x_text}, {"y", y_text}, {"N", green_n}});
        emit(o, payload, config);
        if (!csv_out.empty()) {
            std::vector<double> idx(series.partial.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = double(i);
            io::write_text_file(csv_out, io::plot_columns(idx, series.partial, config));
        }
        return series.recurrent_consistent ? 1 : 0;
    }

    if (*hitting) {
        auto fix = resolve_network(o);
        walk::WalkParams params{samples, horizon, seed, o.workers, fix.walker_range_cap, false};
        VertexId x = resolve_vertex(fix, x_text);
        json payload;
        auto u = walk::estimate_U(*fix.net, x, params);
        payload["U_direct"] = estimate_json(u.direct);
        payload["U_via_neighbors"] = estimate_json(u.via_neighbors);
        if (!y_text.empty() && y_text != x_text) {
            VertexId y = resolve_vertex(fix, y_text);
            if (y != x) {
                payload["F_xy"] = estimate_json(walk::estimate_F(*fix.net, x, y, params));
                auto d = walk::hitting_matrix_D(*fix.net, x, y, params);
                payload["D_direct"] = {{d.direct(0, 0), d.direct(0, 1)},
                                       {d.direct(1, 0), d.direct(1, 1)}};
                payload["D_factorized"] = {{d.factorized(0, 0), d.factorized(0, 1)},
                                           {d.factorized(1, 0), d.factorized(1, 1)}};
                payload["det_direct"] = d.det_direct;
                payload["det_green_formula"] = d.det_green_formula;
            }
        }
        emit(o, payload,
             config_json("hitting", o,
                         {{"x", x_text},
                          {"y", y_text},
                          {"samples", samples},
                          {"horizon", horizon},
                          {"seed", seed}}));
        return 0;
    }

    if (*transience) {
        auto fix = resolve_network(o);
        VertexId x = x_text.empty() ? fix.net->origin().value() : resolve_vertex(fix, x_text);
        walk::TransienceParams params;
        params.walk = walk::WalkParams{samples, horizon, seed, o.workers, fix.walker_range_cap,
                                       false};
        auto rep = walk::transience_test(fix.net, x, params);
        json payload{{"verdict", walk::to_string(rep.verdict)},
                     {"u_signal", walk::to_string(rep.u_signal)},
                     {"green_signal", walk::to_string(rep.green_signal)},
                     {"monopole_signal", walk::to_string(rep.monopole_signal)},
                     {"evidence", rep.evidence},
                     {"U", estimate_json(rep.u_estimate)}};
        emit(o, payload,
             config_json("transience", o,
                         {{"x", x_text}, {"samples", samples}, {"horizon", horizon}, {"seed", seed}}));
        return rep.verdict == walk::Classification::transient ? 0 : 1;
    }

    if (*energy) {
        auto fix = resolve_network(o);
        if (fix.forms.empty()) throw SpecError("fixture has no closed forms");
        const auto& form = form_name.empty() ? fix.forms.begin()->second : fix.form(form_name);
        auto w = FiniteWindow::ball(fix.net, fix.net->origin().value(), energy_radius);
        auto f = VertexFunction::sample(w, form.eval);
        auto n = ops::norms(*fix.net, f);
        json payload{{"form", form.name},
                     {"l2", n.l2},
                     {"l2_c", n.l2c},
                     {"energy_seminorm", n.energy},
                     {"window_radius", energy_radius},
                     {"crossing_edges", w->crossing_edge_count()}};
        json config = config_json("energy", o, {{"form", form.name}, {"radius", energy_radius}});
        emit(o, payload, config);
        if (!csv_out.empty()) io::write_text_file(csv_out, io::vertex_function_csv(f, config));
        return 0;
    }

    if (*gg) {
        auto fix = resolve_network(o);
        if (fix.forms.empty()) throw SpecError("fixture has no closed forms");
        const auto& form = form_name.empty() ? fix.forms.begin()->second : fix.form(form_name);
        auto radii = parse_radii(radii_text);
        auto rep = potential::gauss_green_split(fix.net, form.eval, form.eval, radii,
                                                fix.net->origin().value());
        json rows = json::array();
        for (const auto& r : rep.rows)
            rows.push_back({{"radius", r.radius},
                            {"interior", r.interior_sum},
                            {"boundary", r.boundary_sum},
                            {"total", r.total},
                            {"window_inner_product", r.window_energy_inner_product}});
        json payload{{"rows", rows},
                     {"boundary_limit", rep.boundary_limit},
                     {"boundary_nonvanishing", rep.boundary_nonvanishing}};
        emit(o, payload, config_json("gauss-green", o, {{"form", form.name}, {"radii", radii_text}}));
        return 0;
    }

    if (*bratteli_check) {
        if (o.spec_path.empty()) throw SpecError("bratteli-check needs --spec");
        auto d = io::parse_diagram_file(o.spec_path);
        auto rep = bratteli::harmonic_exists(d, std::size_t(depth));
        json payload{{"levels", d.levels()},
                     {"zero_one", d.zero_one()},
                     {"harmonic_exists", rep.exists},
                     {"failing_depth", rep.failing_depth}};
        if (rep.exists && !rep.witness.empty()) {
            json w = json::array();
            for (const auto& lvl : rep.witness) {
                json row = json::array();
                for (long i = 0; i < lvl.size(); ++i) row.push_back(lvl[i]);
                w.push_back(row);
            }
            payload["witness"] = w;
        }
        emit(o, payload, config_json("bratteli-check", o, {{"depth", depth}}));
        return rep.exists ? 0 : 1;
    }

    if (*transfer_check) {
        auto sys = o.spec_path.empty() ? transfer::pascal_binomial_transfer(std::size_t(depth))
                                       : io::parse_transfer_file(o.spec_path);
        json payload;
        std::vector<double> q_res;
        for (std::size_t n = 1; n < sys.bundles(); ++n)
            q_res.push_back(transfer::q_markov_identity_residual(sys, n));
        payload["q_markov_identity_residuals"] = q_res;
        auto cond = transfer::conductance_from_transfer(sys);
        double worst = 0.0;
        for (std::size_t n = 1; n < sys.bundles(); ++n) {
            for (long v = 0; v < long(sys.level_size(n)); ++v) {
                double cv = cond[n].row(v).sum() + cond[n - 1].col(v).sum();
                worst = std::max(worst, std::abs(cv - sys.q[n][v]));
            }
        }
        payload["max_total_conductance_deviation"] = worst;
        emit(o, payload, config_json("transfer-check", o, {{"depth", depth}}));
        return 0;
    }

    if (*harmonic) {
        if (o.spec_path.empty()) throw SpecError("harmonic needs --spec (diagram JSON)");
        auto d = io::parse_diagram_file(o.spec_path);
        auto rep = bratteli::harmonic_exists(d, std::min<std::size_t>(std::size_t(depth),
                                                                      d.bundles() - 1));
        if (!rep.exists) {
            std::cerr << "no nontrivial harmonic prefix to depth " << rep.failing_depth << "\n";
            return 1;
        }
        std::ostringstream csv;
        csv << "level,index,value\n";
        for (std::size_t n = 0; n < rep.witness.size(); ++n)
            for (long i = 0; i < rep.witness[n].size(); ++i)
                csv << n << "," << i << "," << rep.witness[n][i] << "\n";
        if (o.out.empty())
            std::cout << csv.str();
        else
            io::write_text_file(o.out, csv.str());
        return 0;
    }

    return 2;
}

}  // namespace

int run(const std::vector<std::string>& argv) {
    try {
        return run_checked(argv);
    } catch (const SpecError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidVertexError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "verdict: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace harmonet::cli
