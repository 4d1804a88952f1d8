#include "cascadelab/cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <yaml-cpp/exceptions.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cascadelab/error.hpp"
#include "cascadelab/simulation.hpp"

#ifndef CASCADELAB_VERSION
#define CASCADELAB_VERSION "unknown"
#endif

namespace cascadelab::cli {

namespace {

using json = nlohmann::ordered_json;

std::uint64_t graph_seed(std::uint64_t master, std::size_t index) {
    // Separate stream family from the dynamics streams of the same index.
    return realization_rng(master ^ 0x6772617068ULL, index)();
}

Graph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read edge list " + path.string());
    return load_edge_list(in).graph;
}

std::string class_label(const char* prefix, std::size_t k) { return std::string(prefix) + std::to_string(k); }

json series_summary(const TimeSeries& ts) {
    json j;
    j["final_rho1"] = ts.final_rho1;
    j["final_rho2"] = ts.final_rho2;
    json classes = json::array();
    for (std::size_t c = 0; c < ts.degrees.size(); ++c)
        classes.push_back({{"degree", ts.degrees[c]},
                           {"final_rho1", ts.final_rho1_k[c]},
                           {"final_rho2", ts.final_rho2_k[c]}});
    j["classes"] = classes;
    return j;
}

class Manifest {
public:
    Manifest(std::string command, const ExperimentConfig& cfg, const RunOptions& opts, const SimConfig& run)
        : start_(std::chrono::steady_clock::now()) {
        j_["tool"] = "cascadelab";
        j_["version"] = CASCADELAB_VERSION;
        j_["command"] = std::move(command);
        j_["name"] = cfg.name;
        j_["config_path"] = opts.config_path.string();
        j_["config_sha256"] = sha256_hex(opts.config_text);
        j_["seed"] = run.rng_seed;
        j_["threads"] = run.threads;
        j_["config"] = opts.config_text;
    }

    json& summary() { return j_["summary"]; }

    void finish(const std::filesystem::path& dir, CommandResult& result) {
        json files = json::array();
        for (const auto& f : result.files) files.push_back(f.filename().string());
        j_["outputs"] = files;
        j_["converged"] = result.converged;
        j_["wall_time_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const auto path = dir / "manifest.json";
        save_text(path, j_.dump(2) + "\n");
        result.files.push_back(path);
    }

private:
    json j_;
    std::chrono::steady_clock::time_point start_;
};

void save_table(CommandResult& r, const CsvTable& t, const std::string& name) {
    const auto path = r.out_dir / name;
    t.save(path);
    r.files.push_back(path);
}

void save_svg(CommandResult& r, const std::string& svg, const std::string& name) {
    const auto path = r.out_dir / name;
    save_text(path, svg);
    r.files.push_back(path);
}

std::vector<Series> aggregate_series(const TimeSeries& ts, const std::string& suffix) {
    return {{"rho1" + suffix, ts.t, ts.rho1}, {"rho2" + suffix, ts.t, ts.rho2}};
}

std::vector<Series> class_series(const TimeSeries& ts) {
    std::vector<Series> out;
    for (std::size_t c = 0; c < ts.degrees.size(); ++c) {
        out.push_back({class_label("rho1 k=", ts.degrees[c]), ts.t, ts.rho1_k[c]});
        out.push_back({class_label("rho2 k=", ts.degrees[c]), ts.t, ts.rho2_k[c]});
    }
    return out;
}

bool wants_svg(const ExperimentConfig& cfg, const RunOptions& opts) { return opts.svg || cfg.output.svg; }

Axis fallback_axis(const ExperimentConfig& cfg, Parameter taken) {
    const Parameter p = taken == Parameter::Phi2 ? Parameter::Phi1 : Parameter::Phi2;
    const double v = p == Parameter::Phi2 ? cfg.run.phi2 : cfg.run.phi1;
    return {p, v, v, 1};
}

}  // namespace

std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg, const RunOptions& opts) {
    if (opts.out_dir) return *opts.out_dir;
    if (!cfg.output.dir.empty()) return cfg.output.dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return "cascadelab_out";
}

SimConfig effective_run(const ExperimentConfig& cfg, const RunOptions& opts) {
    SimConfig run = cfg.run;
    if (opts.seed) run.rng_seed = *opts.seed;
    if (opts.threads) run.threads = *opts.threads;
    return run;
}

Graph build_graph(const NetworkConfig& net, std::uint64_t master_seed, std::size_t index, GeneratorReport* report) {
    const std::uint64_t seed = graph_seed(master_seed, index);
    switch (net.kind) {
        case NetworkKind::ErdosRenyi: return generate_er(net.mean_degree, net.nodes, seed);
        case NetworkKind::Configuration:
            return generate_config_model(DegreeDistribution::from_weights(net.degree_weights), net.nodes, seed, report);
        case NetworkKind::Correlated:
            return generate_correlated(JointDegreeDistribution::from_weights(net.joint), net.nodes, seed, report);
        case NetworkKind::EdgeList: return load_graph(net.path);
    }
    throw ConfigError("unknown network kind");
}

ModelInputs theory_inputs(const ExperimentConfig& cfg) {
    const auto& net = cfg.network;
    const double phi1 = cfg.run.phi1, phi2 = cfg.run.phi2;
    switch (net.kind) {
        case NetworkKind::ErdosRenyi:
            return ModelInputs::factorized(
                DegreeDistribution::poisson(net.mean_degree, DegreeDistribution::poisson_cutoff(net.mean_degree)),
                cfg.response, phi1, phi2);
        case NetworkKind::Configuration:
            return ModelInputs::factorized(DegreeDistribution::from_weights(net.degree_weights), cfg.response, phi1,
                                           phi2);
        case NetworkKind::Correlated:
            return ModelInputs::correlated(JointDegreeDistribution::from_weights(net.joint), cfg.response, phi1, phi2);
        case NetworkKind::EdgeList: {
            const Graph g = load_graph(net.path);
            return {joint_degree_distribution(g), degree_distribution(g), cfg.response, phi1, phi2};
        }
    }
    throw ConfigError("unknown network kind");
}

Scenario cascade_scenario(const ExperimentConfig& cfg) {
    Scenario s;
    s.response = cfg.response;
    s.phi1 = cfg.run.phi1;
    s.phi2 = cfg.run.phi2;
    switch (cfg.network.kind) {
        case NetworkKind::ErdosRenyi: s.mean_degree = cfg.network.mean_degree; break;
        case NetworkKind::Configuration: s.degrees = DegreeDistribution::from_weights(cfg.network.degree_weights); break;
        case NetworkKind::EdgeList: s.degrees = degree_distribution(load_graph(cfg.network.path)); break;
        case NetworkKind::Correlated:
            throw ConfigError("cascade analysis uses the uncorrelated reduced map; a correlated network was given");
    }
    return s;
}

TimeSeries simulate(const ExperimentConfig& cfg, const SimConfig& run) {
    const auto& net = cfg.network;
    if (net.kind == NetworkKind::EdgeList || !net.resample)
        return cascadelab::run(build_graph(net, run.rng_seed, 0), cfg.response, run);
    std::vector<std::optional<Graph>> slots(run.realizations);
    GraphSource source = [&](std::size_t r) -> const Graph& {
        // Each index is requested by one worker; index 0 may also be read first by the caller.
        if (!slots[r]) slots[r].emplace(build_graph(net, run.rng_seed, r));
        return *slots[r];
    };
    return cascadelab::run(source, cfg.response, run);
}

TimeSeries theory_series(const ExperimentConfig& cfg, bool* converged) {
    const TreeModel model(theory_inputs(cfg));
    if (converged) *converged = true;
    if (cfg.theory.method == TheoryMethod::Ode)
        return integrate_ode(model, cfg.run.t_max, cfg.theory.dt, cfg.run.grid_points);

    const std::size_t steps = cfg.theory.steps;
    const SyncResult r = iterate_sync(model, std::max<std::size_t>(steps, 100000), 1e-10, steps + 1);
    if (converged) *converged = r.converged;
    TimeSeries ts;
    ts.degrees = model.degrees();
    const std::size_t n = model.class_count();
    ts.rho1_k.assign(n, {});
    ts.rho2_k.assign(n, {});
    for (std::size_t j = 0; j <= steps; ++j) {
        const TheoryState& s = j < r.trajectory.size() ? r.trajectory[j] : r.fixpoint;
        ts.t.push_back(static_cast<double>(j));
        ts.rho1.push_back(model.aggregate(s.rho1));
        ts.rho2.push_back(model.aggregate(s.rho2));
        for (std::size_t c = 0; c < n; ++c) {
            ts.rho1_k[c].push_back(s.rho1[c]);
            ts.rho2_k[c].push_back(s.rho2[c]);
        }
    }
    ts.final_rho1 = model.aggregate(r.fixpoint.rho1);
    ts.final_rho2 = model.aggregate(r.fixpoint.rho2);
    ts.final_rho1_k = r.fixpoint.rho1;
    ts.final_rho2_k = r.fixpoint.rho2;
    return ts;
}

CsvTable series_table(const TimeSeries& ts) {
    std::vector<std::string> header{"t", "rho1", "rho2"};
    for (std::size_t k : ts.degrees) header.push_back(class_label("rho1_k", k));
    for (std::size_t k : ts.degrees) header.push_back(class_label("rho2_k", k));
    CsvTable table(header);
    for (std::size_t j = 0; j < ts.size(); ++j) {
        std::vector<std::optional<double>> row{ts.t[j], ts.rho1[j], ts.rho2[j]};
        for (const auto& v : ts.rho1_k) row.push_back(v[j]);
        for (const auto& v : ts.rho2_k) row.push_back(v[j]);
        table.add_row(row);
    }
    return table;
}

CsvTable overlay_table(const TimeSeries& sim, const TimeSeries& theory) {
    if (sim.size() != theory.size()) throw ConfigError("overlay needs simulation and theory on the same time grid");
    for (std::size_t j = 0; j < sim.size(); ++j)
        if (std::abs(sim.t[j] - theory.t[j]) > 1e-9 * std::max(1.0, std::abs(sim.t[j])))
            throw ConfigError("overlay needs simulation and theory on the same time grid");

    struct Column {
        std::string name;
        const std::vector<double>* sim;
        const std::vector<double>* theory;
    };
    std::vector<Column> cols{{"rho1", &sim.rho1, &theory.rho1}, {"rho2", &sim.rho2, &theory.rho2}};
    for (int stage = 1; stage <= 2; ++stage)
        for (std::size_t c = 0; c < sim.degrees.size(); ++c) {
            const std::size_t tc = theory.class_index(sim.degrees[c]);
            if (tc == theory.degrees.size()) continue;
            const auto& s = stage == 1 ? sim.rho1_k : sim.rho2_k;
            const auto& t = stage == 1 ? theory.rho1_k : theory.rho2_k;
            cols.push_back({class_label(stage == 1 ? "rho1_k" : "rho2_k", sim.degrees[c]), &s[c], &t[tc]});
        }
    std::vector<std::string> header{"t"};
    for (const auto& c : cols) {
        header.push_back("sim_" + c.name);
        header.push_back("theory_" + c.name);
        header.push_back("gap_" + c.name);
    }
    CsvTable table(header);
    for (std::size_t j = 0; j < sim.size(); ++j) {
        std::vector<std::optional<double>> row{sim.t[j]};
        for (const auto& c : cols) {
            row.push_back((*c.sim)[j]);
            row.push_back((*c.theory)[j]);
            row.push_back((*c.theory)[j] - (*c.sim)[j]);
        }
        table.add_row(row);
    }
    return table;
}

CommandResult cmd_generate(const ExperimentConfig& cfg, const RunOptions& opts) {
    const SimConfig run = effective_run(cfg, opts);
    Manifest manifest("generate", cfg, opts, run);
    CommandResult result{resolve_out_dir(cfg, opts), {}, true};
    GeneratorReport report;
    const Graph g = build_graph(cfg.network, run.rng_seed, 0, &report);
    std::ostringstream edges;
    save_edge_list(g, edges);
    save_text(result.out_dir / "edges.txt", edges.str());
    result.files.push_back(result.out_dir / "edges.txt");

    json& s = manifest.summary();
    s["network"] = network_kind_name(cfg.network.kind);
    s["requested_nodes"] = cfg.network.nodes;
    s["nodes"] = g.node_count();
    s["edges"] = g.edge_count();
    s["mean_degree"] = g.node_count() ? 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count()) : 0.0;
    s["parity_adjustments"] = report.parity_adjustments;
    s["defects_repaired"] = report.defects_repaired;
    s["defects_erased"] = report.defects_erased;
    if (const auto r = assortativity(g)) s["assortativity"] = *r;
    else s["assortativity"] = nullptr;
    manifest.finish(result.out_dir, result);
    return result;
}

CommandResult cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opts) {
    const SimConfig run = effective_run(cfg, opts);
    Manifest manifest("simulate", cfg, opts, run);
    CommandResult result{resolve_out_dir(cfg, opts), {}, true};
    const TimeSeries ts = simulate(cfg, run);
    save_table(result, series_table(ts), "simulation.csv");
    if (wants_svg(cfg, opts)) {
        save_svg(result, line_chart_svg(cfg.name + ": simulation", "t", "density", aggregate_series(ts, "")),
                 "simulation.svg");
        if (ts.degrees.size() <= 3)
            save_svg(result, line_chart_svg(cfg.name + ": simulation by degree", "t", "density", class_series(ts)),
                     "simulation_classes.svg");
    }
    manifest.summary() = series_summary(ts);
    manifest.summary()["realizations"] = run.realizations;
    manifest.finish(result.out_dir, result);
    return result;
}

CommandResult cmd_theory(const ExperimentConfig& cfg, const RunOptions& opts) {
    const SimConfig run = effective_run(cfg, opts);
    Manifest manifest("theory", cfg, opts, run);
    CommandResult result{resolve_out_dir(cfg, opts), {}, true};
    if (cfg.theory.overlay && cfg.theory.method != TheoryMethod::Ode)
        throw ConfigError("theory.overlay needs theory.method = ode (the simulation time grid)");
    bool converged = true;
    const TimeSeries th = theory_series(cfg, &converged);
    result.converged = converged;
    save_table(result, series_table(th), "theory.csv");
    manifest.summary() = series_summary(th);
    if (wants_svg(cfg, opts)) {
        save_svg(result, line_chart_svg(cfg.name + ": theory", "t", "density", aggregate_series(th, "")),
                 "theory.svg");
        if (th.degrees.size() <= 3)
            save_svg(result, line_chart_svg(cfg.name + ": theory by degree", "t", "density", class_series(th)),
                     "theory_classes.svg");
    }
    if (cfg.theory.overlay) {
        const TimeSeries sim = simulate(cfg, run);
        const CsvTable overlay = overlay_table(sim, th);
        save_table(result, overlay, "overlay.csv");
        json gaps = json::object();
        for (std::size_t c = 0; c < sim.degrees.size(); ++c) {
            const std::size_t tc = th.class_index(sim.degrees[c]);
            if (tc == th.degrees.size()) continue;
            double max_gap = -1.0;
            for (std::size_t j = 0; j < sim.size(); ++j) max_gap = std::max(max_gap, th.rho1_k[tc][j] - sim.rho1_k[c][j]);
            gaps[class_label("rho1_k", sim.degrees[c])] = max_gap;
        }
        manifest.summary()["max_gap"] = gaps;
        manifest.summary()["simulation"] = series_summary(sim);
        if (wants_svg(cfg, opts)) {
            auto series = aggregate_series(sim, " sim");
            for (auto& s : aggregate_series(th, " theory")) series.push_back(std::move(s));
            save_svg(result, line_chart_svg(cfg.name + ": theory vs simulation", "t", "density", series),
                     "overlay.svg");
        }
    }
    manifest.finish(result.out_dir, result);
    return result;
}

CommandResult cmd_cascade(const ExperimentConfig& cfg, const RunOptions& opts) {
    const SimConfig run = effective_run(cfg, opts);
    Manifest manifest("cascade", cfg, opts, run);
    CommandResult result{resolve_out_dir(cfg, opts), {}, true};
    const Scenario base = cascade_scenario(cfg);
    json& summary = manifest.summary();

    if (cfg.cascade.condition) {
        const auto dist = base.distribution();
        const Partials p = partials_at_zero(dist, base.response, base.phi1, base.phi2);
        const auto cond = cascade_condition(dist, base.response, base.phi1, base.phi2);
        CsvTable t({"d1g1", "d2g1", "d1g2", "d2g2", "condition", "cascade"});
        t.add_row({p.d1g1, p.d2g1, p.d1g2, p.d2g2, cond.value, cond.cascade ? 1.0 : 0.0});
        save_table(result, t, "condition.csv");
        summary["condition"] = cond.value;
        summary["cascade"] = cond.cascade;
    }

    if (cfg.cascade.x) {
        const Axis ax = *cfg.cascade.x;
        const Axis ay = cfg.cascade.y ? *cfg.cascade.y : fallback_axis(cfg, ax.param);
        const std::string nx = parameter_name(ax.param), ny = parameter_name(ay.param);
        const SweepResult sweep = sweep_diagram(base, ax, ay, run.threads);

        CsvTable t({nx, ny, "admissible", "converged", "rho1_inf", "rho2_inf", "condition"});
        std::size_t missing = 0, inadmissible = 0;
        for (const auto& c : sweep.cells) {
            const bool ok = c.admissible && c.converged;
            if (!c.admissible) ++inadmissible;
            else if (!c.converged) ++missing;
            t.add_row({c.p1, c.p2, c.admissible ? 1.0 : 0.0, c.converged ? 1.0 : 0.0,
                       ok ? std::optional<double>(c.rho1) : std::nullopt,
                       ok ? std::optional<double>(c.rho2) : std::nullopt,
                       c.admissible ? std::optional<double>(c.condition) : std::nullopt});
        }
        save_table(result, t, "sweep.csv");
        summary["sweep_cells"] = sweep.cells.size();
        summary["sweep_inadmissible"] = inadmissible;
        summary["sweep_missing"] = missing;

        // Condition boundary: sign changes along x, refined by bisection.
        const auto xs = ax.values(), ys = ay.values();
        CsvTable boundary({nx, ny});
        std::vector<Series> crossings;
        for (std::size_t iy = 0; iy < ys.size(); ++iy) {
            std::size_t order = 0;
            for (std::size_t ix = 0; ix + 1 < xs.size(); ++ix) {
                const auto& a = sweep.at(ix, iy);
                const auto& b = sweep.at(ix + 1, iy);
                if (!a.admissible || !b.admissible || (a.condition > 0.0) == (b.condition > 0.0)) continue;
                double lo = xs[ix], hi = xs[ix + 1];
                const bool lo_positive = a.condition > 0.0;
                for (int it = 0; it < 50; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    Scenario s = base;
                    s.set(ax.param, mid);
                    s.set(ay.param, ys[iy]);
                    const bool positive = cascade_condition(s.distribution(), s.response, s.phi1, s.phi2).value > 0.0;
                    (positive == lo_positive ? lo : hi) = mid;
                }
                const double x = 0.5 * (lo + hi);
                boundary.add_row({x, ys[iy]});
                if (crossings.size() <= order) crossings.push_back({"condition boundary", {}, {}});
                crossings[order].x.push_back(x);
                crossings[order].y.push_back(ys[iy]);
                ++order;
            }
        }
        save_table(result, boundary, "condition_boundary.csv");

        std::vector<Series> overlays = crossings;
        if (cfg.cascade.continuation) {
            const BoundaryCurve curve = trace_boundary(base, ax, ay);
            CsvTable c({"branch", nx, ny, "q1", "q2", "r1", "r2", "r3"});
            std::vector<Series> branches;
            for (const auto& p : curve.points) {
                c.add_row({static_cast<double>(p.branch), p.p1, p.p2, p.q[0], p.q[1], p.residual[0], p.residual[1],
                           p.residual[2]});
                if (branches.size() <= p.branch) branches.resize(p.branch + 1, {"saddle-node", {}, {}});
                branches[p.branch].x.push_back(p.p1);
                branches[p.branch].y.push_back(p.p2);
            }
            save_table(result, c, "continuation.csv");
            summary["continuation_points"] = curve.points.size();
            summary["continuation_branches"] = branches.size();
            overlays.insert(overlays.end(), branches.begin(), branches.end());
        }

        if (wants_svg(cfg, opts)) {
            for (int stage = 1; stage <= 2; ++stage) {
                Heatmap h{xs, ys, std::vector<std::vector<std::optional<double>>>(ys.size(),
                                                                                  std::vector<std::optional<double>>(xs.size()))};
                for (std::size_t iy = 0; iy < ys.size(); ++iy)
                    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
                        const auto& cell = sweep.at(ix, iy);
                        if (cell.admissible && cell.converged) h.values[iy][ix] = stage == 1 ? cell.rho1 : cell.rho2;
                    }
                const std::string name = stage == 1 ? "rho1_inf" : "rho2_inf";
                save_svg(result, heatmap_svg(cfg.name + ": " + name, nx, ny, h, overlays), "sweep_" + name + ".svg");
            }
        }
    }
    manifest.finish(result.out_dir, result);
    return result;
}

int exit_code_for(std::exception_ptr error, std::string* message) {
    auto say = [message](const char* kind, const std::exception& e) {
        if (message) *message = std::string(kind) + ": " + e.what();
    };
    try {
        std::rethrow_exception(error);
    } catch (const ConfigError& e) {
        say("config error", e);
        return kExitConfig;
    } catch (const UndefinedError& e) {
        say("config error", e);
        return kExitConfig;
    } catch (const ConstructionError& e) {
        say("config error", e);
        return kExitConfig;
    } catch (const YAML::Exception& e) {
        say("config error", e);
        return kExitConfig;
    } catch (const NumericalError& e) {
        say("numerical", e);
        return kExitNumerical;
    } catch (const IoError& e) {
        say("I/O error", e);
        return kExitIo;
    } catch (const ParseError& e) {
        say("I/O error", e);
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        say("I/O error", e);
        return kExitIo;
    } catch (const std::exception& e) {
        say("error", e);
        return kExitFailure;
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Multi-stage complex contagion experiments"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
    bool svg = false;
    std::string chosen;
    for (const char* name : {"generate", "simulate", "theory", "cascade"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config (YAML)")->required();
        sub->add_option("--seed", seed, "master seed (overrides run.seed)");
        sub->add_option("--threads", threads, "worker threads (0 = all cores)");
        sub->add_option("--out", out, std::string("output directory (default: output.dir, then $") + kOutputDirEnv + ")");
        sub->add_flag("--svg", svg, "also write SVG charts");
        sub->callback([&chosen, name] { chosen = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        RunOptions opts;
        opts.seed = seed;
        opts.threads = threads;
        if (out) opts.out_dir = *out;
        opts.svg = svg;
        opts.config_path = config_path;
        {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) throw IoError("cannot read config " + config_path);
            std::ostringstream ss;
            ss << in.rdbuf();
            opts.config_text = ss.str();
        }
        const ExperimentConfig cfg = parse_config(opts.config_text, std::filesystem::path(config_path).parent_path());
        CommandResult r;
        if (chosen == "generate") r = cmd_generate(cfg, opts);
        else if (chosen == "simulate") r = cmd_simulate(cfg, opts);
        else if (chosen == "theory") r = cmd_theory(cfg, opts);
        else r = cmd_cascade(cfg, opts);
        for (const auto& f : r.files) std::cout << f.string() << '\n';
        if (!r.converged) {
            std::cerr << "cascadelab: numerical: iteration did not converge; partial results written\n";
            return kExitNumerical;
        }
        return kExitOk;
    } catch (...) {
        std::string message;
        const int code = exit_code_for(std::current_exception(), &message);
        std::cerr << "cascadelab: " << message << '\n';
        return code;
    }
}

}  // namespace cascadelab::cli
