#include "netpatch/cli.hpp"

#include "netpatch/epidemic.hpp"
#include "netpatch/graph.hpp"
#include "netpatch/harness.hpp"
#include "netpatch/partition.hpp"
#include "netpatch/policy.hpp"
#include "netpatch/rng.hpp"
#include "netpatch/weights.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace netpatch {

namespace {

namespace fs = std::filesystem;

std::uint64_t entropy_seed64() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Args {
    std::string graph_path;
    NodeId sbm_n = 0;
    NodeId sbm_k = 3;
    double sbm_degree = 8.0;
    double sbm_ratio = 10.0;

    double beta = 0.01;
    double T = 25.0;
    double budget = 0.2;
    double mu = 1e4;
    double horizon = 1000.0;
    NodeId sources = 0;
    std::vector<NodeId> source_ids;
    std::int32_t trials = 100;
    std::int32_t sample_points = 200;
    std::uint64_t seed = 0;
    std::vector<std::string> policies{"delayed", "reactive", "degree", "eigen"};
    std::string solver = "uzawa";
    std::string policy;
    std::string out;
    std::string svg;
    std::string csv;
    std::string config_path;
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Flat key=value config support. CLI11's own config machinery only runs for the
// top-level app, never for a subcommand-attached --config, so the file is read
// up front and each key becomes an injected --key=value token unless that flag
// is already present on the command line. Explicit flags therefore always win.
void apply_flat_config(std::vector<std::string>& tokens) {
    std::string path;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string& t = tokens[i];
        if (t == "--config") {
            if (i + 1 < tokens.size()) path = tokens[i + 1];
        } else if (t.rfind("--config=", 0) == 0) {
            path = t.substr(9);
        }
    }
    if (path.empty()) return;

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path);

    std::vector<std::pair<std::string, std::string>> items;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        while (!key.empty() && key.front() == '-') key.erase(0, 1);
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (key.find_first_of(" \t") != std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": key contains whitespace");
        if (key == "config")
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": config files cannot nest");
        bool seen = false;
        for (auto& kv : items) {
            if (kv.first == key) {
                kv.second = value;
                seen = true;
                break;
            }
        }
        if (!seen) items.emplace_back(key, value);
    }

    for (const auto& [key, value] : items) {
        const std::string flag = "--" + key;
        const std::string flag_eq = flag + "=";
        bool present = false;
        for (const std::string& t : tokens) {
            if (t == flag || t.rfind(flag_eq, 0) == 0) {
                present = true;
                break;
            }
        }
        if (!present) tokens.push_back(flag_eq + value);
    }
}

void add_graph_opts(CLI::App* sub, Args& a) {
    sub->add_option("--graph", a.graph_path, "edge list file, 'u v' per line");
    sub->add_option("--sbm-n", a.sbm_n, "SBM node count (alternative to --graph)");
    sub->add_option("--sbm-k", a.sbm_k, "SBM community count")->capture_default_str();
    sub->add_option("--sbm-degree", a.sbm_degree, "SBM expected mean degree")
        ->capture_default_str();
    sub->add_option("--sbm-ratio", a.sbm_ratio, "SBM intra/inter edge probability ratio")
        ->capture_default_str();
}

void add_source_opts(CLI::App* sub, Args& a) {
    sub->add_option("--sources", a.sources,
                    "source count; 0 applies the size rule (1 if n <= 2000 else 5)")
        ->capture_default_str();
    sub->add_option("--source-ids", a.source_ids, "explicit source nodes")
        ->delimiter(',');
}

Graph build_graph(const Args& a, std::uint64_t seed) {
    if (!a.graph_path.empty() && a.sbm_n > 0)
        throw std::invalid_argument("give either --graph or --sbm-n, not both");
    if (!a.graph_path.empty()) return load_edgelist(a.graph_path);
    if (a.sbm_n > 0)
        return generate_sbm(SbmSpec{a.sbm_n, a.sbm_k, a.sbm_degree, a.sbm_ratio, seed});
    throw std::invalid_argument("no graph source: give --graph FILE or --sbm-n N");
}

InitialCondition resolve_sources(const Graph& g, const Args& a, std::uint64_t seed) {
    if (!a.source_ids.empty()) {
        InitialCondition init;
        init.x0.assign(static_cast<std::size_t>(g.n), 0);
        for (NodeId s : a.source_ids) {
            if (s < 0 || s >= g.n)
                throw std::invalid_argument("--source-ids entry out of range");
            init.x0[s] = 1;
        }
        return init;
    }
    return choose_sources(g, a.sources, rng::mix(seed, 11));
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

PatchPlan plan_for_policy(const Graph& g, const Args& a, const InitialCondition& init,
                          const std::string& policy) {
    const Budget budget{a.budget};
    const ProbabilityVector xhat = transient_bound(g, init, EpidemicParams{a.beta, a.T});
    if (policy == "reactive") return reactive_select(g, xhat, init, budget);
    if (policy == "degree") return degree_select(g, init, budget);
    if (policy == "eigen") return eigen_select(g, init, budget);
    const ConstraintSet cons = select_constraints(g, init, xhat);
    const WeightedLaplacian lap = build_laplacian(flipped_weights(g, xhat, a.T));
    SolverOptions opts;
    opts.mu = a.mu;
    const PartitionResult part =
        a.solver == "ppm" ? ppm_solve(lap, cons, opts) : uzawa_solve(lap, cons, opts);
    return delayed_select(g, part, xhat, init, budget);
}

const CLI::App* active_scope(const CLI::App& app) {
    const CLI::App* scope = &app;
    while (true) {
        const auto subs = scope->get_subcommands();
        if (subs.empty()) return scope;
        scope = subs.front();
    }
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"delayed-patching malware control on networks", "netpatch"};
    app.require_subcommand(1);
    Args a;
    bool seed_given = false;

    auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--seed", a.seed, "RNG seed; omitted draws entropy and reports it")
            ->each([&](const std::string&) { seed_given = true; });
    };
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", a.config_path,
                        "flat key=value file mirroring the long flag names; "
                        "command-line flags override it");
    };

    auto* gen = app.add_subcommand("generate", "sample an SBM graph and write its edge list");
    add_graph_opts(gen, a);
    add_seed(gen);
    add_config(gen);
    gen->add_option("--out", a.out, "edge list output path")->required();
    gen->callback([&] {
        const std::uint64_t seed = seed_given ? a.seed : entropy_seed64();
        if (a.sbm_n <= 0) throw std::invalid_argument("generate needs --sbm-n");
        if (!a.graph_path.empty())
            throw std::invalid_argument("generate samples a graph; --graph is not accepted");
        const Graph g =
            generate_sbm(SbmSpec{a.sbm_n, a.sbm_k, a.sbm_degree, a.sbm_ratio, seed});
        auto out = open_out(a.out);
        for (const auto& [u, v] : g.edges) out << u << ' ' << v << '\n';
        out.flush();
        if (!out) throw std::runtime_error("short write to " + a.out);
        std::cout << "wrote " << a.out << ": n=" << g.n << " edges=" << g.edge_count()
                  << "\nseed: " << seed << '\n';
    });

    auto* bound = app.add_subcommand("bound", "per-node infection-probability bound at T");
    add_graph_opts(bound, a);
    add_source_opts(bound, a);
    add_seed(bound);
    add_config(bound);
    bound->add_option("--beta", a.beta, "infection rate")->capture_default_str();
    bound->add_option("--T", a.T, "evaluation time")->capture_default_str();
    bound->add_option("--out", a.out, "output CSV path (default: stdout)");
    bound->callback([&] {
        const std::uint64_t seed = seed_given ? a.seed : entropy_seed64();
        const Graph g = build_graph(a, seed);
        const InitialCondition init = resolve_sources(g, a, seed);
        const ProbabilityVector xhat =
            transient_bound(g, init, EpidemicParams{a.beta, a.T});
        const bool random_used = a.sbm_n > 0 || a.source_ids.empty();
        auto emit = [&](std::ostream& os) {
            for (NodeId i = 0; i < g.n; ++i)
                os << i << ',' << fmt17(xhat.values[i]) << '\n';
        };
        if (a.out.empty()) {
            emit(std::cout);
            if (random_used) std::cerr << "seed: " << seed << '\n';
        } else {
            auto out = open_out(a.out);
            emit(out);
            out.flush();
            if (!out) throw std::runtime_error("short write to " + a.out);
            std::cout << "wrote " << a.out << " (" << g.n << " nodes)\n";
            if (random_used) std::cout << "seed: " << seed << '\n';
        }
    });

    auto* part_cmd = app.add_subcommand("partition", "critical-boundary partition at T");
    add_graph_opts(part_cmd, a);
    add_source_opts(part_cmd, a);
    add_seed(part_cmd);
    add_config(part_cmd);
    part_cmd->add_option("--beta", a.beta, "infection rate")->capture_default_str();
    part_cmd->add_option("--T", a.T, "patching delay")->capture_default_str();
    part_cmd->add_option("--solver", a.solver, "relaxation solver")
        ->check(CLI::IsMember({"uzawa", "ppm"}))
        ->capture_default_str();
    part_cmd->add_option("--mu", a.mu, "penalty weight")->capture_default_str();
    part_cmd->add_option("--out", a.out, "output directory")->required();
    part_cmd->callback([&] {
        const std::uint64_t seed = seed_given ? a.seed : entropy_seed64();
        const Graph g = build_graph(a, seed);
        const InitialCondition init = resolve_sources(g, a, seed);
        const ProbabilityVector xhat =
            transient_bound(g, init, EpidemicParams{a.beta, a.T});
        const ConstraintSet cons = select_constraints(g, init, xhat);
        const WeightedLaplacian lap = build_laplacian(flipped_weights(g, xhat, a.T));
        SolverOptions opts;
        opts.mu = a.mu;
        const PartitionResult part =
            a.solver == "ppm" ? ppm_solve(lap, cons, opts) : uzawa_solve(lap, cons, opts);

        fs::create_directories(a.out);
        {
            auto out = open_out((fs::path(a.out) / "partition.csv").string());
            out << "node,v,side\n";
            for (NodeId i = 0; i < g.n; ++i)
                out << i << ',' << fmt17(part.v[i]) << ','
                    << static_cast<int>(part.sides[i]) << '\n';
        }
        {
            auto out = open_out((fs::path(a.out) / "cutset.csv").string());
            out << "i,j\n";
            for (const auto& [u, v] : part.cutset) out << u << ',' << v << '\n';
        }
        std::cout << "solver: " << part.solver << "\nanchors: " << cons.anchors.size()
                  << "\ncut edges: " << part.cutset.size()
                  << "\nobjective: " << fmt17(part.objective) << "\nseed: " << seed << '\n';
    });

    auto* sel = app.add_subcommand("select", "budgeted patch plan for one policy");
    add_graph_opts(sel, a);
    add_source_opts(sel, a);
    add_seed(sel);
    add_config(sel);
    sel->add_option("--beta", a.beta, "infection rate")->capture_default_str();
    sel->add_option("--T", a.T, "patching delay")->capture_default_str();
    sel->add_option("--budget", a.budget, "patchable fraction of nodes")
        ->capture_default_str();
    sel->add_option("--policy", a.policy, "selection policy")
        ->check(CLI::IsMember({"delayed", "reactive", "degree", "eigen"}))
        ->required();
    sel->add_option("--solver", a.solver, "relaxation solver (delayed policy)")
        ->check(CLI::IsMember({"uzawa", "ppm"}))
        ->capture_default_str();
    sel->add_option("--mu", a.mu, "penalty weight")->capture_default_str();
    sel->add_option("--out", a.out, "plan JSON path (default: stdout)");
    sel->callback([&] {
        const std::uint64_t seed = seed_given ? a.seed : entropy_seed64();
        const Graph g = build_graph(a, seed);
        const InitialCondition init = resolve_sources(g, a, seed);
        const PatchPlan plan = plan_for_policy(g, a, init, a.policy);
        nlohmann::ordered_json j;
        j["policy"] = plan.policy;
        j["budget_count"] = plan.budget_count;
        j["nodes"] = plan.nodes;
        j["seed"] = seed;
        if (a.out.empty()) {
            std::cout << j.dump(2) << '\n';
        } else {
            auto out = open_out(a.out);
            out << j.dump(2) << '\n';
            out.flush();
            if (!out) throw std::runtime_error("short write to " + a.out);
            std::cout << "wrote " << a.out << " (" << plan.nodes.size() << " nodes)\n";
        }
    });

    auto* sim = app.add_subcommand(
        "simulate", "one epidemic trial; with --policy, one delayed-patching trial");
    add_graph_opts(sim, a);
    add_source_opts(sim, a);
    add_seed(sim);
    add_config(sim);
    sim->add_option("--beta", a.beta, "infection rate")->capture_default_str();
    sim->add_option("--T", a.T, "patching delay (with --policy)")->capture_default_str();
    sim->add_option("--budget", a.budget, "patchable fraction (with --policy)")
        ->capture_default_str();
    sim->add_option("--horizon", a.horizon, "simulation end time")->capture_default_str();
    sim->add_option("--sample-points", a.sample_points, "time grid size (with --policy)")
        ->capture_default_str();
    sim->add_option("--policy", a.policy, "run the trial against this policy's plan")
        ->check(CLI::IsMember({"delayed", "reactive", "degree", "eigen"}));
    sim->add_option("--solver", a.solver, "relaxation solver (delayed policy)")
        ->check(CLI::IsMember({"uzawa", "ppm"}))
        ->capture_default_str();
    sim->add_option("--mu", a.mu, "penalty weight")->capture_default_str();
    sim->add_option("--out", a.out, "output CSV path (default: stdout)");
    sim->callback([&] {
        const std::uint64_t seed = seed_given ? a.seed : entropy_seed64();
        const Graph g = build_graph(a, seed);
        const InitialCondition init = resolve_sources(g, a, seed);
        const std::uint64_t epi_seed = rng::mix(seed, 13);
        std::ostringstream body;
        if (a.policy.empty()) {
            const InfectionTrace trace =
                simulate_si(g, init, EpidemicParams{a.beta, a.horizon}, epi_seed);
            body << "time,node\n";
            for (const auto& [t, node] : trace.events)
                body << fmt17(t) << ',' << node << '\n';
        } else {
            const PatchPlan plan = plan_for_policy(g, a, init, a.policy);
            const std::vector<double> grid = time_grid(a.horizon, a.sample_points);
            const TrialCounts tc = run_trial(g, init, plan, EpidemicParams{a.beta, a.horizon},
                                             a.T, epi_seed, grid);
            body << "time,infected\n";
            for (std::size_t i = 0; i < grid.size(); ++i)
                body << fmt17(grid[i]) << ',' << tc.counts[i] << '\n';
        }
        if (a.out.empty()) {
            std::cout << body.str();
            std::cerr << "seed: " << seed << '\n';
        } else {
            auto out = open_out(a.out);
            out << body.str();
            out.flush();
            if (!out) throw std::runtime_error("short write to " + a.out);
            std::cout << "wrote " << a.out << "\nseed: " << seed << '\n';
        }
    });

    auto* exp = app.add_subcommand("experiment", "full Monte Carlo policy comparison");
    add_graph_opts(exp, a);
    add_source_opts(exp, a);
    add_seed(exp);
    add_config(exp);
    exp->add_option("--beta", a.beta, "infection rate")->capture_default_str();
    exp->add_option("--T", a.T, "patching delay")->capture_default_str();
    exp->add_option("--budget", a.budget, "patchable fraction of nodes")
        ->capture_default_str();
    exp->add_option("--trials", a.trials, "Monte Carlo trials")->capture_default_str();
    exp->add_option("--horizon", a.horizon, "simulation end time")->capture_default_str();
    exp->add_option("--sample-points", a.sample_points, "time grid size")
        ->capture_default_str();
    exp->add_option("--policies", a.policies, "comma-separated policy list")
        ->delimiter(',')
        ->capture_default_str();
    exp->add_option("--solver", a.solver, "relaxation solver")
        ->check(CLI::IsMember({"uzawa", "ppm"}))
        ->capture_default_str();
    exp->add_option("--mu", a.mu, "penalty weight")->capture_default_str();
    exp->add_option("--out", a.out, "output directory")->required();
    exp->add_option("--svg", a.svg, "also render the mean curves to this SVG");
    exp->callback([&] {
        ExperimentConfig cfg;
        if (!a.graph_path.empty() && a.sbm_n > 0)
            throw std::invalid_argument("give either --graph or --sbm-n, not both");
        const std::uint64_t seed = seed_given ? a.seed : entropy_seed64();
        if (a.sbm_n > 0)
            cfg.sbm = SbmSpec{a.sbm_n, a.sbm_k, a.sbm_degree, a.sbm_ratio, seed};
        else
            cfg.graph_path = a.graph_path;
        cfg.beta = a.beta;
        cfg.patch_delay = a.T;
        cfg.budget_fraction = a.budget;
        cfg.n_sources = a.sources;
        cfg.source_ids = a.source_ids;
        cfg.trials = a.trials;
        cfg.horizon = a.horizon;
        cfg.sample_points = a.sample_points;
        cfg.seed = seed;
        cfg.seed_set = true;
        cfg.policies = a.policies;
        cfg.solver = a.solver;
        cfg.mu = a.mu;

        const TrajectoryResult res = run_experiment(cfg);
        write_results(res, a.out);
        if (!a.svg.empty()) emit_plot(res, a.svg);
        std::cout << "n=" << res.realized_n << " trials=" << cfg.trials
                  << " seed=" << res.seed_used << '\n';
        for (std::size_t p = 0; p < res.policies.size(); ++p)
            std::cout << res.policies[p]
                      << ": final mean infected = " << res.mean_infected[p].back() << '\n';
        std::cout << "wrote " << (fs::path(a.out) / "results.csv").string() << ", "
                  << (fs::path(a.out) / "results.json").string() << '\n';
        if (!a.svg.empty()) std::cout << "wrote " << a.svg << '\n';
    });

    auto* plot = app.add_subcommand("plot", "render an existing results CSV to SVG");
    plot->add_option("--csv", a.csv, "results.csv path")->required();
    plot->add_option("--svg", a.svg, "SVG output path")->required();
    add_config(plot);
    plot->callback([&] {
        const TrajectoryResult res = read_results_csv(a.csv);
        emit_plot(res, a.svg);
        std::cout << "wrote " << a.svg << '\n';
    });

    try {
        std::vector<std::string> tokens(argv + 1, argv + argc);
        apply_flat_config(tokens);
        std::vector<const char*> cargv{argv[0]};
        for (const std::string& t : tokens) cargv.push_back(t.c_str());
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp&) {
        std::cout << active_scope(app)->help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        std::cout << app.version() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << active_scope(app)->help();
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

} // namespace netpatch
