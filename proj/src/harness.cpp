#include "netpatch/harness.hpp"

#include "netpatch/partition.hpp"
#include "netpatch/rng.hpp"
#include "netpatch/weights.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace netpatch {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::vector<double> time_grid(double horizon, std::int32_t sample_points) {
    if (sample_points < 2) throw std::invalid_argument("need at least two sample points");
    if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be nonnegative");
    std::vector<double> grid(static_cast<std::size_t>(sample_points));
    for (std::int32_t i = 0; i < sample_points; ++i)
        grid[i] = horizon * static_cast<double>(i) / (sample_points - 1);
    return grid;
}

TrialCounts run_trial(const Graph& g, const InitialCondition& init, const PatchPlan& plan,
                      const EpidemicParams& params, double patch_delay, std::uint64_t seed,
                      const std::vector<double>& grid) {
    if (static_cast<NodeId>(init.x0.size()) != g.n)
        throw std::invalid_argument("initial condition length does not match node count");
    if (!(params.beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(patch_delay >= 0.0 && patch_delay <= params.horizon))
        throw std::invalid_argument("patch delay must lie in [0, horizon]");
    if (grid.empty()) throw std::invalid_argument("empty sample grid");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (grid[i] > grid[i + 1]) throw std::invalid_argument("sample grid must be sorted");
    if (grid.back() > params.horizon)
        throw std::invalid_argument("sample grid extends past the horizon");

    const std::size_t n = static_cast<std::size_t>(g.n);
    std::vector<std::uint8_t> in_plan(n, 0);
    for (NodeId p : plan.nodes) {
        if (p < 0 || p >= g.n) throw std::invalid_argument("plan node out of range");
        if (init.x0[p]) throw std::invalid_argument("plan contains an infection source");
        if (in_plan[p]) throw std::invalid_argument("plan contains a duplicate node");
        in_plan[p] = 1;
    }

    // First-passage percolation form of the SI process: each directed edge
    // carries an independent Exp(beta) delay keyed by (seed, from, to), and a
    // node's infection time is its shortest-path distance from the sources.
    // A plan node whose tentative infection time lands at or past the delay
    // is immune: it is removed before the infection reaches it.
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<std::uint8_t> settled(n, 0);
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (NodeId i = 0; i < g.n; ++i)
        if (init.x0[i]) {
            if (init.x0[i] > 1) throw std::invalid_argument("non-binary initial condition");
            dist[i] = 0.0;
            heap.emplace(0.0, i);
        }

    TrialCounts out;
    std::vector<double> times;
    times.reserve(n);
    while (!heap.empty()) {
        auto [t, u] = heap.top();
        heap.pop();
        if (settled[u]) continue;
        settled[u] = 1;
        if (t > params.horizon) break;
        if (in_plan[u] && t >= patch_delay) continue;
        if (in_plan[u]) ++out.patched_infected;
        times.push_back(t);
        for (const NodeId* p = g.neighbors_begin(u); p != g.neighbors_end(u); ++p) {
            if (settled[*p]) continue;
            rng::Stream edge(rng::mix(seed, static_cast<std::uint64_t>(u),
                                      static_cast<std::uint64_t>(*p)));
            const double cand = t + edge.exponential(params.beta);
            if (cand < dist[*p]) {
                dist[*p] = cand;
                heap.emplace(cand, *p);
            }
        }
    }
    // Every plan node is either infected before the delay or immune: anything
    // unsettled when the sweep passes the horizon has infection time beyond
    // the horizon, hence beyond the delay.
    out.immunized = static_cast<NodeId>(plan.nodes.size()) - out.patched_infected;

    out.counts.resize(grid.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        while (k < times.size() && times[k] <= grid[i]) ++k;
        out.counts[i] = static_cast<NodeId>(k);
    }
    return out;
}

InitialCondition choose_sources(const Graph& g, NodeId n_sources, std::uint64_t seed) {
    if (n_sources < 0) throw std::invalid_argument("negative source count");
    NodeId count = n_sources;
    if (count == 0) count = g.n <= 2000 ? 1 : 5;
    if (count >= g.n)
        throw std::invalid_argument("source count must be below the node count");

    rng::Stream rs(seed);
    std::vector<NodeId> perm(static_cast<std::size_t>(g.n));
    for (NodeId i = 0; i < g.n; ++i) perm[i] = i;
    InitialCondition init;
    init.x0.assign(static_cast<std::size_t>(g.n), 0);
    for (NodeId i = 0; i < count; ++i) {
        const std::uint64_t j = i + rs.next_below(static_cast<std::uint64_t>(g.n - i));
        std::swap(perm[i], perm[j]);
        init.x0[perm[i]] = 1;
    }
    return init;
}

namespace {

const std::set<std::string> kPolicyNames = {"delayed", "reactive", "degree", "eigen"};

Graph resolve_graph(const ExperimentConfig& cfg) {
    if (cfg.sbm && !cfg.graph_path.empty())
        throw std::invalid_argument("give either an SBM spec or a graph path, not both");
    if (cfg.sbm) return generate_sbm(*cfg.sbm);
    if (!cfg.graph_path.empty()) return load_edgelist(cfg.graph_path);
    throw std::invalid_argument("no graph source configured");
}

std::uint64_t entropy_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

InitialCondition pinned_sources(const Graph& g, const std::vector<NodeId>& ids) {
    InitialCondition init;
    init.x0.assign(static_cast<std::size_t>(g.n), 0);
    for (NodeId s : ids) {
        if (s < 0 || s >= g.n) throw std::invalid_argument("source id out of range");
        if (init.x0[s]) throw std::invalid_argument("duplicate source id");
        init.x0[s] = 1;
    }
    if (ids.empty() || ids.size() >= static_cast<std::size_t>(g.n))
        throw std::invalid_argument("source ids must name between 1 and n-1 nodes");
    return init;
}

} // namespace

TrajectoryResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("need at least one trial");
    if (!(cfg.horizon >= cfg.patch_delay && cfg.patch_delay >= 0.0))
        throw std::invalid_argument("need horizon >= patch delay >= 0");
    if (cfg.policies.empty()) throw std::invalid_argument("no policies configured");
    for (const auto& p : cfg.policies)
        if (!kPolicyNames.count(p))
            throw std::invalid_argument("unknown policy: " + p);
    if (std::set<std::string>(cfg.policies.begin(), cfg.policies.end()).size() !=
        cfg.policies.size())
        throw std::invalid_argument("duplicate policy name");
    if (cfg.solver != "uzawa" && cfg.solver != "ppm")
        throw std::invalid_argument("unknown solver: " + cfg.solver);

    const Graph g = resolve_graph(cfg);
    const std::vector<double> grid = time_grid(cfg.horizon, cfg.sample_points);
    const std::uint64_t seed = cfg.seed_set ? cfg.seed : entropy_seed();
    const Budget budget{cfg.budget_fraction};
    const EpidemicParams run_params{cfg.beta, cfg.horizon};
    const EpidemicParams bound_params{cfg.beta, cfg.patch_delay};
    SolverOptions solver_opts;
    solver_opts.mu = cfg.mu;

    const bool wants_delayed =
        std::find(cfg.policies.begin(), cfg.policies.end(), "delayed") != cfg.policies.end();
    const bool wants_eigen =
        std::find(cfg.policies.begin(), cfg.policies.end(), "eigen") != cfg.policies.end();
    std::vector<double> centrality;
    if (wants_eigen) centrality = eigenvector_centrality(g);

    const std::size_t np = cfg.policies.size();
    const std::size_t ng = grid.size();
    std::vector<std::vector<double>> mean(np, std::vector<double>(ng, 0.0));
    std::vector<std::vector<double>> m2(np, std::vector<double>(ng, 0.0));
    std::vector<std::vector<double>> finals(np);
    for (auto& f : finals) f.reserve(static_cast<std::size_t>(cfg.trials));

    for (std::int32_t trial = 0; trial < cfg.trials; ++trial) {
        const std::uint64_t trial_seed = rng::mix(seed, static_cast<std::uint64_t>(trial));
        try {
            const InitialCondition init =
                cfg.source_ids.empty()
                    ? choose_sources(g, cfg.n_sources, rng::mix(trial_seed, 1))
                    : pinned_sources(g, cfg.source_ids);
            const std::uint64_t epi_seed = rng::mix(trial_seed, 2);
            const ProbabilityVector xhat = transient_bound(g, init, bound_params);

            bool covered = false;
            PatchPlan delayed_plan;
            if (wants_delayed) {
                try {
                    const ConstraintSet cons = select_constraints(g, init, xhat);
                    const EdgeWeights wbar = flipped_weights(g, xhat, cfg.patch_delay);
                    const WeightedLaplacian lap = build_laplacian(wbar);
                    const PartitionResult part =
                        cfg.solver == "ppm" ? ppm_solve(lap, cons, solver_opts)
                                            : uzawa_solve(lap, cons, solver_opts);
                    delayed_plan = delayed_select(g, part, xhat, init, budget);
                } catch (const NoHealthyRegion&) {
                    covered = true;
                }
            }

            for (std::size_t p = 0; p < np; ++p) {
                std::vector<double> series(ng);
                if (covered) {
                    // Prediction says the infection reaches everyone before
                    // any patch lands; score the trial as a full infection.
                    std::fill(series.begin(), series.end(), static_cast<double>(g.n));
                } else {
                    const std::string& name = cfg.policies[p];
                    PatchPlan plan;
                    if (name == "delayed") plan = delayed_plan;
                    else if (name == "reactive") plan = reactive_select(g, xhat, init, budget);
                    else if (name == "degree") plan = degree_select(g, init, budget);
                    else plan = eigen_select(g, centrality, init, budget);
                    const TrialCounts tc =
                        run_trial(g, init, plan, run_params, cfg.patch_delay, epi_seed, grid);
                    for (std::size_t i = 0; i < ng; ++i) series[i] = tc.counts[i];
                }
                for (std::size_t i = 0; i < ng; ++i) {
                    const double delta = series[i] - mean[p][i];
                    mean[p][i] += delta / (trial + 1);
                    m2[p][i] += delta * (series[i] - mean[p][i]);
                }
                finals[p].push_back(series.back());
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("trial " + std::to_string(trial) + ": " + e.what());
        }
    }

    TrajectoryResult res;
    res.grid = grid;
    res.policies = cfg.policies;
    res.mean_infected = std::move(mean);
    res.std_infected.assign(np, std::vector<double>(ng, 0.0));
    for (std::size_t p = 0; p < np; ++p)
        for (std::size_t i = 0; i < ng; ++i)
            res.std_infected[p][i] =
                cfg.trials > 1 ? std::sqrt(m2[p][i] / (cfg.trials - 1)) : 0.0;
    res.final_counts = std::move(finals);
    res.realized_n = g.n;
    res.seed_used = seed;
    res.config = cfg;
    res.config.seed = seed;
    res.config.seed_set = true;
    return res;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ordered_json config_json(const ExperimentConfig& cfg) {
    ordered_json j;
    if (cfg.sbm) {
        j["graph"] = {{"sbm_n", cfg.sbm->n},
                      {"sbm_k", cfg.sbm->k},
                      {"sbm_degree", cfg.sbm->avg_degree},
                      {"sbm_ratio", cfg.sbm->in_out_ratio},
                      {"sbm_seed", cfg.sbm->seed}};
    } else {
        j["graph"] = {{"path", cfg.graph_path}};
    }
    j["beta"] = cfg.beta;
    j["T"] = cfg.patch_delay;
    j["budget"] = cfg.budget_fraction;
    j["sources"] = cfg.n_sources;
    j["source_ids"] = cfg.source_ids;
    j["trials"] = cfg.trials;
    j["horizon"] = cfg.horizon;
    j["sample_points"] = cfg.sample_points;
    j["policies"] = cfg.policies;
    j["solver"] = cfg.solver;
    j["mu"] = cfg.mu;
    j["seed"] = cfg.seed;
    return j;
}

} // namespace

void write_results(const TrajectoryResult& res, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const fs::path csv_path = fs::path(out_dir) / "results.csv";
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
    csv << "policy,time,mean_infected,std_infected\n";
    for (std::size_t p = 0; p < res.policies.size(); ++p)
        for (std::size_t i = 0; i < res.grid.size(); ++i)
            csv << res.policies[p] << ',' << fmt_double(res.grid[i]) << ','
                << fmt_double(res.mean_infected[p][i]) << ','
                << fmt_double(res.std_infected[p][i]) << '\n';
    csv.flush();
    if (!csv) throw std::runtime_error("short write to " + csv_path.string());

    ordered_json j;
    j["config"] = config_json(res.config);
    j["seed"] = res.seed_used;
    j["realized_n"] = res.realized_n;
    ordered_json fc;
    for (std::size_t p = 0; p < res.policies.size(); ++p)
        fc[res.policies[p]] = res.final_counts[p];
    j["final_counts"] = fc;

    const fs::path json_path = fs::path(out_dir) / "results.json";
    std::ofstream js(json_path);
    if (!js) throw std::runtime_error("cannot write " + json_path.string());
    js << j.dump(2) << '\n';
    js.flush();
    if (!js) throw std::runtime_error("short write to " + json_path.string());
}

namespace {

double parse_double_field(const std::string& s, const std::string& csv_path,
                          std::size_t row) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(csv_path + ": bad number '" + s + "' in row " +
                                 std::to_string(row));
    }
}

} // namespace

TrajectoryResult read_results_csv(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot read " + csv_path);
    std::string line;
    if (!std::getline(in, line) || line != "policy,time,mean_infected,std_infected")
        throw std::runtime_error("unrecognized results header in " + csv_path);

    TrajectoryResult res;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string policy, t, m, s;
        if (!std::getline(ls, policy, ',') || !std::getline(ls, t, ',') ||
            !std::getline(ls, m, ',') || !std::getline(ls, s, ','))
            throw std::runtime_error(csv_path + ": malformed row " + std::to_string(row));
        if (res.policies.empty() || res.policies.back() != policy) {
            if (std::find(res.policies.begin(), res.policies.end(), policy) !=
                res.policies.end())
                throw std::runtime_error(csv_path + ": policy blocks interleaved");
            res.policies.push_back(policy);
            res.mean_infected.emplace_back();
            res.std_infected.emplace_back();
        }
        const double tv = parse_double_field(t, csv_path, row);
        if (res.policies.size() == 1) {
            res.grid.push_back(tv);
        } else {
            const std::size_t i = res.mean_infected.back().size();
            if (i >= res.grid.size() || res.grid[i] != tv)
                throw std::runtime_error(csv_path + ": inconsistent time grid");
        }
        res.mean_infected.back().push_back(parse_double_field(m, csv_path, row));
        res.std_infected.back().push_back(parse_double_field(s, csv_path, row));
    }
    if (res.policies.empty()) throw std::runtime_error(csv_path + ": no data rows");
    for (const auto& v : res.mean_infected)
        if (v.size() != res.grid.size())
            throw std::runtime_error(csv_path + ": ragged policy blocks");
    return res;
}

void write_trace_csv(const InfectionTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "time,node\n";
    for (const auto& [t, node] : trace.events)
        out << fmt_double(t) << ',' << node << '\n';
    out.flush();
    if (!out) throw std::runtime_error("short write to " + path);
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

void emit_plot(const TrajectoryResult& res, const std::string& svg_path) {
    if (res.policies.empty())
        throw std::invalid_argument("emit_plot: no policies to draw");
    if (res.grid.size() < 2)
        throw std::invalid_argument("emit_plot: need at least two grid points");
    for (const auto& m : res.mean_infected)
        if (m.size() != res.grid.size())
            throw std::invalid_argument("emit_plot: series length mismatch");

    const double W = 860, H = 520, ml = 70, mr = 180, mt = 30, mb = 55;
    const double pw = W - ml - mr, ph = H - mt - mb;
    const double x0 = res.grid.front(), x1 = res.grid.back();
    const double xspan = x1 > x0 ? x1 - x0 : 1.0;
    double ymax = 1.0;
    for (const auto& m : res.mean_infected)
        for (double v : m) ymax = std::max(ymax, v);

    auto px = [&](double t) { return ml + pw * (t - x0) / xspan; };
    auto py = [&](double v) { return mt + ph * (1.0 - v / ymax); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };
    auto tick_label = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
    };

    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                     "#9467bd", "#ff7f0e", "#8c564b"};
    constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

    std::ofstream out(svg_path);
    if (!out) throw std::runtime_error("cannot write " + svg_path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt + ph) << "\" x2=\""
        << num(ml + pw) << "\" y2=\"" << num(mt + ph)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(ml)
        << "\" y2=\"" << num(mt + ph) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double t = x0 + xspan * i / 4.0;
        const double v = ymax * i / 4.0;
        out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(mt + ph) << "\" x2=\""
            << num(px(t)) << "\" y2=\"" << num(mt + ph + 5)
            << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << num(px(t)) << "\" y=\"" << num(mt + ph + 20)
            << "\" font-size=\"12\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
        out << "<line x1=\"" << num(ml - 5) << "\" y1=\"" << num(py(v)) << "\" x2=\""
            << num(ml) << "\" y2=\"" << num(py(v))
            << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << num(ml - 9) << "\" y=\"" << num(py(v) + 4)
            << "\" font-size=\"12\" text-anchor=\"end\">" << tick_label(v) << "</text>\n";
    }
    out << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(H - 12)
        << "\" font-size=\"13\" text-anchor=\"middle\">time</text>\n";
    out << "<text x=\"16\" y=\"" << num(mt + ph / 2)
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << num(mt + ph / 2) << ")\">mean infected</text>\n";

    for (std::size_t p = 0; p < res.policies.size(); ++p) {
        const char* color = kPalette[p % kPaletteSize];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t i = 0; i < res.grid.size(); ++i)
            out << num(px(res.grid[i])) << ',' << num(py(res.mean_infected[p][i])) << ' ';
        out << "\"/>\n";
        const double ly = mt + 18 + 22 * static_cast<double>(p);
        out << "<line x1=\"" << num(W - mr + 14) << "\" y1=\"" << num(ly) << "\" x2=\""
            << num(W - mr + 44) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2.5\"/>\n";
        out << "<text x=\"" << num(W - mr + 52) << "\" y=\"" << num(ly + 4)
            << "\" font-size=\"13\">" << xml_escape(res.policies[p]) << "</text>\n";
    }
    out << "</svg>\n";
    out.flush();
    if (!out) throw std::runtime_error("short write to " + svg_path);
}

} // namespace netpatch
