#pragma once

#include "netpatch/epidemic.hpp"
#include "netpatch/graph.hpp"
#include "netpatch/policy.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace netpatch {

struct ExperimentConfig {
    std::optional<SbmSpec> sbm; // exactly one of sbm / graph_path
    std::string graph_path;

    double beta = 0.01;
    double patch_delay = 25.0; // T: patches allocated at t=0 take effect at T
    double budget_fraction = 0.2;
    NodeId n_sources = 0;           // 0 selects the size rule: 1 if n <= 2000 else 5
    std::vector<NodeId> source_ids; // non-empty pins the sources for every trial
    std::int32_t trials = 100;
    double horizon = 1000.0;
    std::int32_t sample_points = 200;
    std::uint64_t seed = 0;
    bool seed_set = false; // false: draw from entropy, record the value
    std::vector<std::string> policies{"delayed", "reactive", "degree", "eigen"};
    std::string solver = "uzawa"; // "uzawa" | "ppm"
    double mu = 1e4;
};

struct TrialCounts {
    std::vector<NodeId> counts;  // infected count at each grid time
    NodeId immunized = 0;        // plan nodes still healthy at the delay
    NodeId patched_infected = 0; // plan nodes infected before the delay
};

// One delayed-patching trial. Plan nodes behave as ordinary susceptibles on
// [0, patch_delay); any still healthy at the delay become immune (incident
// edges deactivate). Infection times are drawn per directed edge from a hash
// of (seed, from, to), so equal seeds give the same epidemic realization to
// every plan (common random numbers).
TrialCounts run_trial(const Graph& g, const InitialCondition& init, const PatchPlan& plan,
                      const EpidemicParams& params, double patch_delay, std::uint64_t seed,
                      const std::vector<double>& grid);

// Uniform distinct sources. n_sources = 0 applies the size rule above.
InitialCondition choose_sources(const Graph& g, NodeId n_sources, std::uint64_t seed);

struct TrajectoryResult {
    std::vector<double> grid;
    std::vector<std::string> policies;
    std::vector<std::vector<double>> mean_infected; // [policy][grid point]
    std::vector<std::vector<double>> std_infected;  // [policy][grid point]
    std::vector<std::vector<double>> final_counts;  // [policy][trial]
    NodeId realized_n = 0;
    std::uint64_t seed_used = 0;
    ExperimentConfig config;
};

// Full protocol: build the graph once, then per trial draw sources, compute
// the transient bound at the patch delay, partition, select each policy's
// plan, and run all plans against the same epidemic realization. A trial
// whose prediction covers the whole graph records full infection for every
// policy.
TrajectoryResult run_experiment(const ExperimentConfig& cfg);

// results.csv (policy,time,mean_infected,std_infected) and results.json
// (config echo, seed, per-trial final counts) under out_dir.
void write_results(const TrajectoryResult& res, const std::string& out_dir);

// Rebuilds grid/means/stds from a results.csv written above.
TrajectoryResult read_results_csv(const std::string& csv_path);

// Self-contained SVG line chart, one polyline per policy.
void emit_plot(const TrajectoryResult& res, const std::string& svg_path);

void write_trace_csv(const InfectionTrace& trace, const std::string& path);

std::vector<double> time_grid(double horizon, std::int32_t sample_points);

} // namespace netpatch
