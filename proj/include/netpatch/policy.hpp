#pragma once

#include "netpatch/epidemic.hpp"
#include "netpatch/graph.hpp"
#include "netpatch/partition.hpp"

#include <string>
#include <vector>

namespace netpatch {

// Patch budget as a fraction of the node count.
struct Budget {
    double fraction = 0.2;

    // floor(fraction * n); throws std::invalid_argument when the fraction is
    // outside (0,1] or the count comes out below one node.
    NodeId count_for(NodeId n) const;
};

struct PatchPlan {
    std::string policy;
    NodeId budget_count = 0;
    std::vector<NodeId> nodes; // selection order, no duplicates, no sources
};

// Greedy cut-clearing selection: repeatedly patch the highest-degree healthy
// endpoint of the remaining cut edges, then spend leftover budget on one-hop
// neighbors of the selected set (descending degree, recomputed per round).
// An empty cut-set falls back to the reactive ordering; the plan's policy
// tag records the fallback.
PatchPlan delayed_select(const Graph& g, const PartitionResult& part,
                         const ProbabilityVector& xhat, const InitialCondition& init,
                         Budget budget);

// Top nodes by predicted infection probability, sources excluded.
PatchPlan reactive_select(const Graph& g, const ProbabilityVector& xhat,
                          const InitialCondition& init, Budget budget);

// Top nodes by unweighted degree, sources excluded.
PatchPlan degree_select(const Graph& g, const InitialCondition& init, Budget budget);

// Top nodes by eigenvector centrality, sources excluded. The first form
// computes the centrality internally; the second reuses a precomputed score
// vector (the scores do not depend on the sources).
PatchPlan eigen_select(const Graph& g, const InitialCondition& init, Budget budget);
PatchPlan eigen_select(const Graph& g, const std::vector<double>& centrality,
                       const InitialCondition& init, Budget budget);

} // namespace netpatch
