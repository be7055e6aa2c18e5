#include "netpatch/policy.hpp"

#include <algorithm>
#include <stdexcept>

namespace netpatch {

NodeId Budget::count_for(NodeId n) const {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("budget fraction must lie in (0,1]");
    const NodeId count = static_cast<NodeId>(fraction * n);
    if (count < 1) throw std::invalid_argument("budget admits fewer than one node");
    return count;
}

namespace {

std::vector<std::uint8_t> source_mask(const Graph& g, const InitialCondition& init) {
    if (static_cast<NodeId>(init.x0.size()) != g.n)
        throw std::invalid_argument("initial condition length does not match node count");
    std::vector<std::uint8_t> mask(init.x0.begin(), init.x0.end());
    for (std::uint8_t b : mask)
        if (b > 1) throw std::invalid_argument("non-binary initial condition");
    return mask;
}

// Non-source nodes ranked by descending score, ties by ascending id.
PatchPlan ranked_plan(const Graph& g, const std::vector<double>& score,
                      const std::vector<std::uint8_t>& is_source, NodeId count,
                      std::string tag) {
    std::vector<NodeId> order;
    order.reserve(static_cast<std::size_t>(g.n));
    for (NodeId i = 0; i < g.n; ++i)
        if (!is_source[i]) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&score](NodeId a, NodeId b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });
    if (static_cast<std::size_t>(count) < order.size()) order.resize(count);

    PatchPlan plan;
    plan.policy = std::move(tag);
    plan.budget_count = count;
    plan.nodes = std::move(order);
    return plan;
}

} // namespace

PatchPlan reactive_select(const Graph& g, const ProbabilityVector& xhat,
                          const InitialCondition& init, Budget budget) {
    if (static_cast<NodeId>(xhat.values.size()) != g.n)
        throw std::invalid_argument("probability vector length does not match node count");
    return ranked_plan(g, xhat.values, source_mask(g, init), budget.count_for(g.n),
                       "reactive");
}

PatchPlan degree_select(const Graph& g, const InitialCondition& init, Budget budget) {
    std::vector<double> score(static_cast<std::size_t>(g.n));
    for (NodeId i = 0; i < g.n; ++i) score[i] = g.degree(i);
    return ranked_plan(g, score, source_mask(g, init), budget.count_for(g.n), "degree");
}

PatchPlan eigen_select(const Graph& g, const InitialCondition& init, Budget budget) {
    return eigen_select(g, eigenvector_centrality(g), init, budget);
}

PatchPlan eigen_select(const Graph& g, const std::vector<double>& centrality,
                       const InitialCondition& init, Budget budget) {
    if (static_cast<NodeId>(centrality.size()) != g.n)
        throw std::invalid_argument("centrality vector length does not match node count");
    return ranked_plan(g, centrality, source_mask(g, init), budget.count_for(g.n), "eigen");
}

PatchPlan delayed_select(const Graph& g, const PartitionResult& part,
                         const ProbabilityVector& xhat, const InitialCondition& init,
                         Budget budget) {
    if (static_cast<NodeId>(part.sides.size()) != g.n)
        throw std::invalid_argument("partition side labels do not cover all nodes");
    if (static_cast<NodeId>(xhat.values.size()) != g.n)
        throw std::invalid_argument("probability vector length does not match node count");
    const NodeId count = budget.count_for(g.n);
    const std::vector<std::uint8_t> is_source = source_mask(g, init);

    // Healthy endpoints of the cut edges. A source on the healthy side would
    // be uncoverable, so its edges are dropped up front (anchoring normally
    // rules this out).
    struct CutEdge {
        NodeId healthy;
        bool alive;
    };
    std::vector<CutEdge> cut;
    for (const auto& [u, v] : part.cutset) {
        const NodeId h = part.sides[u] < 0 ? u : v;
        if (part.sides[u] == part.sides[v])
            throw std::invalid_argument("cut-set edge does not cross sides");
        if (!is_source[h]) cut.push_back({h, true});
    }

    if (cut.empty()) {
        PatchPlan plan =
            ranked_plan(g, xhat.values, is_source, count, "delayed:reactive-fallback");
        return plan;
    }

    PatchPlan plan;
    plan.policy = "delayed";
    plan.budget_count = count;
    std::vector<std::uint8_t> selected(static_cast<std::size_t>(g.n), 0);

    std::size_t alive = cut.size();
    while (alive > 0 && static_cast<NodeId>(plan.nodes.size()) < count) {
        NodeId best = -1;
        for (const CutEdge& e : cut) {
            if (!e.alive) continue;
            if (best < 0 || g.degree(e.healthy) > g.degree(best) ||
                (g.degree(e.healthy) == g.degree(best) && e.healthy < best))
                best = e.healthy;
        }
        selected[best] = 1;
        plan.nodes.push_back(best);
        for (CutEdge& e : cut)
            if (e.alive && e.healthy == best) {
                e.alive = false;
                --alive;
            }
    }

    // Expansion: spend whatever budget is left on one-hop neighbors of the
    // selected set, highest degree first, pool recomputed per round.
    while (static_cast<NodeId>(plan.nodes.size()) < count) {
        std::vector<NodeId> pool;
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.n), 0);
        for (NodeId s : plan.nodes)
            for (const NodeId* p = g.neighbors_begin(s); p != g.neighbors_end(s); ++p)
                if (!selected[*p] && !is_source[*p] && !seen[*p]) {
                    seen[*p] = 1;
                    pool.push_back(*p);
                }
        if (pool.empty()) break;
        std::sort(pool.begin(), pool.end(), [&g](NodeId a, NodeId b) {
            if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
            return a < b;
        });
        for (NodeId cand : pool) {
            if (static_cast<NodeId>(plan.nodes.size()) >= count) break;
            selected[cand] = 1;
            plan.nodes.push_back(cand);
        }
    }
    return plan;
}

} // namespace netpatch
