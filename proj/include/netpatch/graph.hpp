#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace netpatch {

using NodeId = std::int32_t;
using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

// Immutable undirected simple graph. CSR adjacency plus a canonical edge list
// (u < v, sorted). Node ids are contiguous 0..n-1.
struct Graph {
    NodeId n = 0;
    std::vector<std::int64_t> rowptr;  // size n+1
    std::vector<NodeId> col;           // size 2|E|, ascending within each row
    EdgeList edges;

    std::int64_t edge_count() const { return static_cast<std::int64_t>(edges.size()); }
    NodeId degree(NodeId u) const {
        return static_cast<NodeId>(rowptr[static_cast<std::size_t>(u) + 1] - rowptr[u]);
    }
    const NodeId* neighbors_begin(NodeId u) const { return col.data() + rowptr[u]; }
    const NodeId* neighbors_end(NodeId u) const {
        return col.data() + rowptr[static_cast<std::size_t>(u) + 1];
    }
    bool has_edge(NodeId u, NodeId v) const;
};

// Canonicalizes: drops self-loops, dedupes (u,v)/(v,u), sorts. Node ids must
// already be in 0..n-1.
Graph build_graph(NodeId n, EdgeList edges);

struct SbmSpec {
    NodeId n = 0;
    NodeId k = 1;
    double avg_degree = 8.0;
    double in_out_ratio = 10.0;
    std::uint64_t seed = 0;
};

// Parses "u v" lines (whitespace separated, '#' comments). Relabels nodes to
// 0..n-1 in order of first appearance. Throws std::runtime_error on an
// unreadable file, a non-integer token (with line number), or an empty edge
// set.
Graph load_edgelist(const std::string& path);

// Samples a k-block stochastic block model and returns its largest connected
// component relabeled to 0..m-1. Block sizes are near-equal (first n mod k
// blocks get one extra node). p_in is solved so the expected mean degree of
// the full sample equals avg_degree, with p_out = p_in / in_out_ratio.
// Throws std::invalid_argument when that requires p_in > 1 or the spec is
// malformed. blocks_out, when given, receives the planted block id of each
// retained node.
Graph generate_sbm(const SbmSpec& spec, std::vector<NodeId>* blocks_out = nullptr);

// Distance sentinel for nodes unreachable from every source.
inline constexpr NodeId kUnreachable = -1;

// Hop distance to the nearest source; kUnreachable where no path exists.
std::vector<NodeId> multi_source_bfs(const Graph& g, const std::vector<NodeId>& sources);

// Dominant adjacency eigenvector: nonnegative, unit Euclidean norm. Power
// iteration from the all-ones vector, max-norm tolerance, 10000-iteration
// cap; throws std::runtime_error on non-convergence.
std::vector<double> eigenvector_centrality(const Graph& g, double tol = 1e-10);

std::vector<NodeId> degrees(const Graph& g);

} // namespace netpatch
