#pragma once

#include "netpatch/epidemic.hpp"
#include "netpatch/graph.hpp"

#include <limits>
#include <vector>

namespace netpatch {

enum class WeightFlavor { critical, flipped };

// Per-edge weights over a graph's edge set. Self-contained: carries the edge
// list so downstream construction needs no Graph reference.
struct EdgeWeights {
    WeightFlavor flavor = WeightFlavor::critical;
    double horizon = std::numeric_limits<double>::quiet_NaN();
    NodeId n = 0;
    EdgeList edges;        // canonical u < v, same order as Graph::edges
    std::vector<double> w; // parallel to edges, entries in [0,1]
};

// w_ij = xhat_i (1 - xhat_j) + (1 - xhat_i) xhat_j: probability the edge
// joins a predicted-infected node to a predicted-healthy one.
EdgeWeights critical_weights(const Graph& g, const ProbabilityVector& xhat,
                             double horizon = std::numeric_limits<double>::quiet_NaN());

// Complement weights: xhat_i xhat_j + (1 - xhat_i)(1 - xhat_j). Critical
// edges become the cheapest to cut.
EdgeWeights flipped_weights(const Graph& g, const ProbabilityVector& xhat,
                            double horizon = std::numeric_limits<double>::quiet_NaN());

// Symmetric normalized Laplacian of the flipped-weight graph, kept in
// operator form: apply() computes Lbar * v without materializing Lbar.
struct WeightedLaplacian {
    NodeId n = 0;
    EdgeList edges;                  // full edge set (zero-weight edges kept)
    std::vector<double> d;           // generalized degrees, sum of incident w
    std::vector<double> inv_sqrt_d;  // 1/sqrt(max(d, 1e-12))
    std::vector<double> diag;        // diagonal of Lbar: d_i / max(d_i, 1e-12)
    // CSR over edges with nonzero weight
    std::vector<std::int64_t> rowptr;
    std::vector<NodeId> col;
    std::vector<double> val;

    double volume() const; // sum of generalized degrees

    // out = Lbar v. scratch must have length n.
    void apply(const double* v, double* out, double* scratch) const;
};

// Requires flipped flavor; throws std::invalid_argument otherwise or when
// every weight is zero. Weights below 1e-15 are stored as exact zeros;
// zero degrees are clamped to 1e-12 inside D^{-1/2} only.
WeightedLaplacian build_laplacian(const EdgeWeights& w);

} // namespace netpatch
