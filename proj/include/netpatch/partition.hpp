#pragma once

#include "netpatch/epidemic.hpp"
#include "netpatch/graph.hpp"
#include "netpatch/weights.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace netpatch {

// Hard-labeled anchor nodes: +1 pins the infected side, -1 the healthy side.
struct ConstraintSet {
    std::vector<std::pair<NodeId, std::int8_t>> anchors;
};

// Every node is predicted infected, so no healthy anchor can be chosen.
// Callers treat the scenario as a full infection instead of partitioning.
struct NoHealthyRegion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverOptions {
    double mu = 1e4;    // penalty weight, error scale ~ sqrt(1/mu)
    double alpha = 2.0; // spectral shift; normalized-Laplacian spectrum fits in [0,2]
    double tol = 1e-10;
    std::int32_t max_iter = 10000;
};

struct PartitionResult {
    std::vector<double> v;
    std::vector<std::int8_t> sides; // +1 infected side, -1 healthy side
    EdgeList cutset;                // edges crossing sides
    std::string solver;             // "ppm" | "uzawa"
    double objective = 0.0;         // v' Lbar v
    int perturbations = 0;          // degenerate-direction restarts (ppm only)
};

// Anchor selection: sources and their one-hop neighbors pin the infected
// side; among nodes with xhat <= 0.5, those farthest from the sources (by
// multi-source BFS) pin the healthy side. Total anchor count targets
// floor(n/10); sources are never dropped, and at least one healthy anchor is
// kept whenever a candidate exists. Throws NoHealthyRegion otherwise.
ConstraintSet select_constraints(const Graph& g, const InitialCondition& init,
                                 const ProbabilityVector& xhat);

// Projected power iteration maximizing v'(alpha I - Lbar)v over the
// intersection of the sphere |v|^2 = Vol and the anchor constraints. Throws
// std::runtime_error when Vol <= anchor count (sphere misses the affine
// subspace) or on iteration-cap exhaustion.
PartitionResult ppm_solve(const WeightedLaplacian& lap, const ConstraintSet& cons,
                          const SolverOptions& opts = SolverOptions{});

// Single penalty solve (Lbar + mu B'B) v = mu B'c via Jacobi-preconditioned
// conjugate gradients (relative residual <= opts.tol, cap 10 n iterations).
PartitionResult uzawa_solve(const WeightedLaplacian& lap, const ConstraintSet& cons,
                            const SolverOptions& opts = SolverOptions{});

EdgeList extract_cutset(const Graph& g, const std::vector<std::int8_t>& sides);

// Cut(U, U^c)/Vol(U) + Cut(U, U^c)/Vol(U^c) with Vol = generalized degree
// sum over the side. Throws std::invalid_argument on a zero-volume side.
double ncut_value(const EdgeWeights& w, const std::vector<std::int8_t>& sides);

} // namespace netpatch
