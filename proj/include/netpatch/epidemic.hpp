#pragma once

#include "netpatch/graph.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace netpatch {

// Binary initial state: 1 = infected source, 0 = susceptible.
struct InitialCondition {
    std::vector<std::uint8_t> x0;
};

struct ProbabilityVector {
    std::vector<double> values;
};

struct EpidemicParams {
    double beta = 0.01;
    double horizon = 0.0;
};

// Sample path of the SI process: time-ordered infection events.
struct InfectionTrace {
    InitialCondition initial;
    std::vector<std::pair<double, NodeId>> events;
};

// Exact continuous-time SI simulation (next-reaction form: one lazily
// realized exponential clock per infected->susceptible edge). Deterministic
// in (g, init, params, seed).
InfectionTrace simulate_si(const Graph& g, const InitialCondition& init,
                           const EpidemicParams& params, std::uint64_t seed);

// RK4 integration of dx_i/dt = beta (1 - x_i) sum_j a_ij x_j up to
// params.horizon. dt <= 0 selects the default step 0.01/beta. Entries are
// clamped to [0,1].
ProbabilityVector solve_si_mean_field(const Graph& g, const InitialCondition& init,
                                      const EpidemicParams& params, double dt = 0.0);

// exp(beta t A) x0 by substepped truncated Taylor series. A loose bound:
// entries may exceed 1 and are not clamped.
std::vector<double> linear_bound(const Graph& g, const InitialCondition& init,
                                 const EpidemicParams& params);

// Transient infection-probability upper bound at t = params.horizon. Source
// entries are exactly 1; no log of zero is ever taken. Series truncation at
// incremental max-norm < tol with a hard cap of 200 terms.
ProbabilityVector transient_bound(const Graph& g, const InitialCondition& init,
                                  const EpidemicParams& params, double tol = 1e-12);

} // namespace netpatch
