#include "netpatch/epidemic.hpp"

#include "netpatch/kernels.hpp"
#include "netpatch/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace netpatch {

namespace {

void check_init(const Graph& g, const InitialCondition& init) {
    if (static_cast<NodeId>(init.x0.size()) != g.n)
        throw std::invalid_argument("initial condition length does not match node count");
}

void check_binary(const InitialCondition& init) {
    for (std::uint8_t b : init.x0)
        if (b > 1) throw std::invalid_argument("non-binary initial condition");
}

void check_params(const EpidemicParams& p) {
    if (!(p.beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(p.horizon >= 0.0)) throw std::invalid_argument("horizon must be nonnegative");
}

} // namespace

InfectionTrace simulate_si(const Graph& g, const InitialCondition& init,
                           const EpidemicParams& params, std::uint64_t seed) {
    check_init(g, init);
    check_binary(init);
    check_params(params);

    rng::Stream rs(seed);
    std::vector<std::uint8_t> infected(init.x0);
    using Event = std::pair<double, NodeId>;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> heap;

    auto arm_clocks = [&](NodeId u, double t) {
        for (const NodeId* p = g.neighbors_begin(u); p != g.neighbors_end(u); ++p)
            if (!infected[*p]) heap.emplace(t + rs.exponential(params.beta), *p);
    };

    InfectionTrace trace;
    trace.initial = init;
    for (NodeId u = 0; u < g.n; ++u)
        if (infected[u]) arm_clocks(u, 0.0);

    double last = 0.0;
    while (!heap.empty()) {
        auto [t, v] = heap.top();
        heap.pop();
        if (t > params.horizon) break;
        if (infected[v]) continue;
        if (t <= last) t = std::nextafter(last, std::numeric_limits<double>::infinity());
        infected[v] = 1;
        trace.events.emplace_back(t, v);
        last = t;
        arm_clocks(v, t);
    }
    return trace;
}

ProbabilityVector solve_si_mean_field(const Graph& g, const InitialCondition& init,
                                      const EpidemicParams& params, double dt) {
    check_init(g, init);
    check_binary(init);
    check_params(params);
    if (dt <= 0.0) dt = 0.01 / params.beta;

    const auto& k = kern::ops();
    const std::size_t n = static_cast<std::size_t>(g.n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = init.x0[i];

    std::vector<double> ax(n), k1(n), k2(n), k3(n), k4(n), tmp(n);
    auto deriv = [&](const std::vector<double>& state, std::vector<double>& out) {
        k.spmv_unit(g.rowptr.data(), g.col.data(), state.data(), ax.data(), g.n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = params.beta * (1.0 - state[i]) * ax[i];
    };

    double t = 0.0;
    while (t < params.horizon) {
        const double h = std::min(dt, params.horizon - t);
        deriv(x, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
        deriv(tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
        deriv(tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
        deriv(tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        t += h;
    }
    for (double& xi : x) xi = std::clamp(xi, 0.0, 1.0);
    return ProbabilityVector{std::move(x)};
}

std::vector<double> linear_bound(const Graph& g, const InitialCondition& init,
                                 const EpidemicParams& params) {
    check_init(g, init);
    check_params(params);

    const auto& k = kern::ops();
    const std::size_t n = static_cast<std::size_t>(g.n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = init.x0[i];

    const double bt = params.beta * params.horizon;
    if (bt == 0.0 || g.edge_count() == 0) return y;

    NodeId dmax = 0;
    for (NodeId u = 0; u < g.n; ++u) dmax = std::max(dmax, g.degree(u));
    // Substep so each Taylor factor h*A has spectral radius <= 1.
    const int substeps = std::max(1, static_cast<int>(std::ceil(bt * dmax)));
    const double h = bt / substeps;

    std::vector<double> term(n), next(n), acc(n);
    for (int s = 0; s < substeps; ++s) {
        acc = y;
        term = y;
        for (int kk = 1; kk <= 64; ++kk) {
            k.spmv_unit(g.rowptr.data(), g.col.data(), term.data(), next.data(), g.n);
            const double c = h / kk;
            for (std::size_t i = 0; i < n; ++i) {
                term[i] = c * next[i];
                acc[i] += term[i];
            }
            if (k.max_abs(term.data(), n) <= 1e-16 * std::max(1.0, k.max_abs(acc.data(), n)))
                break;
        }
        y = acc;
    }
    return y;
}

ProbabilityVector transient_bound(const Graph& g, const InitialCondition& init,
                                  const EpidemicParams& params, double tol) {
    check_init(g, init);
    check_binary(init);
    check_params(params);
    if (!(tol > 0.0)) throw std::invalid_argument("series tolerance must be positive");

    const auto& k = kern::ops();
    const std::size_t n = static_cast<std::size_t>(g.n);
    const double bt = params.beta * params.horizon;

    std::vector<double> x0(n), q(n);
    for (std::size_t i = 0; i < n; ++i) {
        x0[i] = init.x0[i];
        q[i] = 1.0 - x0[i];
    }

    std::vector<double> y(n, 0.0);
    if (bt > 0.0 && g.edge_count() > 0) {
        NodeId dmax = 0;
        for (NodeId u = 0; u < g.n; ++u) dmax = std::max(dmax, g.degree(u));

        // u_k = (bt)^{k+1}/(k+1)! [A diag(1-x0)]^k A x0, built incrementally in
        // scaled form so large bt never overflows the raw powers.
        std::vector<double> u(n), masked(n), au(n);
        k.spmv_unit(g.rowptr.data(), g.col.data(), x0.data(), u.data(), g.n);
        k.scale(bt, u.data(), n);
        for (std::size_t i = 0; i < n; ++i) y[i] += u[i];

        const int cap = 200;
        // Terms can grow before k+2 exceeds bt*dmax; cap entries far above the
        // xhat saturation scale so the recurrence stays finite.
        const double kTermCeil = 1e12;
        for (int kk = 0; kk < cap; ++kk) {
            k.hadamard(q.data(), u.data(), masked.data(), n);
            k.spmv_unit(g.rowptr.data(), g.col.data(), masked.data(), au.data(), g.n);
            const double c = bt / (kk + 2);
            double inc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                u[i] = std::min(c * au[i], kTermCeil);
                y[i] += u[i];
                inc = std::max(inc, u[i]);
            }
            if (inc < tol && static_cast<double>(kk + 2) > bt * dmax) break;
        }
    }

    std::vector<double> xhat(n);
    for (std::size_t i = 0; i < n; ++i)
        xhat[i] = init.x0[i] ? 1.0 : -std::expm1(-y[i]);
    return ProbabilityVector{std::move(xhat)};
}

} // namespace netpatch
