#include "netpatch/weights.hpp"

#include "netpatch/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace netpatch {

namespace {

constexpr double kSparsitySnap = 1e-15;
constexpr double kDegreeClamp = 1e-12;

void check_xhat(const Graph& g, const ProbabilityVector& xhat) {
    if (static_cast<NodeId>(xhat.values.size()) != g.n)
        throw std::invalid_argument("probability vector length does not match node count");
    for (double v : xhat.values)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("probability vector entry outside [0,1]");
}

EdgeWeights make_weights(const Graph& g, const ProbabilityVector& xhat,
                         WeightFlavor flavor, double horizon) {
    check_xhat(g, xhat);
    EdgeWeights ew;
    ew.flavor = flavor;
    ew.horizon = horizon;
    ew.n = g.n;
    ew.edges = g.edges;
    ew.w.resize(g.edges.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const double xi = xhat.values[g.edges[e].first];
        const double xj = xhat.values[g.edges[e].second];
        // Flipped is 1 - critical, computed as such (not via the product
        // form) so the two flavors sum to the adjacency indicator exactly.
        const double wc = xi * (1.0 - xj) + (1.0 - xi) * xj;
        double w = (flavor == WeightFlavor::critical) ? wc : 1.0 - wc;
        if (w < kSparsitySnap) w = 0.0;
        ew.w[e] = w;
    }
    return ew;
}

} // namespace

EdgeWeights critical_weights(const Graph& g, const ProbabilityVector& xhat, double horizon) {
    return make_weights(g, xhat, WeightFlavor::critical, horizon);
}

EdgeWeights flipped_weights(const Graph& g, const ProbabilityVector& xhat, double horizon) {
    return make_weights(g, xhat, WeightFlavor::flipped, horizon);
}

double WeightedLaplacian::volume() const {
    return kern::ops().sum(d.data(), d.size());
}

void WeightedLaplacian::apply(const double* v, double* out, double* scratch) const {
    const auto& k = kern::ops();
    const std::size_t sz = static_cast<std::size_t>(n);
    k.hadamard(inv_sqrt_d.data(), v, scratch, sz);
    k.spmv(rowptr.data(), col.data(), val.data(), scratch, out, n);
    for (std::size_t i = 0; i < sz; ++i)
        out[i] = diag[i] * v[i] - inv_sqrt_d[i] * out[i];
}

WeightedLaplacian build_laplacian(const EdgeWeights& w) {
    if (w.flavor != WeightFlavor::flipped)
        throw std::invalid_argument("build_laplacian expects flipped-flavor weights");
    if (static_cast<std::size_t>(w.edges.size()) != w.w.size())
        throw std::invalid_argument("edge weight vector length mismatch");

    WeightedLaplacian lap;
    lap.n = w.n;
    lap.edges = w.edges;
    const std::size_t n = static_cast<std::size_t>(w.n);
    lap.d.assign(n, 0.0);

    bool any = false;
    for (std::size_t e = 0; e < w.edges.size(); ++e) {
        lap.d[w.edges[e].first] += w.w[e];
        lap.d[w.edges[e].second] += w.w[e];
        if (w.w[e] != 0.0) any = true;
    }
    if (!any) throw std::invalid_argument("all flipped weights are zero: nothing to partition");

    lap.inv_sqrt_d.resize(n);
    lap.diag.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double clamped = std::max(lap.d[i], kDegreeClamp);
        lap.inv_sqrt_d[i] = 1.0 / std::sqrt(clamped);
        lap.diag[i] = lap.d[i] / clamped;
    }

    lap.rowptr.assign(n + 1, 0);
    for (std::size_t e = 0; e < w.edges.size(); ++e) {
        if (w.w[e] == 0.0) continue;
        ++lap.rowptr[static_cast<std::size_t>(w.edges[e].first) + 1];
        ++lap.rowptr[static_cast<std::size_t>(w.edges[e].second) + 1];
    }
    for (std::size_t i = 0; i < n; ++i) lap.rowptr[i + 1] += lap.rowptr[i];
    lap.col.resize(static_cast<std::size_t>(lap.rowptr[n]));
    lap.val.resize(lap.col.size());
    std::vector<std::int64_t> fill(lap.rowptr.begin(), lap.rowptr.end() - 1);
    for (std::size_t e = 0; e < w.edges.size(); ++e) {
        if (w.w[e] == 0.0) continue;
        const auto [u, v] = w.edges[e];
        lap.col[static_cast<std::size_t>(fill[u])] = v;
        lap.val[static_cast<std::size_t>(fill[u]++)] = w.w[e];
        lap.col[static_cast<std::size_t>(fill[v])] = u;
        lap.val[static_cast<std::size_t>(fill[v]++)] = w.w[e];
    }
    return lap;
}

} // namespace netpatch
