#include "netpatch/partition.hpp"

#include "netpatch/kernels.hpp"
#include "netpatch/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace netpatch {

namespace {

struct AnchorData {
    std::vector<std::uint8_t> mask; // 1 where anchored
    std::vector<double> n0;         // B'c: label at anchors, 0 elsewhere
    std::size_t count = 0;
};

AnchorData unpack_anchors(NodeId n, const ConstraintSet& cons) {
    AnchorData a;
    a.mask.assign(static_cast<std::size_t>(n), 0);
    a.n0.assign(static_cast<std::size_t>(n), 0.0);
    for (const auto& [node, label] : cons.anchors) {
        if (node < 0 || node >= n)
            throw std::invalid_argument("anchor node out of range");
        if (label != 1 && label != -1)
            throw std::invalid_argument("anchor label must be +1 or -1");
        if (a.mask[node])
            throw std::invalid_argument("duplicate anchor node");
        a.mask[node] = 1;
        a.n0[node] = label;
        ++a.count;
    }
    if (a.count == 0) throw std::invalid_argument("constraint set is empty");
    return a;
}

std::vector<std::int8_t> sides_from_sign(const std::vector<double>& v) {
    std::vector<std::int8_t> sides(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sides[i] = v[i] > 0.0 ? 1 : -1;
    return sides;
}

EdgeList crossing_edges(const EdgeList& edges, const std::vector<std::int8_t>& sides) {
    EdgeList cut;
    for (const auto& [u, v] : edges)
        if (sides[u] != sides[v]) cut.emplace_back(u, v);
    return cut;
}

double quadratic_objective(const WeightedLaplacian& lap, const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> lv(n), scratch(n);
    lap.apply(v.data(), lv.data(), scratch.data());
    return kern::ops().dot(v.data(), lv.data(), n);
}

} // namespace

ConstraintSet select_constraints(const Graph& g, const InitialCondition& init,
                                 const ProbabilityVector& xhat) {
    if (static_cast<NodeId>(init.x0.size()) != g.n ||
        static_cast<NodeId>(xhat.values.size()) != g.n)
        throw std::invalid_argument("select_constraints: length mismatch");
    for (std::uint8_t b : init.x0)
        if (b > 1) throw std::invalid_argument("non-binary initial condition");

    std::vector<NodeId> sources;
    for (NodeId i = 0; i < g.n; ++i)
        if (init.x0[i]) sources.push_back(i);
    if (sources.empty())
        throw std::invalid_argument("select_constraints: no infection sources");

    const std::size_t cap = static_cast<std::size_t>(g.n) / 10;

    // Infected anchors: all sources, then one-hop neighbors in ascending id
    // order until the cap. Sources are never dropped.
    std::vector<std::uint8_t> is_source(static_cast<std::size_t>(g.n), 0);
    for (NodeId s : sources) is_source[s] = 1;
    std::vector<std::uint8_t> infected_anchor(is_source);
    std::vector<NodeId> hop;
    for (NodeId s : sources)
        for (const NodeId* p = g.neighbors_begin(s); p != g.neighbors_end(s); ++p)
            if (!infected_anchor[*p]) {
                infected_anchor[*p] = 1;
                hop.push_back(*p);
            }
    std::sort(hop.begin(), hop.end());
    std::size_t n_infected = sources.size() + hop.size();
    if (n_infected > cap) {
        const std::size_t keep = cap > sources.size() ? cap - sources.size() : 0;
        for (std::size_t i = keep; i < hop.size(); ++i) infected_anchor[hop[i]] = 0;
        hop.resize(keep);
        n_infected = sources.size() + keep;
    }

    std::vector<NodeId> candidates;
    for (NodeId i = 0; i < g.n; ++i)
        if (!infected_anchor[i] && xhat.values[i] <= 0.5) candidates.push_back(i);
    if (candidates.empty())
        throw NoHealthyRegion("every node is predicted infected at the patching delay");

    // Healthy anchors: farthest from the sources first. Keep at least one
    // even when the infected anchors already fill the cap.
    std::size_t k = std::max<std::size_t>(1, cap > n_infected ? cap - n_infected : 0);
    k = std::min(k, candidates.size());
    std::vector<NodeId> dist = multi_source_bfs(g, sources);
    auto farther = [&dist](NodeId a, NodeId b) {
        const std::int64_t da =
            dist[a] == kUnreachable ? std::numeric_limits<std::int64_t>::max() : dist[a];
        const std::int64_t db =
            dist[b] == kUnreachable ? std::numeric_limits<std::int64_t>::max() : dist[b];
        if (da != db) return da > db;
        return a < b;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end(), farther);
    candidates.resize(k);

    ConstraintSet cons;
    for (NodeId s : sources) cons.anchors.emplace_back(s, 1);
    for (NodeId h : hop) cons.anchors.emplace_back(h, 1);
    for (NodeId c : candidates) cons.anchors.emplace_back(c, -1);
    return cons;
}

PartitionResult ppm_solve(const WeightedLaplacian& lap, const ConstraintSet& cons,
                          const SolverOptions& opts) {
    const auto& k = kern::ops();
    const std::size_t n = static_cast<std::size_t>(lap.n);
    AnchorData a = unpack_anchors(lap.n, cons);

    PartitionResult res;
    res.solver = "ppm";

    if (a.count == n) {
        // Fully constrained: the affine subspace is the single point B'c.
        res.v = a.n0;
        res.sides = sides_from_sign(res.v);
        res.cutset = crossing_edges(lap.edges, res.sides);
        res.objective = quadratic_objective(lap, res.v);
        return res;
    }

    const double vol = lap.volume();
    const double m = static_cast<double>(a.count);
    if (!(vol > m))
        throw std::runtime_error(
            "ppm_solve: infeasible, graph volume does not exceed anchor count");
    const double gamma = std::sqrt(vol - m);

    std::vector<double> v(a.n0), mv(n), scratch(n);
    rng::Stream pert(rng::mix(0x7065727475726221ULL, a.count));

    // w <- P (alpha I - Lbar) v, with P zeroing anchor coordinates.
    auto projected_power = [&](const std::vector<double>& in, std::vector<double>& w) {
        lap.apply(in.data(), w.data(), scratch.data());
        for (std::size_t i = 0; i < n; ++i)
            w[i] = a.mask[i] ? 0.0 : opts.alpha * in[i] - w[i];
        return std::sqrt(k.dot(w.data(), w.data(), n));
    };
    auto perturb_free_coords = [&](std::vector<double>& w) {
        for (std::size_t i = 0; i < n; ++i)
            w[i] = a.mask[i] ? 0.0 : pert.next_unit() - 0.5;
        ++res.perturbations;
        return std::sqrt(k.dot(w.data(), w.data(), n));
    };

    double nw = projected_power(v, mv);
    const double degenerate = 1e-13 * opts.alpha;
    if (nw <= degenerate * std::sqrt(m)) nw = perturb_free_coords(mv);

    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = gamma * mv[i] / nw + a.n0[i];
    v.swap(next);

    for (std::int32_t it = 0; it < opts.max_iter; ++it) {
        nw = projected_power(v, mv);
        if (nw <= degenerate * std::sqrt(vol)) nw = perturb_free_coords(mv);
        for (std::size_t i = 0; i < n; ++i) next[i] = gamma * mv[i] / nw + a.n0[i];
        const double delta = k.max_abs_diff(next.data(), v.data(), n);
        v.swap(next);
        if (delta < opts.tol) {
            res.v = std::move(v);
            res.sides = sides_from_sign(res.v);
            res.cutset = crossing_edges(lap.edges, res.sides);
            res.objective = quadratic_objective(lap, res.v);
            return res;
        }
    }
    throw std::runtime_error("ppm_solve: no convergence within iteration cap");
}

PartitionResult uzawa_solve(const WeightedLaplacian& lap, const ConstraintSet& cons,
                            const SolverOptions& opts) {
    const auto& k = kern::ops();
    const std::size_t n = static_cast<std::size_t>(lap.n);
    AnchorData a = unpack_anchors(lap.n, cons);
    if (!(opts.mu > 0.0)) throw std::invalid_argument("uzawa_solve: mu must be positive");

    std::vector<double> b(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (a.mask[i]) b[i] = opts.mu * a.n0[i];

    std::vector<double> precond(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double diag = lap.diag[i] + (a.mask[i] ? opts.mu : 0.0);
        precond[i] = 1.0 / std::max(diag, 1e-30);
    }

    std::vector<double> x(n, 0.0), r(b), z(n), p(n), sp(n), scratch(n);
    auto apply_system = [&](const double* in, double* out) {
        lap.apply(in, out, scratch.data());
        for (std::size_t i = 0; i < n; ++i)
            if (a.mask[i]) out[i] += opts.mu * in[i];
    };

    const double bnorm = std::sqrt(k.dot(b.data(), b.data(), n));
    const double target = opts.tol * bnorm;
    const std::int64_t cap = 10 * static_cast<std::int64_t>(n);

    k.hadamard(precond.data(), r.data(), z.data(), n);
    p = z;
    double rz = k.dot(r.data(), z.data(), n);
    double rnorm = bnorm;
    bool converged = rnorm <= target;
    for (std::int64_t it = 0; it < cap && !converged; ++it) {
        apply_system(p.data(), sp.data());
        const double psp = k.dot(p.data(), sp.data(), n);
        if (!(psp > 0.0)) break; // system is only semidefinite off the anchor set
        const double step = rz / psp;
        k.axpy(step, p.data(), x.data(), n);
        k.axpy(-step, sp.data(), r.data(), n);
        rnorm = std::sqrt(k.dot(r.data(), r.data(), n));
        if (rnorm <= target) {
            converged = true;
            break;
        }
        k.hadamard(precond.data(), r.data(), z.data(), n);
        const double rz_next = k.dot(r.data(), z.data(), n);
        k.scale(rz_next / rz, p.data(), n);
        k.axpy(1.0, z.data(), p.data(), n);
        rz = rz_next;
    }
    if (!converged) {
        throw std::runtime_error(
            "uzawa_solve: conjugate gradients stalled, relative residual " +
            std::to_string(bnorm > 0.0 ? rnorm / bnorm : rnorm));
    }

    PartitionResult res;
    res.solver = "uzawa";
    res.v = std::move(x);
    res.sides = sides_from_sign(res.v);
    res.cutset = crossing_edges(lap.edges, res.sides);
    res.objective = quadratic_objective(lap, res.v);
    return res;
}

EdgeList extract_cutset(const Graph& g, const std::vector<std::int8_t>& sides) {
    if (static_cast<NodeId>(sides.size()) != g.n)
        throw std::invalid_argument("extract_cutset: side labels do not cover all nodes");
    for (std::int8_t s : sides)
        if (s != 1 && s != -1)
            throw std::invalid_argument("extract_cutset: side label must be +1 or -1");
    return crossing_edges(g.edges, sides);
}

double ncut_value(const EdgeWeights& w, const std::vector<std::int8_t>& sides) {
    if (static_cast<NodeId>(sides.size()) != w.n)
        throw std::invalid_argument("ncut_value: side labels do not cover all nodes");
    double cut = 0.0, vol_pos = 0.0, vol_neg = 0.0;
    std::vector<double> d(static_cast<std::size_t>(w.n), 0.0);
    for (std::size_t e = 0; e < w.edges.size(); ++e) {
        const auto [i, j] = w.edges[e];
        d[i] += w.w[e];
        d[j] += w.w[e];
        if (sides[i] != sides[j]) cut += w.w[e];
    }
    for (NodeId i = 0; i < w.n; ++i)
        (sides[i] > 0 ? vol_pos : vol_neg) += d[i];
    if (!(vol_pos > 0.0) || !(vol_neg > 0.0))
        throw std::invalid_argument("ncut_value: zero-volume side");
    return cut / vol_pos + cut / vol_neg;
}

} // namespace netpatch
