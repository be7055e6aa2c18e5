#include "netpatch/graph.hpp"

#include "netpatch/kernels.hpp"
#include "netpatch/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace netpatch {

bool Graph::has_edge(NodeId u, NodeId v) const {
    const NodeId* b = neighbors_begin(u);
    const NodeId* e = neighbors_end(u);
    return std::binary_search(b, e, v);
}

Graph build_graph(NodeId n, EdgeList edges) {
    if (n < 0) throw std::invalid_argument("build_graph: negative node count");
    for (auto& [u, v] : edges) {
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw std::invalid_argument("build_graph: edge endpoint out of range");
        if (u > v) std::swap(u, v);
    }
    std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    Graph g;
    g.n = n;
    g.edges = std::move(edges);
    g.rowptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& [u, v] : g.edges) {
        ++g.rowptr[static_cast<std::size_t>(u) + 1];
        ++g.rowptr[static_cast<std::size_t>(v) + 1];
    }
    for (NodeId i = 0; i < n; ++i) g.rowptr[i + 1] += g.rowptr[i];
    g.col.resize(static_cast<std::size_t>(g.rowptr[n]));
    std::vector<std::int64_t> fill(g.rowptr.begin(), g.rowptr.end() - 1);
    for (const auto& [u, v] : g.edges) {
        g.col[static_cast<std::size_t>(fill[u]++)] = v;
        g.col[static_cast<std::size_t>(fill[v]++)] = u;
    }
    for (NodeId i = 0; i < n; ++i)
        std::sort(g.col.begin() + g.rowptr[i], g.col.begin() + g.rowptr[i + 1]);
    return g;
}

namespace {

std::int64_t parse_int_token(const std::string& tok, std::size_t line_no) {
    std::int64_t value = 0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        std::ostringstream msg;
        msg << "edge list line " << line_no << ": non-integer token '" << tok << "'";
        throw std::runtime_error(msg.str());
    }
    return value;
}

} // namespace

Graph load_edgelist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read edge list file: " + path);

    std::unordered_map<std::int64_t, NodeId> relabel;
    EdgeList edges;
    std::string line;
    std::size_t line_no = 0;
    auto intern = [&](std::int64_t raw) {
        auto [it, inserted] = relabel.emplace(raw, static_cast<NodeId>(relabel.size()));
        (void)inserted;
        return it->second;
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        std::vector<std::string> toks;
        while (ls >> tok) toks.push_back(tok);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks.size() != 2) {
            std::ostringstream msg;
            msg << "edge list line " << line_no << ": expected two node ids, got "
                << toks.size() << " tokens";
            throw std::runtime_error(msg.str());
        }
        NodeId u = intern(parse_int_token(toks[0], line_no));
        NodeId v = intern(parse_int_token(toks[1], line_no));
        if (u != v) edges.emplace_back(u, v);
    }
    if (in.bad()) throw std::runtime_error("I/O error while reading: " + path);
    if (edges.empty()) throw std::runtime_error("edge list is empty: " + path);
    return build_graph(static_cast<NodeId>(relabel.size()), std::move(edges));
}

namespace {

// Largest connected component, relabeled with ascending-old-id order.
Graph largest_component(const Graph& g, const std::vector<NodeId>& blocks,
                        std::vector<NodeId>* blocks_out) {
    std::vector<NodeId> comp(static_cast<std::size_t>(g.n), -1);
    NodeId ncomp = 0;
    std::vector<std::int64_t> comp_size;
    std::vector<NodeId> stack;
    for (NodeId s = 0; s < g.n; ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = ncomp;
        std::int64_t size = 0;
        stack.push_back(s);
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            ++size;
            for (const NodeId* p = g.neighbors_begin(u); p != g.neighbors_end(u); ++p) {
                if (comp[*p] < 0) {
                    comp[*p] = ncomp;
                    stack.push_back(*p);
                }
            }
        }
        comp_size.push_back(size);
        ++ncomp;
    }
    NodeId best = static_cast<NodeId>(
        std::max_element(comp_size.begin(), comp_size.end()) - comp_size.begin());

    std::vector<NodeId> to_new(static_cast<std::size_t>(g.n), -1);
    NodeId m = 0;
    for (NodeId u = 0; u < g.n; ++u)
        if (comp[u] == best) to_new[u] = m++;
    EdgeList kept;
    for (const auto& [u, v] : g.edges)
        if (comp[u] == best && comp[v] == best)
            kept.emplace_back(to_new[u], to_new[v]);
    if (blocks_out) {
        blocks_out->assign(static_cast<std::size_t>(m), 0);
        for (NodeId u = 0; u < g.n; ++u)
            if (to_new[u] >= 0) (*blocks_out)[to_new[u]] = blocks[u];
    }
    return build_graph(m, std::move(kept));
}

} // namespace

Graph generate_sbm(const SbmSpec& spec, std::vector<NodeId>* blocks_out) {
    if (spec.n < 1 || spec.k < 1 || spec.n < spec.k)
        throw std::invalid_argument("generate_sbm: need n >= k >= 1");
    if (!(spec.avg_degree > 0.0))
        throw std::invalid_argument("generate_sbm: avg_degree must be positive");
    if (spec.k > 1 && !(spec.in_out_ratio > 1.0))
        throw std::invalid_argument("generate_sbm: in_out_ratio must exceed 1");

    const NodeId n = spec.n;
    const NodeId k = spec.k;
    std::vector<NodeId> block(static_cast<std::size_t>(n));
    {
        const NodeId base = n / k, extra = n % k;
        NodeId next = 0;
        for (NodeId b = 0; b < k; ++b) {
            NodeId size = base + (b < extra ? 1 : 0);
            for (NodeId i = 0; i < size; ++i) block[next++] = b;
        }
    }
    // Solve p_in so the expected mean degree of the raw sample is avg_degree:
    // sum of degrees = 2 (p_in * in_pairs + p_out * out_pairs).
    double in_pairs = 0.0;
    {
        const NodeId base = n / k, extra = n % k;
        for (NodeId b = 0; b < k; ++b) {
            double s = base + (b < extra ? 1 : 0);
            in_pairs += s * (s - 1.0) / 2.0;
        }
    }
    const double all_pairs = static_cast<double>(n) * (n - 1.0) / 2.0;
    const double out_pairs = all_pairs - in_pairs;
    const double denom = in_pairs + out_pairs / spec.in_out_ratio;
    if (denom <= 0.0)
        throw std::invalid_argument("generate_sbm: no within-block pairs to carry edges");
    const double p_in = spec.avg_degree * n / (2.0 * denom);
    if (p_in > 1.0)
        throw std::invalid_argument("generate_sbm: infeasible parameters (required p_in > 1)");
    const double p_out = p_in / spec.in_out_ratio;

    rng::Stream rs(spec.seed);
    EdgeList edges;
    edges.reserve(static_cast<std::size_t>(spec.avg_degree * n / 2.0 * 1.2) + 16);
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = i + 1; j < n; ++j) {
            const double p = (block[i] == block[j]) ? p_in : p_out;
            if (rs.next_unit() <= p) edges.emplace_back(i, j);
        }
    }
    Graph full = build_graph(n, std::move(edges));
    return largest_component(full, block, blocks_out);
}

std::vector<NodeId> multi_source_bfs(const Graph& g, const std::vector<NodeId>& sources) {
    if (sources.empty()) throw std::invalid_argument("multi_source_bfs: empty source set");
    std::vector<NodeId> dist(static_cast<std::size_t>(g.n), kUnreachable);
    std::queue<NodeId> q;
    for (NodeId s : sources) {
        if (s < 0 || s >= g.n)
            throw std::invalid_argument("multi_source_bfs: source out of range");
        if (dist[s] == kUnreachable) {
            dist[s] = 0;
            q.push(s);
        }
    }
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop();
        for (const NodeId* p = g.neighbors_begin(u); p != g.neighbors_end(u); ++p) {
            if (dist[*p] == kUnreachable) {
                dist[*p] = dist[u] + 1;
                q.push(*p);
            }
        }
    }
    return dist;
}

std::vector<double> eigenvector_centrality(const Graph& g, double tol) {
    if (g.n == 0) throw std::invalid_argument("eigenvector_centrality: empty graph");
    const auto& k = kern::ops();
    const std::size_t n = static_cast<std::size_t>(g.n);
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(g.n)));
    std::vector<double> w(n);
    const int cap = 10000;
    for (int it = 0; it < cap; ++it) {
        // Iterate on A + I: same dominant eigenvector, but the unit shift
        // breaks the +/-lambda symmetry of bipartite graphs (star, path),
        // which would otherwise oscillate forever.
        k.spmv_unit(g.rowptr.data(), g.col.data(), v.data(), w.data(), g.n);
        k.axpy(1.0, v.data(), w.data(), n);
        double nrm = std::sqrt(k.dot(w.data(), w.data(), n));
        if (!(nrm > 0.0))
            throw std::runtime_error("eigenvector_centrality: iteration collapsed to zero");
        k.scale(1.0 / nrm, w.data(), n);
        double delta = k.max_abs_diff(w.data(), v.data(), n);
        v.swap(w);
        if (delta < tol) return v;
    }
    throw std::runtime_error("eigenvector_centrality: no convergence in 10000 iterations");
}

std::vector<NodeId> degrees(const Graph& g) {
    std::vector<NodeId> d(static_cast<std::size_t>(g.n));
    for (NodeId i = 0; i < g.n; ++i) d[i] = g.degree(i);
    return d;
}

} // namespace netpatch
