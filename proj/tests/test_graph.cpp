#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "netpatch/graph.hpp"
#include "netpatch/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace netpatch;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

Eigen::MatrixXd dense_adjacency(const Graph& g) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
    for (const auto& [u, v] : g.edges) {
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    return a;
}

// Newman modularity of a node labeling.
double modularity(const Graph& g, const std::vector<NodeId>& label, NodeId k) {
    const double m = static_cast<double>(g.edge_count());
    std::vector<double> intra(static_cast<std::size_t>(k), 0.0);
    std::vector<double> deg(static_cast<std::size_t>(k), 0.0);
    for (const auto& [u, v] : g.edges) {
        if (label[u] == label[v]) intra[static_cast<std::size_t>(label[u])] += 1.0;
        deg[static_cast<std::size_t>(label[u])] += 1.0;
        deg[static_cast<std::size_t>(label[v])] += 1.0;
    }
    double q = 0.0;
    for (NodeId c = 0; c < k; ++c) {
        const std::size_t ci = static_cast<std::size_t>(c);
        q += intra[ci] / m - (deg[ci] / (2.0 * m)) * (deg[ci] / (2.0 * m));
    }
    return q;
}

} // namespace

TEST_CASE("build_graph canonicalizes edges") {
    const Graph g = build_graph(4, {{1, 0}, {0, 1}, {2, 2}, {3, 2}, {1, 0}});
    CHECK(g.n == 4);
    REQUIRE(g.edge_count() == 2);
    CHECK(g.edges[0] == std::pair<NodeId, NodeId>{0, 1});
    CHECK(g.edges[1] == std::pair<NodeId, NodeId>{2, 3});
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 0));
    CHECK_FALSE(g.has_edge(0, 2));
    CHECK_FALSE(g.has_edge(2, 2));
    CHECK(g.degree(0) == 1);
    CHECK(g.degree(2) == 1);

    CHECK_THROWS_AS(build_graph(2, {{0, 5}}), std::invalid_argument);
}

TEST_CASE("adjacency is symmetric with zero diagonal") {
    const Graph g = generate_sbm(SbmSpec{300, 3, 8.0, 10.0, 4});
    for (NodeId u = 0; u < g.n; ++u) {
        for (const NodeId* p = g.neighbors_begin(u); p != g.neighbors_end(u); ++p) {
            CHECK(*p != u);
            CHECK(g.has_edge(*p, u));
        }
    }
}

TEST_CASE("edge list parsing") {
    SUBCASE("plain pairs") {
        const Graph g = load_edgelist(write_temp("el_plain.txt", "0 1\n1 2\n"));
        CHECK(g.n == 3);
        REQUIRE(g.edge_count() == 2);
        CHECK(g.edges[0] == std::pair<NodeId, NodeId>{0, 1});
        CHECK(g.edges[1] == std::pair<NodeId, NodeId>{1, 2});
    }
    SUBCASE("comments, duplicates, relabeling") {
        const Graph g = load_edgelist(write_temp("el_dedup.txt", "# c\n5 7\n7 5\n"));
        CHECK(g.n == 2);
        REQUIRE(g.edge_count() == 1);
        CHECK(g.edges[0] == std::pair<NodeId, NodeId>{0, 1});
    }
    SUBCASE("first-appearance relabeling order") {
        const Graph g = load_edgelist(write_temp("el_order.txt", "10 3\n3 5\n"));
        CHECK(g.n == 3);
        REQUIRE(g.edge_count() == 2);
        // 10 -> 0, 3 -> 1, 5 -> 2
        CHECK(g.edges[0] == std::pair<NodeId, NodeId>{0, 1});
        CHECK(g.edges[1] == std::pair<NodeId, NodeId>{1, 2});
    }
    SUBCASE("self-loops dropped, node still counted") {
        const Graph g = load_edgelist(write_temp("el_loop.txt", "0 0\n1 2\n"));
        CHECK(g.n == 3);
        CHECK(g.edge_count() == 1);
    }
    SUBCASE("non-integer token names the line") {
        const std::string path = write_temp("el_badtok.txt", "0 1\n0 x\n");
        CHECK_THROWS_WITH_AS(load_edgelist(path),
                             "edge list line 2: non-integer token 'x'", std::runtime_error);
    }
    SUBCASE("wrong token count names the line") {
        const std::string path = write_temp("el_3tok.txt", "0 1 2\n");
        CHECK_THROWS_WITH_AS(load_edgelist(path),
                             "edge list line 1: expected two node ids, got 3 tokens",
                             std::runtime_error);
    }
    SUBCASE("unreadable file") {
        CHECK_THROWS_AS(load_edgelist("/nonexistent/never.txt"), std::runtime_error);
    }
    SUBCASE("no edges") {
        const std::string path = write_temp("el_empty.txt", "# only comments\n");
        CHECK_THROWS_AS(load_edgelist(path), std::runtime_error);
    }
}

TEST_CASE("sbm mean degree tracks the requested average") {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Graph g = generate_sbm(SbmSpec{1000, 1, 8.0, 10.0, seed});
        total += 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(g.n);
    }
    const double mean = total / 20.0;
    CHECK(mean > 7.5);
    CHECK(mean < 8.5);
}

TEST_CASE("sbm planted partition beats a random bipartition on modularity") {
    std::vector<NodeId> blocks;
    const Graph g = generate_sbm(SbmSpec{2000, 4, 8.0, 10.0, 11}, &blocks);
    REQUIRE(blocks.size() == static_cast<std::size_t>(g.n));
    for (NodeId b : blocks) {
        CHECK(b >= 0);
        CHECK(b < 4);
    }
    const double q_planted = modularity(g, blocks, 4);

    rng::Stream s(99);
    std::vector<NodeId> coin(static_cast<std::size_t>(g.n));
    for (NodeId& c : coin) c = static_cast<NodeId>(s.next_below(2));
    const double q_random = modularity(g, coin, 2);

    CHECK(q_planted > q_random);
    CHECK(q_planted > 0.3); // strong community structure at ratio 10
}

TEST_CASE("sbm infeasible density is rejected") {
    // Mean degree 3 over 4 nodes in two blocks needs p_in > 1.
    CHECK_THROWS_WITH_AS(generate_sbm(SbmSpec{4, 2, 3.0, 1e9, 1}),
                         "generate_sbm: infeasible parameters (required p_in > 1)",
                         std::invalid_argument);
    CHECK_THROWS_AS(generate_sbm(SbmSpec{0, 1, 8.0, 10.0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(generate_sbm(SbmSpec{10, 20, 8.0, 10.0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(generate_sbm(SbmSpec{10, 2, -1.0, 10.0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(generate_sbm(SbmSpec{10, 2, 3.0, 0.5, 1}), std::invalid_argument);
}

TEST_CASE("sbm extreme ratio isolates the blocks") {
    // p_in ~= 1, p_out ~= 1e-9: the sample is two disjoint K4s (whp) and the
    // largest component is one of them.
    const Graph g = generate_sbm(SbmSpec{8, 2, 3.0, 1e9, 3});
    CHECK(g.n == 4);
    CHECK(g.edge_count() == 6);
    for (NodeId i = 0; i < g.n; ++i) CHECK(g.degree(i) == 3);
}

TEST_CASE("sbm generation is reproducible per seed") {
    std::vector<NodeId> b1, b2;
    const Graph g1 = generate_sbm(SbmSpec{400, 3, 8.0, 10.0, 77}, &b1);
    const Graph g2 = generate_sbm(SbmSpec{400, 3, 8.0, 10.0, 77}, &b2);
    CHECK(g1.n == g2.n);
    CHECK(g1.edges == g2.edges);
    CHECK(b1 == b2);

    const Graph g3 = generate_sbm(SbmSpec{400, 3, 8.0, 10.0, 78});
    CHECK(g1.edges != g3.edges);
}

TEST_CASE("multi-source BFS distances") {
    const Graph path3 = build_graph(3, {{0, 1}, {1, 2}});
    CHECK(multi_source_bfs(path3, {0}) == std::vector<NodeId>{0, 1, 2});
    CHECK(multi_source_bfs(path3, {0, 2}) == std::vector<NodeId>{0, 1, 0});
    CHECK(multi_source_bfs(path3, {0, 0}) == std::vector<NodeId>{0, 1, 2});

    const Graph split = build_graph(3, {{0, 1}});
    CHECK(multi_source_bfs(split, {0}) == std::vector<NodeId>{0, 1, kUnreachable});

    CHECK_THROWS_AS(multi_source_bfs(path3, {}), std::invalid_argument);
    CHECK_THROWS_AS(multi_source_bfs(path3, {5}), std::invalid_argument);
    CHECK_THROWS_AS(multi_source_bfs(path3, {-1}), std::invalid_argument);
}

TEST_CASE("BFS distances differ by at most one hop across an edge") {
    const Graph g = generate_sbm(SbmSpec{500, 3, 8.0, 10.0, 21});
    const auto dist = multi_source_bfs(g, {0, g.n / 2});
    for (const auto& [u, v] : g.edges) {
        REQUIRE(dist[u] != kUnreachable); // connected by construction
        REQUIRE(dist[v] != kUnreachable);
        CHECK(std::abs(dist[u] - dist[v]) <= 1);
    }
}

TEST_CASE("centrality ranks a star center first") {
    const Graph star = build_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    const auto v = eigenvector_centrality(star);
    // Exact dominant eigenvector: (2, 1, 1, 1, 1)/sqrt(8).
    CHECK(v[0] == doctest::Approx(2.0 / std::sqrt(8.0)).epsilon(1e-8));
    for (int leaf = 1; leaf < 5; ++leaf) {
        CHECK(v[static_cast<std::size_t>(leaf)] ==
              doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-8));
        CHECK(v[0] > v[static_cast<std::size_t>(leaf)]);
    }
}

TEST_CASE("centrality is uniform on a cycle") {
    const Graph c5 = build_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
    const auto v = eigenvector_centrality(c5);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(v[i] == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-9));
}

TEST_CASE("centrality matches a dense eigensolve on a path") {
    const Graph p3 = build_graph(3, {{0, 1}, {1, 2}});
    const auto v = eigenvector_centrality(p3);
    CHECK(v[0] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(v[1] == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-8));
    CHECK(v[2] == doctest::Approx(0.5).epsilon(1e-8));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_adjacency(p3));
    Eigen::VectorXd top = es.eigenvectors().col(2).cwiseAbs(); // eigenvalues ascending
    for (int i = 0; i < 3; ++i) CHECK(v[static_cast<std::size_t>(i)] == doctest::Approx(top(i)).epsilon(1e-8));
}

TEST_CASE("centrality satisfies the eigenpair residual bound") {
    const double tol = 1e-10;
    const Graph g = generate_sbm(SbmSpec{200, 2, 8.0, 10.0, 8});
    const auto vec = eigenvector_centrality(g, tol);

    Eigen::Map<const Eigen::VectorXd> v(vec.data(), g.n);
    const Eigen::MatrixXd a = dense_adjacency(g);
    const double lambda = v.dot(a * v);
    const double row_sum_norm = a.rowwise().sum().maxCoeff();
    CHECK((a * v - lambda * v).norm() <= 10.0 * tol * row_sum_norm);

    for (NodeId i = 0; i < g.n; ++i) CHECK(vec[static_cast<std::size_t>(i)] >= 0.0);
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degree vector") {
    const Graph star = build_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    CHECK(degrees(star) == std::vector<NodeId>{4, 1, 1, 1, 1});
    const Graph c5 = build_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
    CHECK(degrees(c5) == std::vector<NodeId>{2, 2, 2, 2, 2});
    const Graph k2 = build_graph(2, {{0, 1}});
    CHECK(degrees(k2) == std::vector<NodeId>{1, 1});
}
