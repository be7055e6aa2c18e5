#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "netpatch/epidemic.hpp"
#include "netpatch/graph.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

using namespace netpatch;

namespace {

InitialCondition single_source(NodeId n, NodeId s) {
    InitialCondition init;
    init.x0.assign(static_cast<std::size_t>(n), 0);
    init.x0[static_cast<std::size_t>(s)] = 1;
    return init;
}

Eigen::MatrixXd dense_adjacency(const Graph& g) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
    for (const auto& [u, v] : g.edges) {
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    return a;
}

} // namespace

TEST_CASE("single-edge infection time is exponential") {
    const Graph k2 = build_graph(2, {{0, 1}});
    const InitialCondition init = single_source(2, 0);
    const EpidemicParams params{0.01, 5000.0};

    double total = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const InfectionTrace tr = simulate_si(k2, init, params, 1000 + t);
        REQUIRE(tr.events.size() == 1);
        CHECK(tr.events[0].second == 1);
        CHECK(tr.events[0].first > 0.0);
        total += tr.events[0].first;
    }
    const double mean = total / trials; // Exp(0.01): mean 100, sd of the mean 1
    CHECK(mean > 97.0);
    CHECK(mean < 103.0);
}

TEST_CASE("star leaves are infected independently") {
    const Graph star = build_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    const InitialCondition init = single_source(5, 0);
    const double t_end = 50.0;
    const EpidemicParams params{0.01, t_end};
    const double p = 1.0 - std::exp(-0.01 * t_end);

    const int trials = 10000;
    std::vector<int> hits(5, 0);
    for (int t = 0; t < trials; ++t) {
        const InfectionTrace tr = simulate_si(star, init, params, 7000 + t);
        for (const auto& [time, node] : tr.events) {
            CHECK(time <= t_end);
            ++hits[static_cast<std::size_t>(node)];
        }
    }
    const double sigma = std::sqrt(p * (1.0 - p) / trials);
    for (int leaf = 1; leaf < 5; ++leaf) {
        const double freq = static_cast<double>(hits[static_cast<std::size_t>(leaf)]) / trials;
        CHECK(std::fabs(freq - p) <= 3.0 * sigma);
    }
}

TEST_CASE("saturated initial state yields an empty trace") {
    const Graph k2 = build_graph(2, {{0, 1}});
    InitialCondition all;
    all.x0 = {1, 1};
    const InfectionTrace tr = simulate_si(k2, all, EpidemicParams{0.01, 100.0}, 1);
    CHECK(tr.events.empty());
}

TEST_CASE("simulation is deterministic in the seed") {
    const Graph g = generate_sbm(SbmSpec{100, 2, 8.0, 10.0, 5});
    const InitialCondition init = single_source(g.n, 0);
    const EpidemicParams params{0.01, 200.0};

    const InfectionTrace a = simulate_si(g, init, params, 42);
    const InfectionTrace b = simulate_si(g, init, params, 42);
    CHECK(a.events == b.events);

    const InfectionTrace c = simulate_si(g, init, params, 43);
    CHECK(a.events != c.events);
}

TEST_CASE("trace times are strictly increasing and nodes unique") {
    const Graph g = generate_sbm(SbmSpec{100, 2, 8.0, 10.0, 6});
    const InitialCondition init = single_source(g.n, 0);
    const InfectionTrace tr = simulate_si(g, init, EpidemicParams{0.05, 500.0}, 9);

    std::vector<bool> seen(static_cast<std::size_t>(g.n), false);
    double last = 0.0;
    for (const auto& [time, node] : tr.events) {
        CHECK(time > last);
        last = time;
        CHECK_FALSE(seen[static_cast<std::size_t>(node)]);
        seen[static_cast<std::size_t>(node)] = true;
        CHECK(init.x0[static_cast<std::size_t>(node)] == 0);
    }
}

TEST_CASE("simulation rejects mismatched dimensions") {
    const Graph k2 = build_graph(2, {{0, 1}});
    InitialCondition bad;
    bad.x0 = {1, 0, 0};
    CHECK_THROWS_AS(simulate_si(k2, bad, EpidemicParams{0.01, 10.0}, 1), std::invalid_argument);
}

TEST_CASE("mean-field solution matches the single-edge closed form") {
    const Graph k2 = build_graph(2, {{0, 1}});
    const InitialCondition init = single_source(2, 0);
    const ProbabilityVector x = solve_si_mean_field(k2, init, EpidemicParams{0.01, 100.0}, 0.01);
    CHECK(x.values[0] == 1.0);
    CHECK(std::fabs(x.values[1] - (1.0 - std::exp(-1.0))) <= 1e-8);
}

TEST_CASE("mean-field keeps the all-infected fixed point") {
    const Graph g = build_graph(3, {{0, 1}, {1, 2}});
    InitialCondition all;
    all.x0 = {1, 1, 1};
    const ProbabilityVector x = solve_si_mean_field(g, all, EpidemicParams{0.5, 50.0});
    for (double v : x.values) CHECK(v == 1.0);
}

TEST_CASE("mean-field halving the step changes nothing beyond tolerance") {
    const Graph p3 = build_graph(3, {{0, 1}, {1, 2}});
    const InitialCondition init = single_source(3, 0);
    const EpidemicParams params{0.05, 10.0};
    const ProbabilityVector coarse = solve_si_mean_field(p3, init, params, 0.1);
    const ProbabilityVector fine = solve_si_mean_field(p3, init, params, 0.05);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(std::fabs(coarse.values[i] - fine.values[i]) <= 1e-6);
}

TEST_CASE("mean-field default step equals 0.01 over beta") {
    const Graph p3 = build_graph(3, {{0, 1}, {1, 2}});
    const InitialCondition init = single_source(3, 0);
    const EpidemicParams params{0.01, 100.0};
    const ProbabilityVector def = solve_si_mean_field(p3, init, params);
    const ProbabilityVector exp = solve_si_mean_field(p3, init, params, 1.0);
    CHECK(def.values == exp.values);
}

TEST_CASE("mean-field output stays in the unit interval") {
    const Graph g = generate_sbm(SbmSpec{50, 2, 8.0, 10.0, 12});
    const ProbabilityVector x =
        solve_si_mean_field(g, single_source(g.n, 0), EpidemicParams{0.5, 100.0});
    for (double v : x.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("linear bound reproduces the 2x2 matrix exponential") {
    const Graph k2 = build_graph(2, {{0, 1}});
    const InitialCondition init = single_source(2, 0);
    // exp(s*A) for a single edge is [[cosh s, sinh s], [sinh s, cosh s]].
    const auto x = linear_bound(k2, init, EpidemicParams{0.01, 50.0});
    CHECK(std::fabs(x[0] - std::cosh(0.5)) <= 1e-12);
    CHECK(std::fabs(x[1] - std::sinh(0.5)) <= 1e-12);
}

TEST_CASE("linear bound at time zero is the initial state") {
    const Graph k2 = build_graph(2, {{0, 1}});
    const auto x = linear_bound(k2, single_source(2, 0), EpidemicParams{0.01, 0.0});
    CHECK(x[0] == 1.0);
    CHECK(x[1] == 0.0);
}

TEST_CASE("linear bound exceeds one as time grows") {
    const Graph k2 = build_graph(2, {{0, 1}});
    const auto x = linear_bound(k2, single_source(2, 0), EpidemicParams{0.01, 100.0});
    CHECK(std::fabs(x[1] - std::sinh(1.0)) <= 1e-12); // 1.1752... > 1
    CHECK(x[1] > 1.0);
    CHECK(x[0] > 1.0);
}

TEST_CASE("linear bound matches a dense eigendecomposition") {
    const Graph g = generate_sbm(SbmSpec{30, 2, 5.0, 10.0, 3});
    const InitialCondition init = single_source(g.n, 0);
    const EpidemicParams params{0.01, 30.0};
    const auto got = linear_bound(g, init, params);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_adjacency(g));
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(g.n);
    x0(0) = 1.0;
    const Eigen::VectorXd want = es.eigenvectors() *
                                 (0.3 * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                                 es.eigenvectors().transpose() * x0;
    for (NodeId i = 0; i < g.n; ++i)
        CHECK(std::fabs(got[static_cast<std::size_t>(i)] - want(i)) <=
              1e-10 * (1.0 + std::fabs(want(i))));
}

TEST_CASE("transient bound closed form on a single edge") {
    const Graph k2 = build_graph(2, {{0, 1}});
    const ProbabilityVector x =
        transient_bound(k2, single_source(2, 0), EpidemicParams{0.01, 50.0});
    CHECK(x.values[0] == 1.0); // source is pinned, no series evaluated
    CHECK(std::fabs(x.values[1] - (1.0 - std::exp(-0.5))) <= 1e-12);
}

TEST_CASE("transient bound closed form on a path") {
    // From an endpoint the series sums to y = [inf, sinh(bt), cosh(bt) - 1].
    const Graph p3 = build_graph(3, {{0, 1}, {1, 2}});
    const double bt = 0.5;
    const ProbabilityVector x =
        transient_bound(p3, single_source(3, 0), EpidemicParams{0.01, 50.0});
    CHECK(x.values[0] == 1.0);
    CHECK(std::fabs(x.values[1] - (1.0 - std::exp(-std::sinh(bt)))) <= 1e-12);
    CHECK(std::fabs(x.values[2] - (1.0 - std::exp(-(std::cosh(bt) - 1.0)))) <= 1e-12);
    CHECK(x.values[1] == doctest::Approx(0.4062).epsilon(1e-3));
    CHECK(x.values[2] == doctest::Approx(0.1198).epsilon(1e-3));
}

TEST_CASE("transient bound at time zero returns the initial state") {
    const Graph p3 = build_graph(3, {{0, 1}, {1, 2}});
    const ProbabilityVector x = transient_bound(p3, single_source(3, 0), EpidemicParams{0.01, 0.0});
    CHECK(x.values[0] == 1.0);
    CHECK(x.values[1] == 0.0);
    CHECK(x.values[2] == 0.0);
}

TEST_CASE("transient bound rejects non-binary initial conditions") {
    const Graph k2 = build_graph(2, {{0, 1}});
    InitialCondition frac;
    frac.x0 = {1, 2};
    CHECK_THROWS_AS(transient_bound(k2, frac, EpidemicParams{0.01, 10.0}),
                    std::invalid_argument);
}

TEST_CASE("transient bound is nondecreasing in time and stays in [0,1]") {
    const Graph g = generate_sbm(SbmSpec{60, 2, 8.0, 10.0, 14});
    const InitialCondition init = single_source(g.n, 0);
    std::vector<double> prev(static_cast<std::size_t>(g.n), -1.0);
    for (double t : {0.0, 1.0, 5.0, 10.0, 25.0, 50.0, 100.0, 400.0}) {
        const ProbabilityVector x = transient_bound(g, init, EpidemicParams{0.01, t});
        for (NodeId i = 0; i < g.n; ++i) {
            const double v = x.values[static_cast<std::size_t>(i)];
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            CHECK(v >= prev[static_cast<std::size_t>(i)] - 1e-12);
            prev[static_cast<std::size_t>(i)] = v;
        }
    }
}

TEST_CASE("empirical infection frequency stays below the transient bound") {
    const Graph g = generate_sbm(SbmSpec{40, 2, 8.0, 10.0, 20});
    const InitialCondition init = single_source(g.n, 0);
    const int trials = 10000;
    const std::vector<double> times{10.0, 50.0};

    int pairs = 0, within3 = 0, within4 = 0;
    for (double t : times) {
        std::vector<int> hits(static_cast<std::size_t>(g.n), 0);
        for (int k = 0; k < trials; ++k) {
            const InfectionTrace tr = simulate_si(g, init, EpidemicParams{0.01, t}, 90000 + k);
            for (const auto& [time, node] : tr.events) ++hits[static_cast<std::size_t>(node)];
        }
        const ProbabilityVector xhat = transient_bound(g, init, EpidemicParams{0.01, t});
        for (NodeId i = 0; i < g.n; ++i) {
            if (init.x0[static_cast<std::size_t>(i)]) continue;
            const double freq = static_cast<double>(hits[static_cast<std::size_t>(i)]) / trials;
            const double bound = xhat.values[static_cast<std::size_t>(i)];
            const double sigma = std::sqrt(bound * (1.0 - bound) / trials);
            ++pairs;
            if (freq <= bound + 3.0 * sigma) ++within3;
            if (freq <= bound + 4.0 * sigma) ++within4;
        }
    }
    CHECK(within4 == pairs);
    CHECK(static_cast<double>(within3) >= 0.99 * pairs);
}

TEST_CASE("mean-field solution is dominated by the transient bound") {
    for (std::uint64_t seed : {31u, 32u, 33u}) {
        const Graph g = generate_sbm(SbmSpec{50, 2, 8.0, 10.0, seed});
        const InitialCondition init = single_source(g.n, 0);
        const EpidemicParams params{0.02, 30.0};
        const ProbabilityVector mf = solve_si_mean_field(g, init, params);
        const ProbabilityVector tb = transient_bound(g, init, params);
        for (NodeId i = 0; i < g.n; ++i)
            CHECK(mf.values[static_cast<std::size_t>(i)] <=
                  tb.values[static_cast<std::size_t>(i)] + 1e-6);
    }
}
