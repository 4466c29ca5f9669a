#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "cdn/rand_util.hpp"
#include "cdn/topology.hpp"

using namespace cdn;

namespace {

// Independent oracle: Bellman-Ford from one source over the edge list.
std::vector<double> bellman_ford(const WeightedGraph& g, NodeId src) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.node_count(), inf);
    dist[src] = 0.0;
    for (std::size_t pass = 0; pass + 1 < g.node_count(); ++pass) {
        bool changed = false;
        for (const Edge& e : g.edges()) {
            if (dist[e.u] + e.length < dist[e.v]) {
                dist[e.v] = dist[e.u] + e.length;
                changed = true;
            }
            if (dist[e.v] + e.length < dist[e.u]) {
                dist[e.u] = dist[e.v] + e.length;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return dist;
}

Errc catch_code(const std::string& text) {
    try {
        load_graph(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a parse error");
    return Errc::malformed_line;
}

}  // namespace

TEST_CASE("load_graph parses a unit path") {
    WeightedGraph g = load_graph("3\n0 1 1.0\n1 2 1.0");
    CHECK(g.node_count() == 3);
    CHECK(g.edge_count() == 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 2));
    CHECK_FALSE(g.has_edge(0, 2));
}

TEST_CASE("load_graph rejects bad input with distinct codes and line numbers") {
    CHECK(catch_code("2\n0 1 -1") == Errc::negative_length);
    CHECK(catch_code("2\n0 1") == Errc::malformed_line);
    CHECK(catch_code("2\n0 1 1\n0 1 2") == Errc::duplicate_edge);
    CHECK(catch_code("2\n0 5 1") == Errc::id_out_of_range);
    CHECK(catch_code("3\n1 0 1") == Errc::malformed_line);  // u < v required
    CHECK(catch_code("2\n0 0 1") == Errc::malformed_line);  // self-loop
    CHECK(catch_code("x\n") == Errc::malformed_line);
    try {
        load_graph("3\n0 1 1\n0 2 -3");
    } catch (const Error& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("figure-2 fixture: 7 nodes, 6 unit edges") {
    WeightedGraph g = load_graph_file(std::string(CDN_DATA_DIR) + "/figure2.graph");
    CHECK(g.node_count() == 7);
    CHECK(g.edge_count() == 6);
    for (const Edge& e : g.edges()) CHECK(e.length == 1.0);
    CHECK(g.label(0) == "A");
    CHECK(g.label(6) == "G");
    CHECK(g.connected());
}

TEST_CASE("serialize/load round trip preserves the graph exactly") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        WeightedGraph g = random_graph(12, 0.3, seed);
        g.set_label(3, "core router");
        WeightedGraph back = load_graph(serialize_graph(g));
        CHECK(back == g);
    }
}

TEST_CASE("all_pairs_distances basics") {
    WeightedGraph path = load_graph("3\n0 1 1\n1 2 1");
    DistanceMatrix d = all_pairs_distances(path);
    CHECK(d(0, 2) == 2.0);
    CHECK(d(2, 0) == 2.0);
    CHECK(d(1, 1) == 0.0);

    WeightedGraph single(1);
    DistanceMatrix one = all_pairs_distances(single);
    CHECK(one.size() == 1);
    CHECK(one(0, 0) == 0.0);

    WeightedGraph disconnected(3);
    disconnected.add_edge(0, 1, 1.0);
    CHECK_THROWS_AS(all_pairs_distances(disconnected), Error);
    try {
        all_pairs_distances(disconnected);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::disconnected_graph);
    }
}

TEST_CASE("all_pairs_distances agrees with per-source Bellman-Ford") {
    std::mt19937_64 length_rng(77);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        WeightedGraph g = random_graph(10, 0.3, seed);
        DistanceMatrix d = all_pairs_distances(g);
        for (NodeId src = 0; src < g.node_count(); ++src) {
            auto oracle = bellman_ford(g, src);
            for (NodeId v = 0; v < g.node_count(); ++v)
                CHECK(d(src, v) == doctest::Approx(oracle[v]).epsilon(1e-12));
        }
    }
}

TEST_CASE("distance matrix laws: zero diagonal, symmetry, triangle inequality") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        WeightedGraph g = random_graph(14, 0.25, seed);
        DistanceMatrix d = all_pairs_distances(g);
        const std::size_t n = d.size();
        for (NodeId u = 0; u < n; ++u) {
            CHECK(d(u, u) == 0.0);
            for (NodeId v = 0; v < n; ++v) {
                CHECK(d(u, v) == d(v, u));
                for (NodeId w = 0; w < n; ++w)
                    CHECK(d(u, w) <= d(u, v) + d(v, w) + 1e-9);
            }
        }
    }
}

TEST_CASE("random_graph determinism and connectivity") {
    WeightedGraph a = random_graph(50, 0.2, 42);
    WeightedGraph b = random_graph(50, 0.2, 42);
    CHECK(a == b);
    CHECK(a.connected());

    WeightedGraph single = random_graph(1, 0.5, 7);
    CHECK(single.node_count() == 1);
    CHECK(single.edge_count() == 0);

    // sparse draws must be stitched together
    WeightedGraph sparse = random_graph(40, 0.01, 3);
    CHECK(sparse.connected());
}

TEST_CASE("random_graph edge count matches the binomial expectation") {
    const double p = 0.2;
    const double pairs = 50.0 * 49.0 / 2.0;
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed)
        total += double(random_graph(50, p, seed).edge_count());
    double mean = total / 100.0;
    CHECK(mean == doctest::Approx(p * pairs).epsilon(0.10));
}

TEST_CASE("outdegrees ordering") {
    // star: hub 0 with 4 leaves
    WeightedGraph star(5);
    for (NodeId leaf = 1; leaf <= 4; ++leaf) star.add_edge(0, leaf, 1.0);
    auto ranked = outdegrees(star);
    CHECK(ranked.front().first == 0);
    CHECK(ranked.front().second == 4);

    WeightedGraph path = load_graph("3\n0 1 1\n1 2 1");
    auto path_ranked = outdegrees(path);
    CHECK(path_ranked[0] == std::pair<NodeId, std::size_t>{1, 2});
    CHECK(path_ranked[1] == std::pair<NodeId, std::size_t>{0, 1});
    CHECK(path_ranked[2] == std::pair<NodeId, std::size_t>{2, 1});

    // recount from the edge list
    WeightedGraph g = random_graph(20, 0.3, 9);
    std::vector<std::size_t> recount(g.node_count(), 0);
    for (const Edge& e : g.edges()) {
        ++recount[e.u];
        ++recount[e.v];
    }
    for (auto [node, degree] : outdegrees(g)) CHECK(degree == recount[node]);
}
