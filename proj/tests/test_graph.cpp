#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "cbench/graph.hpp"

using namespace cbench;

namespace {

TieredDag chain3() {
    return TieredDag(GraphShape{{1, 1, 1}}, {{0, 1}, {1, 2}});
}

// Transitive closure by repeated edge relaxation, independent of the
// DFS-based descendants().
std::set<int> closure_oracle(const TieredDag& g, int v) {
    int n = g.node_count();
    std::vector<std::vector<bool>> reach(static_cast<size_t>(n),
                                         std::vector<bool>(static_cast<size_t>(n), false));
    for (auto [a, b] : g.edges()) reach[static_cast<size_t>(a)][static_cast<size_t>(b)] = true;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto [a, b] : g.edges())
            for (int c = 0; c < n; ++c)
                if (reach[static_cast<size_t>(b)][static_cast<size_t>(c)] &&
                    !reach[static_cast<size_t>(a)][static_cast<size_t>(c)]) {
                    reach[static_cast<size_t>(a)][static_cast<size_t>(c)] = true;
                    changed = true;
                }
    }
    std::set<int> out;
    for (int c = 0; c < n; ++c)
        if (reach[static_cast<size_t>(v)][static_cast<size_t>(c)]) out.insert(c);
    return out;
}

} // namespace

TEST_CASE("shape parsing and display") {
    REQUIRE(GraphShape::parse("2x5").tier_sizes == std::vector<int>{2, 2, 2, 2, 2});
    REQUIRE(GraphShape::parse("2*5").display() == "2x5");
    REQUIRE(GraphShape::parse("1,2,3").tier_sizes == std::vector<int>{1, 2, 3});
    REQUIRE(GraphShape::parse("1,2,3").display() == "1,2,3");
    REQUIRE_THROWS_AS(GraphShape::parse("0x5"), ValidationError);
    REQUIRE_THROWS_AS(GraphShape::parse("abc"), ValidationError);
    REQUIRE_THROWS_AS(GraphShape({{3}}).validate(), ValidationError);
}

TEST_CASE("two-node closure edge") {
    for (uint64_t seed : {0ull, 1ull, 99ull}) {
        auto g = generate_graph(GraphShape{{1, 1}}, 0, {}, seed);
        REQUIRE(g.edges() == std::vector<Edge>{{0, 1}});
    }
}

TEST_CASE("generated graphs satisfy tier monotonicity and closure") {
    auto g = generate_graph(GraphShape{{2, 2, 2, 2, 2}}, 3, {0.1, 0.1, 0.1}, 7);
    for (auto [u, v] : g.edges()) REQUIRE(g.tier_of(u) < g.tier_of(v));
    REQUIRE(g.is_closed());
    for (int v : g.roots()) REQUIRE(g.tier_of(v) == 0);
}

TEST_CASE("generation is deterministic in its inputs") {
    auto a = generate_graph(GraphShape{{2, 2, 2, 2, 2, 2}}, 5, {0.1, 0.1, 0.1}, 1234);
    auto b = generate_graph(GraphShape{{2, 2, 2, 2, 2, 2}}, 5, {0.1, 0.1, 0.1}, 1234);
    auto c = generate_graph(GraphShape{{2, 2, 2, 2, 2, 2}}, 5, {0.1, 0.1, 0.1}, 1235);
    REQUIRE(a.edges() == b.edges());
    REQUIRE(a.edges() != c.edges());
}

TEST_CASE("invalid generation inputs are rejected") {
    REQUIRE_THROWS_AS(generate_graph(GraphShape{{}}, 3, {0.1, 0.1, 0.1}, 1), ValidationError);
    REQUIRE_THROWS_AS(generate_graph(GraphShape{{1, 0}}, 3, {0.1, 0.1, 0.1}, 1), ValidationError);
    REQUIRE_THROWS_AS(generate_graph(GraphShape{{1, 1}}, 3, {1.5, 0.1, 0.1}, 1), ValidationError);
    REQUIRE_THROWS_AS(TieredDag(GraphShape{{1, 1}}, {{1, 0}}), ValidationError);
    REQUIRE_THROWS_AS(TieredDag(GraphShape{{1, 1}}, {{0, 5}}), ValidationError);
}

TEST_CASE("complexity stats on the three junction archetypes") {
    auto stats = complexity_stats(chain3());
    REQUIRE(stats.avg_indegree == Catch::Approx(2.0 / 3.0));
    REQUIRE(stats.chains == 1);
    REQUIRE(stats.forks == 0);
    REQUIRE(stats.colliders == 0);

    TieredDag fork(GraphShape{{1, 2}}, {{0, 1}, {0, 2}});
    stats = complexity_stats(fork);
    REQUIRE(stats.avg_indegree == Catch::Approx(2.0 / 3.0));
    REQUIRE(stats.chains == 0);
    REQUIRE(stats.forks == 1);
    REQUIRE(stats.colliders == 0);

    TieredDag collider(GraphShape{{2, 1}}, {{0, 2}, {1, 2}});
    stats = complexity_stats(collider);
    REQUIRE(stats.avg_indegree == Catch::Approx(2.0 / 3.0));
    REQUIRE(stats.chains == 0);
    REQUIRE(stats.forks == 0);
    REQUIRE(stats.colliders == 1);
}

TEST_CASE("graph queries on a chain") {
    auto g = chain3();
    REQUIRE(g.descendants(0) == std::set<int>{1, 2});
    REQUIRE(g.roots() == std::set<int>{0});
    REQUIRE(g.parents(2) == std::vector<int>{1});
    REQUIRE(g.topological_order() == std::vector<int>{0, 1, 2});
    REQUIRE_THROWS_AS(g.parents(9), std::out_of_range);
}

TEST_CASE("descendants match a transitive-closure oracle on seeded graphs") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        auto g = generate_graph(GraphShape{{2, 2, 2, 2, 2}}, 4, {0.1, 0.1, 0.1}, seed);
        for (int v = 0; v < g.node_count(); ++v) REQUIRE(g.descendants(v) == closure_oracle(g, v));
    }
}

TEST_CASE("mean indegree of the default 1x5 batch sits near the calibration target") {
    // 200 graphs, iterations cycling 3..6; target band [1.0, 1.5].
    double total = 0.0;
    int count = 0;
    for (uint64_t seed = 0; seed < 200; ++seed) {
        int iters = 3 + static_cast<int>(seed % 4);
        auto g = generate_graph(GraphShape{{1, 1, 1, 1, 1}}, iters, {0.1, 0.1, 0.1}, seed);
        total += complexity_stats(g).avg_indegree;
        ++count;
    }
    double mean = total / count;
    REQUIRE(mean > 1.0);
    REQUIRE(mean < 1.5);
}

TEST_CASE("mean edge count is non-decreasing in iterations") {
    GraphShape shape{{2, 2, 2, 2, 2}};
    std::map<int, double> mean_edges;
    for (int iters : {3, 4, 5, 6}) {
        double total = 0.0;
        for (uint64_t seed = 0; seed < 250; ++seed)
            total += generate_graph(shape, iters, {0.1, 0.1, 0.1}, seed).edge_count();
        mean_edges[iters] = total / 250.0;
    }
    REQUIRE(mean_edges[3] <= mean_edges[4]);
    REQUIRE(mean_edges[4] <= mean_edges[5]);
    REQUIRE(mean_edges[5] <= mean_edges[6]);
}
