#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cbench/errors.hpp"
#include "cbench/rng.hpp"

namespace cbench {

// Node count per tier, index 0 = highest tier. Edges only run from higher
// tiers to lower ones, so any edge set over a shape is acyclic.
struct GraphShape {
    std::vector<int> tier_sizes;

    int tiers() const { return static_cast<int>(tier_sizes.size()); }

    int node_count() const {
        int n = 0;
        for (int s : tier_sizes) n += s;
        return n;
    }

    void validate() const {
        if (tier_sizes.size() < 2)
            throw ValidationError("graph shape needs at least 2 tiers");
        for (int s : tier_sizes)
            if (s < 1) throw ValidationError("graph shape tier sizes must be >= 1");
    }

    // "2x5" when uniform, otherwise the explicit list "1,2,3".
    std::string display() const {
        bool uniform = true;
        for (int s : tier_sizes)
            if (s != tier_sizes.front()) uniform = false;
        if (uniform && !tier_sizes.empty())
            return std::to_string(tier_sizes.front()) + "x" + std::to_string(tiers());
        std::string out;
        for (size_t i = 0; i < tier_sizes.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(tier_sizes[i]);
        }
        return out;
    }

    // Accepts "2x5", "2*5", or an explicit list "2,2,2,2,2".
    static GraphShape parse(std::string_view text) {
        GraphShape shape;
        auto to_int = [&](std::string_view s) {
            if (s.empty()) throw ValidationError("bad shape: '" + std::string(text) + "'");
            int v = 0;
            for (char c : s) {
                if (c < '0' || c > '9')
                    throw ValidationError("bad shape: '" + std::string(text) + "'");
                v = v * 10 + (c - '0');
            }
            return v;
        };
        auto x = text.find_first_of("x*");
        if (x != std::string_view::npos) {
            int per = to_int(text.substr(0, x));
            int tiers = to_int(text.substr(x + 1));
            shape.tier_sizes.assign(static_cast<size_t>(tiers), per);
        } else {
            size_t start = 0;
            while (start <= text.size()) {
                size_t comma = text.find(',', start);
                size_t end = comma == std::string_view::npos ? text.size() : comma;
                shape.tier_sizes.push_back(to_int(text.substr(start, end - start)));
                if (comma == std::string_view::npos) break;
                start = comma + 1;
            }
        }
        shape.validate();
        return shape;
    }

    bool operator==(const GraphShape&) const = default;
};

struct JunctionProbabilities {
    double fork = 0.0;
    double chain = 0.0;
    double collider = 0.0;

    void validate() const {
        for (double p : {fork, chain, collider})
            if (!(p >= 0.0 && p <= 1.0))
                throw ValidationError("junction probabilities must lie in [0,1]");
    }

    bool operator==(const JunctionProbabilities&) const = default;
};

struct GenParams {
    GraphShape shape;
    int iterations = 0;
    JunctionProbabilities probs;
    uint64_t seed = 0;
};

using Edge = std::pair<int, int>;

// Immutable tiered DAG. Node ids are dense 0..N-1, assigned tier by tier,
// so ascending id order is already a topological order.
class TieredDag {
  public:
    TieredDag(GraphShape shape, const std::set<Edge>& edges, GenParams params = {})
        : shape_(std::move(shape)), params_(std::move(params)) {
        shape_.validate();
        int n = shape_.node_count();
        tier_of_.reserve(static_cast<size_t>(n));
        for (int t = 0; t < shape_.tiers(); ++t)
            for (int k = 0; k < shape_.tier_sizes[static_cast<size_t>(t)]; ++k)
                tier_of_.push_back(t);
        out_.assign(static_cast<size_t>(n), {});
        in_.assign(static_cast<size_t>(n), {});
        edges_.assign(edges.begin(), edges.end());
        for (auto [u, v] : edges_) {
            if (u < 0 || u >= n || v < 0 || v >= n)
                throw ValidationError("edge references unknown node id");
            if (tier_of_[static_cast<size_t>(u)] >= tier_of_[static_cast<size_t>(v)])
                throw ValidationError("edge must run from a higher tier to a lower one");
            out_[static_cast<size_t>(u)].push_back(v);
            in_[static_cast<size_t>(v)].push_back(u);
        }
        for (auto& a : out_) std::sort(a.begin(), a.end());
        for (auto& a : in_) std::sort(a.begin(), a.end());
    }

    const GraphShape& shape() const { return shape_; }
    const GenParams& gen_params() const { return params_; }
    int node_count() const { return static_cast<int>(tier_of_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }

    int tier_of(int v) const {
        check_node(v);
        return tier_of_[static_cast<size_t>(v)];
    }

    std::vector<int> tier_nodes(int tier) const {
        std::vector<int> out;
        for (int v = 0; v < node_count(); ++v)
            if (tier_of_[static_cast<size_t>(v)] == tier) out.push_back(v);
        return out;
    }

    const std::vector<int>& children(int v) const {
        check_node(v);
        return out_[static_cast<size_t>(v)];
    }

    const std::vector<int>& parents(int v) const {
        check_node(v);
        return in_[static_cast<size_t>(v)];
    }

    bool has_edge(int u, int v) const {
        check_node(u);
        const auto& a = out_[static_cast<size_t>(u)];
        return std::binary_search(a.begin(), a.end(), v);
    }

    // All nodes strictly below v along directed edges; v itself excluded.
    std::set<int> descendants(int v) const {
        check_node(v);
        std::set<int> seen;
        std::vector<int> stack(children(v).begin(), children(v).end());
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            if (!seen.insert(u).second) continue;
            for (int w : children(u)) stack.push_back(w);
        }
        return seen;
    }

    std::set<int> roots() const {
        std::set<int> out;
        for (int v = 0; v < node_count(); ++v)
            if (in_[static_cast<size_t>(v)].empty()) out.insert(v);
        return out;
    }

    std::vector<int> topological_order() const {
        std::vector<int> order(static_cast<size_t>(node_count()));
        for (int v = 0; v < node_count(); ++v) order[static_cast<size_t>(v)] = v;
        return order;
    }

    // True once every node outside tier 0 has at least one parent.
    bool is_closed() const {
        for (int v = 0; v < node_count(); ++v)
            if (tier_of_[static_cast<size_t>(v)] > 0 && in_[static_cast<size_t>(v)].empty())
                return false;
        return true;
    }

  private:
    void check_node(int v) const {
        if (v < 0 || v >= node_count())
            throw std::out_of_range("unknown node id " + std::to_string(v));
    }

    GraphShape shape_;
    GenParams params_;
    std::vector<int> tier_of_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
};

struct ComplexityStats {
    double avg_indegree = 0.0;
    long chains = 0;
    long forks = 0;
    long colliders = 0;

    bool operator==(const ComplexityStats&) const = default;
};

// Junction counts over the whole graph: chains are ordered composable edge
// pairs a->b->c, forks unordered {b->a, b->c}, colliders unordered {a->b, c->b}.
inline ComplexityStats complexity_stats(const TieredDag& g) {
    ComplexityStats s;
    for (int v = 0; v < g.node_count(); ++v) {
        long in = static_cast<long>(g.parents(v).size());
        long out = static_cast<long>(g.children(v).size());
        s.chains += in * out;
        s.forks += out * (out - 1) / 2;
        s.colliders += in * (in - 1) / 2;
    }
    s.avg_indegree = static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count());
    return s;
}

// Random tiered DAG. Per node and per iteration, three independent draws
// against probs attempt to add a fork (node->t1, node->t2), a chain
// (node->m, m->w with tier(node) < tier(m) < tier(w)) and a collider
// (node->c, u->c with tier(u) < tier(c), u != node), each skipped silently
// when no partners exist. Duplicate proposals collapse via set semantics.
// A closure pass then gives every orphan node outside tier 0 one parent
// drawn uniformly from the strictly higher tiers.
//
// Streams: junction draws for (node, iter) come from
// rng.child("junction").child(node).child(iter); the closure parent for
// node v comes from rng.child("closure").child(v).
inline TieredDag generate_graph(const GraphShape& shape, int iterations,
                                const JunctionProbabilities& probs, uint64_t seed) {
    shape.validate();
    probs.validate();
    if (iterations < 0) throw ValidationError("iterations must be >= 0");

    const int tiers = shape.tiers();
    const int n = shape.node_count();
    std::vector<int> tier_of;
    std::vector<int> tier_first(static_cast<size_t>(tiers) + 1, 0);
    for (int t = 0; t < tiers; ++t) {
        tier_first[static_cast<size_t>(t) + 1] =
            tier_first[static_cast<size_t>(t)] + shape.tier_sizes[static_cast<size_t>(t)];
        for (int k = 0; k < shape.tier_sizes[static_cast<size_t>(t)]; ++k) tier_of.push_back(t);
    }
    // Nodes with tier > t are exactly ids [tier_first[t+1], n).
    auto below_count = [&](int t) { return n - tier_first[static_cast<size_t>(t) + 1]; };
    auto nth_below = [&](int t, uint64_t i) {
        return tier_first[static_cast<size_t>(t) + 1] + static_cast<int>(i);
    };
    auto above_count = [&](int t) { return tier_first[static_cast<size_t>(t)]; };

    std::set<Edge> edges;
    Rng rng(seed);
    Rng junction = rng.child("junction");
    for (int node = 0; node < n; ++node) {
        const int t = tier_of[static_cast<size_t>(node)];
        Rng per_node = junction.child(static_cast<uint64_t>(node));
        for (int iter = 0; iter < iterations; ++iter) {
            Rng r = per_node.child(static_cast<uint64_t>(iter));

            if (r.bernoulli(probs.fork) && below_count(t) >= 2) {
                uint64_t i = r.uniform(static_cast<uint64_t>(below_count(t)));
                uint64_t j = r.uniform(static_cast<uint64_t>(below_count(t)) - 1);
                if (j >= i) ++j;
                edges.emplace(node, nth_below(t, i));
                edges.emplace(node, nth_below(t, j));
            }

            if (r.bernoulli(probs.chain)) {
                // m must leave room for w below it, i.e. tier(m) <= tiers-2.
                int m_count = tier_first[static_cast<size_t>(tiers) - 1] -
                              tier_first[static_cast<size_t>(t) + 1];
                if (m_count > 0) {
                    int m = tier_first[static_cast<size_t>(t) + 1] +
                            static_cast<int>(r.uniform(static_cast<uint64_t>(m_count)));
                    int mt = tier_of[static_cast<size_t>(m)];
                    int w = nth_below(mt, r.uniform(static_cast<uint64_t>(below_count(mt))));
                    edges.emplace(node, m);
                    edges.emplace(m, w);
                }
            }

            if (r.bernoulli(probs.collider)) {
                // c needs a second parent u != node strictly above it. That
                // fails only for c in tier 1 when node is a lone top node,
                // so skip that tier in the candidate range.
                int c_lo = tier_first[static_cast<size_t>(t) + 1];
                if (node == 0 && tier_first[1] == 1 && c_lo == 1 && tiers > 1)
                    c_lo = tier_first[2];
                if (c_lo < n) {
                    int c = c_lo + static_cast<int>(r.uniform(static_cast<uint64_t>(n - c_lo)));
                    int ct = tier_of[static_cast<size_t>(c)];
                    // Nodes above c are ids [0, above_count(ct)); node is
                    // among them, so draw from the range minus one and skip
                    // over node.
                    int u = static_cast<int>(r.uniform(static_cast<uint64_t>(above_count(ct) - 1)));
                    if (u >= node) ++u;
                    edges.emplace(node, c);
                    edges.emplace(u, c);
                }
            }
        }
    }

    Rng closure = rng.child("closure");
    std::vector<bool> has_parent(static_cast<size_t>(n), false);
    for (auto& e : edges) has_parent[static_cast<size_t>(e.second)] = true;
    for (int v = tier_first[1]; v < n; ++v) {
        if (has_parent[static_cast<size_t>(v)]) continue;
        Rng r = closure.child(static_cast<uint64_t>(v));
        int t = tier_of[static_cast<size_t>(v)];
        int u = static_cast<int>(r.uniform(static_cast<uint64_t>(above_count(t))));
        edges.emplace(u, v);
    }

    return TieredDag(shape, edges, GenParams{shape, iterations, probs, seed});
}

} // namespace cbench
