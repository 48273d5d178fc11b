#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "cbench/errors.hpp"
#include "cbench/graph.hpp"

namespace cbench {

// Step direction along a walk: forward follows the edge, backward goes
// against it. Between two given nodes only one of the two edges can exist
// (tiers are ordered), so a node sequence determines its directions.
enum class Dir { forward, backward };

struct Path {
    std::vector<int> nodes;
    std::vector<Dir> dirs;

    bool all_forward() const {
        for (Dir d : dirs)
            if (d != Dir::forward) return false;
        return true;
    }

    bool operator==(const Path&) const = default;
};

inline bool path_less(const Path& a, const Path& b) { return a.nodes < b.nodes; }

namespace detail {

inline void check_pair(const TieredDag& g, int x, int y) {
    if (x < 0 || x >= g.node_count() || y < 0 || y >= g.node_count())
        throw std::out_of_range("unknown node id");
    if (x == y) throw ContractError("treatment and outcome must differ");
}

} // namespace detail

// All simple directed paths from x to y, in lexicographic node-id order.
inline std::vector<Path> enumerate_causal_paths(const TieredDag& g, int x, int y) {
    detail::check_pair(g, x, y);
    std::vector<Path> out;
    std::vector<int> walk{x};
    std::vector<bool> seen(static_cast<size_t>(g.node_count()), false);
    seen[static_cast<size_t>(x)] = true;

    auto dfs = [&](auto&& self, int v) -> void {
        if (v == y) {
            Path p;
            p.nodes = walk;
            p.dirs.assign(walk.size() - 1, Dir::forward);
            out.push_back(std::move(p));
            return;
        }
        for (int w : g.children(v)) {
            if (seen[static_cast<size_t>(w)]) continue;
            seen[static_cast<size_t>(w)] = true;
            walk.push_back(w);
            self(self, w);
            walk.pop_back();
            seen[static_cast<size_t>(w)] = false;
        }
    };
    dfs(dfs, x);
    std::sort(out.begin(), out.end(), path_less);
    return out;
}

// All simple undirected paths from x to y whose first step enters x, i.e.
// traverses an edge pointing into x. Directions are recorded per step.
inline std::vector<Path> enumerate_backdoor_paths(const TieredDag& g, int x, int y) {
    detail::check_pair(g, x, y);
    std::vector<Path> out;
    std::vector<int> walk{x};
    std::vector<Dir> dirs;
    std::vector<bool> seen(static_cast<size_t>(g.node_count()), false);
    seen[static_cast<size_t>(x)] = true;

    auto dfs = [&](auto&& self, int v) -> void {
        if (v == y) {
            out.push_back(Path{walk, dirs});
            return;
        }
        auto step = [&](int w, Dir d) {
            if (seen[static_cast<size_t>(w)]) return;
            seen[static_cast<size_t>(w)] = true;
            walk.push_back(w);
            dirs.push_back(d);
            self(self, w);
            dirs.pop_back();
            walk.pop_back();
            seen[static_cast<size_t>(w)] = false;
        };
        for (int w : g.children(v)) step(w, Dir::forward);
        for (int w : g.parents(v)) step(w, Dir::backward);
    };

    // First step restricted to edges into x.
    for (int w : g.parents(x)) {
        seen[static_cast<size_t>(w)] = true;
        walk.push_back(w);
        dirs.push_back(Dir::backward);
        dfs(dfs, w);
        dirs.pop_back();
        walk.pop_back();
        seen[static_cast<size_t>(w)] = false;
    }
    std::sort(out.begin(), out.end(), path_less);
    return out;
}

// Standard d-separation blocking: some interior triple is a chain or fork
// whose middle node is controlled, or a collider whose middle node and all
// of its descendants are uncontrolled.
inline bool is_path_blocked(const TieredDag& g, const Path& path, const std::set<int>& z) {
    if (path.nodes.size() < 2 || path.dirs.size() + 1 != path.nodes.size())
        throw ContractError("malformed path");
    for (size_t k = 0; k < path.dirs.size(); ++k) {
        int a = path.nodes[k], b = path.nodes[k + 1];
        bool ok = path.dirs[k] == Dir::forward ? g.has_edge(a, b) : g.has_edge(b, a);
        if (!ok) throw ContractError("path step has no matching edge");
    }
    if (z.count(path.nodes.front()) || z.count(path.nodes.back()))
        throw ContractError("controls may not include the path endpoints");
    for (size_t k = 1; k + 1 < path.nodes.size(); ++k) {
        int m = path.nodes[k];
        bool into_left = path.dirs[k - 1] == Dir::forward;
        bool into_right = path.dirs[k] == Dir::backward;
        bool collider = into_left && into_right;
        if (collider) {
            if (z.count(m)) continue;
            auto desc = g.descendants(m);
            bool opened = false;
            for (int d : desc)
                if (z.count(d)) opened = true;
            if (!opened) return true;
        } else {
            if (z.count(m)) return true;
        }
    }
    return false;
}

// Pearl backdoor criterion: z contains no descendant of x and blocks every
// backdoor path from x to y.
inline bool is_valid_adjustment_set(const TieredDag& g, int x, int y, const std::set<int>& z) {
    detail::check_pair(g, x, y);
    if (z.count(x) || z.count(y))
        throw ContractError("adjustment set may not contain treatment or outcome");
    for (int v : z)
        if (v < 0 || v >= g.node_count()) throw std::out_of_range("unknown node id in set");
    auto desc = g.descendants(x);
    for (int v : z)
        if (desc.count(v)) return false;
    for (const Path& p : enumerate_backdoor_paths(g, x, y))
        if (!is_path_blocked(g, p, z)) return false;
    return true;
}

struct AdjustmentGroundTruth {
    int treatment = -1;
    int outcome = -1;
    // Inclusion-minimal valid sets, sorted by size then lexicographically.
    // Empty iff no valid set within the size bound exists.
    std::vector<std::set<int>> minimal_sets;

    bool operator==(const AdjustmentGroundTruth&) const = default;
};

struct AdjustmentSearchLimits {
    int max_size = 4;
    int max_candidates = 25;
    long max_paths = 10000;
};

// Size-ascending subset search over all nodes except x, y and descendants
// of x. Exceeding the configured budget raises BudgetError rather than
// truncating the result.
inline AdjustmentGroundTruth enumerate_minimal_adjustment_sets(
    const TieredDag& g, int x, int y, const AdjustmentSearchLimits& limits = {}) {
    detail::check_pair(g, x, y);
    auto desc_x = g.descendants(x);
    std::vector<int> candidates;
    for (int v = 0; v < g.node_count(); ++v)
        if (v != x && v != y && !desc_x.count(v)) candidates.push_back(v);
    if (static_cast<int>(candidates.size()) > limits.max_candidates)
        throw BudgetError("adjustment search over " + std::to_string(candidates.size()) +
                          " candidates exceeds the budget of " +
                          std::to_string(limits.max_candidates));

    auto paths = enumerate_backdoor_paths(g, x, y);
    if (static_cast<long>(paths.size()) > limits.max_paths)
        throw BudgetError("backdoor path count " + std::to_string(paths.size()) +
                          " exceeds the budget of " + std::to_string(limits.max_paths));

    // Descendant sets of interior nodes, for the collider rule.
    std::vector<std::set<int>> desc(static_cast<size_t>(g.node_count()));
    for (int v = 0; v < g.node_count(); ++v) desc[static_cast<size_t>(v)] = g.descendants(v);

    auto blocked = [&](const Path& p, const std::set<int>& z) {
        for (size_t k = 1; k + 1 < p.nodes.size(); ++k) {
            int m = p.nodes[k];
            bool collider = p.dirs[k - 1] == Dir::forward && p.dirs[k] == Dir::backward;
            if (collider) {
                if (z.count(m)) continue;
                bool opened = false;
                for (int d : desc[static_cast<size_t>(m)])
                    if (z.count(d)) opened = true;
                if (!opened) return true;
            } else if (z.count(m)) {
                return true;
            }
        }
        return false;
    };

    AdjustmentGroundTruth truth;
    truth.treatment = x;
    truth.outcome = y;

    auto is_superset_of_found = [&](const std::set<int>& z) {
        for (const auto& m : truth.minimal_sets)
            if (std::includes(z.begin(), z.end(), m.begin(), m.end())) return true;
        return false;
    };

    int n = static_cast<int>(candidates.size());
    std::vector<int> pick;
    auto try_set = [&](const std::set<int>& z) {
        if (is_superset_of_found(z)) return;
        for (const Path& p : paths)
            if (!blocked(p, z)) return;
        truth.minimal_sets.push_back(z);
    };
    auto combos = [&](auto&& self, int start, int remaining) -> void {
        if (remaining == 0) {
            try_set(std::set<int>(pick.begin(), pick.end()));
            return;
        }
        for (int i = start; i <= n - remaining; ++i) {
            pick.push_back(candidates[static_cast<size_t>(i)]);
            self(self, i + 1, remaining - 1);
            pick.pop_back();
        }
    };
    int max_size = std::min(limits.max_size, n);
    for (int size = 0; size <= max_size; ++size) combos(combos, 0, size);

    std::sort(truth.minimal_sets.begin(), truth.minimal_sets.end(),
              [](const std::set<int>& a, const std::set<int>& b) {
                  if (a.size() != b.size()) return a.size() < b.size();
                  return a < b;
              });
    return truth;
}

} // namespace cbench
