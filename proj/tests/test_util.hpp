#ifndef LCSMD_TEST_UTIL_HPP
#define LCSMD_TEST_UTIL_HPP

// Test-side oracles, kept independent of the library's traversal code on
// purpose: d-separation here is decided by brute-force path enumeration.

#include "lcsmd/graph.hpp"

#include <vector>

namespace lcsmd::testutil {

// All simple paths between a and b in the underlying undirected skeleton.
inline void all_paths_rec(const MGraph& g, int cur, int target, std::uint64_t visited,
                          std::vector<int>& path, std::vector<std::vector<int>>& out) {
    if (cur == target) {
        out.push_back(path);
        return;
    }
    for (int nxt = 0; nxt < g.num_nodes(); ++nxt) {
        if (bits::has(visited, nxt)) continue;
        if (!g.has_edge(cur, nxt) && !g.has_edge(nxt, cur)) continue;
        path.push_back(nxt);
        all_paths_rec(g, nxt, target, visited | bits::one(nxt), path, out);
        path.pop_back();
    }
}

inline std::vector<std::vector<int>> all_paths(const MGraph& g, int a, int b) {
    std::vector<std::vector<int>> out;
    std::vector<int> path{a};
    all_paths_rec(g, a, b, bits::one(a), path, out);
    return out;
}

// chain/fork blocked when the middle node is conditioned; collider blocked
// unless it or a descendant is conditioned
inline bool path_active(const MGraph& g, const std::vector<int>& path, std::uint64_t z) {
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        int prev = path[i - 1], mid = path[i], next = path[i + 1];
        bool collider = g.has_edge(prev, mid) && g.has_edge(next, mid);
        if (collider) {
            std::uint64_t act = g.descendants_mask(mid) | bits::one(mid);
            if (!(act & z)) return false;
        } else {
            if (bits::has(z, mid)) return false;
        }
    }
    return true;
}

inline bool d_separated_enumeration(const MGraph& g, int a, int b, std::uint64_t z) {
    for (const auto& path : all_paths(g, a, b))
        if (path_active(g, path, z)) return false;
    return true;
}

// All DAGs whose edges respect the index order (every DAG is a relabeling of
// one of these, and d-separation is label-invariant).
inline std::vector<std::pair<int, int>> forward_edge_slots(int n) {
    std::vector<std::pair<int, int>> slots;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) slots.emplace_back(a, b);
    return slots;
}

inline std::vector<std::pair<int, int>> edges_from_mask(const std::vector<std::pair<int, int>>& slots,
                                                        std::uint64_t mask) {
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < slots.size(); ++i)
        if ((mask >> i) & 1ULL) out.push_back(slots[i]);
    return out;
}

inline std::vector<lcsmd::Node> substantive_nodes(int n) {
    std::vector<lcsmd::Node> nodes;
    for (int i = 0; i < n; ++i)
        nodes.push_back({"V" + std::to_string(i + 1), NodeKind::Substantive, -1});
    return nodes;
}

} // namespace lcsmd::testutil

#endif
