#ifndef LCSMD_GRAPH_HPP
#define LCSMD_GRAPH_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lcsmd {

// Graphs are immutable after construction; "mutating" operations return new
// values. Adjacency is kept as one 64-bit row per node, which caps graphs at
// 64 nodes (plenty: the intended workloads stay under ~50).
inline constexpr int kMaxNodes = 64;

enum class NodeKind { Substantive, Indicator };

struct Node {
    std::string name;
    NodeKind kind = NodeKind::Substantive;
    int of = -1; // for indicators: index of the substantive variable
};

struct PathQuery {
    int origin = -1;
    int target = -1;
    std::uint64_t conditioning = 0; // bitmask over node indices
};

class orientation_rejected : public std::runtime_error {
public:
    explicit orientation_rejected(const std::string& what) : std::runtime_error(what) {}
};

namespace bits {
inline bool has(std::uint64_t m, int i) { return (m >> i) & 1ULL; }
inline std::uint64_t one(int i) { return 1ULL << i; }
inline int count(std::uint64_t m) { return __builtin_popcountll(m); }
template <typename F>
void for_each(std::uint64_t m, F&& f) {
    while (m) {
        int i = __builtin_ctzll(m);
        f(i);
        m &= m - 1;
    }
}
inline std::vector<int> to_vector(std::uint64_t m) {
    std::vector<int> out;
    for_each(m, [&](int i) { out.push_back(i); });
    return out;
}
inline std::uint64_t from(const std::vector<int>& v) {
    std::uint64_t m = 0;
    for (int i : v) m |= one(i);
    return m;
}
} // namespace bits

// A missingness DAG over substantive variables and their indicators.
// Construction validates: acyclicity, indicator nodes are sinks, no edges
// between indicators, at most one indicator per substantive variable.
class MGraph {
public:
    MGraph(std::vector<Node> nodes, const std::vector<std::pair<int, int>>& edges);

    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    const Node& node(int i) const { return nodes_.at(i); }
    const std::vector<Node>& nodes() const { return nodes_; }

    bool has_edge(int a, int b) const { return bits::has(children_[a], b); }
    std::uint64_t children_mask(int v) const { return children_[v]; }
    std::uint64_t parents_mask(int v) const { return parents_[v]; }
    std::uint64_t descendants_mask(int v) const; // v excluded
    std::uint64_t ancestors_mask(int v) const;   // v excluded

    bool is_substantive(int v) const { return nodes_[v].kind == NodeKind::Substantive; }
    // index of R_v, or -1 when v is fully observed
    int indicator_of(int v) const { return indicator_of_.at(v); }
    bool partially_observed(int v) const { return is_substantive(v) && indicator_of_[v] >= 0; }
    std::vector<int> substantive_nodes() const;
    std::vector<int> indicator_nodes() const;
    int index_of(const std::string& name) const;

    std::vector<std::pair<int, int>> edges() const;

    void check_node(int v) const;

private:
    std::vector<Node> nodes_;
    std::vector<std::uint64_t> children_;
    std::vector<std::uint64_t> parents_;
    std::vector<int> indicator_of_;
    friend bool d_separated(const MGraph&, const PathQuery&);
};

// A partially directed m-graph: mixed directed/undirected edges among
// substantive nodes, directed edges into indicators.
class Pattern {
public:
    Pattern(std::vector<Node> nodes,
            const std::vector<std::pair<int, int>>& directed,
            const std::vector<std::pair<int, int>>& undirected);

    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    const Node& node(int i) const { return nodes_.at(i); }
    const std::vector<Node>& nodes() const { return nodes_; }
    int index_of(const std::string& name) const;

    bool has_directed(int a, int b) const { return bits::has(directed_[a], b); }
    bool has_undirected(int a, int b) const { return bits::has(undirected_[a], b); }
    bool adjacent(int a, int b) const { return has_directed(a, b) || has_directed(b, a) || has_undirected(a, b); }
    std::uint64_t directed_out(int v) const { return directed_[v]; }
    std::uint64_t directed_in(int v) const { return directed_in_[v]; }
    std::uint64_t undirected_mask(int v) const { return undirected_[v]; }
    std::uint64_t adjacency_mask(int v) const { return directed_[v] | directed_in_[v] | undirected_[v]; }

    bool is_substantive(int v) const { return nodes_[v].kind == NodeKind::Substantive; }
    int indicator_of(int v) const { return indicator_of_.at(v); }
    std::vector<int> substantive_nodes() const;
    std::vector<int> indicator_nodes() const;

    // true iff a directed path a ~> b exists in the directed sub-graph
    bool directed_path(int a, int b) const;

    std::vector<std::pair<int, int>> directed_edges() const;
    std::vector<std::pair<int, int>> undirected_edges() const;

    Pattern with_directed_removed(int a, int b) const;
    Pattern with_undirected_removed(int a, int b) const;
    Pattern with_directed_added(int a, int b) const;
    Pattern with_indicator_parents(int indicator, const std::vector<int>& parents) const;

private:
    std::vector<Node> nodes_;
    std::vector<std::uint64_t> directed_;    // row a: bits of b with a -> b
    std::vector<std::uint64_t> directed_in_; // row b: bits of a with a -> b
    std::vector<std::uint64_t> undirected_;  // symmetric
    std::vector<int> indicator_of_;
    void validate() const;
};

// ---- operations -----------------------------------------------------------

std::vector<int> descendants(const MGraph& g, int v);

bool d_separated(const MGraph& g, const PathQuery& q);
bool d_separated(const MGraph& g, int origin, int target, const std::vector<int>& conditioning);

// ANM identifiability of the pair (parents -> child) under missingness:
// non-identifiable iff some R_{V_k}, k in {child} ∪ parents, is a descendant
// of the child.
bool anm_identifiable_in_missing(const MGraph& g, int child, const std::vector<int>& parents);

// Paths V_j - V_i ... R_{V_i}/R_{V_j} whose undirected steps are orientable
// without creating a directed cycle. Each path is a node index sequence
// starting at the undirected neighbor V_j.
std::vector<std::vector<int>> potential_nonidentifiable_paths(const Pattern& p, int v);

Pattern skeleton_of(const MGraph& g);

// Moves {from,to} from the undirected to the directed edge set; throws
// orientation_rejected when that would create a directed cycle.
Pattern orient_edge(const Pattern& p, int from, int to);

} // namespace lcsmd

#endif
