#include "lcsmd/graph.hpp"

#include <algorithm>
#include <set>

namespace lcsmd {

namespace {

void check_names_unique(const std::vector<Node>& nodes) {
    std::set<std::string> seen;
    for (const auto& n : nodes) {
        if (!seen.insert(n.name).second)
            throw std::invalid_argument("duplicate node name: " + n.name);
    }
}

void check_indicator_refs(const std::vector<Node>& nodes) {
    std::vector<int> count(nodes.size(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        if (n.kind == NodeKind::Indicator) {
            if (n.of < 0 || n.of >= static_cast<int>(nodes.size()) ||
                nodes[n.of].kind != NodeKind::Substantive)
                throw std::invalid_argument("indicator " + n.name + " does not reference a substantive node");
            if (++count[n.of] > 1)
                throw std::invalid_argument("more than one indicator for " + nodes[n.of].name);
        }
    }
}

bool acyclic(const std::vector<std::uint64_t>& children) {
    // Kahn's algorithm over the adjacency rows.
    const int n = static_cast<int>(children.size());
    std::vector<int> indeg(n, 0);
    for (int a = 0; a < n; ++a)
        bits::for_each(children[a], [&](int b) { ++indeg[b]; });
    std::vector<int> queue;
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) queue.push_back(i);
    int seen = 0;
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        ++seen;
        bits::for_each(children[v], [&](int b) {
            if (--indeg[b] == 0) queue.push_back(b);
        });
    }
    return seen == n;
}

} // namespace

// ---- MGraph ----------------------------------------------------------------

MGraph::MGraph(std::vector<Node> nodes, const std::vector<std::pair<int, int>>& edges)
    : nodes_(std::move(nodes)) {
    const int n = static_cast<int>(nodes_.size());
    if (n == 0) throw std::invalid_argument("graph needs at least one node");
    if (n > kMaxNodes) throw std::invalid_argument("graph exceeds node capacity");
    check_names_unique(nodes_);
    check_indicator_refs(nodes_);
    children_.assign(n, 0);
    parents_.assign(n, 0);
    for (auto [a, b] : edges) {
        if (a < 0 || a >= n || b < 0 || b >= n || a == b)
            throw std::invalid_argument("bad edge endpoints");
        if (nodes_[a].kind == NodeKind::Indicator)
            throw std::invalid_argument("indicator node " + nodes_[a].name + " cannot have outgoing edges");
        children_[a] |= bits::one(b);
        parents_[b] |= bits::one(a);
    }
    if (!acyclic(children_)) throw std::invalid_argument("graph has a directed cycle");
    indicator_of_.assign(n, -1);
    for (int i = 0; i < n; ++i)
        if (nodes_[i].kind == NodeKind::Indicator) indicator_of_[nodes_[i].of] = i;
}

void MGraph::check_node(int v) const {
    if (v < 0 || v >= num_nodes()) throw std::invalid_argument("unknown node id");
}

std::uint64_t MGraph::descendants_mask(int v) const {
    check_node(v);
    std::uint64_t reached = children_[v];
    std::uint64_t frontier = reached;
    while (frontier) {
        std::uint64_t next = 0;
        bits::for_each(frontier, [&](int b) { next |= children_[b]; });
        frontier = next & ~reached;
        reached |= next;
    }
    return reached;
}

std::uint64_t MGraph::ancestors_mask(int v) const {
    check_node(v);
    std::uint64_t reached = parents_[v];
    std::uint64_t frontier = reached;
    while (frontier) {
        std::uint64_t next = 0;
        bits::for_each(frontier, [&](int b) { next |= parents_[b]; });
        frontier = next & ~reached;
        reached |= next;
    }
    return reached;
}

std::vector<int> MGraph::substantive_nodes() const {
    std::vector<int> out;
    for (int i = 0; i < num_nodes(); ++i)
        if (nodes_[i].kind == NodeKind::Substantive) out.push_back(i);
    return out;
}

std::vector<int> MGraph::indicator_nodes() const {
    std::vector<int> out;
    for (int i = 0; i < num_nodes(); ++i)
        if (nodes_[i].kind == NodeKind::Indicator) out.push_back(i);
    return out;
}

int MGraph::index_of(const std::string& name) const {
    for (int i = 0; i < num_nodes(); ++i)
        if (nodes_[i].name == name) return i;
    throw std::invalid_argument("unknown node name: " + name);
}

std::vector<std::pair<int, int>> MGraph::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < num_nodes(); ++a)
        bits::for_each(children_[a], [&](int b) { out.emplace_back(a, b); });
    return out;
}

std::vector<int> descendants(const MGraph& g, int v) {
    return bits::to_vector(g.descendants_mask(v));
}

// ---- d-separation ----------------------------------------------------------

bool d_separated(const MGraph& g, const PathQuery& q) {
    g.check_node(q.origin);
    g.check_node(q.target);
    if (q.origin == q.target) throw std::invalid_argument("origin equals target");
    if (bits::has(q.conditioning, q.origin) || bits::has(q.conditioning, q.target))
        throw std::invalid_argument("endpoint inside conditioning set");
    if (q.conditioning >> g.num_nodes())
        throw std::invalid_argument("conditioning set references unknown nodes");

    const std::uint64_t z = q.conditioning;

    // nodes that are in Z or have a descendant in Z (collider activation)
    std::uint64_t anc_z = z;
    {
        std::uint64_t frontier = z;
        while (frontier) {
            std::uint64_t next = 0;
            bits::for_each(frontier, [&](int b) { next |= g.parents_[b]; });
            frontier = next & ~anc_z;
            anc_z |= next;
        }
    }

    // reachability over (node, direction) states; direction "up" means the
    // trail entered the node against an edge (from a child), "down" along one.
    std::uint64_t visited_up = 0, visited_down = 0;
    std::vector<std::pair<int, bool>> stack;
    stack.emplace_back(q.origin, true); // as if entered from below: may go anywhere
    while (!stack.empty()) {
        auto [n, up] = stack.back();
        stack.pop_back();
        if (up ? bits::has(visited_up, n) : bits::has(visited_down, n)) continue;
        if (up) visited_up |= bits::one(n); else visited_down |= bits::one(n);
        if (n == q.target) return false;
        if (up && !bits::has(z, n)) {
            bits::for_each(g.parents_[n], [&](int p) { stack.emplace_back(p, true); });
            bits::for_each(g.children_[n], [&](int c) { stack.emplace_back(c, false); });
        } else if (!up) {
            if (!bits::has(z, n))
                bits::for_each(g.children_[n], [&](int c) { stack.emplace_back(c, false); });
            if (bits::has(anc_z, n))
                bits::for_each(g.parents_[n], [&](int p) { stack.emplace_back(p, true); });
        }
    }
    return true;
}

bool d_separated(const MGraph& g, int origin, int target, const std::vector<int>& conditioning) {
    return d_separated(g, PathQuery{origin, target, bits::from(conditioning)});
}

bool anm_identifiable_in_missing(const MGraph& g, int child, const std::vector<int>& parents) {
    g.check_node(child);
    if (!g.is_substantive(child)) throw std::invalid_argument("child must be substantive");
    std::uint64_t des = g.descendants_mask(child);
    for (int p : parents) {
        g.check_node(p);
        if (p == child) throw std::invalid_argument("child listed among parents");
        if (!g.is_substantive(p)) throw std::invalid_argument("parents must be substantive");
        if (!g.has_edge(p, child)) throw std::invalid_argument("edge parent->child missing");
    }
    auto blocked_by = [&](int v) {
        int r = g.indicator_of(v);
        return r >= 0 && bits::has(des, r);
    };
    if (blocked_by(child)) return false;
    for (int p : parents)
        if (blocked_by(p)) return false;
    return true;
}

// ---- Pattern ---------------------------------------------------------------

Pattern::Pattern(std::vector<Node> nodes,
                 const std::vector<std::pair<int, int>>& directed,
                 const std::vector<std::pair<int, int>>& undirected)
    : nodes_(std::move(nodes)) {
    const int n = static_cast<int>(nodes_.size());
    if (n == 0) throw std::invalid_argument("pattern needs at least one node");
    if (n > kMaxNodes) throw std::invalid_argument("pattern exceeds node capacity");
    check_names_unique(nodes_);
    check_indicator_refs(nodes_);
    directed_.assign(n, 0);
    directed_in_.assign(n, 0);
    undirected_.assign(n, 0);
    for (auto [a, b] : directed) {
        if (a < 0 || a >= n || b < 0 || b >= n || a == b) throw std::invalid_argument("bad edge endpoints");
        directed_[a] |= bits::one(b);
        directed_in_[b] |= bits::one(a);
    }
    for (auto [a, b] : undirected) {
        if (a < 0 || a >= n || b < 0 || b >= n || a == b) throw std::invalid_argument("bad edge endpoints");
        undirected_[a] |= bits::one(b);
        undirected_[b] |= bits::one(a);
    }
    indicator_of_.assign(n, -1);
    for (int i = 0; i < n; ++i)
        if (nodes_[i].kind == NodeKind::Indicator) indicator_of_[nodes_[i].of] = i;
    validate();
}

void Pattern::validate() const {
    const int n = num_nodes();
    for (int a = 0; a < n; ++a) {
        if ((directed_[a] | directed_in_[a]) & undirected_[a])
            throw std::invalid_argument("pair appears both directed and undirected");
        if (nodes_[a].kind == NodeKind::Indicator && (directed_[a] | undirected_[a]))
            throw std::invalid_argument("edges out of indicator node " + nodes_[a].name);
        bits::for_each(directed_[a], [&](int b) {
            if (nodes_[a].kind == NodeKind::Indicator && nodes_[b].kind == NodeKind::Indicator)
                throw std::invalid_argument("edge between indicator nodes");
        });
    }
    // acyclicity of the directed sub-DAG over substantive nodes
    std::vector<std::uint64_t> sub(n, 0);
    std::uint64_t substantive = 0;
    for (int i = 0; i < n; ++i)
        if (nodes_[i].kind == NodeKind::Substantive) substantive |= bits::one(i);
    for (int a = 0; a < n; ++a)
        if (bits::has(substantive, a)) sub[a] = directed_[a] & substantive;
    if (!acyclic(sub)) throw std::invalid_argument("directed substantive edges contain a cycle");
}

int Pattern::index_of(const std::string& name) const {
    for (int i = 0; i < num_nodes(); ++i)
        if (nodes_[i].name == name) return i;
    throw std::invalid_argument("unknown node name: " + name);
}

std::vector<int> Pattern::substantive_nodes() const {
    std::vector<int> out;
    for (int i = 0; i < num_nodes(); ++i)
        if (nodes_[i].kind == NodeKind::Substantive) out.push_back(i);
    return out;
}

std::vector<int> Pattern::indicator_nodes() const {
    std::vector<int> out;
    for (int i = 0; i < num_nodes(); ++i)
        if (nodes_[i].kind == NodeKind::Indicator) out.push_back(i);
    return out;
}

bool Pattern::directed_path(int a, int b) const {
    std::uint64_t reached = directed_[a];
    std::uint64_t frontier = reached;
    while (frontier) {
        if (bits::has(reached, b)) return true;
        std::uint64_t next = 0;
        bits::for_each(frontier, [&](int x) { next |= directed_[x]; });
        frontier = next & ~reached;
        reached |= next;
    }
    return bits::has(reached, b);
}

std::vector<std::pair<int, int>> Pattern::directed_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < num_nodes(); ++a)
        bits::for_each(directed_[a], [&](int b) { out.emplace_back(a, b); });
    return out;
}

std::vector<std::pair<int, int>> Pattern::undirected_edges() const {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < num_nodes(); ++a)
        bits::for_each(undirected_[a], [&](int b) {
            if (a < b) out.emplace_back(a, b);
        });
    return out;
}

Pattern Pattern::with_directed_removed(int a, int b) const {
    Pattern p = *this;
    p.directed_[a] &= ~bits::one(b);
    p.directed_in_[b] &= ~bits::one(a);
    return p;
}

Pattern Pattern::with_undirected_removed(int a, int b) const {
    Pattern p = *this;
    p.undirected_[a] &= ~bits::one(b);
    p.undirected_[b] &= ~bits::one(a);
    return p;
}

Pattern Pattern::with_directed_added(int a, int b) const {
    Pattern p = *this;
    p.directed_[a] |= bits::one(b);
    p.directed_in_[b] |= bits::one(a);
    p.validate();
    return p;
}

Pattern Pattern::with_indicator_parents(int indicator, const std::vector<int>& parents) const {
    if (nodes_.at(indicator).kind != NodeKind::Indicator)
        throw std::invalid_argument("not an indicator node");
    Pattern p = *this;
    bits::for_each(p.directed_in_[indicator], [&](int a) { p.directed_[a] &= ~bits::one(indicator); });
    p.directed_in_[indicator] = 0;
    for (int a : parents) {
        p.directed_[a] |= bits::one(indicator);
        p.directed_in_[indicator] |= bits::one(a);
    }
    p.validate();
    return p;
}

// ---- pattern operations ----------------------------------------------------

Pattern skeleton_of(const MGraph& g) {
    std::vector<std::pair<int, int>> directed, undirected;
    for (auto [a, b] : g.edges()) {
        if (g.node(b).kind == NodeKind::Indicator)
            directed.emplace_back(a, b);
        else
            undirected.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(undirected.begin(), undirected.end());
    undirected.erase(std::unique(undirected.begin(), undirected.end()), undirected.end());
    return Pattern(g.nodes(), directed, undirected);
}

Pattern orient_edge(const Pattern& p, int from, int to) {
    if (from < 0 || from >= p.num_nodes() || to < 0 || to >= p.num_nodes())
        throw std::invalid_argument("unknown node id");
    if (!p.has_undirected(from, to))
        throw std::invalid_argument("no undirected edge between the given nodes");
    if (p.directed_path(to, from))
        throw orientation_rejected("orienting " + p.node(from).name + " -> " + p.node(to).name +
                                   " would create a directed cycle");
    return p.with_undirected_removed(from, to).with_directed_added(from, to);
}

std::vector<std::vector<int>> potential_nonidentifiable_paths(const Pattern& p, int v) {
    if (v < 0 || v >= p.num_nodes()) throw std::invalid_argument("unknown node id");
    if (!p.is_substantive(v)) throw std::invalid_argument("node must be substantive");

    std::vector<std::vector<int>> found;
    const int rv = p.indicator_of(v);

    std::vector<int> path;
    std::uint64_t visited = 0;

    // extend the walk from node w; admissible endpoints are r_v or r_j
    auto dfs = [&](auto&& self, int w, int rj) -> void {
        std::uint64_t steps = p.directed_out(w) | p.undirected_mask(w);
        bits::for_each(steps & ~visited, [&](int x) {
            if (p.has_undirected(w, x) && p.directed_path(x, w)) return; // would create a cycle
            if (!p.is_substantive(x)) {
                if (x == rv || x == rj) {
                    path.push_back(x);
                    found.push_back(path);
                    path.pop_back();
                }
                return; // indicators are sinks
            }
            path.push_back(x);
            visited |= bits::one(x);
            self(self, x, rj);
            visited &= ~bits::one(x);
            path.pop_back();
        });
    };

    bits::for_each(p.undirected_mask(v), [&](int j) {
        if (!p.is_substantive(j)) return;
        if (p.directed_path(v, j)) return; // first edge j-v traversed j->v must stay acyclic
        path = {j, v};
        visited = bits::one(j) | bits::one(v);
        dfs(dfs, v, p.indicator_of(j));
    });
    return found;
}

} // namespace lcsmd
