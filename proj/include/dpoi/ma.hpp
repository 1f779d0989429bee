#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

#include "dpoi/category.hpp"
#include "dpoi/hypergraph.hpp"
#include "dpoi/isomorphism.hpp"

namespace dpoi {

/// Degree structure of a hypergraph as seen by monogamous-acyclic analysis.
struct MaAnalysis {
    std::vector<NodeId> inputs;   // in-degree 0, ascending
    std::vector<NodeId> outputs;  // out-degree 0, ascending
    std::vector<std::size_t> in_degree;
    std::vector<std::size_t> out_degree;
    bool acyclic = true;
    bool monogamous = true;

    bool is_ma() const { return acyclic && monogamous; }
};

/// successors[v]: nodes reachable from v by one edge (v a source, w a target).
inline std::vector<std::vector<NodeId>> successors(const Hypergraph& g) {
    std::vector<std::vector<NodeId>> next(g.node_count());
    for (const Edge& e : g.edges())
        for (NodeId s : e.sources)
            for (NodeId t : e.targets) next[s].push_back(t);
    for (auto& v : next) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return next;
}

/// reach[u][v]: a directed path of at least one edge leads from u to v.
inline std::vector<std::vector<bool>> reachability(const Hypergraph& g) {
    const auto next = successors(g);
    const std::size_t n = g.node_count();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (NodeId u = 0; u < n; ++u) {
        std::vector<NodeId> stack(next[u].begin(), next[u].end());
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            if (reach[u][v]) continue;
            reach[u][v] = true;
            for (NodeId w : next[v])
                if (!reach[u][w]) stack.push_back(w);
        }
    }
    return reach;
}

inline MaAnalysis analyze_ma(const Hypergraph& g) {
    MaAnalysis a;
    a.in_degree.assign(g.node_count(), 0);
    a.out_degree.assign(g.node_count(), 0);
    for (const Edge& e : g.edges()) {
        for (NodeId s : e.sources) ++a.out_degree[s];
        for (NodeId t : e.targets) ++a.in_degree[t];
    }
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (a.in_degree[v] == 0) a.inputs.push_back(v);
        if (a.out_degree[v] == 0) a.outputs.push_back(v);
        if (a.in_degree[v] > 1 || a.out_degree[v] > 1) a.monogamous = false;
    }
    const auto reach = reachability(g);
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (reach[v][v]) a.acyclic = false;
    return a;
}

namespace detail {

inline bool injective_onto(const std::vector<NodeId>& leg, const std::vector<NodeId>& expected) {
    std::vector<NodeId> sorted = leg;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
    return sorted == expected;
}

}  // namespace detail

/// Apex ma, left leg a bijection onto the inputs, right leg onto the outputs.
inline bool is_ma_cospan(const Cospan& c) {
    MaAnalysis a = analyze_ma(c.apex);
    return a.is_ma() && detail::injective_onto(c.left, a.inputs) && detail::injective_onto(c.right, a.outputs);
}

/**
 * For an interface of the form inputs ++ outputs, the number of inputs.
 * Empty when the graph with interface is not an ma-hypergraph with interface.
 */
inline std::optional<std::size_t> ma_interface_split(const GraphWithInterface& g) {
    MaAnalysis a = analyze_ma(g.graph);
    if (!a.is_ma()) return std::nullopt;
    const std::size_t n = a.inputs.size();
    if (g.interface.size() != n + a.outputs.size()) return std::nullopt;
    std::vector<NodeId> left(g.interface.begin(), g.interface.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<NodeId> right(g.interface.begin() + static_cast<std::ptrdiff_t>(n), g.interface.end());
    if (!detail::injective_onto(left, a.inputs) || !detail::injective_onto(right, a.outputs)) return std::nullopt;
    return n;
}

/// The cospan inputs -> G <- outputs read off an ma graph with interface.
inline std::optional<Cospan> as_ma_cospan(const GraphWithInterface& g) {
    auto n = ma_interface_split(g);
    if (!n) return std::nullopt;
    Cospan c;
    c.apex = g.graph;
    c.left.assign(g.interface.begin(), g.interface.begin() + static_cast<std::ptrdiff_t>(*n));
    c.right.assign(g.interface.begin() + static_cast<std::ptrdiff_t>(*n), g.interface.end());
    return c;
}

/// The canonical interface: inputs then outputs, each by ascending node id.
inline GraphWithInterface canonical_ma_interface(const Hypergraph& g) {
    MaAnalysis a = analyze_ma(g);
    GraphWithInterface out{g, a.inputs};
    out.interface.insert(out.interface.end(), a.outputs.begin(), a.outputs.end());
    return out;
}

/// m mono, and no directed path leaves the image of m and comes back to it.
inline bool is_convex_match(const Hypergraph& pattern, const Hypergraph& host, const Morphism& m) {
    if (!is_homomorphism(pattern, host, m) || !is_mono(m)) return false;
    std::vector<bool> in_node(host.node_count(), false), in_edge(host.edge_count(), false);
    for (NodeId v : m.nodes) in_node[v] = true;
    for (EdgeId e : m.edges) in_edge[e] = true;
    const auto next = successors(host);
    std::vector<bool> seen(host.node_count(), false);
    std::vector<NodeId> stack;
    for (EdgeId e = 0; e < host.edge_count(); ++e) {
        if (in_edge[e]) continue;
        const Edge& edge = host.edge(e);
        if (std::none_of(edge.sources.begin(), edge.sources.end(), [&](NodeId s) { return in_node[s]; })) continue;
        for (NodeId t : edge.targets)
            if (!seen[t]) seen[t] = true, stack.push_back(t);
    }
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        if (in_node[v]) return false;
        for (NodeId w : next[v])
            if (!seen[w]) seen[w] = true, stack.push_back(w);
    }
    return true;
}

/// A boundary complement together with the factorisation of the host interface.
struct BoundaryComplement {
    PushoutComplement complement;
    std::vector<NodeId> interface_factor;  // host interface -> context
};

/**
 * The boundary complement of a rule i+j -> L at a mono match L -> G, where G
 * carries the interface n+m. The context must turn j+n -> C <- m+i into an
 * ma-cospan. Unique when it exists; a second non-isomorphic candidate is a
 * logic error.
 */
inline std::optional<BoundaryComplement> boundary_complement(const Hypergraph& k, const Hypergraph& lhs,
                                                             const Morphism& l, std::size_t rule_inputs,
                                                             const Hypergraph& host, const Morphism& match,
                                                             const std::vector<NodeId>& host_interface,
                                                             std::size_t host_inputs) {
    if (!is_mono(match)) return std::nullopt;
    ComplementSearch search = pushout_complements(k, lhs, host, l, match);
    std::optional<BoundaryComplement> found;
    std::optional<Cospan> found_cospan;
    for (PushoutComplement& pc : search.complements) {
        if (!is_mono(pc.from_interface)) continue;
        std::vector<std::vector<NodeId>> fibres(host_interface.size());
        for (std::size_t j = 0; j < host_interface.size(); ++j)
            for (NodeId c = 0; c < pc.context.node_count(); ++c)
                if (pc.to_host.nodes[c] == host_interface[j]) fibres[j].push_back(c);
        if (std::any_of(fibres.begin(), fibres.end(), [](const auto& f) { return f.empty(); })) continue;
        std::vector<std::size_t> pick(fibres.size(), 0);
        while (true) {
            std::vector<NodeId> d;
            for (std::size_t j = 0; j < fibres.size(); ++j) d.push_back(fibres[j][pick[j]]);
            Cospan cs;
            cs.apex = pc.context;
            const auto& c = pc.from_interface.nodes;
            cs.left.assign(c.begin() + static_cast<std::ptrdiff_t>(rule_inputs), c.end());
            cs.left.insert(cs.left.end(), d.begin(), d.begin() + static_cast<std::ptrdiff_t>(host_inputs));
            cs.right.assign(d.begin() + static_cast<std::ptrdiff_t>(host_inputs), d.end());
            cs.right.insert(cs.right.end(), c.begin(), c.begin() + static_cast<std::ptrdiff_t>(rule_inputs));
            if (is_ma_cospan(cs)) {
                if (found) {
                    if (!are_isomorphic(*found_cospan, cs))
                        throw std::logic_error("boundary_complement: two non-isomorphic boundary complements");
                } else {
                    found = BoundaryComplement{pc, d};
                    found_cospan = cs;
                }
            }
            std::size_t i = 0;
            while (i < pick.size() && ++pick[i] == fibres[i].size()) pick[i++] = 0;
            if (i == pick.size()) break;
        }
    }
    return found;
}

}  // namespace dpoi
