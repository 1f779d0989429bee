#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dpoi {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

/// Arity and coarity of a generator o : n -> m.
struct GeneratorType {
    std::size_t arity = 0;
    std::size_t coarity = 0;

    friend bool operator==(const GeneratorType&, const GeneratorType&) = default;
};

/// A monoidal signature: generator names with their types.
class Signature {
public:
    Signature() = default;

    /// Adds a generator. Throws std::invalid_argument on a duplicate name.
    void add(std::string name, std::size_t arity, std::size_t coarity) {
        if (name.empty()) throw std::invalid_argument("generator name must be non-empty");
        auto [it, inserted] = generators_.emplace(std::move(name), GeneratorType{arity, coarity});
        if (!inserted) throw std::invalid_argument("duplicate generator '" + it->first + "'");
    }

    bool contains(std::string_view name) const { return generators_.find(name) != generators_.end(); }

    std::optional<GeneratorType> find(std::string_view name) const {
        auto it = generators_.find(name);
        if (it == generators_.end()) return std::nullopt;
        return it->second;
    }

    const std::map<std::string, GeneratorType, std::less<>>& generators() const { return generators_; }
    std::size_t size() const { return generators_.size(); }

    friend bool operator==(const Signature&, const Signature&) = default;

private:
    std::map<std::string, GeneratorType, std::less<>> generators_;
};

// Formal path generators. The '%' prefix cannot occur in user generator names.
inline constexpr std::string_view kPathJoin = "%join";    // 2 -> 1
inline constexpr std::string_view kPathSplit = "%split";  // 1 -> 2
inline constexpr std::string_view kPathLink = "%link";    // 1 -> 1

inline bool is_path_label(std::string_view label) { return !label.empty() && label.front() == '%'; }

inline std::optional<GeneratorType> path_generator_type(std::string_view label) {
    if (label == kPathJoin) return GeneratorType{2, 1};
    if (label == kPathSplit) return GeneratorType{1, 2};
    if (label == kPathLink) return GeneratorType{1, 1};
    return std::nullopt;
}

struct Edge {
    std::string label;
    std::vector<NodeId> sources;
    std::vector<NodeId> targets;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/**
 * A finite labelled directed hypergraph. Nodes are 0..node_count()-1,
 * edges are 0..edge_count()-1, and every edge has ordered source and
 * target tentacles.
 */
class Hypergraph {
public:
    Hypergraph() = default;
    explicit Hypergraph(std::size_t nodes) : nodes_(nodes) {}

    NodeId add_node() { return static_cast<NodeId>(nodes_++); }

    /// Adds n fresh nodes and returns the id of the first one.
    NodeId add_nodes(std::size_t n) {
        auto first = static_cast<NodeId>(nodes_);
        nodes_ += n;
        return first;
    }

    EdgeId add_edge(std::string label, std::vector<NodeId> sources, std::vector<NodeId> targets) {
        edges_.push_back(Edge{std::move(label), std::move(sources), std::move(targets)});
        return static_cast<EdgeId>(edges_.size() - 1);
    }

    EdgeId add_edge(Edge e) {
        edges_.push_back(std::move(e));
        return static_cast<EdgeId>(edges_.size() - 1);
    }

    std::size_t node_count() const { return nodes_; }
    std::size_t edge_count() const { return edges_.size(); }
    /// Number of items, nodes plus edges.
    std::size_t size() const { return nodes_ + edges_.size(); }
    bool is_discrete() const { return edges_.empty(); }

    const Edge& edge(EdgeId e) const { return edges_.at(e); }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Graphs over the signature extended with the formal path generators.
    bool path_typed() const { return path_typed_; }
    void set_path_typed(bool v) { path_typed_ = v; }

    friend bool operator==(const Hypergraph&, const Hypergraph&) = default;

private:
    std::size_t nodes_ = 0;
    std::vector<Edge> edges_;
    bool path_typed_ = false;
};

/**
 * A homomorphism between two hypergraphs, stored as its node and edge maps.
 * The domain sizes are the lengths of the maps; the codomain is supplied by
 * whoever holds the morphism.
 */
struct Morphism {
    std::vector<NodeId> nodes;
    std::vector<EdgeId> edges;

    friend bool operator==(const Morphism&, const Morphism&) = default;
};

/// A graph G with an interface J -> G, where J is discrete with interface.size() nodes.
struct GraphWithInterface {
    Hypergraph graph;
    std::vector<NodeId> interface;

    std::size_t interface_size() const { return interface.size(); }
    Morphism interface_morphism() const { return Morphism{interface, {}}; }
};

/// A cospan n -> apex <- m with discrete feet.
struct Cospan {
    std::vector<NodeId> left;
    Hypergraph apex;
    std::vector<NodeId> right;
};

inline Hypergraph discrete(std::size_t n) { return Hypergraph(n); }

inline Morphism identity(const Hypergraph& g) {
    Morphism id;
    id.nodes.resize(g.node_count());
    id.edges.resize(g.edge_count());
    std::iota(id.nodes.begin(), id.nodes.end(), NodeId{0});
    std::iota(id.edges.begin(), id.edges.end(), EdgeId{0});
    return id;
}

/// Diagrammatic composition: first, then second.
inline Morphism compose(const Morphism& first, const Morphism& second) {
    Morphism out;
    out.nodes.reserve(first.nodes.size());
    out.edges.reserve(first.edges.size());
    for (NodeId n : first.nodes) out.nodes.push_back(second.nodes.at(n));
    for (EdgeId e : first.edges) out.edges.push_back(second.edges.at(e));
    return out;
}

inline std::vector<NodeId> compose(const std::vector<NodeId>& first, const Morphism& second) {
    std::vector<NodeId> out;
    out.reserve(first.size());
    for (NodeId n : first) out.push_back(second.nodes.at(n));
    return out;
}

inline bool is_homomorphism(const Hypergraph& src, const Hypergraph& tgt, const Morphism& f) {
    if (f.nodes.size() != src.node_count() || f.edges.size() != src.edge_count()) return false;
    for (NodeId n : f.nodes)
        if (n >= tgt.node_count()) return false;
    for (EdgeId i = 0; i < src.edge_count(); ++i) {
        if (f.edges[i] >= tgt.edge_count()) return false;
        const Edge& a = src.edge(i);
        const Edge& b = tgt.edge(f.edges[i]);
        if (a.label != b.label || a.sources.size() != b.sources.size() || a.targets.size() != b.targets.size())
            return false;
        for (std::size_t k = 0; k < a.sources.size(); ++k)
            if (f.nodes[a.sources[k]] != b.sources[k]) return false;
        for (std::size_t k = 0; k < a.targets.size(); ++k)
            if (f.nodes[a.targets[k]] != b.targets[k]) return false;
    }
    return true;
}

namespace detail {

template <class Id>
bool injective(const std::vector<Id>& map) {
    std::vector<Id> sorted = map;
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

template <class Id>
bool surjective(const std::vector<Id>& map, std::size_t codomain) {
    std::vector<bool> hit(codomain, false);
    for (Id x : map)
        if (x < codomain) hit[x] = true;
    return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

}  // namespace detail

inline bool is_injective(const std::vector<NodeId>& map) { return detail::injective(map); }
inline bool is_mono(const Morphism& f) { return detail::injective(f.nodes) && detail::injective(f.edges); }
inline bool is_epi(const Morphism& f, const Hypergraph& tgt) {
    return detail::surjective(f.nodes, tgt.node_count()) && detail::surjective(f.edges, tgt.edge_count());
}
inline bool is_iso(const Morphism& f, const Hypergraph& tgt) { return is_mono(f) && is_epi(f, tgt); }

/// Inverse of an isomorphism onto tgt.
inline Morphism inverse(const Morphism& f, const Hypergraph& tgt) {
    Morphism inv;
    inv.nodes.assign(tgt.node_count(), 0);
    inv.edges.assign(tgt.edge_count(), 0);
    for (NodeId i = 0; i < f.nodes.size(); ++i) inv.nodes[f.nodes[i]] = i;
    for (EdgeId i = 0; i < f.edges.size(); ++i) inv.edges[f.edges[i]] = i;
    return inv;
}

struct Coproduct {
    Hypergraph graph;
    Morphism left;
    Morphism right;
};

/// Disjoint union a + b; b's items are shifted past a's.
inline Coproduct coproduct(const Hypergraph& a, const Hypergraph& b) {
    Coproduct out;
    out.graph = a;
    out.graph.set_path_typed(a.path_typed() || b.path_typed());
    out.left = identity(a);
    const auto shift = static_cast<NodeId>(a.node_count());
    out.graph.add_nodes(b.node_count());
    for (NodeId n = 0; n < b.node_count(); ++n) out.right.nodes.push_back(n + shift);
    for (const Edge& e : b.edges()) {
        Edge moved = e;
        for (NodeId& s : moved.sources) s += shift;
        for (NodeId& t : moved.targets) t += shift;
        out.right.edges.push_back(out.graph.add_edge(std::move(moved)));
    }
    return out;
}

/// Structural violations: tentacles pointing at nodes that do not exist.
inline std::vector<std::string> validate(const Hypergraph& g) {
    std::vector<std::string> out;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& edge = g.edge(e);
        auto check = [&](const std::vector<NodeId>& ns, const char* role) {
            for (std::size_t k = 0; k < ns.size(); ++k)
                if (ns[k] >= g.node_count())
                    out.push_back("edge " + std::to_string(e) + " (" + edge.label + ") " + role + " " +
                                  std::to_string(k) + " refers to missing node " + std::to_string(ns[k]));
        };
        check(edge.sources, "source");
        check(edge.targets, "target");
        if (is_path_label(edge.label) && !g.path_typed())
            out.push_back("edge " + std::to_string(e) + " uses path label " + edge.label +
                          " in a graph that is not path-typed");
    }
    return out;
}

/// Structural violations plus label and arity checks against a signature.
inline std::vector<std::string> validate(const Hypergraph& g, const Signature& sig) {
    std::vector<std::string> out = validate(g);
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& edge = g.edge(e);
        std::optional<GeneratorType> type =
            is_path_label(edge.label) ? path_generator_type(edge.label) : sig.find(edge.label);
        if (!type) {
            out.push_back("edge " + std::to_string(e) + " has unknown label '" + edge.label + "'");
            continue;
        }
        if (edge.sources.size() != type->arity)
            out.push_back("edge " + std::to_string(e) + " (" + edge.label + ") has " +
                          std::to_string(edge.sources.size()) + " sources, expected " +
                          std::to_string(type->arity));
        if (edge.targets.size() != type->coarity)
            out.push_back("edge " + std::to_string(e) + " (" + edge.label + ") has " +
                          std::to_string(edge.targets.size()) + " targets, expected " +
                          std::to_string(type->coarity));
    }
    return out;
}

/// Coproduct of two graphs that must both be well-formed over sig.
inline Coproduct coproduct(const Hypergraph& a, const Hypergraph& b, const Signature& sig) {
    if (!validate(a, sig).empty() || !validate(b, sig).empty())
        throw std::invalid_argument("coproduct: operand is not a graph over the given signature");
    return coproduct(a, b);
}

/// Rewiring of a cospan: G <- n+m.
inline GraphWithInterface rewire(const Cospan& c) {
    GraphWithInterface g{c.apex, c.left};
    g.interface.insert(g.interface.end(), c.right.begin(), c.right.end());
    return g;
}

}  // namespace dpoi
