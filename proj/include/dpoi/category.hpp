#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpoi/hypergraph.hpp"

namespace dpoi {

/// Thrown for rule shapes outside the supported classes (l mono, or K discrete).
class UnsupportedRuleShape : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // The smaller root wins so that representatives are canonical.
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace detail

struct Factorization {
    Hypergraph image;
    Morphism epi;   // src -> image
    Morphism mono;  // image -> tgt
};

/// Image factorisation of f : src -> tgt. Image items keep tgt's relative order.
inline Factorization epi_mono_factorize(const Hypergraph& src, const Hypergraph& tgt, const Morphism& f) {
    if (!is_homomorphism(src, tgt, f)) throw std::invalid_argument("epi_mono_factorize: not a homomorphism");
    Factorization out;
    std::vector<NodeId> node_index(tgt.node_count(), 0);
    std::vector<bool> node_hit(tgt.node_count(), false), edge_hit(tgt.edge_count(), false);
    for (NodeId n : f.nodes) node_hit[n] = true;
    for (EdgeId e : f.edges) edge_hit[e] = true;
    for (NodeId n = 0; n < tgt.node_count(); ++n)
        if (node_hit[n]) {
            node_index[n] = out.image.add_node();
            out.mono.nodes.push_back(n);
        }
    std::vector<EdgeId> edge_index(tgt.edge_count(), 0);
    for (EdgeId e = 0; e < tgt.edge_count(); ++e)
        if (edge_hit[e]) {
            Edge copy = tgt.edge(e);
            for (NodeId& s : copy.sources) s = node_index[s];
            for (NodeId& t : copy.targets) t = node_index[t];
            edge_index[e] = out.image.add_edge(std::move(copy));
            out.mono.edges.push_back(e);
        }
    out.image.set_path_typed(tgt.path_typed());
    for (NodeId n : f.nodes) out.epi.nodes.push_back(node_index[n]);
    for (EdgeId e : f.edges) out.epi.edges.push_back(edge_index[e]);
    return out;
}

struct Pushout {
    Hypergraph object;
    Morphism from_left;
    Morphism from_right;
};

/**
 * Pushout of L <-f- K -g-> C, computed as (L + C)/~ by union-find.
 * Classes are numbered by their first member, L items before C items.
 */
inline Pushout pushout(const Hypergraph& left, const Hypergraph& right, const Morphism& f, const Morphism& g) {
    if (f.nodes.size() != g.nodes.size() || f.edges.size() != g.edges.size())
        throw std::invalid_argument("pushout: legs do not share a source");
    const std::size_t nl = left.node_count(), el = left.edge_count();
    detail::UnionFind nodes(nl + right.node_count());
    detail::UnionFind edges(el + right.edge_count());
    for (std::size_t k = 0; k < f.nodes.size(); ++k) nodes.unite(f.nodes[k], nl + g.nodes[k]);
    for (std::size_t k = 0; k < f.edges.size(); ++k) edges.unite(f.edges[k], el + g.edges[k]);

    Pushout out;
    std::vector<NodeId> node_class(nl + right.node_count());
    std::map<std::size_t, NodeId> node_root;
    for (std::size_t i = 0; i < node_class.size(); ++i) {
        auto [it, fresh] = node_root.emplace(nodes.find(i), 0);
        if (fresh) it->second = out.object.add_node();
        node_class[i] = it->second;
    }
    std::vector<EdgeId> edge_class(el + right.edge_count());
    std::map<std::size_t, EdgeId> edge_root;
    for (std::size_t i = 0; i < edge_class.size(); ++i) {
        auto [it, fresh] = edge_root.emplace(edges.find(i), 0);
        if (fresh) {
            const bool from_left = i < el;
            Edge copy = from_left ? left.edge(static_cast<EdgeId>(i)) : right.edge(static_cast<EdgeId>(i - el));
            const std::size_t shift = from_left ? 0 : nl;
            for (NodeId& s : copy.sources) s = node_class[s + shift];
            for (NodeId& t : copy.targets) t = node_class[t + shift];
            it->second = out.object.add_edge(std::move(copy));
        }
        edge_class[i] = it->second;
    }
    out.object.set_path_typed(left.path_typed() || right.path_typed());
    out.from_left.nodes.assign(node_class.begin(), node_class.begin() + nl);
    out.from_right.nodes.assign(node_class.begin() + nl, node_class.end());
    out.from_left.edges.assign(edge_class.begin(), edge_class.begin() + el);
    out.from_right.edges.assign(edge_class.begin() + el, edge_class.end());
    return out;
}

struct Pullback {
    Hypergraph object;
    Morphism to_left;
    Morphism to_right;
};

/// Pullback of A -f-> C <-g- B: pairs of items with a common image, in lexicographic order.
inline Pullback pullback(const Hypergraph& a, const Hypergraph& b, const Morphism& f, const Morphism& g) {
    Pullback out;
    std::map<std::pair<NodeId, NodeId>, NodeId> node_of;
    for (NodeId x = 0; x < a.node_count(); ++x)
        for (NodeId y = 0; y < b.node_count(); ++y)
            if (f.nodes.at(x) == g.nodes.at(y)) {
                node_of[{x, y}] = out.object.add_node();
                out.to_left.nodes.push_back(x);
                out.to_right.nodes.push_back(y);
            }
    for (EdgeId e = 0; e < a.edge_count(); ++e)
        for (EdgeId d = 0; d < b.edge_count(); ++d) {
            if (f.edges.at(e) != g.edges.at(d)) continue;
            const Edge& ea = a.edge(e);
            const Edge& eb = b.edge(d);
            Edge pair{ea.label, {}, {}};
            for (std::size_t k = 0; k < ea.sources.size(); ++k)
                pair.sources.push_back(node_of.at({ea.sources[k], eb.sources[k]}));
            for (std::size_t k = 0; k < ea.targets.size(); ++k)
                pair.targets.push_back(node_of.at({ea.targets[k], eb.targets[k]}));
            out.object.add_edge(std::move(pair));
            out.to_left.edges.push_back(e);
            out.to_right.edges.push_back(d);
        }
    out.object.set_path_typed(a.path_typed() && b.path_typed());
    return out;
}

/**
 * Whether the commuting square K -f-> L -a-> G, K -g-> C -b-> G is a pushout:
 * the comparison map from the computed pushout into G must be an isomorphism.
 * Throws std::invalid_argument when the square does not commute.
 */
inline bool is_pushout(const Hypergraph& left, const Hypergraph& right, const Hypergraph& object, const Morphism& f,
                       const Morphism& g, const Morphism& a, const Morphism& b) {
    if (!is_homomorphism(left, object, a) || !is_homomorphism(right, object, b))
        throw std::invalid_argument("is_pushout: cocone legs are not homomorphisms");
    if (compose(f, a) != compose(g, b)) throw std::invalid_argument("is_pushout: square does not commute");
    Pushout p = pushout(left, right, f, g);
    if (p.object.node_count() != object.node_count() || p.object.edge_count() != object.edge_count())
        return false;
    Morphism u{std::vector<NodeId>(p.object.node_count()), std::vector<EdgeId>(p.object.edge_count())};
    for (NodeId x = 0; x < left.node_count(); ++x) u.nodes[p.from_left.nodes[x]] = a.nodes[x];
    for (NodeId y = 0; y < right.node_count(); ++y) u.nodes[p.from_right.nodes[y]] = b.nodes[y];
    for (EdgeId e = 0; e < left.edge_count(); ++e) u.edges[p.from_left.edges[e]] = a.edges[e];
    for (EdgeId e = 0; e < right.edge_count(); ++e) u.edges[p.from_right.edges[e]] = b.edges[e];
    return is_iso(u, object);
}

/// A pushout complement K -> C -> G of K -l-> L -m-> G.
struct PushoutComplement {
    Hypergraph context;
    Morphism from_interface;  // K -> C
    Morphism to_host;         // C -> G
};

struct ComplementSearch {
    std::vector<PushoutComplement> complements;
    std::string diagnostic;  // why the list is empty, if it is
};

namespace detail {

inline ComplementSearch complement_along_mono(const Hypergraph& k, const Hypergraph& l_graph, const Hypergraph& g,
                                              const Morphism& l, const Morphism& m) {
    ComplementSearch out;
    std::vector<bool> kept_node(l_graph.node_count(), false), kept_edge(l_graph.edge_count(), false);
    for (NodeId x : l.nodes) kept_node[x] = true;
    for (EdgeId e : l.edges) kept_edge[e] = true;

    // Identification: only preserved items may be merged by m.
    std::vector<int> node_hits(g.node_count(), 0), edge_hits(g.edge_count(), 0);
    std::vector<bool> node_deleted(g.node_count(), false), edge_deleted(g.edge_count(), false);
    for (NodeId x = 0; x < l_graph.node_count(); ++x) {
        ++node_hits[m.nodes[x]];
        if (!kept_node[x]) node_deleted[m.nodes[x]] = true;
    }
    for (EdgeId e = 0; e < l_graph.edge_count(); ++e) {
        ++edge_hits[m.edges[e]];
        if (!kept_edge[e]) edge_deleted[m.edges[e]] = true;
    }
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (node_deleted[v] && node_hits[v] > 1) {
            out.diagnostic = "identification condition fails at node " + std::to_string(v);
            return out;
        }
    for (EdgeId e = 0; e < g.edge_count(); ++e)
        if (edge_deleted[e] && edge_hits[e] > 1) {
            out.diagnostic = "identification condition fails at edge " + std::to_string(e);
            return out;
        }
    // Dangling: surviving edges must not touch deleted nodes.
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        if (edge_deleted[e]) continue;
        const Edge& edge = g.edge(e);
        for (const auto* ns : {&edge.sources, &edge.targets})
            for (NodeId v : *ns)
                if (node_deleted[v]) {
                    out.diagnostic = "dangling condition fails: edge " + std::to_string(e) + " touches deleted node " +
                                     std::to_string(v);
                    return out;
                }
    }

    PushoutComplement pc;
    std::vector<NodeId> index(g.node_count(), 0);
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (!node_deleted[v]) {
            index[v] = pc.context.add_node();
            pc.to_host.nodes.push_back(v);
        }
    std::vector<EdgeId> edge_index(g.edge_count(), 0);
    for (EdgeId e = 0; e < g.edge_count(); ++e)
        if (!edge_deleted[e]) {
            Edge copy = g.edge(e);
            for (NodeId& s : copy.sources) s = index[s];
            for (NodeId& t : copy.targets) t = index[t];
            edge_index[e] = pc.context.add_edge(std::move(copy));
            pc.to_host.edges.push_back(e);
        }
    pc.context.set_path_typed(g.path_typed());
    for (NodeId x = 0; x < k.node_count(); ++x) pc.from_interface.nodes.push_back(index[m.nodes[l.nodes[x]]]);
    for (EdgeId e = 0; e < k.edge_count(); ++e) pc.from_interface.edges.push_back(edge_index[m.edges[l.edges[e]]]);
    out.complements.push_back(std::move(pc));
    return out;
}

// All set partitions of {0..n-1} as block labels in restricted-growth form.
inline std::vector<std::vector<std::size_t>> set_partitions(std::size_t n) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> label(n, 0);
    auto rec = [&](auto&& self, std::size_t i, std::size_t blocks) -> void {
        if (i == n) {
            out.push_back(label);
            return;
        }
        for (std::size_t b = 0; b <= blocks; ++b) {
            label[i] = b;
            self(self, i + 1, std::max(blocks, b + 1));
        }
    };
    if (n == 0)
        out.push_back({});
    else
        rec(rec, 0, 0);
    return out;
}

inline ComplementSearch complements_discrete_interface(const Hypergraph& k, const Hypergraph& l_graph,
                                                       const Hypergraph& g, const Morphism& l, const Morphism& m) {
    ComplementSearch out;
    // Every L edge is deleted, so m must be injective on edges.
    if (!detail::injective(m.edges)) {
        out.diagnostic = "identification condition fails: two deleted edges share an image";
        return out;
    }
    std::vector<bool> kept(l_graph.node_count(), false);
    for (NodeId x : l.nodes) kept[x] = true;
    std::vector<bool> edge_matched(g.edge_count(), false);
    for (EdgeId e : m.edges) edge_matched[e] = true;

    enum class Kind { copy, removed, split };
    struct Site {
        std::vector<NodeId> k_nodes;                       // K nodes over this G node
        std::vector<NodeId> l_nodes;                       // L nodes over this G node
        std::vector<std::vector<std::size_t>> partitions;  // admissible groupings of k_nodes
    };
    std::vector<Kind> kind(g.node_count(), Kind::copy);
    std::vector<Site> sites(g.node_count());
    for (NodeId x = 0; x < l_graph.node_count(); ++x) sites[m.nodes[x]].l_nodes.push_back(x);
    for (NodeId q = 0; q < k.node_count(); ++q) sites[m.nodes[l.nodes[q]]].k_nodes.push_back(q);

    // Tentacles of context edges, grouped by the G node they attach to.
    struct Tentacle {
        EdgeId edge;
        bool source;
        std::size_t position;
    };
    std::vector<std::vector<Tentacle>> tentacles(g.node_count());
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        if (edge_matched[e]) continue;
        const Edge& edge = g.edge(e);
        for (std::size_t p = 0; p < edge.sources.size(); ++p) tentacles[edge.sources[p]].push_back({e, true, p});
        for (std::size_t p = 0; p < edge.targets.size(); ++p) tentacles[edge.targets[p]].push_back({e, false, p});
    }

    for (NodeId v = 0; v < g.node_count(); ++v) {
        Site& s = sites[v];
        if (s.l_nodes.empty()) continue;
        const bool has_deleted = std::any_of(s.l_nodes.begin(), s.l_nodes.end(), [&](NodeId x) { return !kept[x]; });
        if (has_deleted) {
            if (s.l_nodes.size() > 1) {
                out.diagnostic = "identification condition fails at node " + std::to_string(v);
                return out;
            }
            if (!tentacles[v].empty()) {
                out.diagnostic = "dangling condition fails at node " + std::to_string(v);
                return out;
            }
            kind[v] = Kind::removed;
            continue;
        }
        kind[v] = Kind::split;
        // A grouping is admissible when blocks and L nodes form one connected
        // component, so that the pushout collapses the fibre to a single node.
        for (auto& part : set_partitions(s.k_nodes.size())) {
            const std::size_t blocks = part.empty() ? 0 : *std::max_element(part.begin(), part.end()) + 1;
            UnionFind uf(blocks + s.l_nodes.size());
            for (std::size_t i = 0; i < s.k_nodes.size(); ++i) {
                NodeId x = l.nodes[s.k_nodes[i]];
                auto pos = std::find(s.l_nodes.begin(), s.l_nodes.end(), x) - s.l_nodes.begin();
                uf.unite(part[i], blocks + static_cast<std::size_t>(pos));
            }
            bool connected = true;
            for (std::size_t i = 1; i < blocks + s.l_nodes.size(); ++i) connected &= uf.find(i) == uf.find(0);
            if (connected) s.partitions.push_back(std::move(part));
        }
    }

    std::vector<NodeId> split_nodes;
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (kind[v] == Kind::split) split_nodes.push_back(v);

    std::vector<std::size_t> choice(split_nodes.size(), 0);
    auto block_count = [&](NodeId v, std::size_t c) {
        const auto& part = sites[v].partitions[c];
        return part.empty() ? std::size_t{0} : *std::max_element(part.begin(), part.end()) + 1;
    };
    auto advance = [](std::vector<std::size_t>& odo, const std::vector<std::size_t>& limits) {
        for (std::size_t i = 0; i < odo.size(); ++i) {
            if (++odo[i] < limits[i]) return true;
            odo[i] = 0;
        }
        return false;
    };
    std::vector<std::size_t> choice_limits;
    for (NodeId v : split_nodes) choice_limits.push_back(sites[v].partitions.size());
    if (std::any_of(choice_limits.begin(), choice_limits.end(), [](std::size_t n) { return n == 0; })) {
        out.diagnostic = "no admissible splitting of the matched nodes";
        return out;
    }

    do {
        // Node layout of C for this choice of groupings.
        Hypergraph base;
        std::vector<NodeId> to_host;
        std::vector<NodeId> first_block(g.node_count(), 0);
        for (NodeId v = 0; v < g.node_count(); ++v) {
            if (kind[v] == Kind::copy) {
                first_block[v] = base.add_node();
                to_host.push_back(v);
            } else if (kind[v] == Kind::split) {
                std::size_t c = choice[std::find(split_nodes.begin(), split_nodes.end(), v) - split_nodes.begin()];
                std::size_t blocks = block_count(v, c);
                first_block[v] = base.add_nodes(blocks);
                for (std::size_t b = 0; b < blocks; ++b) to_host.push_back(v);
            }
        }
        Morphism from_k;
        for (NodeId q = 0; q < k.node_count(); ++q) {
            NodeId v = m.nodes[l.nodes[q]];
            std::size_t c = choice[std::find(split_nodes.begin(), split_nodes.end(), v) - split_nodes.begin()];
            const Site& s = sites[v];
            std::size_t idx = std::find(s.k_nodes.begin(), s.k_nodes.end(), q) - s.k_nodes.begin();
            from_k.nodes.push_back(first_block[v] + static_cast<NodeId>(s.partitions[c][idx]));
        }
        // Every context tentacle at a split node picks one of its blocks.
        std::vector<std::pair<NodeId, const Tentacle*>> open;
        for (NodeId v : split_nodes)
            for (const Tentacle& t : tentacles[v]) open.emplace_back(v, &t);
        std::vector<std::size_t> pick(open.size(), 0), pick_limits;
        for (auto& [v, t] : open) {
            std::size_t c = choice[std::find(split_nodes.begin(), split_nodes.end(), v) - split_nodes.begin()];
            pick_limits.push_back(block_count(v, c));
        }
        do {
            PushoutComplement pc;
            pc.context = base;
            pc.context.set_path_typed(g.path_typed());
            std::vector<Edge> context_edges;
            std::vector<EdgeId> host_edges;
            std::vector<EdgeId> slot(g.edge_count(), 0);
            for (EdgeId e = 0; e < g.edge_count(); ++e) {
                if (edge_matched[e]) continue;
                Edge copy = g.edge(e);
                for (NodeId& s : copy.sources)
                    if (kind[s] == Kind::copy) s = first_block[s];
                for (NodeId& t : copy.targets)
                    if (kind[t] == Kind::copy) t = first_block[t];
                slot[e] = static_cast<EdgeId>(context_edges.size());
                context_edges.push_back(std::move(copy));
                host_edges.push_back(e);
            }
            for (std::size_t i = 0; i < open.size(); ++i) {
                auto [v, t] = open[i];
                Edge& ce = context_edges[slot[t->edge]];
                NodeId node = first_block[v] + static_cast<NodeId>(pick[i]);
                (t->source ? ce.sources : ce.targets)[t->position] = node;
            }
            for (Edge& ce : context_edges) pc.context.add_edge(std::move(ce));
            pc.from_interface = from_k;
            pc.to_host = Morphism{to_host, host_edges};
            out.complements.push_back(std::move(pc));
        } while (advance(pick, pick_limits));
    } while (advance(choice, choice_limits));
    return out;
}

}  // namespace detail

/**
 * All pushout complements of K -l-> L -m-> G up to isomorphism.
 *
 * For l mono the complement is unique when the gluing condition holds and
 * is built by deletion. For discrete K every admissible way of splitting
 * the matched nodes is enumerated. Other shapes throw UnsupportedRuleShape.
 * Each returned complement is checked with is_pushout.
 */
inline ComplementSearch pushout_complements(const Hypergraph& k, const Hypergraph& l_graph, const Hypergraph& g,
                                            const Morphism& l, const Morphism& m) {
    if (!is_homomorphism(k, l_graph, l)) throw std::invalid_argument("pushout_complements: l is not a homomorphism");
    if (!is_homomorphism(l_graph, g, m)) throw std::invalid_argument("pushout_complements: m is not a homomorphism");
    ComplementSearch out;
    if (is_mono(l))
        out = detail::complement_along_mono(k, l_graph, g, l, m);
    else if (k.is_discrete())
        out = detail::complements_discrete_interface(k, l_graph, g, l, m);
    else
        throw UnsupportedRuleShape("pushout complement for a non-injective rule with a non-discrete interface");
    for (const PushoutComplement& pc : out.complements)
        if (!is_pushout(l_graph, pc.context, g, l, pc.from_interface, m, pc.to_host))
            throw std::logic_error("pushout_complements: candidate fails the pushout check");
    return out;
}

/// Outcome of checking the two halves of a pasted square.
struct MixedDecomposition {
    bool preconditions = false;  // outer square pushout, right square pullback, bottom-right leg mono
    bool inner_pushout = false;  // left square
    bool right_pushout = false;  // right square

    bool holds() const { return preconditions && inner_pushout && right_pushout; }
};

/**
 * Pasted squares
 *
 *     K --c'--> C' --u--> C
 *     |l        |g'       |g
 *     L --m'--> G' --n--> G
 *
 * With the outer rectangle a pushout, the right square a pullback and n mono,
 * both squares are pushouts. Reports the preconditions and both verdicts.
 */
inline MixedDecomposition mixed_decomposition_check(const Hypergraph& l_graph, const Hypergraph& c_inner,
                                                    const Hypergraph& c_outer, const Hypergraph& g_inner,
                                                    const Hypergraph& g_outer, const Morphism& l, const Morphism& c,
                                                    const Morphism& u, const Morphism& m, const Morphism& n,
                                                    const Morphism& g_in, const Morphism& g_out) {
    MixedDecomposition r;
    const bool left_commutes = compose(l, m) == compose(c, g_in);
    const bool right_commutes = compose(g_in, n) == compose(u, g_out);
    if (!left_commutes || !right_commutes) return r;
    bool outer = is_pushout(l_graph, c_outer, g_outer, l, compose(c, u), compose(m, n), g_out);
    bool right_pullback = false;
    {
        Pullback pb = pullback(g_inner, c_outer, n, g_out);
        if (pb.object.node_count() == c_inner.node_count() && pb.object.edge_count() == c_inner.edge_count()) {
            // Comparison C' -> pullback must be bijective.
            std::map<std::pair<NodeId, NodeId>, NodeId> pos;
            for (NodeId i = 0; i < pb.object.node_count(); ++i) pos[{pb.to_left.nodes[i], pb.to_right.nodes[i]}] = i;
            std::map<std::pair<EdgeId, EdgeId>, EdgeId> epos;
            for (EdgeId i = 0; i < pb.object.edge_count(); ++i) epos[{pb.to_left.edges[i], pb.to_right.edges[i]}] = i;
            Morphism cmp;
            bool ok = true;
            for (NodeId x = 0; ok && x < c_inner.node_count(); ++x) {
                auto it = pos.find({g_in.nodes[x], u.nodes[x]});
                ok = it != pos.end();
                if (ok) cmp.nodes.push_back(it->second);
            }
            for (EdgeId e = 0; ok && e < c_inner.edge_count(); ++e) {
                auto it = epos.find({g_in.edges[e], u.edges[e]});
                ok = it != epos.end();
                if (ok) cmp.edges.push_back(it->second);
            }
            right_pullback = ok && is_iso(cmp, pb.object);
        }
    }
    r.preconditions = outer && right_pullback && is_mono(n);
    r.inner_pushout = is_pushout(l_graph, c_inner, g_inner, l, c, m, g_in);
    r.right_pushout = is_pushout(g_inner, c_outer, g_outer, g_in, u, n, g_out);
    return r;
}

}  // namespace dpoi
