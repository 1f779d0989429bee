#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dpoi/hypergraph.hpp"

namespace dpoi {

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
    return mix64(seed ^ (mix64(v) + (seed << 6) + (seed >> 2)));
}

inline std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t hash_sorted(std::vector<std::uint64_t> v, std::uint64_t seed) {
    std::sort(v.begin(), v.end());
    for (std::uint64_t x : v) seed = hash_combine(seed, x);
    return seed;
}

struct Incidence {
    EdgeId edge;
    std::uint32_t role;  // 2*position for sources, 2*position+1 for targets
};

inline std::vector<std::vector<Incidence>> incidences(const Hypergraph& g) {
    std::vector<std::vector<Incidence>> inc(g.node_count());
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& edge = g.edge(e);
        for (std::uint32_t k = 0; k < edge.sources.size(); ++k) inc[edge.sources[k]].push_back({e, 2 * k});
        for (std::uint32_t k = 0; k < edge.targets.size(); ++k) inc[edge.targets[k]].push_back({e, 2 * k + 1});
    }
    return inc;
}

struct Coloring {
    std::vector<std::uint64_t> node;
    std::vector<std::uint64_t> edge;
};

// Colour refinement seeded with per-item anchor colours. The result is
// invariant under isomorphisms that respect the anchors.
inline Coloring refine(const Hypergraph& g, std::vector<std::uint64_t> node_seed,
                       const std::vector<std::uint64_t>& edge_seed, int rounds = 3) {
    const auto inc = incidences(g);
    Coloring c;
    c.node = std::move(node_seed);
    c.edge.resize(g.edge_count());
    std::vector<std::uint64_t> edge_base(g.edge_count());
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& edge = g.edge(e);
        std::uint64_t h = hash_combine(hash_string(edge.label), edge_seed[e]);
        h = hash_combine(h, edge.sources.size());
        edge_base[e] = hash_combine(h, edge.targets.size());
    }
    for (NodeId n = 0; n < g.node_count(); ++n) c.node[n] = hash_combine(c.node[n], inc[n].size());
    for (int r = 0; r < rounds; ++r) {
        for (EdgeId e = 0; e < g.edge_count(); ++e) {
            const Edge& edge = g.edge(e);
            std::uint64_t h = edge_base[e];
            for (NodeId s : edge.sources) h = hash_combine(h, c.node[s]);
            h = hash_combine(h, 0xABCDEFULL);
            for (NodeId t : edge.targets) h = hash_combine(h, c.node[t]);
            c.edge[e] = h;
        }
        std::vector<std::uint64_t> next(g.node_count());
        for (NodeId n = 0; n < g.node_count(); ++n) {
            std::vector<std::uint64_t> around;
            around.reserve(inc[n].size());
            for (const Incidence& i : inc[n]) around.push_back(hash_combine(c.edge[i.edge], i.role));
            next[n] = hash_sorted(std::move(around), c.node[n]);
        }
        c.node = std::move(next);
    }
    if (rounds == 0)
        for (EdgeId e = 0; e < g.edge_count(); ++e) c.edge[e] = edge_base[e];
    return c;
}

// Anchor colour of an item: the sorted list of anchor indices it takes part in.
inline std::vector<std::uint64_t> anchor_colors(std::size_t count,
                                                const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
                                                bool first) {
    std::vector<std::vector<std::uint64_t>> lists(count);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        std::uint32_t item = first ? pairs[i].first : pairs[i].second;
        if (item < count) lists[item].push_back(i + 1);
    }
    std::vector<std::uint64_t> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::uint64_t h = 0x5eedULL;
        for (std::uint64_t x : lists[k]) h = hash_combine(h, x);
        out[k] = h;
    }
    return out;
}

class IsoSearch {
public:
    IsoSearch(const Hypergraph& a, const Hypergraph& b, const Coloring& ca, const Coloring& cb)
        : a_(a), b_(b), ca_(ca), cb_(cb), node_map_(a.node_count(), kNone), node_rev_(b.node_count(), kNone),
          edge_map_(a.edge_count(), kNone), edge_rev_(b.edge_count(), kNone) {
        for (EdgeId e = 0; e < b.edge_count(); ++e) by_color_[cb.edge[e]].push_back(e);
    }

    bool pin_node(NodeId x, NodeId y) {
        if (node_map_[x] != kNone) return node_map_[x] == y;
        if (node_rev_[y] != kNone) return false;
        if (ca_.node[x] != cb_.node[y]) return false;
        node_map_[x] = y;
        node_rev_[y] = x;
        return true;
    }

    bool pin_edge(EdgeId e, EdgeId f) {
        if (edge_map_[e] != kNone) return edge_map_[e] == f;
        if (edge_rev_[f] != kNone) return false;
        std::vector<NodeId> trail;
        if (!assign_edge(e, f, trail)) return false;
        return true;
    }

    std::optional<Morphism> run() {
        order_edges();
        if (!search(0)) return std::nullopt;
        // Remaining nodes are isolated on both sides; match them by colour.
        std::unordered_map<std::uint64_t, std::vector<NodeId>> free_b;
        for (NodeId y = 0; y < b_.node_count(); ++y)
            if (node_rev_[y] == kNone) free_b[cb_.node[y]].push_back(y);
        for (auto& [col, ys] : free_b) std::reverse(ys.begin(), ys.end());
        for (NodeId x = 0; x < a_.node_count(); ++x) {
            if (node_map_[x] != kNone) continue;
            auto it = free_b.find(ca_.node[x]);
            if (it == free_b.end() || it->second.empty()) return std::nullopt;
            node_map_[x] = it->second.back();
            it->second.pop_back();
        }
        return Morphism{node_map_, edge_map_};
    }

private:
    static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

    bool assign_edge(EdgeId e, EdgeId f, std::vector<NodeId>& trail) {
        const Edge& ea = a_.edge(e);
        const Edge& eb = b_.edge(f);
        if (ea.label != eb.label || ea.sources.size() != eb.sources.size() ||
            ea.targets.size() != eb.targets.size())
            return false;
        auto bind = [&](NodeId x, NodeId y) {
            if (node_map_[x] != kNone) return node_map_[x] == y;
            if (node_rev_[y] != kNone || ca_.node[x] != cb_.node[y]) return false;
            node_map_[x] = y;
            node_rev_[y] = x;
            trail.push_back(x);
            return true;
        };
        bool ok = true;
        for (std::size_t k = 0; ok && k < ea.sources.size(); ++k) ok = bind(ea.sources[k], eb.sources[k]);
        for (std::size_t k = 0; ok && k < ea.targets.size(); ++k) ok = bind(ea.targets[k], eb.targets[k]);
        if (!ok) {
            undo(trail);
            return false;
        }
        edge_map_[e] = f;
        edge_rev_[f] = e;
        return true;
    }

    void undo(std::vector<NodeId>& trail) {
        for (NodeId x : trail) {
            node_rev_[node_map_[x]] = kNone;
            node_map_[x] = kNone;
        }
        trail.clear();
    }

    void order_edges() {
        std::vector<bool> placed(a_.edge_count(), false);
        std::vector<bool> touched(a_.node_count(), false);
        for (NodeId x = 0; x < a_.node_count(); ++x) touched[x] = node_map_[x] != kNone;
        for (EdgeId e = 0; e < a_.edge_count(); ++e)
            if (edge_map_[e] != kNone) placed[e] = true;
        for (std::size_t round = 0; round < a_.edge_count(); ++round) {
            int best_score = -1;
            EdgeId best = 0;
            for (EdgeId e = 0; e < a_.edge_count(); ++e) {
                if (placed[e]) continue;
                int score = 0;
                for (NodeId s : a_.edge(e).sources) score += touched[s];
                for (NodeId t : a_.edge(e).targets) score += touched[t];
                if (score > best_score) {
                    best_score = score;
                    best = e;
                }
            }
            if (best_score < 0) break;
            placed[best] = true;
            order_.push_back(best);
            for (NodeId s : a_.edge(best).sources) touched[s] = true;
            for (NodeId t : a_.edge(best).targets) touched[t] = true;
        }
    }

    bool search(std::size_t depth) {
        if (depth == order_.size()) return true;
        EdgeId e = order_[depth];
        auto it = by_color_.find(ca_.edge[e]);
        if (it == by_color_.end()) return false;
        for (EdgeId f : it->second) {
            if (edge_rev_[f] != kNone) continue;
            std::vector<NodeId> trail;
            if (!assign_edge(e, f, trail)) continue;
            if (search(depth + 1)) return true;
            edge_map_[e] = kNone;
            edge_rev_[f] = kNone;
            undo(trail);
        }
        return false;
    }

    const Hypergraph& a_;
    const Hypergraph& b_;
    const Coloring& ca_;
    const Coloring& cb_;
    std::vector<NodeId> node_map_, node_rev_;
    std::vector<EdgeId> edge_map_, edge_rev_;
    std::vector<EdgeId> order_;
    std::unordered_map<std::uint64_t, std::vector<EdgeId>> by_color_;
};

}  // namespace detail

/// Prescribed correspondences an isomorphism has to respect.
struct Anchors {
    std::vector<std::pair<NodeId, NodeId>> nodes;
    std::vector<std::pair<EdgeId, EdgeId>> edges;
};

/**
 * Finds an isomorphism a -> b sending every anchored item of a to its
 * partner in b. Complete: returns nullopt only when no such iso exists.
 */
inline std::optional<Morphism> find_isomorphism(const Hypergraph& a, const Hypergraph& b,
                                                const Anchors& anchors = {}) {
    if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return std::nullopt;
    for (auto [x, y] : anchors.nodes)
        if (x >= a.node_count() || y >= b.node_count()) return std::nullopt;
    for (auto [e, f] : anchors.edges)
        if (e >= a.edge_count() || f >= b.edge_count()) return std::nullopt;
    auto ca = detail::refine(a, detail::anchor_colors(a.node_count(), anchors.nodes, true),
                             detail::anchor_colors(a.edge_count(), anchors.edges, true));
    auto cb = detail::refine(b, detail::anchor_colors(b.node_count(), anchors.nodes, false),
                             detail::anchor_colors(b.edge_count(), anchors.edges, false));
    auto sorted = [](std::vector<std::uint64_t> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    if (sorted(ca.node) != sorted(cb.node) || sorted(ca.edge) != sorted(cb.edge)) return std::nullopt;
    detail::IsoSearch search(a, b, ca, cb);
    for (auto [x, y] : anchors.nodes)
        if (!search.pin_node(x, y)) return std::nullopt;
    for (auto [e, f] : anchors.edges)
        if (!search.pin_edge(e, f)) return std::nullopt;
    return search.run();
}

/// An isomorphism phi : a.graph -> b.graph with a.interface ; phi = b.interface.
inline std::optional<Morphism> are_isomorphic(const GraphWithInterface& a, const GraphWithInterface& b) {
    if (a.interface.size() != b.interface.size()) return std::nullopt;
    Anchors anchors;
    for (std::size_t j = 0; j < a.interface.size(); ++j) anchors.nodes.emplace_back(a.interface[j], b.interface[j]);
    return find_isomorphism(a.graph, b.graph, anchors);
}

/// Isomorphism of cospans: commutes with both legs.
inline std::optional<Morphism> are_isomorphic(const Cospan& a, const Cospan& b) {
    if (a.left.size() != b.left.size() || a.right.size() != b.right.size()) return std::nullopt;
    return are_isomorphic(rewire(a), rewire(b));
}

/// Iso-invariant fingerprint of a graph with interface.
inline std::uint64_t certificate(const GraphWithInterface& g) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (std::size_t j = 0; j < g.interface.size(); ++j) pairs.emplace_back(g.interface[j], g.interface[j]);
    auto c = detail::refine(g.graph, detail::anchor_colors(g.graph.node_count(), pairs, true),
                            std::vector<std::uint64_t>(g.graph.edge_count(), 0));
    std::uint64_t h = detail::hash_combine(g.graph.node_count(), g.graph.edge_count());
    h = detail::hash_combine(h, g.interface.size());
    h = detail::hash_sorted(c.node, h);
    h = detail::hash_sorted(c.edge, h);
    return h;
}

/// A set of graphs with interface, one representative per iso class.
class IsoClassIndex {
public:
    /// Index of the class of g, if present.
    std::optional<std::size_t> find(const GraphWithInterface& g) const { return find(g, certificate(g)); }

    /// Inserts g unless an isomorphic graph is present; returns (index, inserted).
    std::pair<std::size_t, bool> insert(const GraphWithInterface& g) {
        const std::uint64_t key = certificate(g);
        if (auto hit = find(g, key)) return {*hit, false};
        items_.push_back(g);
        buckets_[key].push_back(items_.size() - 1);
        return {items_.size() - 1, true};
    }

    std::size_t size() const { return items_.size(); }
    const GraphWithInterface& operator[](std::size_t i) const { return items_[i]; }
    const std::vector<GraphWithInterface>& items() const { return items_; }

private:
    std::optional<std::size_t> find(const GraphWithInterface& g, std::uint64_t key) const {
        auto it = buckets_.find(key);
        if (it == buckets_.end()) return std::nullopt;
        for (std::size_t i : it->second)
            if (are_isomorphic(items_[i], g)) return i;
        return std::nullopt;
    }

    std::vector<GraphWithInterface> items_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

}  // namespace dpoi
