#pragma once

#include <functional>
#include <map>
#include <string_view>
#include <vector>

#include "dpoi/hypergraph.hpp"

namespace dpoi {

namespace detail {

class HomSearch {
public:
    using Visitor = std::function<bool(const Morphism&)>;

    HomSearch(const Hypergraph& pattern, const Hypergraph& host, bool injective)
        : p_(pattern), h_(host), injective_(injective), node_map_(pattern.node_count(), kNone),
          node_use_(host.node_count(), 0), edge_map_(pattern.edge_count(), kNone),
          edge_used_(host.edge_count(), false) {
        for (EdgeId f = 0; f < host.edge_count(); ++f) by_label_[host.edge(f).label].push_back(f);
        order_edges();
    }

    bool fix_node(NodeId x, NodeId y) {
        if (x >= p_.node_count() || y >= h_.node_count()) return false;
        if (node_map_[x] != kNone) return node_map_[x] == y;
        if (injective_ && node_use_[y] > 0) return false;
        node_map_[x] = y;
        ++node_use_[y];
        return true;
    }

    // Returns false when the visitor asked to stop.
    bool run(const Visitor& visit) { return edges(0, visit); }

private:
    static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

    void order_edges() {
        std::vector<bool> placed(p_.edge_count(), false), touched(p_.node_count(), false);
        for (std::size_t round = 0; round < p_.edge_count(); ++round) {
            int best_score = -1;
            EdgeId best = 0;
            for (EdgeId e = 0; e < p_.edge_count(); ++e) {
                if (placed[e]) continue;
                int score = 0;
                for (NodeId s : p_.edge(e).sources) score += touched[s];
                for (NodeId t : p_.edge(e).targets) score += touched[t];
                if (score > best_score) best_score = score, best = e;
            }
            placed[best] = true;
            order_.push_back(best);
            for (NodeId s : p_.edge(best).sources) touched[s] = true;
            for (NodeId t : p_.edge(best).targets) touched[t] = true;
        }
        for (NodeId x = 0; x < p_.node_count(); ++x)
            if (!touched[x]) loose_nodes_.push_back(x);
    }

    bool edges(std::size_t depth, const Visitor& visit) {
        if (depth == order_.size()) return nodes(0, visit);
        const EdgeId e = order_[depth];
        const Edge& pe = p_.edge(e);
        auto it = by_label_.find(pe.label);
        if (it == by_label_.end()) return true;
        for (EdgeId f : it->second) {
            if (injective_ && edge_used_[f]) continue;
            const Edge& he = h_.edge(f);
            if (he.sources.size() != pe.sources.size() || he.targets.size() != pe.targets.size()) continue;
            std::vector<NodeId> trail;
            bool ok = true;
            auto bind = [&](NodeId x, NodeId y) {
                if (node_map_[x] != kNone) return node_map_[x] == y;
                if (injective_ && node_use_[y] > 0) return false;
                node_map_[x] = y;
                ++node_use_[y];
                trail.push_back(x);
                return true;
            };
            for (std::size_t k = 0; ok && k < pe.sources.size(); ++k) ok = bind(pe.sources[k], he.sources[k]);
            for (std::size_t k = 0; ok && k < pe.targets.size(); ++k) ok = bind(pe.targets[k], he.targets[k]);
            if (ok) {
                edge_map_[e] = f;
                edge_used_[f] = true;
                bool go_on = edges(depth + 1, visit);
                edge_used_[f] = false;
                edge_map_[e] = kNone;
                if (!go_on) {
                    release(trail);
                    return false;
                }
            }
            release(trail);
        }
        return true;
    }

    bool nodes(std::size_t k, const Visitor& visit) {
        while (k < loose_nodes_.size() && node_map_[loose_nodes_[k]] != kNone) ++k;
        if (k == loose_nodes_.size()) return visit(Morphism{node_map_, edge_map_});
        const NodeId x = loose_nodes_[k];
        for (NodeId y = 0; y < h_.node_count(); ++y) {
            if (injective_ && node_use_[y] > 0) continue;
            node_map_[x] = y;
            ++node_use_[y];
            bool go_on = nodes(k + 1, visit);
            --node_use_[y];
            node_map_[x] = kNone;
            if (!go_on) return false;
        }
        return true;
    }

    void release(std::vector<NodeId>& trail) {
        for (NodeId x : trail) {
            --node_use_[node_map_[x]];
            node_map_[x] = kNone;
        }
        trail.clear();
    }

    const Hypergraph& p_;
    const Hypergraph& h_;
    bool injective_;
    std::vector<NodeId> node_map_;
    std::vector<std::uint32_t> node_use_;
    std::vector<EdgeId> edge_map_;
    std::vector<bool> edge_used_;
    std::vector<EdgeId> order_;
    std::vector<NodeId> loose_nodes_;
    std::map<std::string_view, std::vector<EdgeId>> by_label_;
};

}  // namespace detail

/**
 * Calls visit for every homomorphism pattern -> host (injective ones only if
 * asked), in a deterministic order. Stops early when visit returns false.
 * `fixed` optionally prescribes images of some pattern nodes.
 */
inline void for_each_homomorphism(const Hypergraph& pattern, const Hypergraph& host, bool injective,
                                  const std::function<bool(const Morphism&)>& visit,
                                  const std::vector<std::pair<NodeId, NodeId>>& fixed = {}) {
    detail::HomSearch search(pattern, host, injective);
    for (auto [x, y] : fixed)
        if (!search.fix_node(x, y)) return;
    search.run(visit);
}

inline std::vector<Morphism> homomorphisms(const Hypergraph& pattern, const Hypergraph& host, bool injective) {
    std::vector<Morphism> out;
    for_each_homomorphism(pattern, host, injective, [&](const Morphism& m) {
        out.push_back(m);
        return true;
    });
    return out;
}

}  // namespace dpoi
