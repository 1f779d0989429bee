#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dpoi/convex.hpp"
#include "dpoi/critical_pairs.hpp"
#include "dpoi/hypergraph.hpp"
#include "dpoi/ma.hpp"
#include "dpoi/rewriting.hpp"

namespace dpoi {

/// Pairs (output y, input x) of a fixed ma graph, kept sorted and unique.
struct PathRelation {
    std::vector<std::pair<NodeId, NodeId>> pairs;

    PathRelation() = default;
    explicit PathRelation(std::vector<std::pair<NodeId, NodeId>> p) : pairs(std::move(p)) { normalize(); }

    void normalize() {
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    }
    bool contains(NodeId y, NodeId x) const { return std::binary_search(pairs.begin(), pairs.end(), std::pair{y, x}); }
    bool subset_of(const PathRelation& o) const {
        return std::includes(o.pairs.begin(), o.pairs.end(), pairs.begin(), pairs.end());
    }
    bool empty() const { return pairs.empty(); }
    std::size_t size() const { return pairs.size(); }
    bool operator==(const PathRelation& o) const { return pairs == o.pairs; }
    bool operator<(const PathRelation& o) const { return pairs < o.pairs; }
};

/// R_m: output y of g relates to input x when a path leads from m(y) to m(x) in h.
inline PathRelation path_relation(const Hypergraph& g, const Hypergraph& h, const Morphism& m) {
    if (!is_mono(m) || !is_homomorphism(g, h, m)) throw std::invalid_argument("path_relation: not a mono");
    MaAnalysis a = analyze_ma(g);
    const auto reach = reachability(h);
    PathRelation r;
    for (NodeId y : a.outputs)
        for (NodeId x : a.inputs)
            if (reach[m.nodes[y]][m.nodes[x]]) r.pairs.emplace_back(y, x);
    r.normalize();
    return r;
}

/// m path-covered by m2: R_m within R_m2.
inline bool path_covers(const Hypergraph& g, const Hypergraph& h, const Morphism& m, const Hypergraph& h2,
                        const Morphism& m2) {
    return path_relation(g, h, m).subset_of(path_relation(g, h2, m2));
}

/// The data the maximal-relation search runs on.
struct PathProblem {
    std::vector<NodeId> inputs;
    std::vector<NodeId> outputs;
    std::set<std::pair<NodeId, NodeId>> paths;      // (input x, output y): x reaches y inside the graph
    std::set<std::pair<NodeId, NodeId>> forbidden;  // (output y, input x): would break convexity
};

/// Paths include the empty path at a node that is both input and output.
inline PathProblem path_problem(const Hypergraph& g, const std::vector<Morphism>& convex_images = {}) {
    PathProblem pp;
    MaAnalysis a = analyze_ma(g);
    pp.inputs = a.inputs;
    pp.outputs = a.outputs;
    const auto reach = reachability(g);
    auto reaches = [&](NodeId u, NodeId v) { return u == v || reach[u][v]; };
    for (NodeId x : a.inputs)
        for (NodeId y : a.outputs)
            if (reaches(x, y)) pp.paths.emplace(x, y);
    for (const Morphism& m : convex_images)
        for (NodeId y : a.outputs)
            for (NodeId x : a.inputs) {
                bool from = std::any_of(m.nodes.begin(), m.nodes.end(), [&](NodeId u) { return reaches(u, y); });
                bool to = std::any_of(m.nodes.begin(), m.nodes.end(), [&](NodeId v) { return reaches(x, v); });
                if (from && to) pp.forbidden.emplace(y, x);
            }
    return pp;
}

/// Closed under R;paths;R, free of cycles through the graph, and of forbidden pairs.
inline bool is_realizable(const PathProblem& pp, const PathRelation& r) {
    for (auto [y, x] : r.pairs) {
        if (pp.forbidden.count({y, x}) || pp.paths.count({x, y})) return false;
        for (auto [y2, x2] : r.pairs)
            if (pp.paths.count({x, y2}) && !r.contains(y, x2)) return false;
    }
    return true;
}

namespace detail {

inline std::set<std::pair<NodeId, NodeId>> relation_closure(const PathProblem& pp,
                                                            std::set<std::pair<NodeId, NodeId>> r) {
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<std::pair<NodeId, NodeId>> add;
        for (auto [y, x] : r)
            for (auto [y2, x2] : r)
                if (pp.paths.count({x, y2}) && !r.count({y, x2})) add.emplace_back(y, x2);
        for (auto& p : add) grew |= r.insert(p).second;
    }
    return r;
}

inline bool clean(const PathProblem& pp, const std::set<std::pair<NodeId, NodeId>>& r) {
    for (auto [y, x] : r)
        if (pp.forbidden.count({y, x}) || pp.paths.count({x, y})) return false;
    return true;
}

}  // namespace detail

/**
 * All inclusion-maximal realizable relations. Include/exclude search over
 * the candidate pairs; including a pair adds its closure, which must avoid
 * every excluded pair. Maximality is checked at the leaves.
 */
inline std::vector<PathRelation> find_maximal_relations(const PathProblem& pp) {
    using Set = std::set<std::pair<NodeId, NodeId>>;
    std::vector<std::pair<NodeId, NodeId>> candidates;
    for (NodeId y : pp.outputs)
        for (NodeId x : pp.inputs)
            if (!pp.forbidden.count({y, x}) && !pp.paths.count({x, y})) candidates.emplace_back(y, x);
    std::set<PathRelation> found;
    Set included, excluded;
    std::function<void(std::size_t)> go = [&](std::size_t k) {
        while (k < candidates.size() && included.count(candidates[k])) ++k;
        if (k == candidates.size()) {
            for (const auto& p : excluded) {
                Set bigger = included;
                bigger.insert(p);
                if (detail::clean(pp, detail::relation_closure(pp, bigger))) return;
            }
            found.insert(PathRelation({included.begin(), included.end()}));
            return;
        }
        const auto p = candidates[k];
        Set with = included;
        with.insert(p);
        with = detail::relation_closure(pp, with);
        bool ok = detail::clean(pp, with) &&
                  std::none_of(excluded.begin(), excluded.end(), [&](const auto& e) { return with.count(e) > 0; });
        if (ok) {
            Set saved = included;
            included = std::move(with);
            go(k + 1);
            included = std::move(saved);
        }
        excluded.insert(p);
        go(k + 1);
        excluded.erase(p);
    };
    go(0);
    return {found.begin(), found.end()};
}

/// Maximal path relations of an ma pair: both matches must stay convex.
inline std::vector<PathRelation> enumerate_maximal_path_relations(const PreCriticalPair& pair) {
    return find_maximal_relations(path_problem(pair.overlap, {pair.match1, pair.match2}));
}

struct PathExtension {
    Hypergraph base;
    Hypergraph extended;  // over the signature plus path generators
    Morphism embedding;   // base -> extended
    PathRelation relation;
};

/**
 * Canonical extension: every related output y fans out through a chain of
 * split edges, every related input x is fed by a chain of join edges, and
 * one link edge runs per pair. A single pair needs no tree at either end.
 */
inline PathExtension build_path_extension(const Hypergraph& g, const PathRelation& r) {
    PathProblem pp = path_problem(g);
    for (auto [y, x] : r.pairs)
        if (std::find(pp.outputs.begin(), pp.outputs.end(), y) == pp.outputs.end() ||
            std::find(pp.inputs.begin(), pp.inputs.end(), x) == pp.inputs.end())
            throw std::invalid_argument("build_path_extension: relation is not between outputs and inputs");
    if (!is_realizable(pp, r)) throw std::invalid_argument("build_path_extension: relation would force a cycle");
    PathExtension ext;
    ext.base = g;
    ext.extended = g;
    ext.embedding = identity(g);
    ext.relation = r;
    if (r.empty()) return ext;
    Hypergraph& p = ext.extended;
    p.set_path_typed(true);
    std::map<NodeId, std::vector<NodeId>> out_of, into;
    for (auto [y, x] : r.pairs) {
        out_of[y].push_back(x);
        into[x].push_back(y);
    }
    // Leaves of the fan-out tree at y, one per related input in ascending order.
    std::map<std::pair<NodeId, NodeId>, NodeId> tail, head;
    for (auto& [y, xs] : out_of) {
        NodeId at = y;
        for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
            NodeId leaf = p.add_node(), rest = p.add_node();
            p.add_edge(std::string(kPathSplit), {at}, {leaf, rest});
            tail[{y, xs[k]}] = leaf;
            at = rest;
        }
        tail[{y, xs.back()}] = at;
    }
    for (auto& [x, ys] : into) {
        NodeId at = x;
        for (std::size_t k = 0; k + 1 < ys.size(); ++k) {
            NodeId leaf = p.add_node(), rest = p.add_node();
            p.add_edge(std::string(kPathJoin), {leaf, rest}, {at});
            head[{ys[k], x}] = leaf;
            at = rest;
        }
        head[{ys.back(), x}] = at;
    }
    for (auto [y, x] : r.pairs) p.add_edge(std::string(kPathLink), {tail.at({y, x})}, {head.at({y, x})});
    return ext;
}

struct LiftedBranching {
    PathRelation relation;
    PathExtension extension;
    GraphWithInterface source;  // P with its inputs and outputs
    std::optional<RewriteStep> branch1;
    std::optional<RewriteStep> branch2;
    JoinResult join;
};

/// Lifts both steps of an ma pair along an extension.
inline LiftedBranching lift_branching(const RewritingSystem& sys, const PreCriticalPair& pair,
                                      const PathExtension& ext) {
    LiftedBranching out;
    out.relation = ext.relation;
    out.extension = ext;
    out.source = canonical_ma_interface(ext.extended);
    out.branch1 = convex_step(sys, pair.rule1, compose(pair.match1, ext.embedding), out.source);
    out.branch2 = convex_step(sys, pair.rule2, compose(pair.match2, ext.embedding), out.source);
    return out;
}

enum class PathJoinability { path_joinable, not_path_joinable, truncated };

inline std::string_view to_string(PathJoinability v) {
    switch (v) {
        case PathJoinability::path_joinable: return "path-joinable";
        case PathJoinability::not_path_joinable: return "not-path-joinable";
        case PathJoinability::truncated: return "truncated";
    }
    return "truncated";
}

struct PathJoinResult {
    PathJoinability verdict = PathJoinability::path_joinable;
    std::vector<LiftedBranching> checked;  // one per maximal relation
    std::optional<std::size_t> witness;    // index of the first failing relation
};

inline PathJoinResult is_path_joinable(const RewritingSystem& sys, const PreCriticalPair& pair, const Caps& caps) {
    if (sys.mode != Mode::convex) throw std::invalid_argument("path joinability needs convex mode");
    PathJoinResult out;
    bool truncated = false;
    for (const PathRelation& r : enumerate_maximal_path_relations(pair)) {
        LiftedBranching lb = lift_branching(sys, pair, build_path_extension(pair.overlap, r));
        if (!lb.branch1 || !lb.branch2) {
            // Cannot happen for a genuine ma pair: convexity is what the relation preserves.
            throw std::logic_error("is_path_joinable: a branch does not lift along its extension");
        }
        Caps c = caps;
        if (c.max_graph_size == 0) c.max_graph_size = 4 * std::max<std::size_t>(lb.source.graph.size(), 1);
        lb.join = check_joinable(sys, lb.branch1->result, lb.branch2->result, c);
        if (lb.join.verdict == Joinability::not_joinable && !out.witness) out.witness = out.checked.size();
        truncated |= lb.join.verdict == Joinability::truncated;
        out.checked.push_back(std::move(lb));
    }
    out.verdict = out.witness ? PathJoinability::not_path_joinable
                  : truncated ? PathJoinability::truncated
                              : PathJoinability::path_joinable;
    return out;
}

/**
 * Local confluence of a convex system: every ma pair must be path-joinable.
 * A failure is witnessed over the signature extended with path generators,
 * which the report notes.
 */
inline ConfluenceReport decide_local_confluence_convex(const RewritingSystem& sys, const Caps& caps = {},
                                                       std::size_t jobs = 1) {
    const auto start = std::chrono::steady_clock::now();
    auto pairs = enumerate_ma_pre_critical_pairs(sys);
    ConfluenceReport r;
    r.mode = sys.mode;
    r.caps = caps;
    r.pairs = detail::run_pairs(pairs, jobs, [&](const PreCriticalPair& p) {
        PairVerdict v;
        v.pair = p;
        PathJoinResult pj = is_path_joinable(sys, p, caps);
        for (const LiftedBranching& lb : pj.checked) v.join.explored += lb.join.explored;
        if (pj.verdict == PathJoinability::not_path_joinable) {
            const LiftedBranching& w = pj.checked[*pj.witness];
            v.join.verdict = Joinability::not_joinable;
            v.path_relation = w.relation.pairs;
            v.extension = w.source;
            v.note = "not path-joinable";
        } else if (pj.verdict == PathJoinability::truncated) {
            v.join.verdict = Joinability::truncated;
        } else {
            v.join.verdict = Joinability::joinable;
            if (!pj.checked.empty()) v.join.witness = pj.checked.front().join.witness;
        }
        return v;
    });
    detail::settle(r);
    r.note = r.verdict == Verdict::not_confluent
                 ? "not locally confluent over the signature extended with path generators"
                 : "local confluence via path extensions; termination assumed for confluence";
    r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace dpoi
