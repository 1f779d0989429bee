#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <future>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpoi/category.hpp"
#include "dpoi/hypergraph.hpp"
#include "dpoi/isomorphism.hpp"
#include "dpoi/ma.hpp"
#include "dpoi/rewriting.hpp"

namespace dpoi {

enum class PairKind { plain, ma };

/**
 * Two steps out of a common overlap S <- J.
 *
 *   L1 --f1--> S <--f2-- L2
 *              ^
 *              J   (pullback of the contexts, or inputs+outputs of S)
 */
struct PreCriticalPair {
    std::size_t rule1 = 0;
    std::size_t rule2 = 0;
    std::string name1;
    std::string name2;
    Hypergraph overlap;             // S
    Morphism match1;                // L1 -> S
    Morphism match2;                // L2 -> S
    std::vector<NodeId> interface;  // J -> S
    RewriteStep branch1;            // S <- J  =>  H1 <- J
    RewriteStep branch2;            // S <- J  =>  H2 <- J
    PairKind kind = PairKind::plain;
    bool parallel = false;
    bool diagonal = false;     // same rule, same match
    std::size_t overlap_size = 0;  // items identified by the quotient L1 + L2 -> S

    bool critical() const { return !parallel && !diagonal; }
    GraphWithInterface source() const { return GraphWithInterface{overlap, interface}; }
};

struct PairOptions {
    /// Enumerate pairs without interfaces (J = 0), for demonstration only.
    bool empty_interface = false;
};

/// X -> L1 and Y -> L2 iso, C1 -> S and C2 -> S mono, with X, Y the pullbacks of the definition.
inline bool is_parallel_pair(const RewritingSystem& sys, const PreCriticalPair& p) {
    const RewriteRule& r1 = sys.rules.at(p.rule1);
    const RewriteRule& r2 = sys.rules.at(p.rule2);
    const PushoutComplement& c1 = p.branch1.complement;
    const PushoutComplement& c2 = p.branch2.complement;
    if (!is_mono(c1.to_host) || !is_mono(c2.to_host)) return false;
    Pullback x = pullback(r1.lhs, c2.context, p.match1, c2.to_host);
    Pullback y = pullback(r2.lhs, c1.context, p.match2, c1.to_host);
    return is_iso(x.to_left, r1.lhs) && is_iso(y.to_left, r2.lhs);
}

namespace detail {

// Quotients of L1 + L2 that can host both left-hand sides.
class OverlapEnumerator {
public:
    OverlapEnumerator(const RewritingSystem& sys, std::size_t i, std::size_t j, const PairOptions& opts)
        : sys_(sys), i_(i), j_(j), r1_(sys.rules[i]), r2_(sys.rules[j]), opts_(opts),
          convex_(sys.mode == Mode::convex) {
        sum_ = coproduct(r1_.lhs, r2_.lhs);
        n1_ = r1_.lhs.node_count();
        e1_ = r1_.lhs.edge_count();
        const std::size_t n = sum_.graph.node_count(), e = sum_.graph.edge_count();
        node_kept_.assign(n, false);
        edge_kept_.assign(e, false);
        for (NodeId x : r1_.left.nodes) node_kept_[x] = true;
        for (NodeId x : r2_.left.nodes) node_kept_[n1_ + x] = true;
        for (EdgeId x : r1_.left.edges) edge_kept_[x] = true;
        for (EdgeId x : r2_.left.edges) edge_kept_[e1_ + x] = true;
        incident_.assign(n, {});
        for (EdgeId f = 0; f < e; ++f) {
            for (NodeId s : sum_.graph.edge(f).sources) incident_[s].push_back(f);
            for (NodeId t : sum_.graph.edge(f).targets) incident_[t].push_back(f);
        }
    }

    std::vector<PreCriticalPair> run() {
        edge_block_.assign(sum_.graph.edge_count(), 0);
        edge_blocks_.clear();
        assign_edge(0);
        return std::move(out_);
    }

private:
    int node_side(NodeId x) const { return x < n1_ ? 0 : 1; }
    int edge_side(EdgeId f) const { return f < e1_ ? 0 : 1; }

    bool edge_fits(EdgeId f, const std::vector<EdgeId>& block) const {
        const Edge& ef = sum_.graph.edge(f);
        for (EdgeId g : block) {
            const Edge& eg = sum_.graph.edge(g);
            if (ef.label != eg.label || ef.sources.size() != eg.sources.size() ||
                ef.targets.size() != eg.targets.size())
                return false;
            if (edge_side(f) == edge_side(g) && (convex_ || !edge_kept_[f] || !edge_kept_[g])) return false;
        }
        return true;
    }

    void assign_edge(EdgeId f) {
        if (f == sum_.graph.edge_count()) {
            edges_done();
            return;
        }
        for (std::size_t b = 0; b < edge_blocks_.size(); ++b) {
            if (!edge_fits(f, edge_blocks_[b])) continue;
            edge_blocks_[b].push_back(f);
            edge_block_[f] = b;
            assign_edge(f + 1);
            edge_blocks_[b].pop_back();
        }
        edge_blocks_.push_back({f});
        edge_block_[f] = edge_blocks_.size() - 1;
        assign_edge(f + 1);
        edge_blocks_.pop_back();
    }

    // Node set admissible for both steps (monotone under merging).
    bool node_set_ok(const std::vector<NodeId>& set) const {
        int count[2] = {0, 0};
        bool deleted[2] = {false, false};
        for (NodeId x : set) {
            ++count[node_side(x)];
            if (!node_kept_[x]) deleted[node_side(x)] = true;
        }
        for (int s = 0; s < 2; ++s) {
            if (convex_ && count[s] > 1) return false;
            if (count[s] > 1)
                for (NodeId x : set)
                    if (node_side(x) == s && !node_kept_[x]) return false;
            // Dangling: edges at a node deleted by side s must all come from side s.
            if (deleted[s])
                for (NodeId x : set)
                    for (EdgeId f : incident_[x])
                        if (!block_has_side_[edge_block_[f]][s]) return false;
        }
        if (convex_) {
            int in = 0, out = 0;
            for (NodeId x : set) in += rep_in_[x], out += rep_out_[x];
            if (in > 1 || out > 1) return false;
        }
        return true;
    }

    bool has_deleted(const std::vector<NodeId>& set) const {
        return std::any_of(set.begin(), set.end(), [&](NodeId x) { return !node_kept_[x]; });
    }

    void edges_done() {
        const std::size_t n = sum_.graph.node_count();
        block_has_side_.assign(edge_blocks_.size(), {false, false});
        for (std::size_t b = 0; b < edge_blocks_.size(); ++b)
            for (EdgeId f : edge_blocks_[b]) block_has_side_[b][edge_side(f)] = true;
        UnionFind uf(n);
        for (const auto& block : edge_blocks_) {
            const Edge& first = sum_.graph.edge(block.front());
            for (EdgeId f : block) {
                const Edge& ef = sum_.graph.edge(f);
                for (std::size_t k = 0; k < ef.sources.size(); ++k) uf.unite(first.sources[k], ef.sources[k]);
                for (std::size_t k = 0; k < ef.targets.size(); ++k) uf.unite(first.targets[k], ef.targets[k]);
            }
        }
        rep_in_.assign(n, 0);
        rep_out_.assign(n, 0);
        for (const auto& block : edge_blocks_) {
            const Edge& first = sum_.graph.edge(block.front());
            for (NodeId s : first.sources) ++rep_out_[s];
            for (NodeId t : first.targets) ++rep_in_[t];
        }
        std::map<std::size_t, std::size_t> root_index;
        classes_.clear();
        for (NodeId x = 0; x < n; ++x) {
            auto [it, fresh] = root_index.emplace(uf.find(x), classes_.size());
            if (fresh) classes_.push_back({});
            classes_[it->second].push_back(x);
        }
        for (const auto& c : classes_)
            if (!node_set_ok(c)) return;
        node_blocks_.clear();
        class_block_.assign(classes_.size(), 0);
        assign_class(0);
    }

    void assign_class(std::size_t c) {
        if (c == classes_.size()) {
            quotient_done();
            return;
        }
        const auto& cls = classes_[c];
        for (std::size_t b = 0; b < node_blocks_.size(); ++b) {
            // With interfaces, gluing two interface nodes only repeats a finer pair.
            if (!opts_.empty_interface && !convex_ && !has_deleted(node_blocks_[b]) && !has_deleted(cls)) continue;
            // Index, not reference: the recursion below may grow node_blocks_.
            const std::size_t old = node_blocks_[b].size();
            node_blocks_[b].insert(node_blocks_[b].end(), cls.begin(), cls.end());
            if (node_set_ok(node_blocks_[b])) {
                class_block_[c] = b;
                assign_class(c + 1);
            }
            node_blocks_[b].resize(old);
        }
        node_blocks_.push_back(cls);
        class_block_[c] = node_blocks_.size() - 1;
        assign_class(c + 1);
        node_blocks_.pop_back();
    }

    // Restricted-growth labels of the node and edge partitions, optionally
    // with the two summands swapped.
    std::vector<std::size_t> partition_code(const std::vector<std::size_t>& node_label,
                                            const std::vector<std::size_t>& edge_label, bool swapped) const {
        const std::size_t n = node_label.size(), e = edge_label.size();
        const std::size_t n2 = n - n1_, e2 = e - e1_;
        auto code = [](const std::vector<std::size_t>& labels, const std::vector<std::size_t>& order) {
            std::map<std::size_t, std::size_t> renum;
            std::vector<std::size_t> out;
            for (std::size_t i : order) {
                auto [it, fresh] = renum.emplace(labels[i], renum.size());
                out.push_back(it->second);
            }
            return out;
        };
        std::vector<std::size_t> norder, eorder;
        if (!swapped) {
            for (std::size_t x = 0; x < n; ++x) norder.push_back(x);
            for (std::size_t f = 0; f < e; ++f) eorder.push_back(f);
        } else {
            for (std::size_t x = 0; x < n2; ++x) norder.push_back(n1_ + x);
            for (std::size_t x = 0; x < n1_; ++x) norder.push_back(x);
            for (std::size_t f = 0; f < e2; ++f) eorder.push_back(e1_ + f);
            for (std::size_t f = 0; f < e1_; ++f) eorder.push_back(f);
        }
        auto out = code(node_label, norder);
        auto edges = code(edge_label, eorder);
        out.push_back(static_cast<std::size_t>(-1));
        out.insert(out.end(), edges.begin(), edges.end());
        return out;
    }

    void quotient_done() {
        const std::size_t n = sum_.graph.node_count(), e = sum_.graph.edge_count();
        std::vector<std::size_t> node_label(n), edge_label(e);
        for (std::size_t c = 0; c < classes_.size(); ++c)
            for (NodeId x : classes_[c]) node_label[x] = class_block_[c];
        for (EdgeId f = 0; f < e; ++f) edge_label[f] = edge_block_[f];

        bool self_symmetric = false;
        if (i_ == j_) {
            auto mine = partition_code(node_label, edge_label, false);
            auto other = partition_code(node_label, edge_label, true);
            if (other < mine) return;
            self_symmetric = other == mine;
        }

        // Build S with items numbered by first member.
        Hypergraph s;
        std::map<std::size_t, NodeId> node_id;
        Morphism q{std::vector<NodeId>(n), std::vector<EdgeId>(e)};
        for (NodeId x = 0; x < n; ++x) {
            auto [it, fresh] = node_id.emplace(node_label[x], 0);
            if (fresh) it->second = s.add_node();
            q.nodes[x] = it->second;
        }
        std::map<std::size_t, EdgeId> edge_id;
        for (EdgeId f = 0; f < e; ++f) {
            auto [it, fresh] = edge_id.emplace(edge_label[f], 0);
            if (fresh) {
                Edge copy = sum_.graph.edge(f);
                for (NodeId& v : copy.sources) v = q.nodes[v];
                for (NodeId& v : copy.targets) v = q.nodes[v];
                it->second = s.add_edge(std::move(copy));
            }
            q.edges[f] = it->second;
        }
        s.set_path_typed(sum_.graph.path_typed());
        Morphism f1 = compose(sum_.left, q);
        Morphism f2 = compose(sum_.right, q);
        const std::size_t identified = sum_.graph.size() - s.size();

        if (convex_)
            emit_ma(s, f1, f2, identified);
        else
            emit_plain(s, f1, f2, identified, self_symmetric);
    }

    PreCriticalPair base_pair(const Hypergraph& s, const Morphism& f1, const Morphism& f2, std::size_t identified,
                              PairKind kind) const {
        PreCriticalPair p;
        p.rule1 = i_;
        p.rule2 = j_;
        p.name1 = r1_.name;
        p.name2 = r2_.name;
        p.overlap = s;
        p.match1 = f1;
        p.match2 = f2;
        p.kind = kind;
        p.overlap_size = identified;
        p.diagonal = i_ == j_ && f1 == f2;
        return p;
    }

    void emit_plain(const Hypergraph& s, const Morphism& f1, const Morphism& f2, std::size_t identified,
                    bool self_symmetric) {
        ComplementSearch cs1 = pushout_complements(r1_.interface, r1_.lhs, s, r1_.left, f1);
        if (cs1.complements.empty()) return;
        ComplementSearch cs2 = pushout_complements(r2_.interface, r2_.lhs, s, r2_.left, f2);
        if (cs2.complements.empty()) return;
        for (std::size_t a = 0; a < cs1.complements.size(); ++a)
            for (std::size_t b = 0; b < cs2.complements.size(); ++b) {
                if (self_symmetric && b < a) continue;
                const PushoutComplement& c1 = cs1.complements[a];
                const PushoutComplement& c2 = cs2.complements[b];
                PreCriticalPair p = base_pair(s, f1, f2, identified, PairKind::plain);
                std::vector<NodeId> j_to_c1, j_to_c2;
                if (!opts_.empty_interface) {
                    Pullback j = pullback(c1.context, c2.context, c1.to_host, c2.to_host);
                    if (!j.object.is_discrete())
                        throw UnsupportedRuleShape("pre-critical pair of rules '" + r1_.name + "' and '" + r2_.name +
                                                   "' has a non-discrete interface");
                    j_to_c1 = j.to_left.nodes;
                    j_to_c2 = j.to_right.nodes;
                    p.interface = compose(j_to_c1, c1.to_host);
                }
                p.branch1 = finish_step(i_, r1_, f1, c1, j_to_c1);
                p.branch2 = finish_step(j_, r2_, f2, c2, j_to_c2);
                p.parallel = is_parallel_pair(sys_, p);
                out_.push_back(std::move(p));
            }
    }

    void emit_ma(const Hypergraph& s, const Morphism& f1, const Morphism& f2, std::size_t identified) {
        MaAnalysis a = analyze_ma(s);
        if (!a.is_ma()) return;
        if (!is_convex_match(r1_.lhs, s, f1) || !is_convex_match(r2_.lhs, s, f2)) return;
        GraphWithInterface src = canonical_ma_interface(s);
        const std::size_t host_inputs = a.inputs.size();
        auto in1 = ma_rule_inputs(r1_);
        auto in2 = ma_rule_inputs(r2_);
        if (!in1 || !in2) return;
        auto b1 = boundary_complement(r1_.interface, r1_.lhs, r1_.left, *in1, s, f1, src.interface, host_inputs);
        if (!b1) return;
        auto b2 = boundary_complement(r2_.interface, r2_.lhs, r2_.left, *in2, s, f2, src.interface, host_inputs);
        if (!b2) return;
        PreCriticalPair p = base_pair(s, f1, f2, identified, PairKind::ma);
        p.interface = src.interface;
        p.branch1 = finish_step(i_, r1_, f1, b1->complement, b1->interface_factor);
        p.branch2 = finish_step(j_, r2_, f2, b2->complement, b2->interface_factor);
        p.parallel = is_parallel_pair(sys_, p);
        out_.push_back(std::move(p));
    }

    const RewritingSystem& sys_;
    std::size_t i_, j_;
    const RewriteRule& r1_;
    const RewriteRule& r2_;
    PairOptions opts_;
    bool convex_;
    Coproduct sum_;
    std::size_t n1_ = 0, e1_ = 0;
    std::vector<bool> node_kept_, edge_kept_;
    std::vector<std::vector<EdgeId>> incident_;
    std::vector<std::size_t> edge_block_;
    std::vector<std::vector<EdgeId>> edge_blocks_;
    std::vector<std::array<bool, 2>> block_has_side_;
    std::vector<int> rep_in_, rep_out_;
    std::vector<std::vector<NodeId>> classes_;
    std::vector<std::vector<NodeId>> node_blocks_;
    std::vector<std::size_t> class_block_;
    std::vector<PreCriticalPair> out_;
};

}  // namespace detail

/**
 * Pre-critical pairs of a system, for every rule pair (i, j) with i <= j.
 *
 * Quotients of L1 + L2 are enumerated edge partition first, then the node
 * merges forced by tentacles, then further node merges. Plain pairs get the
 * pullback of the two contexts as interface, ma pairs (convex mode) the
 * inputs and outputs of S. With interfaces, quotients that only glue
 * interface nodes of a coarser-grained pair are skipped: gluing along J
 * carries joins over. The empty-interface mode enumerates them all.
 */
inline std::vector<PreCriticalPair> enumerate_pre_critical_pairs(const RewritingSystem& sys,
                                                                 const PairOptions& opts = {}) {
    require_valid(sys);
    std::vector<PreCriticalPair> out;
    for (std::size_t i = 0; i < sys.rules.size(); ++i)
        for (std::size_t j = i; j < sys.rules.size(); ++j) {
            auto pairs = detail::OverlapEnumerator(sys, i, j, opts).run();
            for (auto& p : pairs) out.push_back(std::move(p));
        }
    return out;
}

/// Caps for one pair: the size cap defaults to four times the overlap.
inline Caps pair_caps(const Caps& caps, const PreCriticalPair& p) {
    Caps c = caps;
    if (c.max_graph_size == 0) c.max_graph_size = 4 * std::max<std::size_t>(p.overlap.size(), 1);
    return c;
}

/// Joins a parallel pair by applying each rule once to the other branch.
inline std::optional<GraphWithInterface> join_parallel_pair(const RewritingSystem& sys, const PreCriticalPair& p) {
    if (!p.parallel) return std::nullopt;
    // The match of each rule factors through the other rule's context.
    auto lift = [&](const Morphism& match, const RewriteStep& other) -> std::optional<Morphism> {
        const PushoutComplement& c = other.complement;
        Morphism into_context;
        for (NodeId v : match.nodes) {
            auto it = std::find(c.to_host.nodes.begin(), c.to_host.nodes.end(), v);
            if (it == c.to_host.nodes.end()) return std::nullopt;
            into_context.nodes.push_back(static_cast<NodeId>(it - c.to_host.nodes.begin()));
        }
        for (EdgeId e : match.edges) {
            auto it = std::find(c.to_host.edges.begin(), c.to_host.edges.end(), e);
            if (it == c.to_host.edges.end()) return std::nullopt;
            into_context.edges.push_back(static_cast<EdgeId>(it - c.to_host.edges.begin()));
        }
        return compose(into_context, other.context_to_result);
    };
    auto m2 = lift(p.match2, p.branch1);
    auto m1 = lift(p.match1, p.branch2);
    if (!m1 || !m2) return std::nullopt;
    auto from1 = apply_step(sys, p.rule2, *m2, p.branch1.result);
    auto from2 = apply_step(sys, p.rule1, *m1, p.branch2.result);
    for (const RewriteStep& a : from1)
        for (const RewriteStep& b : from2)
            if (are_isomorphic(a.result, b.result)) return a.result;
    return std::nullopt;
}

enum class Verdict { confluent, not_confluent, inconclusive };

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::confluent: return "confluent";
        case Verdict::not_confluent: return "not-confluent";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct PairVerdict {
    PreCriticalPair pair;
    JoinResult join;
    bool joined_in_parallel = false;  // joined by one step on each branch
    std::string note;
    // Convex analysis with path extensions: the relation and extended source that failed.
    std::optional<std::vector<std::pair<NodeId, NodeId>>> path_relation;
    std::optional<GraphWithInterface> extension;
};

struct ConfluenceReport {
    Verdict verdict = Verdict::confluent;
    Mode mode = Mode::plain;
    std::vector<PairVerdict> pairs;
    Caps caps;
    bool truncated = false;
    std::string note;
    std::size_t critical_pairs = 0;
    double elapsed_ms = 0.0;
};

struct ConfluenceOptions {
    PairOptions pairs;
    std::size_t jobs = 1;
};

/// Joinability of one pre-critical pair under the system's own rewriting relation.
inline PairVerdict check_pair(const RewritingSystem& sys, const PreCriticalPair& p, const Caps& caps) {
    PairVerdict v;
    v.pair = p;
    if (p.parallel) {
        if (auto w = join_parallel_pair(sys, p)) {
            v.join.verdict = Joinability::joinable;
            v.join.witness = *w;
            v.joined_in_parallel = true;
            return v;
        }
    }
    v.join = check_joinable(sys, p.branch1.result, p.branch2.result, pair_caps(caps, p));
    return v;
}

namespace detail {

template <class F>
std::vector<PairVerdict> run_pairs(const std::vector<PreCriticalPair>& pairs, std::size_t jobs, F check) {
    std::vector<PairVerdict> out(pairs.size());
    if (jobs <= 1) {
        for (std::size_t k = 0; k < pairs.size(); ++k) out[k] = check(pairs[k]);
        return out;
    }
    std::size_t next = 0;
    while (next < pairs.size()) {
        std::vector<std::future<PairVerdict>> batch;
        const std::size_t first = next;
        for (; next < pairs.size() && batch.size() < jobs; ++next)
            batch.push_back(std::async(std::launch::async, check, std::cref(pairs[next])));
        for (std::size_t k = 0; k < batch.size(); ++k) out[first + k] = batch[k].get();
    }
    return out;
}

inline void settle(ConfluenceReport& r) {
    bool failed = false, truncated = false;
    for (const PairVerdict& v : r.pairs) {
        if (v.pair.critical()) ++r.critical_pairs;
        failed |= v.join.verdict == Joinability::not_joinable;
        truncated |= v.join.verdict == Joinability::truncated;
    }
    r.truncated = truncated;
    r.verdict = failed ? Verdict::not_confluent : truncated ? Verdict::inconclusive : Verdict::confluent;
}

}  // namespace detail

/**
 * Confluence of a terminating system: every pre-critical pair must be
 * joinable. Termination is the caller's assumption; caps bound the search.
 * In empty-interface mode pairs are checked but no verdict is drawn.
 */
inline ConfluenceReport decide_confluence(const RewritingSystem& sys, const Caps& caps = {},
                                          const ConfluenceOptions& opts = {}) {
    const auto start = std::chrono::steady_clock::now();
    ConfluenceReport r;
    r.mode = sys.mode;
    r.caps = caps;
    auto pairs = enumerate_pre_critical_pairs(sys, opts.pairs);
    r.pairs = detail::run_pairs(pairs, opts.jobs, [&](const PreCriticalPair& p) { return check_pair(sys, p, caps); });
    detail::settle(r);
    r.note = "termination assumed";
    if (opts.pairs.empty_interface) {
        r.verdict = Verdict::inconclusive;
        r.note = "empty-interface enumeration: ground confluence is undecidable, no verdict drawn";
    }
    r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

/// A step restricted to a subgraph G' of its source, with comparison maps back.
struct ClippedStep {
    RewriteStep step;             // from G', interface left empty
    Morphism context_to_outer;    // C' -> C
    Morphism result_to_outer;     // H' -> H
};

/**
 * Clipping: given step G <- C -> H with match L -> G' -> G (mono G' -> G),
 * C' is the pullback of G' -> G <- C and H' the pushout of C' <- K -> R.
 */
inline ClippedStep clip_step(const RewritingSystem& sys, const RewriteStep& step, const Hypergraph& inner,
                             const Morphism& factor, const Morphism& mono) {
    const RewriteRule& rule = sys.rules.at(step.rule);
    if (!is_mono(mono)) throw std::invalid_argument("clip_step: G' -> G is not mono");
    if (!is_homomorphism(rule.lhs, inner, factor) || compose(factor, mono) != step.match)
        throw std::invalid_argument("clip_step: match does not factor through G'");
    const PushoutComplement& c = step.complement;
    Pullback pb = pullback(inner, c.context, mono, c.to_host);
    std::map<std::pair<NodeId, NodeId>, NodeId> node_at;
    for (NodeId v = 0; v < pb.object.node_count(); ++v) node_at[{pb.to_left.nodes[v], pb.to_right.nodes[v]}] = v;
    std::map<std::pair<EdgeId, EdgeId>, EdgeId> edge_at;
    for (EdgeId e = 0; e < pb.object.edge_count(); ++e) edge_at[{pb.to_left.edges[e], pb.to_right.edges[e]}] = e;
    Morphism k_to_cp;
    for (NodeId k = 0; k < rule.interface.node_count(); ++k)
        k_to_cp.nodes.push_back(node_at.at({factor.nodes[rule.left.nodes[k]], c.from_interface.nodes[k]}));
    for (EdgeId k = 0; k < rule.interface.edge_count(); ++k)
        k_to_cp.edges.push_back(edge_at.at({factor.edges[rule.left.edges[k]], c.from_interface.edges[k]}));
    PushoutComplement inner_pc{pb.object, k_to_cp, pb.to_left};
    ClippedStep out;
    out.step = finish_step(step.rule, rule, factor, inner_pc, {});
    out.context_to_outer = pb.to_right;
    // H' -> H from the pushout property of H'.
    Morphism h{std::vector<NodeId>(out.step.result.graph.node_count()),
               std::vector<EdgeId>(out.step.result.graph.edge_count())};
    const Morphism via_c = compose(pb.to_right, step.context_to_result);
    for (NodeId x = 0; x < pb.object.node_count(); ++x) h.nodes[out.step.context_to_result.nodes[x]] = via_c.nodes[x];
    for (EdgeId x = 0; x < pb.object.edge_count(); ++x) h.edges[out.step.context_to_result.edges[x]] = via_c.edges[x];
    for (NodeId x = 0; x < rule.rhs.node_count(); ++x)
        h.nodes[out.step.rhs_to_result.nodes[x]] = step.rhs_to_result.nodes[x];
    for (EdgeId x = 0; x < rule.rhs.edge_count(); ++x)
        h.edges[out.step.rhs_to_result.edges[x]] = step.rhs_to_result.edges[x];
    out.result_to_outer = h;
    return out;
}

/// A pre-critical pair extracted from a branching, with the embedding of its overlap.
struct ExtractedPair {
    PreCriticalPair pair;
    Morphism overlap_to_source;  // G0' -> G0, mono
    ClippedStep clipped1;
    ClippedStep clipped2;
};

/**
 * Extraction: factor [f1, f2] through its image G0', clip both steps to G0',
 * and take the pullback of the clipped contexts as interface.
 */
inline ExtractedPair extract_pre_critical_pair(const RewritingSystem& sys, const GraphWithInterface& source,
                                               const RewriteStep& step1, const RewriteStep& step2) {
    const RewriteRule& r1 = sys.rules.at(step1.rule);
    const RewriteRule& r2 = sys.rules.at(step2.rule);
    Coproduct sum = coproduct(r1.lhs, r2.lhs);
    Morphism joint;
    joint.nodes = step1.match.nodes;
    joint.nodes.insert(joint.nodes.end(), step2.match.nodes.begin(), step2.match.nodes.end());
    joint.edges = step1.match.edges;
    joint.edges.insert(joint.edges.end(), step2.match.edges.begin(), step2.match.edges.end());
    Factorization img = epi_mono_factorize(sum.graph, source.graph, joint);
    Morphism f1 = compose(sum.left, img.epi);
    Morphism f2 = compose(sum.right, img.epi);
    ExtractedPair out;
    out.overlap_to_source = img.mono;
    out.clipped1 = clip_step(sys, step1, img.image, f1, img.mono);
    out.clipped2 = clip_step(sys, step2, img.image, f2, img.mono);
    const PushoutComplement& c1 = out.clipped1.step.complement;
    const PushoutComplement& c2 = out.clipped2.step.complement;
    Pullback j = pullback(c1.context, c2.context, c1.to_host, c2.to_host);
    if (!j.object.is_discrete()) throw UnsupportedRuleShape("extracted pair has a non-discrete interface");
    PreCriticalPair& p = out.pair;
    p.rule1 = step1.rule;
    p.rule2 = step2.rule;
    p.name1 = r1.name;
    p.name2 = r2.name;
    p.overlap = img.image;
    p.match1 = f1;
    p.match2 = f2;
    p.interface = compose(j.to_left.nodes, c1.to_host);
    p.branch1 = finish_step(step1.rule, r1, f1, c1, j.to_left.nodes);
    p.branch2 = finish_step(step2.rule, r2, f2, c2, j.to_right.nodes);
    p.kind = PairKind::plain;
    p.overlap_size = sum.graph.size() - img.image.size();
    p.diagonal = step1.rule == step2.rule && f1 == f2;
    p.parallel = is_parallel_pair(sys, p);
    return out;
}

struct Derivation {
    GraphWithInterface source;
    std::vector<RewriteStep> steps;

    const GraphWithInterface& target() const { return steps.empty() ? source : steps.back().result; }
};

/**
 * Embedding: a derivation from G0' <- J' is carried into G0 along the
 * pushout square J' -> G0', J' -> C0, C0 -> G0, G0' -> G0. The new
 * derivation has interface J -> C0 -> G0.
 */
inline Derivation embed_derivation(const RewritingSystem& sys, const Derivation& d, const Hypergraph& c0,
                                   const std::vector<NodeId>& jp_to_c0, const Hypergraph& g0,
                                   const Morphism& c0_to_g0, const Morphism& inner_to_g0,
                                   const std::vector<NodeId>& j_to_c0) {
    const Morphism jp_to_inner{d.source.interface, {}};
    const Morphism jp_to_c0_m{jp_to_c0, {}};
    if (!is_pushout(d.source.graph, c0, g0, jp_to_inner, jp_to_c0_m, inner_to_g0, c0_to_g0))
        throw std::invalid_argument("embed_derivation: gluing square is not a pushout");
    Derivation out;
    out.source = GraphWithInterface{g0, compose(j_to_c0, c0_to_g0)};
    Hypergraph prev = g0;
    Morphism inner_to_prev = inner_to_g0;
    Morphism c0_to_prev = c0_to_g0;
    for (const RewriteStep& st : d.steps) {
        const RewriteRule& rule = sys.rules.at(st.rule);
        // (eps) C_i = C0 +_{J'} C_i'
        Pushout ci = pushout(c0, st.complement.context, jp_to_c0_m, Morphism{st.interface_factor, {}});
        // (delta) G_i = C_i +_{C_i'} G_i'
        Pushout gi = pushout(ci.object, st.result.graph, ci.from_right, st.context_to_result);
        // (gamma) C_i -> G_{i-1} induced by C0 -> G_{i-1} and C_i' -> G_{i-1}' -> G_{i-1}
        Morphism u{std::vector<NodeId>(ci.object.node_count()), std::vector<EdgeId>(ci.object.edge_count())};
        const Morphism inner_ctx = compose(st.complement.to_host, inner_to_prev);
        for (NodeId x = 0; x < c0.node_count(); ++x) u.nodes[ci.from_left.nodes[x]] = c0_to_prev.nodes[x];
        for (EdgeId x = 0; x < c0.edge_count(); ++x) u.edges[ci.from_left.edges[x]] = c0_to_prev.edges[x];
        for (NodeId x = 0; x < st.complement.context.node_count(); ++x)
            u.nodes[ci.from_right.nodes[x]] = inner_ctx.nodes[x];
        for (EdgeId x = 0; x < st.complement.context.edge_count(); ++x)
            u.edges[ci.from_right.edges[x]] = inner_ctx.edges[x];

        RewriteStep next;
        next.rule = st.rule;
        next.rule_name = st.rule_name;
        next.match = compose(st.match, inner_to_prev);
        next.complement = PushoutComplement{ci.object, compose(st.complement.from_interface, ci.from_right), u};
        next.context_to_result = gi.from_left;
        next.rhs_to_result = compose(st.rhs_to_result, gi.from_right);
        next.interface_factor = compose(j_to_c0, ci.from_left);
        next.result = GraphWithInterface{gi.object, compose(next.interface_factor, gi.from_left)};
        if (!is_pushout(rule.lhs, ci.object, prev, rule.left, next.complement.from_interface, next.match, u))
            throw std::logic_error("embed_derivation: left square of an embedded step is not a pushout");

        inner_to_prev = gi.from_right;
        c0_to_prev = compose(ci.from_left, gi.from_left);
        prev = gi.object;
        out.steps.push_back(std::move(next));
    }
    return out;
}

}  // namespace dpoi
