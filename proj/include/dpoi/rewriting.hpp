#pragma once

#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpoi/category.hpp"
#include "dpoi/hypergraph.hpp"
#include "dpoi/isomorphism.hpp"
#include "dpoi/ma.hpp"
#include "dpoi/matching.hpp"

namespace dpoi {

enum class Mode { plain, frobenius, convex };

inline std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::plain: return "plain";
        case Mode::frobenius: return "frobenius";
        case Mode::convex: return "convex";
    }
    return "plain";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
    if (s == "plain" || s == "plain-dpoi") return Mode::plain;
    if (s == "frobenius") return Mode::frobenius;
    if (s == "convex") return Mode::convex;
    return std::nullopt;
}

/// A DPO rule L <- K -> R.
struct RewriteRule {
    std::string name;
    Hypergraph interface;  // K
    Hypergraph lhs;        // L
    Hypergraph rhs;        // R
    Morphism left;         // K -> L
    Morphism right;        // K -> R

    bool is_left_linear() const { return is_mono(left); }
    bool has_discrete_interface() const { return interface.is_discrete(); }

    /// L <- K for a discrete K, the form used for ma checks.
    GraphWithInterface lhs_with_interface() const { return GraphWithInterface{lhs, left.nodes}; }
    GraphWithInterface rhs_with_interface() const { return GraphWithInterface{rhs, right.nodes}; }
};

/// Rule with K = discrete(|J|), legs given by the two interfaces.
inline RewriteRule make_rule(std::string name, const GraphWithInterface& lhs, const GraphWithInterface& rhs) {
    if (lhs.interface.size() != rhs.interface.size())
        throw std::invalid_argument("rule '" + name + "': sides have interfaces of different sizes");
    RewriteRule r;
    r.name = std::move(name);
    r.interface = discrete(lhs.interface.size());
    r.lhs = lhs.graph;
    r.rhs = rhs.graph;
    r.left = Morphism{lhs.interface, {}};
    r.right = Morphism{rhs.interface, {}};
    return r;
}

struct RewritingSystem {
    Signature signature;
    std::vector<RewriteRule> rules;
    Mode mode = Mode::plain;
    bool frobenius_structure = false;
};

/// Input and output counts of an ma-rule, if the rule is one.
inline std::optional<std::size_t> ma_rule_inputs(const RewriteRule& r) {
    if (!r.has_discrete_interface()) return std::nullopt;
    auto n = ma_interface_split(r.lhs_with_interface());
    if (!n) return std::nullopt;
    auto rhs = r.rhs_with_interface();
    auto rn = ma_interface_split(rhs);
    if (!rn || *rn != *n) return std::nullopt;
    return n;
}

/// Invariant violations of a system, empty when it is well-formed for its mode.
inline std::vector<std::string> check_system(const RewritingSystem& sys) {
    std::vector<std::string> out;
    for (const RewriteRule& r : sys.rules) {
        const std::string at = "rule '" + r.name + "': ";
        for (const Hypergraph* g : {&r.interface, &r.lhs, &r.rhs})
            for (const std::string& v : validate(*g, sys.signature)) out.push_back(at + v);
        if (!is_homomorphism(r.interface, r.lhs, r.left)) out.push_back(at + "left leg is not a homomorphism");
        if (!is_homomorphism(r.interface, r.rhs, r.right)) out.push_back(at + "right leg is not a homomorphism");
        if (sys.mode == Mode::frobenius && !r.has_discrete_interface())
            out.push_back(at + "frobenius mode requires a discrete interface");
        if (sys.mode == Mode::convex) {
            if (!r.is_left_linear()) out.push_back(at + "convex mode requires a left-linear rule");
            if (!ma_rule_inputs(r)) out.push_back(at + "convex mode requires both sides to be ma-cospans");
        }
    }
    return out;
}

inline void require_valid(const RewritingSystem& sys) {
    auto problems = check_system(sys);
    if (!problems.empty()) throw std::invalid_argument(problems.front());
}

/**
 * One DPOI step G <- J  =>  H <- J.
 *
 *       L <-- K --> R
 *       |m    |     |
 *       G <-- C --> H
 *              \
 *               J (through interface_factor)
 */
struct RewriteStep {
    std::size_t rule = 0;
    std::string rule_name;
    Morphism match;                       // L -> G
    PushoutComplement complement;         // K -> C -> G
    Morphism context_to_result;           // C -> H
    Morphism rhs_to_result;               // R -> H
    std::vector<NodeId> interface_factor; // J -> C
    GraphWithInterface result;            // H <- J
};

enum class MatchConstraint { any, mono, convex };

inline MatchConstraint default_constraint(Mode m) {
    return m == Mode::convex ? MatchConstraint::convex : MatchConstraint::any;
}

inline std::vector<Morphism> find_matches(const RewriteRule& rule, const Hypergraph& g, MatchConstraint c) {
    std::vector<Morphism> out;
    for_each_homomorphism(rule.lhs, g, c != MatchConstraint::any, [&](const Morphism& m) {
        if (c != MatchConstraint::convex || is_convex_match(rule.lhs, g, m)) out.push_back(m);
        return true;
    });
    return out;
}

inline std::vector<Morphism> find_matches(const RewriteRule& rule, const GraphWithInterface& g, MatchConstraint c) {
    return find_matches(rule, g.graph, c);
}

/// Completes a step from a complement and a factorisation of the interface.
inline RewriteStep finish_step(std::size_t rule_index, const RewriteRule& rule, const Morphism& match,
                               PushoutComplement complement, std::vector<NodeId> factor) {
    RewriteStep s;
    s.rule = rule_index;
    s.rule_name = rule.name;
    s.match = match;
    Pushout h = pushout(complement.context, rule.rhs, complement.from_interface, rule.right);
    s.complement = std::move(complement);
    s.context_to_result = h.from_left;
    s.rhs_to_result = h.from_right;
    s.result.graph = std::move(h.object);
    s.result.interface = compose(factor, s.context_to_result);
    s.interface_factor = std::move(factor);
    return s;
}

/// Both squares of a step are pushouts and the interface factors through the context.
inline bool verify_step(const RewritingSystem& sys, const GraphWithInterface& source, const RewriteStep& s) {
    const RewriteRule& rule = sys.rules.at(s.rule);
    const PushoutComplement& c = s.complement;
    try {
        if (!is_pushout(rule.lhs, c.context, source.graph, rule.left, c.from_interface, s.match, c.to_host))
            return false;
        if (!is_pushout(rule.rhs, c.context, s.result.graph, rule.right, c.from_interface, s.rhs_to_result,
                        s.context_to_result))
            return false;
    } catch (const std::invalid_argument&) {
        return false;
    }
    return compose(s.interface_factor, c.to_host) == source.interface &&
           compose(s.interface_factor, s.context_to_result) == s.result.interface;
}

namespace detail {

// Every J -> C with (J -> C -> G) = (J -> G).
inline std::vector<std::vector<NodeId>> interface_factorings(const PushoutComplement& pc,
                                                             const std::vector<NodeId>& iface) {
    std::vector<std::vector<NodeId>> fibres(iface.size());
    for (std::size_t j = 0; j < iface.size(); ++j)
        for (NodeId c = 0; c < pc.context.node_count(); ++c)
            if (pc.to_host.nodes[c] == iface[j]) fibres[j].push_back(c);
    std::vector<std::vector<NodeId>> out;
    if (std::any_of(fibres.begin(), fibres.end(), [](const auto& f) { return f.empty(); })) return out;
    std::vector<std::size_t> pick(iface.size(), 0);
    while (true) {
        std::vector<NodeId> f;
        for (std::size_t j = 0; j < iface.size(); ++j) f.push_back(fibres[j][pick[j]]);
        out.push_back(std::move(f));
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == fibres[i].size()) pick[i++] = 0;
        if (i == pick.size()) break;
    }
    return out;
}

}  // namespace detail

/**
 * All steps of one rule at one match, one per pushout complement and
 * interface factoring, de-duplicated up to iso of the result. In convex mode
 * only the boundary complement is used.
 */
inline std::vector<RewriteStep> apply_step(const RewritingSystem& sys, std::size_t rule_index, const Morphism& match,
                                           const GraphWithInterface& g) {
    const RewriteRule& rule = sys.rules.at(rule_index);
    std::vector<RewriteStep> out;
    if (sys.mode == Mode::convex) {
        if (!is_convex_match(rule.lhs, g.graph, match)) return out;
        auto rule_inputs = ma_rule_inputs(rule);
        auto host_inputs = ma_interface_split(g);
        if (!rule_inputs || !host_inputs) return out;
        auto bc = boundary_complement(rule.interface, rule.lhs, rule.left, *rule_inputs, g.graph, match, g.interface,
                                      *host_inputs);
        if (bc) out.push_back(finish_step(rule_index, rule, match, std::move(bc->complement), bc->interface_factor));
        return out;
    }
    ComplementSearch search = pushout_complements(rule.interface, rule.lhs, g.graph, rule.left, match);
    IsoClassIndex seen;
    for (PushoutComplement& pc : search.complements)
        for (auto& factor : detail::interface_factorings(pc, g.interface)) {
            RewriteStep s = finish_step(rule_index, rule, match, pc, std::move(factor));
            if (seen.insert(s.result).second) out.push_back(std::move(s));
        }
    return out;
}

/// All steps from g over all rules and matches, de-duplicated up to iso of results.
inline std::vector<RewriteStep> enumerate_steps(const RewritingSystem& sys, const GraphWithInterface& g) {
    std::vector<RewriteStep> out;
    IsoClassIndex seen;
    const MatchConstraint c = default_constraint(sys.mode);
    for (std::size_t r = 0; r < sys.rules.size(); ++r)
        for (const Morphism& m : find_matches(sys.rules[r], g, c))
            for (RewriteStep& s : apply_step(sys, r, m, g))
                if (seen.insert(s.result).second) out.push_back(std::move(s));
    return out;
}

/// Search bounds. A max_graph_size of 0 means unbounded.
struct Caps {
    std::size_t max_steps = 10000;
    std::size_t max_graph_size = 0;
};

struct NormalFormSearch {
    std::vector<GraphWithInterface> normal_forms;
    bool truncated = false;
    std::size_t explored = 0;
};

/// Breadth-first search over iso classes of successors of g.
inline NormalFormSearch search_normal_forms(const RewritingSystem& sys, const GraphWithInterface& g,
                                            const Caps& caps) {
    NormalFormSearch out;
    IsoClassIndex states;
    std::deque<std::size_t> queue;
    queue.push_back(states.insert(g).first);
    while (!queue.empty()) {
        if (out.explored >= caps.max_steps) {
            out.truncated = true;
            break;
        }
        const GraphWithInterface current = states[queue.front()];
        queue.pop_front();
        ++out.explored;
        if (caps.max_graph_size != 0 && current.graph.size() > caps.max_graph_size) {
            out.truncated = true;
            continue;
        }
        auto steps = enumerate_steps(sys, current);
        if (steps.empty()) out.normal_forms.push_back(current);
        for (const RewriteStep& s : steps) {
            auto [idx, fresh] = states.insert(s.result);
            if (fresh) queue.push_back(idx);
        }
    }
    return out;
}

enum class Joinability { joinable, not_joinable, truncated };

inline std::string_view to_string(Joinability j) {
    switch (j) {
        case Joinability::joinable: return "joinable";
        case Joinability::not_joinable: return "not-joinable";
        case Joinability::truncated: return "truncated";
    }
    return "truncated";
}

struct JoinResult {
    Joinability verdict = Joinability::not_joinable;
    std::optional<GraphWithInterface> witness;
    std::size_t explored = 0;
};

/**
 * Whether h1 and h2 reach a common iso class. Both sides are explored
 * breadth-first in lockstep; every newly discovered state on one side is
 * looked up on the other.
 */
inline JoinResult check_joinable(const RewritingSystem& sys, const GraphWithInterface& h1,
                                 const GraphWithInterface& h2, const Caps& caps) {
    JoinResult out;
    if (are_isomorphic(h1, h2)) {
        out.verdict = Joinability::joinable;
        out.witness = h1;
        return out;
    }
    struct Side {
        IsoClassIndex states;
        std::deque<std::size_t> queue;
        std::size_t explored = 0;
        bool truncated = false;
    };
    Side sides[2];
    sides[0].queue.push_back(sides[0].states.insert(h1).first);
    sides[1].queue.push_back(sides[1].states.insert(h2).first);
    while (!sides[0].queue.empty() || !sides[1].queue.empty()) {
        for (int s = 0; s < 2; ++s) {
            Side& me = sides[s];
            Side& other = sides[1 - s];
            if (me.queue.empty()) continue;
            if (me.explored >= caps.max_steps) {
                me.truncated = true;
                me.queue.clear();
                continue;
            }
            const GraphWithInterface current = me.states[me.queue.front()];
            me.queue.pop_front();
            ++me.explored;
            if (caps.max_graph_size != 0 && current.graph.size() > caps.max_graph_size) {
                me.truncated = true;
                continue;
            }
            for (const RewriteStep& st : enumerate_steps(sys, current)) {
                auto [idx, fresh] = me.states.insert(st.result);
                if (!fresh) continue;
                if (other.states.find(st.result)) {
                    out.verdict = Joinability::joinable;
                    out.witness = st.result;
                    out.explored = sides[0].explored + sides[1].explored;
                    return out;
                }
                me.queue.push_back(idx);
            }
        }
    }
    out.explored = sides[0].explored + sides[1].explored;
    out.verdict = (sides[0].truncated || sides[1].truncated) ? Joinability::truncated : Joinability::not_joinable;
    return out;
}

}  // namespace dpoi
