#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "dpoi/critical_pairs.hpp"
#include "dpoi/ma.hpp"
#include "dpoi/rewriting.hpp"

namespace dpoi {

/// A convex DPOI step, present iff the match is convex and a boundary complement exists.
inline std::optional<RewriteStep> convex_step(const RewritingSystem& sys, std::size_t rule_index,
                                              const Morphism& match, const GraphWithInterface& g) {
    if (sys.mode != Mode::convex) throw std::invalid_argument("convex_step: system is not in convex mode");
    auto steps = apply_step(sys, rule_index, match, g);
    if (steps.empty()) return std::nullopt;
    return std::move(steps.front());
}

/// Every input reaches every output (paths of length zero count).
inline bool is_strongly_connected(const Hypergraph& g) {
    MaAnalysis a = analyze_ma(g);
    const auto reach = reachability(g);
    for (NodeId x : a.inputs)
        for (NodeId y : a.outputs)
            if (x != y && !reach[x][y]) return false;
    return true;
}

inline bool is_left_connected(const RewritingSystem& sys) {
    for (const RewriteRule& r : sys.rules)
        if (!r.is_left_linear() || !ma_rule_inputs(r) || !is_strongly_connected(r.lhs)) return false;
    return true;
}

inline std::vector<PreCriticalPair> enumerate_ma_pre_critical_pairs(const RewritingSystem& sys) {
    if (sys.mode != Mode::convex) throw std::invalid_argument("ma pre-critical pairs need convex mode");
    return enumerate_pre_critical_pairs(sys);
}

class NotLeftConnected : public std::invalid_argument {
public:
    NotLeftConnected()
        : std::invalid_argument("system is not left-connected; use decide_local_confluence_convex instead") {}
};

inline ConfluenceReport decide_confluence_left_connected(const RewritingSystem& sys, const Caps& caps = {},
                                                         std::size_t jobs = 1) {
    if (sys.mode != Mode::convex) throw std::invalid_argument("left-connected analysis needs convex mode");
    if (!is_left_connected(sys)) throw NotLeftConnected();
    ConfluenceOptions opts;
    opts.jobs = jobs;
    ConfluenceReport r = decide_confluence(sys, caps, opts);
    r.note = "left-connected; termination assumed";
    return r;
}

}  // namespace dpoi
