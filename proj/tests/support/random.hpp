#pragma once

// Seeded random inputs for property tests. DC_SEED overrides the seed.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "dpoi.hpp"

namespace dpoi::test {

inline std::uint64_t base_seed() {
    static const std::uint64_t seed = [] {
        const char* env = std::getenv("DC_SEED");
        std::uint64_t s = env ? std::strtoull(env, nullptr, 10) : 20240611u;
        std::cerr << "DC_SEED=" << s << "\n";
        return s;
    }();
    return seed;
}

class Rng {
public:
    explicit Rng(std::uint64_t stream = 0) : eng_(base_seed() * 0x9E3779B97F4A7C15ull + stream) {}

    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_); }
    std::size_t between(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_);
    }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(eng_); }
    template <class T>
    const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }
    template <class T>
    void shuffle(std::vector<T>& v) { std::shuffle(v.begin(), v.end(), eng_); }

private:
    std::mt19937_64 eng_;
};

/// Generators g0.. with arity and coarity at most max_arity.
inline Signature random_signature(Rng& rng, std::size_t count, std::size_t max_arity = 2) {
    Signature sig;
    for (std::size_t k = 0; k < count; ++k) {
        std::size_t a = rng.between(0, max_arity), b = rng.between(0, max_arity);
        if (a + b == 0) b = 1;
        sig.add("g" + std::to_string(k), a, b);
    }
    return sig;
}

inline std::vector<std::pair<std::string, GeneratorType>> generator_list(const Signature& sig) {
    std::vector<std::pair<std::string, GeneratorType>> out;
    for (const auto& [name, type] : sig.generators()) out.emplace_back(name, type);
    return out;
}

/// Arbitrary hypergraph over sig; tentacles land on uniformly random nodes.
inline Hypergraph random_graph(Rng& rng, const Signature& sig, std::size_t nodes, std::size_t edges) {
    Hypergraph g(nodes);
    const auto gens = generator_list(sig);
    for (std::size_t k = 0; k < edges; ++k) {
        const auto& [name, type] = rng.pick(gens);
        if (nodes == 0 && type.arity + type.coarity > 0) continue;
        std::vector<NodeId> s, t;
        for (std::size_t i = 0; i < type.arity; ++i) s.push_back(static_cast<NodeId>(rng.below(nodes)));
        for (std::size_t i = 0; i < type.coarity; ++i) t.push_back(static_cast<NodeId>(rng.below(nodes)));
        g.add_edge(name, s, t);
    }
    return g;
}

inline GraphWithInterface random_with_interface(Rng& rng, const Signature& sig, std::size_t nodes,
                                                std::size_t edges, std::size_t interface) {
    GraphWithInterface g{random_graph(rng, sig, nodes, edges), {}};
    for (std::size_t k = 0; k < interface && nodes > 0; ++k) g.interface.push_back(static_cast<NodeId>(rng.below(nodes)));
    return g;
}

/// A random permutation of nodes and edges, with the interface carried along.
inline GraphWithInterface shuffled(Rng& rng, const GraphWithInterface& g) {
    std::vector<NodeId> perm(g.graph.node_count());
    for (NodeId v = 0; v < perm.size(); ++v) perm[v] = v;
    rng.shuffle(perm);
    std::vector<std::size_t> order(g.graph.edge_count());
    for (std::size_t e = 0; e < order.size(); ++e) order[e] = e;
    rng.shuffle(order);
    GraphWithInterface out{Hypergraph(g.graph.node_count()), {}};
    for (std::size_t e : order) {
        Edge copy = g.graph.edge(static_cast<EdgeId>(e));
        for (NodeId& s : copy.sources) s = perm[s];
        for (NodeId& t : copy.targets) t = perm[t];
        out.graph.add_edge(std::move(copy));
    }
    for (NodeId v : g.interface) out.interface.push_back(perm[v]);
    return out;
}

/**
 * Random ma-hypergraph with inputs then outputs as interface. Edges consume
 * open wires or fresh inputs; the wires left open become the outputs.
 */
inline GraphWithInterface random_ma(Rng& rng, const Signature& sig, std::size_t edges, double fresh_input = 0.35) {
    Hypergraph g;
    std::vector<NodeId> open, inputs;
    const auto gens = generator_list(sig);
    for (std::size_t k = 0; k < edges; ++k) {
        const auto& [name, type] = rng.pick(gens);
        std::vector<NodeId> s, t;
        for (std::size_t i = 0; i < type.arity; ++i) {
            if (open.empty() || rng.coin(fresh_input)) {
                NodeId v = g.add_node();
                inputs.push_back(v);
                s.push_back(v);
            } else {
                std::size_t at = rng.below(open.size());
                s.push_back(open[at]);
                open.erase(open.begin() + static_cast<std::ptrdiff_t>(at));
            }
        }
        for (std::size_t i = 0; i < type.coarity; ++i) {
            NodeId v = g.add_node();
            t.push_back(v);
            open.push_back(v);
        }
        g.add_edge(name, s, t);
    }
    if (rng.coin(0.2)) {
        NodeId v = g.add_node();
        inputs.push_back(v);
        open.push_back(v);
    }
    rng.shuffle(inputs);
    rng.shuffle(open);
    GraphWithInterface out{g, inputs};
    out.interface.insert(out.interface.end(), open.begin(), open.end());
    return out;
}

inline std::size_t input_count(const GraphWithInterface& g) { return *ma_interface_split(g); }

/// An ma graph with exactly the given boundary, or nothing after a few tries.
inline std::optional<GraphWithInterface> random_ma_with_boundary(Rng& rng, const Signature& sig, std::size_t inputs,
                                                                 std::size_t outputs, std::size_t max_edges,
                                                                 std::size_t tries = 200) {
    for (std::size_t k = 0; k < tries; ++k) {
        GraphWithInterface g = random_ma(rng, sig, rng.between(0, max_edges));
        auto n = ma_interface_split(g);
        if (n && *n == inputs && g.interface.size() - *n == outputs) return g;
    }
    return std::nullopt;
}

/// A rule with discrete K and arbitrary legs.
inline RewriteRule random_discrete_rule(Rng& rng, const Signature& sig, const std::string& name) {
    RewriteRule r;
    r.name = name;
    const std::size_t ln = rng.between(1, 3), rn = rng.between(1, 3), k = rng.between(0, 2);
    r.lhs = random_graph(rng, sig, ln, rng.between(1, 2));
    r.rhs = random_graph(rng, sig, rn, rng.between(0, 2));
    r.interface = discrete(k);
    for (std::size_t i = 0; i < k; ++i) {
        r.left.nodes.push_back(static_cast<NodeId>(rng.below(ln)));
        r.right.nodes.push_back(static_cast<NodeId>(rng.below(rn)));
    }
    return r;
}

/// Left-linear, discrete K, and |R| < |L|: every step shrinks the graph.
inline RewriteRule random_shrinking_rule(Rng& rng, const Signature& sig, const std::string& name) {
    RewriteRule r;
    r.name = name;
    const std::size_t ln = rng.between(1, 3), le = rng.between(1, 2);
    r.lhs = random_graph(rng, sig, ln, le);
    std::vector<NodeId> kept(ln);
    for (NodeId v = 0; v < ln; ++v) kept[v] = v;
    rng.shuffle(kept);
    kept.resize(rng.between(0, ln));
    std::sort(kept.begin(), kept.end());
    const std::size_t k = kept.size();
    r.interface = discrete(k);
    r.left.nodes = kept;
    const std::size_t rn = k == 0 ? 0 : rng.between(1, k);
    r.rhs = random_graph(rng, sig, rn, rng.between(0, r.lhs.edge_count() - 1));
    for (std::size_t i = 0; i < k; ++i) r.right.nodes.push_back(static_cast<NodeId>(rng.below(rn)));
    return r;
}

inline RewritingSystem make_system(const Signature& sig, std::vector<RewriteRule> rules, Mode mode) {
    RewritingSystem sys;
    sys.signature = sig;
    sys.rules = std::move(rules);
    sys.mode = mode;
    return sys;
}

/// A left-linear ma rule whose left side is strongly connected.
inline std::optional<RewriteRule> random_left_connected_rule(Rng& rng, const Signature& sig, const std::string& name) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        GraphWithInterface l = random_ma(rng, sig, rng.between(1, 3), 0.3);
        if (l.graph.edge_count() == 0 || !is_strongly_connected(l.graph)) continue;
        const std::size_t in = input_count(l), out = l.interface.size() - in;
        auto r = random_ma_with_boundary(rng, sig, in, out, 3);
        if (!r) continue;
        return make_rule(name, l, *r);
    }
    return std::nullopt;
}

}  // namespace dpoi::test
