#include <catch_amalgamated.hpp>

#include "dpoi.hpp"
#include "support/random.hpp"

using namespace dpoi;

namespace {

RewritingSystem load(const std::string& name, std::optional<Mode> mode = std::nullopt) {
    return build_system(load_rule_file(std::string(DPOI_SYSTEMS_DIR) + "/" + name), mode);
}

Signature ma_signature() {
    Signature s;
    s.add("f", 1, 1);
    s.add("m", 2, 1);
    s.add("d", 1, 2);
    s.add("u", 0, 1);
    return s;
}

// Reflexive-transitive reachability by Floyd-Warshall over single edges.
std::vector<std::vector<bool>> closure(const Hypergraph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (NodeId v = 0; v < n; ++v) r[v][v] = true;
    for (const Edge& e : g.edges())
        for (NodeId s : e.sources)
            for (NodeId t : e.targets) r[s][t] = true;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (r[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (r[k][j]) r[i][j] = true;
    return r;
}

// Kahn's algorithm on the node graph: acyclic iff every node gets removed.
bool oracle_acyclic(const Hypergraph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::vector<NodeId>> next(n);
    std::vector<std::size_t> indeg(n, 0);
    for (const Edge& e : g.edges())
        for (NodeId s : e.sources)
            for (NodeId t : e.targets) next[s].push_back(t), ++indeg[t];
    std::vector<NodeId> ready;
    for (NodeId v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.push_back(v);
    std::size_t removed = 0;
    while (!ready.empty()) {
        NodeId v = ready.back();
        ready.pop_back();
        ++removed;
        for (NodeId w : next[v])
            if (--indeg[w] == 0) ready.push_back(w);
    }
    return removed == n;
}

// Not convex iff an edge outside the image leaves something reachable from the image
// and reaches back into it.
bool oracle_convex(const Hypergraph& l, const Hypergraph& g, const Morphism& m) {
    if (!is_homomorphism(l, g, m) || !is_mono(m)) return false;
    const auto r = closure(g);
    std::vector<bool> in_edge(g.edge_count(), false);
    for (EdgeId e : m.edges) in_edge[e] = true;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        if (in_edge[e]) continue;
        for (NodeId s : g.edge(e).sources)
            for (NodeId t : g.edge(e).targets)
                for (NodeId u : m.nodes)
                    for (NodeId v : m.nodes)
                        if (r[u][s] && r[t][v]) return false;
    }
    return true;
}

std::vector<std::uint64_t> result_classes(const std::vector<RewriteStep>& steps) {
    std::vector<std::uint64_t> out;
    for (const RewriteStep& s : steps) out.push_back(certificate(s.result));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

TEST_CASE("ma analysis of small graphs") {
    MaAnalysis d = analyze_ma(discrete(3));
    CHECK(d.is_ma());
    CHECK(d.inputs == std::vector<NodeId>{0, 1, 2});
    CHECK(d.outputs == d.inputs);

    Hypergraph loop(1);
    loop.add_edge("f", {0}, {0});
    MaAnalysis l = analyze_ma(loop);
    CHECK_FALSE(l.acyclic);
    CHECK(l.monogamous);
    CHECK(l.inputs.empty());

    Hypergraph fork(3);
    fork.add_edge("f", {0}, {1});
    fork.add_edge("f", {0}, {2});
    MaAnalysis k = analyze_ma(fork);
    CHECK(k.acyclic);
    CHECK_FALSE(k.monogamous);
    CHECK(k.out_degree[0] == 2);
}

TEST_CASE("ma analysis agrees with degree counting and Kahn's algorithm") {
    test::Rng rng(51);
    Signature sig = ma_signature();
    int cyclic = 0;
    for (int n = 0; n < 400; ++n) {
        Hypergraph g = test::random_graph(rng, sig, rng.between(1, 6), rng.between(0, 5));
        MaAnalysis a = analyze_ma(g);
        std::vector<std::size_t> in(g.node_count(), 0), out(g.node_count(), 0);
        for (const Edge& e : g.edges()) {
            for (NodeId s : e.sources) ++out[s];
            for (NodeId t : e.targets) ++in[t];
        }
        std::vector<NodeId> inputs, outputs;
        bool mono = true;
        for (NodeId v = 0; v < g.node_count(); ++v) {
            if (in[v] == 0) inputs.push_back(v);
            if (out[v] == 0) outputs.push_back(v);
            mono &= in[v] <= 1 && out[v] <= 1;
        }
        CHECK(a.inputs == inputs);
        CHECK(a.outputs == outputs);
        CHECK(a.monogamous == mono);
        CHECK(a.acyclic == oracle_acyclic(g));
        cyclic += !a.acyclic;
    }
    CHECK(cyclic > 20);
}

TEST_CASE("ma-cospans") {
    Signature sig = ma_signature();
    CHECK_FALSE(is_ma_cospan(interpret(Term::frob(Term::Kind::mul), sig)));
    CHECK(is_ma_cospan(interpret(parse_term("(f + u) ; m ; d"), sig)));

    test::Rng rng(52);
    for (int n = 0; n < 200; ++n) {
        GraphWithInterface g = test::random_ma(rng, sig, rng.between(0, 5));
        auto c = as_ma_cospan(g);
        REQUIRE(c);
        CHECK(is_ma_cospan(*c));
        CHECK(is_ma_cospan(as_ma_cospan(canonical_ma_interface(g.graph)).value()));
        if (!c->left.empty()) {
            Cospan dropped = *c;
            dropped.left.pop_back();
            CHECK_FALSE(is_ma_cospan(dropped));
            Cospan doubled = *c;
            doubled.left.push_back(doubled.left.front());
            CHECK_FALSE(is_ma_cospan(doubled));
        }
    }
}

TEST_CASE("convex matches") {
    Signature sig;
    sig.add("e1", 1, 2);
    sig.add("e2", 2, 1);
    sig.add("e3", 1, 1);
    sig.add("e4", 1, 1);
    GraphWithInterface lhs = rewire(parse_term("e3 + e4"), sig, false);
    CHECK(is_convex_match(lhs.graph, lhs.graph, identity(lhs.graph)));
    // e3 sits between e1 and e2, so the path through e1, e3, e2 leaves and re-enters the image.
    GraphWithInterface host = rewire(parse_term("e1 ; (e3 + id:1) ; e2 ; e4"), sig, false);
    auto ms = homomorphisms(lhs.graph, host.graph, true);
    REQUIRE(ms.size() == 1);
    CHECK_FALSE(is_convex_match(lhs.graph, host.graph, ms[0]));
    // A boundary complement still exists for this match.
    RewritingSystem sys = translate_system(sig, {{"u", parse_term("e3 + e4"), parse_term("e4 + e3")}}, false);
    const RewriteRule& r = sys.rules[0];
    auto bc = boundary_complement(r.interface, r.lhs, r.left, 2, host.graph, ms[0], host.interface, 1);
    CHECK(bc);
}

TEST_CASE("convexity agrees with the path oracle") {
    test::Rng rng(53);
    Signature sig = ma_signature();
    int convex = 0, not_convex = 0;
    for (int n = 0; n < 300; ++n) {
        GraphWithInterface g = test::random_ma(rng, sig, rng.between(2, 6));
        GraphWithInterface l = test::random_ma(rng, sig, rng.between(1, 2), 0.5);
        for (const Morphism& m : homomorphisms(l.graph, g.graph, true)) {
            const bool lib = is_convex_match(l.graph, g.graph, m);
            REQUIRE(lib == oracle_convex(l.graph, g.graph, m));
            (lib ? convex : not_convex)++;
        }
    }
    CHECK(convex > 50);
    CHECK(not_convex > 10);
}

TEST_CASE("boundary complement of a full match is the interface") {
    Signature sig = ma_signature();
    RewritingSystem sys = translate_system(sig, {{"r", parse_term("m ; d"), parse_term("(d + id:1) ; (id:1 + m)")}}, false);
    const RewriteRule& r = sys.rules[0];
    GraphWithInterface host = r.lhs_with_interface();
    auto bc = boundary_complement(r.interface, r.lhs, r.left, 2, host.graph, identity(r.lhs), host.interface, 2);
    REQUIRE(bc);
    CHECK(bc->complement.context.is_discrete());
    CHECK(bc->complement.context.node_count() == r.interface.node_count());
}

TEST_CASE("only the monogamous complement is a boundary complement") {
    Signature sig;
    sig.add("a1", 0, 1);
    sig.add("a2", 1, 0);
    sig.add("a3", 1, 1);
    RewritingSystem sys = translate_system(sig, {{"r", parse_term("id:1"), parse_term("a2 ; a1")}});
    const RewriteRule& r = sys.rules[0];
    GraphWithInterface g = rewire(parse_term("a1 ; a3 ; a2"), sig);
    for (const Morphism& m : find_matches(r, g, MatchConstraint::mono)) {
        ComplementSearch all = pushout_complements(r.interface, r.lhs, g.graph, r.left, m);
        REQUIRE(all.complements.size() >= 2);
        auto bc = boundary_complement(r.interface, r.lhs, r.left, 1, g.graph, m, g.interface, 0);
        REQUIRE(bc);
        Cospan cs{{}, bc->complement.context, {}};
        cs.left = {bc->complement.from_interface.nodes[1]};
        cs.right = {bc->complement.from_interface.nodes[0]};
        CHECK(is_ma_cospan(cs));
    }
}

TEST_CASE("random boundary complements are pushouts with an ma boundary") {
    test::Rng rng(54);
    Signature sig = ma_signature();
    std::size_t found = 0;
    for (int n = 0; n < 300; ++n) {
        GraphWithInterface g = test::random_ma(rng, sig, rng.between(1, 6));
        GraphWithInterface l = test::random_ma(rng, sig, rng.between(1, 2), 0.5);
        const std::size_t li = test::input_count(l), gi = test::input_count(g);
        RewriteRule r = make_rule("r", l, l);
        for (const Morphism& m : homomorphisms(l.graph, g.graph, true)) {
            auto bc = boundary_complement(r.interface, r.lhs, r.left, li, g.graph, m, g.interface, gi);
            if (!bc) continue;
            ++found;
            const PushoutComplement& pc = bc->complement;
            REQUIRE(is_pushout(r.lhs, pc.context, g.graph, r.left, pc.from_interface, m, pc.to_host));
            const auto& c = pc.from_interface.nodes;
            const auto& d = bc->interface_factor;
            Cospan cs;
            cs.apex = pc.context;
            cs.left.assign(c.begin() + static_cast<std::ptrdiff_t>(li), c.end());
            cs.left.insert(cs.left.end(), d.begin(), d.begin() + static_cast<std::ptrdiff_t>(gi));
            cs.right.assign(d.begin() + static_cast<std::ptrdiff_t>(gi), d.end());
            cs.right.insert(cs.right.end(), c.begin(), c.begin() + static_cast<std::ptrdiff_t>(li));
            CHECK(is_ma_cospan(cs));
            CHECK(compose(d, pc.to_host) == g.interface);
        }
    }
    CHECK(found > 100);
}

TEST_CASE("convex steps") {
    Signature sig = ma_signature();
    SECTION("the identity rule returns its input") {
        RewritingSystem sys = translate_system(sig, {{"id", parse_term("m"), parse_term("m")}}, false);
        sys.mode = Mode::convex;
        GraphWithInterface g = rewire(parse_term("(f + f) ; m ; d"), sig, false);
        auto ms = find_matches(sys.rules[0], g, MatchConstraint::convex);
        REQUIRE(ms.size() == 1);
        auto s = convex_step(sys, 0, ms[0], g);
        REQUIRE(s);
        CHECK(are_isomorphic(s->result, g));
        sys.mode = Mode::frobenius;
        CHECK_THROWS_AS(convex_step(sys, 0, ms[0], g), std::invalid_argument);
    }
    SECTION("results stay ma on random systems") {
        test::Rng rng(55);
        std::size_t steps = 0;
        for (int n = 0; n < 200; ++n) {
            GraphWithInterface l = test::random_ma(rng, sig, rng.between(1, 2), 0.5);
            auto r = test::random_ma_with_boundary(rng, sig, test::input_count(l), l.interface.size() - test::input_count(l), 3);
            if (!r) continue;
            RewritingSystem sys = test::make_system(sig, {make_rule("r", l, *r)}, Mode::convex);
            GraphWithInterface g = test::random_ma(rng, sig, rng.between(1, 6));
            for (const Morphism& m : find_matches(sys.rules[0], g, MatchConstraint::mono)) {
                auto s = convex_step(sys, 0, m, g);
                CHECK(s.has_value() <= is_convex_match(l.graph, g.graph, m));
                if (!s) continue;
                ++steps;
                CHECK(ma_interface_split(s->result) == ma_interface_split(g));
                CHECK(verify_step(sys, g, *s));
            }
        }
        CHECK(steps > 100);
    }
}

TEST_CASE("the stuck configuration after one step") {
    RewritingSystem sys = load("frobenius_semialgebra.rules");
    std::optional<PreCriticalPair> disjoint;
    for (const PreCriticalPair& p : enumerate_ma_pre_critical_pairs(sys))
        if (p.name1 == "FS3" && p.name2 == "FS4" && p.overlap_size == 0) disjoint = p;
    REQUIRE(disjoint);
    PathJoinResult pj = is_path_joinable(sys, *disjoint, {});
    REQUIRE(pj.witness);
    const LiftedBranching& w = pj.checked[*pj.witness];
    // FS3 then FS4: the second left side is still there, but not convex any more.
    const std::size_t fs4 = 3;
    REQUIRE(sys.rules[fs4].name == "FS4");
    const GraphWithInterface& after = w.branch1->result;
    CHECK_FALSE(find_matches(sys.rules[fs4], after, MatchConstraint::mono).empty());
    CHECK(find_matches(sys.rules[fs4], after, MatchConstraint::convex).empty());
    CHECK(enumerate_steps(sys, after).empty());
    // Without the extension FS4 still applies.
    CHECK_FALSE(find_matches(sys.rules[fs4], disjoint->branch1.result, MatchConstraint::convex).empty());
}

TEST_CASE("left-connectedness") {
    CHECK(is_left_connected(load("yang_baxter.rules", Mode::convex)));
    CHECK(is_left_connected(load("bimonoid.rules")));
    CHECK_FALSE(is_left_connected(load("frobenius_semialgebra.rules")));
    CHECK_FALSE(is_left_connected(load("case_study.rules")));
    RewritingSystem empty;
    empty.mode = Mode::convex;
    CHECK(is_left_connected(empty));
}

TEST_CASE("ma pairs have ma sources with boundary interfaces") {
    for (const char* file : {"frobenius_semialgebra.rules", "bimonoid.rules", "case_study.rules"}) {
        RewritingSystem sys = load(file);
        INFO(file);
        auto pairs = enumerate_ma_pre_critical_pairs(sys);
        REQUIRE_FALSE(pairs.empty());
        for (const PreCriticalPair& p : pairs) {
            MaAnalysis a = analyze_ma(p.overlap);
            REQUIRE(a.is_ma());
            CHECK(p.interface == canonical_ma_interface(p.overlap).interface);
            CHECK(is_convex_match(sys.rules[p.rule1].lhs, p.overlap, p.match1));
            CHECK(is_convex_match(sys.rules[p.rule2].lhs, p.overlap, p.match2));
            // The pullback of the two contexts, pruned to inputs and outputs, is the same interface.
            const auto& c1 = p.branch1.complement;
            const auto& c2 = p.branch2.complement;
            Pullback pb = pullback(c1.context, c2.context, c1.to_host, c2.to_host);
            std::set<NodeId> pruned, boundary(p.interface.begin(), p.interface.end());
            for (NodeId v : compose(pb.to_left, c1.to_host).nodes)
                if (boundary.count(v)) pruned.insert(v);
            CHECK(pruned == boundary);
        }
    }
    CHECK_THROWS_AS(enumerate_ma_pre_critical_pairs(load("plump.rules")), std::invalid_argument);
}

TEST_CASE("left-connected confluence") {
    CHECK(decide_confluence_left_connected(load("yang_baxter.rules", Mode::convex)).verdict == Verdict::not_confluent);
    CHECK(decide_confluence_left_connected(load("bimonoid.rules")).verdict == Verdict::confluent);
    RewritingSystem empty;
    empty.mode = Mode::convex;
    CHECK(decide_confluence_left_connected(empty).verdict == Verdict::confluent);
    CHECK_THROWS_AS(decide_confluence_left_connected(load("frobenius_semialgebra.rules")), NotLeftConnected);
}

TEST_CASE("left-connected systems: mono and convex steps coincide") {
    test::Rng rng(56);
    Signature sig = ma_signature();
    std::size_t systems = 0, instances = 0;
    while (systems < 120) {
        std::vector<RewriteRule> rules;
        for (int k = 0; k < static_cast<int>(rng.between(1, 2)); ++k)
            if (auto r = test::random_left_connected_rule(rng, sig, "r" + std::to_string(k))) rules.push_back(*r);
        if (rules.empty()) continue;
        RewritingSystem convex = test::make_system(sig, rules, Mode::convex);
        REQUIRE(is_left_connected(convex));
        RewritingSystem plain = test::make_system(sig, rules, Mode::plain);
        ++systems;
        for (int t = 0; t < 5; ++t) {
            GraphWithInterface g = test::random_ma(rng, sig, rng.between(1, 7));
            std::vector<RewriteStep> plain_steps;
            for (std::size_t i = 0; i < rules.size(); ++i)
                for (const Morphism& m : find_matches(rules[i], g, MatchConstraint::mono))
                    for (RewriteStep& s : apply_step(plain, i, m, g)) {
                        ++instances;
                        CHECK(is_convex_match(rules[i].lhs, g.graph, m));
                        plain_steps.push_back(std::move(s));
                    }
            CHECK(result_classes(plain_steps) == result_classes(enumerate_steps(convex, g)));
        }
    }
    CHECK(instances > 100);
}
