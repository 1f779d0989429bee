#include <catch_amalgamated.hpp>

#include "dpoi.hpp"
#include "support/random.hpp"

using namespace dpoi;

namespace {

RewritingSystem load(const std::string& name, std::optional<Mode> mode = std::nullopt) {
    RuleFile f = load_rule_file(std::string(DPOI_SYSTEMS_DIR) + "/" + name);
    return build_system(f, mode);
}

GraphWithInterface plump_source() {
    Hypergraph g(2);
    g.add_edge("a", {0}, {1});
    return {g, {0, 1}};
}

GraphWithInterface b_loop_at(NodeId v) {
    Hypergraph g(2);
    g.add_edge("b", {v}, {v});
    return {g, {0, 1}};
}

Signature unsound_signature() {
    Signature s;
    s.add("e1", 1, 2);
    s.add("e2", 2, 1);
    s.add("e3", 1, 1);
    s.add("e4", 1, 1);
    return s;
}

}  // namespace

TEST_CASE("matches of a single node") {
    RewriteRule r;
    r.lhs = discrete(1);
    Hypergraph g(4);
    g.add_edge("a", {0}, {1});
    CHECK(find_matches(r, g, MatchConstraint::any).size() == 4);
    CHECK(find_matches(r, g, MatchConstraint::mono).size() == 4);
}

TEST_CASE("left side matches itself") {
    RewritingSystem yb = load("yang_baxter.rules");
    const RewriteRule& r = yb.rules.front();
    auto ms = find_matches(r, r.lhs, MatchConstraint::mono);
    REQUIRE(!ms.empty());
    CHECK(std::find(ms.begin(), ms.end(), identity(r.lhs)) != ms.end());
}

TEST_CASE("a mono match that is not convex") {
    Signature sig = unsound_signature();
    Term lhs = parse_term("e3 + e4"), rhs = parse_term("e4 + e3");
    Term c = parse_term("e1 ; (e3 + id:1) ; e2 ; e4");
    RewritingSystem sys = translate_system(sig, {{"u", lhs, rhs}}, false);
    GraphWithInterface host = rewire(c, sig, false);
    CHECK(find_matches(sys.rules[0], host, MatchConstraint::mono).size() == 1);
    CHECK(find_matches(sys.rules[0], host, MatchConstraint::convex).empty());
    sys.mode = Mode::convex;
    CHECK(enumerate_steps(sys, host).empty());
}

TEST_CASE("identity rule leaves the graph unchanged") {
    Hypergraph l(2);
    l.add_edge("a", {0}, {1});
    RewritingSystem sys;
    sys.signature.add("a", 1, 1);
    sys.rules.push_back(make_rule("id", {l, {0, 1}}, {l, {0, 1}}));
    GraphWithInterface g = plump_source();
    auto steps = apply_step(sys, 0, identity(l), g);
    REQUIRE(steps.size() == 1);
    CHECK(are_isomorphic(steps[0].result, g));
}

TEST_CASE("the a-edge with both ends in the interface has two distinct results") {
    RewritingSystem sys = load("plump.rules");
    GraphWithInterface g = plump_source();
    auto steps = enumerate_steps(sys, g);
    REQUIRE(steps.size() == 2);
    CHECK_FALSE(are_isomorphic(steps[0].result, steps[1].result));
    bool at0 = false, at1 = false;
    for (const auto& s : steps) {
        at0 |= are_isomorphic(s.result, b_loop_at(0)).has_value();
        at1 |= are_isomorphic(s.result, b_loop_at(1)).has_value();
        CHECK(verify_step(sys, g, s));
    }
    CHECK(at0);
    CHECK(at1);
}

TEST_CASE("a non-left-linear rule gives several steps at one match") {
    Signature sig;
    sig.add("a1", 0, 1);
    sig.add("a2", 1, 0);
    sig.add("a3", 1, 1);
    RewritingSystem sys = translate_system(sig, {{"r", parse_term("id:1"), parse_term("a2 ; a1")}});
    GraphWithInterface g = rewire(parse_term("a1 ; a3 ; a2"), sig);
    auto ms = find_matches(sys.rules[0], g, MatchConstraint::any);
    REQUIRE(ms.size() == 2);
    for (const Morphism& m : ms) {
        auto steps = apply_step(sys, 0, m, g);
        CHECK(steps.size() >= 2);
        for (const auto& s : steps) CHECK(verify_step(sys, g, s));
    }
}

TEST_CASE("no applicable rule means no steps") {
    RewritingSystem sys = load("plump.rules");
    Hypergraph g(2);
    g.add_edge("b", {0}, {1});
    CHECK(enumerate_steps(sys, {g, {0}}).empty());
}

TEST_CASE("random steps are sound and keep the interface") {
    test::Rng rng(21);
    std::size_t checked = 0;
    for (int n = 0; n < 150; ++n) {
        Signature sig = test::random_signature(rng, rng.between(1, 2), 1);
        std::vector<RewriteRule> rules{test::random_discrete_rule(rng, sig, "r0")};
        if (rng.coin()) rules.push_back(test::random_shrinking_rule(rng, sig, "r1"));
        RewritingSystem sys = test::make_system(sig, rules, Mode::plain);
        GraphWithInterface g = test::random_with_interface(rng, sig, rng.between(1, 4), rng.between(1, 4), rng.between(0, 2));
        for (const RewriteStep& s : enumerate_steps(sys, g)) {
            ++checked;
            REQUIRE(verify_step(sys, g, s));
            CHECK(s.result.interface.size() == g.interface.size());
        }
        for (std::size_t i = 0; i < sys.rules.size(); ++i) {
            if (!sys.rules[i].is_left_linear()) continue;
            for (const Morphism& m : find_matches(sys.rules[i], g, MatchConstraint::any))
                CHECK(apply_step(sys, i, m, g).size() <= 1);
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("rewriting commutes with isomorphism") {
    test::Rng rng(22);
    for (int n = 0; n < 100; ++n) {
        Signature sig = test::random_signature(rng, 2, 1);
        RewritingSystem sys = test::make_system(sig, {test::random_shrinking_rule(rng, sig, "r")}, Mode::plain);
        GraphWithInterface g = test::random_with_interface(rng, sig, rng.between(1, 4), rng.between(1, 4), rng.between(0, 2));
        GraphWithInterface h = test::shuffled(rng, g);
        auto a = enumerate_steps(sys, g), b = enumerate_steps(sys, h);
        REQUIRE(a.size() == b.size());
        for (const auto& s : a)
            CHECK(std::any_of(b.begin(), b.end(), [&](const RewriteStep& t) { return are_isomorphic(s.result, t.result).has_value(); }));
    }
}

TEST_CASE("normal form search") {
    SECTION("a normal graph is its own normal form") {
        RewritingSystem sys = load("plump.rules");
        GraphWithInterface g = b_loop_at(0);
        NormalFormSearch nf = search_normal_forms(sys, g, {});
        REQUIRE(nf.normal_forms.size() == 1);
        CHECK(are_isomorphic(nf.normal_forms[0], g));
        CHECK_FALSE(nf.truncated);
    }
    SECTION("a size-decreasing rule has a unique normal form") {
        // a ; a => a on a chain of four.
        Signature sig;
        sig.add("a", 1, 1);
        RewritingSystem sys = translate_system(sig, {{"aa", parse_term("a ; a"), parse_term("a")}}, false);
        sys.mode = Mode::plain;
        GraphWithInterface g = rewire(parse_term("a ; a ; a ; a"), sig, false);
        NormalFormSearch nf = search_normal_forms(sys, g, {});
        REQUIRE(nf.normal_forms.size() == 1);
        CHECK(are_isomorphic(nf.normal_forms[0], rewire(parse_term("a"), sig, false)));
        CHECK_FALSE(nf.truncated);
    }
    SECTION("ping-pong with a low cap is truncated") {
        RuleFile f = load_rule_file(std::string(DPOI_SYSTEMS_DIR) + "/pingpong.rules");
        RewritingSystem sys = build_system(f);
        GraphWithInterface g = build_start(f, *f.start);
        NormalFormSearch nf = search_normal_forms(sys, g, Caps{3, 0});
        CHECK(nf.truncated);
        CHECK(search_normal_forms(sys, g, Caps{}).normal_forms.empty());
    }
}

TEST_CASE("joinability search") {
    RewritingSystem sys = load("plump.rules");
    CHECK(check_joinable(sys, b_loop_at(0), b_loop_at(0), {}).verdict == Joinability::joinable);
    CHECK(check_joinable(sys, b_loop_at(0), b_loop_at(1), {}).verdict == Joinability::not_joinable);
}

TEST_CASE("system checks") {
    RewritingSystem sys = load("frobenius_semialgebra.rules");
    CHECK(check_system(sys).empty());
    RewritingSystem plump = load("plump.rules");
    plump.mode = Mode::convex;
    CHECK_FALSE(check_system(plump).empty());
    CHECK_THROWS(require_valid(plump));
}
