#include <catch_amalgamated.hpp>

#include "dpoi.hpp"
#include "support/random.hpp"

using namespace dpoi;

namespace {

Signature abc() {
    Signature s;
    s.add("a", 1, 1);
    s.add("b", 2, 1);
    s.add("c", 0, 2);
    return s;
}

}  // namespace

TEST_CASE("signature rejects duplicates and empty names") {
    Signature s = abc();
    CHECK(s.size() == 3);
    CHECK(s.find("b")->arity == 2);
    CHECK_FALSE(s.find("z"));
    CHECK_THROWS_AS(s.add("a", 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(s.add("", 0, 1), std::invalid_argument);
}

TEST_CASE("discrete graphs") {
    CHECK(discrete(0).size() == 0);
    Hypergraph d = discrete(3);
    CHECK(d.node_count() == 3);
    CHECK(d.edge_count() == 0);
    CHECK(d.is_discrete());
    Coproduct s = coproduct(discrete(2), discrete(3));
    CHECK(are_isomorphic(GraphWithInterface{s.graph, {}}, GraphWithInterface{discrete(5), {}}));
}

TEST_CASE("coproduct injections") {
    Signature sig = abc();
    Hypergraph g(2);
    g.add_edge("a", {0}, {1});

    Coproduct unit = coproduct(g, discrete(0));
    CHECK(unit.graph == g);
    CHECK(unit.left == identity(g));

    Hypergraph h(1);
    h.add_edge("a", {0}, {0});
    Coproduct s = coproduct(g, h, sig);
    CHECK(s.graph.node_count() == 3);
    CHECK(s.graph.edge_count() == 2);
    CHECK(is_mono(s.left));
    CHECK(is_mono(s.right));
    CHECK(is_homomorphism(g, s.graph, s.left));
    CHECK(is_homomorphism(h, s.graph, s.right));

    Hypergraph bad(1);
    bad.add_edge("q", {0}, {0});
    CHECK_THROWS(coproduct(g, bad, sig));
}

TEST_CASE("coproduct sizes add and injections are jointly epi") {
    test::Rng rng(1);
    Signature sig = abc();
    for (int k = 0; k < 200; ++k) {
        Hypergraph a = test::random_graph(rng, sig, rng.between(0, 4), rng.between(0, 3));
        Hypergraph b = test::random_graph(rng, sig, rng.between(0, 4), rng.between(0, 3));
        Coproduct s = coproduct(a, b);
        REQUIRE(s.graph.node_count() == a.node_count() + b.node_count());
        REQUIRE(s.graph.edge_count() == a.edge_count() + b.edge_count());
        std::vector<bool> hit_n(s.graph.node_count()), hit_e(s.graph.edge_count());
        for (NodeId v : s.left.nodes) hit_n[v] = true;
        for (NodeId v : s.right.nodes) hit_n[v] = true;
        for (EdgeId e : s.left.edges) hit_e[e] = true;
        for (EdgeId e : s.right.edges) hit_e[e] = true;
        CHECK(std::all_of(hit_n.begin(), hit_n.end(), [](bool x) { return x; }));
        CHECK(std::all_of(hit_e.begin(), hit_e.end(), [](bool x) { return x; }));
    }
}

TEST_CASE("validate reports each broken invariant") {
    Signature sig = abc();
    Hypergraph g(2);
    g.add_edge("a", {0}, {1});
    CHECK(validate(g).empty());
    CHECK(validate(g, sig).empty());

    Hypergraph dangling(1);
    dangling.add_edge("a", {0}, {4});
    CHECK(validate(dangling).size() == 1);

    Hypergraph arity(2);
    arity.add_edge("a", {0, 1}, {1});
    CHECK(validate(arity, sig).size() == 1);

    Hypergraph unknown(1);
    unknown.add_edge("zz", {0}, {0});
    CHECK(validate(unknown, sig).size() == 1);

    Hypergraph path(2);
    path.add_edge(std::string(kPathLink), {0}, {1});
    CHECK_FALSE(validate(path, sig).empty());
    path.set_path_typed(true);
    CHECK(validate(path, sig).empty());
}

TEST_CASE("homomorphisms: identity, composition, mono and epi") {
    Hypergraph g(3);
    g.add_edge("a", {0}, {1});
    g.add_edge("a", {1}, {2});
    Morphism id = identity(g);
    CHECK(is_homomorphism(g, g, id));
    CHECK(is_mono(id));
    CHECK(is_epi(id, g));
    CHECK(is_iso(id, g));

    Hypergraph loop(1);
    loop.add_edge("a", {0}, {0});
    Morphism fold{{0, 0, 0}, {0, 0}};
    CHECK(is_homomorphism(g, loop, fold));
    CHECK_FALSE(is_mono(fold));
    CHECK(is_epi(fold, loop));
    CHECK(compose(id, fold) == fold);

    Morphism wrong{{0, 2, 1}, {0, 1}};
    CHECK_FALSE(is_homomorphism(g, g, wrong));
}

TEST_CASE("isomorphism respects the interface") {
    Hypergraph g(2);
    g.add_edge("a", {0}, {1});
    GraphWithInterface x{g, {0, 1}};
    auto self = are_isomorphic(x, x);
    REQUIRE(self);
    CHECK(*self == identity(g));

    GraphWithInterface swapped{g, {1, 0}};
    CHECK_FALSE(are_isomorphic(x, swapped));

    Hypergraph sym(2);
    sym.add_edge("a", {0}, {1});
    sym.add_edge("a", {1}, {0});
    CHECK(are_isomorphic(GraphWithInterface{sym, {0, 1}}, GraphWithInterface{sym, {1, 0}}));
    CHECK(are_isomorphic(GraphWithInterface{sym, {0}}, GraphWithInterface{sym, {1}}));
    CHECK_FALSE(are_isomorphic(GraphWithInterface{sym, {0, 0}}, GraphWithInterface{sym, {0, 1}}));
}

TEST_CASE("random relabelings are found isomorphic, with a valid witness") {
    test::Rng rng(2);
    Signature sig = abc();
    for (int k = 0; k < 300; ++k) {
        GraphWithInterface g = test::random_with_interface(rng, sig, rng.between(1, 6), rng.between(0, 6),
                                                           rng.between(0, 3));
        GraphWithInterface h = test::shuffled(rng, g);
        auto iso = are_isomorphic(g, h);
        REQUIRE(iso);
        CHECK(is_homomorphism(g.graph, h.graph, *iso));
        CHECK(is_iso(*iso, h.graph));
        CHECK(compose(g.interface, *iso) == h.interface);
        CHECK(certificate(g) == certificate(h));
    }
}

TEST_CASE("isomorphism is an equivalence on random triples") {
    test::Rng rng(3);
    Signature sig = abc();
    int related = 0;
    for (int k = 0; k < 300; ++k) {
        auto make = [&] {
            return test::random_with_interface(rng, sig, rng.between(1, 3), rng.between(0, 2), rng.between(0, 1));
        };
        GraphWithInterface a = make(), b = make(), c = make();
        CHECK(are_isomorphic(a, a));
        bool ab = are_isomorphic(a, b).has_value(), ba = are_isomorphic(b, a).has_value();
        CHECK(ab == ba);
        bool bc = are_isomorphic(b, c).has_value(), ac = are_isomorphic(a, c).has_value();
        if (ab && bc) CHECK(ac);
        related += ab;
    }
    CHECK(related > 0);
}

TEST_CASE("small non-isomorphic graphs are told apart") {
    Hypergraph p(3), q(3);
    p.add_edge("a", {0}, {1});
    p.add_edge("a", {1}, {2});
    q.add_edge("a", {0}, {1});
    q.add_edge("a", {2}, {1});
    CHECK_FALSE(are_isomorphic(GraphWithInterface{p, {}}, GraphWithInterface{q, {}}));

    Hypergraph r(2), t(2);
    r.add_edge("b", {0, 1}, {0});
    t.add_edge("b", {1, 0}, {1});
    CHECK_FALSE(are_isomorphic(GraphWithInterface{r, {0}}, GraphWithInterface{t, {0}}));
    CHECK(are_isomorphic(GraphWithInterface{r, {}}, GraphWithInterface{t, {}}));
}

TEST_CASE("iso class index deduplicates") {
    test::Rng rng(4);
    Signature sig = abc();
    IsoClassIndex index;
    GraphWithInterface g = test::random_with_interface(rng, sig, 4, 4, 2);
    CHECK(index.insert(g).second);
    for (int k = 0; k < 20; ++k) CHECK_FALSE(index.insert(test::shuffled(rng, g)).second);
    CHECK(index.size() == 1);
    CHECK(index.find(test::shuffled(rng, g)));
}
