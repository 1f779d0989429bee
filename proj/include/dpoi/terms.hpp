#pragma once

#include <cctype>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dpoi/category.hpp"
#include "dpoi/hypergraph.hpp"
#include "dpoi/rewriting.hpp"

namespace dpoi {

/// Terms of the free PROP over a signature, optionally with Frobenius generators.
struct Term {
    enum class Kind { generator, identity, symmetry, seq, par, mul, unit, comul, counit };

    Kind kind = Kind::identity;
    std::string name;    // generator
    std::size_t a = 0;   // id:a, sym:a,b
    std::size_t b = 0;
    std::vector<Term> args;  // seq, par: two operands
    std::size_t line = 0;    // source position, 0 when built in code
    std::size_t column = 0;

    static Term gen(std::string n) {
        Term t;
        t.kind = Kind::generator;
        t.name = std::move(n);
        return t;
    }
    static Term id(std::size_t n) {
        Term t;
        t.kind = Kind::identity;
        t.a = n;
        return t;
    }
    static Term sym(std::size_t x, std::size_t y) {
        Term t;
        t.kind = Kind::symmetry;
        t.a = x;
        t.b = y;
        return t;
    }
    static Term seq(Term x, Term y) { return binary(Kind::seq, std::move(x), std::move(y)); }
    static Term par(Term x, Term y) { return binary(Kind::par, std::move(x), std::move(y)); }
    static Term frob(Kind k) {
        Term t;
        t.kind = k;
        return t;
    }

    bool is_frobenius() const {
        return kind == Kind::mul || kind == Kind::unit || kind == Kind::comul || kind == Kind::counit;
    }

    /// Structural equality, ignoring source positions.
    friend bool operator==(const Term& x, const Term& y) {
        return x.kind == y.kind && x.name == y.name && x.a == y.a && x.b == y.b && x.args == y.args;
    }

private:
    static Term binary(Kind k, Term x, Term y) {
        Term t;
        t.kind = k;
        t.args.push_back(std::move(x));
        t.args.push_back(std::move(y));
        return t;
    }
};

/// A syntax or type error at a source position.
class TermError : public std::runtime_error {
public:
    TermError(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(what), line_(line), column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

inline std::string print(const Term& t) {
    using K = Term::Kind;
    switch (t.kind) {
        case K::generator: return t.name;
        case K::identity: return "id:" + std::to_string(t.a);
        case K::symmetry: return "sym:" + std::to_string(t.a) + "," + std::to_string(t.b);
        case K::mul: return "mul";
        case K::unit: return "unit";
        case K::comul: return "comul";
        case K::counit: return "counit";
        case K::seq: {
            const Term& r = t.args[1];
            std::string rs = print(r);
            if (r.kind == K::seq) rs = "(" + rs + ")";
            return print(t.args[0]) + " ; " + rs;
        }
        case K::par: {
            auto side = [](const Term& s, bool right) {
                std::string out = print(s);
                if (s.kind == K::seq || (right && s.kind == K::par)) out = "(" + out + ")";
                return out;
            };
            return side(t.args[0], false) + " + " + side(t.args[1], true);
        }
    }
    return "";
}

namespace detail {

class TermParser {
public:
    TermParser(std::string_view src, std::size_t line, std::size_t column)
        : src_(src), line_(line), column_(column) {}

    Term parse() {
        Term t = seq();
        skip_space();
        if (pos_ < src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return t;
    }

private:
    Term seq() {
        Term t = par();
        while (accept(';')) {
            auto [l, c] = here();
            Term rhs = par();
            t = Term::seq(std::move(t), std::move(rhs));
            t.line = l, t.column = c;
        }
        return t;
    }

    Term par() {
        Term t = atom();
        while (accept('+')) {
            auto [l, c] = here();
            Term rhs = atom();
            t = Term::par(std::move(t), std::move(rhs));
            t.line = l, t.column = c;
        }
        return t;
    }

    Term atom() {
        skip_space();
        auto [l, c] = here();
        if (pos_ >= src_.size()) fail("expected a term");
        Term t;
        if (accept('(')) {
            t = seq();
            if (!accept(')')) fail("expected ')'");
            return t;
        }
        if (!name_start(src_[pos_])) fail("expected a term");
        std::string word = name();
        if (word == "id" && peek(':')) {
            advance();
            t = Term::id(number());
        } else if (word == "sym" && peek(':')) {
            advance();
            std::size_t x = number();
            if (!accept(',')) fail("expected ','");
            t = Term::sym(x, number());
        } else if (word == "mul") {
            t = Term::frob(Term::Kind::mul);
        } else if (word == "unit") {
            t = Term::frob(Term::Kind::unit);
        } else if (word == "comul") {
            t = Term::frob(Term::Kind::comul);
        } else if (word == "counit") {
            t = Term::frob(Term::Kind::counit);
        } else {
            t = Term::gen(std::move(word));
        }
        t.line = l, t.column = c;
        return t;
    }

    static bool name_start(char ch) {
        return std::isalpha(static_cast<unsigned char>(ch)) || ch == '_' || static_cast<unsigned char>(ch) >= 0x80;
    }
    static bool name_char(char ch) {
        return name_start(ch) || std::isdigit(static_cast<unsigned char>(ch)) || ch == '\'';
    }

    std::string name() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && name_char(src_[pos_])) advance();
        return std::string(src_.substr(start, pos_ - start));
    }

    std::size_t number() {
        skip_space();
        if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) fail("expected a number");
        std::size_t v = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            v = v * 10 + static_cast<std::size_t>(src_[pos_] - '0');
            if (v > 1000000) fail("number too large");
            advance();
        }
        return v;
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
    }
    bool peek(char ch) const { return pos_ < src_.size() && src_[pos_] == ch; }
    bool accept(char ch) {
        skip_space();
        if (!peek(ch)) return false;
        advance();
        return true;
    }
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }
    std::pair<std::size_t, std::size_t> here() {
        skip_space();
        return {line_, column_};
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw TermError(std::to_string(line_) + ":" + std::to_string(column_) + ": " + msg, line_, column_);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_;
    std::size_t column_;
};

}  // namespace detail

/// Parses a term; positions in errors are relative to (line, column) of src's first character.
inline Term parse_term(std::string_view src, std::size_t line = 1, std::size_t column = 1) {
    return detail::TermParser(src, line, column).parse();
}

/// The type n -> m of a term. Frobenius generators need allow_frobenius.
inline GeneratorType type_of(const Term& t, const Signature& sig, bool allow_frobenius) {
    using K = Term::Kind;
    auto fail = [&](const std::string& msg) -> GeneratorType {
        throw TermError(std::to_string(t.line) + ":" + std::to_string(t.column) + ": " + msg + " in '" + print(t) +
                            "'",
                        t.line, t.column);
    };
    switch (t.kind) {
        case K::generator: {
            auto g = sig.find(t.name);
            if (!g) return fail("unknown generator '" + t.name + "'");
            return *g;
        }
        case K::identity: return {t.a, t.a};
        case K::symmetry: return {t.a + t.b, t.a + t.b};
        case K::mul:
        case K::unit:
        case K::comul:
        case K::counit:
            if (!allow_frobenius) return fail("Frobenius generator without Frobenius structure");
            if (t.kind == K::mul) return {2, 1};
            if (t.kind == K::unit) return {0, 1};
            if (t.kind == K::comul) return {1, 2};
            return {1, 0};
        case K::seq: {
            GeneratorType x = type_of(t.args[0], sig, allow_frobenius);
            GeneratorType y = type_of(t.args[1], sig, allow_frobenius);
            if (x.coarity != y.arity)
                return fail("composite of " + std::to_string(x.arity) + "->" + std::to_string(x.coarity) + " with " +
                            std::to_string(y.arity) + "->" + std::to_string(y.coarity));
            return {x.arity, y.coarity};
        }
        case K::par: {
            GeneratorType x = type_of(t.args[0], sig, allow_frobenius);
            GeneratorType y = type_of(t.args[1], sig, allow_frobenius);
            return {x.arity + y.arity, x.coarity + y.coarity};
        }
    }
    return fail("malformed term");
}

namespace detail {

inline Cospan interpret_typed(const Term& t, const Signature& sig) {
    using K = Term::Kind;
    Cospan c;
    auto range = [](NodeId from, std::size_t n) {
        std::vector<NodeId> v(n);
        std::iota(v.begin(), v.end(), from);
        return v;
    };
    switch (t.kind) {
        case K::generator: {
            GeneratorType g = *sig.find(t.name);
            c.apex = discrete(g.arity + g.coarity);
            c.left = range(0, g.arity);
            c.right = range(static_cast<NodeId>(g.arity), g.coarity);
            c.apex.add_edge(t.name, c.left, c.right);
            return c;
        }
        case K::identity:
            c.apex = discrete(t.a);
            c.left = c.right = range(0, t.a);
            return c;
        case K::symmetry:
            c.apex = discrete(t.a + t.b);
            c.left = range(0, t.a + t.b);
            c.right = range(static_cast<NodeId>(t.a), t.b);
            for (NodeId v = 0; v < t.a; ++v) c.right.push_back(v);
            return c;
        case K::mul: c.apex = discrete(1), c.left = {0, 0}, c.right = {0}; return c;
        case K::unit: c.apex = discrete(1), c.right = {0}; return c;
        case K::comul: c.apex = discrete(1), c.left = {0}, c.right = {0, 0}; return c;
        case K::counit: c.apex = discrete(1), c.left = {0}; return c;
        case K::seq: {
            Cospan x = interpret_typed(t.args[0], sig), y = interpret_typed(t.args[1], sig);
            Pushout p = pushout(x.apex, y.apex, Morphism{x.right, {}}, Morphism{y.left, {}});
            c.apex = std::move(p.object);
            c.left = compose(x.left, p.from_left);
            c.right = compose(y.right, p.from_right);
            return c;
        }
        case K::par: {
            Cospan x = interpret_typed(t.args[0], sig), y = interpret_typed(t.args[1], sig);
            Coproduct s = coproduct(x.apex, y.apex);
            c.apex = std::move(s.graph);
            c.left = compose(x.left, s.left);
            for (NodeId v : compose(y.left, s.right)) c.left.push_back(v);
            c.right = compose(x.right, s.left);
            for (NodeId v : compose(y.right, s.right)) c.right.push_back(v);
            return c;
        }
    }
    return c;
}

}  // namespace detail

/// The cospan of a term: sequential composition by pushout, parallel by coproduct.
inline Cospan interpret(const Term& t, const Signature& sig, bool allow_frobenius = true) {
    type_of(t, sig, allow_frobenius);
    return detail::interpret_typed(t, sig);
}

/// G <- i+j for a term i -> j.
inline GraphWithInterface rewire(const Term& t, const Signature& sig, bool allow_frobenius = true) {
    return rewire(interpret(t, sig, allow_frobenius));
}

struct TermRule {
    std::string name;
    Term lhs;
    Term rhs;
};

/// One DPO rule L <- n+m -> R per term rule, in frobenius mode.
inline RewritingSystem translate_system(const Signature& sig, const std::vector<TermRule>& rules,
                                        bool frobenius_structure = true) {
    RewritingSystem sys;
    sys.signature = sig;
    sys.mode = Mode::frobenius;
    sys.frobenius_structure = frobenius_structure;
    for (const TermRule& r : rules) {
        GeneratorType tl = type_of(r.lhs, sig, frobenius_structure);
        GeneratorType tr = type_of(r.rhs, sig, frobenius_structure);
        if (!(tl == tr))
            throw TermError("rule '" + r.name + "': sides have types " + std::to_string(tl.arity) + "->" +
                                std::to_string(tl.coarity) + " and " + std::to_string(tr.arity) + "->" +
                                std::to_string(tr.coarity),
                            r.lhs.line, r.lhs.column);
        sys.rules.push_back(make_rule(r.name, rewire(r.lhs, sig, frobenius_structure),
                                      rewire(r.rhs, sig, frobenius_structure)));
    }
    return sys;
}

namespace detail {

inline Term seq_all(std::vector<Term> ts, std::size_t width) {
    if (ts.empty()) return Term::id(width);
    Term out = std::move(ts.front());
    for (std::size_t k = 1; k < ts.size(); ++k) out = Term::seq(std::move(out), std::move(ts[k]));
    return out;
}

inline Term par_all(std::vector<Term> ts) {
    if (ts.empty()) return Term::id(0);
    Term out = std::move(ts.front());
    for (std::size_t k = 1; k < ts.size(); ++k) out = Term::par(std::move(out), std::move(ts[k]));
    return out;
}

// Wire w moves to position target[w], by adjacent transpositions.
inline Term permutation(const std::vector<std::size_t>& target) {
    const std::size_t n = target.size();
    std::vector<std::size_t> cur(n);
    std::iota(cur.begin(), cur.end(), 0);
    std::vector<Term> layers;
    bool swapped = true;
    while (swapped) {
        swapped = false;
        for (std::size_t p = 0; p + 1 < n; ++p)
            if (target[cur[p]] > target[cur[p + 1]]) {
                std::swap(cur[p], cur[p + 1]);
                std::vector<Term> row;
                if (p > 0) row.push_back(Term::id(p));
                row.push_back(Term::sym(1, 1));
                if (n - p - 2 > 0) row.push_back(Term::id(n - p - 2));
                layers.push_back(par_all(std::move(row)));
                swapped = true;
            }
    }
    return seq_all(std::move(layers), n);
}

inline Term spider(std::size_t in, std::size_t out) {
    using K = Term::Kind;
    std::vector<Term> parts;
    if (in == 0) parts.push_back(Term::frob(K::unit));
    for (std::size_t k = in; k > 1; --k)
        parts.push_back(k > 2 ? Term::par(Term::frob(K::mul), Term::id(k - 2)) : Term::frob(K::mul));
    if (out == 0) parts.push_back(Term::frob(K::counit));
    for (std::size_t k = 1; k < out; ++k)
        parts.push_back(k > 1 ? Term::par(Term::frob(K::comul), Term::id(k - 1)) : Term::frob(K::comul));
    return seq_all(std::move(parts), 1);
}

}  // namespace detail

/**
 * A term whose rewiring is isomorphic to G <- i+j (interface split after
 * `inputs`). Built from one spider per node, one generator per edge, and
 * caps and cups feeding generator outputs back into the spiders.
 */
inline Term readback(const GraphWithInterface& g, std::size_t inputs) {
    using K = Term::Kind;
    const Hypergraph& h = g.graph;
    const std::size_t i = inputs, j = g.interface.size() - inputs;
    std::vector<NodeId> in_wires(g.interface.begin(), g.interface.begin() + static_cast<std::ptrdiff_t>(i));
    std::vector<NodeId> out_wires;
    std::vector<Term> gens;
    std::size_t a = 0, b = 0;
    for (const Edge& e : h.edges()) {
        for (NodeId t : e.targets) in_wires.push_back(t);
        for (NodeId s : e.sources) out_wires.push_back(s);
        gens.push_back(Term::gen(e.label));
        a += e.sources.size();
        b += e.targets.size();
    }
    out_wires.insert(out_wires.end(), g.interface.begin() + static_cast<std::ptrdiff_t>(i), g.interface.end());

    // Spider block (i + b) -> (a + j), grouped node by node.
    std::vector<std::size_t> in_pos(in_wires.size()), out_pos(out_wires.size());
    std::vector<Term> spiders;
    std::size_t ip = 0, op = 0;
    std::vector<std::size_t> grouped_out;
    for (NodeId v = 0; v < h.node_count(); ++v) {
        std::size_t p = 0, q = 0;
        for (std::size_t w = 0; w < in_wires.size(); ++w)
            if (in_wires[w] == v) in_pos[w] = ip++, ++p;
        for (std::size_t w = 0; w < out_wires.size(); ++w)
            if (out_wires[w] == v) grouped_out.push_back(w), ++q;
        spiders.push_back(detail::spider(p, q));
        op += q;
    }
    for (std::size_t k = 0; k < grouped_out.size(); ++k) out_pos[grouped_out[k]] = k;
    std::vector<std::size_t> back(grouped_out.size());
    for (std::size_t k = 0; k < grouped_out.size(); ++k) back[k] = grouped_out[k];
    Term block = Term::seq(Term::seq(detail::permutation(in_pos), detail::par_all(std::move(spiders))),
                           detail::permutation(back));

    // cap_b : 0 -> b + b, the two copies side by side.
    std::vector<Term> caps;
    for (std::size_t k = 0; k < b; ++k) caps.push_back(Term::seq(Term::frob(K::unit), Term::frob(K::comul)));
    std::vector<std::size_t> uninterleave(2 * b);
    for (std::size_t k = 0; k < b; ++k) uninterleave[2 * k] = k, uninterleave[2 * k + 1] = b + k;
    Term cap = Term::seq(detail::par_all(std::move(caps)), detail::permutation(uninterleave));
    // cup_b : (b + j + b) -> j, pairing the two b blocks.
    std::vector<std::size_t> interleave(2 * b + j);
    for (std::size_t k = 0; k < b; ++k) interleave[k] = j + 2 * k, interleave[b + j + k] = j + 2 * k + 1;
    for (std::size_t k = 0; k < j; ++k) interleave[b + k] = k;
    std::vector<Term> cups;
    for (std::size_t k = 0; k < b; ++k) cups.push_back(Term::seq(Term::frob(K::mul), Term::frob(K::counit)));
    Term cup = Term::seq(detail::permutation(interleave), Term::par(Term::id(j), detail::par_all(std::move(cups))));

    std::vector<Term> steps;
    steps.push_back(Term::par(Term::id(i), std::move(cap)));
    steps.push_back(Term::par(std::move(block), Term::id(b)));
    steps.push_back(Term::par(Term::par(detail::par_all(std::move(gens)), Term::id(j)), Term::id(b)));
    steps.push_back(std::move(cup));
    (void)a;
    (void)op;
    return detail::seq_all(std::move(steps), i);
}

}  // namespace dpoi
