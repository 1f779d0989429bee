#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpoi/hypergraph.hpp"
#include "dpoi/rewriting.hpp"
#include "dpoi/terms.hpp"

namespace dpoi {

/// An error located in a rule file; what() reads file:line:col: message.
class RuleFileError : public std::runtime_error {
public:
    RuleFileError(const std::string& file, std::size_t line, std::size_t column, const std::string& msg)
        : std::runtime_error(file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// An explicit graph side. With inputs/outputs the interface is inputs ++ outputs.
struct GraphSpec {
    Hypergraph graph;
    std::vector<NodeId> interface;
    std::optional<std::size_t> inputs;
};

struct SideSpec {
    std::optional<Term> term;
    std::optional<GraphSpec> graph;
    std::size_t line = 0;
    std::size_t column = 0;
};

struct RuleSpec {
    std::string name;
    SideSpec lhs;
    SideSpec rhs;
    std::size_t line = 0;
    std::size_t column = 0;
};

struct RuleFile {
    std::string path;
    Signature signature;
    bool frobenius = false;
    std::optional<Mode> mode;
    std::vector<RuleSpec> rules;
    std::optional<SideSpec> start;
};

namespace detail {

class RuleFileParser {
public:
    RuleFileParser(std::string_view text, std::string file) : src_(text), file_(std::move(file)) {}

    RuleFile parse() {
        RuleFile out;
        out.path = file_;
        while (true) {
            skip();
            if (pos_ >= src_.size()) break;
            const std::size_t l = line_, c = col_;
            std::string word = ident("a declaration");
            if (word == "signature") {
                expect('{');
                while (skip(), !peek('}')) {
                    if (pos_ >= src_.size()) fail("unterminated signature block");
                    std::string g = ident("'gen'");
                    if (g != "gen") fail_at(l, c, "expected 'gen' in signature block");
                    generator(out.signature);
                    accept(';');
                }
                expect('}');
            } else if (word == "gen") {
                generator(out.signature);
            } else if (word == "frobenius") {
                out.frobenius = true;
            } else if (word == "mode") {
                skip();
                const std::size_t ml = line_, mc = col_;
                std::string m = ident("a mode");
                out.mode = parse_mode(m);
                if (!out.mode) fail_at(ml, mc, "unknown mode '" + m + "'");
            } else if (word == "rule") {
                RuleSpec r;
                r.line = l;
                r.column = c;
                skip();
                r.name = ident("a rule name");
                for (const RuleSpec& o : out.rules)
                    if (o.name == r.name) fail_at(l, c, "duplicate rule '" + r.name + "'");
                expect(':');
                r.lhs = side(true);
                if (!accept_str("=>")) fail("expected '=>'");
                r.rhs = side(false);
                out.rules.push_back(std::move(r));
            } else if (word == "start") {
                out.start = side(false);
            } else {
                fail_at(l, c, "unknown declaration '" + word + "'");
            }
        }
        return out;
    }

private:
    void generator(Signature& sig) {
        skip();
        const std::size_t l = line_, c = col_;
        std::string name = ident("a generator name");
        expect(':');
        std::size_t a = number();
        if (!accept_str("->")) fail("expected '->'");
        std::size_t b = number();
        static const char* reserved[] = {"id", "sym", "mul", "unit", "comul", "counit", "graph"};
        for (const char* r : reserved)
            if (name == r) fail_at(l, c, "'" + name + "' is reserved");
        try {
            sig.add(name, a, b);
        } catch (const std::invalid_argument& e) {
            fail_at(l, c, e.what());
        }
    }

    SideSpec side(bool lhs) {
        skip_inline();
        SideSpec s;
        s.line = line_;
        s.column = col_;
        if (src_.substr(pos_, 5) == "graph" && (pos_ + 5 == src_.size() || !word_char(src_[pos_ + 5]))) {
            for (int k = 0; k < 5; ++k) advance();
            s.graph = graph();
            return s;
        }
        // A term runs up to '=>' on the left, to the end of the line on the right.
        std::size_t end = pos_;
        if (lhs) {
            end = src_.find("=>", pos_);
            if (end == std::string_view::npos) fail("expected '=>'");
        } else {
            end = src_.find('\n', pos_);
            if (end == std::string_view::npos) end = src_.size();
        }
        std::string_view text = src_.substr(pos_, end - pos_);
        if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) fail("expected a term");
        try {
            s.term = parse_term(text, line_, col_);
        } catch (const TermError& e) {
            std::string msg = e.what();
            if (auto p = msg.find(": "); p != std::string::npos) msg = msg.substr(p + 2);
            fail_at(e.line(), e.column(), msg);
        }
        while (pos_ < end) advance();
        return s;
    }

    GraphSpec graph() {
        GraphSpec g;
        std::map<std::string, NodeId> nodes;
        expect('{');
        auto node_ref = [&]() {
            skip();
            const std::size_t l = line_, c = col_;
            std::string n = ident("a node name");
            auto it = nodes.find(n);
            if (it == nodes.end()) fail_at(l, c, "undeclared node '" + n + "'");
            return it->second;
        };
        auto node_list = [&]() {
            std::vector<NodeId> out;
            expect('[');
            while (skip(), !peek(']')) {
                out.push_back(node_ref());
                accept(',');
            }
            expect(']');
            return out;
        };
        std::optional<std::vector<NodeId>> inputs, outputs, iface;
        while (skip(), !peek('}')) {
            if (pos_ >= src_.size()) fail("unterminated graph block");
            const std::size_t l = line_, c = col_;
            std::string kw = ident("'node', 'edge', 'inputs', 'outputs' or 'interface'");
            if (kw == "node" || kw == "nodes") {
                while (skip_inline(), pos_ < src_.size() && word_char(src_[pos_])) {
                    const std::size_t nl = line_, nc = col_;
                    std::string n = ident("a node name");
                    if (!nodes.emplace(n, g.graph.add_node()).second) fail_at(nl, nc, "duplicate node '" + n + "'");
                }
            } else if (kw == "edge") {
                skip();
                std::string label = ident("an edge label");
                std::vector<NodeId> srcs = node_list();
                std::vector<NodeId> tgts = node_list();
                g.graph.add_edge(label, srcs, tgts);
            } else if (kw == "inputs") {
                inputs = node_list();
            } else if (kw == "outputs") {
                outputs = node_list();
            } else if (kw == "interface") {
                iface = node_list();
            } else {
                fail_at(l, c, "unknown graph item '" + kw + "'");
            }
            accept(';');
        }
        expect('}');
        if (iface && (inputs || outputs)) fail("a graph has either 'interface' or 'inputs'/'outputs'");
        if (iface) {
            g.interface = *iface;
        } else {
            g.interface = inputs.value_or(std::vector<NodeId>{});
            g.inputs = g.interface.size();
            for (NodeId v : outputs.value_or(std::vector<NodeId>{})) g.interface.push_back(v);
        }
        return g;
    }

    static bool word_char(char ch) {
        return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\'' ||
               static_cast<unsigned char>(ch) >= 0x80;
    }

    std::string ident(const std::string& what) {
        skip();
        std::size_t start = pos_;
        while (pos_ < src_.size() && word_char(src_[pos_])) advance();
        if (start == pos_) fail("expected " + what);
        return std::string(src_.substr(start, pos_ - start));
    }

    std::size_t number() {
        skip();
        std::size_t start = pos_, v = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            v = v * 10 + static_cast<std::size_t>(src_[pos_] - '0');
            if (v > 1000000) fail("number too large");
            advance();
        }
        if (start == pos_) fail("expected a number");
        return v;
    }

    // Whitespace, newlines and '#' comments.
    void skip() {
        while (pos_ < src_.size()) {
            if (src_[pos_] == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
                advance();
            } else {
                break;
            }
        }
    }
    void skip_inline() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r')) advance();
    }
    bool peek(char ch) const { return pos_ < src_.size() && src_[pos_] == ch; }
    bool accept(char ch) {
        skip();
        if (!peek(ch)) return false;
        advance();
        return true;
    }
    bool accept_str(std::string_view s) {
        skip();
        if (src_.substr(pos_, s.size()) != s) return false;
        for (std::size_t k = 0; k < s.size(); ++k) advance();
        return true;
    }
    void expect(char ch) {
        if (!accept(ch)) fail(std::string("expected '") + ch + "'");
    }
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    [[noreturn]] void fail(const std::string& msg) { fail_at(line_, col_, msg); }
    [[noreturn]] void fail_at(std::size_t l, std::size_t c, const std::string& msg) {
        throw RuleFileError(file_, l, c, msg);
    }

    std::string_view src_;
    std::string file_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

}  // namespace detail

inline RuleFile parse_rule_file(std::string_view text, const std::string& file = "<input>") {
    return detail::RuleFileParser(text, file).parse();
}

inline RuleFile load_rule_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuleFileError(path, 0, 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_rule_file(ss.str(), path);
}

/// A side as a graph with interface (terms are rewired).
inline GraphWithInterface realize_side(const RuleFile& f, const SideSpec& s) {
    try {
        if (s.term) return rewire(*s.term, f.signature, f.frobenius);
    } catch (const TermError& e) {
        std::string msg = e.what();
        if (auto p = msg.find(": "); p != std::string::npos) msg = msg.substr(p + 2);
        throw RuleFileError(f.path, e.line(), e.column(), msg);
    }
    GraphWithInterface g{s.graph->graph, s.graph->interface};
    for (const std::string& v : validate(g.graph, f.signature)) throw RuleFileError(f.path, s.line, s.column, v);
    return g;
}

/// The rewriting system of a rule file; `mode` overrides the file's mode line.
inline RewritingSystem build_system(const RuleFile& f, std::optional<Mode> mode = std::nullopt) {
    RewritingSystem sys;
    sys.signature = f.signature;
    sys.frobenius_structure = f.frobenius;
    sys.mode = mode.value_or(f.mode.value_or(f.frobenius ? Mode::frobenius : Mode::plain));
    for (const RuleSpec& r : f.rules) {
        if (r.lhs.term && r.rhs.term) {
            GeneratorType tl{}, tr{};
            try {
                tl = type_of(*r.lhs.term, f.signature, f.frobenius);
                tr = type_of(*r.rhs.term, f.signature, f.frobenius);
            } catch (const TermError& e) {
                std::string msg = e.what();
                if (auto p = msg.find(": "); p != std::string::npos) msg = msg.substr(p + 2);
                throw RuleFileError(f.path, e.line(), e.column(), msg);
            }
            if (!(tl == tr))
                throw RuleFileError(f.path, r.line, r.column,
                                    "rule '" + r.name + "': sides have types " + std::to_string(tl.arity) + "->" +
                                        std::to_string(tl.coarity) + " and " + std::to_string(tr.arity) + "->" +
                                        std::to_string(tr.coarity));
        }
        GraphWithInterface lhs = realize_side(f, r.lhs), rhs = realize_side(f, r.rhs);
        if (lhs.interface.size() != rhs.interface.size())
            throw RuleFileError(f.path, r.line, r.column, "rule '" + r.name + "': interfaces differ in size");
        sys.rules.push_back(make_rule(r.name, lhs, rhs));
    }
    auto problems = check_system(sys);
    if (!problems.empty()) {
        // Attribute the first problem to its rule when possible.
        for (const RuleSpec& r : f.rules)
            if (problems.front().find("rule '" + r.name + "'") == 0)
                throw RuleFileError(f.path, r.line, r.column, problems.front());
        throw RuleFileError(f.path, 1, 1, problems.front());
    }
    return sys;
}

/// The start graph of a rule file, or a term given separately.
inline GraphWithInterface build_start(const RuleFile& f, const SideSpec& s) { return realize_side(f, s); }

}  // namespace dpoi
