#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpoi/critical_pairs.hpp"
#include "dpoi/hypergraph.hpp"

namespace dpoi {

inline nlohmann::ordered_json to_json(const Hypergraph& g) {
    nlohmann::ordered_json j;
    j["nodes"] = g.node_count();
    j["edges"] = nlohmann::ordered_json::array();
    for (const Edge& e : g.edges())
        j["edges"].push_back({{"label", e.label}, {"sources", e.sources}, {"targets", e.targets}});
    return j;
}

inline nlohmann::ordered_json to_json(const GraphWithInterface& g) {
    nlohmann::ordered_json j = to_json(g.graph);
    j["interface"] = g.interface;
    return j;
}

inline nlohmann::ordered_json to_json(const Caps& c) {
    return {{"max_steps", c.max_steps}, {"max_graph_size", c.max_graph_size}};
}

inline nlohmann::ordered_json to_json(const PairVerdict& v) {
    const PreCriticalPair& p = v.pair;
    nlohmann::ordered_json j;
    j["rules"] = {p.name1, p.name2};
    j["kind"] = p.kind == PairKind::ma ? "ma" : "plain";
    j["overlap_size"] = p.overlap_size;
    j["parallel"] = p.parallel;
    j["critical"] = p.critical();
    j["joinable"] = to_string(v.join.verdict);
    if (v.join.witness) j["witness"] = to_json(*v.join.witness);
    if (v.join.verdict == Joinability::not_joinable) {
        j["source"] = to_json(p.source());
        j["branches"] = {to_json(p.branch1.result), to_json(p.branch2.result)};
    }
    if (v.path_relation) {
        j["path_relation"] = nlohmann::ordered_json::array();
        for (auto [y, x] : *v.path_relation) j["path_relation"].push_back({y, x});
    }
    if (v.extension) j["extension"] = to_json(*v.extension);
    if (!v.note.empty()) j["note"] = v.note;
    return j;
}

/// The report object. Only elapsed_ms varies between runs on the same input.
inline nlohmann::ordered_json to_json(const ConfluenceReport& r) {
    nlohmann::ordered_json j;
    j["verdict"] = to_string(r.verdict);
    j["mode"] = to_string(r.mode);
    j["pairs"] = nlohmann::ordered_json::array();
    for (const PairVerdict& v : r.pairs) j["pairs"].push_back(to_json(v));
    j["caps"] = to_json(r.caps);
    j["truncated"] = r.truncated;
    j["critical_pairs"] = r.critical_pairs;
    j["note"] = r.note;
    j["elapsed_ms"] = r.elapsed_ms;
    return j;
}

namespace detail {

inline std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

inline void dot_statements(std::ostringstream& out, const GraphWithInterface& g, const std::string& prefix,
                           const std::string& indent) {
    std::vector<std::string> tags(g.graph.node_count());
    for (std::size_t k = 0; k < g.interface.size(); ++k)
        tags[g.interface[k]] += (tags[g.interface[k]].empty() ? "" : ",") + std::to_string(k);
    auto node = [&](NodeId v) { return dot_quote(prefix + "n" + std::to_string(v)); };
    for (NodeId v = 0; v < g.graph.node_count(); ++v) {
        std::string label = "n" + std::to_string(v);
        if (!tags[v].empty()) label += " [" + tags[v] + "]";
        out << indent << node(v) << " [shape=circle, label=" << dot_quote(label) << "];\n";
    }
    for (EdgeId e = 0; e < g.graph.edge_count(); ++e) {
        const Edge& edge = g.graph.edge(e);
        const std::string id = dot_quote(prefix + "e" + std::to_string(e));
        out << indent << id << " [shape=box, label=" << dot_quote(edge.label) << "];\n";
        for (std::size_t k = 0; k < edge.sources.size(); ++k)
            out << indent << node(edge.sources[k]) << " -> " << id << " [label=" << dot_quote(std::to_string(k))
                << "];\n";
        for (std::size_t k = 0; k < edge.targets.size(); ++k)
            out << indent << id << " -> " << node(edge.targets[k]) << " [label=" << dot_quote(std::to_string(k))
                << "];\n";
    }
}

}  // namespace detail

/**
 * DOT rendering: nodes as circles, hyperedges as boxes, tentacles numbered.
 * Interface positions are written next to the nodes they land on.
 */
inline std::string to_dot(const GraphWithInterface& g, const std::string& name = "G") {
    std::ostringstream out;
    out << "digraph " << detail::dot_quote(name) << " {\n  rankdir=LR;\n";
    detail::dot_statements(out, g, "", "  ");
    out << "}\n";
    return out.str();
}

/// A pair as one DOT graph with three clusters: S <- J and both branches.
inline std::string to_dot(const PreCriticalPair& p, const std::string& name = "pair") {
    using detail::dot_quote;
    std::ostringstream out;
    out << "digraph " << dot_quote(name) << " {\n  rankdir=LR;\n";
    const GraphWithInterface parts[3] = {p.source(), p.branch1.result, p.branch2.result};
    const std::string titles[3] = {"source", "branch1", "branch2"};
    for (int k = 0; k < 3; ++k) {
        out << "  subgraph " << dot_quote("cluster_" + titles[k]) << " {\n";
        out << "    label=" << dot_quote(titles[k]) << ";\n";
        detail::dot_statements(out, parts[k], titles[k] + "_", "    ");
        out << "  }\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace dpoi
