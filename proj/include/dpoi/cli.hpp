#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpoi/convex.hpp"
#include "dpoi/critical_pairs.hpp"
#include "dpoi/path_extensions.hpp"
#include "dpoi/report.hpp"
#include "dpoi/rule_file.hpp"

namespace dpoi {

enum ExitCode : int {
    kExitConfluent = 0,
    kExitNotConfluent = 1,
    kExitInconclusive = 2,
    kExitUsage = 10,
    kExitParse = 11,
    kExitUnsupported = 12,
    kExitVerify = 13,
    kExitIo = 14,
};

struct CliOptions {
    std::string command;
    std::string file;
    std::string mode;
    std::size_t max_steps = 10000;
    std::size_t max_size = 0;
    std::size_t jobs = 1;
    std::string dot_dir;
    bool json = false;
    bool verify = false;
    bool empty_interface = false;
    std::string start;
};

namespace detail {

inline int exit_for(Verdict v) {
    switch (v) {
        case Verdict::confluent: return kExitConfluent;
        case Verdict::not_confluent: return kExitNotConfluent;
        case Verdict::inconclusive: return kExitInconclusive;
    }
    return kExitInconclusive;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

inline bool verify_pair(const RewritingSystem& sys, const PreCriticalPair& p) {
    return verify_step(sys, p.source(), p.branch1) && verify_step(sys, p.source(), p.branch2);
}

inline int cmd_check(const CliOptions& o, const RewritingSystem& sys, std::ostream& out, std::ostream& err) {
    Caps caps{o.max_steps, o.max_size};
    ConfluenceReport r;
    if (sys.mode == Mode::convex && !o.empty_interface) {
        if (is_left_connected(sys))
            r = decide_confluence_left_connected(sys, caps, o.jobs);
        else
            r = decide_local_confluence_convex(sys, caps, o.jobs);
    } else {
        ConfluenceOptions opts;
        opts.pairs.empty_interface = o.empty_interface;
        opts.jobs = o.jobs;
        r = decide_confluence(sys, caps, opts);
    }
    if (o.verify)
        for (const PairVerdict& v : r.pairs)
            if (!verify_pair(sys, v.pair)) {
                err << "verification failed for pair " << v.pair.name1 << "/" << v.pair.name2 << "\n";
                return kExitVerify;
            }
    if (!o.dot_dir.empty()) {
        std::filesystem::create_directories(o.dot_dir);
        for (std::size_t k = 0; k < r.pairs.size(); ++k)
            write_file(std::filesystem::path(o.dot_dir) / ("pair_" + std::to_string(k) + ".dot"),
                       to_dot(r.pairs[k].pair, "pair_" + std::to_string(k)));
    }
    if (o.json) {
        out << to_json(r).dump(2) << "\n";
    } else {
        out << "verdict: " << to_string(r.verdict) << "\n";
        out << "mode: " << to_string(r.mode) << "\n";
        out << "pairs: " << r.pairs.size() << " (" << r.critical_pairs << " critical)\n";
        for (std::size_t k = 0; k < r.pairs.size(); ++k) {
            const PairVerdict& v = r.pairs[k];
            if (!v.pair.critical() && v.join.verdict == Joinability::joinable) continue;
            out << "  #" << k << " " << v.pair.name1 << "/" << v.pair.name2 << " overlap " << v.pair.overlap_size
                << (v.pair.parallel ? " parallel" : "") << ": " << to_string(v.join.verdict) << "\n";
        }
        if (r.truncated) out << "caps hit: max_steps=" << caps.max_steps << " max_size=" << caps.max_graph_size << "\n";
        out << "note: " << r.note << "\n";
    }
    return exit_for(r.verdict);
}

inline int cmd_pairs(const CliOptions& o, const RewritingSystem& sys, std::ostream& out, std::ostream& err) {
    PairOptions po;
    po.empty_interface = o.empty_interface;
    auto pairs = enumerate_pre_critical_pairs(sys, po);
    if (o.verify)
        for (const PreCriticalPair& p : pairs)
            if (!verify_pair(sys, p)) {
                err << "verification failed for pair " << p.name1 << "/" << p.name2 << "\n";
                return kExitVerify;
            }
    if (!o.dot_dir.empty()) std::filesystem::create_directories(o.dot_dir);
    nlohmann::ordered_json listing = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const PreCriticalPair& p = pairs[k];
        const std::string name = "pair_" + std::to_string(k);
        const std::string dot = to_dot(p, name);
        if (!o.dot_dir.empty()) write_file(std::filesystem::path(o.dot_dir) / (name + ".dot"), dot);
        if (o.json) {
            listing.push_back({{"index", k},
                               {"rules", {p.name1, p.name2}},
                               {"overlap_size", p.overlap_size},
                               {"parallel", p.parallel},
                               {"critical", p.critical()},
                               {"source", to_json(p.source())},
                               {"branches", {to_json(p.branch1.result), to_json(p.branch2.result)}}});
        } else {
            out << "#" << k << " " << p.name1 << "/" << p.name2 << " overlap " << p.overlap_size
                << (p.parallel ? " parallel" : "") << (p.diagonal ? " diagonal" : "")
                << (p.critical() ? " critical" : "") << "\n";
            out << dot;
        }
    }
    if (o.json) out << listing.dump(2) << "\n";
    return 0;
}

inline int cmd_rewrite(const CliOptions& o, const RuleFile& f, const RewritingSystem& sys, std::ostream& out,
                       std::ostream& err) {
    std::optional<SideSpec> start = f.start;
    if (!o.start.empty()) {
        SideSpec s;
        try {
            s.term = parse_term(o.start);
        } catch (const TermError& e) {
            err << "--start:" << e.what() << "\n";
            return kExitParse;
        }
        start = s;
    }
    if (!start) {
        err << f.path << ": no start graph (add a 'start' line or pass --start)\n";
        return kExitUsage;
    }
    GraphWithInterface g = build_start(f, *start);
    if (sys.mode == Mode::convex && !ma_interface_split(g)) {
        err << "start graph is not an ma-hypergraph with inputs and outputs as interface\n";
        return kExitUnsupported;
    }
    if (!o.dot_dir.empty()) std::filesystem::create_directories(o.dot_dir);
    nlohmann::ordered_json trace = nlohmann::ordered_json::array();
    std::size_t k = 0;
    for (;; ++k) {
        if (!o.dot_dir.empty())
            write_file(std::filesystem::path(o.dot_dir) / ("step_" + std::to_string(k) + ".dot"),
                       to_dot(g, "step_" + std::to_string(k)));
        if (o.max_size != 0 && g.graph.size() > o.max_size) {
            if (!o.json) out << "stopped: graph size " << g.graph.size() << " exceeds max-size\n";
            break;
        }
        auto steps = enumerate_steps(sys, g);
        if (o.verify)
            for (const RewriteStep& s : steps)
                if (!verify_step(sys, g, s)) {
                    err << "verification failed at step " << k << " (rule " << s.rule_name << ")\n";
                    return kExitVerify;
                }
        nlohmann::ordered_json entry{{"step", k}, {"graph", to_json(g)}, {"successors", nlohmann::ordered_json::array()}};
        for (const RewriteStep& s : steps) entry["successors"].push_back({{"rule", s.rule_name}, {"result", to_json(s.result)}});
        if (!o.json) {
            out << "step " << k << ": " << g.graph.node_count() << " nodes, " << g.graph.edge_count() << " edges, "
                << steps.size() << " successor(s)\n";
            for (const RewriteStep& s : steps) out << "  via " << s.rule_name << "\n";
            out << to_dot(g, "step_" + std::to_string(k));
        }
        trace.push_back(std::move(entry));
        if (steps.empty()) {
            if (!o.json) out << "normal form after " << k << " step(s)\n";
            break;
        }
        if (k == o.max_steps) {
            if (!o.json) out << "stopped after " << k << " step(s)\n";
            break;
        }
        g = steps.front().result;
    }
    if (o.json) out << trace.dump(2) << "\n";
    return 0;
}

}  // namespace detail

/// Runs the command-line interface. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Confluence checking for DPO rewriting with interfaces"};
    app.set_help_flag("-h,--help", "Print this help message and exit");
    CliOptions o;
    app.require_subcommand(1);
    std::vector<CLI::App*> subs;
    subs.push_back(app.add_subcommand("check", "Decide confluence of a terminating system"));
    subs.push_back(app.add_subcommand("pairs", "List pre-critical pairs"));
    subs.push_back(app.add_subcommand("rewrite", "Rewrite a start graph"));
    for (CLI::App* s : subs) {
        s->add_option("file", o.file, "Rule file")->required();
        s->add_option("--mode", o.mode, "plain | frobenius | convex (overrides the file)");
        s->add_option("--max-steps", o.max_steps, "Iso classes per joinability search, or rewrite steps");
        s->add_option("--max-size", o.max_size, "Largest graph explored (nodes + edges); 0 = four times the overlap");
        s->add_option("--jobs", o.jobs, "Concurrent pair checks")->check(CLI::PositiveNumber);
        s->add_option("--dot", o.dot_dir, "Directory for DOT files");
        s->add_flag("--json", o.json, "Machine-readable output");
        s->add_flag("--verify", o.verify, "Re-check every step against the pushout oracle");
        s->add_flag("--empty-interface", o.empty_interface, "Enumerate pairs without interfaces (no verdict)");
    }
    subs[2]->add_option("--start", o.start, "Start term (overrides the file's start line)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return kExitUsage;
    }
    for (CLI::App* s : subs)
        if (s->parsed()) o.command = s->get_name();

    std::optional<Mode> mode;
    if (!o.mode.empty()) {
        mode = parse_mode(o.mode);
        if (!mode) {
            err << "unknown mode '" << o.mode << "'\n";
            return kExitUsage;
        }
    }
    try {
        RuleFile f = load_rule_file(o.file);
        RewritingSystem sys = build_system(f, mode);
        if (o.command == "check") return detail::cmd_check(o, sys, out, err);
        if (o.command == "pairs") return detail::cmd_pairs(o, sys, out, err);
        return detail::cmd_rewrite(o, f, sys, out, err);
    } catch (const RuleFileError& e) {
        err << e.what() << "\n";
        return e.line() == 0 ? kExitIo : kExitParse;
    } catch (const NotLeftConnected& e) {
        err << e.what() << "\n";
        return kExitUnsupported;
    } catch (const UnsupportedRuleShape& e) {
        err << "unsupported: " << e.what() << "\n";
        return kExitUnsupported;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

}  // namespace dpoi
