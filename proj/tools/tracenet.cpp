// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <CLI11.hpp>

#include <tracenet/contract.hpp>
#include <tracenet/explorer.hpp>
#include <tracenet/properties.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

using namespace tracenet;

namespace {

// Exit contract shared with CI: 0 property holds, 1 property fails,
// 2 input error, 3 resource budget.
constexpr int kHolds = 0;
constexpr int kFails = 1;
constexpr int kInputError = 2;
constexpr int kResourceError = 3;

struct Options {
    std::string contract;
    std::string replacement;  // update only
    std::optional<int64_t> conf_delay_int;
    std::optional<int64_t> conf_delay_ext;
    std::optional<int> reorg_depth;
    std::string policy;
    size_t budget = ExplorationParams{}.budget;
    std::string dot_path;
    std::string report_path;
    std::vector<std::string> from_trace;
};

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write '" + tmp + "'");
        out << content;
        if (!out.flush()) throw InputError("cannot write '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw InputError("cannot move '" + tmp + "' to '" + path + "'");
    }
}

void emit_report(const Options& opt, const std::string& report) {
    if (opt.report_path.empty()) {
        std::fputs(report.c_str(), stdout);
    } else {
        write_atomic(opt.report_path, report);
    }
}

// Applies command-line overrides and replays any extra snapshot steps.
LoadedContract load(const std::string& path, const Options& opt) {
    ContractDescription d = load_contract(path);
    if (opt.conf_delay_int) d.conf_delay[0] = *opt.conf_delay_int;
    if (opt.conf_delay_ext) d.conf_delay[1] = *opt.conf_delay_ext;
    if (opt.reorg_depth) d.reorg_depth = *opt.reorg_depth;
    if (!opt.policy.empty()) d.policy = opt.policy;
    LoadedContract lc = instantiate(std::move(d));
    if (!opt.from_trace.empty()) {
        lc.root = replay_trace(lc.sys, lc.root, opt.from_trace);
    }
    return lc;
}

std::string preamble(const std::string& path, const Options& opt, const SafetyPolicy& p) {
    std::string s = "contract: " + path + "\n";
    if (!opt.from_trace.empty()) {
        s += "snapshot:";
        for (const auto& step : opt.from_trace) s += " " + step;
        s += "\n";
    }
    s += "policy: " + policy_to_string(p) + "\n";
    return s;
}

int cmd_verify(const Options& opt, bool graph_only) {
    LoadedContract lc = load(opt.contract, opt);
    const ReachabilityGraph g = explore(lc.sys, lc.root, {opt.budget, 0});
    if (!opt.dot_path.empty()) write_atomic(opt.dot_path, export_graph_dot(lc.sys, g));

    std::string report = preamble(opt.contract, opt, lc.policy);
    report += "states: " + to_dec(g.nodes.size()) + "\n";
    report += "edges: " + to_dec(g.edges.size()) + "\n";
    if (graph_only) {
        emit_report(opt, report);
        return kHolds;
    }

    const Verdict v = trustless_execution(lc.sys, g, lc.policy);
    size_t safe = 0;
    for (const bool b : v.safe) safe += b;
    report += "safe states: " + to_dec(safe) + "\n";
    report += std::string("verdict: ") + (v.holds ? "holds" : "fails") + "\n";
    report += "reason: " + v.reason + "\n";
    if (!v.trace.empty()) {
        report += v.holds ? "settlement strategy:\n" : "counterexample:\n";
        for (const auto& line : render_path(lc.sys, g, v.trace)) {
            report += "  " + line + "\n";
        }
    }
    emit_report(opt, report);
    return v.holds ? kHolds : kFails;
}

int cmd_stability(const Options& opt) {
    LoadedContract lc = load(opt.contract, opt);
    const StabilityVerdict v = state_stability(lc.sys, lc.root, {opt.budget, 0});

    std::string report = preamble(opt.contract, opt, lc.policy);
    report += "horizon: " + to_dec(stability_horizon(lc.sys)) + "\n";
    report += "states: " + to_dec(v.nodes) + "\n";
    report += "aged states: " + to_dec(v.aged_nodes) + "\n";
    report += std::string("verdict: ") + (v.stable ? "stable" : "unstable") + "\n";
    if (!v.first_difference.empty()) {
        report += "difference: " + v.first_difference + "\n";
    }
    emit_report(opt, report);
    return v.stable ? kHolds : kFails;
}

int cmd_update(const Options& opt) {
    LoadedContract oldc = load(opt.contract, opt);
    LoadedContract newc = load(opt.replacement, opt);
    const ReachabilityGraph old_g = explore(oldc.sys, oldc.root, {opt.budget, 0});
    const ReachabilityGraph new_g = explore(newc.sys, newc.root, {opt.budget, 0});
    if (!opt.dot_path.empty()) write_atomic(opt.dot_path, export_graph_dot(newc.sys, new_g));

    const UpdateVerdict v = update_safety(oldc.sys, old_g, newc.sys, new_g, newc.policy);

    std::string report = "contract: " + opt.contract + "\n";
    report += "replacement: " + opt.replacement + "\n";
    report += "policy: " + policy_to_string(newc.policy) + "\n";
    report += std::string("replacement verdict: ") +
              (v.replacement.holds ? "holds" : "fails") + "\n";
    report += "replacement reason: " + v.replacement.reason + "\n";
    if (!v.lost.empty()) {
        report += "lost settlements:\n";
        for (const auto& m : v.lost) report += "  " + m + "\n";
    }
    report += std::string("verdict: ") + (v.holds ? "safe update" : "unsafe update") + "\n";
    emit_report(opt, report);
    return v.holds ? kHolds : kFails;
}

void add_common(CLI::App* cmd, Options& opt, bool wants_policy = true) {
    cmd->add_option("--conf-delay-int", opt.conf_delay_int,
                    "Blocks from broadcast to confirmation for int");
    cmd->add_option("--conf-delay-ext", opt.conf_delay_ext,
                    "Blocks from broadcast to confirmation for ext");
    cmd->add_option("--reorg-depth", opt.reorg_depth, "Maximum adversarial reorg depth");
    if (wants_policy) {
        cmd->add_option("--policy", opt.policy, "Safety policy, balance:<actor>:<min>");
    }
    cmd->add_option("--budget", opt.budget, "Distinct-state exploration budget")
        ->envname("TRACENET_BUDGET");
    cmd->add_option("--report", opt.report_path, "Write the report here instead of stdout");
    cmd->add_option("--from-trace", opt.from_trace,
                    "Extra replay steps (labels or d(N)) applied to the initial state")
        ->delimiter(',');
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explicit-state safety analysis of unsigned transaction contracts"};
    app.require_subcommand(1);

    Options opt;
    CLI::App* verify = app.add_subcommand("verify", "Decide trustless execution");
    verify->add_option("contract", opt.contract, "Contract description file")->required();
    add_common(verify, opt);
    verify->add_option("--dot", opt.dot_path, "Write the reachability graph as DOT");

    CLI::App* graph = app.add_subcommand("graph", "Explore and export the reachability graph");
    graph->add_option("contract", opt.contract, "Contract description file")->required();
    add_common(graph, opt);
    graph->add_option("--dot", opt.dot_path, "Write the reachability graph as DOT")->required();

    CLI::App* stability = app.add_subcommand("stability", "Decide snapshot stability");
    stability->add_option("contract", opt.contract, "Contract description file")->required();
    add_common(stability, opt, false);

    CLI::App* update = app.add_subcommand("update", "Decide update safety old vs new");
    update->add_option("contract", opt.contract, "Current contract description")->required();
    update->add_option("replacement", opt.replacement, "Replacement contract description")
        ->required();
    add_common(update, opt);
    update->add_option("--dot", opt.dot_path, "Write the replacement graph as DOT");

    try {
        app.parse(argc, argv);
        if (verify->parsed()) return cmd_verify(opt, false);
        if (graph->parsed()) return cmd_verify(opt, true);
        if (stability->parsed()) return cmd_stability(opt);
        return cmd_update(opt);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInputError;
    } catch (const ResourceError& e) {
        std::fprintf(stderr, "resource error: %s\n", e.what());
        return kResourceError;
    } catch (const InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kInputError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kInputError;
    }
}
