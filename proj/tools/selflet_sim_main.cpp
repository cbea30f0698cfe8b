// selflet-sim: loads a scenario file, runs it deterministically and reports
// goal and message totals. Optionally exports the metrics series as CSV or
// JSON and dumps the full event trace.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "selflet/simulator.hpp"

namespace {

void print_trace_entry(const selflet::TraceEntry& entry) {
    std::cout << "trace tick=" << entry.tick << " node=" << entry.node.value
              << " kind=" << entry.event.kind
              << " payload=" << selflet::payload_to_json(entry.event.payload).dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic simulator for self-managing service nodes"};

    std::string scenario_path;
    std::string policy;
    std::string format = "json";
    std::string metrics_out;
    std::int64_t duration = -1;
    std::int64_t seed = -1;
    bool log_events = false;

    app.add_option("--scenario", scenario_path, "Scenario file (JSON)")->required();
    app.add_option("--duration", duration, "Override the scenario duration in ticks");
    app.add_option("--seed", seed, "Override the scenario seed");
    app.add_option("--policy", policy, "Force the autonomic policy on or off")
        ->check(CLI::IsMember({"on", "off"}));
    app.add_option("--metrics-out", metrics_out, "Write the metrics report to this path");
    app.add_option("--format", format, "Metrics file format")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--log-events", log_events, "Dump the event trace to stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (const char* env = std::getenv("SELFLET_SIM_LOG"); env && std::string(env) == "trace")
        log_events = true;

    try {
        selflet::Scenario scenario = selflet::load_scenario(scenario_path);
        if (duration >= 0) scenario.duration = duration;
        if (seed >= 0) scenario.seed = static_cast<std::uint64_t>(seed);
        if (policy == "on") scenario.policy_enabled = true;
        if (policy == "off") scenario.policy_enabled = false;

        selflet::RunOptions options;
        if (log_events) options.trace_sink = print_trace_entry;

        selflet::MetricsReport report = selflet::run(scenario, options);

        std::cout << "scenario: " << report.scenario << "\n"
                  << "policy: " << (report.policy_enabled ? "on" : "off") << "\n"
                  << "duration: " << report.duration << " ticks\n"
                  << "counting_mode: " << selflet::to_string(report.counting_mode) << "\n"
                  << "total_messages: " << report.total_messages << "\n";
        if (report.convergence_tick)
            std::cout << "convergence_tick: " << *report.convergence_tick << "\n";
        else
            std::cout << "convergence_tick: none\n";
        for (const auto& [id, snap] : report.nodes)
            std::cout << "goals_" << id.value << ": " << snap.goals_executed << "\n";
        if (report.stalled) std::cout << "stalled: true\n";

        if (!metrics_out.empty()) {
            auto export_format = selflet::parse_export_format(format);
            selflet::export_metrics(report, *export_format, metrics_out);
            std::cout << "metrics written to " << metrics_out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
