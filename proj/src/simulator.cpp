#include "selflet/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace selflet {

namespace {

struct Runtime {
    SimClock clock;
    SimBroker broker;
    std::vector<std::unique_ptr<SelfLetNode>> nodes;  // sorted by id

    // Pumps nodes and the broker until nothing moves. One broker delivery per
    // cycle keeps the global FIFO order observable between node pumps.
    void drain() {
        for (;;) {
            bool progressed = false;
            for (auto& node : nodes) progressed |= node->pump();
            if (broker.deliver_next()) progressed = true;
            if (!progressed) break;
        }
    }
};

} // namespace

MetricsReport run(const Scenario& scenario, const RunOptions& options) {
    MetricsReport report;
    report.scenario = scenario.name;
    report.seed = scenario.seed;
    report.duration = scenario.duration;
    report.counting_mode = scenario.counting_mode;
    report.policy_enabled = scenario.policy_enabled;

    Runtime rt;
    // Reserved for stochastic scenario extensions; nothing in the built-in
    // components draws from it, so equal seeds trivially replay.
    std::mt19937_64 rng(scenario.seed);
    (void)rng;

    SelfLetNode::TraceHook trace;
    if (options.record_trace || options.trace_sink) {
        trace = [&report, &rt, &options](const NodeId& node, const Event& e) {
            TraceEntry entry{rt.clock.tick, node, e};
            if (options.trace_sink) options.trace_sink(entry);
            if (options.record_trace) report.trace.push_back(std::move(entry));
        };
    }

    std::vector<NodeConfig> configs = scenario.nodes;
    std::sort(configs.begin(), configs.end(),
              [](const NodeConfig& a, const NodeConfig& b) { return a.id < b.id; });
    for (auto& config : configs) {
        if (!scenario.policy_enabled) config.rules.clear();
        rt.nodes.push_back(std::make_unique<SelfLetNode>(config, rt.broker, rt.clock, trace));
    }
    for (auto& node : rt.nodes) {
        SelfLetNode* raw = node.get();
        rt.broker.register_node(raw->id(), [raw](const Message& m) { raw->on_wire(m); });
        rt.broker.subscribe(raw->id(), topics::node_inbox(raw->id()));
        rt.broker.subscribe(raw->id(), topics::broadcast);
    }

    auto snapshot_series = [&](Tick after_ticks) {
        SeriesPoint point;
        point.tick = after_ticks;
        point.messages_total = rt.broker.metered(scenario.counting_mode);
        for (const auto& node : rt.nodes) point.goals[node->id()] = node->goals_executed();
        report.series.push_back(std::move(point));
    };
    snapshot_series(0);

    const auto& ads = scenario.advertisements;
    for (Tick tick = 0; tick < scenario.duration; ++tick) {
        rt.clock.tick = tick;
        for (auto& node : rt.nodes) node->begin_tick(tick);

        const bool ads_due = ads.mode == AdvertisementConfig::Mode::OneShot
                                 ? tick == 0
                                 : tick % ads.period == 0;
        if (ads_due) {
            for (auto& node : rt.nodes) node->advertise_services();
            rt.drain();
        }

        for (const auto& gen : scenario.generators) {
            if (tick % gen.period != 0) continue;
            for (auto& node : rt.nodes) {
                if (node->id() == gen.node) node->begin_goal(gen.service);
            }
        }
        rt.drain();

        snapshot_series(tick + 1);
    }

    report.total_messages = rt.broker.metered(scenario.counting_mode);
    for (std::size_t i = 1; i < report.series.size(); ++i) {
        if (report.series[i].messages_total > report.series[i - 1].messages_total)
            report.convergence_tick = report.series[i].tick - 1;  // the tick that produced it
    }
    for (const auto& node : rt.nodes) {
        if (node->has_blocked()) report.stalled = true;
        report.nodes.emplace(node->id(), node->snapshot());
    }
    if (rt.broker.pending() > 0) report.stalled = true;
    return report;
}

std::optional<ExportFormat> parse_export_format(const std::string& text) {
    if (text == "csv") return ExportFormat::Csv;
    if (text == "json") return ExportFormat::Json;
    return std::nullopt;
}

Json metrics_to_json(const MetricsReport& r) {
    Json j;
    j["scenario"] = r.scenario;
    j["seed"] = r.seed;
    j["duration"] = r.duration;
    j["counting_mode"] = to_string(r.counting_mode);
    j["policy"] = r.policy_enabled;
    j["total_messages"] = r.total_messages;
    if (r.convergence_tick) j["convergence_tick"] = *r.convergence_tick;
    else j["convergence_tick"] = nullptr;
    j["stalled"] = r.stalled;

    Json nodes;
    for (const auto& [id, snap] : r.nodes) {
        Json jn;
        jn["goals_executed"] = snap.goals_executed;
        jn["do_requests_answered"] = snap.do_requests_answered;
        jn["behaviors"] = snap.behaviors;
        jn["services"] = snap.services;
        jn["offer_modes"] = snap.offer_modes;
        jn["ask_modes"] = snap.ask_modes;
        Json firings;
        for (const auto& [rule, values] : snap.rule_firings) firings[rule] = values;
        jn["rule_firings"] = firings;
        Json actions = Json::array();
        for (const auto& action : snap.actions_applied)
            actions.push_back(Json{{"tick", action.tick}, {"action", action.description}});
        jn["actions_applied"] = actions;
        nodes[id.value] = std::move(jn);
    }
    j["nodes"] = nodes;

    Json series = Json::array();
    for (const auto& point : r.series) {
        Json jp;
        jp["tick"] = point.tick;
        jp["messages_total"] = point.messages_total;
        Json goals;
        for (const auto& [id, count] : point.goals) goals[id.value] = count;
        jp["goals"] = goals;
        series.push_back(std::move(jp));
    }
    j["series"] = series;
    return j;
}

MetricsReport metrics_from_json(const Json& j) {
    MetricsReport r;
    r.scenario = j.at("scenario").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.duration = j.at("duration").get<Tick>();
    auto mode = parse_counting_mode(j.at("counting_mode").get<std::string>());
    if (!mode) throw CodecError("bad counting_mode in metrics");
    r.counting_mode = *mode;
    r.policy_enabled = j.at("policy").get<bool>();
    r.total_messages = j.at("total_messages").get<std::uint64_t>();
    if (!j.at("convergence_tick").is_null())
        r.convergence_tick = j.at("convergence_tick").get<Tick>();
    r.stalled = j.at("stalled").get<bool>();

    for (auto it = j.at("nodes").begin(); it != j.at("nodes").end(); ++it) {
        NodeSnapshot snap;
        const Json& jn = it.value();
        snap.goals_executed = jn.at("goals_executed").get<std::uint64_t>();
        snap.do_requests_answered = jn.at("do_requests_answered").get<std::uint64_t>();
        snap.behaviors = jn.at("behaviors").get<std::vector<std::string>>();
        snap.services = jn.at("services").get<std::vector<std::string>>();
        snap.offer_modes = jn.at("offer_modes").get<std::map<std::string, std::string>>();
        snap.ask_modes = jn.at("ask_modes").get<std::map<std::string, std::string>>();
        for (auto fit = jn.at("rule_firings").begin(); fit != jn.at("rule_firings").end(); ++fit)
            snap.rule_firings[fit.key()] = fit.value().get<std::set<std::string>>();
        for (const auto& ja : jn.at("actions_applied"))
            snap.actions_applied.push_back(
                AppliedAction{ja.at("tick").get<Tick>(), ja.at("action").get<std::string>()});
        r.nodes.emplace(NodeId(it.key()), std::move(snap));
    }

    for (const auto& jp : j.at("series")) {
        SeriesPoint point;
        point.tick = jp.at("tick").get<Tick>();
        point.messages_total = jp.at("messages_total").get<std::uint64_t>();
        for (auto git = jp.at("goals").begin(); git != jp.at("goals").end(); ++git)
            point.goals[NodeId(git.key())] = git.value().get<std::uint64_t>();
        r.series.push_back(std::move(point));
    }
    return r;
}

std::string metrics_to_csv(const MetricsReport& r) {
    std::ostringstream out;
    out << "tick,messages_total";
    std::vector<NodeId> ids;
    for (const auto& [id, _] : r.nodes) ids.push_back(id);
    for (const auto& id : ids) out << ",goals_" << id.value;
    out << "\n";
    for (const auto& point : r.series) {
        out << point.tick << "," << point.messages_total;
        for (const auto& id : ids) {
            auto it = point.goals.find(id);
            out << "," << (it == point.goals.end() ? 0 : it->second);
        }
        out << "\n";
    }
    return out.str();
}

void export_metrics(const MetricsReport& r, ExportFormat format,
                    const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (format == ExportFormat::Json) out << metrics_to_json(r).dump(2) << "\n";
    else out << metrics_to_csv(r);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

bool reports_equal(const MetricsReport& a, const MetricsReport& b) {
    return metrics_to_json(a) == metrics_to_json(b);
}

} // namespace selflet
