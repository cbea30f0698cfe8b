#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "selflet/simulator.hpp"

using namespace selflet;

namespace {

std::filesystem::path builtin_scenario() {
    return std::filesystem::path(SELFLET_SCENARIO_DIR) / "teach_propagation.json";
}

Scenario builtin(Tick duration) {
    Scenario s = load_scenario(builtin_scenario());
    s.duration = duration;
    return s;
}

Json minimal_scenario_json() {
    return Json::parse(R"({
        "name": "mini",
        "duration": 10,
        "nodes": [
            {
                "id": "P",
                "behaviors": [
                    {"id": "b", "initial": "done",
                     "states": [{"id": "done", "terminal": true}], "transitions": []}
                ],
                "services": [{"id": "SvcA", "behavior": "b", "offer_modes": "can_do"}],
                "advertise": ["SvcA"]
            },
            {"id": "Q"}
        ],
        "generators": [{"node": "Q", "service": "SvcA", "period": 2}]
    })");
}

} // namespace

TEST_CASE("the built-in scenario loads with two nodes and three services") {
    Scenario s = load_scenario(builtin_scenario());
    REQUIRE(s.nodes.size() == 2);
    CHECK(s.nodes[0].id == NodeId("S1"));
    CHECK(s.nodes[1].id == NodeId("S2"));
    CHECK(s.nodes[1].services.size() == 3);
    CHECK(s.counting_mode == CountingMode::RequestsOnly);
    CHECK(s.policy_enabled);
    REQUIRE(s.generators.size() == 1);
    CHECK(s.generators[0].period == 2);
}

TEST_CASE("a scenario referencing an unknown behavior names it in the error") {
    Json j = minimal_scenario_json();
    j["nodes"][0]["services"][0]["behavior"] = "ghost";
    try {
        parse_scenario(j, "mini.json");
        FAIL("expected a scenario error");
    } catch (const ScenarioError& e) {
        const std::string message = e.what();
        CHECK(message.find("ghost") != std::string::npos);
        CHECK(message.find("node P") != std::string::npos);
        CHECK(message.find("mini.json") != std::string::npos);
    }
}

TEST_CASE("an empty node list is a validation error") {
    Json j = minimal_scenario_json();
    j["nodes"] = Json::array();
    CHECK_THROWS_AS(parse_scenario(j, "mini.json"), ScenarioError);
}

TEST_CASE("generators must reference services offered somewhere") {
    Json j = minimal_scenario_json();
    j["generators"][0]["service"] = "SvcMissing";
    CHECK_THROWS_AS(parse_scenario(j, "mini.json"), ScenarioError);
}

TEST_CASE("zero duration yields zero goals and zero messages") {
    MetricsReport report = run(builtin(0));
    CHECK(report.total_messages == 0);
    for (const auto& [_, snap] : report.nodes) CHECK(snap.goals_executed == 0);
    REQUIRE(report.series.size() == 1);
    CHECK_FALSE(report.convergence_tick.has_value());
    CHECK_FALSE(report.stalled);
}

TEST_CASE("the csv export has duration + 1 rows plus a header") {
    MetricsReport report = run(builtin(40));
    std::string csv = metrics_to_csv(report);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "tick,messages_total,goals_S1,goals_S2");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 41);
}

TEST_CASE("exported json re-parses into an equal report") {
    MetricsReport report = run(builtin(60));
    Json j = metrics_to_json(report);
    MetricsReport round = metrics_from_json(Json::parse(j.dump()));
    CHECK(reports_equal(report, round));
}

TEST_CASE("equal seeds produce byte-identical exports") {
    Scenario s = builtin(120);
    auto a = metrics_to_json(run(s)).dump(2);
    auto b = metrics_to_json(run(s)).dump(2);
    CHECK(a == b);

    auto csv_a = metrics_to_csv(run(s));
    auto csv_b = metrics_to_csv(run(s));
    CHECK(csv_a == csv_b);
}

TEST_CASE("deliveries counting includes replies, queries and advertisements") {
    Scenario s = builtin(40);
    MetricsReport requests_only = run(s);
    s.counting_mode = CountingMode::Deliveries;
    MetricsReport deliveries = run(s);
    CHECK(deliveries.total_messages > requests_only.total_messages);
}

TEST_CASE("periodic advertisements keep refreshing the provider lists") {
    Json j = minimal_scenario_json();
    j["advertisements"] = Json{{"mode", "periodic"}, {"period", 3}};
    j["counting_mode"] = "deliveries";
    j["generators"] = Json::array();
    Scenario s = parse_scenario(j, "mini.json");
    s.duration = 9;
    MetricsReport report = run(s);
    // Ads at ticks 0, 3 and 6, one delivery each.
    CHECK(report.total_messages == 3);
}

TEST_CASE("goals at the provider cover every do request it answered") {
    MetricsReport report = run(builtin(200));
    const NodeSnapshot& s2 = report.nodes.at(NodeId("S2"));
    CHECK(s2.goals_executed >= s2.do_requests_answered);
    CHECK(s2.do_requests_answered > 0);
}

TEST_CASE("a run that cannot resolve a need is flagged as stalled") {
    Json j = minimal_scenario_json();
    // The provider can only teach; the generator's do asks can never finish.
    j["nodes"][0]["services"][0]["offer_modes"] = "can_teach";
    Scenario s = parse_scenario(j, "mini.json");
    s.duration = 6;
    MetricsReport report = run(s);
    CHECK(report.stalled);
    CHECK(report.nodes.at(NodeId("Q")).goals_executed == 0);
}

TEST_CASE("runaway self-recursion is bounded and flagged, not fatal") {
    Json j = Json::parse(R"({
        "name": "recursive",
        "duration": 2,
        "nodes": [
            {
                "id": "R",
                "behaviors": [
                    {"id": "self_call", "initial": "again",
                     "states": [{"id": "again", "action": {"invoke_service": "Loop"}},
                                {"id": "done", "terminal": true}],
                     "transitions": [{"from": "again", "to": "done"}]}
                ],
                "services": [{"id": "Loop", "behavior": "self_call", "offer_modes": "can_do"}]
            }
        ],
        "generators": [{"node": "R", "service": "Loop", "period": 1}]
    })");
    Scenario s = parse_scenario(j, "recursive.json");
    MetricsReport report = run(s);
    CHECK(report.stalled);
    CHECK(report.nodes.at(NodeId("R")).goals_executed == 0);
}

TEST_CASE("main behaviors iterate on their restart delay") {
    Json j = Json::parse(R"({
        "name": "main_loop",
        "duration": 10,
        "nodes": [
            {
                "id": "M",
                "behaviors": [
                    {"id": "beat", "initial": "done",
                     "states": [{"id": "done", "terminal": true}], "transitions": []}
                ],
                "main": {"behavior": "beat", "restart_delay": 3}
            }
        ]
    })");
    Scenario s = parse_scenario(j, "main_loop.json");
    MetricsReport report = run(s);
    // Iterations complete at ticks 0, 3, 6, 9.
    CHECK(report.nodes.at(NodeId("M")).goals_executed == 4);
    CHECK(report.total_messages == 0);
}

TEST_CASE("the recorded trace attributes outgoing requests to goals") {
    RunOptions options;
    options.record_trace = true;
    MetricsReport report = run(builtin(20), options);
    REQUIRE_FALSE(report.trace.empty());
    int attributed = 0;
    for (const auto& entry : report.trace) {
        if (entry.event.kind != events::service_request_out) continue;
        if (payload_get(entry.event.payload, "goal")) ++attributed;
    }
    CHECK(attributed > 0);
}

TEST_CASE("the trace sink streams entries as they happen") {
    RunOptions options;
    std::vector<Tick> ticks;
    options.trace_sink = [&](const TraceEntry& entry) { ticks.push_back(entry.tick); };
    run(builtin(10), options);
    REQUIRE_FALSE(ticks.empty());
    CHECK(std::is_sorted(ticks.begin(), ticks.end()));
}

TEST_CASE("export_metrics writes files and rejects unwritable paths") {
    MetricsReport report = run(builtin(10));
    auto dir = std::filesystem::temp_directory_path() / "selflet_sim_test";
    std::filesystem::create_directories(dir);
    export_metrics(report, ExportFormat::Json, dir / "m.json");
    export_metrics(report, ExportFormat::Csv, dir / "m.csv");
    std::ifstream json_in(dir / "m.json");
    Json parsed = Json::parse(json_in);
    CHECK(reports_equal(report, metrics_from_json(parsed)));
    CHECK_THROWS_AS(export_metrics(report, ExportFormat::Json, dir / "nope" / "m.json"),
                    std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("every shipped behavior validates, and none survives losing its initial state") {
    Scenario s = load_scenario(builtin_scenario());
    int checked = 0;
    for (const auto& node : s.nodes) {
        for (const auto& behavior : node.behaviors) {
            CHECK(validate_behavior(behavior).ok());
            Behavior mutilated = behavior;
            std::erase_if(mutilated.states,
                          [&](const State& st) { return st.id == mutilated.initial; });
            CHECK_FALSE(validate_behavior(mutilated).ok());
            ++checked;
        }
    }
    CHECK(checked == 3);
}

TEST_CASE("scenario round-trips through its json form") {
    Scenario s = load_scenario(builtin_scenario());
    Scenario round = parse_scenario(scenario_to_json(s), "round.json");
    CHECK(round.name == s.name);
    CHECK(round.duration == s.duration);
    CHECK(round.counting_mode == s.counting_mode);
    REQUIRE(round.nodes.size() == s.nodes.size());
    CHECK(round.nodes[1].behaviors == s.nodes[1].behaviors);
    CHECK(round.nodes[1].services == s.nodes[1].services);
    CHECK(round.generators.size() == s.generators.size());
}
