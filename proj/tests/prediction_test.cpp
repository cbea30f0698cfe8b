#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>

#include "selflet/frequent_service_model.hpp"
#include "selflet/prediction.hpp"

using namespace selflet;

namespace {

Event request_out(const std::string& service, const std::string& mode = "do") {
    Event e;
    e.kind = events::service_request_out;
    e.payload = {{"service", service}, {"mode", mode}, {"invocation", std::int64_t{1}}};
    return e;
}

} // namespace

// --- space-saving sketch -------------------------------------------------------

TEST_CASE("a single observation creates an exact counter") {
    SpaceSavingSketch sketch(2);
    sketch.observe("A");
    CHECK(sketch.total() == 1);
    REQUIRE(sketch.counters().size() == 1);
    CHECK(sketch.counters()[0].item == "A");
    CHECK(sketch.counters()[0].count == 1);
    CHECK(sketch.counters()[0].error == 0);
}

TEST_CASE("overflow evicts the minimum counter and inherits its count") {
    // m=2, stream [A, B, C]: C replaces a minimum entry with count 2, error 1.
    SpaceSavingSketch sketch(2);
    sketch.observe("A");
    sketch.observe("B");
    sketch.observe("C");
    CHECK(sketch.total() == 3);
    REQUIRE(sketch.counters().size() == 2);

    auto c = sketch.lookup("C");
    REQUIRE(c.has_value());
    CHECK(c->count == 2);
    CHECK(c->error == 1);
    // The fixed tie rule evicts the lexicographically smallest minimum, so B
    // is the survivor.
    auto b = sketch.lookup("B");
    REQUIRE(b.has_value());
    CHECK(b->count == 1);
    CHECK(b->error == 0);
    CHECK_FALSE(sketch.lookup("A").has_value());
}

TEST_CASE("with capacity above the alphabet all counts are exact") {
    std::mt19937 rng(99);
    SpaceSavingSketch sketch(16);
    std::map<std::string, std::uint64_t> exact;
    for (int i = 0; i < 5000; ++i) {
        std::string item = "svc" + std::to_string(rng() % 9);
        sketch.observe(item);
        ++exact[item];
    }
    for (const auto& c : sketch.counters()) {
        CHECK(c.error == 0);
        CHECK(c.count == exact[c.item]);
    }
}

TEST_CASE("overestimate and error bounds hold on adversarial-ish streams") {
    std::mt19937 rng(7);
    for (std::size_t m : {4u, 8u}) {
        SpaceSavingSketch sketch(m);
        std::map<std::string, std::uint64_t> exact;
        // Skewed stream: a few heavy items plus a long uniform tail.
        for (int i = 0; i < 4000; ++i) {
            std::string item = (rng() % 3 == 0) ? "heavy" + std::to_string(rng() % 2)
                                                : "tail" + std::to_string(rng() % 40);
            sketch.observe(item);
            ++exact[item];
        }
        const std::uint64_t n = sketch.total();
        for (const auto& c : sketch.counters()) {
            const std::uint64_t true_count = exact[c.item];
            CHECK(true_count <= c.count);
            CHECK(c.count - c.error <= true_count);
            CHECK(c.error <= (n + m - 1) / m);
        }
    }
}

TEST_CASE("frequent_items applies both thresholds on guaranteed counts") {
    SpaceSavingSketch sketch(16);
    for (int i = 0; i < 6; ++i) sketch.observe("Service 1");
    for (int i = 0; i < 4; ++i) sketch.observe("svc" + std::to_string(i));
    REQUIRE(sketch.total() == 10);

    auto hits = frequent_items(sketch, FrequencyThresholds{5, 0.5});
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].item == "Service 1");
    CHECK(hits[0].count == 6);
    CHECK(hits[0].support == doctest::Approx(0.6));

    CHECK(frequent_items(sketch, FrequencyThresholds{7, 0.5}).empty());
    CHECK(frequent_items(SpaceSavingSketch(4), FrequencyThresholds{1, 0.1}).empty());
}

TEST_CASE("frequent_items sorts by count descending then item ascending") {
    SpaceSavingSketch sketch(8);
    for (int i = 0; i < 3; ++i) sketch.observe("b");
    for (int i = 0; i < 3; ++i) sketch.observe("a");
    for (int i = 0; i < 4; ++i) sketch.observe("c");
    auto hits = frequent_items(sketch, FrequencyThresholds{1, 0.01});
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].item == "c");
    CHECK(hits[1].item == "a");
    CHECK(hits[2].item == "b");
}

TEST_CASE("raw counting mode reports the overestimate") {
    SpaceSavingSketch sketch(1);
    sketch.observe("A");
    sketch.observe("B");  // B inherits count 1 -> (B, 2, 1)
    auto raw = frequent_items(sketch, FrequencyThresholds{2, 0.5}, SketchCountMode::Raw);
    REQUIRE(raw.size() == 1);
    CHECK(raw[0].count == 2);
    CHECK(frequent_items(sketch, FrequencyThresholds{2, 0.5}, SketchCountMode::Guaranteed).empty());
}

// --- built-in frequent-service model ----------------------------------------------

TEST_CASE("five consecutive requests trigger one forecast at the fifth") {
    FrequentServiceModelConfig config;
    config.thresholds = {5, 0.5};
    FrequentServiceModel model(config);

    for (int i = 0; i < 4; ++i) CHECK(model.on_event(request_out("Service 1")).empty());
    auto forecasts = model.on_event(request_out("Service 1"));
    REQUIRE(forecasts.size() == 1);
    CHECK(forecasts[0].kind == events::frequent_service);
    CHECK(scalar_to_string(*payload_get(forecasts[0].payload, "service")) == "Service 1");
    CHECK(*scalar_number(*payload_get(forecasts[0].payload, "support")) == doctest::Approx(1.0));
    CHECK(*scalar_int(*payload_get(forecasts[0].payload, "count")) == 5);

    // The sixth identical request does not repeat the announcement.
    CHECK(model.on_event(request_out("Service 1")).empty());
}

TEST_CASE("alternating requests never reach a 0.6 support threshold") {
    FrequentServiceModelConfig config;
    config.thresholds = {5, 0.6};
    FrequentServiceModel model(config);
    for (int i = 0; i < 200; ++i) {
        auto out = model.on_event(request_out(i % 2 == 0 ? "A" : "B"));
        CHECK(out.empty());
    }
}

TEST_CASE("a payload without a service id is ignored with a diagnostic") {
    FrequentServiceModel model(FrequentServiceModelConfig{});
    Event e;
    e.kind = events::service_request_out;
    auto out = model.on_event(e);
    REQUIRE(out.size() == 1);
    CHECK(out[0].kind == kBadEventDiagnostic);
    CHECK(model.sketch().total() == 0);
}

TEST_CASE("acquisition asks are filtered out by the observed-modes default") {
    FrequentServiceModelConfig config;
    config.thresholds = {2, 0.1};
    FrequentServiceModel model(config);
    model.on_event(request_out("Service 1", "teach"));
    model.on_event(request_out("Service 1", "teach"));
    CHECK(model.sketch().total() == 0);

    FrequentServiceModelConfig all;
    all.thresholds = {2, 0.1};
    all.observed_modes.clear();  // count everything
    FrequentServiceModel unfiltered(all);
    unfiltered.on_event(request_out("Service 1", "teach"));
    auto out = unfiltered.on_event(request_out("Service 1", "teach"));
    CHECK(out.size() == 1);
}

TEST_CASE("a tumbling window resets counts and re-arms announcements") {
    FrequentServiceModelConfig config;
    config.thresholds = {3, 0.5};
    config.window = 5;
    FrequentServiceModel model(config);

    int forecasts = 0;
    for (int i = 0; i < 10; ++i) forecasts += model.on_event(request_out("A")).size();
    // Two full windows, one crossing each.
    CHECK(forecasts == 2);
    CHECK(model.sketch().total() == 0);  // reset right at each boundary
}

TEST_CASE("whole-history mode never re-arms") {
    FrequentServiceModelConfig config;
    config.thresholds = {3, 0.5};
    FrequentServiceModel model(config);
    int forecasts = 0;
    for (int i = 0; i < 50; ++i) forecasts += model.on_event(request_out("A")).size();
    CHECK(forecasts == 1);
}

TEST_CASE("the model descriptor follows the configured direction") {
    FrequentServiceModelConfig outgoing;
    auto d_out = FrequentServiceModel::descriptor_for(outgoing);
    CHECK(d_out.consumes == std::set<std::string>{events::service_request_out});
    CHECK(d_out.produces.count(events::frequent_service) == 1);
    CHECK_FALSE(d_out.self_feeding());

    FrequentServiceModelConfig incoming;
    incoming.direction = FrequentServiceModelConfig::Direction::Incoming;
    auto d_in = FrequentServiceModel::descriptor_for(incoming);
    CHECK(d_in.consumes == std::set<std::string>{events::service_request_in});
}

// --- prediction manager -------------------------------------------------------------

namespace {

struct ScriptedModel : PredictionModel {
    std::vector<Event> next;
    bool throw_on_event = false;
    int seen = 0;

    std::vector<Event> on_event(const Event&) override {
        ++seen;
        if (throw_on_event) throw std::runtime_error("scripted failure");
        return next;
    }
    void reset() override {}
};

PredictionModelDescriptor descriptor(const std::string& name,
                                     std::set<std::string> consumes,
                                     std::set<std::string> produces) {
    return PredictionModelDescriptor{name, std::move(consumes), std::move(produces)};
}

} // namespace

TEST_CASE("registration enforces the descriptor invariants") {
    PredictionManager pm([](Event) {});
    CHECK(pm.register_model(descriptor("m", {events::service_request_out},
                                       {events::frequent_service}),
                            std::make_unique<ScriptedModel>()) == "");
    // Duplicate name.
    CHECK(pm.register_model(descriptor("m", {"x"}, {"y"}),
                            std::make_unique<ScriptedModel>()) != "");
    // consumes and produces overlap: a self-feedback loop.
    CHECK(pm.register_model(descriptor("loop", {"x"}, {"x"}),
                            std::make_unique<ScriptedModel>()) != "");
    CHECK(pm.register_model(descriptor("loop2", {"pred.*"}, {"pred.cpu"}),
                            std::make_unique<ScriptedModel>()) != "");
}

TEST_CASE("events route only to interested models and forecasts are published") {
    std::vector<Event> published;
    PredictionManager pm([&](Event e) { published.push_back(std::move(e)); });

    auto interested = std::make_unique<ScriptedModel>();
    Event forecast;
    forecast.kind = events::frequent_service;
    interested->next = {forecast};
    ScriptedModel* interested_raw = interested.get();
    pm.register_model(descriptor("a", {events::service_request_out}, {events::frequent_service}),
                      std::move(interested));

    auto bystander = std::make_unique<ScriptedModel>();
    ScriptedModel* bystander_raw = bystander.get();
    pm.register_model(descriptor("b", {"other_kind"}, {"b.out"}), std::move(bystander));

    pm.route_event(request_out("Service 1"));
    CHECK(interested_raw->seen == 1);
    CHECK(bystander_raw->seen == 0);
    REQUIRE(published.size() == 1);
    CHECK(published[0].kind == events::frequent_service);
    CHECK(published[0].source == "a");
}

TEST_CASE("a throwing model is quarantined without hurting the others") {
    std::vector<Event> published;
    PredictionManager pm([&](Event e) { published.push_back(std::move(e)); });

    auto faulty = std::make_unique<ScriptedModel>();
    faulty->throw_on_event = true;
    pm.register_model(descriptor("faulty", {events::service_request_out}, {"f.out"}),
                      std::move(faulty));

    auto healthy = std::make_unique<ScriptedModel>();
    Event ok;
    ok.kind = events::frequent_service;
    healthy->next = {ok};
    ScriptedModel* healthy_raw = healthy.get();
    pm.register_model(descriptor("healthy", {events::service_request_out},
                                 {events::frequent_service}),
                      std::move(healthy));

    pm.route_event(request_out("Service 1"));
    CHECK(pm.quarantined("faulty"));
    CHECK_FALSE(pm.quarantined("healthy"));
    CHECK(healthy_raw->seen == 1);

    pm.route_event(request_out("Service 1"));
    CHECK(healthy_raw->seen == 2);
    int diags = 0, forecasts = 0;
    for (const auto& e : published) {
        if (e.kind == "diag.model_quarantined") ++diags;
        if (e.kind == events::frequent_service) ++forecasts;
    }
    CHECK(diags == 1);  // quarantined once, then never routed to again
    CHECK(forecasts == 2);
}

TEST_CASE("a model emitting an undeclared kind is quarantined") {
    std::vector<Event> published;
    PredictionManager pm([&](Event e) { published.push_back(std::move(e)); });

    auto misbehaving = std::make_unique<ScriptedModel>();
    Event rogue;
    rogue.kind = "undeclared.kind";
    misbehaving->next = {rogue};
    pm.register_model(descriptor("rogue", {events::service_request_out}, {"declared.kind"}),
                      std::move(misbehaving));

    pm.route_event(request_out("Service 1"));
    CHECK(pm.quarantined("rogue"));
    // The rogue forecast itself was dropped.
    for (const auto& e : published) CHECK(e.kind != "undeclared.kind");
}
