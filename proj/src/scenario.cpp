#include "selflet/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace selflet {

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& where,
                       const std::string& what) {
    std::ostringstream out;
    out << source;
    if (!where.empty()) out << ": " << where;
    out << ": " << what;
    throw ScenarioError(out.str());
}

FrequentServiceModelConfig model_config_from_json(const Json& j, const std::string& source,
                                                  const std::string& where) {
    const std::string model = j.value("model", std::string(kFrequentServiceModelName));
    if (model != kFrequentServiceModelName)
        fail(source, where, "unknown prediction model '" + model + "'");
    FrequentServiceModelConfig config;
    if (j.contains("minimum_occurrences"))
        config.thresholds.minimum_occurrences = j.at("minimum_occurrences").get<std::uint64_t>();
    if (j.contains("frequency_threshold"))
        config.thresholds.frequency_threshold = j.at("frequency_threshold").get<double>();
    if (j.contains("capacity")) config.capacity = j.at("capacity").get<std::size_t>();
    if (j.contains("window")) config.window = j.at("window").get<std::uint64_t>();
    if (j.contains("count_mode")) {
        const std::string mode = j.at("count_mode").get<std::string>();
        if (mode == "guaranteed") config.count_mode = SketchCountMode::Guaranteed;
        else if (mode == "raw") config.count_mode = SketchCountMode::Raw;
        else fail(source, where, "count_mode must be 'guaranteed' or 'raw'");
    }
    if (j.contains("observed_modes")) {
        config.observed_modes.clear();
        for (const auto& m : j.at("observed_modes"))
            config.observed_modes.insert(m.get<std::string>());
    }
    if (j.contains("direction")) {
        const std::string direction = j.at("direction").get<std::string>();
        if (direction == "outgoing")
            config.direction = FrequentServiceModelConfig::Direction::Outgoing;
        else if (direction == "incoming")
            config.direction = FrequentServiceModelConfig::Direction::Incoming;
        else fail(source, where, "direction must be 'outgoing' or 'incoming'");
    }
    if (config.thresholds.minimum_occurrences == 0)
        fail(source, where, "minimum_occurrences must be positive");
    if (config.thresholds.frequency_threshold <= 0.0 || config.thresholds.frequency_threshold > 1.0)
        fail(source, where, "frequency_threshold must be in (0, 1]");
    if (config.capacity == 0) fail(source, where, "capacity must be positive");
    return config;
}

NodeConfig node_from_json(const Json& j, const std::string& source) {
    NodeConfig node;
    if (!j.contains("id") || !j.at("id").is_string() || j.at("id").get<std::string>().empty())
        fail(source, "nodes", "every node needs a non-empty id");
    node.id = NodeId(j.at("id").get<std::string>());
    const std::string where = "node " + node.id.value;

    try {
        if (j.contains("behaviors"))
            for (const auto& jb : j.at("behaviors")) node.behaviors.push_back(behavior_from_json(jb));
        if (j.contains("services"))
            for (const auto& js : j.at("services")) node.services.push_back(service_from_json(js));
        if (j.contains("rules"))
            for (const auto& jr : j.at("rules")) node.rules.push_back(rule_from_json(jr));
    } catch (const CodecError& e) {
        fail(source, where, e.what());
    }

    if (j.contains("prediction_models")) {
        for (const auto& jm : j.at("prediction_models"))
            node.prediction_models.push_back(model_config_from_json(jm, source, where));
    }
    if (j.contains("ask_modes")) {
        for (auto it = j.at("ask_modes").begin(); it != j.at("ask_modes").end(); ++it) {
            auto mode = parse_ask_mode(it.value().get<std::string>());
            if (!mode) fail(source, where, "bad ask mode for service '" + it.key() + "'");
            node.ask_mode_defaults[ServiceId(it.key())] = *mode;
        }
    }
    if (j.contains("advertise"))
        for (const auto& ja : j.at("advertise")) node.advertise.emplace_back(ja.get<std::string>());
    if (j.contains("advertise_learned")) node.advertise_learned = j.at("advertise_learned").get<bool>();
    if (j.contains("provider_expiry")) node.provider_expiry = j.at("provider_expiry").get<Tick>();
    if (j.contains("providers")) {
        for (const auto& jp : j.at("providers")) {
            ProviderPreload preload;
            preload.service = ServiceId(jp.at("service").get<std::string>());
            preload.node = NodeId(jp.at("node").get<std::string>());
            auto modes = parse_offer_modes(jp.at("modes").get<std::string>());
            if (!modes) fail(source, where, "bad provider modes");
            preload.modes = *modes;
            node.providers.push_back(std::move(preload));
        }
    }
    if (j.contains("main")) {
        MainBehaviorSpec main;
        main.behavior = j.at("main").at("behavior").get<std::string>();
        if (j.at("main").contains("restart_delay"))
            main.restart_delay = j.at("main").at("restart_delay").get<Tick>();
        if (main.restart_delay < 1)
            fail(source, where, "main restart_delay must be at least 1 tick");
        node.main_behavior = std::move(main);
    }
    return node;
}

void validate(const Scenario& s, const std::string& source) {
    if (s.nodes.empty()) fail(source, "", "node list is empty");
    if (s.duration < 0) fail(source, "", "duration must be non-negative");

    std::set<NodeId> ids;
    std::set<ServiceId> offered_anywhere;
    for (const auto& node : s.nodes) {
        const std::string where = "node " + node.id.value;
        if (!ids.insert(node.id).second) fail(source, where, "duplicate node id");

        std::set<std::string> behavior_ids;
        for (const auto& behavior : node.behaviors) {
            ValidationResult result = validate_behavior(behavior);
            if (!result.ok())
                fail(source, where + ": behavior " + behavior.id, result.joined());
            if (!behavior_ids.insert(behavior.id).second)
                fail(source, where, "duplicate behavior id " + behavior.id);
        }
        std::set<ServiceId> service_ids;
        for (const auto& service : node.services) {
            if (service.id.empty()) fail(source, where, "service with empty id");
            if (!service_ids.insert(service.id).second)
                fail(source, where, "duplicate service " + service.id.name);
            if ((service.offer_modes.can_do || service.offer_modes.can_teach) &&
                behavior_ids.count(service.behavior) == 0)
                fail(source, where + ": service " + service.id.name,
                     "behavior '" + service.behavior + "' not found");
            offered_anywhere.insert(service.id);
        }
        std::set<std::string> rule_names;
        for (const auto& rule : node.rules) {
            if (rule.name.empty()) fail(source, where, "rule with empty name");
            if (!rule_names.insert(rule.name).second)
                fail(source, where, "duplicate rule " + rule.name);
            if (rule.actions.empty())
                fail(source, where + ": rule " + rule.name, "actions must not be empty");
            if (rule.trigger.empty())
                fail(source, where + ": rule " + rule.name, "trigger must not be empty");
        }
        for (const auto& advertised : node.advertise) {
            if (service_ids.count(advertised) == 0)
                fail(source, where, "advertised service '" + advertised.name + "' not offered");
        }
        if (node.main_behavior && behavior_ids.count(node.main_behavior->behavior) == 0)
            fail(source, where, "main behavior '" + node.main_behavior->behavior + "' not found");
    }

    std::size_t index = 0;
    for (const auto& gen : s.generators) {
        const std::string where = "generator " + std::to_string(index++);
        if (ids.count(gen.node) == 0)
            fail(source, where, "unknown node '" + gen.node.value + "'");
        if (gen.period < 1) fail(source, where, "period must be at least 1 tick");
        if (offered_anywhere.count(gen.service) == 0)
            fail(source, where, "service '" + gen.service.name + "' offered by no node");
    }
}

} // namespace

Scenario parse_scenario(const Json& j, const std::string& source) {
    Scenario s;
    try {
        s.name = j.value("name", std::string("scenario"));
        s.duration = j.value("duration", Tick{0});
        s.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("counting_mode")) {
            auto mode = parse_counting_mode(j.at("counting_mode").get<std::string>());
            if (!mode) fail(source, "", "counting_mode must be 'requests_only' or 'deliveries'");
            s.counting_mode = *mode;
        }
        if (j.contains("policy")) s.policy_enabled = j.at("policy").get<bool>();
        if (j.contains("advertisements")) {
            const Json& ja = j.at("advertisements");
            const std::string mode = ja.value("mode", std::string("one_shot"));
            if (mode == "one_shot") {
                s.advertisements.mode = AdvertisementConfig::Mode::OneShot;
            } else if (mode == "periodic") {
                s.advertisements.mode = AdvertisementConfig::Mode::Periodic;
                s.advertisements.period = ja.value("period", Tick{1});
                if (s.advertisements.period < 1)
                    fail(source, "", "advertisement period must be at least 1 tick");
            } else {
                fail(source, "", "advertisement mode must be 'one_shot' or 'periodic'");
            }
        }
        if (!j.contains("nodes")) fail(source, "", "node list is empty");
        for (const auto& jn : j.at("nodes")) s.nodes.push_back(node_from_json(jn, source));
        if (j.contains("generators")) {
            for (const auto& jg : j.at("generators")) {
                GeneratorSpec gen;
                gen.node = NodeId(jg.at("node").get<std::string>());
                gen.service = ServiceId(jg.at("service").get<std::string>());
                gen.period = jg.value("period", Tick{1});
                s.generators.push_back(std::move(gen));
            }
        }
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception& e) {
        fail(source, "", e.what());
    }
    validate(s, source);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(path.string() + ": cannot open file");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const std::exception& e) {
        throw ScenarioError(path.string() + ": " + e.what());
    }
    return parse_scenario(j, path.filename().string());
}

Json scenario_to_json(const Scenario& s) {
    Json j;
    j["name"] = s.name;
    j["duration"] = s.duration;
    j["seed"] = s.seed;
    j["counting_mode"] = to_string(s.counting_mode);
    j["policy"] = s.policy_enabled;
    Json ads;
    if (s.advertisements.mode == AdvertisementConfig::Mode::OneShot) {
        ads["mode"] = "one_shot";
    } else {
        ads["mode"] = "periodic";
        ads["period"] = s.advertisements.period;
    }
    j["advertisements"] = ads;

    Json nodes = Json::array();
    for (const auto& node : s.nodes) {
        Json jn;
        jn["id"] = node.id.value;
        Json behaviors = Json::array();
        for (const auto& b : node.behaviors) behaviors.push_back(behavior_to_json(b));
        jn["behaviors"] = behaviors;
        Json services = Json::array();
        for (const auto& svc : node.services) services.push_back(service_to_json(svc));
        jn["services"] = services;
        Json rules = Json::array();
        for (const auto& r : node.rules) rules.push_back(rule_to_json(r));
        jn["rules"] = rules;
        Json models = Json::array();
        for (const auto& m : node.prediction_models) {
            Json jm;
            jm["model"] = kFrequentServiceModelName;
            jm["minimum_occurrences"] = m.thresholds.minimum_occurrences;
            jm["frequency_threshold"] = m.thresholds.frequency_threshold;
            jm["capacity"] = m.capacity;
            jm["window"] = m.window;
            jm["count_mode"] = m.count_mode == SketchCountMode::Guaranteed ? "guaranteed" : "raw";
            jm["observed_modes"] = m.observed_modes;
            jm["direction"] = m.direction == FrequentServiceModelConfig::Direction::Outgoing
                                  ? "outgoing"
                                  : "incoming";
            models.push_back(std::move(jm));
        }
        jn["prediction_models"] = models;
        if (!node.ask_mode_defaults.empty()) {
            Json modes;
            for (const auto& [service, mode] : node.ask_mode_defaults)
                modes[service.name] = to_string(mode);
            jn["ask_modes"] = modes;
        }
        Json advertise = Json::array();
        for (const auto& advertised : node.advertise) advertise.push_back(advertised.name);
        jn["advertise"] = advertise;
        if (node.advertise_learned) jn["advertise_learned"] = true;
        if (node.provider_expiry) jn["provider_expiry"] = *node.provider_expiry;
        if (!node.providers.empty()) {
            Json preloads = Json::array();
            for (const auto& p : node.providers)
                preloads.push_back(Json{{"service", p.service.name},
                                        {"node", p.node.value},
                                        {"modes", to_string(p.modes)}});
            jn["providers"] = preloads;
        }
        if (node.main_behavior)
            jn["main"] = Json{{"behavior", node.main_behavior->behavior},
                              {"restart_delay", node.main_behavior->restart_delay}};
        nodes.push_back(std::move(jn));
    }
    j["nodes"] = nodes;

    Json generators = Json::array();
    for (const auto& gen : s.generators) {
        generators.push_back(Json{{"node", gen.node.value},
                                  {"service", gen.service.name},
                                  {"period", gen.period}});
    }
    j["generators"] = generators;
    return j;
}

} // namespace selflet
