#pragma once
// Scenario files: the JSON description of a simulation run — nodes with
// their services, behaviors, rules and prediction models, plus request
// generators, duration, seed and metering mode. Loading validates every
// cross-reference and reports defects with their location.

#include <filesystem>
#include <stdexcept>

#include "selflet/broker.hpp"
#include "selflet/json_codec.hpp"
#include "selflet/node.hpp"

namespace selflet {

struct GeneratorSpec {
    NodeId node;
    ServiceId service;
    Tick period = 1;  // fires at every tick divisible by period, starting at 0
};

struct AdvertisementConfig {
    enum class Mode { OneShot, Periodic };
    Mode mode = Mode::OneShot;
    Tick period = 1;  // Periodic only
};

struct Scenario {
    std::string name;
    Tick duration = 0;
    std::uint64_t seed = 0;
    CountingMode counting_mode = CountingMode::RequestsOnly;
    bool policy_enabled = true;  // installs node rule sets when true
    AdvertisementConfig advertisements;
    std::vector<NodeConfig> nodes;
    std::vector<GeneratorSpec> generators;
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parses and fully validates. Errors carry the offending location
// ("<source>: node S1: behavior b: ...").
Scenario parse_scenario(const Json& j, const std::string& source);
Scenario load_scenario(const std::filesystem::path& path);

Json scenario_to_json(const Scenario& s);

} // namespace selflet
