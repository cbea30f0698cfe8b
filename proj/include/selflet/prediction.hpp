#pragma once
// Prediction manager and the plugin contract for prediction models. Models
// declare consumed and produced event kinds in a descriptor; the manager
// routes matching events in and publishes returned forecasts. A model that
// throws or emits an undeclared kind is quarantined.

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "selflet/event.hpp"

namespace selflet {

struct PredictionModelDescriptor {
    std::string model_name;
    std::set<std::string> consumes;  // event-kind patterns (exact or prefix wildcard)
    std::set<std::string> produces;  // exact event kinds

    // No self-feedback: no produced kind may match a consumed pattern.
    bool self_feeding() const;
};

class PredictionModel {
public:
    virtual ~PredictionModel() = default;
    // Returns forecast events; kinds must come from the descriptor's produces.
    virtual std::vector<Event> on_event(const Event& e) = 0;
    virtual void reset() = 0;
};

class PredictionManager {
public:
    explicit PredictionManager(std::function<void(Event)> publish);

    // Empty string on success, else the rejection reason. The caller wires
    // dispatcher subscriptions for the descriptor's consumes patterns.
    std::string register_model(PredictionModelDescriptor descriptor,
                               std::unique_ptr<PredictionModel> model);

    // Forwards the event to every interested model and publishes the
    // forecasts it returns.
    void route_event(const Event& e);

    bool has_model(const std::string& name) const { return models_.count(name) != 0; }
    bool quarantined(const std::string& name) const;
    std::vector<PredictionModelDescriptor> descriptors() const;

private:
    struct Registered {
        PredictionModelDescriptor descriptor;
        std::unique_ptr<PredictionModel> model;
        bool quarantined = false;
    };

    std::function<void(Event)> publish_;
    std::map<std::string, Registered> models_;
};

} // namespace selflet
