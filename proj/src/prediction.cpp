#include "selflet/prediction.hpp"

#include "selflet/dispatcher.hpp"

namespace selflet {

bool PredictionModelDescriptor::self_feeding() const {
    for (const auto& produced : produces) {
        for (const auto& pattern : consumes) {
            if (Dispatcher::pattern_matches(pattern, produced)) return true;
        }
    }
    return false;
}

PredictionManager::PredictionManager(std::function<void(Event)> publish)
    : publish_(std::move(publish)) {}

std::string PredictionManager::register_model(PredictionModelDescriptor descriptor,
                                              std::unique_ptr<PredictionModel> model) {
    if (descriptor.model_name.empty()) return "model name must not be empty";
    if (models_.count(descriptor.model_name) != 0)
        return "model '" + descriptor.model_name + "' already registered";
    if (descriptor.consumes.empty()) return "descriptor consumes nothing";
    if (descriptor.self_feeding())
        return "descriptor produces an event kind it also consumes";
    if (!model) return "model implementation missing";
    auto name = descriptor.model_name;
    models_.emplace(std::move(name), Registered{std::move(descriptor), std::move(model), false});
    return "";
}

bool PredictionManager::quarantined(const std::string& name) const {
    auto it = models_.find(name);
    return it != models_.end() && it->second.quarantined;
}

std::vector<PredictionModelDescriptor> PredictionManager::descriptors() const {
    std::vector<PredictionModelDescriptor> out;
    for (const auto& [_, registered] : models_) out.push_back(registered.descriptor);
    return out;
}

void PredictionManager::route_event(const Event& e) {
    for (auto& [name, registered] : models_) {
        if (registered.quarantined) continue;
        bool interested = false;
        for (const auto& pattern : registered.descriptor.consumes) {
            if (Dispatcher::pattern_matches(pattern, e.kind)) {
                interested = true;
                break;
            }
        }
        if (!interested) continue;

        std::vector<Event> forecasts;
        try {
            forecasts = registered.model->on_event(e);
        } catch (const std::exception& ex) {
            registered.quarantined = true;
            Event diag;
            diag.kind = "diag.model_quarantined";
            diag.payload = {{"model", name}, {"reason", std::string(ex.what())}};
            diag.timestamp = e.timestamp;
            publish_(std::move(diag));
            continue;
        }

        // Descriptor soundness: an undeclared forecast kind quarantines the
        // model and drops the whole batch.
        bool sound = true;
        for (const auto& forecast : forecasts) {
            if (registered.descriptor.produces.count(forecast.kind) == 0) {
                sound = false;
                registered.quarantined = true;
                Event diag;
                diag.kind = "diag.model_quarantined";
                diag.payload = {{"model", name},
                                {"reason", "undeclared forecast kind " + forecast.kind}};
                diag.timestamp = e.timestamp;
                publish_(std::move(diag));
                break;
            }
        }
        if (!sound) continue;

        for (auto& forecast : forecasts) {
            if (forecast.source.empty()) forecast.source = name;
            forecast.timestamp = e.timestamp;
            publish_(forecast);
        }
    }
}

} // namespace selflet
