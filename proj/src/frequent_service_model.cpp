#include "selflet/frequent_service_model.hpp"

#include "selflet/event.hpp"

namespace selflet {

FrequentServiceModel::FrequentServiceModel(FrequentServiceModelConfig config)
    : config_(config), sketch_(config.capacity) {}

PredictionModelDescriptor FrequentServiceModel::descriptor_for(
    const FrequentServiceModelConfig& config) {
    PredictionModelDescriptor d;
    d.model_name = kFrequentServiceModelName;
    d.consumes = {config.direction == FrequentServiceModelConfig::Direction::Outgoing
                      ? events::service_request_out
                      : events::service_request_in};
    d.produces = {events::frequent_service, kBadEventDiagnostic};
    return d;
}

std::vector<Event> FrequentServiceModel::on_event(const Event& e) {
    std::vector<Event> out;

    auto service = payload_get(e.payload, "service");
    if (!service || !scalar_string(*service)) {
        Event diag;
        diag.kind = kBadEventDiagnostic;
        diag.payload = {{"reason", std::string("service key absent")}, {"kind", e.kind}};
        out.push_back(std::move(diag));
        return out;
    }
    if (!config_.observed_modes.empty()) {
        auto mode = payload_get(e.payload, "mode");
        if (!mode || config_.observed_modes.count(scalar_to_string(*mode)) == 0) return out;
    }

    sketch_.observe(*scalar_string(*service));

    for (const auto& item : frequent_items(sketch_, config_.thresholds, config_.count_mode)) {
        if (!announced_.insert(item.item).second) continue;  // one forecast per crossing
        Event forecast;
        forecast.kind = events::frequent_service;
        forecast.payload = {{"service", item.item},
                            {"support", item.support},
                            {"count", static_cast<std::int64_t>(item.count)}};
        out.push_back(std::move(forecast));
    }

    // Tumbling window: a full window resets the sketch and re-arms crossings.
    if (config_.window > 0 && sketch_.total() >= config_.window) {
        sketch_.reset();
        announced_.clear();
    }
    return out;
}

void FrequentServiceModel::reset() {
    sketch_.reset();
    announced_.clear();
}

} // namespace selflet
