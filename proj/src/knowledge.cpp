#include "selflet/knowledge.hpp"

#include <algorithm>

namespace selflet {

std::optional<Scalar> KnowledgeBase::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::shared_ptr<const Behavior> BehaviorRepository::get(const std::string& id) const {
    auto it = behaviors_.find(id);
    if (it == behaviors_.end()) return nullptr;
    return it->second;
}

void BehaviorRepository::put(Behavior b) {
    auto id = b.id;
    behaviors_[id] = std::make_shared<const Behavior>(std::move(b));
}

std::vector<std::string> BehaviorRepository::ids() const {
    std::vector<std::string> out;
    out.reserve(behaviors_.size());
    for (const auto& [id, _] : behaviors_) out.push_back(id);
    return out;
}

const Service* ServiceRepository::get(const ServiceId& id) const {
    auto it = services_.find(id);
    if (it == services_.end()) return nullptr;
    return &it->second;
}

void ProviderList::update(const ServiceId& service, const NodeId& node, OfferModeSet modes,
                          Tick tick) {
    if (node == self_) return;
    auto& entries = by_service_[service];
    for (auto& entry : entries) {
        if (entry.node == node) {
            entry.modes = modes;
            entry.last_seen = tick;
            return;
        }
    }
    entries.push_back(ProviderEntry{node, modes, tick});
}

void ProviderList::demote(const ServiceId& service, const NodeId& node) {
    auto it = by_service_.find(service);
    if (it == by_service_.end()) return;
    for (auto& entry : it->second) {
        if (entry.node == node) entry.last_seen = 0;
    }
}

const std::vector<ProviderEntry>& ProviderList::entries(const ServiceId& service) const {
    static const std::vector<ProviderEntry> kEmpty;
    auto it = by_service_.find(service);
    return it == by_service_.end() ? kEmpty : it->second;
}

KnowledgeState::KnowledgeState(NodeId self, std::function<void(Event)> emit)
    : self_(std::move(self)), emit_(std::move(emit)), providers_(self_) {}

ValidationResult KnowledgeState::install_service(const Service& service, const Behavior& behavior) {
    ValidationResult result = validate_behavior(behavior);
    if (service.id.empty()) result.defects.insert(result.defects.begin(), "service id is empty");
    if (service.behavior != behavior.id)
        result.defects.push_back("service references behavior '" + service.behavior +
                                 "' but got '" + behavior.id + "'");
    if (!result.ok()) return result;

    behaviors_.put(behavior);
    services_.put(service);
    if (emit_) {
        Event e;
        e.kind = events::service_installed;
        e.payload = {{"service", service.id.name}, {"behavior", behavior.id}};
        e.source = self_.value;
        emit_(std::move(e));
    }
    return result;
}

bool KnowledgeState::offers(const ServiceId& service, AskMode mode) const {
    const Service* s = services_.get(service);
    return s != nullptr && mode_compatible(mode, s->offer_modes);
}

bool KnowledgeState::can_do_locally(const ServiceId& service) const {
    const Service* s = services_.get(service);
    return s != nullptr && s->offer_modes.can_do && behaviors_.contains(s->behavior);
}

} // namespace selflet
