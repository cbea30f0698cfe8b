#pragma once
// A node's Internal Knowledge: key/value knowledge base, service repository,
// behavior repository, attribute repository and the list of known providers
// per service.

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "selflet/behavior.hpp"
#include "selflet/event.hpp"
#include "selflet/service.hpp"

namespace selflet {

class KnowledgeBase {
public:
    void put(const std::string& key, Scalar value) { entries_[key] = std::move(value); }
    // Absent keys are distinguishable from stored nulls.
    std::optional<Scalar> get(const std::string& key) const;
    bool contains(const std::string& key) const { return entries_.count(key) != 0; }
    void erase(const std::string& key) { entries_.erase(key); }
    const std::map<std::string, Scalar>& entries() const { return entries_; }

private:
    std::map<std::string, Scalar> entries_;
};

class BehaviorRepository {
public:
    bool contains(const std::string& id) const { return behaviors_.count(id) != 0; }
    std::shared_ptr<const Behavior> get(const std::string& id) const;
    void put(Behavior b);  // caller is responsible for prior validation
    std::vector<std::string> ids() const;
    std::size_t size() const { return behaviors_.size(); }

private:
    std::map<std::string, std::shared_ptr<const Behavior>> behaviors_;
};

class ServiceRepository {
public:
    bool contains(const ServiceId& id) const { return services_.count(id) != 0; }
    const Service* get(const ServiceId& id) const;
    void put(Service s) { services_[s.id] = std::move(s); }
    const std::map<ServiceId, Service>& all() const { return services_; }

private:
    std::map<ServiceId, Service> services_;
};

using AttributeRepository = std::map<std::string, std::string>;

struct ProviderEntry {
    NodeId node;
    OfferModeSet modes;
    Tick last_seen = 0;
};

// Known providers per service. Never contains the owning node; an update for
// a known (service, node) pair replaces modes and refreshes last_seen.
class ProviderList {
public:
    explicit ProviderList(NodeId self) : self_(std::move(self)) {}

    void update(const ServiceId& service, const NodeId& node, OfferModeSet modes, Tick tick);
    // Refusals deprioritize a provider without forgetting it.
    void demote(const ServiceId& service, const NodeId& node);
    const std::vector<ProviderEntry>& entries(const ServiceId& service) const;
    bool empty(const ServiceId& service) const { return entries(service).empty(); }

private:
    NodeId self_;
    std::map<ServiceId, std::vector<ProviderEntry>> by_service_;
};

// Aggregate owned by one node, mutated only from its serialized event loop.
class KnowledgeState {
public:
    KnowledgeState(NodeId self, std::function<void(Event)> emit);

    // Validates the behavior, stores both halves, emits "service_installed".
    // Rejection leaves the repositories unchanged. Reinstall is idempotent.
    ValidationResult install_service(const Service& service, const Behavior& behavior);

    void update_provider(const ServiceId& service, const NodeId& node, OfferModeSet modes, Tick tick) {
        providers_.update(service, node, modes, tick);
    }

    bool offers(const ServiceId& service, AskMode mode) const;
    // Locally executable: offered can_do and the behavior is present.
    bool can_do_locally(const ServiceId& service) const;

    const NodeId& self() const { return self_; }
    KnowledgeBase& kb() { return kb_; }
    const KnowledgeBase& kb() const { return kb_; }
    BehaviorRepository& behaviors() { return behaviors_; }
    const BehaviorRepository& behaviors() const { return behaviors_; }
    ServiceRepository& services() { return services_; }
    const ServiceRepository& services() const { return services_; }
    AttributeRepository& attributes() { return attributes_; }
    ProviderList& providers() { return providers_; }
    const ProviderList& providers() const { return providers_; }

private:
    NodeId self_;
    std::function<void(Event)> emit_;
    KnowledgeBase kb_;
    BehaviorRepository behaviors_;
    ServiceRepository services_;
    AttributeRepository attributes_;
    ProviderList providers_;
};

} // namespace selflet
