#pragma once
// One SelfLet: dispatcher, knowledge, behavior engine, negotiation manager,
// autonomic manager and prediction manager wired together over the internal
// event bus. Everything on a node runs from its serialized event loop.

#include "selflet/autonomic.hpp"
#include "selflet/behavior_engine.hpp"
#include "selflet/broker.hpp"
#include "selflet/dispatcher.hpp"
#include "selflet/frequent_service_model.hpp"
#include "selflet/knowledge.hpp"
#include "selflet/negotiation.hpp"
#include "selflet/prediction.hpp"

namespace selflet {

struct SimClock {
    Tick tick = 0;
};

struct ProviderPreload {
    ServiceId service;
    NodeId node;
    OfferModeSet modes;
};

struct MainBehaviorSpec {
    std::string behavior;
    Tick restart_delay = 1;
};

struct NodeConfig {
    NodeId id;
    std::vector<Behavior> behaviors;
    std::vector<Service> services;
    std::vector<Rule> rules;
    std::vector<FrequentServiceModelConfig> prediction_models;
    std::map<ServiceId, AskMode> ask_mode_defaults;
    std::vector<ServiceId> advertise;  // services announced to the network
    bool advertise_learned = false;    // announce services acquired by teach
    std::optional<Tick> provider_expiry;
    std::vector<ProviderPreload> providers;
    std::optional<MainBehaviorSpec> main_behavior;
};

// Per-node totals exported in the metrics report.
struct NodeSnapshot {
    std::uint64_t goals_executed = 0;
    std::uint64_t do_requests_answered = 0;
    std::vector<std::string> behaviors;
    std::vector<std::string> services;
    std::map<std::string, std::string> offer_modes;  // service -> modes
    std::map<std::string, std::string> ask_modes;
    std::map<std::string, std::set<std::string>> rule_firings;
    std::vector<AppliedAction> actions_applied;
};

class SelfLetNode {
public:
    using TraceHook = std::function<void(const NodeId&, const Event&)>;

    SelfLetNode(NodeConfig config, SimBroker& broker, const SimClock& clock,
                TraceHook trace = nullptr);

    SelfLetNode(const SelfLetNode&) = delete;
    SelfLetNode& operator=(const SelfLetNode&) = delete;

    const NodeId& id() const { return config_.id; }

    // Drains the internal queue and sweeps the engine until neither makes
    // progress. Returns true if anything happened.
    bool pump();

    void begin_tick(Tick tick);

    // Starts one main-goal iteration: a service need whose completion counts
    // toward goals_executed.
    void begin_goal(const ServiceId& service);

    // Broadcasts the configured advertisement set.
    void advertise_services();

    // Broker delivery entry point.
    void on_wire(const Message& m);

    bool idle() const;        // no pending internal work
    bool has_blocked() const; // suspended instances or unresolved needs

    std::uint64_t goals_executed() const { return goals_executed_; }
    NodeSnapshot snapshot() const;

    Dispatcher& dispatcher() { return dispatcher_; }
    KnowledgeState& knowledge() { return knowledge_; }
    const KnowledgeState& knowledge() const { return knowledge_; }
    BehaviorEngine& engine() { return engine_; }
    NegotiationManager& negotiation() { return negotiation_; }
    AutonomicManager& autonomic() { return autonomic_; }
    PredictionManager& prediction() { return prediction_; }
    AbilityRegistry& abilities() { return abilities_; }

    // Installs a rule and subscribes the autonomic manager to its trigger,
    // so it is active for subsequent events. False on duplicate names.
    bool install_rule(const Rule& rule);

    // Registers a model and subscribes the prediction manager to its
    // descriptor. Empty string on success.
    std::string add_prediction_model(PredictionModelDescriptor descriptor,
                                     std::unique_ptr<PredictionModel> model);

    // Budget on internal deliveries per tick; exceeding it flags a livelock.
    static constexpr std::uint64_t kMaxDeliveriesPerTick = 1000000;

private:
    void emit(Event e);
    void wire_components();
    void install_initial_state();
    void on_internal_completion(const Event& e);
    void on_action_event(const Event& e);

    NodeConfig config_;
    SimBroker& broker_;
    const SimClock& clock_;
    TraceHook trace_;

    Dispatcher dispatcher_;
    KnowledgeState knowledge_;
    AbilityRegistry abilities_;
    BehaviorEngine engine_;
    NegotiationManager negotiation_;
    AutonomicManager autonomic_;
    PredictionManager prediction_;

    std::int64_t next_invocation_ = 0;
    std::map<std::int64_t, ServiceId> open_goals_;
    std::uint64_t goals_executed_ = 0;
    std::uint64_t deliveries_this_tick_ = 0;
    bool livelock_flagged_ = false;
};

} // namespace selflet
