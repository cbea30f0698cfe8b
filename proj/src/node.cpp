#include "selflet/node.hpp"

#include <stdexcept>

namespace selflet {

SelfLetNode::SelfLetNode(NodeConfig config, SimBroker& broker, const SimClock& clock,
                         TraceHook trace)
    : config_(std::move(config)),
      broker_(broker),
      clock_(clock),
      trace_(std::move(trace)),
      knowledge_(config_.id, [this](Event e) { emit(std::move(e)); }),
      abilities_(default_abilities()),
      engine_(BehaviorEngine::Deps{
          &knowledge_.behaviors(), &abilities_, &knowledge_.kb(),
          [this](Event e) { emit(std::move(e)); },
          [this] { return ++next_invocation_; },
          [this] { return clock_.tick; }}),
      negotiation_(NegotiationManager::Deps{
          &knowledge_, &engine_,
          [this](const Message& m) { return broker_.send(m); },
          [this](Event e) { emit(std::move(e)); },
          [this] { return clock_.tick; },
          [this] { return ++next_invocation_; },
          config_.provider_expiry}),
      autonomic_(AutonomicManager::Deps{
          &knowledge_,
          [this](Event e) { emit(std::move(e)); },
          [this] { return clock_.tick; }}),
      prediction_([this](Event e) { emit(std::move(e)); }) {
    if (config_.id.empty()) throw std::invalid_argument("node id must not be empty");
    wire_components();
    install_initial_state();
}

void SelfLetNode::emit(Event e) {
    e.timestamp = clock_.tick;
    if (e.source.empty()) e.source = config_.id.value;
    if (trace_) trace_(config_.id, e);
    dispatcher_.publish(e);
}

void SelfLetNode::wire_components() {
    dispatcher_.subscribe("negotiation", events::service_needed,
                          [this](const Event& e) { negotiation_.on_service_needed(e); });
    dispatcher_.subscribe("negotiation", events::service_run_served,
                          [this](const Event& e) { negotiation_.on_run_served(e); });
    dispatcher_.subscribe("negotiation", events::service_run_serve_failed,
                          [this](const Event& e) { negotiation_.on_run_serve_failed(e); });

    auto resume_ok = [this](const Event& e) {
        auto invocation = payload_get(e.payload, "invocation");
        if (!invocation || !scalar_int(*invocation)) return;
        auto result = payload_get(e.payload, "result");
        engine_.resume(*scalar_int(*invocation), result ? *result : Scalar{},
                       e.kind == events::service_completed);
    };
    dispatcher_.subscribe("engine", events::service_completed, resume_ok);
    dispatcher_.subscribe("engine", events::service_failed, resume_ok);

    auto completion = [this](const Event& e) { on_internal_completion(e); };
    dispatcher_.subscribe("node", events::service_completed, completion);
    dispatcher_.subscribe("node", events::service_failed, completion);
    dispatcher_.subscribe("node", events::main_iteration_completed, completion);
    dispatcher_.subscribe("node", events::service_run_served, completion);
}

void SelfLetNode::install_initial_state() {
    for (const auto& behavior : config_.behaviors) {
        ValidationResult result = validate_behavior(behavior);
        if (!result.ok())
            throw std::invalid_argument("behavior " + behavior.id + ": " + result.joined());
        knowledge_.behaviors().put(behavior);
    }
    for (const auto& service : config_.services) {
        if ((service.offer_modes.can_do || service.offer_modes.can_teach) &&
            !knowledge_.behaviors().contains(service.behavior))
            throw std::invalid_argument("service " + service.id.name + ": behavior '" +
                                        service.behavior + "' not installed");
        knowledge_.services().put(service);
    }
    for (const auto& [service, mode] : config_.ask_mode_defaults)
        negotiation_.set_ask_mode(service, mode);
    for (const auto& preload : config_.providers)
        knowledge_.update_provider(preload.service, preload.node, preload.modes, 0);

    for (const auto& rule : config_.rules) {
        if (!install_rule(rule)) throw std::invalid_argument("rule '" + rule.name + "' rejected");
    }

    for (const auto& model_config : config_.prediction_models) {
        std::string err = add_prediction_model(FrequentServiceModel::descriptor_for(model_config),
                                               std::make_unique<FrequentServiceModel>(model_config));
        if (!err.empty()) throw std::invalid_argument("prediction model rejected: " + err);
    }

    if (config_.main_behavior) {
        auto started =
            engine_.start_main(config_.main_behavior->behavior, config_.main_behavior->restart_delay);
        if (!started.started)
            throw std::invalid_argument("main behavior '" + config_.main_behavior->behavior +
                                        "' not installed");
    }

    // Subscribed after the initial installs so only services learned later
    // are announced.
    if (config_.advertise_learned) {
        dispatcher_.subscribe("node_readvertise", events::service_installed, [this](const Event& e) {
            auto service = payload_get(e.payload, "service");
            if (!service) return;
            const ServiceId id(scalar_to_string(*service));
            const Service* svc = knowledge_.services().get(id);
            if (svc == nullptr) return;
            AdvertisementMsg ad;
            ad.provider = config_.id;
            ad.services.push_back(AdvertisedService{id, svc->offer_modes});
            broker_.send(make_message(topics::broadcast, config_.id, ad));
        });
    }
}

bool SelfLetNode::install_rule(const Rule& rule) {
    if (!autonomic_.install_rule(rule)) return false;
    dispatcher_.subscribe("autonomic", rule.trigger, [this](const Event& e) {
        AutonomicManager::ApplyContext ctx{&negotiation_, &abilities_};
        for (const auto& action : autonomic_.evaluate(e)) autonomic_.apply_action(action, ctx);
    });
    return true;
}

std::string SelfLetNode::add_prediction_model(PredictionModelDescriptor descriptor,
                                              std::unique_ptr<PredictionModel> model) {
    auto consumes = descriptor.consumes;
    std::string err = prediction_.register_model(std::move(descriptor), std::move(model));
    if (!err.empty()) return err;
    for (const auto& pattern : consumes) {
        dispatcher_.subscribe("prediction_manager", pattern,
                              [this](const Event& e) { prediction_.route_event(e); });
    }
    return "";
}

void SelfLetNode::begin_tick(Tick tick) {
    deliveries_this_tick_ = 0;
    engine_.begin_tick(tick);
}

void SelfLetNode::begin_goal(const ServiceId& service) {
    const std::int64_t invocation = ++next_invocation_;
    open_goals_.emplace(invocation, service);
    Event e;
    e.kind = events::service_needed;
    e.payload = {{"service", service.name}, {"invocation", invocation}, {"goal", invocation}};
    emit(std::move(e));
}

void SelfLetNode::advertise_services() {
    if (config_.advertise.empty()) return;
    AdvertisementMsg ad;
    ad.provider = config_.id;
    for (const auto& id : config_.advertise) {
        const Service* svc = knowledge_.services().get(id);
        if (svc != nullptr) ad.services.push_back(AdvertisedService{id, svc->offer_modes});
    }
    if (!ad.services.empty()) broker_.send(make_message(topics::broadcast, config_.id, ad));
}

void SelfLetNode::on_wire(const Message& m) {
    if (trace_) {
        Event traced;
        traced.kind = "wire." + m.body_type;
        traced.payload = {{"topic", m.topic}, {"sender", m.sender.value}};
        traced.source = m.sender.value;
        traced.timestamp = clock_.tick;
        trace_(config_.id, traced);
    }
    negotiation_.on_wire(m);
}

void SelfLetNode::on_internal_completion(const Event& e) {
    if (e.kind == events::main_iteration_completed) {
        ++goals_executed_;
        return;
    }
    if (e.kind == events::service_run_served) {
        // A remote request served end to end counts as a goal of this node.
        ++goals_executed_;
        return;
    }
    auto invocation = payload_get(e.payload, "invocation");
    if (!invocation || !scalar_int(*invocation)) return;
    auto it = open_goals_.find(*scalar_int(*invocation));
    if (it == open_goals_.end()) return;
    const ServiceId service = it->second;
    open_goals_.erase(it);
    if (e.kind == events::service_completed) {
        ++goals_executed_;
        Event done;
        done.kind = events::goal_completed;
        done.payload = {{"service", service.name}, {"goal", *scalar_int(*invocation)}};
        emit(std::move(done));
    }
}

bool SelfLetNode::pump() {
    bool any = false;
    for (;;) {
        bool progressed = false;
        // Once the per-tick budget is spent the queue stays parked until the
        // next tick; the stalled flag reports the livelock.
        while (deliveries_this_tick_ < kMaxDeliveriesPerTick && dispatcher_.deliver_next()) {
            progressed = true;
            ++deliveries_this_tick_;
        }
        if (deliveries_this_tick_ >= kMaxDeliveriesPerTick && !livelock_flagged_) {
            livelock_flagged_ = true;
            Event diag;
            diag.kind = "diag.livelock";
            diag.payload = {{"node", config_.id.value}};
            emit(std::move(diag));
        }
        if (deliveries_this_tick_ < kMaxDeliveriesPerTick && engine_.sweep()) progressed = true;
        if (!progressed) break;
        any = true;
    }
    return any;
}

bool SelfLetNode::idle() const { return dispatcher_.pending() == 0; }

bool SelfLetNode::has_blocked() const {
    return engine_.has_suspended() || negotiation_.open_needs() > 0 || !open_goals_.empty() ||
           livelock_flagged_;
}

NodeSnapshot SelfLetNode::snapshot() const {
    NodeSnapshot snap;
    snap.goals_executed = goals_executed_;
    snap.do_requests_answered = negotiation_.do_requests_answered();
    snap.behaviors = knowledge_.behaviors().ids();
    for (const auto& [id, service] : knowledge_.services().all()) {
        snap.services.push_back(id.name);
        snap.offer_modes[id.name] = to_string(service.offer_modes);
    }
    for (const auto& [service, mode] : negotiation_.ask_modes())
        snap.ask_modes[service.name] = to_string(mode);
    snap.rule_firings = autonomic_.firings();
    snap.actions_applied = autonomic_.applied_log();
    return snap;
}

} // namespace selflet
