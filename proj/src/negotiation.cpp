#include "selflet/negotiation.hpp"

#include "selflet/json_codec.hpp"

namespace selflet {

NegotiationManager::NegotiationManager(Deps deps) : deps_(std::move(deps)) {}

void NegotiationManager::set_ask_mode(const ServiceId& service, AskMode mode) {
    ask_modes_[service] = mode;
}

AskMode NegotiationManager::ask_mode(const ServiceId& service) const {
    auto it = ask_modes_.find(service);
    return it == ask_modes_.end() ? AskMode::Do : it->second;
}

void NegotiationManager::set_peer_enabled(const NodeId& node, bool enabled) {
    if (enabled) disabled_peers_.erase(node);
    else disabled_peers_.insert(node);
}

const ProviderEntry* NegotiationManager::select_provider(
    const std::vector<ProviderEntry>& candidates, AskMode need_mode,
    const std::set<NodeId>& excluded, std::optional<Tick> expiry, Tick now) {
    const ProviderEntry* best = nullptr;
    for (const auto& entry : candidates) {
        if (!mode_compatible(need_mode, entry.modes)) continue;
        if (excluded.count(entry.node) != 0) continue;
        if (expiry && entry.last_seen + *expiry < now) continue;
        if (best == nullptr || entry.last_seen > best->last_seen ||
            (entry.last_seen == best->last_seen && entry.node < best->node)) {
            best = &entry;
        }
    }
    return best;
}

Resolution NegotiationManager::resolve_need(const ServiceId& service,
                                            const std::set<NodeId>& excluded) const {
    if (deps_.knowledge->can_do_locally(service)) return ResolutionLocal{};
    const AskMode mode = ask_mode(service);
    std::set<NodeId> skip = excluded;
    for (const auto& peer : disabled_peers_) skip.insert(peer);
    const ProviderEntry* provider = select_provider(
        deps_.knowledge->providers().entries(service), mode, skip, deps_.provider_expiry,
        deps_.now());
    if (provider != nullptr) return ResolutionRemote{provider->node, mode};
    return ResolutionDiscover{};
}

AskMode NegotiationManager::effective_mode(const NeedState& state) const {
    AskMode mode = state.acquisition ? AskMode::Teach : ask_mode(state.service);
    if (state.referred) mode = referral_base_mode(mode);
    return mode;
}

void NegotiationManager::on_service_needed(const Event& e) {
    auto service = payload_get(e.payload, "service");
    auto invocation = payload_get(e.payload, "invocation");
    if (!service || !invocation || !scalar_int(*invocation)) return;

    NeedState state;
    state.service = ServiceId(scalar_to_string(*service));
    if (auto goal = payload_get(e.payload, "goal")) state.goal = scalar_int(*goal);
    dispatch_need(*scalar_int(*invocation), std::move(state));
}

void NegotiationManager::acquire(const ServiceId& service) {
    if (deps_.knowledge->can_do_locally(service)) return;
    NeedState state;
    state.service = service;
    state.acquisition = true;
    dispatch_need(deps_.next_invocation(), std::move(state));
}

void NegotiationManager::dispatch_need(std::int64_t invocation, NeedState state) {
    if (!state.acquisition && deps_.knowledge->can_do_locally(state.service)) {
        const Service* svc = deps_.knowledge->services().get(state.service);
        auto started = deps_.engine->start_service_run(
            state.service, svc->behavior, RunOriginLocal{invocation, state.goal});
        if (started.started) return;
    }
    const AskMode mode = effective_mode(state);
    std::set<NodeId> skip = state.refused;
    for (const auto& peer : disabled_peers_) skip.insert(peer);
    const ProviderEntry* provider =
        select_provider(deps_.knowledge->providers().entries(state.service), mode, skip,
                        deps_.provider_expiry, deps_.now());
    if (provider != nullptr) {
        send_request(invocation, state, provider->node, mode);
        needs_.emplace(invocation, std::move(state));
        return;
    }
    if (!state.discovered) {
        start_discovery(invocation, state);
        needs_.emplace(invocation, std::move(state));
        return;
    }
    fail_need(invocation, state, "no provider for " + state.service.name);
}

void NegotiationManager::send_request(std::int64_t invocation, NeedState& state,
                                      const NodeId& provider, AskMode mode) {
    state.phase = Phase::AwaitingReply;
    state.mode = mode;

    ServiceRequestMsg req;
    req.service = state.service;
    req.requester = deps_.knowledge->self();
    req.mode = mode;
    req.invocation = invocation;
    req.goal = state.acquisition ? std::nullopt : state.goal;
    deps_.send(make_message(topics::node_inbox(provider), deps_.knowledge->self(), req));

    Event e;
    e.kind = events::service_request_out;
    e.payload = {{"service", state.service.name},
                 {"mode", to_string(mode)},
                 {"provider", provider.value},
                 {"invocation", invocation}};
    if (!state.acquisition && state.goal) e.payload["goal"] = *state.goal;
    e.timestamp = deps_.now();
    deps_.emit(std::move(e));
}

void NegotiationManager::start_discovery(std::int64_t invocation, NeedState& state) {
    state.phase = Phase::AwaitingDiscovery;
    state.discovered = true;

    DiscoveryQueryMsg query{state.service, deps_.knowledge->self()};
    deps_.send(make_message(topics::broadcast, deps_.knowledge->self(), query));

    Event e;
    e.kind = events::discovery_query_out;
    e.payload = {{"service", state.service.name}, {"invocation", invocation}};
    if (state.goal) e.payload["goal"] = *state.goal;
    e.timestamp = deps_.now();
    deps_.emit(std::move(e));
}

void NegotiationManager::fail_need(std::int64_t invocation, const NeedState& state,
                                   const std::string& reason) {
    Event e;
    e.kind = events::service_failed;
    e.payload = {{"service", state.service.name}, {"invocation", invocation}, {"reason", reason}};
    if (state.goal) e.payload["goal"] = *state.goal;
    e.timestamp = deps_.now();
    deps_.emit(std::move(e));
}

void NegotiationManager::absorb_provider(const ServiceId& service, const NodeId& node,
                                         OfferModeSet modes) {
    deps_.knowledge->update_provider(service, node, modes, deps_.now());
}

void NegotiationManager::retry_discoveries(const ServiceId& service) {
    // Needs parked on discovery for this service get another resolution pass.
    std::vector<std::int64_t> waiting;
    for (const auto& [invocation, state] : needs_) {
        if (state.phase == Phase::AwaitingDiscovery && state.service == service)
            waiting.push_back(invocation);
    }
    for (const auto invocation : waiting) {
        auto it = needs_.find(invocation);
        if (it == needs_.end()) continue;
        NeedState state = it->second;
        const AskMode mode = effective_mode(state);
        std::set<NodeId> skip = state.refused;
        for (const auto& peer : disabled_peers_) skip.insert(peer);
        const ProviderEntry* provider =
            select_provider(deps_.knowledge->providers().entries(state.service), mode, skip,
                            deps_.provider_expiry, deps_.now());
        if (provider == nullptr) continue;  // keep waiting
        send_request(invocation, state, provider->node, mode);
        it->second = std::move(state);
    }
}

void NegotiationManager::reply(const NodeId& to, const MessageBody& body) {
    deps_.send(make_message(topics::node_inbox(to), deps_.knowledge->self(), body));
}

void NegotiationManager::on_wire(const Message& m) {
    auto body = decode_body(m);
    if (!body) return;
    std::visit(
        [this](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, ServiceRequestMsg>) handle_request(msg);
            else if constexpr (std::is_same_v<T, ResultMsg>) on_result(msg);
            else if constexpr (std::is_same_v<T, BehaviorTransferMsg>) on_transfer(msg);
            else if constexpr (std::is_same_v<T, ReferralMsg>) on_referral(msg);
            else if constexpr (std::is_same_v<T, RefusalMsg>) on_refusal(msg);
            else if constexpr (std::is_same_v<T, AdvertisementMsg>) on_advertisement(msg);
            else on_discovery_query(msg);
        },
        *body);
}

void NegotiationManager::handle_request(const ServiceRequestMsg& req) {
    Event in;
    in.kind = events::service_request_in;
    in.payload = {{"service", req.service.name},
                  {"mode", to_string(req.mode)},
                  {"requester", req.requester.value},
                  {"invocation", req.invocation}};
    in.timestamp = deps_.now();
    deps_.emit(std::move(in));

    const NodeId& self = deps_.knowledge->self();
    if (disabled_peers_.count(req.requester) != 0) {
        reply(req.requester, RefusalMsg{req.service, self, req.invocation, "peer disabled"});
        return;
    }

    const Service* service = deps_.knowledge->services().get(req.service);
    switch (req.mode) {
        case AskMode::Do: {
            if (service == nullptr || !service->offer_modes.can_do) {
                reply(req.requester,
                      RefusalMsg{req.service, self, req.invocation, "not offered in do mode"});
                return;
            }
            auto started = deps_.engine->start_service_run(
                req.service, service->behavior, RunOriginRemote{req.requester, req.invocation});
            if (!started.started) {
                reply(req.requester, RefusalMsg{req.service, self, req.invocation, started.reason});
                return;
            }
            // The Result reply goes out when the run completes.
            return;
        }
        case AskMode::Teach: {
            if (service == nullptr || !service->offer_modes.can_teach) {
                reply(req.requester,
                      RefusalMsg{req.service, self, req.invocation, "not offered in teach mode"});
                return;
            }
            auto behavior = deps_.knowledge->behaviors().get(service->behavior);
            if (!behavior) {
                reply(req.requester,
                      RefusalMsg{req.service, self, req.invocation, "behavior unavailable"});
                return;
            }
            // The transfer carries the service's behavior only; the
            // sub-behaviors it may invoke stay here.
            reply(req.requester, BehaviorTransferMsg{req.service, self, req.invocation, *behavior,
                                                     service->offer_modes});
            return;
        }
        case AskMode::KnowWhoCanDo:
        case AskMode::KnowWhoCanTeach: {
            const bool allowed = service != nullptr &&
                                 (req.mode == AskMode::KnowWhoCanDo
                                      ? service->offer_modes.knows_who_can_do
                                      : service->offer_modes.knows_who_can_teach);
            if (!allowed) {
                reply(req.requester, RefusalMsg{req.service, self, req.invocation,
                                                "not offered in know-who mode"});
                return;
            }
            ReferralMsg referral{req.service, self, req.invocation, {}};
            const AskMode base = referral_base_mode(req.mode);
            for (const auto& entry : deps_.knowledge->providers().entries(req.service)) {
                if (mode_compatible(base, entry.modes))
                    referral.providers.push_back(ProviderRef{entry.node, entry.modes});
            }
            reply(req.requester, referral);
            return;
        }
    }
}

void NegotiationManager::on_run_served(const Event& e) {
    auto service = payload_get(e.payload, "service");
    auto requester = payload_get(e.payload, "requester");
    auto invocation = payload_get(e.payload, "invocation");
    if (!service || !requester || !invocation) return;

    const ServiceId id(scalar_to_string(*service));
    const Service* svc = deps_.knowledge->services().get(id);
    ResultMsg result;
    result.service = id;
    result.provider = deps_.knowledge->self();
    result.invocation = *scalar_int(*invocation);
    if (auto r = payload_get(e.payload, "result")) result.result = *r;
    if (svc != nullptr) result.provider_modes = svc->offer_modes;
    reply(NodeId(scalar_to_string(*requester)), result);
    ++do_requests_answered_;
}

void NegotiationManager::on_run_serve_failed(const Event& e) {
    auto service = payload_get(e.payload, "service");
    auto requester = payload_get(e.payload, "requester");
    auto invocation = payload_get(e.payload, "invocation");
    if (!service || !requester || !invocation) return;
    auto reason = payload_get(e.payload, "reason");
    reply(NodeId(scalar_to_string(*requester)),
          RefusalMsg{ServiceId(scalar_to_string(*service)), deps_.knowledge->self(),
                     *scalar_int(*invocation), reason ? scalar_to_string(*reason) : "failed"});
}

void NegotiationManager::on_result(const ResultMsg& msg) {
    auto it = needs_.find(msg.invocation);
    if (it == needs_.end()) return;
    const NeedState state = it->second;
    needs_.erase(it);
    absorb_provider(msg.service, msg.provider, msg.provider_modes);

    Event e;
    e.kind = events::service_completed;
    e.payload = {{"service", msg.service.name},
                 {"invocation", msg.invocation},
                 {"result", msg.result}};
    if (state.goal) e.payload["goal"] = *state.goal;
    e.timestamp = deps_.now();
    deps_.emit(std::move(e));
}

void NegotiationManager::apply_teach(const BehaviorTransferMsg& transfer) {
    // The learner installs in plain can-do mode; it does not re-teach or
    // answer referrals unless reconfigured later.
    Service learned;
    learned.id = transfer.service;
    learned.behavior = transfer.behavior.id;
    learned.offer_modes = OfferModeSet{.can_do = true};
    ValidationResult installed = deps_.knowledge->install_service(learned, transfer.behavior);
    if (!installed.ok()) {
        Event e;
        e.kind = "diag.teach_rejected";
        e.payload = {{"service", transfer.service.name},
                     {"provider", transfer.provider.value},
                     {"defects", installed.joined()}};
        e.timestamp = deps_.now();
        deps_.emit(std::move(e));
    }
}

void NegotiationManager::on_transfer(const BehaviorTransferMsg& msg) {
    auto it = needs_.find(msg.invocation);
    if (it == needs_.end()) {
        apply_teach(msg);  // unsolicited transfer still installs if valid
        return;
    }
    const NeedState state = it->second;
    needs_.erase(it);
    absorb_provider(msg.service, msg.provider, msg.provider_modes);
    apply_teach(msg);

    if (state.acquisition) return;
    if (deps_.knowledge->can_do_locally(state.service)) {
        // The original need now resolves locally; the run inherits the
        // need's invocation so its completion closes the original ask.
        const Service* svc = deps_.knowledge->services().get(state.service);
        auto started = deps_.engine->start_service_run(
            state.service, svc->behavior, RunOriginLocal{msg.invocation, state.goal});
        if (started.started) return;
    }
    fail_need(msg.invocation, state, "teach transfer unusable");
}

void NegotiationManager::on_referral(const ReferralMsg& msg) {
    auto it = needs_.find(msg.invocation);
    if (it == needs_.end()) return;
    NeedState state = it->second;
    for (const auto& p : msg.providers) absorb_provider(msg.service, p.node, p.modes);

    // One-hop referral: from here the need proceeds in the base mode, never
    // chasing another know-who answer. The referrer stays eligible as a
    // provider; it may well be a doer itself.
    state.referred = true;
    needs_.erase(it);
    dispatch_need(msg.invocation, std::move(state));
}

void NegotiationManager::on_refusal(const RefusalMsg& msg) {
    auto it = needs_.find(msg.invocation);
    if (it == needs_.end()) return;
    NeedState state = it->second;
    needs_.erase(it);
    deps_.knowledge->providers().demote(msg.service, msg.provider);
    state.refused.insert(msg.provider);
    dispatch_need(msg.invocation, std::move(state));
}

void NegotiationManager::on_advertisement(const AdvertisementMsg& msg) {
    for (const auto& advertised : msg.services) {
        absorb_provider(advertised.service, msg.provider, advertised.modes);
        Event e;
        e.kind = events::advertisement_received;
        e.payload = {{"service", advertised.service.name},
                     {"provider", msg.provider.value},
                     {"modes", to_string(advertised.modes)}};
        e.timestamp = deps_.now();
        deps_.emit(std::move(e));
        retry_discoveries(advertised.service);
    }
}

void NegotiationManager::on_discovery_query(const DiscoveryQueryMsg& msg) {
    const Service* service = deps_.knowledge->services().get(msg.service);
    if (service == nullptr || !service->offer_modes.any()) return;
    if (disabled_peers_.count(msg.requester) != 0) return;
    AdvertisementMsg answer;
    answer.provider = deps_.knowledge->self();
    answer.services.push_back(AdvertisedService{msg.service, service->offer_modes});
    reply(msg.requester, answer);
}

} // namespace selflet
