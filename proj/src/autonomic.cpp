#include "selflet/autonomic.hpp"

#include <algorithm>
#include <sstream>

#include "selflet/abilities.hpp"
#include "selflet/dispatcher.hpp"
#include "selflet/negotiation.hpp"

namespace selflet {

std::string action_name(const Action& a) {
    if (std::holds_alternative<ActionChangeAskMode>(a)) return "change_ask_mode";
    if (std::holds_alternative<ActionChangeOfferMode>(a)) return "change_offer_mode";
    if (std::holds_alternative<ActionInstallService>(a)) return "install_service";
    if (std::holds_alternative<ActionInstallAbility>(a)) return "install_ability";
    if (std::holds_alternative<ActionModifyBehavior>(a)) return "modify_behavior";
    const auto& peer = std::get<ActionSetPeerEnabled>(a);
    return peer.enabled ? "enable_peer" : "disable_peer";
}

Rule make_teach_on_frequent_rule() {
    Rule rule;
    rule.name = "change_service_ask_mode";
    rule.trigger = events::frequent_service;
    rule.condition = GuardExpr::service_remote(GuardOperand::payload("service"));
    rule.once_per = "service";
    rule.actions.push_back(ActionChangeAskMode{ValueRef::payload("service"), AskMode::Teach});
    return rule;
}

AutonomicManager::AutonomicManager(Deps deps) : deps_(std::move(deps)) {}

bool AutonomicManager::install_rule(Rule rule) {
    if (rule.name.empty() || rule.actions.empty()) return false;
    if (rules_.count(rule.name) != 0) return false;
    auto name = rule.name;
    rules_.emplace(std::move(name), std::move(rule));
    return true;
}

std::optional<std::string> AutonomicManager::resolve_ref(const ValueRef& ref,
                                                         const Payload& payload) const {
    if (ref.kind == ValueRef::Kind::Literal) return ref.value;
    auto v = payload_get(payload, ref.value);
    if (!v) return std::nullopt;
    return scalar_to_string(*v);
}

void AutonomicManager::diag(const std::string& kind, Payload payload) {
    if (!deps_.emit) return;
    Event e;
    e.kind = kind;
    e.payload = std::move(payload);
    e.timestamp = deps_.now ? deps_.now() : 0;
    deps_.emit(std::move(e));
}

std::vector<Action> AutonomicManager::evaluate(const Event& e) {
    std::vector<Action> out;
    // std::map keeps rules in name order, which is the evaluation order.
    for (auto& [name, rule] : rules_) {
        if (!Dispatcher::pattern_matches(rule.trigger, e.kind)) continue;

        std::string firing_key;
        if (rule.once_per) {
            auto v = payload_get(e.payload, *rule.once_per);
            if (!v) {
                diag("diag.rule_skipped",
                     {{"rule", name}, {"reason", std::string("once_per key absent")}});
                continue;
            }
            firing_key = scalar_to_string(*v);
            auto fired = firings_.find(name);
            if (fired != firings_.end() && fired->second.count(firing_key) != 0) continue;
        }

        if (rule.min_support) {
            auto support = payload_get(e.payload, "support");
            auto number = support ? scalar_number(*support) : std::nullopt;
            if (!number) {
                diag("diag.rule_skipped",
                     {{"rule", name}, {"reason", std::string("support key absent")}});
                continue;
            }
            if (*number < *rule.min_support) continue;
        }

        GuardContext ctx;
        ctx.kb = &deps_.knowledge->kb();
        ctx.payload = &e.payload;
        ctx.service_is_local = [this](const std::string& service) {
            return deps_.knowledge->services().contains(ServiceId(service));
        };
        GuardEval cond = eval_guard(rule.condition, ctx);
        if (cond.missing_payload_key) {
            diag("diag.rule_skipped",
                 {{"rule", name}, {"reason", std::string("condition payload key absent")}});
            continue;
        }
        if (!cond.value) continue;

        // Resolve payload references now so returned actions are concrete.
        std::vector<Action> resolved;
        bool resolvable = true;
        for (const auto& action : rule.actions) {
            Action concrete = action;
            if (auto* ask = std::get_if<ActionChangeAskMode>(&concrete)) {
                auto service = resolve_ref(ask->service, e.payload);
                if (!service) { resolvable = false; break; }
                ask->service = ValueRef::lit(*service);
            } else if (auto* offer = std::get_if<ActionChangeOfferMode>(&concrete)) {
                auto service = resolve_ref(offer->service, e.payload);
                if (!service) { resolvable = false; break; }
                offer->service = ValueRef::lit(*service);
            }
            resolved.push_back(std::move(concrete));
        }
        if (!resolvable) {
            diag("diag.rule_skipped",
                 {{"rule", name}, {"reason", std::string("action payload key absent")}});
            continue;
        }

        if (rule.once_per) firings_[name].insert(firing_key);
        for (auto& action : resolved) out.push_back(std::move(action));
    }
    return out;
}

namespace {

std::string describe(const Action& a) {
    std::ostringstream out;
    out << action_name(a) << "(";
    if (const auto* ask = std::get_if<ActionChangeAskMode>(&a))
        out << ask->service.value << ", " << to_string(ask->mode);
    else if (const auto* offer = std::get_if<ActionChangeOfferMode>(&a))
        out << offer->service.value << ", " << to_string(offer->modes);
    else if (const auto* inst = std::get_if<ActionInstallService>(&a))
        out << inst->service.id.name;
    else if (const auto* ability = std::get_if<ActionInstallAbility>(&a))
        out << ability->name;
    else if (const auto* mod = std::get_if<ActionModifyBehavior>(&a))
        out << mod->behavior_id << ", " << mod->edits.size() << " edits";
    else
        out << std::get<ActionSetPeerEnabled>(a).node.value;
    out << ")";
    return out.str();
}

// Applies edits to a copy; the caller validates before swapping in.
Behavior edited_copy(const Behavior& original, const std::vector<BehaviorEdit>& edits) {
    Behavior copy = original;
    for (const auto& edit : edits) {
        switch (edit.kind) {
            case BehaviorEdit::Kind::AddState:
                copy.states.push_back(edit.state);
                break;
            case BehaviorEdit::Kind::RemoveState:
                std::erase_if(copy.states,
                              [&](const State& s) { return s.id == edit.state_id; });
                break;
            case BehaviorEdit::Kind::AddTransition:
                copy.transitions.push_back(edit.transition);
                break;
            case BehaviorEdit::Kind::RemoveTransition:
                std::erase_if(copy.transitions, [&](const Transition& t) {
                    return t.from == edit.transition.from && t.to == edit.transition.to;
                });
                break;
        }
    }
    return copy;
}

} // namespace

bool AutonomicManager::apply_action(const Action& a, const ApplyContext& ctx) {
    const Tick now = deps_.now ? deps_.now() : 0;
    auto applied = [&](Payload detail) {
        applied_log_.push_back(AppliedAction{now, describe(a)});
        detail["action"] = action_name(a);
        diag(events::action_applied, std::move(detail));
        return true;
    };
    auto failed = [&](const std::string& reason) {
        diag(events::action_failed, {{"action", action_name(a)}, {"reason", reason}});
        return false;
    };

    if (const auto* ask = std::get_if<ActionChangeAskMode>(&a)) {
        if (ask->service.kind != ValueRef::Kind::Literal)
            return failed("unresolved service reference");
        const ServiceId service(ask->service.value);
        ctx.negotiation->set_ask_mode(service, ask->mode);
        bool result = applied({{"service", service.name}, {"mode", to_string(ask->mode)}});
        // Switching a non-local service to teach means "go learn it": launch
        // the acquisition right away instead of waiting for the next need.
        if (ask->mode == AskMode::Teach && !deps_.knowledge->services().contains(service))
            ctx.negotiation->acquire(service);
        return result;
    }
    if (const auto* offer = std::get_if<ActionChangeOfferMode>(&a)) {
        if (offer->service.kind != ValueRef::Kind::Literal)
            return failed("unresolved service reference");
        const ServiceId id(offer->service.value);
        const Service* existing = deps_.knowledge->services().get(id);
        if (existing == nullptr) return failed("unknown service " + id.name);
        if ((offer->modes.can_do || offer->modes.can_teach) &&
            !deps_.knowledge->behaviors().contains(existing->behavior))
            return failed("behavior missing for executable offer");
        Service updated = *existing;
        updated.offer_modes = offer->modes;
        deps_.knowledge->services().put(updated);
        return applied({{"service", id.name}, {"modes", to_string(offer->modes)}});
    }
    if (const auto* inst = std::get_if<ActionInstallService>(&a)) {
        ValidationResult result = deps_.knowledge->install_service(inst->service, inst->behavior);
        if (!result.ok()) return failed(result.joined());
        return applied({{"service", inst->service.id.name}});
    }
    if (const auto* ability = std::get_if<ActionInstallAbility>(&a)) {
        if (!ctx.abilities->install_from_catalog(ability->name))
            return failed("unknown ability " + ability->name);
        return applied({{"ability", ability->name}});
    }
    if (const auto* mod = std::get_if<ActionModifyBehavior>(&a)) {
        auto current = deps_.knowledge->behaviors().get(mod->behavior_id);
        if (!current) return failed("unknown behavior " + mod->behavior_id);
        Behavior next = edited_copy(*current, mod->edits);
        ValidationResult validation = validate_behavior(next);
        if (!validation.ok()) return failed(validation.joined());
        // Atomic swap; running instances keep their snapshot, new instances
        // pick up the edited behavior.
        deps_.knowledge->behaviors().put(std::move(next));
        return applied({{"behavior", mod->behavior_id}});
    }
    const auto& peer = std::get<ActionSetPeerEnabled>(a);
    ctx.negotiation->set_peer_enabled(peer.node, peer.enabled);
    return applied({{"node", peer.node.value}, {"enabled", peer.enabled}});
}

} // namespace selflet
