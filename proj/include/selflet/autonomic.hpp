#pragma once
// Forward-chaining rule engine. Rules are declarative data: an event-kind
// trigger, a condition over the trigger payload and the knowledge base, and
// an ordered action list. Evaluation order is rule-name lexicographic; a rule
// with once_per fires at most once per distinct value of that payload key.

#include <functional>
#include <map>
#include <set>
#include <variant>
#include <vector>

#include "selflet/behavior.hpp"
#include "selflet/event.hpp"
#include "selflet/guard.hpp"
#include "selflet/knowledge.hpp"
#include "selflet/offer_modes.hpp"

namespace selflet {

class NegotiationManager;
class AbilityRegistry;

// A rule parameter that is either fixed or read from the trigger payload.
struct ValueRef {
    enum class Kind { Literal, PayloadKey };
    Kind kind = Kind::Literal;
    std::string value;

    static ValueRef lit(std::string v) { return {Kind::Literal, std::move(v)}; }
    static ValueRef payload(std::string key) { return {Kind::PayloadKey, std::move(key)}; }
    bool operator==(const ValueRef&) const = default;
};

struct ActionChangeAskMode {
    ValueRef service;
    AskMode mode = AskMode::Do;
    bool operator==(const ActionChangeAskMode&) const = default;
};

struct ActionChangeOfferMode {
    ValueRef service;
    OfferModeSet modes;
    bool operator==(const ActionChangeOfferMode&) const = default;
};

struct ActionInstallService {
    Service service;
    Behavior behavior;
    bool operator==(const ActionInstallService&) const = default;
};

struct ActionInstallAbility {
    std::string name;
    bool operator==(const ActionInstallAbility&) const = default;
};

struct BehaviorEdit {
    enum class Kind { AddState, RemoveState, AddTransition, RemoveTransition };
    Kind kind = Kind::AddState;
    State state;            // AddState
    std::string state_id;   // RemoveState
    Transition transition;  // AddTransition / RemoveTransition (matched by from+to)
    bool operator==(const BehaviorEdit&) const = default;
};

struct ActionModifyBehavior {
    std::string behavior_id;
    std::vector<BehaviorEdit> edits;
    bool operator==(const ActionModifyBehavior&) const = default;
};

struct ActionSetPeerEnabled {
    NodeId node;
    bool enabled = true;
    bool operator==(const ActionSetPeerEnabled&) const = default;
};

using Action = std::variant<ActionChangeAskMode, ActionChangeOfferMode, ActionInstallService,
                            ActionInstallAbility, ActionModifyBehavior, ActionSetPeerEnabled>;

std::string action_name(const Action& a);

struct Rule {
    std::string name;
    std::string trigger;  // event-kind pattern, exact or prefix wildcard
    GuardExpr condition = GuardExpr::always();
    std::optional<double> min_support;     // optional extra check on payload "support"
    std::optional<std::string> once_per;   // payload key limiting firings
    std::vector<Action> actions;
};

// The built-in policy reacting to frequent-service forecasts: when requests
// for a remote service become frequent, ask that service in teach mode.
// Fires at most once per service.
Rule make_teach_on_frequent_rule();

struct AppliedAction {
    Tick tick = 0;
    std::string description;  // compact "name(arg, ...)" form for reports
};

class AutonomicManager {
public:
    struct Deps {
        KnowledgeState* knowledge = nullptr;
        std::function<void(Event)> emit;
        std::function<Tick()> now;
    };

    explicit AutonomicManager(Deps deps);

    // Duplicate names are rejected.
    bool install_rule(Rule rule);
    const std::map<std::string, Rule>& rules() const { return rules_; }

    // Concatenated actions of every matching rule, payload references
    // resolved. Pure in (event, knowledge snapshot, firing history); firing
    // history advances for once_per rules that matched.
    std::vector<Action> evaluate(const Event& e);

    struct ApplyContext {
        NegotiationManager* negotiation = nullptr;
        AbilityRegistry* abilities = nullptr;
    };

    // Applies one action atomically: it either fully applies (emitting
    // "action_applied") or leaves all state unchanged ("action_failed").
    bool apply_action(const Action& a, const ApplyContext& ctx);

    const std::map<std::string, std::set<std::string>>& firings() const { return firings_; }
    const std::vector<AppliedAction>& applied_log() const { return applied_log_; }

private:
    std::optional<std::string> resolve_ref(const ValueRef& ref, const Payload& payload) const;
    void diag(const std::string& kind, Payload payload);

    Deps deps_;
    std::map<std::string, Rule> rules_;
    std::map<std::string, std::set<std::string>> firings_;  // rule -> once_per values seen
    std::vector<AppliedAction> applied_log_;
};

} // namespace selflet
