#pragma once
// Behaviors are flat guarded state machines. A state either idles, runs an
// ability, or invokes a service; transitions carry guards and fire in
// declaration order (first enabled wins).

#include <memory>
#include <variant>
#include <vector>

#include "selflet/core.hpp"
#include "selflet/guard.hpp"

namespace selflet {

struct ActionIdle {
    bool operator==(const ActionIdle&) const = default;
};

struct ActionInvokeAbility {
    std::string name;
    Payload args;
    bool operator==(const ActionInvokeAbility&) const = default;
};

struct ActionInvokeService {
    ServiceId service;
    bool operator==(const ActionInvokeService&) const = default;
};

using StateAction = std::variant<ActionIdle, ActionInvokeAbility, ActionInvokeService>;

struct State {
    std::string id;
    StateAction action = ActionIdle{};
    bool terminal = false;
    bool operator==(const State&) const = default;
};

struct Transition {
    std::string from;
    std::string to;
    GuardExpr guard = GuardExpr::always();
    bool operator==(const Transition&) const = default;
};

struct Behavior {
    std::string id;
    std::string initial;
    std::vector<State> states;           // declaration order preserved
    std::vector<Transition> transitions; // declaration order is the tie-break order

    const State* find_state(const std::string& state_id) const;
    bool operator==(const Behavior&) const = default;
};

struct ValidationResult {
    std::vector<std::string> defects;
    bool ok() const { return defects.empty(); }
    std::string joined() const;
};

// Checks every structural invariant: non-empty id and state set, unique state
// ids, known initial state, transition endpoints declared, all states
// reachable from the initial one, terminal states idle. Defects are data,
// not failures.
ValidationResult validate_behavior(const Behavior& b);

} // namespace selflet
