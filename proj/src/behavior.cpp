#include "selflet/behavior.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace selflet {

const State* Behavior::find_state(const std::string& state_id) const {
    for (const auto& s : states) {
        if (s.id == state_id) return &s;
    }
    return nullptr;
}

std::string ValidationResult::joined() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < defects.size(); ++i) {
        if (i) out << "; ";
        out << defects[i];
    }
    return out.str();
}

ValidationResult validate_behavior(const Behavior& b) {
    ValidationResult result;
    auto defect = [&](const std::string& msg) { result.defects.push_back(msg); };

    if (b.id.empty()) defect("behavior id is empty");
    if (b.states.empty()) {
        defect("behavior has no states");
        return result;
    }

    std::set<std::string> ids;
    for (const auto& s : b.states) {
        if (s.id.empty()) defect("state with empty id");
        if (!ids.insert(s.id).second) defect("duplicate state " + s.id);
        if (s.terminal && !std::holds_alternative<ActionIdle>(s.action))
            defect("terminal state " + s.id + " must be idle");
        if (const auto* inv = std::get_if<ActionInvokeService>(&s.action)) {
            if (inv->service.empty()) defect("state " + s.id + " invokes an unnamed service");
        }
        if (const auto* ab = std::get_if<ActionInvokeAbility>(&s.action)) {
            if (ab->name.empty()) defect("state " + s.id + " invokes an unnamed ability");
        }
    }

    if (b.initial.empty()) {
        defect("initial state not set");
    } else if (ids.count(b.initial) == 0) {
        defect("unknown initial state " + b.initial);
    }

    for (const auto& t : b.transitions) {
        if (ids.count(t.from) == 0) defect("transition from unknown state " + t.from);
        if (ids.count(t.to) == 0) defect("transition to unknown state " + t.to);
    }

    // Reachability from the initial state, guards ignored.
    if (!b.initial.empty() && ids.count(b.initial) != 0) {
        std::set<std::string> reached{b.initial};
        std::deque<std::string> frontier{b.initial};
        while (!frontier.empty()) {
            const std::string current = frontier.front();
            frontier.pop_front();
            for (const auto& t : b.transitions) {
                if (t.from == current && ids.count(t.to) != 0 && reached.insert(t.to).second)
                    frontier.push_back(t.to);
            }
        }
        for (const auto& s : b.states) {
            if (reached.count(s.id) == 0) defect("unreachable state " + s.id);
        }
    }

    return result;
}

} // namespace selflet
