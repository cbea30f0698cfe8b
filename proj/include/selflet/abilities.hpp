#pragma once
// Abilities: primitive host operations invocable from behavior states.
// A small built-in catalog ships with the library; scenarios assume the
// abilities referenced by transferred behaviors exist everywhere.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "selflet/core.hpp"
#include "selflet/knowledge.hpp"

namespace selflet {

using Ability = std::function<Scalar(const Payload& args, KnowledgeBase& kb)>;

class AbilityRegistry {
public:
    // Names are unique; re-registering a name replaces the ability.
    void register_ability(const std::string& name, Ability fn);
    // Pulls a named ability from the built-in host catalog. False if unknown.
    bool install_from_catalog(const std::string& name);
    bool contains(const std::string& name) const { return abilities_.count(name) != 0; }
    const Ability* find(const std::string& name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, Ability> abilities_;
};

// Built-in host operations: "noop", "echo", "kb.put", "kb.get".
const std::map<std::string, Ability>& builtin_ability_catalog();

// Registry preloaded with the whole catalog.
AbilityRegistry default_abilities();

} // namespace selflet
