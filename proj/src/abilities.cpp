#include "selflet/abilities.hpp"

namespace selflet {

void AbilityRegistry::register_ability(const std::string& name, Ability fn) {
    abilities_[name] = std::move(fn);
}

bool AbilityRegistry::install_from_catalog(const std::string& name) {
    const auto& catalog = builtin_ability_catalog();
    auto it = catalog.find(name);
    if (it == catalog.end()) return false;
    abilities_[name] = it->second;
    return true;
}

const Ability* AbilityRegistry::find(const std::string& name) const {
    auto it = abilities_.find(name);
    if (it == abilities_.end()) return nullptr;
    return &it->second;
}

std::vector<std::string> AbilityRegistry::names() const {
    std::vector<std::string> out;
    out.reserve(abilities_.size());
    for (const auto& [name, _] : abilities_) out.push_back(name);
    return out;
}

const std::map<std::string, Ability>& builtin_ability_catalog() {
    static const std::map<std::string, Ability> catalog = {
        {"noop", [](const Payload&, KnowledgeBase&) -> Scalar { return Scalar{}; }},
        {"echo",
         [](const Payload& args, KnowledgeBase&) -> Scalar {
             auto v = payload_get(args, "value");
             return v ? *v : Scalar{};
         }},
        {"kb.put",
         [](const Payload& args, KnowledgeBase& kb) -> Scalar {
             auto key = payload_get(args, "key");
             if (!key) return Scalar{};
             auto value = payload_get(args, "value");
             kb.put(scalar_to_string(*key), value ? *value : Scalar{});
             return value ? *value : Scalar{};
         }},
        {"kb.get",
         [](const Payload& args, KnowledgeBase& kb) -> Scalar {
             auto key = payload_get(args, "key");
             if (!key) return Scalar{};
             auto v = kb.get(scalar_to_string(*key));
             return v ? *v : Scalar{};
         }},
    };
    return catalog;
}

AbilityRegistry default_abilities() {
    AbilityRegistry registry;
    for (const auto& [name, fn] : builtin_ability_catalog()) registry.register_ability(name, fn);
    return registry;
}

} // namespace selflet
