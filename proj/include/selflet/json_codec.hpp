#pragma once
// JSON codec for every externally visible type: scenario files, wire message
// bodies and metrics share the same schema. Round-tripping a value through
// this codec is identity.

#include <stdexcept>

// Vendored single-header nlohmann/json.
#include <json.hpp>

#include "selflet/autonomic.hpp"
#include "selflet/behavior.hpp"
#include "selflet/event.hpp"
#include "selflet/message.hpp"
#include "selflet/service.hpp"

namespace selflet {

using Json = nlohmann::json;

struct CodecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Json scalar_to_json(const Scalar& s);
Scalar scalar_from_json(const Json& j);

Json payload_to_json(const Payload& p);
Payload payload_from_json(const Json& j);

Json event_to_json(const Event& e);
Event event_from_json(const Json& j);

Json guard_to_json(const GuardExpr& g);
GuardExpr guard_from_json(const Json& j);

Json behavior_to_json(const Behavior& b);
Behavior behavior_from_json(const Json& j);

Json service_to_json(const Service& s);
Service service_from_json(const Json& j);

Json rule_to_json(const Rule& r);
Rule rule_from_json(const Json& j);

Json action_to_json(const Action& a);
Action action_from_json(const Json& j);

Json body_to_json(const MessageBody& b);
MessageBody body_from_json(const std::string& type, const Json& j);

} // namespace selflet
