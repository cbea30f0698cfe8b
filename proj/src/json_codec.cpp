#include "selflet/json_codec.hpp"

#include <sstream>

namespace selflet {

// --- offer / ask mode text forms -------------------------------------------

std::optional<OfferModeSet> parse_offer_modes(const std::string& text) {
    OfferModeSet modes;
    if (text.empty()) return modes;
    std::stringstream in(text);
    std::string token;
    while (std::getline(in, token, '|')) {
        if (token == "can_do") modes.can_do = true;
        else if (token == "can_teach") modes.can_teach = true;
        else if (token == "knows_who_can_do") modes.knows_who_can_do = true;
        else if (token == "knows_who_can_teach") modes.knows_who_can_teach = true;
        else return std::nullopt;
    }
    return modes;
}

std::string to_string(const OfferModeSet& modes) {
    std::string out;
    auto add = [&](const char* flag) {
        if (!out.empty()) out += '|';
        out += flag;
    };
    if (modes.can_do) add("can_do");
    if (modes.can_teach) add("can_teach");
    if (modes.knows_who_can_do) add("knows_who_can_do");
    if (modes.knows_who_can_teach) add("knows_who_can_teach");
    return out;
}

std::optional<AskMode> parse_ask_mode(const std::string& text) {
    if (text == "do") return AskMode::Do;
    if (text == "teach") return AskMode::Teach;
    if (text == "know_who_can_do") return AskMode::KnowWhoCanDo;
    if (text == "know_who_can_teach") return AskMode::KnowWhoCanTeach;
    return std::nullopt;
}

std::string to_string(AskMode mode) {
    switch (mode) {
        case AskMode::Do: return "do";
        case AskMode::Teach: return "teach";
        case AskMode::KnowWhoCanDo: return "know_who_can_do";
        case AskMode::KnowWhoCanTeach: return "know_who_can_teach";
    }
    return "do";
}

// --- helpers ----------------------------------------------------------------

namespace {

const Json& require(const Json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end()) throw CodecError(std::string("missing field '") + field + "'");
    return *it;
}

std::string require_string(const Json& j, const char* field) {
    const Json& v = require(j, field);
    if (!v.is_string()) throw CodecError(std::string("field '") + field + "' must be a string");
    return v.get<std::string>();
}

OfferModeSet modes_from(const Json& j, const char* field) {
    auto modes = parse_offer_modes(require_string(j, field));
    if (!modes) throw CodecError(std::string("bad offer modes in '") + field + "'");
    return *modes;
}

AskMode ask_mode_from(const Json& j, const char* field) {
    auto mode = parse_ask_mode(require_string(j, field));
    if (!mode) throw CodecError(std::string("bad ask mode in '") + field + "'");
    return *mode;
}

} // namespace

// --- scalars and payloads ----------------------------------------------------

Json scalar_to_json(const Scalar& s) {
    if (std::holds_alternative<std::monostate>(s)) return nullptr;
    if (const auto* b = std::get_if<bool>(&s)) return *b;
    if (const auto* i = std::get_if<std::int64_t>(&s)) return *i;
    if (const auto* d = std::get_if<double>(&s)) return *d;
    return std::get<std::string>(s);
}

Scalar scalar_from_json(const Json& j) {
    if (j.is_null()) return Scalar{};
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    throw CodecError("scalar must be null, bool, number or string");
}

Json payload_to_json(const Payload& p) {
    Json j = Json::object();
    for (const auto& [key, value] : p) j[key] = scalar_to_json(value);
    return j;
}

Payload payload_from_json(const Json& j) {
    if (!j.is_object()) throw CodecError("payload must be an object");
    Payload p;
    for (auto it = j.begin(); it != j.end(); ++it) p[it.key()] = scalar_from_json(it.value());
    return p;
}

Json event_to_json(const Event& e) {
    return Json{{"kind", e.kind},
                {"payload", payload_to_json(e.payload)},
                {"source", e.source},
                {"tick", e.timestamp}};
}

Event event_from_json(const Json& j) {
    Event e;
    e.kind = require_string(j, "kind");
    if (j.contains("payload")) e.payload = payload_from_json(j.at("payload"));
    if (j.contains("source")) e.source = require_string(j, "source");
    if (j.contains("tick")) e.timestamp = j.at("tick").get<Tick>();
    return e;
}

// --- guards -------------------------------------------------------------------

namespace {

Json operand_to_json(const GuardOperand& op) {
    switch (op.kind) {
        case GuardOperand::Kind::Literal: return scalar_to_json(op.literal);
        case GuardOperand::Kind::KbKey: return Json{{"key", op.key}};
        case GuardOperand::Kind::PayloadKey: return Json{{"payload", op.key}};
        case GuardOperand::Kind::LastResult: return Json{{"result", true}};
    }
    return nullptr;
}

GuardOperand operand_from_json(const Json& j) {
    if (j.is_object()) {
        if (j.contains("key")) return GuardOperand::kb(require_string(j, "key"));
        if (j.contains("payload")) return GuardOperand::payload(require_string(j, "payload"));
        if (j.contains("result")) return GuardOperand::result();
        throw CodecError("operand object must name 'key', 'payload' or 'result'");
    }
    return GuardOperand::lit(scalar_from_json(j));
}

} // namespace

Json guard_to_json(const GuardExpr& g) {
    switch (g.kind) {
        case GuardExpr::Kind::Always:
            return true;
        case GuardExpr::Kind::Compare:
            return Json{{"cmp", Json{{"lhs", operand_to_json(g.lhs)},
                                     {"op", to_string(g.op)},
                                     {"rhs", operand_to_json(g.rhs)}}}};
        case GuardExpr::Kind::All: {
            Json children = Json::array();
            for (const auto& c : g.children) children.push_back(guard_to_json(c));
            return Json{{"all", children}};
        }
        case GuardExpr::Kind::Any: {
            Json children = Json::array();
            for (const auto& c : g.children) children.push_back(guard_to_json(c));
            return Json{{"any", children}};
        }
        case GuardExpr::Kind::ServiceLocal:
            return Json{{"service_local", operand_to_json(g.lhs)}};
        case GuardExpr::Kind::ServiceRemote:
            return Json{{"service_remote", operand_to_json(g.lhs)}};
    }
    return true;
}

GuardExpr guard_from_json(const Json& j) {
    if (j.is_boolean()) {
        if (j.get<bool>()) return GuardExpr::always();
        throw CodecError("guard 'false' is not expressible; use an impossible comparison");
    }
    if (!j.is_object()) throw CodecError("guard must be true or an object");
    if (j.contains("cmp")) {
        const Json& c = j.at("cmp");
        auto op = parse_cmp_op(require_string(c, "op"));
        if (!op) throw CodecError("unknown comparison operator");
        return GuardExpr::compare(operand_from_json(require(c, "lhs")), *op,
                                  operand_from_json(require(c, "rhs")));
    }
    auto list_of = [](const Json& arr) {
        if (!arr.is_array()) throw CodecError("'all'/'any' expects an array");
        std::vector<GuardExpr> out;
        for (const auto& item : arr) out.push_back(guard_from_json(item));
        return out;
    };
    if (j.contains("all")) return GuardExpr::all_of(list_of(j.at("all")));
    if (j.contains("any")) return GuardExpr::any_of(list_of(j.at("any")));
    if (j.contains("service_local"))
        return GuardExpr::service_local(operand_from_json(j.at("service_local")));
    if (j.contains("service_remote"))
        return GuardExpr::service_remote(operand_from_json(j.at("service_remote")));
    throw CodecError("unrecognized guard form");
}

// --- behaviors ------------------------------------------------------------------

namespace {

Json state_action_to_json(const StateAction& a) {
    if (std::holds_alternative<ActionIdle>(a)) return "idle";
    if (const auto* svc = std::get_if<ActionInvokeService>(&a))
        return Json{{"invoke_service", svc->service.name}};
    const auto& ab = std::get<ActionInvokeAbility>(a);
    Json j{{"name", ab.name}};
    if (!ab.args.empty()) j["args"] = payload_to_json(ab.args);
    return Json{{"invoke_ability", j}};
}

StateAction state_action_from_json(const Json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "idle") return ActionIdle{};
        throw CodecError("unknown state action '" + j.get<std::string>() + "'");
    }
    if (!j.is_object()) throw CodecError("state action must be 'idle' or an object");
    if (j.contains("invoke_service"))
        return ActionInvokeService{ServiceId(j.at("invoke_service").get<std::string>())};
    if (j.contains("invoke_ability")) {
        const Json& a = j.at("invoke_ability");
        ActionInvokeAbility ability;
        ability.name = require_string(a, "name");
        if (a.contains("args")) ability.args = payload_from_json(a.at("args"));
        return ability;
    }
    throw CodecError("unrecognized state action");
}

} // namespace

Json behavior_to_json(const Behavior& b) {
    Json states = Json::array();
    for (const auto& s : b.states) {
        Json js{{"id", s.id}};
        if (!std::holds_alternative<ActionIdle>(s.action))
            js["action"] = state_action_to_json(s.action);
        if (s.terminal) js["terminal"] = true;
        states.push_back(std::move(js));
    }
    Json transitions = Json::array();
    for (const auto& t : b.transitions) {
        Json jt{{"from", t.from}, {"to", t.to}};
        if (t.guard != GuardExpr::always()) jt["guard"] = guard_to_json(t.guard);
        transitions.push_back(std::move(jt));
    }
    return Json{{"id", b.id}, {"initial", b.initial}, {"states", states}, {"transitions", transitions}};
}

Behavior behavior_from_json(const Json& j) {
    Behavior b;
    b.id = require_string(j, "id");
    b.initial = require_string(j, "initial");
    for (const auto& js : require(j, "states")) {
        State s;
        s.id = require_string(js, "id");
        if (js.contains("action")) s.action = state_action_from_json(js.at("action"));
        if (js.contains("terminal")) s.terminal = js.at("terminal").get<bool>();
        b.states.push_back(std::move(s));
    }
    if (j.contains("transitions")) {
        for (const auto& jt : j.at("transitions")) {
            Transition t;
            t.from = require_string(jt, "from");
            t.to = require_string(jt, "to");
            if (jt.contains("guard")) t.guard = guard_from_json(jt.at("guard"));
            b.transitions.push_back(std::move(t));
        }
    }
    return b;
}

Json service_to_json(const Service& s) {
    return Json{{"id", s.id.name}, {"behavior", s.behavior}, {"offer_modes", to_string(s.offer_modes)}};
}

Service service_from_json(const Json& j) {
    Service s;
    s.id = ServiceId(require_string(j, "id"));
    s.behavior = require_string(j, "behavior");
    s.offer_modes = modes_from(j, "offer_modes");
    return s;
}

// --- rules and actions --------------------------------------------------------------

namespace {

Json value_ref_to_json(const ValueRef& ref) {
    if (ref.kind == ValueRef::Kind::Literal) return ref.value;
    return Json{{"payload", ref.value}};
}

ValueRef value_ref_from_json(const Json& j) {
    if (j.is_string()) return ValueRef::lit(j.get<std::string>());
    if (j.is_object() && j.contains("payload"))
        return ValueRef::payload(require_string(j, "payload"));
    throw CodecError("value must be a string or {\"payload\": key}");
}

Json edit_to_json(const BehaviorEdit& e) {
    switch (e.kind) {
        case BehaviorEdit::Kind::AddState: {
            Json js{{"id", e.state.id}};
            if (!std::holds_alternative<ActionIdle>(e.state.action))
                js["action"] = state_action_to_json(e.state.action);
            if (e.state.terminal) js["terminal"] = true;
            return Json{{"add_state", js}};
        }
        case BehaviorEdit::Kind::RemoveState:
            return Json{{"remove_state", e.state_id}};
        case BehaviorEdit::Kind::AddTransition: {
            Json jt{{"from", e.transition.from}, {"to", e.transition.to}};
            if (e.transition.guard != GuardExpr::always())
                jt["guard"] = guard_to_json(e.transition.guard);
            return Json{{"add_transition", jt}};
        }
        case BehaviorEdit::Kind::RemoveTransition:
            return Json{{"remove_transition",
                         Json{{"from", e.transition.from}, {"to", e.transition.to}}}};
    }
    return Json::object();
}

BehaviorEdit edit_from_json(const Json& j) {
    BehaviorEdit e;
    if (j.contains("add_state")) {
        const Json& js = j.at("add_state");
        e.kind = BehaviorEdit::Kind::AddState;
        e.state.id = require_string(js, "id");
        if (js.contains("action")) e.state.action = state_action_from_json(js.at("action"));
        if (js.contains("terminal")) e.state.terminal = js.at("terminal").get<bool>();
        return e;
    }
    if (j.contains("remove_state")) {
        e.kind = BehaviorEdit::Kind::RemoveState;
        e.state_id = j.at("remove_state").get<std::string>();
        return e;
    }
    if (j.contains("add_transition")) {
        const Json& jt = j.at("add_transition");
        e.kind = BehaviorEdit::Kind::AddTransition;
        e.transition.from = require_string(jt, "from");
        e.transition.to = require_string(jt, "to");
        if (jt.contains("guard")) e.transition.guard = guard_from_json(jt.at("guard"));
        return e;
    }
    if (j.contains("remove_transition")) {
        const Json& jt = j.at("remove_transition");
        e.kind = BehaviorEdit::Kind::RemoveTransition;
        e.transition.from = require_string(jt, "from");
        e.transition.to = require_string(jt, "to");
        return e;
    }
    throw CodecError("unrecognized behavior edit");
}

} // namespace

Json action_to_json(const Action& a) {
    if (const auto* ask = std::get_if<ActionChangeAskMode>(&a))
        return Json{{"change_ask_mode", Json{{"service", value_ref_to_json(ask->service)},
                                             {"mode", to_string(ask->mode)}}}};
    if (const auto* offer = std::get_if<ActionChangeOfferMode>(&a))
        return Json{{"change_offer_mode", Json{{"service", value_ref_to_json(offer->service)},
                                               {"modes", to_string(offer->modes)}}}};
    if (const auto* inst = std::get_if<ActionInstallService>(&a))
        return Json{{"install_service", Json{{"service", service_to_json(inst->service)},
                                             {"behavior", behavior_to_json(inst->behavior)}}}};
    if (const auto* ability = std::get_if<ActionInstallAbility>(&a))
        return Json{{"install_ability", Json{{"name", ability->name}}}};
    if (const auto* mod = std::get_if<ActionModifyBehavior>(&a)) {
        Json edits = Json::array();
        for (const auto& e : mod->edits) edits.push_back(edit_to_json(e));
        return Json{{"modify_behavior", Json{{"behavior", mod->behavior_id}, {"edits", edits}}}};
    }
    const auto& peer = std::get<ActionSetPeerEnabled>(a);
    const char* tag = peer.enabled ? "enable_peer" : "disable_peer";
    return Json{{tag, Json{{"node", peer.node.value}}}};
}

Action action_from_json(const Json& j) {
    if (!j.is_object() || j.size() != 1) throw CodecError("action must be a single-key object");
    if (j.contains("change_ask_mode")) {
        const Json& c = j.at("change_ask_mode");
        return ActionChangeAskMode{value_ref_from_json(require(c, "service")),
                                   ask_mode_from(c, "mode")};
    }
    if (j.contains("change_offer_mode")) {
        const Json& c = j.at("change_offer_mode");
        return ActionChangeOfferMode{value_ref_from_json(require(c, "service")),
                                     modes_from(c, "modes")};
    }
    if (j.contains("install_service")) {
        const Json& c = j.at("install_service");
        return ActionInstallService{service_from_json(require(c, "service")),
                                    behavior_from_json(require(c, "behavior"))};
    }
    if (j.contains("install_ability"))
        return ActionInstallAbility{require_string(j.at("install_ability"), "name")};
    if (j.contains("modify_behavior")) {
        const Json& c = j.at("modify_behavior");
        ActionModifyBehavior mod;
        mod.behavior_id = require_string(c, "behavior");
        for (const auto& je : require(c, "edits")) mod.edits.push_back(edit_from_json(je));
        return mod;
    }
    if (j.contains("enable_peer"))
        return ActionSetPeerEnabled{NodeId(require_string(j.at("enable_peer"), "node")), true};
    if (j.contains("disable_peer"))
        return ActionSetPeerEnabled{NodeId(require_string(j.at("disable_peer"), "node")), false};
    throw CodecError("unrecognized action");
}

Json rule_to_json(const Rule& r) {
    Json j{{"name", r.name}, {"trigger", r.trigger}};
    if (r.condition != GuardExpr::always()) j["condition"] = guard_to_json(r.condition);
    if (r.min_support) j["min_support"] = *r.min_support;
    if (r.once_per) j["once_per"] = *r.once_per;
    Json actions = Json::array();
    for (const auto& a : r.actions) actions.push_back(action_to_json(a));
    j["actions"] = actions;
    return j;
}

Rule rule_from_json(const Json& j) {
    Rule r;
    r.name = require_string(j, "name");
    r.trigger = require_string(j, "trigger");
    if (j.contains("condition")) r.condition = guard_from_json(j.at("condition"));
    if (j.contains("min_support")) r.min_support = j.at("min_support").get<double>();
    if (j.contains("once_per")) r.once_per = j.at("once_per").get<std::string>();
    for (const auto& ja : require(j, "actions")) r.actions.push_back(action_from_json(ja));
    return r;
}

// --- wire message bodies ---------------------------------------------------------------

namespace topics {
std::string node_inbox(const NodeId& id) { return "node/" + id.value; }
} // namespace topics

Json body_to_json(const MessageBody& b) {
    if (const auto* req = std::get_if<ServiceRequestMsg>(&b)) {
        Json j{{"service", req->service.name},
               {"requester", req->requester.value},
               {"mode", to_string(req->mode)},
               {"invocation", req->invocation}};
        if (req->goal) j["goal"] = *req->goal;
        return j;
    }
    if (const auto* res = std::get_if<ResultMsg>(&b))
        return Json{{"service", res->service.name},
                    {"provider", res->provider.value},
                    {"invocation", res->invocation},
                    {"result", scalar_to_json(res->result)},
                    {"provider_modes", to_string(res->provider_modes)}};
    if (const auto* transfer = std::get_if<BehaviorTransferMsg>(&b))
        return Json{{"service", transfer->service.name},
                    {"provider", transfer->provider.value},
                    {"invocation", transfer->invocation},
                    {"behavior", behavior_to_json(transfer->behavior)},
                    {"provider_modes", to_string(transfer->provider_modes)}};
    if (const auto* referral = std::get_if<ReferralMsg>(&b)) {
        Json providers = Json::array();
        for (const auto& p : referral->providers)
            providers.push_back(Json{{"node", p.node.value}, {"modes", to_string(p.modes)}});
        return Json{{"service", referral->service.name},
                    {"provider", referral->provider.value},
                    {"invocation", referral->invocation},
                    {"providers", providers}};
    }
    if (const auto* refusal = std::get_if<RefusalMsg>(&b))
        return Json{{"service", refusal->service.name},
                    {"provider", refusal->provider.value},
                    {"invocation", refusal->invocation},
                    {"reason", refusal->reason}};
    if (const auto* ad = std::get_if<AdvertisementMsg>(&b)) {
        Json services = Json::array();
        for (const auto& s : ad->services)
            services.push_back(Json{{"service", s.service.name}, {"modes", to_string(s.modes)}});
        return Json{{"provider", ad->provider.value}, {"services", services}};
    }
    const auto& query = std::get<DiscoveryQueryMsg>(b);
    return Json{{"service", query.service.name}, {"requester", query.requester.value}};
}

MessageBody body_from_json(const std::string& type, const Json& j) {
    if (type == body_types::service_request) {
        ServiceRequestMsg req;
        req.service = ServiceId(require_string(j, "service"));
        req.requester = NodeId(require_string(j, "requester"));
        req.mode = ask_mode_from(j, "mode");
        req.invocation = require(j, "invocation").get<std::int64_t>();
        if (j.contains("goal")) req.goal = j.at("goal").get<std::int64_t>();
        return req;
    }
    if (type == body_types::result) {
        ResultMsg res;
        res.service = ServiceId(require_string(j, "service"));
        res.provider = NodeId(require_string(j, "provider"));
        res.invocation = require(j, "invocation").get<std::int64_t>();
        res.result = scalar_from_json(require(j, "result"));
        res.provider_modes = modes_from(j, "provider_modes");
        return res;
    }
    if (type == body_types::behavior_transfer) {
        BehaviorTransferMsg transfer;
        transfer.service = ServiceId(require_string(j, "service"));
        transfer.provider = NodeId(require_string(j, "provider"));
        transfer.invocation = require(j, "invocation").get<std::int64_t>();
        transfer.behavior = behavior_from_json(require(j, "behavior"));
        transfer.provider_modes = modes_from(j, "provider_modes");
        return transfer;
    }
    if (type == body_types::referral) {
        ReferralMsg referral;
        referral.service = ServiceId(require_string(j, "service"));
        referral.provider = NodeId(require_string(j, "provider"));
        referral.invocation = require(j, "invocation").get<std::int64_t>();
        for (const auto& jp : require(j, "providers"))
            referral.providers.push_back(
                ProviderRef{NodeId(require_string(jp, "node")), modes_from(jp, "modes")});
        return referral;
    }
    if (type == body_types::refusal) {
        RefusalMsg refusal;
        refusal.service = ServiceId(require_string(j, "service"));
        refusal.provider = NodeId(require_string(j, "provider"));
        refusal.invocation = require(j, "invocation").get<std::int64_t>();
        refusal.reason = require_string(j, "reason");
        return refusal;
    }
    if (type == body_types::advertisement) {
        AdvertisementMsg ad;
        ad.provider = NodeId(require_string(j, "provider"));
        for (const auto& js : require(j, "services"))
            ad.services.push_back(
                AdvertisedService{ServiceId(require_string(js, "service")), modes_from(js, "modes")});
        return ad;
    }
    if (type == body_types::discovery_query) {
        DiscoveryQueryMsg query;
        query.service = ServiceId(require_string(j, "service"));
        query.requester = NodeId(require_string(j, "requester"));
        return query;
    }
    throw CodecError("unknown message body type '" + type + "'");
}

namespace {

const char* body_type_of(const MessageBody& b) {
    if (std::holds_alternative<ServiceRequestMsg>(b)) return body_types::service_request;
    if (std::holds_alternative<ResultMsg>(b)) return body_types::result;
    if (std::holds_alternative<BehaviorTransferMsg>(b)) return body_types::behavior_transfer;
    if (std::holds_alternative<ReferralMsg>(b)) return body_types::referral;
    if (std::holds_alternative<RefusalMsg>(b)) return body_types::refusal;
    if (std::holds_alternative<AdvertisementMsg>(b)) return body_types::advertisement;
    return body_types::discovery_query;
}

} // namespace

Message make_message(std::string topic, NodeId sender, const MessageBody& body) {
    Message m;
    m.topic = std::move(topic);
    m.sender = std::move(sender);
    m.body_type = body_type_of(body);
    m.body = body_to_json(body).dump();
    return m;
}

std::optional<MessageBody> decode_body(const Message& m) {
    try {
        return body_from_json(m.body_type, Json::parse(m.body));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace selflet
