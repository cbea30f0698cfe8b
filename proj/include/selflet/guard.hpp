#pragma once
// The closed predicate language used on behavior transitions and rule
// conditions: comparisons over knowledge keys, trigger payload fields and
// the last action result, combined with all/any, plus the constant true.
//
// Evaluation is total: a comparison touching an absent key is false. Absent
// payload keys are additionally flagged so rule evaluation can distinguish
// "condition false" from "condition not applicable".

#include <functional>
#include <string>
#include <vector>

#include "selflet/core.hpp"

namespace selflet {

class KnowledgeBase;

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

struct GuardOperand {
    enum class Kind { Literal, KbKey, PayloadKey, LastResult };
    Kind kind = Kind::Literal;
    Scalar literal;
    std::string key;

    static GuardOperand lit(Scalar v) { return {Kind::Literal, std::move(v), {}}; }
    static GuardOperand kb(std::string k) { return {Kind::KbKey, {}, std::move(k)}; }
    static GuardOperand payload(std::string k) { return {Kind::PayloadKey, {}, std::move(k)}; }
    static GuardOperand result() { return {Kind::LastResult, {}, {}}; }

    bool operator==(const GuardOperand&) const = default;
};

struct GuardExpr {
    enum class Kind {
        Always,         // constant true
        Compare,        // lhs op rhs
        All,            // conjunction over children
        Any,            // disjunction over children
        ServiceLocal,   // operand names a service present in the local repository
        ServiceRemote,  // operand names a service absent from it
    };

    Kind kind = Kind::Always;
    CmpOp op = CmpOp::Eq;
    GuardOperand lhs, rhs;
    std::vector<GuardExpr> children;

    static GuardExpr always() { return {}; }
    static GuardExpr compare(GuardOperand l, CmpOp o, GuardOperand r);
    static GuardExpr all_of(std::vector<GuardExpr> cs);
    static GuardExpr any_of(std::vector<GuardExpr> cs);
    static GuardExpr service_local(GuardOperand service);
    static GuardExpr service_remote(GuardOperand service);

    bool operator==(const GuardExpr&) const = default;
};

struct GuardContext {
    const KnowledgeBase* kb = nullptr;
    const Payload* payload = nullptr;
    const Scalar* last_result = nullptr;
    // Locality test for Service{Local,Remote} atoms; unset atoms evaluate false.
    std::function<bool(const std::string&)> service_is_local;
};

struct GuardEval {
    bool value = false;
    bool missing_payload_key = false;  // an evaluated operand referenced an absent payload key
};

GuardEval eval_guard(const GuardExpr& g, const GuardContext& ctx);

std::optional<CmpOp> parse_cmp_op(const std::string& text);
std::string to_string(CmpOp op);

} // namespace selflet
