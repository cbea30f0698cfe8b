#include "selflet/guard.hpp"

#include <sstream>

#include "selflet/knowledge.hpp"

namespace selflet {

std::string scalar_to_string(const Scalar& s) {
    if (std::holds_alternative<std::monostate>(s)) return "null";
    if (const auto* b = std::get_if<bool>(&s)) return *b ? "true" : "false";
    if (const auto* i = std::get_if<std::int64_t>(&s)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&s)) {
        std::ostringstream out;
        out << *d;
        return out.str();
    }
    return std::get<std::string>(s);
}

std::optional<Scalar> payload_get(const Payload& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) return std::nullopt;
    return it->second;
}

GuardExpr GuardExpr::compare(GuardOperand l, CmpOp o, GuardOperand r) {
    GuardExpr g;
    g.kind = Kind::Compare;
    g.op = o;
    g.lhs = std::move(l);
    g.rhs = std::move(r);
    return g;
}

GuardExpr GuardExpr::all_of(std::vector<GuardExpr> cs) {
    GuardExpr g;
    g.kind = Kind::All;
    g.children = std::move(cs);
    return g;
}

GuardExpr GuardExpr::any_of(std::vector<GuardExpr> cs) {
    GuardExpr g;
    g.kind = Kind::Any;
    g.children = std::move(cs);
    return g;
}

GuardExpr GuardExpr::service_local(GuardOperand service) {
    GuardExpr g;
    g.kind = Kind::ServiceLocal;
    g.lhs = std::move(service);
    return g;
}

GuardExpr GuardExpr::service_remote(GuardOperand service) {
    GuardExpr g;
    g.kind = Kind::ServiceRemote;
    g.lhs = std::move(service);
    return g;
}

namespace {

// Resolves an operand to a value; nullopt means the reference was absent.
std::optional<Scalar> resolve(const GuardOperand& op, const GuardContext& ctx, GuardEval& eval) {
    switch (op.kind) {
        case GuardOperand::Kind::Literal:
            return op.literal;
        case GuardOperand::Kind::KbKey:
            if (ctx.kb == nullptr) return std::nullopt;
            return ctx.kb->get(op.key);
        case GuardOperand::Kind::PayloadKey: {
            if (ctx.payload == nullptr) {
                eval.missing_payload_key = true;
                return std::nullopt;
            }
            auto v = payload_get(*ctx.payload, op.key);
            if (!v) eval.missing_payload_key = true;
            return v;
        }
        case GuardOperand::Kind::LastResult:
            if (ctx.last_result == nullptr) return Scalar{};
            return *ctx.last_result;
    }
    return std::nullopt;
}

// Total comparison over scalars. Numbers compare numerically across int and
// double; strings lexicographically; bools and nulls support only equality.
// Mismatched kinds are equal never, unequal always, ordered never.
bool compare_scalars(const Scalar& a, CmpOp op, const Scalar& b) {
    const auto an = scalar_number(a);
    const auto bn = scalar_number(b);
    if (an && bn) {
        switch (op) {
            case CmpOp::Eq: return *an == *bn;
            case CmpOp::Ne: return *an != *bn;
            case CmpOp::Lt: return *an < *bn;
            case CmpOp::Le: return *an <= *bn;
            case CmpOp::Gt: return *an > *bn;
            case CmpOp::Ge: return *an >= *bn;
        }
        return false;
    }
    if (a.index() != b.index()) return op == CmpOp::Ne;
    if (const auto* as = std::get_if<std::string>(&a)) {
        const auto& bs = std::get<std::string>(b);
        switch (op) {
            case CmpOp::Eq: return *as == bs;
            case CmpOp::Ne: return *as != bs;
            case CmpOp::Lt: return *as < bs;
            case CmpOp::Le: return *as <= bs;
            case CmpOp::Gt: return *as > bs;
            case CmpOp::Ge: return *as >= bs;
        }
        return false;
    }
    const bool same = a == b;
    if (op == CmpOp::Eq) return same;
    if (op == CmpOp::Ne) return !same;
    return false;
}

} // namespace

GuardEval eval_guard(const GuardExpr& g, const GuardContext& ctx) {
    GuardEval eval;
    switch (g.kind) {
        case GuardExpr::Kind::Always:
            eval.value = true;
            return eval;
        case GuardExpr::Kind::Compare: {
            auto lhs = resolve(g.lhs, ctx, eval);
            auto rhs = resolve(g.rhs, ctx, eval);
            eval.value = lhs && rhs && compare_scalars(*lhs, g.op, *rhs);
            return eval;
        }
        case GuardExpr::Kind::All: {
            eval.value = true;
            for (const auto& child : g.children) {
                GuardEval sub = eval_guard(child, ctx);
                eval.missing_payload_key |= sub.missing_payload_key;
                if (!sub.value) {
                    eval.value = false;
                    return eval;
                }
            }
            return eval;
        }
        case GuardExpr::Kind::Any: {
            eval.value = false;
            for (const auto& child : g.children) {
                GuardEval sub = eval_guard(child, ctx);
                eval.missing_payload_key |= sub.missing_payload_key;
                if (sub.value) {
                    eval.value = true;
                    return eval;
                }
            }
            return eval;
        }
        case GuardExpr::Kind::ServiceLocal:
        case GuardExpr::Kind::ServiceRemote: {
            auto name = resolve(g.lhs, ctx, eval);
            if (!name || !ctx.service_is_local) return eval;
            const bool local = ctx.service_is_local(scalar_to_string(*name));
            eval.value = g.kind == GuardExpr::Kind::ServiceLocal ? local : !local;
            return eval;
        }
    }
    return eval;
}

std::optional<CmpOp> parse_cmp_op(const std::string& text) {
    if (text == "==") return CmpOp::Eq;
    if (text == "!=") return CmpOp::Ne;
    if (text == "<") return CmpOp::Lt;
    if (text == "<=") return CmpOp::Le;
    if (text == ">") return CmpOp::Gt;
    if (text == ">=") return CmpOp::Ge;
    return std::nullopt;
}

std::string to_string(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "==";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
    }
    return "==";
}

} // namespace selflet
