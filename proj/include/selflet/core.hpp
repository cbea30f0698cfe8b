#pragma once
// Core vocabulary shared by every component: identities, scalar values,
// event payloads, simulation time.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>

namespace selflet {

// Simulation time in discrete ticks.
using Tick = std::int64_t;

// Scalar value as carried by knowledge entries, event payloads and ability
// results. monostate is the null value.
using Scalar = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

// Flat string->scalar map; the payload of every event and ability call.
using Payload = std::map<std::string, Scalar>;

// Identity of one node in the network.
struct NodeId {
    std::string value;

    NodeId() = default;
    explicit NodeId(std::string v) : value(std::move(v)) {}

    bool empty() const { return value.empty(); }
    auto operator<=>(const NodeId&) const = default;
};

// Name of a service; equality is exact string match.
struct ServiceId {
    std::string name;

    ServiceId() = default;
    explicit ServiceId(std::string n) : name(std::move(n)) {}

    bool empty() const { return name.empty(); }
    auto operator<=>(const ServiceId&) const = default;
};

inline bool is_null(const Scalar& s) { return std::holds_alternative<std::monostate>(s); }

// Numeric view of a scalar, if it has one.
inline std::optional<double> scalar_number(const Scalar& s) {
    if (const auto* i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&s)) return *d;
    return std::nullopt;
}

inline std::optional<std::string> scalar_string(const Scalar& s) {
    if (const auto* v = std::get_if<std::string>(&s)) return *v;
    return std::nullopt;
}

inline std::optional<std::int64_t> scalar_int(const Scalar& s) {
    if (const auto* i = std::get_if<std::int64_t>(&s)) return *i;
    return std::nullopt;
}

// Canonical text form, used for once-per firing keys and trace output.
std::string scalar_to_string(const Scalar& s);

std::optional<Scalar> payload_get(const Payload& p, const std::string& key);

} // namespace selflet
