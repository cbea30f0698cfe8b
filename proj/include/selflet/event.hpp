#pragma once
// Event: the universal unit of communication inside a node and between nodes.

#include "selflet/core.hpp"

namespace selflet {

struct Event {
    std::string kind;
    Payload payload;
    std::string source;   // NodeId or component name
    Tick timestamp = 0;

    bool operator==(const Event&) const = default;
};

// Well-known event kinds. Components publish and subscribe by these names;
// scenario rules may reference them as trigger patterns.
namespace events {
inline constexpr const char* service_needed = "service_needed";
inline constexpr const char* service_completed = "service_completed";
inline constexpr const char* service_failed = "service_failed";
inline constexpr const char* service_request_out = "service_request_out";
inline constexpr const char* service_request_in = "service_request_in";
inline constexpr const char* service_run_served = "service_run_served";
inline constexpr const char* service_run_serve_failed = "service_run_serve_failed";
inline constexpr const char* main_iteration_completed = "main_iteration_completed";
inline constexpr const char* behavior_stalled = "behavior_stalled";
inline constexpr const char* service_installed = "service_installed";
inline constexpr const char* advertisement_received = "advertisement_received";
inline constexpr const char* discovery_query_out = "discovery_query_out";
inline constexpr const char* goal_completed = "goal_completed";
inline constexpr const char* action_applied = "action_applied";
inline constexpr const char* action_failed = "action_failed";
inline constexpr const char* frequent_service = "prediction.frequent_service";
} // namespace events

} // namespace selflet
