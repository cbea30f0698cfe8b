#pragma once
// Wire messages exchanged between nodes through the broker. Bodies travel
// serialized (same JSON schema as scenario files) so a message is exactly
// what a real transport would carry.

#include <variant>
#include <vector>

#include "selflet/behavior.hpp"
#include "selflet/core.hpp"
#include "selflet/offer_modes.hpp"

namespace selflet {

namespace topics {
inline constexpr const char* broadcast = "selflet/broadcast";
std::string node_inbox(const NodeId& id);
} // namespace topics

struct ServiceRequestMsg {
    ServiceId service;
    NodeId requester;
    AskMode mode = AskMode::Do;
    std::int64_t invocation = 0;
    std::optional<std::int64_t> goal;  // requester-side goal root, for tracing
    bool operator==(const ServiceRequestMsg&) const = default;
};

struct ResultMsg {
    ServiceId service;
    NodeId provider;
    std::int64_t invocation = 0;
    Scalar result;
    OfferModeSet provider_modes;  // refreshes the requester's provider list
    bool operator==(const ResultMsg&) const = default;
};

struct BehaviorTransferMsg {
    ServiceId service;
    NodeId provider;
    std::int64_t invocation = 0;
    Behavior behavior;  // the service's behavior only, never its dependencies
    OfferModeSet provider_modes;
    bool operator==(const BehaviorTransferMsg&) const = default;
};

struct ProviderRef {
    NodeId node;
    OfferModeSet modes;
    bool operator==(const ProviderRef&) const = default;
};

struct ReferralMsg {
    ServiceId service;
    NodeId provider;
    std::int64_t invocation = 0;
    std::vector<ProviderRef> providers;
    bool operator==(const ReferralMsg&) const = default;
};

struct RefusalMsg {
    ServiceId service;
    NodeId provider;
    std::int64_t invocation = 0;
    std::string reason;
    bool operator==(const RefusalMsg&) const = default;
};

struct AdvertisedService {
    ServiceId service;
    OfferModeSet modes;
    bool operator==(const AdvertisedService&) const = default;
};

struct AdvertisementMsg {
    NodeId provider;
    std::vector<AdvertisedService> services;
    bool operator==(const AdvertisementMsg&) const = default;
};

struct DiscoveryQueryMsg {
    ServiceId service;
    NodeId requester;
    bool operator==(const DiscoveryQueryMsg&) const = default;
};

using MessageBody = std::variant<ServiceRequestMsg, ResultMsg, BehaviorTransferMsg,
                                 ReferralMsg, RefusalMsg, AdvertisementMsg, DiscoveryQueryMsg>;

namespace body_types {
inline constexpr const char* service_request = "service_request";
inline constexpr const char* result = "result";
inline constexpr const char* behavior_transfer = "behavior_transfer";
inline constexpr const char* referral = "referral";
inline constexpr const char* refusal = "refusal";
inline constexpr const char* advertisement = "advertisement";
inline constexpr const char* discovery_query = "discovery_query";
} // namespace body_types

struct Message {
    std::string topic;
    NodeId sender;
    std::string body_type;
    std::string body;  // serialized body JSON
};

// Envelope helpers; encoding lives in the JSON codec.
Message make_message(std::string topic, NodeId sender, const MessageBody& body);
std::optional<MessageBody> decode_body(const Message& m);

} // namespace selflet
