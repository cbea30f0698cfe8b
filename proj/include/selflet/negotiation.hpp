#pragma once
// Negotiation manager: resolves service needs (locally, against a known
// provider, or by discovery), answers peers' requests according to offer
// modes, and applies teach transfers. One reply per delivered request.

#include <functional>
#include <map>
#include <set>

#include "selflet/behavior_engine.hpp"
#include "selflet/knowledge.hpp"
#include "selflet/message.hpp"

namespace selflet {

struct ResolutionLocal {};
struct ResolutionRemote {
    NodeId provider;
    AskMode mode = AskMode::Do;
};
struct ResolutionDiscover {};
using Resolution = std::variant<ResolutionLocal, ResolutionRemote, ResolutionDiscover>;

class NegotiationManager {
public:
    struct Deps {
        KnowledgeState* knowledge = nullptr;
        BehaviorEngine* engine = nullptr;
        std::function<bool(const Message&)> send;
        std::function<void(Event)> emit;
        std::function<Tick()> now;
        std::function<std::int64_t()> next_invocation;
        std::optional<Tick> provider_expiry;  // unset: provider entries never expire
    };

    explicit NegotiationManager(Deps deps);

    // --- ask side ---------------------------------------------------------

    // Pure resolution: local if executable here, else the best known
    // provider under the current ask-mode policy, else discovery.
    Resolution resolve_need(const ServiceId& service,
                            const std::set<NodeId>& excluded = {}) const;

    // The compatible candidate with the most recent last_seen; ties broken by
    // lexicographic node id. Null when nothing is compatible.
    static const ProviderEntry* select_provider(const std::vector<ProviderEntry>& candidates,
                                                AskMode need_mode,
                                                const std::set<NodeId>& excluded,
                                                std::optional<Tick> expiry, Tick now);

    // Entry point for "service_needed" events.
    void on_service_needed(const Event& e);

    // Standalone teach acquisition, issued when the ask mode for a non-local
    // service is switched to Teach. Carries no goal attribution.
    void acquire(const ServiceId& service);

    // --- answer side ------------------------------------------------------

    void on_wire(const Message& m);
    void handle_request(const ServiceRequestMsg& req);
    void apply_teach(const BehaviorTransferMsg& transfer);

    // --- policy -----------------------------------------------------------

    void set_ask_mode(const ServiceId& service, AskMode mode);
    AskMode ask_mode(const ServiceId& service) const;
    const std::map<ServiceId, AskMode>& ask_modes() const { return ask_modes_; }

    void set_peer_enabled(const NodeId& node, bool enabled);
    bool peer_enabled(const NodeId& node) const { return disabled_peers_.count(node) == 0; }

    // Pending asks/discoveries; used for stall detection.
    std::size_t open_needs() const { return needs_.size(); }
    std::uint64_t do_requests_answered() const { return do_requests_answered_; }

    // Called by the node when the engine reports a remote-origin run done.
    void on_run_served(const Event& e);
    void on_run_serve_failed(const Event& e);

private:
    enum class Phase { AwaitingReply, AwaitingDiscovery };

    struct NeedState {
        ServiceId service;
        std::optional<std::int64_t> goal;
        Phase phase = Phase::AwaitingReply;
        AskMode mode = AskMode::Do;         // mode of the outstanding ask
        bool acquisition = false;           // teach acquisition, no goal to finish
        bool discovered = false;            // a discovery round was already spent
        bool referred = false;              // a know-who referral was consumed
        std::set<NodeId> refused;
    };

    void dispatch_need(std::int64_t invocation, NeedState state);
    void send_request(std::int64_t invocation, NeedState& state, const NodeId& provider, AskMode mode);
    void start_discovery(std::int64_t invocation, NeedState& state);
    void fail_need(std::int64_t invocation, const NeedState& state, const std::string& reason);
    void absorb_provider(const ServiceId& service, const NodeId& node, OfferModeSet modes);
    void retry_discoveries(const ServiceId& service);
    void reply(const NodeId& to, const MessageBody& body);

    void on_result(const ResultMsg& msg);
    void on_transfer(const BehaviorTransferMsg& msg);
    void on_referral(const ReferralMsg& msg);
    void on_refusal(const RefusalMsg& msg);
    void on_advertisement(const AdvertisementMsg& msg);
    void on_discovery_query(const DiscoveryQueryMsg& msg);

    AskMode effective_mode(const NeedState& state) const;

    Deps deps_;
    std::map<ServiceId, AskMode> ask_modes_;
    std::map<std::int64_t, NeedState> needs_;
    std::set<NodeId> disabled_peers_;
    std::uint64_t do_requests_answered_ = 0;
};

} // namespace selflet
