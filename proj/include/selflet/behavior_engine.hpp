#pragma once
// Executes behavior instances for one node: the main behavior loops forever
// (restarting after a configurable delay), service runs are started on
// demand and interleaved with it round-robin at micro-step granularity.
//
// A step either performs the current state's action or takes a transition.
// InvokeService suspends the instance until the matching completion arrives.

#include <deque>
#include <functional>
#include <list>
#include <map>
#include <variant>

#include "selflet/abilities.hpp"
#include "selflet/behavior.hpp"
#include "selflet/event.hpp"
#include "selflet/knowledge.hpp"

namespace selflet {

// Local need: the instance serves a service_needed emitted on this node.
struct RunOriginLocal {
    std::int64_t need_invocation = 0;
    std::optional<std::int64_t> goal;
};

// Remote request: completion must be answered back to the requester.
struct RunOriginRemote {
    NodeId requester;
    std::int64_t request_invocation = 0;
};

using RunOrigin = std::variant<RunOriginLocal, RunOriginRemote>;

enum class InstanceStatus { Runnable, AwaitingService, Sleeping, Finished, Stalled };

enum class InstanceKind { Main, ServiceRun };

struct BehaviorInstance {
    std::int64_t id = 0;  // unique invocation id of this instance
    InstanceKind kind = InstanceKind::ServiceRun;
    std::shared_ptr<const Behavior> behavior;
    std::string current_state;
    bool action_done = false;
    Scalar last_result;
    InstanceStatus status = InstanceStatus::Runnable;
    std::int64_t awaiting = 0;  // sub-need invocation while AwaitingService
    std::optional<ServiceId> service;
    std::optional<RunOrigin> origin;
    std::optional<std::int64_t> goal;  // propagated goal root for tracing
    Tick restart_delay = 1;            // Main only
    Tick wake_at = 0;
    std::uint64_t steps_this_tick = 0;
    std::uint64_t iterations = 0;  // completed main iterations
};

class BehaviorEngine {
public:
    struct Deps {
        BehaviorRepository* behaviors = nullptr;
        AbilityRegistry* abilities = nullptr;
        KnowledgeBase* kb = nullptr;
        std::function<void(Event)> emit;
        std::function<std::int64_t()> next_invocation;
        std::function<Tick()> now;
    };

    struct StartResult {
        bool started = false;
        std::int64_t instance = 0;
        std::string reason;
    };

    explicit BehaviorEngine(Deps deps);

    // Fails with "service not locally available" when the behavior is absent;
    // the negotiation manager turns that into a remote ask.
    StartResult start_service_run(const ServiceId& service, const std::string& behavior_id,
                                  RunOrigin origin);
    StartResult start_main(const std::string& behavior_id, Tick restart_delay);

    // One micro-step of one instance. Returns true if it progressed.
    bool step(std::int64_t instance_id);

    // One round-robin pass offering a step to every runnable instance.
    bool sweep();

    // Wakes sleeping mains whose delay elapsed and resets step budgets.
    void begin_tick(Tick tick);

    // Completion routing for a suspended instance. A mismatched invocation id
    // is ignored (the completion belongs to someone else).
    void resume(std::int64_t need_invocation, const Scalar& result, bool ok);

    const BehaviorInstance* find(std::int64_t instance_id) const;
    std::size_t live_count() const;
    bool has_suspended() const;
    std::vector<const BehaviorInstance*> instances() const;

    // Budget before an instance is declared stalled within one tick.
    static constexpr std::uint64_t kMaxStepsPerTick = 100000;
    // Live-instance cap; further starts are refused so runaway recursion
    // degrades into pending needs instead of unbounded growth.
    static constexpr std::size_t kMaxLiveInstances = 100000;

private:
    BehaviorInstance* find_mut(std::int64_t instance_id);
    std::int64_t enqueue_instance(BehaviorInstance inst);
    bool step_impl(BehaviorInstance& inst);
    void perform_action(BehaviorInstance& inst, const State& state);
    void take_transition(BehaviorInstance& inst, const State& state);
    void complete(BehaviorInstance& inst);
    void stall(BehaviorInstance& inst, const State& state);

    Deps deps_;
    std::list<BehaviorInstance> instances_;  // creation order
    std::map<std::int64_t, std::list<BehaviorInstance>::iterator> by_id_;
    std::map<std::int64_t, std::int64_t> waiter_by_need_;  // need invocation -> instance id
    std::deque<std::int64_t> runnable_;  // hint queue; entries checked before stepping
    std::size_t live_ = 0;               // instances not yet Finished
};

} // namespace selflet
