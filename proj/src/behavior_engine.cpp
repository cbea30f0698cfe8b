#include "selflet/behavior_engine.hpp"

#include <set>

namespace selflet {

BehaviorEngine::BehaviorEngine(Deps deps) : deps_(std::move(deps)) {}

std::int64_t BehaviorEngine::enqueue_instance(BehaviorInstance inst) {
    const std::int64_t id = inst.id;
    instances_.push_back(std::move(inst));
    by_id_[id] = std::prev(instances_.end());
    runnable_.push_back(id);
    ++live_;
    return id;
}

BehaviorEngine::StartResult BehaviorEngine::start_service_run(const ServiceId& service,
                                                              const std::string& behavior_id,
                                                              RunOrigin origin) {
    auto behavior = deps_.behaviors->get(behavior_id);
    if (!behavior) return {false, 0, "service not locally available"};
    if (live_count() >= kMaxLiveInstances) return {false, 0, "instance limit exceeded"};

    BehaviorInstance inst;
    inst.id = deps_.next_invocation();
    inst.kind = InstanceKind::ServiceRun;
    inst.behavior = std::move(behavior);  // snapshot; later edits apply to new instances
    inst.current_state = inst.behavior->initial;
    inst.service = service;
    inst.origin = origin;
    if (const auto* local = std::get_if<RunOriginLocal>(&origin)) inst.goal = local->goal;
    return {true, enqueue_instance(std::move(inst)), ""};
}

BehaviorEngine::StartResult BehaviorEngine::start_main(const std::string& behavior_id,
                                                       Tick restart_delay) {
    auto behavior = deps_.behaviors->get(behavior_id);
    if (!behavior) return {false, 0, "behavior not in repository"};
    if (live_count() >= kMaxLiveInstances) return {false, 0, "instance limit exceeded"};

    BehaviorInstance inst;
    inst.id = deps_.next_invocation();
    inst.kind = InstanceKind::Main;
    inst.behavior = std::move(behavior);
    inst.current_state = inst.behavior->initial;
    inst.restart_delay = restart_delay > 0 ? restart_delay : 1;
    return {true, enqueue_instance(std::move(inst)), ""};
}

const BehaviorInstance* BehaviorEngine::find(std::int64_t instance_id) const {
    auto it = by_id_.find(instance_id);
    return it == by_id_.end() ? nullptr : &*it->second;
}

BehaviorInstance* BehaviorEngine::find_mut(std::int64_t instance_id) {
    auto it = by_id_.find(instance_id);
    return it == by_id_.end() ? nullptr : &*it->second;
}

std::size_t BehaviorEngine::live_count() const { return live_; }

bool BehaviorEngine::has_suspended() const { return !waiter_by_need_.empty(); }

std::vector<const BehaviorInstance*> BehaviorEngine::instances() const {
    std::vector<const BehaviorInstance*> out;
    for (const auto& inst : instances_) out.push_back(&inst);
    return out;
}

void BehaviorEngine::begin_tick(Tick tick) {
    for (auto it = instances_.begin(); it != instances_.end();) {
        if (it->status == InstanceStatus::Finished) {
            by_id_.erase(it->id);
            it = instances_.erase(it);
            continue;
        }
        it->steps_this_tick = 0;
        if (it->status == InstanceStatus::Sleeping && it->wake_at <= tick) {
            it->status = InstanceStatus::Runnable;
            runnable_.push_back(it->id);
        }
        ++it;
    }
}

bool BehaviorEngine::step(std::int64_t instance_id) {
    BehaviorInstance* inst = find_mut(instance_id);
    if (inst == nullptr || inst->status != InstanceStatus::Runnable) return false;
    return step_impl(*inst);
}

bool BehaviorEngine::sweep() {
    // One pass: every instance runnable at the start of the pass is offered
    // exactly one step, in queue (creation/wake) order.
    bool progressed = false;
    std::size_t round = runnable_.size();
    std::set<std::int64_t> stepped;
    while (round-- > 0) {
        const std::int64_t id = runnable_.front();
        runnable_.pop_front();
        BehaviorInstance* inst = find_mut(id);
        if (inst == nullptr || inst->status != InstanceStatus::Runnable) continue;  // stale entry
        if (!stepped.insert(id).second) {
            runnable_.push_back(id);
            continue;
        }
        progressed |= step_impl(*inst);
        if (inst->status == InstanceStatus::Runnable) runnable_.push_back(id);
    }
    return progressed;
}

bool BehaviorEngine::step_impl(BehaviorInstance& inst) {
    if (++inst.steps_this_tick > kMaxStepsPerTick) {
        Event e;
        e.kind = events::behavior_stalled;
        e.payload = {{"behavior", inst.behavior->id},
                     {"state", inst.current_state},
                     {"invocation", inst.id},
                     {"reason", std::string("step budget exhausted")}};
        e.timestamp = deps_.now();
        deps_.emit(std::move(e));
        const State* state = inst.behavior->find_state(inst.current_state);
        stall(inst, state ? *state : State{});
        return false;
    }

    const State* state = inst.behavior->find_state(inst.current_state);
    if (state == nullptr) {  // unreachable for validated behaviors
        stall(inst, State{});
        return false;
    }
    if (!inst.action_done) {
        perform_action(inst, *state);
    } else {
        take_transition(inst, *state);
    }
    return true;
}

void BehaviorEngine::perform_action(BehaviorInstance& inst, const State& state) {
    inst.action_done = true;
    if (const auto* invoke = std::get_if<ActionInvokeService>(&state.action)) {
        const std::int64_t need = deps_.next_invocation();
        inst.awaiting = need;
        inst.status = InstanceStatus::AwaitingService;
        waiter_by_need_[need] = inst.id;
        Event e;
        e.kind = events::service_needed;
        e.payload = {{"service", invoke->service.name}, {"invocation", need}};
        if (inst.goal) e.payload["goal"] = *inst.goal;
        e.timestamp = deps_.now();
        deps_.emit(std::move(e));
        return;
    }
    if (const auto* ability = std::get_if<ActionInvokeAbility>(&state.action)) {
        const Ability* fn = deps_.abilities->find(ability->name);
        if (fn == nullptr) {
            Event e;
            e.kind = "diag.missing_ability";
            e.payload = {{"ability", ability->name},
                         {"behavior", inst.behavior->id},
                         {"state", state.id}};
            e.timestamp = deps_.now();
            deps_.emit(std::move(e));
            inst.last_result = Scalar{};
            return;
        }
        inst.last_result = (*fn)(ability->args, *deps_.kb);
        return;
    }
    // Idle keeps the previous result so chained guards can still read it.
}

void BehaviorEngine::take_transition(BehaviorInstance& inst, const State& state) {
    if (state.terminal) {
        complete(inst);
        return;
    }
    GuardContext ctx;
    ctx.kb = deps_.kb;
    ctx.last_result = &inst.last_result;
    for (const auto& t : inst.behavior->transitions) {
        if (t.from != inst.current_state) continue;
        if (!eval_guard(t.guard, ctx).value) continue;
        inst.current_state = t.to;  // first enabled transition wins
        inst.action_done = false;
        return;
    }
    Event e;
    e.kind = events::behavior_stalled;
    e.payload = {{"behavior", inst.behavior->id},
                 {"state", inst.current_state},
                 {"invocation", inst.id},
                 {"reason", std::string("no enabled transition")}};
    e.timestamp = deps_.now();
    deps_.emit(std::move(e));
    stall(inst, state);
}

void BehaviorEngine::complete(BehaviorInstance& inst) {
    const Tick now = deps_.now();
    if (inst.kind == InstanceKind::Main) {
        ++inst.iterations;
        Event e;
        e.kind = events::main_iteration_completed;
        e.payload = {{"behavior", inst.behavior->id}, {"invocation", inst.id}};
        e.timestamp = now;
        deps_.emit(std::move(e));
        // The main behavior is continuous: restart at the initial state after
        // the configured delay.
        inst.current_state = inst.behavior->initial;
        inst.action_done = false;
        inst.last_result = Scalar{};
        inst.status = InstanceStatus::Sleeping;
        inst.wake_at = now + inst.restart_delay;
        return;
    }

    inst.status = InstanceStatus::Finished;
    --live_;
    Event e;
    e.timestamp = now;
    if (const auto* local = std::get_if<RunOriginLocal>(&*inst.origin)) {
        e.kind = events::service_completed;
        e.payload = {{"service", inst.service->name},
                     {"invocation", local->need_invocation},
                     {"result", inst.last_result}};
        if (local->goal) e.payload["goal"] = *local->goal;
    } else {
        const auto& remote = std::get<RunOriginRemote>(*inst.origin);
        e.kind = events::service_run_served;
        e.payload = {{"service", inst.service->name},
                     {"requester", remote.requester.value},
                     {"invocation", remote.request_invocation},
                     {"result", inst.last_result}};
    }
    deps_.emit(std::move(e));
}

void BehaviorEngine::stall(BehaviorInstance& inst, const State&) {
    inst.status = InstanceStatus::Stalled;
    if (inst.kind == InstanceKind::Main || !inst.origin) return;

    // Unblock whoever is waiting on this run.
    Event e;
    e.timestamp = deps_.now();
    if (const auto* local = std::get_if<RunOriginLocal>(&*inst.origin)) {
        e.kind = events::service_failed;
        e.payload = {{"service", inst.service->name},
                     {"invocation", local->need_invocation},
                     {"reason", std::string("behavior stalled")}};
        if (local->goal) e.payload["goal"] = *local->goal;
    } else {
        const auto& remote = std::get<RunOriginRemote>(*inst.origin);
        e.kind = events::service_run_serve_failed;
        e.payload = {{"service", inst.service->name},
                     {"requester", remote.requester.value},
                     {"invocation", remote.request_invocation},
                     {"reason", std::string("behavior stalled")}};
    }
    deps_.emit(std::move(e));
}

void BehaviorEngine::resume(std::int64_t need_invocation, const Scalar& result, bool ok) {
    auto waiter = waiter_by_need_.find(need_invocation);
    if (waiter == waiter_by_need_.end()) return;  // the completion belongs to someone else
    BehaviorInstance* inst = find_mut(waiter->second);
    waiter_by_need_.erase(waiter);
    if (inst == nullptr || inst->status != InstanceStatus::AwaitingService) return;
    inst->status = InstanceStatus::Runnable;
    inst->awaiting = 0;
    inst->last_result = ok ? result : Scalar{};
    runnable_.push_back(inst->id);
}

} // namespace selflet
