#include "selflet/dispatcher.hpp"

#include <set>
#include <stdexcept>

namespace selflet {

bool Dispatcher::pattern_matches(std::string_view pattern, std::string_view kind) {
    if (!pattern.empty() && pattern.back() == '*') {
        const auto prefix = pattern.substr(0, pattern.size() - 1);
        return kind.substr(0, prefix.size()) == prefix;
    }
    return pattern == kind;
}

const Subscription& Dispatcher::subscribe(std::string subscriber, std::string pattern,
                                          Handler handler) {
    if (pattern.empty()) throw std::invalid_argument("subscription pattern must not be empty");
    for (const auto& entry : subs_) {
        if (entry.sub.subscriber == subscriber && entry.sub.pattern == pattern)
            return entry.sub;  // idempotent
    }
    subs_.push_back(Entry{Subscription{std::move(subscriber), std::move(pattern)}, std::move(handler)});
    return subs_.back().sub;
}

void Dispatcher::publish(const Event& e) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        if (!pattern_matches(subs_[i].sub.pattern, e.kind)) continue;
        if (!seen.insert(subs_[i].sub.subscriber).second) continue;  // one copy per subscriber
        queue_.emplace_back(e, i);
    }
}

bool Dispatcher::deliver_next() {
    if (queue_.empty()) return false;
    auto [event, index] = std::move(queue_.front());
    queue_.pop_front();
    subs_[index].handler(event);
    return true;
}

} // namespace selflet
