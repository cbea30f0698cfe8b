#pragma once
// In-node publish/subscribe. Subscriptions match event kinds exactly or by
// prefix with a trailing '*'. Deliveries drain from a single FIFO queue, so
// per-recipient order equals publication order.

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "selflet/event.hpp"

namespace selflet {

struct Subscription {
    std::string subscriber;
    std::string pattern;
};

class Dispatcher {
public:
    using Handler = std::function<void(const Event&)>;

    // Duplicate (subscriber, pattern) pairs are idempotent: the original
    // subscription is kept. Empty patterns are rejected.
    const Subscription& subscribe(std::string subscriber, std::string pattern, Handler handler);

    // Enqueues the event once per matching subscriber (a subscriber with
    // several matching patterns still receives one copy). Never blocks.
    void publish(const Event& e);

    // Delivers the globally oldest pending (event, recipient). Returns false
    // when the queue is empty.
    bool deliver_next();

    std::size_t pending() const { return queue_.size(); }
    std::size_t subscription_count() const { return subs_.size(); }

    static bool pattern_matches(std::string_view pattern, std::string_view kind);

private:
    struct Entry {
        Subscription sub;
        Handler handler;
    };
    // Deque: handlers may subscribe during their own delivery, so entry
    // references must stay stable.
    std::deque<Entry> subs_;
    std::deque<std::pair<Event, std::size_t>> queue_;  // event + subscription index
};

} // namespace selflet
