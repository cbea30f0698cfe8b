#pragma once
// Simulated inter-node broker: topic-based fan-out with one global FIFO,
// reliable delivery, and the message meter the metrics report reads.
// Stands in for a distributed dispatcher; everything stays in-process.

#include <deque>
#include <functional>
#include <map>
#include <set>

#include "selflet/message.hpp"

namespace selflet {

enum class CountingMode {
    RequestsOnly,  // service-request bodies only (do/teach/know-who asks)
    Deliveries,    // every inter-node delivery, including replies, queries, ads
};

std::optional<CountingMode> parse_counting_mode(const std::string& text);
std::string to_string(CountingMode mode);

class SimBroker {
public:
    using Handler = std::function<void(const Message&)>;

    void register_node(const NodeId& id, Handler handler);
    bool is_registered(const NodeId& id) const;
    void subscribe(const NodeId& id, const std::string& topic);

    // Enqueues the message for every subscriber of the topic except the
    // sender and bumps the meter by the number of recipients. Unregistered
    // senders are rejected.
    bool send(const Message& m);

    // Delivers the globally oldest pending message. Returns false when idle.
    bool deliver_next();

    std::size_t pending() const { return queue_.size(); }

    std::uint64_t total_deliveries() const { return total_deliveries_; }
    std::uint64_t request_deliveries() const { return request_deliveries_; }
    std::uint64_t metered(CountingMode mode) const {
        return mode == CountingMode::RequestsOnly ? request_deliveries_ : total_deliveries_;
    }

private:
    std::map<NodeId, Handler> nodes_;
    std::map<std::string, std::set<NodeId>> subscriptions_;  // topic -> subscribers
    std::deque<std::pair<NodeId, Message>> queue_;           // recipient + message
    std::uint64_t total_deliveries_ = 0;
    std::uint64_t request_deliveries_ = 0;
};

} // namespace selflet
