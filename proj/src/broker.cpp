#include "selflet/broker.hpp"

namespace selflet {

std::optional<CountingMode> parse_counting_mode(const std::string& text) {
    if (text == "requests_only") return CountingMode::RequestsOnly;
    if (text == "deliveries") return CountingMode::Deliveries;
    return std::nullopt;
}

std::string to_string(CountingMode mode) {
    return mode == CountingMode::RequestsOnly ? "requests_only" : "deliveries";
}

void SimBroker::register_node(const NodeId& id, Handler handler) {
    nodes_[id] = std::move(handler);
}

bool SimBroker::is_registered(const NodeId& id) const { return nodes_.count(id) != 0; }

void SimBroker::subscribe(const NodeId& id, const std::string& topic) {
    subscriptions_[topic].insert(id);
}

bool SimBroker::send(const Message& m) {
    if (!is_registered(m.sender)) return false;
    auto it = subscriptions_.find(m.topic);
    if (it == subscriptions_.end()) return true;  // no recipients, message dropped
    std::uint64_t recipients = 0;
    for (const auto& node : it->second) {
        if (node == m.sender) continue;
        queue_.emplace_back(node, m);
        ++recipients;
    }
    total_deliveries_ += recipients;
    if (m.body_type == body_types::service_request) request_deliveries_ += recipients;
    return true;
}

bool SimBroker::deliver_next() {
    if (queue_.empty()) return false;
    auto [recipient, message] = std::move(queue_.front());
    queue_.pop_front();
    auto it = nodes_.find(recipient);
    if (it != nodes_.end()) it->second(message);
    return true;
}

} // namespace selflet
