#pragma once
// Deterministic discrete-event harness. Each tick: due advertisements go
// out, deliveries drain, due generators start goals, then nodes and broker
// run to quiescence. The same scenario and seed always produce the same
// report, byte for byte.

#include <random>

#include "selflet/scenario.hpp"

namespace selflet {

struct SeriesPoint {
    Tick tick = 0;  // state after this many ticks have executed
    std::uint64_t messages_total = 0;
    std::map<NodeId, std::uint64_t> goals;

    bool operator==(const SeriesPoint&) const = default;
};

struct TraceEntry {
    Tick tick = 0;
    NodeId node;
    Event event;
};

struct MetricsReport {
    std::string scenario;
    std::uint64_t seed = 0;
    Tick duration = 0;
    CountingMode counting_mode = CountingMode::RequestsOnly;
    bool policy_enabled = true;
    std::uint64_t total_messages = 0;
    std::optional<Tick> convergence_tick;  // last tick at which the total grew
    bool stalled = false;
    std::map<NodeId, NodeSnapshot> nodes;
    std::vector<SeriesPoint> series;  // duration + 1 points, index 0 is the start
    std::vector<TraceEntry> trace;    // only when recording was requested; not exported
};

struct RunOptions {
    bool record_trace = false;
    std::function<void(const TraceEntry&)> trace_sink;  // streaming hook, optional
};

MetricsReport run(const Scenario& scenario, const RunOptions& options = {});

enum class ExportFormat { Csv, Json };
std::optional<ExportFormat> parse_export_format(const std::string& text);

Json metrics_to_json(const MetricsReport& r);
MetricsReport metrics_from_json(const Json& j);
std::string metrics_to_csv(const MetricsReport& r);

// Writes the chosen format; throws std::runtime_error on I/O failure.
void export_metrics(const MetricsReport& r, ExportFormat format,
                    const std::filesystem::path& path);

bool reports_equal(const MetricsReport& a, const MetricsReport& b);  // trace excluded

} // namespace selflet
