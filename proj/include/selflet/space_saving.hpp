#pragma once
// Space-Saving frequent-items summary: at most m counters of
// (item, count, error). An unmonitored item evicts the minimum counter and
// inherits its count as both estimate and error, which yields the usual
// guarantees: true_freq <= count and count - error <= true_freq, with every
// error bounded by floor(N/m).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace selflet {

struct SketchCounter {
    std::string item;
    std::uint64_t count = 0;
    std::uint64_t error = 0;
};

class SpaceSavingSketch {
public:
    explicit SpaceSavingSketch(std::size_t capacity);

    void observe(std::string_view item);
    void reset();

    std::uint64_t total() const { return total_; }
    std::size_t capacity() const { return capacity_; }
    const std::vector<SketchCounter>& counters() const { return counters_; }
    std::optional<SketchCounter> lookup(std::string_view item) const;

private:
    std::size_t capacity_;
    std::vector<SketchCounter> counters_;
    std::uint64_t total_ = 0;
};

struct FrequencyThresholds {
    std::uint64_t minimum_occurrences = 5;
    double frequency_threshold = 0.5;  // fraction in (0, 1]
};

enum class SketchCountMode {
    Guaranteed,  // report on count - error: no false positives
    Raw,         // report on the raw overestimate
};

struct FrequentItem {
    std::string item;
    std::uint64_t count = 0;  // the reported (guaranteed or raw) count
    double support = 0.0;     // count / total at query time
};

// Items whose reported count passes both the minimum-occurrences and the
// support threshold, sorted by count descending then item ascending.
std::vector<FrequentItem> frequent_items(const SpaceSavingSketch& sketch,
                                         const FrequencyThresholds& thresholds,
                                         SketchCountMode mode = SketchCountMode::Guaranteed);

} // namespace selflet
