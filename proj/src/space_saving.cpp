#include "selflet/space_saving.hpp"

#include <algorithm>
#include <stdexcept>

namespace selflet {

SpaceSavingSketch::SpaceSavingSketch(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("sketch capacity must be positive");
    counters_.reserve(capacity);
}

void SpaceSavingSketch::observe(std::string_view item) {
    ++total_;
    for (auto& c : counters_) {
        if (c.item == item) {
            ++c.count;
            return;
        }
    }
    if (counters_.size() < capacity_) {
        counters_.push_back(SketchCounter{std::string(item), 1, 0});
        return;
    }
    // Evict the minimum counter; among equals, the lexicographically smallest
    // item goes (fixed rule, keeps runs reproducible). The newcomer inherits
    // the evicted count as its error.
    SketchCounter* victim = &counters_.front();
    for (auto& c : counters_) {
        if (c.count < victim->count || (c.count == victim->count && c.item < victim->item))
            victim = &c;
    }
    const std::uint64_t floor = victim->count;
    victim->item = std::string(item);
    victim->count = floor + 1;
    victim->error = floor;
}

void SpaceSavingSketch::reset() {
    counters_.clear();
    total_ = 0;
}

std::optional<SketchCounter> SpaceSavingSketch::lookup(std::string_view item) const {
    for (const auto& c : counters_) {
        if (c.item == item) return c;
    }
    return std::nullopt;
}

std::vector<FrequentItem> frequent_items(const SpaceSavingSketch& sketch,
                                         const FrequencyThresholds& thresholds,
                                         SketchCountMode mode) {
    std::vector<FrequentItem> out;
    const std::uint64_t n = sketch.total();
    if (n == 0) return out;

    for (const auto& c : sketch.counters()) {
        const std::uint64_t reported =
            mode == SketchCountMode::Guaranteed ? c.count - c.error : c.count;
        const double support = static_cast<double>(reported) / static_cast<double>(n);
        if (reported >= thresholds.minimum_occurrences &&
            support >= thresholds.frequency_threshold) {
            out.push_back(FrequentItem{c.item, reported, support});
        }
    }
    std::sort(out.begin(), out.end(), [](const FrequentItem& a, const FrequentItem& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.item < b.item;
    });
    return out;
}

} // namespace selflet
