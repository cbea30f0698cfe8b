#pragma once
// Built-in prediction model: summarizes service requests with a Space-Saving
// sketch and forecasts services whose request frequency passes both the
// minimum-occurrences and the support threshold. Emits one forecast per
// threshold crossing; crossings re-arm only when the window resets.

#include <set>

#include "selflet/prediction.hpp"
#include "selflet/space_saving.hpp"

namespace selflet {

struct FrequentServiceModelConfig {
    FrequencyThresholds thresholds;
    std::size_t capacity = 16;
    // Observations per tumbling window; 0 keeps the whole history.
    std::uint64_t window = 0;
    SketchCountMode count_mode = SketchCountMode::Guaranteed;
    // Ask modes counted ("do", "teach", ...). Acquisition asks issued by the
    // teach policy are excluded by default so the model never feeds on its
    // own output traffic. Empty set counts everything.
    std::set<std::string> observed_modes = {"do"};
    // Outgoing watches this node's asks; incoming watches requests arriving
    // from peers (provider-side policies).
    enum class Direction { Outgoing, Incoming };
    Direction direction = Direction::Outgoing;
};

inline constexpr const char* kFrequentServiceModelName = "frequent_service";
inline constexpr const char* kBadEventDiagnostic = "diag.prediction.bad_event";

class FrequentServiceModel : public PredictionModel {
public:
    explicit FrequentServiceModel(FrequentServiceModelConfig config);

    static PredictionModelDescriptor descriptor_for(const FrequentServiceModelConfig& config);

    std::vector<Event> on_event(const Event& e) override;
    void reset() override;

    const SpaceSavingSketch& sketch() const { return sketch_; }

private:
    FrequentServiceModelConfig config_;
    SpaceSavingSketch sketch_;
    std::set<std::string> announced_;  // services already forecast this window
};

} // namespace selflet
