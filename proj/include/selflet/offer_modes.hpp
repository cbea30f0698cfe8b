#pragma once
// Offer modes: the four ways a service can be provided, and the matching
// ask modes a requester can prefer. Any combination of offer flags is legal,
// including none (service not offered).

#include <optional>
#include <string>

namespace selflet {

struct OfferModeSet {
    bool can_do = false;
    bool can_teach = false;
    bool knows_who_can_do = false;
    bool knows_who_can_teach = false;

    bool any() const { return can_do || can_teach || knows_who_can_do || knows_who_can_teach; }
    bool operator==(const OfferModeSet&) const = default;

    static OfferModeSet doing() { return {.can_do = true}; }
    static OfferModeSet do_and_teach() { return {.can_do = true, .can_teach = true}; }
};

enum class AskMode { Do, Teach, KnowWhoCanDo, KnowWhoCanTeach };

// Parses "can_do|can_teach" style strings. Empty input is the empty set.
// Unknown flag names fail.
std::optional<OfferModeSet> parse_offer_modes(const std::string& text);
std::string to_string(const OfferModeSet& modes);

std::optional<AskMode> parse_ask_mode(const std::string& text);
std::string to_string(AskMode mode);

// Whether a provider offering `modes` can serve an ask in `mode`.
inline bool mode_compatible(AskMode mode, const OfferModeSet& modes) {
    switch (mode) {
        case AskMode::Do: return modes.can_do;
        case AskMode::Teach: return modes.can_teach;
        case AskMode::KnowWhoCanDo: return modes.knows_who_can_do;
        case AskMode::KnowWhoCanTeach: return modes.knows_who_can_teach;
    }
    return false;
}

// The mode a request proceeds in after a know-who referral has been consumed.
inline AskMode referral_base_mode(AskMode mode) {
    if (mode == AskMode::KnowWhoCanDo) return AskMode::Do;
    if (mode == AskMode::KnowWhoCanTeach) return AskMode::Teach;
    return mode;
}

} // namespace selflet
