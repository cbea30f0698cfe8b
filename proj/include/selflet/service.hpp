#pragma once

#include "selflet/core.hpp"
#include "selflet/offer_modes.hpp"

namespace selflet {

// A named capability bound to the behavior implementing it.
struct Service {
    ServiceId id;
    std::string behavior;  // behavior id in the owning node's repository
    OfferModeSet offer_modes;

    bool operator==(const Service&) const = default;
};

} // namespace selflet
