#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "selflet/knowledge.hpp"

using namespace selflet;

namespace {

struct Rig {
    std::vector<Event> events;
    KnowledgeState knowledge{NodeId("S1"), [this](Event e) { events.push_back(std::move(e)); }};
};

Behavior simple_behavior(const std::string& id) {
    Behavior b;
    b.id = id;
    b.initial = "done";
    b.states = {State{"done", ActionIdle{}, true}};
    return b;
}

Service simple_service(const std::string& name, const std::string& behavior) {
    return Service{ServiceId(name), behavior, OfferModeSet::doing()};
}

} // namespace

TEST_CASE("the knowledge base distinguishes absent keys from stored nulls") {
    KnowledgeBase kb;
    CHECK_FALSE(kb.get("k").has_value());
    kb.put("k", Scalar{});
    auto v = kb.get("k");
    REQUIRE(v.has_value());
    CHECK(is_null(*v));
    kb.put("k", std::int64_t{3});
    CHECK(*scalar_int(*kb.get("k")) == 3);  // last writer wins
    kb.erase("k");
    CHECK_FALSE(kb.get("k").has_value());
}

TEST_CASE("installing a service stores both halves and announces it") {
    Rig rig;
    auto result = rig.knowledge.install_service(simple_service("Service 1", "b1"),
                                                simple_behavior("b1"));
    CHECK(result.ok());
    CHECK(rig.knowledge.services().contains(ServiceId("Service 1")));
    CHECK(rig.knowledge.behaviors().contains("b1"));
    REQUIRE(rig.events.size() == 1);
    CHECK(rig.events[0].kind == events::service_installed);
    CHECK(rig.knowledge.can_do_locally(ServiceId("Service 1")));
}

TEST_CASE("reinstalling an identical service keeps a single entry") {
    Rig rig;
    rig.knowledge.install_service(simple_service("Service 1", "b1"), simple_behavior("b1"));
    rig.knowledge.install_service(simple_service("Service 1", "b1"), simple_behavior("b1"));
    CHECK(rig.knowledge.services().all().size() == 1);
    CHECK(rig.knowledge.behaviors().size() == 1);
}

TEST_CASE("an invalid behavior rejects the install and changes nothing") {
    Rig rig;
    Behavior broken = simple_behavior("b1");
    broken.initial = "missing";
    auto result = rig.knowledge.install_service(simple_service("Service 1", "b1"), broken);
    CHECK_FALSE(result.ok());
    CHECK_FALSE(rig.knowledge.services().contains(ServiceId("Service 1")));
    CHECK_FALSE(rig.knowledge.behaviors().contains("b1"));
    CHECK(rig.events.empty());
}

TEST_CASE("a mismatched behavior id rejects the install") {
    Rig rig;
    auto result = rig.knowledge.install_service(simple_service("Service 1", "expected"),
                                                simple_behavior("other"));
    CHECK_FALSE(result.ok());
}

TEST_CASE("the first advertisement creates a provider entry") {
    Rig rig;
    rig.knowledge.update_provider(ServiceId("Service 1"), NodeId("S2"),
                                  OfferModeSet::doing(), 3);
    const auto& entries = rig.knowledge.providers().entries(ServiceId("Service 1"));
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].node == NodeId("S2"));
    CHECK(entries[0].modes.can_do);
    CHECK_FALSE(entries[0].modes.can_teach);
    CHECK(entries[0].last_seen == 3);
}

TEST_CASE("a re-advertisement replaces modes and refreshes last_seen") {
    Rig rig;
    rig.knowledge.update_provider(ServiceId("Service 1"), NodeId("S2"),
                                  OfferModeSet::doing(), 3);
    rig.knowledge.update_provider(ServiceId("Service 1"), NodeId("S2"),
                                  OfferModeSet::do_and_teach(), 9);
    const auto& entries = rig.knowledge.providers().entries(ServiceId("Service 1"));
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].modes.can_teach);
    CHECK(entries[0].last_seen == 9);
}

TEST_CASE("two distinct providers make two entries") {
    Rig rig;
    rig.knowledge.update_provider(ServiceId("Service 1"), NodeId("S2"), OfferModeSet::doing(), 1);
    rig.knowledge.update_provider(ServiceId("Service 1"), NodeId("S3"), OfferModeSet::doing(), 2);
    CHECK(rig.knowledge.providers().entries(ServiceId("Service 1")).size() == 2);
}

TEST_CASE("the provider list never contains the node itself") {
    Rig rig;
    rig.knowledge.update_provider(ServiceId("Service 1"), NodeId("S1"), OfferModeSet::doing(), 1);
    CHECK(rig.knowledge.providers().entries(ServiceId("Service 1")).empty());
}

TEST_CASE("demotion zeroes last_seen without forgetting the provider") {
    Rig rig;
    rig.knowledge.update_provider(ServiceId("Service 1"), NodeId("S2"), OfferModeSet::doing(), 7);
    rig.knowledge.providers().demote(ServiceId("Service 1"), NodeId("S2"));
    const auto& entries = rig.knowledge.providers().entries(ServiceId("Service 1"));
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].last_seen == 0);
}

TEST_CASE("every can_do service is locally executable after install") {
    // Repository consistency: install is the only way in, and it stores the
    // behavior alongside the service.
    Rig rig;
    for (int i = 0; i < 5; ++i) {
        const std::string n = std::to_string(i);
        rig.knowledge.install_service(simple_service("Service " + n, "b" + n),
                                      simple_behavior("b" + n));
    }
    for (const auto& [id, service] : rig.knowledge.services().all()) {
        if (service.offer_modes.can_do) CHECK(rig.knowledge.can_do_locally(id));
    }
}

TEST_CASE("offers() checks the exact flag") {
    Rig rig;
    Service s = simple_service("Service 1", "b1");
    s.offer_modes = OfferModeSet{.can_do = true, .knows_who_can_do = true};
    rig.knowledge.install_service(s, simple_behavior("b1"));
    CHECK(rig.knowledge.offers(ServiceId("Service 1"), AskMode::Do));
    CHECK_FALSE(rig.knowledge.offers(ServiceId("Service 1"), AskMode::Teach));
    CHECK(rig.knowledge.offers(ServiceId("Service 1"), AskMode::KnowWhoCanDo));
    CHECK_FALSE(rig.knowledge.offers(ServiceId("Service 2"), AskMode::Do));
}
