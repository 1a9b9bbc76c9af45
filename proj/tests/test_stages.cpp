#include "doctest.h"

#include <set>

#include "kcsm/stages.hpp"

using namespace kcsm;

TEST_CASE("stage assignment table") {
    CHECK(assign_stages(DirectionClass::Inbound) == StageSet{AptStage::R, AptStage::D1});
    CHECK(assign_stages(DirectionClass::Outbound) == StageSet{AptStage::D2, AptStage::C, AptStage::E});
    CHECK(assign_stages(DirectionClass::InternalSame) ==
          StageSet{AptStage::L, AptStage::S, AptStage::O});
    CHECK(assign_stages(DirectionClass::InternalCross) ==
          StageSet{AptStage::L, AptStage::S, AptStage::P, AptStage::O});

    // The four sets together cover all nine stages.
    StageSet all;
    for (DirectionClass d : {DirectionClass::Inbound, DirectionClass::Outbound,
                             DirectionClass::InternalSame, DirectionClass::InternalCross})
        all = all.unite(assign_stages(d));
    CHECK(all.size() == kStageCount);
}

TEST_CASE("direction patterns admit their assigned stages") {
    // Direction pattern per stage: which of the four classes may carry it.
    auto admits = [](AptStage s, DirectionClass d) {
        switch (s) {
            case AptStage::R:
            case AptStage::D1: return d == DirectionClass::Inbound;
            case AptStage::D2:
            case AptStage::C:
            case AptStage::E: return d == DirectionClass::Outbound;
            case AptStage::P: return d == DirectionClass::InternalCross;
            case AptStage::L:
            case AptStage::S:
            case AptStage::O:
                return d == DirectionClass::InternalSame || d == DirectionClass::InternalCross;
        }
        return false;
    };
    for (DirectionClass d : {DirectionClass::Inbound, DirectionClass::Outbound,
                             DirectionClass::InternalSame, DirectionClass::InternalCross}) {
        StageSet stages = assign_stages(d);
        for (AptStage s : kAllStages) {
            if (stages.contains(s)) CHECK(admits(s, d));
        }
    }
}

TEST_CASE("infecting stages") {
    CHECK(is_infecting(AptStage::D1));
    CHECK(is_infecting(AptStage::P));
    CHECK(is_infecting(AptStage::L));
    CHECK_FALSE(is_infecting(AptStage::C));
    CHECK_FALSE(is_infecting(AptStage::R));
    CHECK_FALSE(is_infecting(AptStage::E));

    StageMachine m = default_machine();
    for (AptStage s : kAllStages) CHECK(m.is_infecting(s) == is_infecting(s));
}

TEST_CASE("default machine precondition checks") {
    StageMachine m = default_machine();
    CHECK(is_precondition(m, AptStage::D1, AptStage::C));
    CHECK(is_precondition(m, AptStage::R, AptStage::D1));
    CHECK_FALSE(is_precondition(m, AptStage::C, AptStage::R));
    CHECK(is_precondition(m, AptStage::S, AptStage::L));
    CHECK(is_precondition(m, AptStage::D1, AptStage::L));
    CHECK_FALSE(is_precondition(m, AptStage::R, AptStage::C));
    CHECK(is_precondition(m, AptStage::P, AptStage::S));

    // R's only successor is D1.
    for (AptStage t : kAllStages) {
        if (t != AptStage::D1) CHECK_FALSE(is_precondition(m, AptStage::R, t));
    }
    // S never enables the outbound stages directly.
    CHECK_FALSE(is_precondition(m, AptStage::S, AptStage::D2));
    CHECK_FALSE(is_precondition(m, AptStage::S, AptStage::C));
    CHECK(is_precondition(m, AptStage::S, AptStage::S));
}

TEST_CASE("every stage is reachable from R") {
    StageMachine m = default_machine();
    std::set<AptStage> seen{AptStage::R};
    std::vector<AptStage> frontier{AptStage::R};
    while (!frontier.empty()) {
        AptStage at = frontier.back();
        frontier.pop_back();
        for (AptStage next : kAllStages) {
            if (is_precondition(m, at, next) && seen.insert(next).second) frontier.push_back(next);
        }
    }
    CHECK(seen.size() == kStageCount);
}

TEST_CASE("stage set rendering follows the canonical order") {
    StageSet set{AptStage::O, AptStage::R, AptStage::P, AptStage::D1};
    CHECK(set.to_string() == "R,D1,P,O");
    CHECK(parse_stage_set("R, D1,P O").value() == set);
    CHECK_FALSE(parse_stage_set("R,XX").has_value());
    CHECK_FALSE(parse_stage_set("").has_value());
}

TEST_CASE("machine definition files") {
    const char* text =
        "# reduced test machine\n"
        "infecting: D1 L P\n"
        "succ: R -> D1\n"
        "succ: D1 -> C L\n"
        "succ: S -> L P S\n";
    StageMachine m = parse_machine(text);
    CHECK(m.infecting == StageSet{AptStage::D1, AptStage::L, AptStage::P});
    CHECK(is_precondition(m, AptStage::R, AptStage::D1));
    CHECK(is_precondition(m, AptStage::D1, AptStage::C));
    CHECK_FALSE(is_precondition(m, AptStage::D1, AptStage::E));
    CHECK(m.successors[static_cast<size_t>(AptStage::E)].empty());

    CHECK_THROWS(parse_machine("succ: R -> D1\n"));            // no infecting line
    CHECK_THROWS(parse_machine("infecting: D1\nsucc: R D1\n"));   // missing arrow
    CHECK_THROWS(parse_machine("infecting: D1\nsucc: X -> D1\n"));
    CHECK_THROWS(parse_machine("infecting: D1\nnonsense\n"));
}
