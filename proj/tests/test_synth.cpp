#include "doctest.h"

#include <set>

#include "kcsm/export.hpp"
#include "kcsm/pipeline.hpp"
#include "kcsm/synth.hpp"

using namespace kcsm;

TEST_CASE("worked example fixture") {
    auto alerts = builtin_example();
    REQUIRE(alerts.size() == 6);

    std::map<std::string, Alert> by_id;
    for (const Alert& a : alerts) by_id[a.id] = a;
    CHECK(by_id.count("recon"));
    CHECK(by_id.at("recon").targets.size() == 4);
    CHECK(by_id.at("recon").is_meta());
    CHECK(by_id.at("delivery").sources.to_string() == "1.3.3.7");
    CHECK(by_id.at("download").targets.to_string() == "1.4.4.7");
    CHECK(by_id.at("pivot-1").targets.to_string() == "10.2.0.1");
    CHECK(by_id.at("pivot-2").targets.to_string() == "10.2.0.3");
    CHECK(by_id.at("discovery").targets.to_string() == "10.2.0.2,10.2.0.4,10.2.0.5");

    // Both pivots carry the same timestamp (one attack step).
    CHECK(by_id.at("pivot-1").interval == by_id.at("pivot-2").interval);

    ZoneTopology topo = builtin_example_topology();
    REQUIRE(topo.zones().size() == 2);
    CHECK(topo.zones()[0].name == "Z1");
    CHECK(format_cidr(topo.zones()[0].cidrs[0]) == "10.1.0.0/16");
    CHECK(format_cidr(topo.zones()[1].cidrs[0]) == "10.2.0.0/16");

    for (const Alert& a : alerts) {
        CHECK(alert_direction(a, topo).status == DirectionStatus::Ok);
        CHECK(a.interval.valid());
    }
}

TEST_CASE("reference campaign steps") {
    CampaignSpec spec = builtin_ids2018_apt();
    REQUIRE(spec.steps.size() == 5);
    CHECK(spec.steps[0].day == 1);
    CHECK(spec.steps[1].day == 1);
    CHECK(spec.steps[2].day == 4);

    // Fourth step: lateral movement to the server host on day 8.
    CHECK(spec.steps[3].day == 8);
    CHECK(spec.steps[3].stage_hint == AptStage::L);
    CHECK(spec.steps[3].sources.to_string() == "172.31.64.67");
    CHECK(spec.steps[3].targets.to_string() == "172.31.69.20");

    // Fifth step: exfiltration from the server on day 10.
    CHECK(spec.steps[4].day == 10);
    CHECK(spec.steps[4].stage_hint == AptStage::E);
    CHECK(spec.steps[4].sources.to_string() == "172.31.69.20");
    CHECK(spec.steps[4].targets.to_string() == "1.1.15.57");

    // Four distinct Internet hosts take part across the campaign.
    ZoneTopology topo = builtin_ids2018_topology();
    std::set<std::string> external;
    for (const CampaignStep& s : spec.steps) {
        for (HostAddr h : s.sources)
            if (topo.zone_of(h) == kExternalZone) external.insert(format_host(h));
        for (HostAddr h : s.targets)
            if (topo.zone_of(h) == kExternalZone) external.insert(format_host(h));
    }
    CHECK(external.size() == 4);

    // The lateral hop crosses zones.
    auto dir = classify_direction(*parse_host("172.31.64.67"), *parse_host("172.31.69.20"), topo);
    REQUIRE(dir.has_value());
    CHECK(dir->cls == DirectionClass::InternalCross);
}

TEST_CASE("campaign without noise places alerts on the table days") {
    auto alerts = generate(builtin_ids2018_apt(), NoiseSpec{}, builtin_ids2018_topology());
    REQUIRE(alerts.size() == 5);
    std::vector<int> days;
    for (const Alert& a : alerts)
        days.push_back(static_cast<int>((a.interval.earliest_us - synth_base_us()) / 86400000000ll) + 1);
    CHECK(days == std::vector<int>{1, 1, 4, 8, 10});
    for (const Alert& a : alerts) CHECK(a.id.rfind("gt:", 0) == 0);
}

TEST_CASE("same seed, same bytes") {
    NoiseSpec noise;
    noise.alerts_per_day = 100;
    noise.days = 2;
    noise.seed = 7;
    ZoneTopology topo = builtin_ids2018_topology();
    auto a = generate(std::nullopt, noise, topo);
    auto b = generate(std::nullopt, noise, topo);
    CHECK(a.size() == 200);
    CHECK(alerts_to_jsonl(a) == alerts_to_jsonl(b));

    noise.seed = 8;
    auto c = generate(std::nullopt, noise, topo);
    CHECK(alerts_to_jsonl(a) != alerts_to_jsonl(c));
}

TEST_CASE("noise never touches campaign hosts") {
    NoiseSpec noise;
    noise.alerts_per_day = 300;
    noise.days = 3;
    ZoneTopology topo = builtin_ids2018_topology();
    CampaignSpec spec = builtin_ids2018_apt();
    HostSet campaign_hosts;
    for (const CampaignStep& s : spec.steps) {
        campaign_hosts.merge(s.sources);
        campaign_hosts.merge(s.targets);
    }
    auto alerts = generate(spec, noise, topo);
    size_t campaign_alerts = 0;
    for (const Alert& a : alerts) {
        if (a.id.rfind("gt:", 0) == 0) {
            ++campaign_alerts;
            continue;
        }
        for (HostAddr h : a.sources) CHECK_FALSE(campaign_hosts.contains(h));
        for (HostAddr h : a.targets) CHECK_FALSE(campaign_hosts.contains(h));
    }
    CHECK(campaign_alerts == 5);
    CHECK(alerts.size() == 5 + 900);
}

TEST_CASE("generated alerts survive a schema round-trip") {
    NoiseSpec noise;
    noise.alerts_per_day = 50;
    noise.days = 2;
    ZoneTopology topo = builtin_example_topology();
    auto alerts = generate_mixed(builtin_example(), noise, topo);

    for (const Alert& a : alerts) {
        CHECK_FALSE(a.sources.empty());
        CHECK_FALSE(a.targets.empty());
        CHECK(a.interval.valid());
        if (!a.is_meta()) {
            CHECK(a.sources.size() == 1);
            CHECK(a.targets.size() == 1);
            CHECK(a.interval.earliest_us == a.interval.latest_us);
        }
    }

    IngestResult in = ingest_lines(alerts_to_jsonl(alerts), topo, /*strict=*/true);
    CHECK(in.stats.malformed == 0);
    CHECK(in.stats.alerts == alerts.size());   // fixture alerts are direction-pure
    REQUIRE(in.alerts.size() == alerts.size());
    for (size_t i = 0; i < alerts.size(); ++i) {
        CHECK(in.alerts[i].id == alerts[i].id);
        CHECK(in.alerts[i].sources == alerts[i].sources);
        CHECK(in.alerts[i].targets == alerts[i].targets);
        CHECK(in.alerts[i].interval == alerts[i].interval);
    }
}

TEST_CASE("invalid noise specs are rejected") {
    ZoneTopology topo = builtin_ids2018_topology();
    NoiseSpec bad;
    bad.alerts_per_day = 10;
    bad.days = 1;
    bad.direction_mix = {0, 0, 0, 0};
    CHECK_THROWS_AS((void)generate(std::nullopt, bad, topo), std::invalid_argument);

    NoiseSpec tiny;
    tiny.alerts_per_day = 10;
    tiny.days = 1;
    tiny.internal_hosts = 1;
    CHECK_THROWS_AS((void)generate(std::nullopt, tiny, topo), std::invalid_argument);
}

TEST_CASE("campaign json parsing") {
    const char* doc = R"({
        "seed": 9,
        "steps": [
            {"day": 1, "stage": "D1", "src": "9.9.9.9", "dst": "10.1.0.5", "kind": "drop"},
            {"day": 3, "stage": "L", "src": "10.1.0.5", "dst": ["10.2.0.6"], "kind": "move"}
        ]
    })";
    CampaignSpec spec = parse_campaign_json(doc);
    CHECK(spec.seed == 9);
    REQUIRE(spec.steps.size() == 2);
    CHECK(spec.steps[0].stage_hint == AptStage::D1);
    CHECK(spec.steps[1].targets.to_string() == "10.2.0.6");

    CHECK_THROWS((void)parse_campaign_json("{}"));
    CHECK_THROWS((void)parse_campaign_json(R"({"steps": [{"day":1,"stage":"XX","src":"1.2.3.4","dst":"10.0.0.1"}]})"));
}
