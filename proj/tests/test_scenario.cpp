#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "copkit/errors.hpp"
#include "copkit/scenario.hpp"
#include "copkit/units.hpp"
#include "test_util.hpp"

using namespace copkit;
using test::axis_scenario;
using test::distance_for_rsrp;

TEST_SUITE_BEGIN("scenario");

TEST_CASE("radio constants invariants") {
    RadioConstants c;
    CHECK_NOTHROW(validate(c));
    c.min_rsrp_dbm = 50.0;  // above tx power
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = RadioConstants{};
    c.noise_power_dbm = 50.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = RadioConstants{};
    c.pathloss_exponent = 1.5;
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("canonical scenario has 36 sectors, 3 targets and 356 users") {
    NetworkScenario s = generate_scenario(42);
    CHECK(s.sectors.size() == 36);
    CHECK(s.users.size() == 356);
    CHECK(s.target_sector_ids() == std::vector<int>{0, 1, 2});
    for (int id : s.target_sector_ids()) {
        const Sector& sec = s.sectors[static_cast<std::size_t>(id)];
        CHECK(sec.site_position.x == 0.0);  // targets share the center site
        CHECK(sec.site_position.y == 0.0);
    }
    LayoutParams p;
    const double extent = p.region_half_extent_m;
    for (const UserEquipment& ue : s.users) {
        CHECK(std::abs(ue.position.x) <= extent);
        CHECK(std::abs(ue.position.y) <= extent);
    }
}

TEST_CASE("scenario generation is deterministic in the seed") {
    CHECK(test::serialize(generate_scenario(42)) == test::serialize(generate_scenario(42)));

    // Different seeds must give different user position multisets.
    NetworkScenario a = generate_scenario(42);
    NetworkScenario b = generate_scenario(43);
    std::multiset<std::pair<double, double>> pa, pb;
    for (const UserEquipment& ue : a.users) pa.insert({ue.position.x, ue.position.y});
    for (const UserEquipment& ue : b.users) pb.insert({ue.position.x, ue.position.y});
    CHECK(pa != pb);
}

TEST_CASE("invalid layout parameters are rejected") {
    LayoutParams p;
    p.user_count = 0;
    CHECK_THROWS_AS(generate_scenario(1, p), ConfigError);
    p = LayoutParams{};
    p.inter_site_distance_m = -5.0;
    CHECK_THROWS_AS(generate_scenario(1, p), ConfigError);
}

TEST_CASE("log-distance path loss") {
    NetworkScenario s = axis_scenario({100.0});
    const Sector& sec = s.sectors[0];
    const RadioConstants& c = s.constants;

    CHECK(path_loss_db(s, sec, {100.0 - c.ref_distance_m, 0.0}) ==
          doctest::Approx(c.pathloss_ref_db).epsilon(1e-12));
    // One decade adds 10 * exponent dB.
    CHECK(path_loss_db(s, sec, {100.0 - 10.0 * c.ref_distance_m, 0.0}) ==
          doctest::Approx(c.pathloss_ref_db + 35.0).epsilon(1e-12));
    // Direct formula evaluation as oracle at 250 m.
    const double expected = 34.5 + 35.0 * std::log10(250.0);
    CHECK(path_loss_db(s, sec, {-150.0, 0.0}) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(118.4).epsilon(1e-3));
    // Distances below the reference clamp to it.
    CHECK(path_loss_db(s, sec, {100.0, 0.0}) == doctest::Approx(c.pathloss_ref_db).epsilon(1e-12));
}

TEST_CASE("rsrp composes tx power, masked gain and path loss") {
    NetworkScenario s = axis_scenario({250.0});
    const Sector& sec = s.sectors[0];
    UserEquipment ue{0, {0.0, 0.0}, 1.0};

    const double pl = path_loss_db(s, sec, ue.position);
    CHECK(pl == doctest::Approx(34.5 + 35.0 * std::log10(250.0)).epsilon(1e-12));
    CHECK(rsrp_dbm(s, sec, ue) == doctest::Approx(43.0 + 18.5 - pl).epsilon(1e-12));
    CHECK(rsrp_dbm(s, sec, ue) == doctest::Approx(-56.93).epsilon(1e-3));

    // Doubling the distance with exponent 3.5 costs 10 * 3.5 * log10(2) dB.
    UserEquipment twice{1, {-250.0, 0.0}, 1.0};
    CHECK(rsrp_dbm(s, sec, ue) - rsrp_dbm(s, sec, twice) ==
          doctest::Approx(35.0 * std::log10(2.0)).epsilon(1e-12));

    // Behind the sector the 120-degree mask costs 20 dB against the mirror point.
    UserEquipment behind{2, {500.0, 0.0}, 1.0};
    CHECK(rsrp_dbm(s, sec, ue) - rsrp_dbm(s, sec, behind) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("qualification is inclusive at the floor plus threshold") {
    NetworkScenario s = axis_scenario({distance_for_rsrp(-100.0), 400.0});
    UserEquipment ue = s.users[0];
    std::map<int, double> rsrp;
    for (const Sector& sec : s.sectors) rsrp[sec.sector_id] = rsrp_dbm(s, sec, ue);

    CHECK(rsrp[0] == doctest::Approx(-100.0).epsilon(1e-9));
    CHECK(qualify(s, ue, rsrp) == std::vector<int>{0, 1});

    // Exactly at floor + threshold still qualifies.
    s.constants.min_rsrp_dbm = rsrp[0];
    s.constants.selection_threshold_db = 0.0;
    auto qualified = qualify(s, ue, rsrp);
    CHECK(std::find(qualified.begin(), qualified.end(), 0) != qualified.end());

    // Everything below the floor: empty set.
    s.constants.min_rsrp_dbm = 10.0;
    s.constants.tx_power_dbm = 20.0;
    CHECK(qualify(s, ue, rsrp).empty());

    std::map<int, double> incomplete{{0, -100.0}};
    CHECK_THROWS_AS(qualify(s, ue, incomplete), ConfigError);
}

TEST_CASE("association follows the selection pipeline") {
    MobilityConfig zero;

    SUBCASE("strict argmax with neutral offsets") {
        NetworkScenario s = axis_scenario({distance_for_rsrp(-60.0), distance_for_rsrp(-70.0)});
        AssociationResult r = associate(s, zero, s.users[0]);
        CHECK(r.serving_sector_id == 0);
        CHECK(r.qualified_sector_ids == std::vector<int>{0, 1});
    }

    SUBCASE("handover margin blocks a slightly weaker candidate") {
        // Serving sector 0 at -60 dBm, candidate sector 1 at -62 dBm.
        NetworkScenario s = axis_scenario({distance_for_rsrp(-60.0), distance_for_rsrp(-62.0)});
        MobilityConfig config;
        config.hom_db = {3.0, 0.0, 0.0};  // margin of the serving (target) sector

        // Candidate score -62 < -60 + 3: stays with the pre-selected cell.
        AssociationResult r = associate(s, config, s.users[0]);
        CHECK(r.serving_sector_id == 0);

        // A +6 dB CIO on the candidate clears the margin: -56 >= -57.
        s.non_target_cio_db = 6.0;
        r = associate(s, config, s.users[0]);
        CHECK(r.serving_sector_id == 1);
    }

    SUBCASE("empty qualified set marks outage") {
        NetworkScenario s = axis_scenario({1000.0});
        s.constants.min_rsrp_dbm = 0.0;
        s.constants.tx_power_dbm = 10.0;
        AssociationResult r = associate(s, zero, s.users[0]);
        CHECK(r.outage());
        CHECK_THROWS_AS(sinr_db(s, zero, s.users[0], r), OutageError);
    }

    SUBCASE("out-of-box config is rejected") {
        NetworkScenario s = axis_scenario({100.0});
        MobilityConfig bad;
        bad.cio_db = {11.0, 0.0, 0.0};
        CHECK_THROWS_AS(associate(s, bad, s.users[0]), ConfigError);
    }
}

TEST_CASE("sinr matches the linear-domain formula") {
    MobilityConfig zero;

    SUBCASE("interference-free ratio") {
        NetworkScenario s = axis_scenario({distance_for_rsrp(-60.0)});
        AssociationResult r = associate(s, zero, s.users[0]);
        const double expected = r.rsrp_by_sector_dbm.at(0) - s.constants.noise_power_dbm;
        CHECK(sinr_db(s, zero, s.users[0], r) == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("equal serving and interferer give about 0 dB") {
        NetworkScenario s = axis_scenario({300.0, 300.0});
        s.constants.noise_power_dbm = -170.0;
        AssociationResult r = associate(s, zero, s.users[0]);
        CHECK(sinr_db(s, zero, s.users[0], r) == doctest::Approx(0.0).epsilon(1e-6));
    }

    SUBCASE("three-sector hand-computed oracle") {
        // Exact received powers pinned through a hand-built association.
        NetworkScenario s = axis_scenario({300.0, 300.0, 300.0});
        AssociationResult r;
        r.ue_id = 0;
        r.serving_sector_id = 0;
        r.rsrp_by_sector_dbm = {{0, -60.0}, {1, -70.0}, {2, -75.0}};
        r.qualified_sector_ids = {0, 1, 2};
        const double expected =
            10.0 * std::log10(1e-6 / (1e-7 + std::pow(10.0, -7.5) + std::pow(10.0, -9.5)));
        CHECK(sinr_db(s, zero, s.users[0], r) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(expected == doctest::Approx(8.7963).epsilon(1e-3));
    }
}

TEST_CASE("capacity evaluates the resource formula per target sector") {
    NetworkScenario s = axis_scenario({100.0});
    s.prb_count = 100;

    // Single user at 0 dB SINR: log2(2) = 1, so one block of the hundred goes.
    CHECK(capacity(s, {{0, 0, 1.0, 1.0}}) == doctest::Approx(99.0).epsilon(1e-12));
    // No users leave all resource blocks.
    CHECK(capacity(s, {}) == doctest::Approx(100.0).epsilon(1e-12));

    // Two users at linear SINR 3 under half load: 50 - 2 * (0.5 + 0.5) = 48.
    s.prb_count = 50;
    s.sectors[0].load = 0.5;
    CHECK(capacity(s, {{0, 0, 1.0, 3.0}, {1, 0, 1.0, 3.0}}) == doctest::Approx(48.0).epsilon(1e-12));

    s.sectors[0].load = 0.0;
    CHECK_THROWS_AS(capacity(s, {}), ConfigError);
}

TEST_CASE("evaluate_kpi is pure and self-consistent") {
    NetworkScenario s = generate_scenario(42);
    MobilityConfig config;
    config.cio_db = {2.0, -4.0, 0.0};
    config.hom_db = {1.0, 0.0, 3.0};

    KpiReport a = evaluate_kpi(s, config);
    KpiReport b = evaluate_kpi(s, config);
    CHECK(a.mean_sinr_db == b.mean_sinr_db);
    CHECK(a.per_user_sinr_db == b.per_user_sinr_db);
    CHECK(a.capacity == b.capacity);

    double sum = 0.0;
    for (const auto& [ue, sinr] : a.per_user_sinr_db) sum += sinr;
    CHECK(a.mean_sinr_db ==
          doctest::Approx(sum / static_cast<double>(a.per_user_sinr_db.size())).epsilon(1e-9));
}

TEST_CASE("raising a target CIO changes at least one boundary user's cell") {
    NetworkScenario s = generate_scenario(42);
    MobilityConfig zero;
    MobilityConfig raised;
    raised.cio_db = {10.0, 0.0, 0.0};

    int changed = 0;
    for (const UserEquipment& ue : s.users) {
        AssociationResult a = associate(s, zero, ue);
        AssociationResult b = associate(s, raised, ue);
        if (a.serving_sector_id != b.serving_sector_id) ++changed;
    }
    CHECK(changed > 0);
}

TEST_CASE("partial outage excludes users from the mean but counts them") {
    NetworkScenario s = axis_scenario({distance_for_rsrp(-80.0)});
    s.constants.min_rsrp_dbm = -100.0;
    // A second user far behind the sector: out of the lobe and under the
    // floor, but its nearest (only) site hosts the target, so it is gathered.
    s.users.push_back({1, {s.sectors[0].site_position.x + 4000.0, 0.0}, 1.0});

    KpiReport report = evaluate_kpi(s, MobilityConfig{});
    CHECK(report.outage_count == 1);
    REQUIRE(report.per_user_sinr_db.size() == 1);
    CHECK(report.per_user_sinr_db.count(0) == 1);
    CHECK(report.mean_sinr_db == report.per_user_sinr_db.at(0));
}

TEST_CASE("more than 3 target sectors cannot drive a 3-slot COP vector") {
    NetworkScenario s = generate_scenario(42);
    s.sectors[5].is_target = true;  // fourth target
    CHECK_THROWS_AS(validate(s), ConfigError);

    LayoutParams p;
    p.sectors_per_site = 4;  // site 0 would host four targets
    CHECK_THROWS_AS(generate_scenario(1, p), ConfigError);
}

TEST_CASE("all users in outage raise a degenerate-KPI error") {
    LayoutParams p;
    p.constants.tx_power_dbm = 43.0;
    p.constants.min_rsrp_dbm = 40.0;  // nothing qualifies beyond a few meters
    NetworkScenario s = generate_scenario(7, p);
    try {
        evaluate_kpi(s, MobilityConfig{});
        FAIL("expected DegenerateKpiError");
    } catch (const DegenerateKpiError& e) {
        CHECK(e.outage_count() > 0);
    }
}

TEST_CASE("sinr anti-monotonicity in interferer load") {
    NetworkScenario s = generate_scenario(42);
    MobilityConfig zero;
    const UserEquipment& ue = s.users[5];
    AssociationResult r = associate(s, zero, ue);
    REQUIRE_FALSE(r.outage());

    // Pick some sector that is not serving and lower its load.
    const int other = *r.serving_sector_id == 7 ? 8 : 7;
    const double before = sinr_db(s, zero, ue, r);
    s.sectors[static_cast<std::size_t>(other)].load = 0.25;
    const double after = sinr_db(s, zero, ue, r);
    CHECK(after > before);
}

TEST_CASE("association dominance with neutral offsets") {
    NetworkScenario s = generate_scenario(17);
    MobilityConfig zero;
    for (const UserEquipment& ue : s.users) {
        AssociationResult r = associate(s, zero, ue);
        REQUIRE_FALSE(r.outage());
        int best = -1;
        double best_rsrp = -1e300;
        for (int id : r.qualified_sector_ids) {
            const double v = r.rsrp_by_sector_dbm.at(id);
            if (v > best_rsrp) {
                best_rsrp = v;
                best = id;
            }
        }
        CHECK(*r.serving_sector_id == best);
    }
}

namespace {

std::set<int> users_served_by(const NetworkScenario& s, const MobilityConfig& config, int sector) {
    std::set<int> served;
    for (const UserEquipment& ue : s.users) {
        AssociationResult r = associate(s, config, ue);
        if (!r.outage() && *r.serving_sector_id == sector) served.insert(ue.ue_id);
    }
    return served;
}

}  // namespace

TEST_CASE("cio monotonicity: raising a sector's offset never sheds its users") {
    NetworkScenario s = generate_scenario(42);
    std::mt19937_64 rng(99);
    auto u = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    for (int trial = 0; trial < 15; ++trial) {
        MobilityConfig base;
        for (double& v : base.cio_db) v = u(-10.0, 8.0);
        for (double& v : base.hom_db) v = u(0.0, 10.0);
        const int target = static_cast<int>(rng() % 3);
        MobilityConfig raised = base;
        raised.cio_db[static_cast<std::size_t>(target)] =
            std::min(10.0, base.cio_db[static_cast<std::size_t>(target)] + u(0.5, 2.0));

        std::set<int> before = users_served_by(s, base, target);
        std::set<int> after = users_served_by(s, raised, target);
        for (int ue : before) CHECK(after.count(ue) == 1);
    }
}

TEST_CASE("hom stickiness: raising the serving margin never sheds retained users") {
    NetworkScenario s = generate_scenario(42);
    std::mt19937_64 rng(123);
    auto u = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    for (int trial = 0; trial < 15; ++trial) {
        MobilityConfig base;
        for (double& v : base.cio_db) v = u(-10.0, 10.0);
        for (double& v : base.hom_db) v = u(0.0, 8.0);
        const int target = static_cast<int>(rng() % 3);
        MobilityConfig raised = base;
        raised.hom_db[static_cast<std::size_t>(target)] =
            std::min(10.0, base.hom_db[static_cast<std::size_t>(target)] + u(0.5, 2.0));

        // Users pre-selected on the target and retained by it.
        std::set<int> before, after;
        for (const UserEquipment& ue : s.users) {
            AssociationResult r = associate(s, base, ue);
            if (!r.outage() && *r.serving_sector_id == target) before.insert(ue.ue_id);
            AssociationResult r2 = associate(s, raised, ue);
            if (!r2.outage() && *r2.serving_sector_id == target) after.insert(ue.ue_id);
        }
        // Retention applies to users whose pre-selected cell is the target;
        // for them a larger margin only makes leaving harder.
        for (int ue_id : before) {
            const UserEquipment& ue = s.users[static_cast<std::size_t>(ue_id)];
            AssociationResult r = associate(s, base, ue);
            int preselected = -1;
            double best = -1e300;
            for (int id : r.qualified_sector_ids)
                if (r.rsrp_by_sector_dbm.at(id) > best) {
                    best = r.rsrp_by_sector_dbm.at(id);
                    preselected = id;
                }
            if (preselected == target) CHECK(after.count(ue_id) == 1);
        }
    }
}

TEST_CASE("db/linear round trip") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double x = 1e-12 + static_cast<double>(rng() >> 11) * 0x1.0p-53 * 1e3;
        CHECK(db_to_linear(linear_to_db(x)) == doctest::Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("scenario text format round trips") {
    NetworkScenario s = generate_scenario(42);
    const std::string once = test::serialize(s);
    std::istringstream in(once);
    NetworkScenario back = read_scenario(in);
    CHECK(test::serialize(back) == once);

    test::TempDir dir;
    write_scenario_file(s, dir.file("scenario.txt"));
    NetworkScenario from_file = read_scenario_file(dir.file("scenario.txt"));
    CHECK(test::serialize(from_file) == once);
}

TEST_CASE("scenario parser reports malformed input") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_scenario(in);
    };
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("not-a-scenario\n"), ParseError);
    CHECK_THROWS_AS(parse("copkit-scenario v1\n[bogus]\n"), ParseError);
    CHECK_THROWS_AS(parse("copkit-scenario v1\n[sectors]\n0 1 2\n"), ParseError);

    // A missing constants key names itself.
    NetworkScenario s = generate_scenario(1, [] {
        LayoutParams p;
        p.site_count = 1;
        p.user_count = 2;
        return p;
    }());
    std::string text = test::serialize(s);
    const std::string key = "noise_power_dbm";
    text.erase(text.find(key), text.find('\n', text.find(key)) - text.find(key));
    try {
        parse(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
}

TEST_SUITE_END();
