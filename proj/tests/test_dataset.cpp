#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>
#include <string>

#include "geopriv/common.hpp"
#include "geopriv/dataset.hpp"
#include "geopriv/pipeline.hpp"

using namespace geopriv;

#ifndef GEOPRIV_SOURCE_DIR
#define GEOPRIV_SOURCE_DIR "."
#endif

namespace {

const std::string kHumanMap = std::string(GEOPRIV_SOURCE_DIR) + "/data/category_map_human.csv";

std::string fresh_dir(const std::string& name) {
    std::string dir = "/tmp/geopriv_" + name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

CohortSpec tiny_spec() {
    CohortSpec spec;
    spec.n_users = 4;
    spec.n_weeks = 2;
    return spec;
}

}  // namespace

TEST_CASE("cohort generation is deterministic") {
    RawBundle a = generate_cohort(tiny_spec(), 7);
    RawBundle b = generate_cohort(tiny_spec(), 7);
    std::string da = fresh_dir("synth_a"), db = fresh_dir("synth_b");
    write_bundle(a, da);
    write_bundle(b, db);
    for (const char* f : {"gps.csv", "enrollment.csv", "class_info.csv", "deadlines.csv",
                          "ema.csv", "term.csv", "map.osm"})
        CHECK(read_file(da + "/" + f) == read_file(db + "/" + f));
    RawBundle c = generate_cohort(tiny_spec(), 8);
    CHECK(c.fixes[0].lat != a.fixes[0].lat);  // seed actually matters
}

TEST_CASE("every user gets a distinct home identity") {
    CohortSpec spec;
    spec.n_users = 30;
    spec.n_weeks = 1;
    RawBundle b = generate_cohort(spec, 7);
    std::set<std::string> homes;
    for (const MapFeature& f : b.map_features)
        if (f.location_type == "dormitory") homes.insert(address_identity(f));
    CHECK(homes.size() == 30);
}

TEST_CASE("bundle round-trips through the csv layout") {
    RawBundle b = generate_cohort(tiny_spec(), 7);
    std::string dir = fresh_dir("roundtrip");
    write_bundle(b, dir);
    RawBundle back = load_bundle(dir);
    CHECK(back.fixes.size() == b.fixes.size());
    CHECK(back.ema.size() == b.ema.size());
    CHECK(back.deadlines.size() == b.deadlines.size());
    CHECK(back.enrollment == b.enrollment);
    CHECK(back.term_start == b.term_start);
    CHECK(back.load_stats.bad_rows_skipped == 0);
    CHECK(back.fixes[0].user_id == b.fixes[0].user_id);
    CHECK(back.fixes[0].lat == b.fixes[0].lat);  // shortest round-trip formatting
}

TEST_CASE("missing bundle files raise actionable errors") {
    std::string dir = fresh_dir("missing");
    CHECK_THROWS_WITH_AS(load_bundle(dir), doctest::Contains("gps.csv"), Error);
}

TEST_CASE("malformed rows are skipped and counted") {
    RawBundle b = generate_cohort(tiny_spec(), 7);
    std::string dir = fresh_dir("badrows");
    write_bundle(b, dir);
    std::string gps = read_file(dir + "/gps.csv");
    gps += "brokenrow\nu99,notanumber,1,2\nu98,5,999,0\n";
    write_file(dir + "/gps.csv", gps);
    RawBundle back = load_bundle(dir);
    CHECK(back.load_stats.bad_rows_skipped == 3);
    CHECK(back.fixes.size() == b.fixes.size());
}

TEST_CASE("build_dataset joins labeled user-days") {
    CohortSpec spec = tiny_spec();
    RawBundle b = generate_cohort(spec, 7);
    MapIndex index = MapIndex::build(b.map_features, 0.01);
    CategoryMap map = CategoryMap::load(kHumanMap);
    LabeledDataset ds = build_dataset(b, index, map, {});
    CHECK(ds.rows.size() == static_cast<std::size_t>(spec.n_users * spec.n_weeks * 7));
    std::set<std::int64_t> ids;
    for (const LabeledRow& r : ds.rows) {
        ids.insert(r.row_id);
        CHECK(r.features.raw_complete);
        CHECK(r.features.semantic_complete);
        // every named feature present
        for (const std::string& n : feature_names(FeatureSet::AF)) r.features.at(n);
        for (const std::string& n : feature_names(FeatureSet::RAW)) r.features.at(n);
    }
    CHECK(ids.size() == ds.rows.size());  // row ids are unique
    CHECK(ds.days_per_user.size() == static_cast<std::size_t>(spec.n_users));
}

TEST_CASE("hand-built single-day fixture produces the expected row") {
    RawBundle b;
    b.term_start = parse_date("2014-03-31");  // a Monday
    MapFeature dorm{"n1", 43.70, -72.29, "dormitory", "10"};
    MapFeature cafe{"n2", 43.72, -72.29, "cafe", "5"};
    b.map_features = {dorm, cafe};
    std::int64_t day0 = b.term_start * kSecondsPerDay;
    // 10:00 and 10:20 at the dormitory, 12:00 at the cafe
    b.fixes = {{"u1", day0 + 36000, 43.70, -72.29},
               {"u1", day0 + 37200, 43.70, -72.29},
               {"u1", day0 + 43200, 43.72, -72.29}};
    b.ema = {{"u1", day0 + 72000, 4}};  // feeling good -> level 2 -> not stressed

    MapIndex index = MapIndex::build(b.map_features, 0.01);
    CategoryMap map = CategoryMap::load(kHumanMap);
    LabeledDataset ds = build_dataset(b, index, map, {});
    REQUIRE(ds.rows.size() == 1);
    const LabeledRow& r = ds.rows[0];
    CHECK(r.features.date == b.term_start);
    // first visit: 20 min dwell + capped 40 min toward the cafe = 3600 s home
    CHECK(r.features.at("home_time") == 3600.0);
    CHECK(r.features.at("shopping_time") == 1200.0);  // nominal trailing dwell
    CHECK(r.features.at("number_of_location_visited") == 2.0);
    CHECK(r.features.at("daily_repetition") == 0.0);
    CHECK(r.features.at("class_schedule") == 0.0);
    CHECK(r.features.at("attendance_rate") == 1.0);
    CHECK(r.features.at("week_date") == 1.0);
    CHECK(r.features.at("week") == 14.0);
    CHECK(r.features.at("lat_max") == 43.72);
    CHECK(r.label.binary == 0);
    CHECK(r.label.ordered_level == 2.0);
}

TEST_CASE("days without ema or without gps are dropped") {
    RawBundle b;
    b.term_start = parse_date("2014-03-31");
    b.map_features = {{"n1", 43.70, -72.29, "dormitory", "10"}};
    std::int64_t day0 = b.term_start * kSecondsPerDay;
    b.fixes = {{"u1", day0 + 100, 43.70, -72.29}};               // day 0: gps only
    b.ema = {{"u1", day0 + kSecondsPerDay + 100, 1}};            // day 1: ema only
    MapIndex index = MapIndex::build(b.map_features, 0.01);
    CategoryMap map = CategoryMap::load(kHumanMap);
    CHECK(build_dataset(b, index, map, {}).rows.empty());
}

TEST_CASE("all-non-stressed cohorts land near the archetype base rate") {
    CohortSpec spec;
    spec.n_users = 10;
    spec.n_weeks = 4;
    spec.stressed_fraction = 0.0;
    RawBundle b = generate_cohort(spec, 7);
    MapIndex index = MapIndex::build(b.map_features, 0.01);
    CategoryMap map = CategoryMap::load(kHumanMap);
    LabeledDataset ds = build_dataset(b, index, map, {});
    double prev = 0;
    for (const LabeledRow& r : ds.rows) prev += r.label.binary;
    prev /= static_cast<double>(ds.rows.size());
    CHECK(prev > 0.15);
    CHECK(prev < 0.5);
}

TEST_CASE("dataset serialization round-trips through jsonl") {
    RawBundle b = generate_cohort(tiny_spec(), 7);
    MapIndex index = MapIndex::build(b.map_features, 0.01);
    CategoryMap map = CategoryMap::load(kHumanMap);
    LabeledDataset ds = build_dataset(b, index, map, {});
    LabeledDataset back = dataset_from_jsonl(dataset_to_jsonl(ds));
    REQUIRE(back.rows.size() == ds.rows.size());
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
        CHECK(back.rows[i].row_id == ds.rows[i].row_id);
        CHECK(back.rows[i].features.values == ds.rows[i].features.values);
        CHECK(back.rows[i].label.binary == ds.rows[i].label.binary);
    }
    CHECK(dataset_to_jsonl(back) == dataset_to_jsonl(ds));
}

TEST_CASE("the synthetic map round-trips through the osm parser") {
    RawBundle b = generate_cohort(tiny_spec(), 7);
    auto parsed = osm::parse_osm(map_features_to_osm(b.map_features));
    REQUIRE(parsed.size() == b.map_features.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].feature_id == b.map_features[i].feature_id);
        CHECK(parsed[i].location_type == b.map_features[i].location_type);
        CHECK(parsed[i].lat == b.map_features[i].lat);
        CHECK(parsed[i].address_number == b.map_features[i].address_number);
    }
}

TEST_CASE("invalid cohort specs are rejected") {
    CohortSpec spec;
    spec.n_users = 0;
    CHECK_THROWS_AS(generate_cohort(spec, 7), Error);
}
