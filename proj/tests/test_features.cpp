#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "geopriv/common.hpp"
#include "geopriv/features.hpp"
#include "geopriv/semantic.hpp"

using namespace geopriv;

namespace {

SemanticVisit visit(Category c, const std::string& id, std::int64_t start, std::int64_t end) {
    return SemanticVisit{"u1", c, id, start, end};
}

}  // namespace

TEST_CASE("feature set sizes match the documented counts") {
    CHECK(feature_names(FeatureSet::AF).size() == 54);
    CHECK(feature_names(FeatureSet::PA).size() == 40);
    CHECK(feature_names(FeatureSet::LF).size() == 38);
    CHECK(feature_names(FeatureSet::AO).size() == 11);
    CHECK(feature_names(FeatureSet::LFAO).size() == 49);
    CHECK(feature_names(FeatureSet::RAW).size() == 10);
}

TEST_CASE("PA excludes the address and academic names") {
    const auto& pa = feature_names(FeatureSet::PA);
    for (const std::string gone : {"number_of_location_visited", "class_schedule",
                                   "daily_repetition", "attendance_rate", "deadline"})
        CHECK(std::find(pa.begin(), pa.end(), gone) == pa.end());
    CHECK(std::find(pa.begin(), pa.end(), "week") != pa.end());
}

TEST_CASE("one recreation visit 10:00-12:00 aggregates into daytime only") {
    std::map<std::string, double> out;
    location_function_features({visit(Category::recreation, "a", 10 * 3600, 12 * 3600)}, 0, out);
    CHECK(out.at("recreational_activities_time") == 7200.0);
    CHECK(out.at("recreational_activities_time_daytime") == 7200.0);
    CHECK(out.at("recreational_activities_time_nighttime") == 0.0);
    CHECK(out.at("recreational_activities_time_daytime_std") == 0.0);
    CHECK(out.at("School_and_home_off_time") == 7200.0);
}

TEST_CASE("a 17:00-19:00 school visit splits at the 18:00 boundary") {
    std::map<std::string, double> out;
    location_function_features({visit(Category::school, "s", 17 * 3600, 19 * 3600)}, 0, out);
    CHECK(out.at("school_time_daytime") == 3600.0);
    CHECK(out.at("school_time_nighttime") == 3600.0);
    CHECK(out.at("school_time") == 7200.0);
    CHECK(out.at("school_time_day_vs_night") == 0.0);
}

TEST_CASE("equal home day and night time gives zero day-vs-night") {
    std::map<std::string, double> out;
    location_function_features({visit(Category::home, "h", 8 * 3600, 12 * 3600),
                                visit(Category::home, "h", 20 * 3600, 24 * 3600)},
                               0, out);
    CHECK(out.at("home_time_day_vs_night") == 0.0);
    CHECK(out.at("School_and_home_off_time") == 0.0);
}

TEST_CASE("empty day yields all zeros") {
    std::map<std::string, double> out;
    location_function_features({}, 0, out);
    for (const std::string& n : location_function_names()) CHECK(out.at(n) == 0.0);
}

TEST_CASE("visits outside the day window are rejected") {
    std::map<std::string, double> out;
    CHECK_THROWS_AS(
        location_function_features({visit(Category::home, "h", 23 * 3600, 25 * 3600)}, 0, out),
        Error);
}

TEST_CASE("day-vs-night equals daytime minus nighttime on fuzzed days") {
    Rng rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<SemanticVisit> visits;
        std::int64_t t = 0;
        while (t < 86000 && rng.next_below(5) != 0) {
            std::int64_t len = 60 + static_cast<std::int64_t>(rng.next_below(4 * 3600));
            std::int64_t end = std::min<std::int64_t>(86400, t + len);
            auto cat = static_cast<Category>(rng.next_below(kNumCategories));
            visits.push_back(visit(cat, "x", t, end));
            t = end + static_cast<std::int64_t>(rng.next_below(3600));
        }
        std::map<std::string, double> out;
        location_function_features(visits, 0, out);
        CHECK(out.at("home_time_day_vs_night") ==
              out.at("home_time_daytime") - out.at("home_time_nighttime"));
        CHECK(out.at("school_time_day_vs_night") ==
              out.at("school_time_daytime") - out.at("school_time_nighttime"));
        double total = 0;
        for (const std::string& stem : category_feature_stems()) total += out.at(stem);
        CHECK(total <= 86400.0);
    }
}

TEST_CASE("address features count distinct identities and repetitions") {
    std::vector<SemanticVisit> day = {visit(Category::shop, "A", 0, 100),
                                      visit(Category::shop, "B", 200, 300),
                                      visit(Category::shop, "A", 400, 500)};
    std::map<std::string, double> out;
    address_features(day, day, out);
    CHECK(out.at("number_of_location_visited") == 2.0);
    CHECK(out.at("daily_repetition") == 1.0);

    // identity A visited once daily across a 7-day week
    std::vector<SemanticVisit> week;
    for (int d = 0; d < 7; ++d) week.push_back(visit(Category::home, "A", d * 86400, d * 86400 + 60));
    std::map<std::string, double> out2;
    address_features({week[0]}, week, out2);
    CHECK(out2.at("weekly_repetition") == 6.0);

    // unique identities leave zero repetition; @nowhere never counts
    std::vector<SemanticVisit> uniq = {visit(Category::shop, "A", 0, 1),
                                       visit(Category::shop, "B", 2, 3),
                                       visit(Category::others, "@nowhere", 4, 5)};
    std::map<std::string, double> out3;
    address_features(uniq, uniq, out3);
    CHECK(out3.at("number_of_location_visited") == 2.0);
    CHECK(out3.at("daily_repetition") == 0.0);
    CHECK(out3.at("weekly_repetition") == 0.0);
}

TEST_CASE("attendance rate is scheduled-overlap over scheduled time") {
    std::vector<SemanticVisit> visits = {visit(Category::school, "s", 10 * 3600, 11 * 3600 + 1800)};
    double rate = attendance_rate(visits, {{10 * 3600, 12 * 3600}});
    CHECK(rate == doctest::Approx(0.75));
    CHECK(attendance_rate(visits, {}) == 1.0);  // nothing scheduled

    AcademicContext ctx;
    ctx.scheduled_seconds[100] = 7200.0;
    ctx.attendance[100] = rate;
    std::map<std::string, double> out;
    academic_features(100, ctx, out);
    CHECK(out.at("class_schedule") == 7200.0);
    CHECK(out.at("attendance_rate") == doctest::Approx(0.75));
    CHECK(out.at("skip_class") == 0.0);  // 0.75 >= 0.7
}

TEST_CASE("skip indicators look back 0,1,2,3,7 days") {
    AcademicContext ctx;
    ctx.scheduled_seconds[93] = 3600.0;  // 7 days before day 100
    ctx.attendance[93] = 0.2;            // skipped
    std::map<std::string, double> out;
    academic_features(100, ctx, out);
    CHECK(out.at("skip_class") == 0.0);
    CHECK(out.at("7_days_after_skip_class") == 1.0);
    for (const std::string n : {"1_day_after_skip_class", "2_days_after_skip_class",
                                "3_days_after_skip_class"})
        CHECK(out.at(n) == 0.0);
}

TEST_CASE("deadline features count due dates in the coming window") {
    AcademicContext ctx;
    ctx.deadlines_due[101] = 2;  // due tomorrow relative to day 100
    ctx.deadlines_due[103] = 1;
    std::map<std::string, double> out;
    academic_features(100, ctx, out);
    CHECK(out.at("deadline") == 0.0);
    CHECK(out.at("1_day_to_DL") == 2.0);
    CHECK(out.at("2_day_to_DL") == 0.0);
    CHECK(out.at("3_day_to_DL") == 1.0);
}

TEST_CASE("time features give iso weekday and term week") {
    std::int64_t monday = parse_date("2014-03-31");
    std::map<std::string, double> out;
    time_features(monday, monday, 14, out);
    CHECK(out.at("week_date") == 1.0);
    CHECK(out.at("week") == 14.0);

    time_features(monday + 15, monday, 14, out);
    CHECK(out.at("week") == 16.0);

    CHECK_THROWS_AS(time_features(monday - 1, monday, 14, out), Error);
}

TEST_CASE("raw gps statistics match the quantile oracle") {
    std::vector<GpsFix> fixes;
    for (double v : {1.0, 2.0, 3.0, 4.0}) fixes.push_back({"u1", 0, v, -v});
    std::map<std::string, double> out;
    raw_gps_features(fixes, out);
    CHECK(out.at("lat_mean") == doctest::Approx(2.5));
    CHECK(out.at("lat_iqr") == doctest::Approx(1.5));
    CHECK(out.at("lat_max") == 4.0);
    CHECK(out.at("lat_min") == 1.0);
    CHECK(out.at("lon_mean") == doctest::Approx(-2.5));

    std::map<std::string, double> one;
    raw_gps_features({{"u1", 0, 5.0, 6.0}}, one);
    CHECK(one.at("lat_mean") == 5.0);
    CHECK(one.at("lat_max") == one.at("lat_min"));
    CHECK(one.at("lat_std") == 0.0);
    CHECK(one.at("lat_iqr") == 0.0);

    CHECK_THROWS_AS(raw_gps_features({}, out), Error);
}

TEST_CASE("select_features errors on missing names") {
    DailyFeatureRow row;
    CHECK_THROWS_AS(select_features(row, FeatureSet::RAW), Error);
    for (const std::string& n : feature_names(FeatureSet::RAW)) row.values[n] = 1.0;
    CHECK(select_features(row, FeatureSet::RAW).size() == 10);
}
