#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "geopriv/common.hpp"
#include "geopriv/geo.hpp"
#include "geopriv/semantic.hpp"

namespace geopriv {

constexpr std::int64_t kSecondsPerDay = 86'400;
constexpr std::int64_t kDaytimeStart = 6 * 3600;   // 06:00 local
constexpr std::int64_t kDaytimeEnd = 18 * 3600;    // 18:00 local

enum class FeatureSet { AF, PA, LF, AO, LFAO, RAW };

inline std::string to_string(FeatureSet s) {
    switch (s) {
        case FeatureSet::AF: return "AF";
        case FeatureSet::PA: return "PA";
        case FeatureSet::LF: return "LF";
        case FeatureSet::AO: return "AO";
        case FeatureSet::LFAO: return "LFAO";
        case FeatureSet::RAW: return "RAW";
    }
    throw Error("bad feature set");
}

inline FeatureSet feature_set_from_string(const std::string& s) {
    if (s == "AF") return FeatureSet::AF;
    if (s == "PA") return FeatureSet::PA;
    if (s == "LF") return FeatureSet::LF;
    if (s == "AO") return FeatureSet::AO;
    if (s == "LFAO") return FeatureSet::LFAO;
    if (s == "RAW") return FeatureSet::RAW;
    throw Error("unknown feature set '" + s + "' (expected AF|PA|LF|AO|LFAO|RAW)");
}

// Duration stems per category; the 24 h total carries the bare stem.
inline const std::array<std::string, kNumCategories>& category_feature_stems() {
    static const std::array<std::string, kNumCategories> stems = {
        "home_time",   "school_time", "shopping_time",               "working_time",
        "recreational_activities_time", "travel_time", "others_time"};
    return stems;
}

// 38 location-function names: 7 categories x {total, daytime, nighttime,
// daytime_std, nighttime_std} plus the off-time aggregate and the two
// day-vs-night contrasts.
inline const std::vector<std::string>& location_function_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const std::string& stem : category_feature_stems()) {
            n.push_back(stem);
            n.push_back(stem + "_daytime");
            n.push_back(stem + "_nighttime");
            n.push_back(stem + "_daytime_std");
            n.push_back(stem + "_nighttime_std");
        }
        n.push_back("School_and_home_off_time");
        n.push_back("home_time_day_vs_night");
        n.push_back("school_time_day_vs_night");
        return n;
    }();
    return names;
}

inline const std::vector<std::string>& address_feature_names() {
    static const std::vector<std::string> names = {
        "number_of_location_visited", "daily_repetition", "weekly_repetition"};
    return names;
}

inline const std::vector<std::string>& academic_feature_names() {
    static const std::vector<std::string> names = {
        "class_schedule", "attendance_rate",
        "skip_class", "1_day_after_skip_class", "2_days_after_skip_class",
        "3_days_after_skip_class", "7_days_after_skip_class",
        "deadline", "1_day_to_DL", "2_day_to_DL", "3_day_to_DL"};
    return names;
}

inline const std::vector<std::string>& time_feature_names() {
    static const std::vector<std::string> names = {"week_date", "week"};
    return names;
}

inline const std::vector<std::string>& raw_gps_feature_names() {
    static const std::vector<std::string> names = {
        "lat_mean", "lat_max", "lat_min", "lat_std", "lat_iqr",
        "lon_mean", "lon_max", "lon_min", "lon_std", "lon_iqr"};
    return names;
}

inline const std::vector<std::string>& feature_names(FeatureSet set) {
    auto concat = [](std::initializer_list<const std::vector<std::string>*> parts) {
        std::vector<std::string> out;
        for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
        return out;
    };
    static const std::vector<std::string> af = concat({&location_function_names(),
                                                       &address_feature_names(),
                                                       &academic_feature_names(),
                                                       &time_feature_names()});
    static const std::vector<std::string> pa =
        concat({&location_function_names(), &time_feature_names()});
    static const std::vector<std::string> lfao =
        concat({&location_function_names(), &academic_feature_names()});
    switch (set) {
        case FeatureSet::AF: return af;
        case FeatureSet::PA: return pa;
        case FeatureSet::LF: return location_function_names();
        case FeatureSet::AO: return academic_feature_names();
        case FeatureSet::LFAO: return lfao;
        case FeatureSet::RAW: return raw_gps_feature_names();
    }
    throw Error("bad feature set");
}

struct DailyFeatureRow {
    std::string user_id;
    std::int64_t date = 0;  // local epoch day
    std::map<std::string, double> values;
    bool semantic_complete = false;  // had at least one visit that day
    bool raw_complete = false;       // had at least one GPS fix that day

    double at(const std::string& name) const {
        auto it = values.find(name);
        if (it == values.end()) throw Error("feature row missing '" + name + "'");
        return it->second;
    }
};

inline std::vector<double> select_features(const DailyFeatureRow& row, FeatureSet set) {
    const auto& names = feature_names(set);
    std::vector<double> out;
    out.reserve(names.size());
    for (const std::string& n : names) out.push_back(row.at(n));
    return out;
}

namespace detail {

inline double population_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

// Linear-interpolation quantile on a sorted copy.
inline double quantile(std::vector<double> xs, double p) {
    if (xs.empty()) throw Error("quantile of empty sample");
    std::sort(xs.begin(), xs.end());
    double h = (static_cast<double>(xs.size()) - 1.0) * p;
    std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= xs.size()) return xs.back();
    return xs[lo] + (h - static_cast<double>(lo)) * (xs[lo + 1] - xs[lo]);
}

// Overlap seconds between [a0,a1) and [b0,b1).
inline std::int64_t overlap(std::int64_t a0, std::int64_t a1, std::int64_t b0, std::int64_t b1) {
    return std::max<std::int64_t>(0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace detail

// Computes the 38 location-function values for one user-day. `day_start` is
// the local-midnight timestamp of the day; visits must already be clipped to
// [day_start, day_start + 24 h). Visits straddling the 06:00 or 18:00
// boundary are split there before aggregation.
inline void location_function_features(const std::vector<SemanticVisit>& visits,
                                       std::int64_t day_start,
                                       std::map<std::string, double>& out) {
    const std::int64_t day_end = day_start + kSecondsPerDay;
    std::array<std::vector<double>, kNumCategories> day_durations, night_durations;

    for (const SemanticVisit& v : visits) {
        if (v.start < day_start || v.end > day_end)
            throw Error("visit outside its user-day window");
        int c = static_cast<int>(v.category);
        // window boundaries inside the day: 06:00 and 18:00
        const std::int64_t b1 = day_start + kDaytimeStart;
        const std::int64_t b2 = day_start + kDaytimeEnd;
        std::int64_t night_early = detail::overlap(v.start, v.end, day_start, b1);
        std::int64_t day_part = detail::overlap(v.start, v.end, b1, b2);
        std::int64_t night_late = detail::overlap(v.start, v.end, b2, day_end);
        if (night_early > 0) night_durations[c].push_back(static_cast<double>(night_early));
        if (day_part > 0) day_durations[c].push_back(static_cast<double>(day_part));
        if (night_late > 0) night_durations[c].push_back(static_cast<double>(night_late));
    }

    const auto& stems = category_feature_stems();
    double off_time = 0.0;
    for (int c = 0; c < kNumCategories; ++c) {
        double dsum = 0, nsum = 0;
        for (double d : day_durations[c]) dsum += d;
        for (double d : night_durations[c]) nsum += d;
        out[stems[c]] = dsum + nsum;
        out[stems[c] + "_daytime"] = dsum;
        out[stems[c] + "_nighttime"] = nsum;
        out[stems[c] + "_daytime_std"] = detail::population_std(day_durations[c]);
        out[stems[c] + "_nighttime_std"] = detail::population_std(night_durations[c]);
        if (c != static_cast<int>(Category::home) && c != static_cast<int>(Category::school))
            off_time += dsum + nsum;
    }
    out["School_and_home_off_time"] = off_time;
    out["home_time_day_vs_night"] =
        out["home_time_daytime"] - out["home_time_nighttime"];
    out["school_time_day_vs_night"] =
        out["school_time_daytime"] - out["school_time_nighttime"];
}

// Distinct-place and revisit counts. The week context must contain the day's
// own visits. The "@nowhere" pseudo-identity never counts as a place.
inline void address_features(const std::vector<SemanticVisit>& day_visits,
                             const std::vector<SemanticVisit>& week_visits,
                             std::map<std::string, double>& out) {
    auto repetition = [](const std::vector<SemanticVisit>& vs) {
        std::set<std::string> distinct;
        std::size_t instances = 0;
        for (const SemanticVisit& v : vs) {
            if (v.address_identity == "@nowhere") continue;
            distinct.insert(v.address_identity);
            ++instances;
        }
        return std::pair<std::size_t, std::size_t>(distinct.size(), instances - distinct.size());
    };
    auto [day_distinct, day_rep] = repetition(day_visits);
    auto [week_distinct, week_rep] = repetition(week_visits);
    (void)week_distinct;
    out["number_of_location_visited"] = static_cast<double>(day_distinct);
    out["daily_repetition"] = static_cast<double>(day_rep);
    out["weekly_repetition"] = static_cast<double>(week_rep);
}

// Per-day academic context resolved by the dataset layer.
struct AcademicContext {
    // local epoch day -> scheduled class seconds (absent = none scheduled)
    std::map<std::int64_t, double> scheduled_seconds;
    // local epoch day -> attendance rate for that day (absent = unknown)
    std::map<std::int64_t, double> attendance;
    // local epoch day -> count of deadlines due
    std::map<std::int64_t, int> deadlines_due;
};

constexpr double kAbsenteeismThreshold = 0.7;

// Attendance rate for one day: overlap of school-category dwell with the
// scheduled class intervals, divided by scheduled seconds; 1.0 when nothing
// is scheduled. Intervals are absolute timestamps.
inline double attendance_rate(const std::vector<SemanticVisit>& day_visits,
                              const std::vector<std::pair<std::int64_t, std::int64_t>>& class_intervals) {
    std::int64_t scheduled = 0;
    for (const auto& [s, e] : class_intervals) scheduled += std::max<std::int64_t>(0, e - s);
    if (scheduled == 0) return 1.0;
    std::int64_t attended = 0;
    for (const auto& [s, e] : class_intervals)
        for (const SemanticVisit& v : day_visits)
            if (v.category == Category::school)
                attended += detail::overlap(v.start, v.end, s, e);
    return static_cast<double>(attended) / static_cast<double>(scheduled);
}

inline void academic_features(std::int64_t date, const AcademicContext& ctx,
                              std::map<std::string, double>& out) {
    auto scheduled = [&](std::int64_t d) {
        auto it = ctx.scheduled_seconds.find(d);
        return it == ctx.scheduled_seconds.end() ? 0.0 : it->second;
    };
    out["class_schedule"] = scheduled(date);
    auto att = ctx.attendance.find(date);
    out["attendance_rate"] = att == ctx.attendance.end() ? 1.0 : att->second;

    const int skip_offsets[5] = {0, 1, 2, 3, 7};
    const char* skip_names[5] = {"skip_class", "1_day_after_skip_class", "2_days_after_skip_class",
                                 "3_days_after_skip_class", "7_days_after_skip_class"};
    for (int i = 0; i < 5; ++i) {
        std::int64_t d = date - skip_offsets[i];
        bool skipped = false;
        if (scheduled(d) > 0.0) {
            auto it = ctx.attendance.find(d);
            if (it != ctx.attendance.end() && it->second < kAbsenteeismThreshold) skipped = true;
        }
        out[skip_names[i]] = skipped ? 1.0 : 0.0;
    }

    auto due = [&](std::int64_t d) {
        auto it = ctx.deadlines_due.find(d);
        return it == ctx.deadlines_due.end() ? 0 : it->second;
    };
    out["deadline"] = due(date);
    out["1_day_to_DL"] = due(date + 1);
    out["2_day_to_DL"] = due(date + 2);
    out["3_day_to_DL"] = due(date + 3);
}

inline void time_features(std::int64_t date, std::int64_t term_start, int origin_week,
                          std::map<std::string, double>& out) {
    if (date < term_start) throw Error("date precedes term start");
    out["week_date"] = iso_weekday(date);
    out["week"] = static_cast<double>((date - term_start) / 7 + origin_week);
}

// Five statistics over the day's latitude and longitude sequences. Requires
// at least one fix; callers flag fix-free days incomplete instead.
inline void raw_gps_features(const std::vector<GpsFix>& fixes, std::map<std::string, double>& out) {
    if (fixes.empty()) throw Error("raw_gps_features requires at least one fix");
    auto stats = [&out](const std::vector<double>& xs, const std::string& prefix) {
        double mean = 0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        out[prefix + "_mean"] = mean;
        out[prefix + "_max"] = *std::max_element(xs.begin(), xs.end());
        out[prefix + "_min"] = *std::min_element(xs.begin(), xs.end());
        out[prefix + "_std"] = detail::population_std(xs);
        out[prefix + "_iqr"] = detail::quantile(xs, 0.75) - detail::quantile(xs, 0.25);
    };
    std::vector<double> lats, lons;
    lats.reserve(fixes.size());
    lons.reserve(fixes.size());
    for (const GpsFix& f : fixes) {
        lats.push_back(f.lat);
        lons.push_back(f.lon);
    }
    stats(lats, "lat");
    stats(lons, "lon");
}

}  // namespace geopriv
