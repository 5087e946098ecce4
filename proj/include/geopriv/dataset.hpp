#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "geopriv/common.hpp"
#include "geopriv/data.hpp"
#include "geopriv/features.hpp"
#include "geopriv/geo.hpp"
#include "geopriv/labeling.hpp"
#include "geopriv/semantic.hpp"

namespace geopriv {

struct ClassMeeting {
    int weekday = 1;            // ISO 1..7
    std::int64_t start_s = 0;   // local seconds of day
    std::int64_t end_s = 0;
    std::string location_hint;
};

struct DeadlineRecord {
    std::string user_id;
    std::int64_t date = 0;  // local epoch day
    int count = 0;
};

struct RawBundle {
    std::vector<GpsFix> fixes;
    std::map<std::string, std::vector<std::string>> enrollment;   // user -> class ids
    std::map<std::string, std::vector<ClassMeeting>> class_info;  // class id -> meetings
    std::vector<DeadlineRecord> deadlines;
    std::vector<EmaResponse> ema;
    std::int64_t term_start = 0;  // local epoch day
    std::vector<MapFeature> map_features;  // populated by the synthetic generator

    struct LoadStats {
        std::size_t bad_rows_skipped = 0;
        std::vector<std::string> warnings;
    } load_stats;
};

namespace detail {

inline std::int64_t parse_hhmm(const std::string& s) {
    int h = 0, m = 0;
    if (std::sscanf(s.c_str(), "%d:%d", &h, &m) != 2 || h < 0 || h > 23 || m < 0 || m > 59)
        throw Error("bad time of day: " + s);
    return static_cast<std::int64_t>(h) * 3600 + static_cast<std::int64_t>(m) * 60;
}

inline std::string format_hhmm(std::int64_t s) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d:%02d", static_cast<int>(s / 3600),
                  static_cast<int>((s % 3600) / 60));
    return buf;
}

// Reads a headered CSV, applying `consume` per data row; malformed rows are
// skipped and counted.
template <typename Fn>
void read_csv(const std::string& path, std::size_t n_cols, RawBundle::LoadStats& stats,
              Fn&& consume) {
    if (!std::filesystem::exists(path)) throw Error("missing bundle file: " + path);
    std::istringstream in(read_file(path));
    std::string line;
    bool header = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        auto parts = split(t, ',');
        if (parts.size() != n_cols) {
            ++stats.bad_rows_skipped;
            continue;
        }
        try {
            consume(parts);
        } catch (const std::exception&) {
            ++stats.bad_rows_skipped;
        }
    }
}

}  // namespace detail

// Loads the documented CSV bundle layout from a directory:
//   gps.csv(user_id,timestamp,lat,lon), enrollment.csv(user_id,class_id),
//   class_info.csv(class_id,weekday,start,end,location_hint),
//   deadlines.csv(user_id,date,count), ema.csv(user_id,timestamp,raw_code),
//   term.csv(term_start) [optional; defaults to the earliest fix date].
inline RawBundle load_bundle(const std::string& dir) {
    namespace fs = std::filesystem;
    RawBundle b;
    auto& stats = b.load_stats;

    detail::read_csv(dir + "/gps.csv", 4, stats, [&](const std::vector<std::string>& p) {
        GpsFix f;
        f.user_id = p[0];
        f.timestamp = std::stoll(p[1]);
        f.lat = std::stod(p[2]);
        f.lon = std::stod(p[3]);
        if (f.lat < -90 || f.lat > 90 || f.lon < -180 || f.lon > 180)
            throw Error("coordinates out of range");
        b.fixes.push_back(std::move(f));
    });
    detail::read_csv(dir + "/enrollment.csv", 2, stats, [&](const std::vector<std::string>& p) {
        b.enrollment[p[0]].push_back(p[1]);
    });
    detail::read_csv(dir + "/class_info.csv", 5, stats, [&](const std::vector<std::string>& p) {
        ClassMeeting m;
        m.weekday = std::stoi(p[1]);
        if (m.weekday < 1 || m.weekday > 7) throw Error("weekday out of range");
        m.start_s = detail::parse_hhmm(p[2]);
        m.end_s = detail::parse_hhmm(p[3]);
        if (m.end_s <= m.start_s) throw Error("class ends before it starts");
        m.location_hint = p[4];
        b.class_info[p[0]].push_back(std::move(m));
    });
    detail::read_csv(dir + "/deadlines.csv", 3, stats, [&](const std::vector<std::string>& p) {
        DeadlineRecord d;
        d.user_id = p[0];
        d.date = parse_date(p[1]);
        d.count = std::stoi(p[2]);
        if (d.count < 0) throw Error("negative deadline count");
        b.deadlines.push_back(std::move(d));
    });
    detail::read_csv(dir + "/ema.csv", 3, stats, [&](const std::vector<std::string>& p) {
        EmaResponse r;
        r.user_id = p[0];
        r.timestamp = std::stoll(p[1]);
        r.raw_code = std::stoi(p[2]);
        if (r.raw_code < 1 || r.raw_code > 5) throw Error("raw code out of range");
        b.ema.push_back(std::move(r));
    });

    if (fs::exists(dir + "/term.csv")) {
        std::istringstream in(read_file(dir + "/term.csv"));
        std::string line;
        std::getline(in, line);  // header
        if (std::getline(in, line)) b.term_start = parse_date(trim(line));
    } else if (!b.fixes.empty()) {
        std::int64_t min_ts = b.fixes[0].timestamp;
        for (const GpsFix& f : b.fixes) min_ts = std::min(min_ts, f.timestamp);
        b.term_start = min_ts / kSecondsPerDay;
        stats.warnings.push_back("term.csv missing; term_start taken from earliest fix");
    }
    if (b.fixes.empty()) stats.warnings.push_back("gps.csv contains no fixes");
    return b;
}

struct PipelineConfig {
    VisitOptions visit;
    std::int64_t tz_offset_s = 0;  // added to UTC timestamps to get local time
    int week_origin = 14;          // week index assigned to the term-start week
};

// Joins features with labels: one row per (user, local day) with at least one
// EMA response and at least one GPS fix.
inline LabeledDataset build_dataset(const RawBundle& bundle, const MapIndex& index,
                                    const CategoryMap& map, const PipelineConfig& config) {
    // group fixes per user per local day, sorted by time
    std::map<std::string, std::map<std::int64_t, std::vector<GpsFix>>> fixes_by_user_day;
    for (const GpsFix& f : bundle.fixes) {
        std::int64_t day = (f.timestamp + config.tz_offset_s) / kSecondsPerDay;
        fixes_by_user_day[f.user_id][day].push_back(f);
    }
    for (auto& [u, days] : fixes_by_user_day)
        for (auto& [d, fs] : days)
            std::sort(fs.begin(), fs.end(),
                      [](const GpsFix& a, const GpsFix& b) { return a.timestamp < b.timestamp; });

    // group EMA per user per local day
    std::map<std::string, std::map<std::int64_t, std::vector<EmaResponse>>> ema_by_user_day;
    for (const EmaResponse& r : bundle.ema)
        ema_by_user_day[r.user_id][(r.timestamp + config.tz_offset_s) / kSecondsPerDay].push_back(r);

    // per-user deadline calendars
    std::map<std::string, std::map<std::int64_t, int>> deadlines_by_user;
    for (const DeadlineRecord& d : bundle.deadlines) deadlines_by_user[d.user_id][d.date] += d.count;

    std::vector<LabeledRow> rows;
    for (const auto& [user, ema_days] : ema_by_user_day) {
        auto fit = fixes_by_user_day.find(user);
        if (fit == fixes_by_user_day.end()) continue;
        const auto& fix_days = fit->second;

        // visits per day, clipped to the local-day window
        std::map<std::int64_t, std::vector<SemanticVisit>> visits_by_day;
        for (const auto& [day, fixes] : fix_days) {
            std::int64_t day_start = day * kSecondsPerDay - config.tz_offset_s;
            std::int64_t day_end = day_start + kSecondsPerDay;
            auto visits = fixes_to_visits(fixes, index, map, config.visit);
            for (SemanticVisit& v : visits) {
                v.start = std::max(v.start, day_start);
                v.end = std::min(v.end, day_end);
                if (v.end > v.start) visits_by_day[day].push_back(v);
            }
        }

        // academic context: schedule and attendance for every day with data
        AcademicContext ctx;
        auto enr = bundle.enrollment.find(user);
        auto class_intervals_for = [&](std::int64_t day) {
            std::vector<std::pair<std::int64_t, std::int64_t>> intervals;
            if (enr == bundle.enrollment.end()) return intervals;
            int wd = iso_weekday(day);
            std::int64_t day_start = day * kSecondsPerDay - config.tz_offset_s;
            for (const std::string& cid : enr->second) {
                auto ci = bundle.class_info.find(cid);
                if (ci == bundle.class_info.end()) continue;
                for (const ClassMeeting& m : ci->second)
                    if (m.weekday == wd)
                        intervals.emplace_back(day_start + m.start_s, day_start + m.end_s);
            }
            return intervals;
        };
        for (const auto& [day, visits] : visits_by_day) {
            auto intervals = class_intervals_for(day);
            std::int64_t scheduled = 0;
            for (const auto& [s, e] : intervals) scheduled += e - s;
            ctx.scheduled_seconds[day] = static_cast<double>(scheduled);
            ctx.attendance[day] = attendance_rate(visits, intervals);
        }
        auto dl = deadlines_by_user.find(user);
        if (dl != deadlines_by_user.end()) ctx.deadlines_due = dl->second;

        for (const auto& [day, responses] : ema_days) {
            auto fdit = fix_days.find(day);
            if (fdit == fix_days.end()) continue;  // no GPS that day
            auto label = daily_label(responses, day);
            if (!label) continue;

            DailyFeatureRow row;
            row.user_id = user;
            row.date = day;
            std::int64_t day_start = day * kSecondsPerDay - config.tz_offset_s;

            const std::vector<SemanticVisit> empty;
            auto vit = visits_by_day.find(day);
            const auto& day_visits = vit == visits_by_day.end() ? empty : vit->second;
            row.semantic_complete = !day_visits.empty();

            location_function_features(day_visits, day_start, row.values);

            // ISO week context: the user's visits over the week containing the day
            std::int64_t monday = day - (iso_weekday(day) - 1);
            std::vector<SemanticVisit> week_visits;
            for (std::int64_t d = monday; d < monday + 7; ++d) {
                auto wit = visits_by_day.find(d);
                if (wit != visits_by_day.end())
                    week_visits.insert(week_visits.end(), wit->second.begin(), wit->second.end());
            }
            address_features(day_visits, week_visits, row.values);
            academic_features(day, ctx, row.values);
            time_features(day, bundle.term_start, config.week_origin, row.values);
            raw_gps_features(fdit->second, row.values);
            row.raw_complete = true;

            LabeledRow lr;
            lr.features = std::move(row);
            lr.label = *label;
            rows.push_back(std::move(lr));
        }
    }
    return LabeledDataset::from_rows(std::move(rows));
}

// ---------------------------------------------------------------------------
// Synthetic cohort generation
// ---------------------------------------------------------------------------

struct CohortSpec {
    int n_users = 30;
    int n_weeks = 9;
    double stressed_fraction = 0.5;  // archetype mix
    double lat0 = 43.70;
    double lon0 = -72.29;
    std::string term_start_date = "2014-03-31";  // a Monday
};

namespace synth_detail {

constexpr std::int64_t kSample = 20 * 60;  // fix sampling interval

struct Venue {
    std::size_t feature;  // index into RawBundle::map_features
};

struct UserProfile {
    std::string id;
    bool stressed = false;
    std::size_t home = 0;       // feature indices
    std::size_t workplace = 0;
    std::vector<std::size_t> shops;       // habitual shops (distinct count is idiosyncratic)
    std::vector<std::size_t> recreation;  // habitual venues
    std::string class_id;
    std::int64_t class_seconds = 0;
    double recreation_mean_h = 2.0;
    double work_mean_h = 1.0;
    double stress_bias = 0.0;
};

}  // namespace synth_detail

// Deterministic synthetic cohort with planted behavioral effects:
// non-stressed archetypes average ~2 h recreation and ~1 h workplace time a
// day, stressed archetypes roughly half the recreation and almost no
// workplace time. Each user has a unique home, a user-specific class
// schedule, and an idiosyncratic count of habitual places, so identity leaks
// through RAW and AF features much more than through PA.
inline RawBundle generate_cohort(const CohortSpec& spec, std::uint64_t seed) {
    if (spec.n_users <= 0) throw Error("generate_cohort: n_users must be positive");
    if (spec.n_weeks <= 0) throw Error("generate_cohort: n_weeks must be positive");
    using namespace synth_detail;

    RawBundle bundle;
    bundle.term_start = parse_date(spec.term_start_date);
    Rng rng(seed);

    // --- map: one feature per grid slot, spacing ~550 m keeps geocoding exact
    const double step = 0.005;
    int next_node = 1;
    auto add_feature = [&](double dlat, double dlon, const std::string& type,
                           const std::string& number) {
        MapFeature f;
        f.feature_id = "n" + std::to_string(next_node++);
        f.lat = spec.lat0 + dlat;
        f.lon = spec.lon0 + dlon;
        f.location_type = type;
        f.address_number = number;
        bundle.map_features.push_back(std::move(f));
        return bundle.map_features.size() - 1;
    };

    std::size_t school = add_feature(0, 0, "university", "1");
    const char* shop_types[4] = {"cafe", "supermarket", "restaurant", "convenience"};
    const char* rec_types[4] = {"pub", "sports_centre", "pitch", "arts_centre"};
    std::vector<std::size_t> workplaces, shops, recs;
    for (int i = 0; i < 10; ++i)
        workplaces.push_back(add_feature(step * (i + 1), -step, "office", std::to_string(100 + i)));
    for (int i = 0; i < 8; ++i)
        shops.push_back(add_feature(-step, step * (i + 1), shop_types[i % 4], std::to_string(200 + i)));
    for (int i = 0; i < 8; ++i)
        recs.push_back(add_feature(step * (i + 1), step * 2, rec_types[i % 4], std::to_string(300 + i)));
    add_feature(-step, -step, "bus_stop", "");

    // --- users
    std::vector<UserProfile> users;
    int n_stressed = static_cast<int>(std::lround(spec.stressed_fraction * spec.n_users));
    for (int u = 0; u < spec.n_users; ++u) {
        UserProfile p;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "u%02d", u);
        p.id = idbuf;
        p.stressed = u < n_stressed;
        p.home = add_feature(step * (2 + u / 6), step * (3 + u % 6), "dormitory",
                             std::to_string(u + 1));
        p.workplace = workplaces[u % workplaces.size()];
        // idiosyncratic habits: distinct-place counts and venue choices
        int n_shops = 1 + u % 4;
        int n_recs = 1 + (u / 4) % 3;
        for (int i = 0; i < n_shops; ++i) p.shops.push_back(shops[(u + i * 3) % shops.size()]);
        for (int i = 0; i < n_recs; ++i) p.recreation.push_back(recs[(u + i * 5) % recs.size()]);
        // one class per user with a user-specific weekday duration
        p.class_id = "class_" + p.id;
        p.class_seconds = (60 + 4 * u) * 60;
        bundle.enrollment[p.id] = {p.class_id};
        for (int wd = 1; wd <= 5; ++wd)
            bundle.class_info[p.class_id].push_back(
                ClassMeeting{wd, 9 * 3600, 9 * 3600 + p.class_seconds, "university"});
        if (p.stressed) {
            p.recreation_mean_h = 1.0;
            p.work_mean_h = 0.1;
            p.stress_bias = 1.0;
        } else {
            p.recreation_mean_h = 2.0;
            p.work_mean_h = 1.0;
            p.stress_bias = -1.2;
        }
        users.push_back(std::move(p));
    }

    // --- daily routines
    const int n_days = spec.n_weeks * 7;
    for (std::size_t ui = 0; ui < users.size(); ++ui) {
        const UserProfile& p = users[ui];
        Rng urng = rng.fork(ui);

        // sparse per-user deadlines
        for (int d = 0; d < n_days + 3; ++d) {
            if (urng.next_double() < 0.15) {
                int count = 1 + static_cast<int>(urng.next_below(2));
                bundle.deadlines.push_back(DeadlineRecord{p.id, bundle.term_start + d, count});
            }
        }
        std::map<std::int64_t, int> deadline_cal;
        for (const DeadlineRecord& d : bundle.deadlines)
            if (d.user_id == p.id) deadline_cal[d.date] += d.count;

        for (int d = 0; d < n_days; ++d) {
            std::int64_t date = bundle.term_start + d;
            int weekday = iso_weekday(date);
            bool is_weekday = weekday <= 5;
            std::int64_t day_start = date * kSecondsPerDay;

            // timeline: slot index (20-min quanta) -> feature index
            const int n_slots = static_cast<int>(kSecondsPerDay / kSample);
            std::vector<std::size_t> slot(n_slots, p.home);

            auto occupy = [&](std::int64_t from_s, std::int64_t to_s, std::size_t venue) {
                int a = static_cast<int>(from_s / kSample);
                int b = static_cast<int>((to_s + kSample - 1) / kSample);
                for (int s = std::max(0, a); s < std::min(n_slots, b); ++s) slot[s] = venue;
            };

            bool attended = false;
            if (is_weekday && urng.next_double() < 0.88) {
                attended = true;
                // arrival jitter keeps GPS-observed school time noisy
                std::int64_t arrive = 9 * 3600 + (urng.next_int(-1, 1)) * kSample;
                occupy(arrive, 9 * 3600 + p.class_seconds + urng.next_int(0, 1) * kSample, school);
            }
            (void)attended;

            double work_h = std::max(0.0, p.work_mean_h + 0.4 * urng.next_gaussian());
            if (!is_weekday) work_h *= 0.3;
            std::int64_t work_s = static_cast<std::int64_t>(work_h * 3600);
            if (work_s >= kSample) occupy(14 * 3600, 14 * 3600 + work_s, p.workplace);

            double rec_h = std::max(0.0, p.recreation_mean_h + 0.5 * urng.next_gaussian());
            std::int64_t rec_s = static_cast<std::int64_t>(rec_h * 3600);
            if (rec_s >= kSample) {
                std::size_t venue = p.recreation[urng.next_below(p.recreation.size())];
                occupy(18 * 3600 + 3600, 19 * 3600 + rec_s, venue);
            }

            // habitual shop visits, one quantum each
            for (std::size_t s = 0; s < p.shops.size(); ++s) {
                if (urng.next_double() < 0.8)
                    occupy(12 * 3600 + static_cast<std::int64_t>(s) * kSample,
                           12 * 3600 + static_cast<std::int64_t>(s + 1) * kSample, p.shops[s]);
            }

            // fixes every 20 minutes with ~10 m jitter
            for (int s = 0; s < n_slots; ++s) {
                const MapFeature& at = bundle.map_features[slot[s]];
                GpsFix f;
                f.user_id = p.id;
                f.timestamp = day_start + static_cast<std::int64_t>(s) * kSample;
                f.lat = at.lat + 1e-4 * urng.next_gaussian() * 0.9;
                f.lon = at.lon + 1e-4 * urng.next_gaussian() * 0.9;
                bundle.fixes.push_back(std::move(f));
            }

            // latent daily stress from the planted behavioral deficits
            auto dl = deadline_cal.find(date);
            double deadlines_today = dl == deadline_cal.end() ? 0.0 : dl->second;
            double z = p.stress_bias + 0.8 * (2.0 - rec_h) + 0.8 * (1.0 - work_h) +
                       0.4 * deadlines_today + 0.5 * urng.next_gaussian();
            bool stressed_day = urng.next_double() < 1.0 / (1.0 + std::exp(-z));

            int n_reports = 1 + static_cast<int>(urng.next_below(2));
            for (int r = 0; r < n_reports; ++r) {
                EmaResponse resp;
                resp.user_id = p.id;
                resp.timestamp = day_start + 20 * 3600 + r * 600;
                // raw codes 1..3 carry the stressed meanings, 4..5 the calm ones
                resp.raw_code = stressed_day ? 1 + static_cast<int>(urng.next_below(3))
                                             : 4 + static_cast<int>(urng.next_below(2));
                bundle.ema.push_back(std::move(resp));
            }
        }
    }
    return bundle;
}

// ---- bundle serialization (the documented CSV layout + map.osm) ----

inline std::string map_features_to_osm(const std::vector<MapFeature>& features) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\">\n";
    auto type_key = [](const std::string& type) {
        // enough tag-key variety to exercise the parser's priority order
        if (type == "office") return "office";
        if (type == "dormitory" || type == "apartments" || type == "house") return "building";
        if (type == "supermarket" || type == "convenience") return "shop";
        if (type == "pitch" || type == "sports_centre") return "leisure";
        return "amenity";
    };
    for (const MapFeature& f : features) {
        out << "  <node id=\"" << f.feature_id.substr(1) << "\" lat=\"" << format_double(f.lat)
            << "\" lon=\"" << format_double(f.lon) << "\">\n";
        out << "    <tag k=\"" << type_key(f.location_type) << "\" v=\"" << f.location_type
            << "\"/>\n";
        if (!f.address_number.empty())
            out << "    <tag k=\"addr:housenumber\" v=\"" << f.address_number << "\"/>\n";
        out << "  </node>\n";
    }
    out << "</osm>\n";
    return out.str();
}

inline void write_bundle(const RawBundle& bundle, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::ostringstream gps;
    gps << "user_id,timestamp,lat,lon\n";
    for (const GpsFix& f : bundle.fixes)
        gps << f.user_id << ',' << f.timestamp << ',' << format_double(f.lat) << ','
            << format_double(f.lon) << '\n';
    write_file(dir + "/gps.csv", gps.str());

    std::ostringstream enr;
    enr << "user_id,class_id\n";
    for (const auto& [user, classes] : bundle.enrollment)
        for (const std::string& c : classes) enr << user << ',' << c << '\n';
    write_file(dir + "/enrollment.csv", enr.str());

    std::ostringstream ci;
    ci << "class_id,weekday,start,end,location_hint\n";
    for (const auto& [cid, meetings] : bundle.class_info)
        for (const ClassMeeting& m : meetings)
            ci << cid << ',' << m.weekday << ',' << detail::format_hhmm(m.start_s) << ','
               << detail::format_hhmm(m.end_s) << ',' << m.location_hint << '\n';
    write_file(dir + "/class_info.csv", ci.str());

    std::ostringstream dl;
    dl << "user_id,date,count\n";
    for (const DeadlineRecord& d : bundle.deadlines)
        dl << d.user_id << ',' << format_date(d.date) << ',' << d.count << '\n';
    write_file(dir + "/deadlines.csv", dl.str());

    std::ostringstream ema;
    ema << "user_id,timestamp,raw_code\n";
    for (const EmaResponse& r : bundle.ema)
        ema << r.user_id << ',' << r.timestamp << ',' << r.raw_code << '\n';
    write_file(dir + "/ema.csv", ema.str());

    write_file(dir + "/term.csv", "term_start\n" + format_date(bundle.term_start) + "\n");

    if (!bundle.map_features.empty())
        write_file(dir + "/map.osm", map_features_to_osm(bundle.map_features));
}

}  // namespace geopriv
