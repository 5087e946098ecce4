#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "geopriv/common.hpp"
#include "geopriv/geo.hpp"

namespace geopriv {

enum class Category : int {
    home = 0,
    school = 1,
    shop = 2,
    workplace = 3,
    recreation = 4,
    travel = 5,
    others = 6,
};

constexpr int kNumCategories = 7;

inline const std::array<std::string, kNumCategories>& category_names() {
    static const std::array<std::string, kNumCategories> names = {
        "home", "school", "shop", "workplace", "recreation", "travel", "others"};
    return names;
}

inline const std::string& to_string(Category c) { return category_names()[static_cast<int>(c)]; }

inline std::optional<Category> category_from_string(const std::string& s) {
    const auto& names = category_names();
    for (int i = 0; i < kNumCategories; ++i)
        if (names[i] == s) return static_cast<Category>(i);
    return std::nullopt;
}

// Total map from location type to life category. Unknown types fall through
// to `others` at lookup time.
class CategoryMap {
public:
    CategoryMap() = default;
    CategoryMap(std::map<std::string, Category> entries, std::string provenance)
        : entries_(std::move(entries)), provenance_(std::move(provenance)) {}

    // Loads `location_type,category` lines; '#' starts a comment. Duplicate
    // keys keep the last value and bump the duplicate counter.
    static CategoryMap load(const std::string& path) {
        std::istringstream in(read_file(path));
        CategoryMap m;
        m.provenance_ = path;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            auto parts = split(t, ',');
            if (parts.size() != 2)
                throw Error(path + ":" + std::to_string(lineno) + ": expected 'location_type,category'");
            std::string key = trim(parts[0]);
            std::string cat = trim(parts[1]);
            auto c = category_from_string(cat);
            if (!c)
                throw Error(path + ":" + std::to_string(lineno) + ": unknown category '" + cat + "'");
            if (m.entries_.count(key)) ++m.duplicates_;
            m.entries_[key] = *c;
        }
        return m;
    }

    Category categorize(const std::string& location_type) const {
        auto it = entries_.find(location_type);
        if (it != entries_.end()) return it->second;
        unmapped_.insert(location_type);  // logged once per type by callers
        return Category::others;
    }

    const std::map<std::string, Category>& entries() const { return entries_; }
    const std::string& provenance() const { return provenance_; }
    std::size_t duplicates() const { return duplicates_; }
    const std::set<std::string>& unmapped_types() const { return unmapped_; }

private:
    std::map<std::string, Category> entries_;
    std::string provenance_;
    std::size_t duplicates_ = 0;
    mutable std::set<std::string> unmapped_;
};

// Share of keys assigned identical categories. Requires identical key sets.
inline double map_agreement(const CategoryMap& a, const CategoryMap& b) {
    std::vector<std::string> only_a, only_b;
    for (const auto& [k, v] : a.entries())
        if (!b.entries().count(k)) only_a.push_back(k);
    for (const auto& [k, v] : b.entries())
        if (!a.entries().count(k)) only_b.push_back(k);
    if (!only_a.empty() || !only_b.empty()) {
        std::string msg = "category maps cover different key sets;";
        for (const auto& k : only_a) msg += " -" + k;
        for (const auto& k : only_b) msg += " +" + k;
        throw Error(msg);
    }
    if (a.entries().empty()) throw Error("cannot compare empty category maps");
    std::size_t same = 0;
    for (const auto& [k, v] : a.entries())
        if (b.entries().at(k) == v) ++same;
    return static_cast<double>(same) / static_cast<double>(a.entries().size());
}

inline std::vector<std::string> map_disagreements(const CategoryMap& a, const CategoryMap& b) {
    std::vector<std::string> keys;
    for (const auto& [k, v] : a.entries())
        if (b.entries().at(k) != v) keys.push_back(k);
    return keys;
}

// Stable place identity: house number + type when numbered, otherwise the
// feature id keeps distinct unnumbered places distinct.
inline std::string address_identity(const MapFeature& f) {
    if (!f.address_number.empty()) return f.address_number + " " + f.location_type;
    return "@" + f.feature_id + " " + f.location_type;
}

struct SemanticVisit {
    std::string user_id;
    Category category = Category::others;
    std::string address_identity;
    std::int64_t start = 0;  // UTC seconds
    std::int64_t end = 0;    // end > start
};

struct VisitOptions {
    double geocode_radius_m = 75.0;
    std::int64_t gap_cap_s = 40 * 60;            // 2x sampling interval
    std::int64_t nominal_interval_s = 20 * 60;   // trailing-fix dwell
};

// Convert one user's sorted fix stream into dwell visits. Each fix
// contributes min(next.ts - ts, gap_cap); the last fix contributes the
// nominal interval. Consecutive fixes with the same address identity and no
// capped gap between them merge into one visit, so every visit's span equals
// its attributed dwell. Ungeocodable fixes become others/"@nowhere".
inline std::vector<SemanticVisit> fixes_to_visits(const std::vector<GpsFix>& fixes,
                                                  const MapIndex& index,
                                                  const CategoryMap& map,
                                                  const VisitOptions& opt = {}) {
    std::vector<SemanticVisit> visits;
    if (fixes.empty()) return visits;
    for (std::size_t i = 1; i < fixes.size(); ++i) {
        if (fixes[i].timestamp < fixes[i - 1].timestamp)
            throw Error("fixes_to_visits requires fixes sorted by timestamp");
        if (fixes[i].user_id != fixes[0].user_id)
            throw Error("fixes_to_visits expects a single user's fixes");
    }
    for (std::size_t i = 0; i < fixes.size(); ++i) {
        const GpsFix& fx = fixes[i];
        std::int64_t dwell;
        if (i + 1 < fixes.size()) {
            // a capped gap leaves this visit's end short of the next fix,
            // which also breaks the merge below
            dwell = std::min(fixes[i + 1].timestamp - fx.timestamp, opt.gap_cap_s);
        } else {
            dwell = opt.nominal_interval_s;
        }
        if (dwell <= 0) dwell = 1;  // coincident fixes still occupy an instant

        std::string identity = "@nowhere";
        Category cat = Category::others;
        if (auto f = index.reverse_geocode(fx.lat, fx.lon, opt.geocode_radius_m)) {
            identity = address_identity(*f);
            cat = map.categorize(f->location_type);
        }

        bool merged = false;
        if (!visits.empty()) {
            SemanticVisit& last = visits.back();
            if (last.address_identity == identity && last.end == fx.timestamp) {
                last.end = fx.timestamp + dwell;
                merged = true;
            }
        }
        if (!merged) {
            visits.push_back(SemanticVisit{fx.user_id, cat, identity, fx.timestamp, fx.timestamp + dwell});
        }
    }
    return visits;
}

}  // namespace geopriv
