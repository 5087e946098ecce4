#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "geopriv/common.hpp"

namespace geopriv {

struct GpsFix {
    std::string user_id;
    std::int64_t timestamp = 0;  // UTC seconds
    double lat = 0.0;
    double lon = 0.0;
};

struct MapFeature {
    std::string feature_id;
    double lat = 0.0;
    double lon = 0.0;
    std::string location_type;
    std::string address_number;  // empty when absent
};

constexpr double kEarthRadiusM = 6'371'000.0;

// Great-circle distance in meters on a spherical earth.
inline double haversine(double lat1, double lon1, double lat2, double lon2) {
    constexpr double deg = 3.14159265358979323846 / 180.0;
    double phi1 = lat1 * deg, phi2 = lat2 * deg;
    double dphi = (lat2 - lat1) * deg;
    double dlam = (lon2 - lon1) * deg;
    double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
               std::cos(phi1) * std::cos(phi2) * std::sin(dlam / 2) * std::sin(dlam / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

// Uniform lat/lon grid over the ingested features. Immutable after build;
// queries are pure and safe for concurrent readers.
class MapIndex {
public:
    MapIndex() = default;

    static MapIndex build(std::vector<MapFeature> features, double cell_size_deg) {
        if (cell_size_deg <= 0.0) throw Error("cell_size_deg must be > 0");
        MapIndex idx;
        idx.cell_deg_ = cell_size_deg;
        idx.features_ = std::move(features);
        for (std::size_t i = 0; i < idx.features_.size(); ++i) {
            const MapFeature& f = idx.features_[i];
            if (f.lat < -90 || f.lat > 90 || f.lon < -180 || f.lon > 180)
                throw Error("feature " + f.feature_id + " has out-of-range coordinates");
            idx.cells_[idx.cell_key(f.lat, f.lon)].push_back(i);
        }
        return idx;
    }

    std::size_t size() const { return features_.size(); }
    const std::vector<MapFeature>& features() const { return features_; }
    double cell_size_deg() const { return cell_deg_; }

    // Nearest feature within radius_m; ties broken by smallest feature_id.
    std::optional<MapFeature> reverse_geocode(double lat, double lon, double radius_m) const {
        if (radius_m <= 0.0) throw Error("radius_m must be > 0");
        if (features_.empty()) return std::nullopt;

        // Radius in grid cells, padded by one cell. Longitude degrees shrink
        // with latitude, so scale by cos(lat) with a floor for safety.
        double lat_deg_m = 111'194.926644559;  // meters per degree latitude at R=6371km
        double coslat = std::max(0.01, std::cos(lat * 3.14159265358979323846 / 180.0));
        int rlat = static_cast<int>(radius_m / lat_deg_m / cell_deg_) + 1;
        int rlon = static_cast<int>(radius_m / (lat_deg_m * coslat) / cell_deg_) + 1;

        int ci = cell_i(lat), cj = cell_j(lon);
        const MapFeature* best = nullptr;
        double best_d = radius_m;
        for (int di = -rlat; di <= rlat; ++di) {
            for (int dj = -rlon; dj <= rlon; ++dj) {
                auto it = cells_.find(key(ci + di, cj + dj));
                if (it == cells_.end()) continue;
                for (std::size_t fi : it->second) {
                    const MapFeature& f = features_[fi];
                    double d = haversine(lat, lon, f.lat, f.lon);
                    if (d > best_d) continue;
                    if (d < best_d || !best || f.feature_id < best->feature_id) {
                        best = &f;
                        best_d = d;
                    }
                }
            }
        }
        if (!best) return std::nullopt;
        return *best;
    }

    // Versioned binary serialization (internal format).
    std::string serialize() const {
        std::string out = "GPIX0001";
        auto put_u64 = [&out](std::uint64_t v) {
            for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
        };
        auto put_str = [&](const std::string& s) {
            put_u64(s.size());
            out += s;
        };
        auto put_f64 = [&](double d) {
            std::uint64_t bits;
            std::memcpy(&bits, &d, 8);
            put_u64(bits);
        };
        put_f64(cell_deg_);
        put_u64(features_.size());
        for (const MapFeature& f : features_) {
            put_str(f.feature_id);
            put_f64(f.lat);
            put_f64(f.lon);
            put_str(f.location_type);
            put_str(f.address_number);
        }
        return out;
    }

    static MapIndex deserialize(const std::string& blob) {
        std::size_t pos = 0;
        auto need = [&](std::size_t n) {
            if (pos + n > blob.size()) throw Error("truncated index blob");
        };
        need(8);
        if (blob.compare(0, 8, "GPIX0001") != 0) throw Error("bad index magic");
        pos = 8;
        auto get_u64 = [&]() {
            need(8);
            std::uint64_t v = 0;
            for (int i = 0; i < 8; ++i)
                v |= static_cast<std::uint64_t>(static_cast<unsigned char>(blob[pos + i])) << (8 * i);
            pos += 8;
            return v;
        };
        auto get_str = [&]() {
            std::uint64_t n = get_u64();
            need(n);
            std::string s = blob.substr(pos, n);
            pos += n;
            return s;
        };
        auto get_f64 = [&]() {
            std::uint64_t bits = get_u64();
            double d;
            std::memcpy(&d, &bits, 8);
            return d;
        };
        double cell = get_f64();
        std::uint64_t n = get_u64();
        std::vector<MapFeature> fs;
        fs.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            MapFeature f;
            f.feature_id = get_str();
            f.lat = get_f64();
            f.lon = get_f64();
            f.location_type = get_str();
            f.address_number = get_str();
            fs.push_back(std::move(f));
        }
        return build(std::move(fs), cell);
    }

private:
    int cell_i(double lat) const { return static_cast<int>(std::floor(lat / cell_deg_)); }
    int cell_j(double lon) const { return static_cast<int>(std::floor(lon / cell_deg_)); }
    std::int64_t key(int i, int j) const {
        return (static_cast<std::int64_t>(i) << 32) ^ (static_cast<std::int64_t>(j) & 0xffffffffLL);
    }
    std::int64_t cell_key(double lat, double lon) const { return key(cell_i(lat), cell_j(lon)); }

    double cell_deg_ = 0.01;
    std::vector<MapFeature> features_;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> cells_;
};

}  // namespace geopriv
