#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geopriv/common.hpp"
#include "geopriv/features.hpp"
#include "geopriv/labeling.hpp"

namespace geopriv {

struct LabeledRow {
    std::int64_t row_id = 0;  // stable id within the dataset, used for provenance tracking
    DailyFeatureRow features;
    DailyLabel label;
};

struct LabeledDataset {
    std::vector<LabeledRow> rows;
    std::map<std::string, std::size_t> days_per_user;

    static LabeledDataset from_rows(std::vector<LabeledRow> rows) {
        LabeledDataset ds;
        ds.rows = std::move(rows);
        for (std::size_t i = 0; i < ds.rows.size(); ++i) {
            ds.rows[i].row_id = static_cast<std::int64_t>(i);
            ++ds.days_per_user[ds.rows[i].features.user_id];
        }
        return ds;
    }
};

// Canonical CSV header: user_id, date, the 54 semantic names in documented
// order, then the 10 raw-GPS names, then the binary label.
inline std::string dataset_to_csv(const LabeledDataset& ds) {
    std::ostringstream out;
    out << "user_id,date";
    for (const std::string& n : feature_names(FeatureSet::AF)) out << ',' << n;
    for (const std::string& n : raw_gps_feature_names()) out << ',' << n;
    out << ",stress\n";
    for (const LabeledRow& r : ds.rows) {
        out << r.features.user_id << ',' << format_date(r.features.date);
        for (const std::string& n : feature_names(FeatureSet::AF))
            out << ',' << format_double(r.features.at(n));
        for (const std::string& n : raw_gps_feature_names())
            out << ',' << (r.features.raw_complete ? format_double(r.features.at(n)) : "");
        out << ',' << r.label.binary << '\n';
    }
    return out.str();
}

// JSON-lines form carrying completeness flags.
inline std::string dataset_to_jsonl(const LabeledDataset& ds) {
    std::ostringstream out;
    for (const LabeledRow& r : ds.rows) {
        nlohmann::json j;
        j["row_id"] = r.row_id;
        j["user_id"] = r.features.user_id;
        j["date"] = format_date(r.features.date);
        j["semantic_complete"] = r.features.semantic_complete;
        j["raw_complete"] = r.features.raw_complete;
        j["values"] = r.features.values;
        j["ordered_level"] = r.label.ordered_level;
        j["stress"] = r.label.binary;
        out << j.dump() << '\n';
    }
    return out.str();
}

inline LabeledDataset dataset_from_jsonl(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<LabeledRow> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        LabeledRow r;
        r.features.user_id = j.at("user_id").get<std::string>();
        r.features.date = parse_date(j.at("date").get<std::string>());
        r.features.semantic_complete = j.at("semantic_complete").get<bool>();
        r.features.raw_complete = j.at("raw_complete").get<bool>();
        for (const auto& [k, v] : j.at("values").items()) r.features.values[k] = v.get<double>();
        r.label.user_id = r.features.user_id;
        r.label.date = r.features.date;
        r.label.ordered_level = j.at("ordered_level").get<double>();
        r.label.binary = j.at("stress").get<int>();
        rows.push_back(std::move(r));
    }
    return LabeledDataset::from_rows(std::move(rows));
}

}  // namespace geopriv
