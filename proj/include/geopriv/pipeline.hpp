#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geopriv/analysis.hpp"
#include "geopriv/common.hpp"
#include "geopriv/data.hpp"
#include "geopriv/dataset.hpp"
#include "geopriv/evaluation.hpp"
#include "geopriv/osm.hpp"
#include "geopriv/privacy.hpp"

namespace geopriv {

// One flat key=value configuration shared by all subcommands. A config file
// (one `key = value` per line, '#' comments) seeds the values; CLI flags
// override individual keys afterwards.
struct RunConfig {
    std::string data_dir = "data/cohort";   // bundle directory
    std::string map_path = "";              // .osm or serialized .bin; default <data_dir>/map.osm
    std::string category_map = "data/category_map_human.csv";
    std::string out_dir = "out";
    std::uint64_t seed = 7;
    std::string set = "AF";
    std::string regime = "kfold";
    std::string scenario = "rich";
    std::string balance = "";               // default depends on the regime
    std::string model = "xgb";
    int kfolds = 10;
    int min_loso_days = 10;
    std::int64_t tz_offset_s = 0;
    int week_origin = 14;
    double cell_size_deg = 0.01;
    // synthetic-cohort knobs
    int n_users = 30;
    int n_weeks = 9;
    double stressed_fraction = 0.5;
    std::string term_start = "2014-03-31";

    void set_key(const std::string& key, const std::string& value) {
        if (key == "data_dir") data_dir = value;
        else if (key == "map_path") map_path = value;
        else if (key == "category_map") category_map = value;
        else if (key == "out_dir") out_dir = value;
        else if (key == "seed") seed = std::stoull(value);
        else if (key == "set") set = value;
        else if (key == "regime") regime = value;
        else if (key == "scenario") scenario = value;
        else if (key == "balance") balance = value;
        else if (key == "model") model = value;
        else if (key == "kfolds") kfolds = std::stoi(value);
        else if (key == "min_loso_days") min_loso_days = std::stoi(value);
        else if (key == "tz_offset_s") tz_offset_s = std::stoll(value);
        else if (key == "week_origin") week_origin = std::stoi(value);
        else if (key == "cell_size_deg") cell_size_deg = std::stod(value);
        else if (key == "n_users") n_users = std::stoi(value);
        else if (key == "n_weeks") n_weeks = std::stoi(value);
        else if (key == "stressed_fraction") stressed_fraction = std::stod(value);
        else if (key == "term_start") term_start = value;
        else throw Error("unknown config key '" + key + "'");
    }

    void load_file(const std::string& path) {
        std::istringstream in(read_file(path));
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            auto eq = t.find('=');
            if (eq == std::string::npos)
                throw Error(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
            try {
                set_key(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
            } catch (const Error& e) {
                throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

    std::string resolved_map_path() const {
        return map_path.empty() ? data_dir + "/map.osm" : map_path;
    }

    // Canonical dump: ordered keys, one per line. Hashing this pins the full
    // effective configuration into the manifest.
    std::string dump() const {
        std::ostringstream s;
        s << "balance = " << balance << "\ncategory_map = " << category_map
          << "\ncell_size_deg = " << format_double(cell_size_deg)
          << "\ndata_dir = " << data_dir << "\nkfolds = " << kfolds
          << "\nmap_path = " << map_path << "\nmin_loso_days = " << min_loso_days
          << "\nmodel = " << model << "\nn_users = " << n_users << "\nn_weeks = " << n_weeks
          << "\nout_dir = " << out_dir << "\nregime = " << regime
          << "\nscenario = " << scenario << "\nseed = " << seed << "\nset = " << set
          << "\nstressed_fraction = " << format_double(stressed_fraction)
          << "\nterm_start = " << term_start << "\ntz_offset_s = " << tz_offset_s
          << "\nweek_origin = " << week_origin << "\n";
        return s.str();
    }
};

namespace pipeline_detail {

inline void write_manifest(const RunConfig& cfg, const std::string& command,
                           const std::vector<std::string>& outputs) {
    nlohmann::json m;
    m["command"] = command;
    m["config_fnv1a"] = fnv1a(cfg.dump());
    m["config"] = cfg.dump();
    m["outputs"] = outputs;
    write_file(cfg.out_dir + "/manifest_" + command + ".json", m.dump(2) + "\n");
}

}  // namespace pipeline_detail

inline MapIndex load_map_index(const std::string& path, double cell_size_deg) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".bin")
        return MapIndex::deserialize(read_file(path));
    return MapIndex::build(osm::parse_osm_file(path), cell_size_deg);
}

inline PipelineConfig pipeline_config(const RunConfig& cfg) {
    PipelineConfig pc;
    pc.tz_offset_s = cfg.tz_offset_s;
    pc.week_origin = cfg.week_origin;
    return pc;
}

// synth: deterministic cohort bundle (CSVs + map.osm) into data_dir.
inline void cmd_synth(const RunConfig& cfg) {
    CohortSpec spec;
    spec.n_users = cfg.n_users;
    spec.n_weeks = cfg.n_weeks;
    spec.stressed_fraction = cfg.stressed_fraction;
    spec.term_start_date = cfg.term_start;
    RawBundle bundle = generate_cohort(spec, cfg.seed);
    write_bundle(bundle, cfg.data_dir);
    std::filesystem::create_directories(cfg.out_dir);
    pipeline_detail::write_manifest(cfg, "synth", {cfg.data_dir});
}

// ingest-osm: parse the map and persist the spatial index.
inline void cmd_ingest(const RunConfig& cfg) {
    osm::ParseStats stats;
    auto features = osm::parse_osm_file(cfg.resolved_map_path(), &stats);
    MapIndex index = MapIndex::build(std::move(features), cfg.cell_size_deg);
    std::filesystem::create_directories(cfg.out_dir);
    write_file(cfg.out_dir + "/features.bin", index.serialize());
    nlohmann::json j{{"features", index.size()},
                     {"nodes_seen", stats.nodes_seen},
                     {"ways_seen", stats.ways_seen},
                     {"features_emitted", stats.features_emitted},
                     {"ways_skipped_unknown_node", stats.ways_skipped_unknown_node}};
    write_file(cfg.out_dir + "/ingest_stats.json", j.dump(2) + "\n");
    pipeline_detail::write_manifest(cfg, "ingest",
                                    {cfg.out_dir + "/features.bin", cfg.out_dir + "/ingest_stats.json"});
}

// extract: bundle + map -> labeled daily dataset (jsonl is the canonical
// form; the csv mirrors it for inspection).
inline LabeledDataset cmd_extract(const RunConfig& cfg) {
    RawBundle bundle = load_bundle(cfg.data_dir);
    MapIndex index = load_map_index(cfg.resolved_map_path(), cfg.cell_size_deg);
    CategoryMap map = CategoryMap::load(cfg.category_map);
    LabeledDataset ds = build_dataset(bundle, index, map, pipeline_config(cfg));
    std::filesystem::create_directories(cfg.out_dir);
    write_file(cfg.out_dir + "/dataset.jsonl", dataset_to_jsonl(ds));
    write_file(cfg.out_dir + "/dataset.csv", dataset_to_csv(ds));
    pipeline_detail::write_manifest(cfg, "extract",
                                    {cfg.out_dir + "/dataset.jsonl", cfg.out_dir + "/dataset.csv"});
    return ds;
}

inline LabeledDataset load_dataset(const RunConfig& cfg) {
    return dataset_from_jsonl(read_file(cfg.out_dir + "/dataset.jsonl"));
}

inline Balance default_balance(const RunConfig& cfg) {
    if (!cfg.balance.empty()) return balance_from_string(cfg.balance);
    // within-subject regimes rebalance with SMOTEENN; cross-subject with SMOTE
    return cfg.regime == "loso" ? Balance::smote : Balance::smoteenn;
}

// train: fit one model on the full (balanced) dataset and persist it.
inline void cmd_train(const RunConfig& cfg, const LabeledDataset& ds) {
    FeatureSet set = feature_set_from_string(cfg.set);
    auto v = detail::make_view(ds, set);
    TrainMatrix train;
    for (std::size_t i = 0; i < v.y.size(); ++i) train.push_row(v.X[i], v.y[i], v.ids[i]);
    TrainMatrix balanced = detail::apply_balance(train, default_balance(cfg), cfg.seed);
    ModelSpec spec = model_spec_from_string(cfg.model);
    Model model = fit_model(spec, balanced.X, balanced.y, 2, cfg.seed);
    nlohmann::json j = model_to_json(model);
    j["feature_set"] = cfg.set;
    j["feature_names"] = feature_names(set);
    std::filesystem::create_directories(cfg.out_dir);
    write_file(cfg.out_dir + "/model_" + cfg.set + "_" + cfg.model + ".json", j.dump() + "\n");
    pipeline_detail::write_manifest(cfg, "train",
                                    {cfg.out_dir + "/model_" + cfg.set + "_" + cfg.model + ".json"});
}

inline EvalReport run_eval(const RunConfig& cfg, const LabeledDataset& ds) {
    FeatureSet set = feature_set_from_string(cfg.set);
    ModelSpec spec = model_spec_from_string(cfg.model);
    Balance balance = default_balance(cfg);
    if (cfg.regime == "split") return random_split_eval(ds, set, spec, cfg.seed, balance);
    if (cfg.regime == "kfold") return kfold_eval(ds, set, spec, cfg.kfolds, cfg.seed, balance);
    if (cfg.regime == "loso")
        return loso_eval(ds, set, spec, static_cast<std::size_t>(cfg.min_loso_days), cfg.seed,
                         balance);
    throw Error("unknown regime '" + cfg.regime + "' (expected split|kfold|loso)");
}

inline EvalReport cmd_eval(const RunConfig& cfg, const LabeledDataset& ds) {
    EvalReport report = run_eval(cfg, ds);
    std::filesystem::create_directories(cfg.out_dir);
    std::string name = "eval_" + cfg.regime + "_" + cfg.set + "_" + cfg.model;
    write_file(cfg.out_dir + "/" + name + ".json", report.to_json().dump(2) + "\n");
    pipeline_detail::write_manifest(cfg, "eval", {cfg.out_dir + "/" + name + ".json"});
    return report;
}

inline void cmd_attack(const RunConfig& cfg, const LabeledDataset& ds) {
    FeatureSet set = feature_set_from_string(cfg.set);
    AttackScenario scenario = AttackScenario::from_string(cfg.scenario);
    AttackReport report = reid_attack(ds, set, scenario, cfg.seed);
    std::filesystem::create_directories(cfg.out_dir);
    std::string name = "attack_" + cfg.scenario + "_" + cfg.set;
    write_file(cfg.out_dir + "/" + name + ".json", report.to_json().dump(2) + "\n");
    write_file(cfg.out_dir + "/" + name + "_curve.csv", report.curve_to_csv());
    pipeline_detail::write_manifest(cfg, "attack", {cfg.out_dir + "/" + name + ".json",
                                                    cfg.out_dir + "/" + name + "_curve.csv"});
}

inline void cmd_analyze(const RunConfig& cfg, const LabeledDataset& ds) {
    FeatureSet set = feature_set_from_string(cfg.set);
    auto stats = screen_features(ds, set);
    std::filesystem::create_directories(cfg.out_dir);
    write_file(cfg.out_dir + "/analysis_" + cfg.set + ".csv", feature_stats_to_csv(stats));
    pipeline_detail::write_manifest(cfg, "analyze", {cfg.out_dir + "/analysis_" + cfg.set + ".csv"});
}

// report: gather every eval_*.json and attack_*.json in out_dir into two
// summary tables.
inline void cmd_report(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    std::vector<std::string> eval_files, attack_files;
    if (fs::exists(cfg.out_dir))
        for (const auto& entry : fs::directory_iterator(cfg.out_dir)) {
            std::string name = entry.path().filename().string();
            if (name.rfind("eval_", 0) == 0 && name.size() > 5 &&
                name.substr(name.size() - 5) == ".json")
                eval_files.push_back(entry.path().string());
            if (name.rfind("attack_", 0) == 0 && name.size() > 5 &&
                name.substr(name.size() - 5) == ".json")
                attack_files.push_back(entry.path().string());
        }
    std::sort(eval_files.begin(), eval_files.end());
    std::sort(attack_files.begin(), attack_files.end());

    std::string eval_csv = "regime,feature_set,model,acc_mean,acc_std,f1_mean,f1_std,folds\n";
    for (const std::string& f : eval_files) {
        nlohmann::json j = nlohmann::json::parse(read_file(f));
        eval_csv += j["regime"].get<std::string>() + "," + j["feature_set"].get<std::string>() +
                    "," + j["model"].get<std::string>() + "," +
                    format_double(j["acc_mean"].get<double>()) + "," +
                    format_double(j["acc_std"].get<double>()) + "," +
                    format_double(j["f1_mean"].get<double>()) + "," +
                    format_double(j["f1_std"].get<double>()) + "," +
                    std::to_string(j["folds"].size()) + "\n";
    }
    std::string attack_csv = "scenario,feature_set,top1,top5,n_users,test_rows\n";
    for (const std::string& f : attack_files) {
        nlohmann::json j = nlohmann::json::parse(read_file(f));
        attack_csv += j["scenario"].get<std::string>() + "," +
                      j["feature_set"].get<std::string>() + "," +
                      format_double(j["top1"].get<double>()) + "," +
                      format_double(j["top5"].get<double>()) + "," +
                      std::to_string(j["n_users"].get<std::size_t>()) + "," +
                      std::to_string(j["test_rows"].get<std::size_t>()) + "\n";
    }
    fs::create_directories(cfg.out_dir);
    write_file(cfg.out_dir + "/report_eval.csv", eval_csv);
    write_file(cfg.out_dir + "/report_attack.csv", attack_csv);
    pipeline_detail::write_manifest(cfg, "report", {cfg.out_dir + "/report_eval.csv",
                                                    cfg.out_dir + "/report_attack.csv"});
}

}  // namespace geopriv
