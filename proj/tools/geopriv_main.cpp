// geopriv: GPS -> semantic features -> stress classification, with
// re-identification risk evaluation. Subcommands cover the full pipeline:
// synth, ingest-osm, extract, train, eval, attack, analyze, report.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "geopriv/pipeline.hpp"

namespace {

// Flags shared by every subcommand; only flags the user passed override the
// config file.
void add_common_flags(CLI::App* cmd, geopriv::RunConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "key = value config file");
    cmd->add_option("--data-dir", cfg.data_dir, "bundle directory (gps.csv etc.)");
    cmd->add_option("--map", cfg.map_path, "map file (.osm xml or serialized .bin)");
    cmd->add_option("--category-map", cfg.category_map, "location_type,category csv");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--set", cfg.set, "feature set: AF|PA|LF|AO|LFAO|RAW");
    cmd->add_option("--regime", cfg.regime, "evaluation regime: split|kfold|loso");
    cmd->add_option("--scenario", cfg.scenario, "attack scenario: rich|moderate|limited");
    cmd->add_option("--balance", cfg.balance, "rebalancing: none|smote|smoteenn");
    cmd->add_option("--model", cfg.model, "classifier: rf|xgb");
    cmd->add_option("--kfolds", cfg.kfolds, "folds for the kfold regime");
    cmd->add_option("--min-loso-days", cfg.min_loso_days,
                    "hold out only subjects with more labeled days than this");
    cmd->add_option("--tz-offset", cfg.tz_offset_s, "local-time offset from UTC in seconds");
    cmd->add_option("--week-origin", cfg.week_origin, "week index of the term-start week");
    cmd->add_option("--n-users,--users", cfg.n_users, "synthetic cohort size");
    cmd->add_option("--n-weeks,--weeks", cfg.n_weeks, "synthetic term length in weeks");
    cmd->add_option("--stressed-fraction", cfg.stressed_fraction,
                    "synthetic stressed-archetype share");
    cmd->add_option("--term-start", cfg.term_start, "term start date (YYYY-MM-DD)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"privacy-aware semantic location pipeline"};
    app.require_subcommand(1);

    geopriv::RunConfig cfg;
    std::string config_path;

    CLI::App* synth = app.add_subcommand("synth", "generate a deterministic synthetic cohort");
    CLI::App* ingest = app.add_subcommand("ingest-osm", "parse a map and build the spatial index");
    CLI::App* extract = app.add_subcommand("extract", "build the labeled daily-feature dataset");
    CLI::App* train = app.add_subcommand("train", "fit one classifier on the full dataset");
    CLI::App* eval = app.add_subcommand("eval", "run an evaluation regime");
    CLI::App* attack = app.add_subcommand("attack", "simulate the re-identification attack");
    CLI::App* analyze = app.add_subcommand("analyze", "screen features against the label");
    CLI::App* report = app.add_subcommand("report", "aggregate eval/attack outputs into tables");
    for (CLI::App* c : {synth, ingest, extract, train, eval, attack, analyze, report})
        add_common_flags(c, cfg, config_path);

    // config file seeds the defaults; explicit flags override during parse
    try {
        for (int i = 1; i + 1 < argc; ++i)
            if (std::string(argv[i]) == "--config") cfg.load_file(argv[i + 1]);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    CLI11_PARSE(app, argc, argv);
    CLI::App* cmd = app.get_subcommands().front();

    try {
        const std::string name = cmd->get_name();
        if (name == "synth") {
            // `synth --out dir` without --data-dir writes the bundle to dir
            if (cmd->count("--out") && !cmd->count("--data-dir")) cfg.data_dir = cfg.out_dir;
            geopriv::cmd_synth(cfg);
            std::printf("wrote synthetic bundle to %s\n", cfg.data_dir.c_str());
        } else if (name == "ingest-osm") {
            geopriv::cmd_ingest(cfg);
            std::printf("wrote %s/features.bin\n", cfg.out_dir.c_str());
        } else if (name == "extract") {
            auto ds = geopriv::cmd_extract(cfg);
            std::printf("extracted %zu labeled user-days -> %s/dataset.jsonl\n", ds.rows.size(),
                        cfg.out_dir.c_str());
        } else if (name == "train") {
            geopriv::cmd_train(cfg, geopriv::load_dataset(cfg));
            std::printf("wrote %s/model_%s_%s.json\n", cfg.out_dir.c_str(), cfg.set.c_str(),
                        cfg.model.c_str());
        } else if (name == "eval") {
            auto r = geopriv::cmd_eval(cfg, geopriv::load_dataset(cfg));
            std::printf("%s %s %s: acc %.1f±%.1f  f1 %.1f±%.1f (%zu folds)\n", r.regime.c_str(),
                        r.feature_set.c_str(), r.model.c_str(), r.acc_mean, r.acc_std, r.f1_mean,
                        r.f1_std, r.folds.size());
        } else if (name == "attack") {
            geopriv::cmd_attack(cfg, geopriv::load_dataset(cfg));
            std::printf("wrote %s/attack_%s_%s.json\n", cfg.out_dir.c_str(), cfg.scenario.c_str(),
                        cfg.set.c_str());
        } else if (name == "analyze") {
            geopriv::cmd_analyze(cfg, geopriv::load_dataset(cfg));
            std::printf("wrote %s/analysis_%s.csv\n", cfg.out_dir.c_str(), cfg.set.c_str());
        } else if (name == "report") {
            geopriv::cmd_report(cfg);
            std::printf("wrote %s/report_eval.csv and %s/report_attack.csv\n",
                        cfg.out_dir.c_str(), cfg.out_dir.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
