#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "geopriv/common.hpp"
#include "geopriv/data.hpp"
#include "geopriv/learners.hpp"

namespace geopriv {

struct AttackScenario {
    std::string name;       // rich | moderate | limited
    double train_fraction;  // attacker's prior-knowledge share

    static AttackScenario from_string(const std::string& s) {
        if (s == "rich") return {"rich", 0.8};
        if (s == "moderate") return {"moderate", 0.5};
        if (s == "limited") return {"limited", 0.2};
        throw Error("unknown scenario '" + s + "' (expected rich|moderate|limited)");
    }
};

// Fraction of rows whose true id ranks within the k highest probabilities,
// for every k. Ties in probability break by ascending class id.
inline std::vector<double> topk_curve(const Matrix& prob_matrix,
                                      const std::vector<int>& true_ids) {
    if (prob_matrix.size() != true_ids.size() || prob_matrix.empty())
        throw Error("topk_curve: bad inputs");
    std::size_t n_classes = prob_matrix[0].size();
    std::vector<double> curve(n_classes, 0.0);
    for (std::size_t r = 0; r < prob_matrix.size(); ++r) {
        const std::vector<double>& p = prob_matrix[r];
        // rank of the true id = 1 + number of classes strictly ahead of it
        std::size_t rank = 1;
        for (std::size_t c = 0; c < n_classes; ++c) {
            if (c == static_cast<std::size_t>(true_ids[r])) continue;
            if (p[c] > p[true_ids[r]] ||
                (p[c] == p[true_ids[r]] && c < static_cast<std::size_t>(true_ids[r])))
                ++rank;
        }
        for (std::size_t k = rank - 1; k < n_classes; ++k) curve[k] += 1.0;
    }
    for (double& v : curve) v /= static_cast<double>(prob_matrix.size());
    return curve;
}

// Plug-in discrete mutual information (nats) between a quantile-binned
// feature and the user identity.
inline double mutual_information(const std::vector<double>& feature_values,
                                 const std::vector<int>& user_ids, int n_bins = 10) {
    if (feature_values.size() != user_ids.size() || feature_values.empty())
        throw Error("mutual_information: bad inputs");
    if (n_bins < 2) throw Error("mutual_information: n_bins must be >= 2");

    // quantile bin edges (linear interpolation); duplicates collapse bins
    std::vector<double> sorted = feature_values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;
    for (int b = 1; b < n_bins; ++b) {
        double p = static_cast<double>(b) / n_bins;
        double h = (static_cast<double>(sorted.size()) - 1.0) * p;
        std::size_t lo = static_cast<std::size_t>(std::floor(h));
        double q = lo + 1 < sorted.size()
                       ? sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo])
                       : sorted.back();
        edges.push_back(q);
    }
    auto bin_of = [&](double v) {
        return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
    };

    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> p_bin, p_id;
    double n = static_cast<double>(feature_values.size());
    for (std::size_t i = 0; i < feature_values.size(); ++i) {
        int b = bin_of(feature_values[i]);
        joint[{b, user_ids[i]}] += 1.0 / n;
        p_bin[b] += 1.0 / n;
        p_id[user_ids[i]] += 1.0 / n;
    }
    double mi = 0.0;
    for (const auto& [key, pxy] : joint)
        mi += pxy * std::log(pxy / (p_bin[key.first] * p_id[key.second]));
    return std::max(0.0, mi);
}

struct AttackReport {
    std::string feature_set;
    std::string scenario;
    double top1 = 0.0;  // percent
    double top5 = 0.0;
    std::vector<double> curve;  // k = 1..n_users, fractions
    std::size_t n_users = 0;
    std::size_t test_rows = 0;
    std::string attacker;
    std::uint64_t seed = 0;
    std::vector<std::string> excluded_users;

    nlohmann::json to_json() const {
        return {{"feature_set", feature_set}, {"scenario", scenario},
                {"top1", top1},               {"top5", top5},
                {"curve", curve},             {"n_users", n_users},
                {"test_rows", test_rows},     {"attacker", attacker},
                {"seed", seed},               {"excluded_users", excluded_users}};
    }

    std::string curve_to_csv() const {
        std::string out = "k,topk_accuracy\n";
        for (std::size_t k = 0; k < curve.size(); ++k)
            out += std::to_string(k + 1) + "," + format_double(curve[k]) + "\n";
        return out;
    }
};

// Attacker hyperparameters. The boosted attacker is kept shallow so full
// scenario sweeps stay fast; eta/subsample follow the stress classifiers.
inline ModelSpec default_attacker_spec() {
    ModelSpec spec = model_spec_from_string("xgb");
    spec.boost.n_stages = 25;
    spec.boost.tree.max_depth = 3;
    return spec;
}

// Simulated re-identification: a multiclass boosted attacker predicts the
// user id from the selected features. Per-user stratified split at the
// scenario's train fraction guarantees every identity appears in training.
inline AttackReport reid_attack_named(const LabeledDataset& ds,
                                      const std::vector<std::string>& names,
                                      const std::string& set_label, bool needs_raw,
                                      const AttackScenario& scenario, std::uint64_t seed,
                                      const ModelSpec& attacker = default_attacker_spec()) {
    std::map<std::string, std::vector<std::size_t>> by_user;
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
        if (needs_raw && !ds.rows[i].features.raw_complete) continue;
        by_user[ds.rows[i].features.user_id].push_back(i);
    }

    AttackReport report;
    report.feature_set = set_label;
    report.scenario = scenario.name;
    report.seed = seed;
    report.attacker = attacker.name + "/stages=" + std::to_string(attacker.boost.n_stages) +
                      "/depth=" + std::to_string(attacker.boost.tree.max_depth);

    std::vector<std::string> users;
    for (auto& [u, idx] : by_user) {
        if (idx.size() < 2) {
            report.excluded_users.push_back(u);
            continue;
        }
        users.push_back(u);
    }
    if (users.size() < 2) throw Error("reid_attack requires at least two users with >=2 rows");
    std::map<std::string, int> user_class;
    for (std::size_t c = 0; c < users.size(); ++c) user_class[users[c]] = static_cast<int>(c);
    report.n_users = users.size();

    Matrix train_X, test_X;
    std::vector<int> train_y, test_y;
    Rng rng(seed);
    for (const std::string& u : users) {
        std::vector<std::size_t> idx = by_user[u];
        rng.shuffle(idx);
        std::size_t n_train = std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::floor(scenario.train_fraction * static_cast<double>(idx.size()))));
        if (n_train == idx.size()) --n_train;  // keep at least one test row per user
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const LabeledRow& r = ds.rows[idx[i]];
            std::vector<double> x;
            x.reserve(names.size());
            for (const std::string& n : names) x.push_back(r.features.at(n));
            if (i < n_train) {
                train_X.push_back(std::move(x));
                train_y.push_back(user_class[u]);
            } else {
                test_X.push_back(std::move(x));
                test_y.push_back(user_class[u]);
            }
        }
    }

    Model model = fit_model(attacker, train_X, train_y, users.size(), rng.next_u64());
    Matrix probs;
    probs.reserve(test_X.size());
    for (const auto& x : test_X) probs.push_back(model.predict_proba(x));

    report.curve = topk_curve(probs, test_y);
    report.test_rows = test_X.size();
    report.top1 = 100.0 * report.curve[0];
    report.top5 = 100.0 * report.curve[std::min<std::size_t>(4, report.curve.size() - 1)];
    return report;
}

inline AttackReport reid_attack(const LabeledDataset& ds, FeatureSet set,
                                const AttackScenario& scenario, std::uint64_t seed,
                                const ModelSpec& attacker = default_attacker_spec()) {
    return reid_attack_named(ds, feature_names(set), to_string(set), set == FeatureSet::RAW,
                             scenario, seed, attacker);
}

}  // namespace geopriv
