#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "geopriv/common.hpp"
#include "geopriv/data.hpp"
#include "geopriv/learners.hpp"
#include "geopriv/resampling.hpp"

namespace geopriv {

enum class Balance { none, smote, smoteenn };

inline Balance balance_from_string(const std::string& s) {
    if (s == "none") return Balance::none;
    if (s == "smote") return Balance::smote;
    if (s == "smoteenn") return Balance::smoteenn;
    throw Error("unknown balance '" + s + "' (expected none|smote|smoteenn)");
}

struct MetricResult {
    double accuracy = 0.0;
    double f1 = 0.0;        // positive (stress) class
    double macro_f1 = 0.0;
};

inline MetricResult metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.empty() || y_true.size() != y_pred.size())
        throw Error("metrics: need equal-length nonempty label vectors");
    MetricResult m;
    std::size_t correct = 0;
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == y_pred[i]) ++correct;
        if (y_pred[i] == 1 && y_true[i] == 1) ++tp;
        if (y_pred[i] == 1 && y_true[i] == 0) ++fp;
        if (y_pred[i] == 0 && y_true[i] == 1) ++fn;
        if (y_pred[i] == 0 && y_true[i] == 0) ++tn;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());
    auto f1_of = [](double tp_, double fp_, double fn_) {
        double denom = 2 * tp_ + fp_ + fn_;
        return denom > 0 ? 2 * tp_ / denom : 0.0;
    };
    m.f1 = f1_of(tp, fp, fn);
    m.macro_f1 = (f1_of(tp, fp, fn) + f1_of(tn, fn, fp)) / 2.0;
    return m;
}

struct FoldDetail {
    double accuracy = 0.0;  // percent
    double f1 = 0.0;
    double macro_f1 = 0.0;
    std::size_t train_rows = 0;  // after resampling
    std::size_t test_rows = 0;
    std::string held_out_subject;  // LOSO only
    bool leakage_free = true;
};

struct EvalReport {
    std::string regime;       // split | kfold | loso
    std::string feature_set;
    std::string model;
    double acc_mean = 0.0, acc_std = 0.0;  // percent
    double f1_mean = 0.0, f1_std = 0.0;
    std::vector<FoldDetail> folds;
    std::uint64_t seed = 0;
    bool leakage_free = true;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["regime"] = regime;
        j["feature_set"] = feature_set;
        j["model"] = model;
        j["acc_mean"] = acc_mean;
        j["acc_std"] = acc_std;
        j["f1_mean"] = f1_mean;
        j["f1_std"] = f1_std;
        j["seed"] = seed;
        j["leakage_free"] = leakage_free;
        nlohmann::json folds_j = nlohmann::json::array();
        for (const FoldDetail& f : folds) {
            nlohmann::json fj{{"accuracy", f.accuracy},
                              {"f1", f.f1},
                              {"macro_f1", f.macro_f1},
                              {"train_rows", f.train_rows},
                              {"test_rows", f.test_rows},
                              {"leakage_free", f.leakage_free}};
            if (!f.held_out_subject.empty()) fj["held_out_subject"] = f.held_out_subject;
            folds_j.push_back(fj);
        }
        j["folds"] = folds_j;
        return j;
    }
};

namespace detail {

struct EvalView {
    Matrix X;
    std::vector<int> y;
    std::vector<std::int64_t> ids;
    std::vector<std::string> users;
};

inline EvalView make_view(const LabeledDataset& ds, FeatureSet set) {
    EvalView v;
    for (const LabeledRow& r : ds.rows) {
        if (set == FeatureSet::RAW && !r.features.raw_complete) continue;
        v.X.push_back(select_features(r.features, set));
        v.y.push_back(r.label.binary);
        v.ids.push_back(r.row_id);
        v.users.push_back(r.features.user_id);
    }
    return v;
}

inline TrainMatrix apply_balance(const TrainMatrix& train, Balance balance, std::uint64_t seed) {
    switch (balance) {
        case Balance::none: return train;
        case Balance::smote: return smote(train, 5, seed);
        case Balance::smoteenn: return smoteenn(train, 5, 3, seed);
    }
    throw Error("bad balance");
}

// No row carried by the (resampled) training matrix may appear in the test
// id set; synthetic rows (-1) are exempt by construction.
inline bool check_no_leakage(const TrainMatrix& train, const std::set<std::int64_t>& test_ids) {
    for (std::int64_t id : train.row_ids)
        if (id >= 0 && test_ids.count(id)) return false;
    return true;
}

inline FoldDetail run_fold(const EvalView& v, const std::vector<std::size_t>& train_idx,
                           const std::vector<std::size_t>& test_idx, const ModelSpec& spec,
                           Balance balance, std::uint64_t seed) {
    TrainMatrix train;
    for (std::size_t i : train_idx) train.push_row(v.X[i], v.y[i], v.ids[i]);
    TrainMatrix balanced = apply_balance(train, balance, seed);

    std::set<std::int64_t> test_ids;
    for (std::size_t i : test_idx) test_ids.insert(v.ids[i]);

    FoldDetail fd;
    fd.leakage_free = check_no_leakage(balanced, test_ids);
    fd.train_rows = balanced.rows();
    fd.test_rows = test_idx.size();

    Model model = fit_model(spec, balanced.X, balanced.y, 2, seed);
    std::vector<int> y_true, y_pred;
    for (std::size_t i : test_idx) {
        y_true.push_back(v.y[i]);
        y_pred.push_back(model.predict(v.X[i]));
    }
    MetricResult m = metrics(y_true, y_pred);
    fd.accuracy = 100.0 * m.accuracy;
    fd.f1 = 100.0 * m.f1;
    fd.macro_f1 = 100.0 * m.macro_f1;
    return fd;
}

inline void summarize(EvalReport& report) {
    double am = 0, fm = 0;
    for (const FoldDetail& f : report.folds) {
        am += f.accuracy;
        fm += f.f1;
        report.leakage_free = report.leakage_free && f.leakage_free;
    }
    std::size_t n = report.folds.size();
    am /= static_cast<double>(n);
    fm /= static_cast<double>(n);
    double av = 0, fv = 0;
    for (const FoldDetail& f : report.folds) {
        av += (f.accuracy - am) * (f.accuracy - am);
        fv += (f.f1 - fm) * (f.f1 - fm);
    }
    report.acc_mean = am;
    report.f1_mean = fm;
    report.acc_std = n > 1 ? std::sqrt(av / static_cast<double>(n)) : 0.0;
    report.f1_std = n > 1 ? std::sqrt(fv / static_cast<double>(n)) : 0.0;
}

// Stratified index split: test_fraction of each class, shuffled by seed.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const std::vector<int>& y, double test_fraction, std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
    Rng rng(seed);
    std::vector<std::size_t> train, test;
    for (auto& [c, idx] : by_class) {
        rng.shuffle(idx);
        std::size_t n_test = static_cast<std::size_t>(
            std::floor(test_fraction * static_cast<double>(idx.size())));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_test ? test : train).push_back(idx[i]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

}  // namespace detail

// Stratified 75:25 split, balancing on the training portion only.
inline EvalReport random_split_eval(const LabeledDataset& ds, FeatureSet set,
                                    const ModelSpec& spec, std::uint64_t seed,
                                    Balance balance = Balance::smoteenn) {
    auto v = detail::make_view(ds, set);
    std::set<int> classes(v.y.begin(), v.y.end());
    if (classes.size() < 2) throw Error("random_split_eval requires two classes");

    EvalReport report;
    report.regime = "split";
    report.feature_set = to_string(set);
    report.model = spec.name;
    report.seed = seed;

    std::uint64_t s = seed;
    for (int attempt = 0; attempt < 16; ++attempt, ++s) {
        auto [train_idx, test_idx] = detail::stratified_split(v.y, 0.25, s);
        std::set<int> train_classes;
        for (std::size_t i : train_idx) train_classes.insert(v.y[i]);
        if (train_classes.size() < 2) continue;  // resplit with the next seed
        report.folds.push_back(detail::run_fold(v, train_idx, test_idx, spec, balance, s));
        detail::summarize(report);
        report.acc_std = 0.0;  // single-split regime
        report.f1_std = 0.0;
        return report;
    }
    throw Error("random_split_eval: could not form a two-class training split");
}

// Stratified k-fold cross-validation, balancing inside each training fold.
inline EvalReport kfold_eval(const LabeledDataset& ds, FeatureSet set, const ModelSpec& spec,
                             int k, std::uint64_t seed, Balance balance = Balance::smoteenn) {
    auto v = detail::make_view(ds, set);
    if (k < 2 || static_cast<std::size_t>(k) > v.y.size())
        throw Error("kfold_eval: k out of range");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < v.y.size(); ++i) by_class[v.y[i]].push_back(i);
    for (const auto& [c, idx] : by_class)
        if (idx.size() < static_cast<std::size_t>(k))
            throw Error("kfold_eval: class " + std::to_string(c) +
                        " has fewer rows than folds; stratification impossible");

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    for (auto& [c, idx] : by_class) {
        rng.shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i) folds[i % k].push_back(idx[i]);
    }

    EvalReport report;
    report.regime = "kfold";
    report.feature_set = to_string(set);
    report.model = spec.name;
    report.seed = seed;
    for (int f = 0; f < k; ++f) {
        std::vector<std::size_t> train_idx, test_idx = folds[f];
        for (int g = 0; g < k; ++g)
            if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
        std::sort(train_idx.begin(), train_idx.end());
        std::sort(test_idx.begin(), test_idx.end());
        report.folds.push_back(
            detail::run_fold(v, train_idx, test_idx, spec, balance, seed + f));
    }
    detail::summarize(report);
    return report;
}

// Leave-one-subject-out. Only subjects with strictly more than min_days
// labeled days are held out; everyone still contributes training rows.
inline EvalReport loso_eval(const LabeledDataset& ds, FeatureSet set, const ModelSpec& spec,
                            std::size_t min_days, std::uint64_t seed,
                            Balance balance = Balance::smote) {
    auto v = detail::make_view(ds, set);
    std::map<std::string, std::size_t> days;
    for (const std::string& u : v.users) ++days[u];
    std::vector<std::string> eligible;
    for (const auto& [u, n] : days)
        if (n > min_days) eligible.push_back(u);
    if (eligible.size() < 2)
        throw Error("loso_eval: fewer than two subjects with more than " +
                    std::to_string(min_days) + " days");

    EvalReport report;
    report.regime = "loso";
    report.feature_set = to_string(set);
    report.model = spec.name;
    report.seed = seed;
    std::uint64_t fold_seed = seed;
    for (const std::string& subject : eligible) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < v.users.size(); ++i)
            (v.users[i] == subject ? test_idx : train_idx).push_back(i);
        FoldDetail fd = detail::run_fold(v, train_idx, test_idx, spec, balance, fold_seed++);
        fd.held_out_subject = subject;
        report.folds.push_back(std::move(fd));
    }
    detail::summarize(report);
    return report;
}

}  // namespace geopriv
