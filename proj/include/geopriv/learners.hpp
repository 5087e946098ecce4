#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "geopriv/common.hpp"

namespace geopriv {

using Matrix = std::vector<std::vector<double>>;

struct TreeParams {
    int max_depth = 12;
    std::size_t min_samples_leaf = 2;
    // 0 = consider all features at every split; otherwise sample this many.
    std::size_t features_per_split = 0;
};

// Binary-split tree. Classification leaves hold a class distribution,
// regression leaves a single value in dist[0].
struct DecisionTree {
    struct Node {
        int feature = -1;          // -1 marks a leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        std::vector<double> dist;
    };
    std::vector<Node> nodes;
    std::size_t n_classes = 0;  // 0 for regression trees

    const std::vector<double>& leaf_for(const std::vector<double>& x) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].dist;
    }

    double predict_value(const std::vector<double>& x) const { return leaf_for(x)[0]; }
};

namespace detail {

inline double gini(const std::vector<double>& counts, double total) {
    if (total <= 0) return 0.0;
    double g = 1.0;
    for (double c : counts) g -= (c / total) * (c / total);
    return g;
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
};

// Candidate features for one split; identity permutation when sampling is off.
inline std::vector<int> candidate_features(std::size_t d, std::size_t m, Rng& rng) {
    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    if (m == 0 || m >= d) return idx;
    rng.shuffle(idx);
    idx.resize(m);
    std::sort(idx.begin(), idx.end());  // tie-break stays "lowest feature index"
    return idx;
}

// Best Gini split over the given samples. Thresholds are midpoints of
// consecutive distinct sorted values; ties go to the lowest feature index,
// then the lowest threshold.
inline SplitChoice best_gini_split(const Matrix& X, const std::vector<int>& y,
                                   const std::vector<std::size_t>& samples,
                                   std::size_t n_classes, const std::vector<int>& features,
                                   std::size_t min_leaf) {
    SplitChoice best;
    const double n = static_cast<double>(samples.size());
    std::vector<std::pair<double, int>> vals(samples.size());
    for (int f : features) {
        for (std::size_t i = 0; i < samples.size(); ++i)
            vals[i] = {X[samples[i]][f], y[samples[i]]};
        std::sort(vals.begin(), vals.end());
        std::vector<double> left(n_classes, 0.0), right(n_classes, 0.0);
        for (const auto& [v, c] : vals) right[c] += 1.0;
        double nl = 0;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            left[vals[i].second] += 1.0;
            right[vals[i].second] -= 1.0;
            nl += 1.0;
            if (vals[i].first == vals[i + 1].first) continue;
            if (nl < static_cast<double>(min_leaf) || n - nl < static_cast<double>(min_leaf))
                continue;
            double score = (nl * gini(left, nl) + (n - nl) * gini(right, n - nl)) / n;
            double threshold = vals[i].first + (vals[i + 1].first - vals[i].first) / 2.0;
            if (score < best.score ||
                (score == best.score &&
                 (f < best.feature || (f == best.feature && threshold < best.threshold)))) {
                best = {f, threshold, score};
            }
        }
    }
    return best;
}

// Best squared-error split for regression targets; same threshold and
// tie-break conventions as the Gini search.
inline SplitChoice best_sse_split(const Matrix& X, const std::vector<double>& t,
                                  const std::vector<std::size_t>& samples,
                                  const std::vector<int>& features, std::size_t min_leaf) {
    SplitChoice best;
    const double n = static_cast<double>(samples.size());
    std::vector<std::pair<double, double>> vals(samples.size());
    for (int f : features) {
        for (std::size_t i = 0; i < samples.size(); ++i)
            vals[i] = {X[samples[i]][f], t[samples[i]]};
        std::sort(vals.begin(), vals.end());
        double total = 0;
        for (const auto& [v, r] : vals) total += r;
        double lsum = 0, nl = 0;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            lsum += vals[i].second;
            nl += 1.0;
            if (vals[i].first == vals[i + 1].first) continue;
            if (nl < static_cast<double>(min_leaf) || n - nl < static_cast<double>(min_leaf))
                continue;
            double rsum = total - lsum;
            // minimizing SSE == maximizing sum of per-child (sum^2 / count)
            double score = -(lsum * lsum / nl + rsum * rsum / (n - nl));
            double threshold = vals[i].first + (vals[i + 1].first - vals[i].first) / 2.0;
            if (score < best.score ||
                (score == best.score &&
                 (f < best.feature || (f == best.feature && threshold < best.threshold)))) {
                best = {f, threshold, score};
            }
        }
    }
    return best;
}

}  // namespace detail

// Greedy Gini classification tree. `seed` drives per-split feature sampling
// when params.features_per_split > 0.
inline DecisionTree fit_tree(const Matrix& X, const std::vector<int>& y, std::size_t n_classes,
                             const TreeParams& params, std::uint64_t seed) {
    if (X.empty()) throw Error("fit_tree requires at least one row");
    if (X.size() != y.size()) throw Error("fit_tree: X/y size mismatch");
    DecisionTree tree;
    tree.n_classes = n_classes;
    Rng rng(seed);

    struct Work {
        std::vector<std::size_t> samples;
        int depth;
        int node;
    };
    std::vector<std::size_t> all(X.size());
    std::iota(all.begin(), all.end(), 0);
    tree.nodes.emplace_back();
    std::vector<Work> stack{{std::move(all), 0, 0}};

    while (!stack.empty()) {
        Work w = std::move(stack.back());
        stack.pop_back();

        std::vector<double> counts(n_classes, 0.0);
        for (std::size_t i : w.samples) counts[y[i]] += 1.0;
        bool pure = false;
        for (double c : counts)
            if (c == static_cast<double>(w.samples.size())) pure = true;

        auto make_leaf = [&]() {
            for (double& c : counts) c /= static_cast<double>(w.samples.size());
            tree.nodes[w.node].dist = counts;
        };

        if (pure || w.depth >= params.max_depth ||
            w.samples.size() < 2 * params.min_samples_leaf) {
            make_leaf();
            continue;
        }
        auto feats = detail::candidate_features(X[0].size(), params.features_per_split, rng);
        auto split = detail::best_gini_split(X, y, w.samples, n_classes, feats,
                                             params.min_samples_leaf);
        if (split.feature < 0) {  // no valid split (e.g. constant features)
            make_leaf();
            continue;
        }
        std::vector<std::size_t> ls, rs;
        for (std::size_t i : w.samples)
            (X[i][split.feature] <= split.threshold ? ls : rs).push_back(i);
        tree.nodes[w.node].feature = split.feature;
        tree.nodes[w.node].threshold = split.threshold;
        tree.nodes[w.node].left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[w.node].right = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        stack.push_back({std::move(rs), w.depth + 1, tree.nodes[w.node].right});
        stack.push_back({std::move(ls), w.depth + 1, tree.nodes[w.node].left});
    }
    return tree;
}

// Regression tree on continuous targets (used for boosting stages).
inline DecisionTree fit_regression_tree(const Matrix& X, const std::vector<double>& t,
                                        const std::vector<std::size_t>& samples,
                                        const TreeParams& params) {
    if (samples.empty()) throw Error("fit_regression_tree requires samples");
    DecisionTree tree;
    tree.n_classes = 0;
    Rng rng(0);  // boosting stages use all features; rng is unused

    struct Work {
        std::vector<std::size_t> samples;
        int depth;
        int node;
    };
    tree.nodes.emplace_back();
    std::vector<Work> stack{{samples, 0, 0}};
    while (!stack.empty()) {
        Work w = std::move(stack.back());
        stack.pop_back();
        double mean = 0;
        for (std::size_t i : w.samples) mean += t[i];
        mean /= static_cast<double>(w.samples.size());
        bool constant = true;
        for (std::size_t i : w.samples)
            if (t[i] != t[w.samples[0]]) constant = false;

        if (constant || w.depth >= params.max_depth ||
            w.samples.size() < 2 * params.min_samples_leaf) {
            tree.nodes[w.node].dist = {mean};
            continue;
        }
        auto feats = detail::candidate_features(X[0].size(), params.features_per_split, rng);
        auto split = detail::best_sse_split(X, t, w.samples, feats, params.min_samples_leaf);
        if (split.feature < 0) {
            tree.nodes[w.node].dist = {mean};
            continue;
        }
        std::vector<std::size_t> ls, rs;
        for (std::size_t i : w.samples)
            (X[i][split.feature] <= split.threshold ? ls : rs).push_back(i);
        tree.nodes[w.node].feature = split.feature;
        tree.nodes[w.node].threshold = split.threshold;
        tree.nodes[w.node].left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[w.node].right = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        stack.push_back({std::move(rs), w.depth + 1, tree.nodes[w.node].right});
        stack.push_back({std::move(ls), w.depth + 1, tree.nodes[w.node].left});
    }
    return tree;
}

struct ForestParams {
    int n_estimators = 70;
    TreeParams tree{.max_depth = 12, .min_samples_leaf = 2};
    bool bootstrap = true;
    bool sqrt_features = true;  // sqrt(d) feature subsampling per split
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    std::size_t n_classes = 0;
    std::size_t n_features = 0;
};

inline ForestModel fit_forest(const Matrix& X, const std::vector<int>& y, std::size_t n_classes,
                              const ForestParams& params, std::uint64_t seed) {
    if (X.empty()) throw Error("fit_forest requires at least one row");
    ForestModel model;
    model.n_classes = n_classes;
    model.n_features = X[0].size();
    Rng root(seed);
    TreeParams tp = params.tree;
    if (params.sqrt_features)
        tp.features_per_split = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::sqrt(static_cast<double>(X[0].size()))));

    for (int t = 0; t < params.n_estimators; ++t) {
        Rng trng = root.fork(t);
        Matrix bx;
        std::vector<int> by;
        if (params.bootstrap) {
            bx.reserve(X.size());
            by.reserve(X.size());
            for (std::size_t i = 0; i < X.size(); ++i) {
                std::size_t j = static_cast<std::size_t>(trng.next_below(X.size()));
                bx.push_back(X[j]);
                by.push_back(y[j]);
            }
        } else {
            bx = X;
            by = y;
        }
        model.trees.push_back(fit_tree(bx, by, n_classes, tp, trng.next_u64()));
    }
    return model;
}

struct BoostParams {
    int n_stages = 100;
    double eta = 0.2;
    double subsample = 0.5;
    TreeParams tree{.max_depth = 4, .min_samples_leaf = 2};
};

// Gradient-boosted trees with logistic loss; multiclass runs one-vs-rest.
struct BoostedModel {
    struct Binary {
        double initial_score = 0.0;  // log-odds of the base rate
        std::vector<DecisionTree> stages;
    };
    std::vector<Binary> per_class;  // size 1 for binary problems
    double eta = 0.2;
    std::size_t n_classes = 0;
    std::size_t n_features = 0;
};

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline BoostedModel::Binary fit_boosted_binary(const Matrix& X, const std::vector<int>& y01,
                                               const BoostParams& params, Rng rng) {
    BoostedModel::Binary model;
    double pos = 0;
    for (int v : y01) pos += v;
    double p0 = std::clamp(pos / static_cast<double>(y01.size()), 1e-6, 1.0 - 1e-6);
    model.initial_score = std::log(p0 / (1.0 - p0));

    std::vector<double> score(y01.size(), model.initial_score);
    std::vector<double> residual(y01.size());
    std::vector<std::size_t> all(y01.size());
    std::iota(all.begin(), all.end(), 0);

    for (int s = 0; s < params.n_stages; ++s) {
        for (std::size_t i = 0; i < y01.size(); ++i)
            residual[i] = static_cast<double>(y01[i]) - sigmoid(score[i]);

        std::vector<std::size_t> sample = all;
        if (params.subsample < 1.0) {
            rng.shuffle(sample);
            std::size_t n = std::max<std::size_t>(
                1, static_cast<std::size_t>(params.subsample * static_cast<double>(all.size())));
            sample.resize(n);
            std::sort(sample.begin(), sample.end());
        }

        DecisionTree tree = fit_regression_tree(X, residual, sample, params.tree);

        // Newton leaf values: sum(residual) / sum(p(1-p)) over the stage sample.
        std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
        for (std::size_t i : sample) {
            int node = 0;
            while (tree.nodes[node].feature >= 0)
                node = X[i][tree.nodes[node].feature] <= tree.nodes[node].threshold
                           ? tree.nodes[node].left
                           : tree.nodes[node].right;
            double p = sigmoid(score[i]);
            num[node] += static_cast<double>(y01[i]) - p;
            den[node] += p * (1.0 - p);
        }
        for (std::size_t n = 0; n < tree.nodes.size(); ++n)
            if (tree.nodes[n].feature < 0)
                tree.nodes[n].dist[0] = den[n] > 1e-12 ? num[n] / den[n] : 0.0;

        for (std::size_t i = 0; i < y01.size(); ++i)
            score[i] += params.eta * tree.predict_value(X[i]);
        model.stages.push_back(std::move(tree));
    }
    return model;
}

}  // namespace detail

inline BoostedModel fit_boosted(const Matrix& X, const std::vector<int>& y, std::size_t n_classes,
                                const BoostParams& params, std::uint64_t seed) {
    if (X.empty()) throw Error("fit_boosted requires at least one row");
    if (n_classes < 2) throw Error("fit_boosted requires at least two classes");
    BoostedModel model;
    model.eta = params.eta;
    model.n_classes = n_classes;
    model.n_features = X[0].size();
    Rng root(seed);
    if (n_classes == 2) {
        model.per_class.push_back(detail::fit_boosted_binary(X, y, params, root.fork(0)));
    } else {
        for (std::size_t c = 0; c < n_classes; ++c) {
            std::vector<int> y01(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) y01[i] = y[i] == static_cast<int>(c);
            model.per_class.push_back(detail::fit_boosted_binary(X, y01, params, root.fork(c)));
        }
    }
    return model;
}

inline double boosted_raw_score(const BoostedModel::Binary& b, double eta,
                                const std::vector<double>& x) {
    double s = b.initial_score;
    for (const DecisionTree& t : b.stages) s += eta * t.predict_value(x);
    return s;
}

inline std::vector<double> predict_proba(const BoostedModel& model, const std::vector<double>& x) {
    if (x.size() != model.n_features) throw Error("predict_proba: feature dimension mismatch");
    if (model.n_classes == 2) {
        double p = detail::sigmoid(boosted_raw_score(model.per_class[0], model.eta, x));
        return {1.0 - p, p};
    }
    std::vector<double> p(model.n_classes);
    double sum = 0;
    for (std::size_t c = 0; c < model.n_classes; ++c) {
        p[c] = detail::sigmoid(boosted_raw_score(model.per_class[c], model.eta, x));
        sum += p[c];
    }
    if (sum <= 0) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(model.n_classes));
    } else {
        for (double& v : p) v /= sum;
    }
    return p;
}

inline std::vector<double> predict_proba(const ForestModel& model, const std::vector<double>& x) {
    if (x.size() != model.n_features) throw Error("predict_proba: feature dimension mismatch");
    std::vector<double> p(model.n_classes, 0.0);
    for (const DecisionTree& t : model.trees) {
        const std::vector<double>& d = t.leaf_for(x);
        for (std::size_t c = 0; c < model.n_classes; ++c) p[c] += d[c];
    }
    double sum = 0;
    for (double v : p) sum += v;
    for (double& v : p) v /= sum;
    return p;
}

// Model wrapper so pipelines can switch between the two ensembles.
struct Model {
    enum class Kind { forest, boosted } kind = Kind::forest;
    ForestModel forest;
    BoostedModel boosted;

    std::vector<double> predict_proba(const std::vector<double>& x) const {
        return kind == Kind::forest ? geopriv::predict_proba(forest, x)
                                    : geopriv::predict_proba(boosted, x);
    }

    int predict(const std::vector<double>& x) const {
        auto p = predict_proba(x);
        return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    }

    std::size_t n_classes() const {
        return kind == Kind::forest ? forest.n_classes : boosted.n_classes;
    }
};

struct ModelSpec {
    std::string name = "rf";  // "rf" or "xgb"
    ForestParams forest;
    BoostParams boost;
};

inline ModelSpec model_spec_from_string(const std::string& name) {
    if (name != "rf" && name != "xgb")
        throw Error("unknown model '" + name + "' (expected rf|xgb)");
    ModelSpec spec;
    spec.name = name;
    return spec;
}

inline Model fit_model(const ModelSpec& spec, const Matrix& X, const std::vector<int>& y,
                       std::size_t n_classes, std::uint64_t seed) {
    Model m;
    if (spec.name == "rf") {
        m.kind = Model::Kind::forest;
        m.forest = fit_forest(X, y, n_classes, spec.forest, seed);
    } else {
        m.kind = Model::Kind::boosted;
        m.boosted = fit_boosted(X, y, n_classes, spec.boost, seed);
    }
    return m;
}

// Mean accuracy drop over seeded column permutations.
inline std::vector<double> permutation_importance(const Model& model, const Matrix& X,
                                                  const std::vector<int>& y, std::uint64_t seed,
                                                  int repeats = 3) {
    if (X.empty()) return {};
    auto accuracy = [&](const Matrix& M) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < M.size(); ++i)
            if (model.predict(M[i]) == y[i]) ++correct;
        return static_cast<double>(correct) / static_cast<double>(M.size());
    };
    double base = accuracy(X);
    std::size_t d = X[0].size();
    std::vector<double> importance(d, 0.0);
    Rng root(seed);
    for (std::size_t f = 0; f < d; ++f) {
        for (int r = 0; r < repeats; ++r) {
            Rng rng = root.fork(f * 1000 + r);
            std::vector<double> col(X.size());
            for (std::size_t i = 0; i < X.size(); ++i) col[i] = X[i][f];
            rng.shuffle(col);
            Matrix M = X;
            for (std::size_t i = 0; i < X.size(); ++i) M[i][f] = col[i];
            importance[f] += base - accuracy(M);
        }
        importance[f] /= repeats;
    }
    return importance;
}

// ---- JSON serialization (versioned) ----

inline nlohmann::json tree_to_json(const DecisionTree& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes)
        nodes.push_back({{"f", n.feature},
                         {"t", n.threshold},
                         {"l", n.left},
                         {"r", n.right},
                         {"d", n.dist}});
    return {{"n_classes", t.n_classes}, {"nodes", nodes}};
}

inline DecisionTree tree_from_json(const nlohmann::json& j) {
    DecisionTree t;
    t.n_classes = j.at("n_classes").get<std::size_t>();
    for (const auto& nj : j.at("nodes")) {
        DecisionTree::Node n;
        n.feature = nj.at("f").get<int>();
        n.threshold = nj.at("t").get<double>();
        n.left = nj.at("l").get<int>();
        n.right = nj.at("r").get<int>();
        n.dist = nj.at("d").get<std::vector<double>>();
        t.nodes.push_back(std::move(n));
    }
    return t;
}

inline nlohmann::json model_to_json(const Model& m) {
    nlohmann::json j;
    j["format_version"] = 1;
    if (m.kind == Model::Kind::forest) {
        j["kind"] = "rf";
        j["n_classes"] = m.forest.n_classes;
        j["n_features"] = m.forest.n_features;
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& t : m.forest.trees) trees.push_back(tree_to_json(t));
        j["trees"] = trees;
    } else {
        j["kind"] = "xgb";
        j["n_classes"] = m.boosted.n_classes;
        j["n_features"] = m.boosted.n_features;
        j["eta"] = m.boosted.eta;
        nlohmann::json classes = nlohmann::json::array();
        for (const auto& b : m.boosted.per_class) {
            nlohmann::json stages = nlohmann::json::array();
            for (const auto& t : b.stages) stages.push_back(tree_to_json(t));
            classes.push_back({{"initial_score", b.initial_score}, {"stages", stages}});
        }
        j["classes"] = classes;
    }
    return j;
}

inline Model model_from_json(const nlohmann::json& j) {
    if (j.at("format_version").get<int>() != 1) throw Error("unsupported model format version");
    Model m;
    if (j.at("kind") == "rf") {
        m.kind = Model::Kind::forest;
        m.forest.n_classes = j.at("n_classes").get<std::size_t>();
        m.forest.n_features = j.at("n_features").get<std::size_t>();
        for (const auto& tj : j.at("trees")) m.forest.trees.push_back(tree_from_json(tj));
    } else {
        m.kind = Model::Kind::boosted;
        m.boosted.n_classes = j.at("n_classes").get<std::size_t>();
        m.boosted.n_features = j.at("n_features").get<std::size_t>();
        m.boosted.eta = j.at("eta").get<double>();
        for (const auto& cj : j.at("classes")) {
            BoostedModel::Binary b;
            b.initial_score = cj.at("initial_score").get<double>();
            for (const auto& tj : cj.at("stages")) b.stages.push_back(tree_from_json(tj));
            m.boosted.per_class.push_back(std::move(b));
        }
    }
    return m;
}

}  // namespace geopriv
