#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "geopriv/common.hpp"
#include "geopriv/learners.hpp"

using namespace geopriv;

namespace {

struct Blobs {
    Matrix X;
    std::vector<int> y;
};

Blobs blobs(std::size_t per_class, double sigma, std::uint64_t seed) {
    Rng rng(seed);
    Blobs b;
    for (std::size_t i = 0; i < per_class; ++i) {
        b.X.push_back({sigma * rng.next_gaussian(), sigma * rng.next_gaussian()});
        b.y.push_back(0);
        b.X.push_back({10 + sigma * rng.next_gaussian(), 10 + sigma * rng.next_gaussian()});
        b.y.push_back(1);
    }
    return b;
}

double train_accuracy(const auto& predict, const Matrix& X, const std::vector<int>& y) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < X.size(); ++i)
        if (predict(X[i]) == y[i]) ++c;
    return static_cast<double>(c) / static_cast<double>(X.size());
}

// exhaustive oracle: try every (feature, midpoint) pair and return the best
// weighted Gini, same tie-break order as the implementation claims
std::pair<int, double> exhaustive_root_split(const Matrix& X, const std::vector<int>& y,
                                             std::size_t n_classes) {
    int best_f = -1;
    double best_t = 0, best_score = 1e300;
    double n = static_cast<double>(X.size());
    for (std::size_t f = 0; f < X[0].size(); ++f) {
        std::vector<double> vals;
        for (const auto& row : X) vals.push_back(row[f]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            double thr = vals[i] + (vals[i + 1] - vals[i]) / 2.0;
            std::vector<double> lc(n_classes, 0.0), rc(n_classes, 0.0);
            double nl = 0;
            for (std::size_t r = 0; r < X.size(); ++r)
                if (X[r][f] <= thr) {
                    lc[y[r]] += 1;
                    nl += 1;
                } else {
                    rc[y[r]] += 1;
                }
            if (nl < 2 || n - nl < 2) continue;  // min_samples_leaf = 2
            auto gini = [](const std::vector<double>& c, double tot) {
                double g = 1;
                for (double v : c) g -= (v / tot) * (v / tot);
                return g;
            };
            double score = (nl * gini(lc, nl) + (n - nl) * gini(rc, n - nl)) / n;
            if (score < best_score ||
                (score == best_score &&
                 (static_cast<int>(f) < best_f ||
                  (static_cast<int>(f) == best_f && thr < best_t)))) {
                best_f = static_cast<int>(f);
                best_t = thr;
                best_score = score;
            }
        }
    }
    return {best_f, best_t};
}

}  // namespace

TEST_CASE("pure input collapses to a single leaf") {
    DecisionTree t = fit_tree({{0.0}, {1.0}, {2.0}}, {1, 1, 1}, 2, {}, 0);
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].feature == -1);
    CHECK(t.nodes[0].dist[1] == 1.0);
}

TEST_CASE("1-D two-cluster data splits the root at 5.5") {
    DecisionTree t = fit_tree({{0.0}, {1.0}, {10.0}, {11.0}}, {0, 0, 1, 1}, 2, {}, 0);
    REQUIRE(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold == 5.5);
    CHECK(t.predict_value({0.5}) == doctest::Approx(1.0));  // P(class 0)=1 stored per class
}

TEST_CASE("constant features give a majority leaf") {
    DecisionTree t = fit_tree({{3.0}, {3.0}, {3.0}, {3.0}}, {0, 1, 1, 1}, 2, {}, 0);
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].dist[1] == doctest::Approx(0.75));
}

TEST_CASE("root split equals the exhaustive Gini scan on 20 random fixtures") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix X;
        std::vector<int> y;
        std::size_t n = 8 + rng.next_below(20);
        for (std::size_t i = 0; i < n; ++i) {
            X.push_back({static_cast<double>(rng.next_below(8)),
                         static_cast<double>(rng.next_below(8)),
                         static_cast<double>(rng.next_below(8))});
            y.push_back(static_cast<int>(rng.next_below(2)));
        }
        std::set<int> classes(y.begin(), y.end());
        if (classes.size() < 2) {
            y[0] = 1 - y[0];
        }
        auto [of, ot] = exhaustive_root_split(X, y, 2);
        DecisionTree t = fit_tree(X, y, 2, {}, trial);
        if (of < 0) {
            CHECK(t.nodes[0].feature == -1);
        } else {
            CHECK(t.nodes[0].feature == of);
            CHECK(t.nodes[0].threshold == doctest::Approx(ot).epsilon(1e-12));
        }
    }
}

TEST_CASE("forest with one tree and no bootstrap equals that tree") {
    auto [X, y] = blobs(20, 2.0, 1);
    ForestParams fp;
    fp.n_estimators = 1;
    fp.bootstrap = false;
    fp.sqrt_features = false;
    ForestModel forest = fit_forest(X, y, 2, fp, 7);
    Rng trng = Rng(7).fork(0);
    DecisionTree single = fit_tree(X, y, 2, fp.tree, trng.next_u64());
    for (const auto& x : X) {
        auto pf = predict_proba(forest, x);
        auto& pt = single.leaf_for(x);
        CHECK(pf[0] == doctest::Approx(pt[0]));
        CHECK(pf[1] == doctest::Approx(pt[1]));
    }
}

TEST_CASE("forest fits separable blobs and is deterministic") {
    auto [X, y] = blobs(40, 1.0, 2);
    ForestModel a = fit_forest(X, y, 2, {}, 5);
    ForestModel b = fit_forest(X, y, 2, {}, 5);
    double acc = train_accuracy([&](const auto& x) {
        auto p = predict_proba(a, x);
        return p[1] > p[0] ? 1 : 0;
    }, X, y);
    CHECK(acc >= 0.95);
    for (const auto& x : X) CHECK(predict_proba(a, x) == predict_proba(b, x));
}

TEST_CASE("boosting with eta 0 predicts the base-rate log odds") {
    auto [X, y] = blobs(20, 1.0, 3);
    BoostParams bp;
    bp.eta = 0.0;
    bp.n_stages = 5;
    BoostedModel m = fit_boosted(X, y, 2, bp, 7);
    for (const auto& x : X) {
        auto p = predict_proba(m, x);
        CHECK(p[1] == doctest::Approx(0.5));  // balanced classes -> log odds 0
    }
}

TEST_CASE("a single full-sample unit-eta stage matches the hand-traced oracle") {
    auto [X, y] = blobs(15, 2.0, 4);
    BoostParams bp;
    bp.n_stages = 1;
    bp.eta = 1.0;
    bp.subsample = 1.0;
    BoostedModel m = fit_boosted(X, y, 2, bp, 7);
    REQUIRE(m.per_class.size() == 1);
    REQUIRE(m.per_class[0].stages.size() == 1);

    // oracle: residuals from the initial log-odds, regression tree on them,
    // then Newton leaf values num/den over all rows
    double pos = 0;
    for (int v : y) pos += v;
    double p0 = pos / static_cast<double>(y.size());
    double init = std::log(p0 / (1 - p0));
    CHECK(m.per_class[0].initial_score == doctest::Approx(init));

    std::vector<double> residual(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - 1.0 / (1.0 + std::exp(-init));
    std::vector<std::size_t> all(y.size());
    std::iota(all.begin(), all.end(), 0);
    DecisionTree oracle = fit_regression_tree(X, residual, all, bp.tree);
    std::vector<double> num(oracle.nodes.size(), 0.0), den(oracle.nodes.size(), 0.0);
    double p = 1.0 / (1.0 + std::exp(-init));
    for (std::size_t i = 0; i < y.size(); ++i) {
        int node = 0;
        while (oracle.nodes[node].feature >= 0)
            node = X[i][oracle.nodes[node].feature] <= oracle.nodes[node].threshold
                       ? oracle.nodes[node].left
                       : oracle.nodes[node].right;
        num[node] += y[i] - p;
        den[node] += p * (1 - p);
    }
    for (std::size_t n = 0; n < oracle.nodes.size(); ++n)
        if (oracle.nodes[n].feature < 0)
            oracle.nodes[n].dist[0] = den[n] > 1e-12 ? num[n] / den[n] : 0.0;

    for (const auto& x : X) {
        double want = 1.0 / (1.0 + std::exp(-(init + oracle.predict_value(x))));
        CHECK(predict_proba(m, x)[1] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("boosting fits separable blobs") {
    auto [X, y] = blobs(40, 1.0, 5);
    BoostedModel m = fit_boosted(X, y, 2, {}, 7);
    double acc = train_accuracy([&](const auto& x) {
        auto p = predict_proba(m, x);
        return p[1] > p[0] ? 1 : 0;
    }, X, y);
    CHECK(acc >= 0.95);
}

TEST_CASE("probabilities are normalized and dimension-checked") {
    auto [X, y] = blobs(20, 2.0, 6);
    Model rf = fit_model(model_spec_from_string("rf"), X, y, 2, 7);
    Model xgb = fit_model(model_spec_from_string("xgb"), X, y, 2, 7);
    for (const auto& x : X) {
        for (const Model* m : {&rf, &xgb}) {
            auto p = m->predict_proba(x);
            double sum = 0;
            for (double v : p) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                sum += v;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    CHECK_THROWS_AS(rf.predict_proba({1.0}), Error);
    CHECK_THROWS_AS(model_spec_from_string("svm"), Error);
}

TEST_CASE("monotone rescaling of a column leaves predicted labels unchanged") {
    auto [X, y] = blobs(30, 2.0, 8);
    Matrix Xs = X;
    for (auto& row : Xs) row[0] = row[0] * row[0] * row[0];  // strictly increasing on R
    DecisionTree a = fit_tree(X, y, 2, {}, 3);
    DecisionTree b = fit_tree(Xs, y, 2, {}, 3);
    for (std::size_t i = 0; i < X.size(); ++i) {
        int la = a.leaf_for(X[i])[1] > 0.5 ? 1 : 0;
        int lb = b.leaf_for(Xs[i])[1] > 0.5 ? 1 : 0;
        CHECK(la == lb);
    }
}

TEST_CASE("permutation importance isolates the informative feature") {
    Rng rng(9);
    Matrix X;
    std::vector<int> y;
    for (int i = 0; i < 120; ++i) {
        double signal = rng.next_double();
        double noise = rng.next_double();
        X.push_back({signal, noise});
        y.push_back(signal > 0.5 ? 1 : 0);
    }
    Model m = fit_model(model_spec_from_string("rf"), X, y, 2, 7);
    auto imp = permutation_importance(m, X, y, 11);
    CHECK(imp[0] > 0.2);
    CHECK(std::fabs(imp[1]) < 0.05);
}

TEST_CASE("model json round-trips predictions exactly") {
    auto [X, y] = blobs(20, 2.0, 10);
    for (const char* name : {"rf", "xgb"}) {
        Model m = fit_model(model_spec_from_string(name), X, y, 2, 7);
        Model back = model_from_json(model_to_json(m));
        for (const auto& x : X) CHECK(m.predict_proba(x) == back.predict_proba(x));
    }
    nlohmann::json bad = model_to_json(Model{});
    bad["format_version"] = 99;
    CHECK_THROWS_AS(model_from_json(bad), Error);
}
