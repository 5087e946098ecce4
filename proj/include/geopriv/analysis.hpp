#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "geopriv/common.hpp"
#include "geopriv/data.hpp"

namespace geopriv {

namespace detail {

// ln Gamma via the Lanczos approximation (g=7, n=9), |error| < 1e-13.
inline double lgamma_lanczos(double x) {
    static const double coef[9] = {
        0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
        771.32342877765313,   -176.61502916214059, 12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5) {
        // reflection
        return std::log(3.14159265358979323846 / std::sin(3.14159265358979323846 * x)) -
               lgamma_lanczos(1.0 - x);
    }
    x -= 1.0;
    double a = coef[0];
    double t = x + 7.5;
    for (int i = 1; i < 9; ++i) a += coef[i] / (x + i);
    return 0.5 * std::log(2 * 3.14159265358979323846) + (x + 0.5) * std::log(t) - t + std::log(a);
}

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction,
// converged to ~1e-15 relative.
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = lgamma_lanczos(a + b) - lgamma_lanczos(a) - lgamma_lanczos(b) +
                      a * std::log(x) + b * std::log(1.0 - x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Upper tail of the F distribution: P(F_{df1,df2} > f).
inline double f_sf(double f, double df1, double df2) {
    if (f <= 0.0) return 1.0;
    return detail::incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

struct FTestResult {
    double f = 0.0;
    double p = 1.0;
};

// One-way ANOVA F over the two label groups (df1 = 1, df2 = n - 2). For two
// groups this equals the squared pooled-variance t statistic.
inline FTestResult f_test(const std::vector<double>& values, const std::vector<int>& labels) {
    if (values.size() != labels.size()) throw Error("f_test: length mismatch");
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (labels[i] == 0) { n0 += 1; s0 += values[i]; }
        else { n1 += 1; s1 += values[i]; }
    }
    if (n0 < 2 || n1 < 2) throw Error("f_test requires both classes with >= 2 rows");
    double m0 = s0 / n0, m1 = s1 / n1;
    double grand = (s0 + s1) / (n0 + n1);
    double ss_between = n0 * (m0 - grand) * (m0 - grand) + n1 * (m1 - grand) * (m1 - grand);
    double ss_within = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double m = labels[i] == 0 ? m0 : m1;
        ss_within += (values[i] - m) * (values[i] - m);
    }
    double df2 = n0 + n1 - 2.0;
    if (ss_within == 0.0) {
        // degenerate: identical within-group values
        if (ss_between == 0.0) return {0.0, 1.0};
        return {std::numeric_limits<double>::infinity(), 0.0};
    }
    double f = ss_between / (ss_within / df2);
    return {f, f_sf(f, 1.0, df2)};
}

// Pearson correlation between the values and the 0/1 label; 0 for constants.
inline double point_biserial(const std::vector<double>& values, const std::vector<int>& labels) {
    if (values.size() != labels.size() || values.empty())
        throw Error("point_biserial: bad inputs");
    double n = static_cast<double>(values.size());
    double mv = 0, ml = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        mv += values[i];
        ml += labels[i];
    }
    mv /= n;
    ml /= n;
    double svv = 0, sll = 0, svl = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        svv += (values[i] - mv) * (values[i] - mv);
        sll += (labels[i] - ml) * (labels[i] - ml);
        svl += (values[i] - mv) * (labels[i] - ml);
    }
    if (svv == 0.0 || sll == 0.0) return 0.0;
    return svl / std::sqrt(svv * sll);
}

struct FeatureStat {
    std::string feature;
    double f = 0.0;
    double p = 1.0;
    double r = 0.0;
};

// All features of the set scored against the binary stress label, sorted
// ascending by p (ties by name for determinism).
inline std::vector<FeatureStat> screen_features(const LabeledDataset& ds, FeatureSet set) {
    if (ds.rows.empty()) throw Error("screen_features: empty dataset");
    std::vector<const LabeledRow*> rows;
    std::vector<int> labels;
    for (const LabeledRow& r : ds.rows) {
        if (set == FeatureSet::RAW && !r.features.raw_complete) continue;
        rows.push_back(&r);
        labels.push_back(r.label.binary);
    }
    std::vector<FeatureStat> stats;
    for (const std::string& name : feature_names(set)) {
        std::vector<double> values;
        values.reserve(rows.size());
        for (const LabeledRow* r : rows) values.push_back(r->features.at(name));
        FeatureStat s;
        s.feature = name;
        auto ft = f_test(values, labels);
        s.f = ft.f;
        s.p = ft.p;
        s.r = point_biserial(values, labels);
        stats.push_back(std::move(s));
    }
    std::sort(stats.begin(), stats.end(), [](const FeatureStat& a, const FeatureStat& b) {
        if (a.p != b.p) return a.p < b.p;
        return a.feature < b.feature;
    });
    return stats;
}

inline std::string feature_stats_to_csv(const std::vector<FeatureStat>& stats) {
    std::string out = "feature,p_value,r_value\n";
    for (const FeatureStat& s : stats)
        out += s.feature + "," + format_double(s.p) + "," + format_double(s.r) + "\n";
    return out;
}

}  // namespace geopriv
