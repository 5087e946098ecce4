#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "geopriv/common.hpp"

namespace geopriv {

// Training partition with per-row provenance. Original rows keep the row id
// they carried in the source dataset; synthetic rows get id -1.
struct TrainMatrix {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    std::vector<std::int64_t> row_ids;  // -1 marks a synthetic row
    std::vector<std::string> warnings;

    std::size_t rows() const { return X.size(); }
    std::size_t cols() const { return X.empty() ? 0 : X[0].size(); }

    void push_row(std::vector<double> x, int label, std::int64_t id) {
        X.push_back(std::move(x));
        y.push_back(label);
        row_ids.push_back(id);
    }
};

namespace detail {

// Column-wise standardization parameters from the given rows.
struct Standardizer {
    std::vector<double> mean, std;

    static Standardizer fit(const std::vector<std::vector<double>>& X) {
        Standardizer s;
        if (X.empty()) return s;
        std::size_t d = X[0].size();
        s.mean.assign(d, 0.0);
        s.std.assign(d, 0.0);
        for (const auto& row : X)
            for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
        for (std::size_t j = 0; j < d; ++j) s.mean[j] /= static_cast<double>(X.size());
        for (const auto& row : X)
            for (std::size_t j = 0; j < d; ++j)
                s.std[j] += (row[j] - s.mean[j]) * (row[j] - s.mean[j]);
        for (std::size_t j = 0; j < d; ++j) {
            s.std[j] = std::sqrt(s.std[j] / static_cast<double>(X.size()));
            if (s.std[j] == 0.0) s.std[j] = 1.0;
        }
        return s;
    }

    double dist2(const std::vector<double>& a, const std::vector<double>& b) const {
        double d2 = 0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            double d = (a[j] - b[j]) / std[j];
            d2 += d * d;
        }
        return d2;
    }
};

// Indices of the k nearest rows to `q` among `pool` (excluding `exclude`),
// ties broken by lower index.
inline std::vector<std::size_t> k_nearest(const std::vector<std::vector<double>>& rows,
                                          const std::vector<std::size_t>& pool,
                                          const std::vector<double>& q,
                                          std::size_t exclude, std::size_t k,
                                          const Standardizer& std_params) {
    std::vector<std::pair<double, std::size_t>> ds;
    ds.reserve(pool.size());
    for (std::size_t i : pool) {
        if (i == exclude) continue;
        ds.emplace_back(std_params.dist2(rows[i], q), i);
    }
    std::size_t kk = std::min(k, ds.size());
    std::partial_sort(ds.begin(), ds.begin() + kk, ds.end());
    std::vector<std::size_t> out;
    out.reserve(kk);
    for (std::size_t i = 0; i < kk; ++i) out.push_back(ds[i].second);
    return out;
}

}  // namespace detail

// Oversamples the minority class to majority size. Each synthetic sample is
// x_i + u * (x_nn - x_i) with u uniform in [0,1] and x_nn one of the k
// nearest minority neighbors in standardized Euclidean space. Original rows
// pass through unchanged.
inline TrainMatrix smote(const TrainMatrix& in, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> class0, class1;
    for (std::size_t i = 0; i < in.rows(); ++i) (in.y[i] == 0 ? class0 : class1).push_back(i);
    if (class0.empty() || class1.empty())
        throw Error("smote requires both classes present");

    TrainMatrix out = in;
    out.warnings.clear();
    const bool minority_is_1 = class1.size() < class0.size();
    const auto& minority = minority_is_1 ? class1 : class0;
    const auto& majority = minority_is_1 ? class0 : class1;
    const int minority_label = minority_is_1 ? 1 : 0;
    std::size_t need = majority.size() - minority.size();
    if (need == 0) return out;

    std::size_t kk = k;
    if (minority.size() <= kk) {
        kk = minority.size() - 1;
        out.warnings.push_back("smote: k reduced to " + std::to_string(kk) +
                               " (minority size " + std::to_string(minority.size()) + ")");
    }

    auto std_params = detail::Standardizer::fit(in.X);
    std::vector<std::vector<std::size_t>> neighbors(minority.size());
    for (std::size_t m = 0; m < minority.size(); ++m)
        neighbors[m] =
            detail::k_nearest(in.X, minority, in.X[minority[m]], minority[m], kk, std_params);

    Rng rng(seed);
    for (std::size_t s = 0; s < need; ++s) {
        std::size_t m = static_cast<std::size_t>(rng.next_below(minority.size()));
        const std::vector<double>& base = in.X[minority[m]];
        const std::vector<double>* nn = &base;  // singleton minority duplicates itself
        if (!neighbors[m].empty())
            nn = &in.X[neighbors[m][rng.next_below(neighbors[m].size())]];
        double u = rng.next_double();
        std::vector<double> synth(base.size());
        for (std::size_t j = 0; j < base.size(); ++j)
            synth[j] = base[j] + u * ((*nn)[j] - base[j]);
        out.push_row(std::move(synth), minority_label, -1);
    }
    return out;
}

// Edited nearest neighbours: removes every sample whose label disagrees with
// the majority label of its k nearest neighbours. Both classes are eligible;
// a removal pass that would empty a class leaves that class untouched.
inline TrainMatrix enn(const TrainMatrix& in, std::size_t k) {
    if (k < 1) throw Error("enn requires k >= 1");
    TrainMatrix out;
    out.warnings = {};
    if (in.rows() <= 1) return in;

    std::size_t kk = k;
    if (kk > in.rows() - 1) {
        kk = in.rows() - 1;
        out.warnings.push_back("enn: k clamped to " + std::to_string(kk));
    }

    auto std_params = detail::Standardizer::fit(in.X);
    std::vector<std::size_t> all(in.rows());
    std::iota(all.begin(), all.end(), 0);

    std::vector<bool> remove(in.rows(), false);
    std::size_t keep_per_class[2] = {0, 0};
    std::size_t total_per_class[2] = {0, 0};
    for (std::size_t i = 0; i < in.rows(); ++i) ++total_per_class[in.y[i]];
    for (std::size_t i = 0; i < in.rows(); ++i) {
        auto nn = detail::k_nearest(in.X, all, in.X[i], i, kk, std_params);
        std::size_t agree = 0;
        for (std::size_t j : nn)
            if (in.y[j] == in.y[i]) ++agree;
        remove[i] = 2 * agree < nn.size();  // strict minority of neighbours agree
    }
    for (std::size_t i = 0; i < in.rows(); ++i)
        if (!remove[i]) ++keep_per_class[in.y[i]];
    for (int c = 0; c < 2; ++c) {
        if (total_per_class[c] > 0 && keep_per_class[c] == 0) {
            out.warnings.push_back("enn: keeping class " + std::to_string(c) +
                                   " untouched (removal would empty it)");
            for (std::size_t i = 0; i < in.rows(); ++i)
                if (in.y[i] == c) remove[i] = false;
        }
    }
    for (std::size_t i = 0; i < in.rows(); ++i)
        if (!remove[i]) out.push_row(in.X[i], in.y[i], in.row_ids[i]);
    return out;
}

inline TrainMatrix smoteenn(const TrainMatrix& in, std::size_t k_smote, std::size_t k_enn,
                            std::uint64_t seed) {
    TrainMatrix mid = smote(in, k_smote, seed);
    TrainMatrix out = enn(mid, k_enn);
    out.warnings.insert(out.warnings.begin(), mid.warnings.begin(), mid.warnings.end());
    return out;
}

}  // namespace geopriv
