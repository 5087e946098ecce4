#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geopriv/common.hpp"

namespace geopriv {

struct EmaResponse {
    std::string user_id;
    std::int64_t timestamp = 0;
    int raw_code = 0;  // 1..5
};

struct DailyLabel {
    std::string user_id;
    std::int64_t date = 0;       // local epoch day
    double ordered_level = 0.0;  // 1..5, fractional for even-count medians
    int binary = 0;              // 1 iff ordered_level >= 3
};

// Reorders the raw 1..5 codes onto a monotone stress scale:
// raw {1,2,3,4,5} -> {3,4,5,2,1}.
inline int transform_level(int raw_code) {
    static const int table[5] = {3, 4, 5, 2, 1};
    if (raw_code < 1 || raw_code > 5)
        throw Error("EMA raw code out of range: " + std::to_string(raw_code));
    return table[raw_code - 1];
}

// Median of the transformed levels (even count: mean of the middle two),
// binarized at level >= 3. Empty input yields no label.
inline std::optional<DailyLabel> daily_label(const std::vector<EmaResponse>& responses,
                                             std::int64_t date) {
    if (responses.empty()) return std::nullopt;
    std::vector<int> levels;
    levels.reserve(responses.size());
    for (const EmaResponse& r : responses) levels.push_back(transform_level(r.raw_code));
    std::sort(levels.begin(), levels.end());
    std::size_t n = levels.size();
    double median = (n % 2 == 1)
                        ? levels[n / 2]
                        : (levels[n / 2 - 1] + levels[n / 2]) / 2.0;
    DailyLabel label;
    label.user_id = responses.front().user_id;
    label.date = date;
    label.ordered_level = median;
    label.binary = median < 3.0 ? 0 : 1;
    return label;
}

}  // namespace geopriv
