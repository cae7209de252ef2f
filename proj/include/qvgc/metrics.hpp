// Copyright 2026 The qvgc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Support-weighted precision, recall and F1 for class-index predictions.
 */
#pragma once

#include "qvgc/error.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace qvgc {

inline constexpr std::size_t kNumClasses = 2;

/// confusion[t][p]: samples of true class t predicted as p.
using Confusion = std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses>;

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;

    bool operator==(const ClassMetrics &) const = default;
};

struct MetricsReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    Confusion confusion{};
    std::array<ClassMetrics, kNumClasses> per_class{};

    bool operator==(const MetricsReport &) const = default;
};

/// Zero-division convention: a ratio with an empty denominator is 0.
inline MetricsReport metrics_from_confusion(const Confusion &c) {
    MetricsReport r;
    r.confusion = c;
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
        std::uint64_t row = 0;
        std::uint64_t col = 0;
        for (std::size_t j = 0; j < kNumClasses; ++j) {
            row += c[k][j];
            col += c[j][k];
        }
        auto &m = r.per_class[k];
        const auto tp = static_cast<double>(c[k][k]);
        m.support = row;
        m.precision = col > 0 ? tp / static_cast<double>(col) : 0.0;
        m.recall = row > 0 ? tp / static_cast<double>(row) : 0.0;
        m.f1 = m.precision + m.recall > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        total += row;
    }
    if (total == 0) {
        throw UsageError("metrics of an empty confusion matrix");
    }
    for (const auto &m : r.per_class) {
        const double w = static_cast<double>(m.support) / static_cast<double>(total);
        r.precision += w * m.precision;
        r.recall += w * m.recall;
        r.f1 += w * m.f1;
    }
    return r;
}

inline Confusion confusion_matrix(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        detail::fail_arity("prediction count", labels.size(), predictions.size());
    }
    if (labels.empty()) {
        throw UsageError("metrics need at least one sample");
    }
    Confusion c{};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int t = labels[i];
        const int p = predictions[i];
        if (t < 0 || p < 0 || t >= static_cast<int>(kNumClasses) ||
            p >= static_cast<int>(kNumClasses)) {
            throw IndexError("class index out of range");
        }
        ++c[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    return c;
}

inline MetricsReport compute_weighted_metrics(std::span<const int> predictions,
                                              std::span<const int> labels) {
    return metrics_from_confusion(confusion_matrix(predictions, labels));
}

} // namespace qvgc
