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
#pragma once

#include "qvgc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace qvgc {

/// Pairwise summation; the result depends only on the element order.
inline double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t kBlock = 16;
    if (values.size() <= kBlock) {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

inline double mean(std::span<const double> values) {
    if (values.empty()) {
        throw UsageError("mean of an empty range");
    }
    return pairwise_sum(values) / static_cast<double>(values.size());
}

inline double median(std::vector<double> values) {
    if (values.empty()) {
        throw UsageError("median of an empty range");
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

inline void require_finite(double v, const std::string &what) {
    if (!std::isfinite(v)) {
        throw NumericalError(what + " is not finite");
    }
}

inline void require_finite(std::span<const double> v, const std::string &what) {
    for (double x : v) {
        require_finite(x, what);
    }
}

/// Worker count: QVGC_THREADS if set and positive, else hardware concurrency.
inline std::size_t default_worker_count() {
    if (const char *env = std::getenv("QVGC_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/**
 * Run body(i) for i in [0, n) on up to `workers` threads. Each index is
 * processed exactly once; results must be written to per-index slots so the
 * outcome does not depend on scheduling.
 */
inline void parallel_for(std::size_t n, std::size_t workers,
                         const std::function<void(std::size_t)> &body) {
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) {
                    body(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    for (const auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace qvgc
