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
 * Test-only reference for the ZZ feature map.
 *
 * Each repetition is a dense H^{(x)n} followed by the exponential of the
 * diagonal generator G = sum_i x_i Z_i + sum_{i<j} (pi - x_i)(pi - x_j) Z_i Z_j.
 * Since G is diagonal, exp(-i G) is the element-wise exponential of its
 * diagonal, with z_i(b) = (-1)^{b_i} on basis state b.
 */
#pragma once

#include "oracle.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace zz_oracle {

inline std::vector<oracle::cx> state(const std::vector<double> &x, std::size_t reps) {
    const std::size_t n = x.size();
    const std::size_t dim = std::size_t{1} << n;
    std::vector<std::pair<std::size_t, oracle::Matrix>> hs;
    for (std::size_t q = 0; q < n; ++q) {
        hs.emplace_back(q, oracle::H());
    }
    const auto hlayer = oracle::embed(n, hs);

    std::vector<oracle::cx> psi = oracle::basis0(n);
    for (std::size_t r = 0; r < reps; ++r) {
        psi = oracle::apply(hlayer, psi);
        for (std::size_t b = 0; b < dim; ++b) {
            auto z = [&](std::size_t i) { return ((b >> i) & 1U) != 0 ? -1.0 : 1.0; };
            double g = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                g += x[i] * z(i);
                for (std::size_t j = i + 1; j < n; ++j) {
                    g += (std::numbers::pi - x[i]) * (std::numbers::pi - x[j]) * z(i) * z(j);
                }
            }
            psi[b] *= std::polar(1.0, -g);
        }
    }
    return psi;
}

} // namespace zz_oracle
