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
#include "oracle.hpp"
#include "zz_oracle.hpp"
#include "qvgc/encoders.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace qvgc;

TEST(Encoders, SingleFeatureZeroIsHadamard) {
    const std::vector<double> x{0.0};
    const auto c = build_zz_map(x, 1);
    ASSERT_EQ(c.size(), 2U);
    EXPECT_EQ(c[0].kind, GateKind::H);
    EXPECT_EQ(c[1].kind, GateKind::RZ);
    EXPECT_DOUBLE_EQ(c[1].angle.value(), 0.0);
    const auto s = run(c);
    EXPECT_NEAR(s[0].real(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s[1].real(), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Encoders, ZeroInputPairPhase) {
    const std::vector<double> x{0.0, 0.0};
    const auto c = build_zz_map(x, 1);
    // H H RZ RZ RZZ
    ASSERT_EQ(c.size(), 5U);
    EXPECT_DOUBLE_EQ(c[2].angle.value(), 0.0);
    EXPECT_DOUBLE_EQ(c[3].angle.value(), 0.0);
    EXPECT_EQ(c[4].kind, GateKind::RZZ);
    EXPECT_DOUBLE_EQ(c[4].angle.value(), 2.0 * std::numbers::pi * std::numbers::pi);
}

TEST(Encoders, TwoFeaturesTwoRepsMatchOracle) {
    const std::vector<double> x{0.3, 1.2};
    const auto s = run(build_zz_map(x, 2));
    const auto ref = zz_oracle::state(x, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(std::abs(s[i] - ref[i]), 0.0, 1e-12);
    }
}

TEST(Encoders, ZzMatchesOracleRandomised) {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 3);
        const std::size_t reps = 1 + static_cast<std::size_t>(trial % 2);
        std::vector<double> x(n);
        for (auto &v : x) {
            v = u(rng);
        }
        const auto s = run(build_zz_map(x, reps));
        const auto ref = zz_oracle::state(x, reps);
        for (std::size_t i = 0; i < s.dim(); ++i) {
            ASSERT_NEAR(std::abs(s[i] - ref[i]), 0.0, 1e-10);
        }
    }
}

TEST(Encoders, ZzNormPreserved) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(1 + trial % 4);
        for (auto &v : x) {
            v = u(rng);
        }
        EXPECT_NEAR(run(build_zz_map(x, 2)).norm_squared(), 1.0, 1e-10);
    }
}

TEST(Encoders, LinearEntanglementUsesNeighboursOnly) {
    const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
    const auto full = build_zz_map(x, 1, Entanglement::Full);
    const auto lin = build_zz_map(x, 1, Entanglement::Linear);
    EXPECT_EQ(full.size(), 4U + 4U + 6U);
    EXPECT_EQ(lin.size(), 4U + 4U + 3U);
}

TEST(Encoders, ZzErrors) {
    EXPECT_THROW(build_zz_map(std::vector<double>{}, 1), UsageError);
    EXPECT_THROW(build_zz_map(std::vector<double>{1.0}, 0), UsageError);
}

TEST(Encoders, AmplitudeBasics) {
    const auto s = build_amplitude_state(std::vector<double>{1, 0, 0, 0});
    EXPECT_EQ(s.n_qubits(), 2U);
    EXPECT_DOUBLE_EQ(s[0].real(), 1.0);

    const auto t = build_amplitude_state(std::vector<double>{3, 4});
    EXPECT_EQ(t.n_qubits(), 1U);
    EXPECT_DOUBLE_EQ(t[0].real(), 0.6);
    EXPECT_DOUBLE_EQ(t[1].real(), 0.8);
}

TEST(Encoders, AmplitudeQubitCounts) {
    for (auto [dim, q] : {std::pair{64, 6}, std::pair{256, 8}, std::pair{512, 9},
                          std::pair{1024, 10}, std::pair{2, 1}, std::pair{3, 2},
                          std::pair{10, 4}}) {
        std::vector<double> x(dim, 1.0);
        EXPECT_EQ(build_amplitude_state(x).n_qubits(), static_cast<std::size_t>(q)) << dim;
        EXPECT_EQ(FeatureMapSpec::amplitude(dim).n_qubits(), static_cast<std::size_t>(q));
    }
}

TEST(Encoders, AmplitudeZeroPadsAndNormalises) {
    const auto s = build_amplitude_state(std::vector<double>{1, 2, 2});
    ASSERT_EQ(s.dim(), 4U);
    EXPECT_NEAR(s[0].real(), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(s[2].real(), 2.0 / 3.0, 1e-15);
    EXPECT_EQ(s[3], complex_t(0.0, 0.0));
    EXPECT_NEAR(s.norm_squared(), 1.0, 1e-15);
}

TEST(Encoders, AmplitudeErrors) {
    EXPECT_THROW(build_amplitude_state(std::vector<double>{0, 0, 0}), DegenerateInputError);
    EXPECT_THROW(build_amplitude_state(std::vector<double>{1.0}), UsageError);
}

TEST(Encoders, AmplitudeScaleInvariance) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> x(5 + trial % 20);
        for (auto &v : x) {
            v = g(rng);
        }
        const double c = 0.01 + std::abs(g(rng)) * 10.0;
        std::vector<double> pos(x.size()), neg(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            pos[i] = c * x[i];
            neg[i] = -c * x[i];
        }
        const auto a = build_amplitude_state(x);
        const auto b = build_amplitude_state(pos);
        const auto m = build_amplitude_state(neg);
        for (std::size_t i = 0; i < a.dim(); ++i) {
            EXPECT_NEAR(std::abs(a[i] - b[i]), 0.0, 1e-12);
            EXPECT_NEAR(std::abs(a[i] + m[i]), 0.0, 1e-12);  // global sign -1
        }
    }
}

TEST(Encoders, AmplitudeReadbackIsLossless) {
    const std::vector<double> x{0.5, -1.5, 2.0, 0.25, -3.0};
    double norm = 0.0;
    for (double v : x) {
        norm += v * v;
    }
    norm = std::sqrt(norm);
    const auto s = build_amplitude_state(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(s[i].real(), x[i] / norm);
        EXPECT_EQ(s[i].imag(), 0.0);
    }
}

TEST(Encoders, EncodeDispatch) {
    const auto spec = FeatureMapSpec::zz(2, 2);
    const std::vector<double> x{0.3, 1.2};
    const auto s = encode(spec, x);
    const auto ref = run(build_zz_map(x, 2));
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(s[i], ref[i]);
    }
    EXPECT_THROW(encode(spec, std::vector<double>{1.0}), ArityError);
    EXPECT_EQ(encode(FeatureMapSpec::none(3), {}).n_qubits(), 3U);
}
