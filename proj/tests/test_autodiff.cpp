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
#include "qvgc/autodiff.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace qvgc;

namespace {

VqcModel single_ry(double theta) {
    Circuit c(1, 1);
    c.ry(0, Angle::param(0));
    return {FeatureMapSpec::none(1), c, {theta}};
}

/// 1-feature ZZ map read out in the X basis: E(x) = cos(2x).
VqcModel bare_zz1() {
    Circuit c(1, 1);
    c.h(0);
    c.rz(0, Angle::param(0));  // diagonal, parity unchanged
    return {FeatureMapSpec::zz(1, 1), c, {0.0}};
}

double expectation_of(const VqcModel &m, std::span<const double> x) {
    return forward(m, x).expectation;
}

} // namespace

TEST(Autodiff, SingleRyExpectationGradient) {
    // Work on E directly: with label +1, dL/dE = -1/(1+E), so dE = -dL (1+E).
    for (double theta : {0.0, std::numbers::pi / 2, 1.1}) {
        const auto m = single_ry(theta);
        const auto g = grad_theta_parameter_shift(m, {}, +1);
        const double e = std::cos(theta);
        EXPECT_NEAR(-g[0] * (1.0 + e), -std::sin(theta), 1e-12) << theta;
    }
    // Finite-difference cross-check of dE/dtheta at pi/2.
    const double h = 1e-5;
    const double fd = (expectation_of(single_ry(std::numbers::pi / 2 + h), {}) -
                       expectation_of(single_ry(std::numbers::pi / 2 - h), {})) /
                      (2 * h);
    EXPECT_NEAR(fd, -1.0, 1e-9);
}

TEST(Autodiff, ShiftRuleDerivativesOnBareCircuit) {
    Circuit c(1);
    c.ry(0, 0.7);
    const auto d = shift_rule_derivatives(c, zero_state(1), std::vector<std::size_t>{0});
    EXPECT_NEAR(d[0], -std::sin(0.7), 1e-14);
}

TEST(Autodiff, FeatureGradientSingleQubit) {
    const auto m = bare_zz1();
    for (double x : {0.0, std::numbers::pi / 4, 0.3}) {
        const std::vector<double> xs{x};
        const double e = expectation_of(m, xs);
        EXPECT_NEAR(e, std::cos(2 * x), 1e-14);
        const auto g = grad_features(m, xs, +1);
        // dL/dx = dL/dE * dE/dx with dL/dE = -1/(1+E).
        const double de_dx = -g[0] * (1.0 + e);
        EXPECT_NEAR(de_dx, -2.0 * std::sin(2 * x), 1e-12) << x;
    }
    const std::vector<double> xs{std::numbers::pi / 4};
    const auto fd = grad_finite_difference(m, xs, +1, 1e-5);
    EXPECT_NEAR(grad_features(m, xs, +1)[0], fd.d_features[0], 1e-6);
}

TEST(Autodiff, PairTermMatchesFiniteDifference) {
    auto m = make_vqc(FeatureMapSpec::zz(2, 2), 2, 31);
    const std::vector<double> x{0.4, -1.3};
    for (int y : {+1, -1}) {
        const auto g = grad_features(m, x, y);
        const auto fd = grad_finite_difference(m, x, y, 1e-5);
        for (std::size_t i = 0; i < 2; ++i) {
            EXPECT_NEAR(g[i], fd.d_features[i], 1e-6);
        }
    }
}

TEST(Autodiff, RandomModelsMatchFiniteDifferences) {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 4);
        const auto fm = trial % 3 == 0 ? FeatureMapSpec::amplitude(1U << (n < 2 ? 1 : n))
                                       : FeatureMapSpec::zz(n, 2);
        auto m = make_vqc(fm, 3, 1000 + trial);
        std::vector<double> x(fm.n_features);
        for (auto &v : x) {
            v = u(rng);
        }
        const int y = trial % 2 == 0 ? +1 : -1;
        const auto fd = grad_finite_difference(m, x, y, 1e-5);
        const bool zz = fm.kind == FeatureMapSpec::Kind::ZZ;
        const auto ps = parameter_shift_report(m, x, y, true, zz);
        ASSERT_EQ(ps.d_theta_q.size(), m.theta.size());
        for (std::size_t k = 0; k < m.theta.size(); ++k) {
            EXPECT_NEAR(ps.d_theta_q[k], fd.d_theta_q[k], 1e-6) << "trial " << trial;
        }
        if (zz) {
            for (std::size_t i = 0; i < x.size(); ++i) {
                EXPECT_NEAR(ps.d_features[i], fd.d_features[i], 1e-6) << "trial " << trial;
            }
        }
        EXPECT_DOUBLE_EQ(ps.loss, fd.loss);
    }
}

TEST(Autodiff, FiniteDifferenceStepRobustness) {
    auto m = make_vqc(FeatureMapSpec::zz(3, 2), 2, 55);
    const std::vector<double> x{0.3, 0.9, -0.4};
    const auto a = grad_finite_difference(m, x, -1, 1e-4);
    const auto b = grad_finite_difference(m, x, -1, 1e-5);
    for (std::size_t k = 0; k < a.d_theta_q.size(); ++k) {
        EXPECT_NEAR(a.d_theta_q[k], b.d_theta_q[k], 1e-6);
    }
    for (std::size_t i = 0; i < a.d_features.size(); ++i) {
        EXPECT_NEAR(a.d_features[i], b.d_features[i], 1e-6);
    }
    EXPECT_THROW(grad_finite_difference(m, x, 1, 1e-2), UsageError);
}

TEST(Autodiff, ZeroGradientAtSymmetricPoint) {
    // RY(0) then a Z-diagonal rotation: E = cos(theta_0), stationary at 0,
    // and the RZ parameter never changes parity.
    Circuit c(1, 2);
    c.ry(0, Angle::param(0));
    c.rz(0, Angle::param(1));
    const VqcModel m{FeatureMapSpec::none(1), c, {0.0, 0.8}};
    const auto g = grad_theta_parameter_shift(m, {}, -1);
    EXPECT_NEAR(g[0], 0.0, 1e-12);
    EXPECT_NEAR(g[1], 0.0, 1e-12);

    // Expectation pinned at 0: RY(pi/2) puts the qubit on the equator and
    // the loss is flat in the RZ angle.
    const VqcModel flat{FeatureMapSpec::none(1), c, {std::numbers::pi / 2, 0.3}};
    const auto fd = grad_finite_difference(flat, {}, +1, 1e-5);
    EXPECT_NEAR(fd.d_theta_q[1], 0.0, 1e-6);
}

TEST(Autodiff, DeterministicAcrossCalls) {
    auto m = make_vqc(FeatureMapSpec::zz(3, 2), 3, 8);
    const std::vector<double> x{0.5, -0.2, 1.7};
    const auto a = parameter_shift_report(m, x, 1, true, true);
    const auto b = parameter_shift_report(m, x, 1, true, true);
    EXPECT_EQ(a.d_theta_q, b.d_theta_q);
    EXPECT_EQ(a.d_features, b.d_features);
}

TEST(Autodiff, UnsupportedCases) {
    auto amp = make_vqc(FeatureMapSpec::amplitude(4), 1, 0);
    EXPECT_THROW(grad_features(amp, std::vector<double>{1, 2, 3, 4}, 1), UnsupportedError);

    Circuit shared(1, 1);
    shared.ry(0, Angle::param(0));
    shared.rz(0, Angle::param(0));
    const VqcModel twice{FeatureMapSpec::none(1), shared, {0.1}};
    EXPECT_THROW(grad_theta_parameter_shift(twice, {}, 1), UnsupportedError);

    Circuit scaled(1, 1);
    scaled.ry(0, Angle::param(0, 2.0));
    const VqcModel s{FeatureMapSpec::none(1), scaled, {0.1}};
    EXPECT_THROW(grad_theta_parameter_shift(s, {}, 1), UnsupportedError);
}
