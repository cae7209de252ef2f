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
 * Variational quantum classifier: feature map, hardware-efficient ansatz and
 * parity readout.
 *
 * The model state is |psi(x, theta)> = V(theta) U_phi(x) |0>, and the class
 * score is E = <psi| Z...Z |psi>. Even parity reads as label +1, odd as -1,
 * so p(+1) = (1 + E) / 2. Dataset classes map 0 -> +1 and 1 -> -1.
 */
#pragma once

#include "qvgc/circuits.hpp"
#include "qvgc/encoders.hpp"
#include "qvgc/error.hpp"
#include "qvgc/numeric.hpp"
#include "qvgc/rng.hpp"
#include "qvgc/statevec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace qvgc {

/// Per layer: RY then RZ on every qubit, then CNOT i -> (i+1) mod n.
struct AnsatzSpec {
    std::size_t n_qubits = 1;
    std::size_t layers = 3;

    [[nodiscard]] std::size_t n_params() const noexcept { return 2 * n_qubits * layers; }
    bool operator==(const AnsatzSpec &) const = default;
};

/// Slot layout: layer l, qubit q -> RY slot 2(l n + q), RZ slot 2(l n + q) + 1.
inline Circuit build_ansatz(const AnsatzSpec &spec) {
    if (spec.layers < 1) {
        throw UsageError("ansatz needs at least one layer");
    }
    const std::size_t n = spec.n_qubits;
    Circuit c(n, spec.n_params());
    for (std::size_t l = 0; l < spec.layers; ++l) {
        for (std::size_t q = 0; q < n; ++q) {
            const std::size_t base = 2 * (l * n + q);
            c.ry(q, Angle::param(base));
            c.rz(q, Angle::param(base + 1));
        }
        if (n > 1) {
            for (std::size_t q = 0; q < n; ++q) {
                c.cnot(q, (q + 1) % n);
            }
        }
    }
    return c;
}

struct VqcModel {
    FeatureMapSpec feature_map;
    /// Symbolic circuit over n_qubits with n_params == theta.size().
    Circuit ansatz;
    std::vector<double> theta;

    [[nodiscard]] std::size_t n_qubits() const { return ansatz.n_qubits(); }

    void validate() const {
        if (feature_map.n_qubits() != ansatz.n_qubits()) {
            throw ArityError("feature map uses " + std::to_string(feature_map.n_qubits()) +
                             " qubits but the ansatz uses " +
                             std::to_string(ansatz.n_qubits()));
        }
        if (theta.size() != ansatz.n_params()) {
            detail::fail_arity("theta length", ansatz.n_params(), theta.size());
        }
    }
};

/// theta drawn uniformly from [-pi, pi).
inline std::vector<double> random_theta(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> theta(n);
    for (auto &t : theta) {
        t = rng.uniform(-std::numbers::pi, std::numbers::pi);
    }
    return theta;
}

inline VqcModel make_vqc(const FeatureMapSpec &fm, std::size_t layers, std::uint64_t seed) {
    const AnsatzSpec spec{fm.n_qubits(), layers};
    VqcModel m{fm, build_ansatz(spec), random_theta(spec.n_params(), seed)};
    m.validate();
    return m;
}

struct Prediction {
    double expectation = 0.0;
    double prob_plus = 0.5;
    int label = +1;
};

inline int label_from_expectation(double e) noexcept { return e >= 0.0 ? +1 : -1; }

inline Prediction make_prediction(double e) noexcept {
    return {e, 0.5 * (1.0 + e), label_from_expectation(e)};
}

/// Dataset class (0/1) to parity label (+1/-1), and back.
constexpr int parity_label(int cls) noexcept { return cls == 0 ? +1 : -1; }
constexpr int class_from_parity(int label) noexcept { return label > 0 ? 0 : 1; }

/// Final state V(theta) applied to an already-encoded state.
inline Statevector evolve(const VqcModel &model, Statevector encoded) {
    return run(bind_params(model.ansatz, model.theta), std::move(encoded));
}

inline Prediction forward_encoded(const VqcModel &model, const Statevector &encoded) {
    return make_prediction(expectation(evolve(model, encoded)));
}

inline Prediction forward(const VqcModel &model, std::span<const double> features) {
    model.validate();
    return forward_encoded(model, encode(model.feature_map, features));
}

/// Majority parity over `shots` samples of the final state; ties go to +1.
inline int predict_by_shots(const VqcModel &model, std::span<const double> features,
                            std::size_t shots, std::uint64_t seed) {
    model.validate();
    const auto state = evolve(model, encode(model.feature_map, features));
    std::uint64_t even = 0;
    std::uint64_t odd = 0;
    for (const auto &[index, count] : sample(state, shots, seed)) {
        ((std::popcount(index) & 1) != 0 ? odd : even) += count;
    }
    return even >= odd ? +1 : -1;
}

inline constexpr double kProbClamp = 1e-12;

/// p(y | E) = (1 + y E) / 2, clamped to [eps, 1 - eps].
inline double label_probability(double e, int y) noexcept {
    return std::clamp(0.5 * (1.0 + y * e), kProbClamp, 1.0 - kProbClamp);
}

inline double loss_from_expectation(double e, int y) noexcept {
    return -std::log(label_probability(e, y));
}

/// d(-log p(y))/dE = -y / (1 + y E); zero where the clamp is active.
inline double dloss_dexpectation(double e, int y) noexcept {
    const double p = 0.5 * (1.0 + y * e);
    if (p <= kProbClamp || p >= 1.0 - kProbClamp) {
        return 0.0;
    }
    return -static_cast<double>(y) / (1.0 + y * e);
}

struct LabeledFeatures {
    std::vector<double> features;
    int label = +1;  // +1 or -1
};

/// Mean cross-entropy over the batch.
inline double loss(const VqcModel &model, std::span<const LabeledFeatures> batch) {
    if (batch.empty()) {
        throw UsageError("loss of an empty batch");
    }
    std::vector<double> terms(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        terms[i] = loss_from_expectation(forward(model, batch[i].features).expectation,
                                         batch[i].label);
    }
    return mean(terms);
}

} // namespace qvgc
