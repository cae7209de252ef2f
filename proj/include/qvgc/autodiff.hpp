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
 * Gradients of the VQC loss.
 *
 * Every rotation gate here is exp(-i t G / 2) with G^2 = I, so for any gate
 * angle t the expectation obeys the two-term shift rule
 *
 *     dE/dt = [E(t + pi/2) - E(t - pi/2)] / 2.
 *
 * Ansatz gradients apply it to each parameter's single gate. Feature
 * gradients apply it to each ZZ-map gate and chain through the angle's
 * dependence on x: d(2 x_i)/dx_i = 2 and
 * d(2 (pi - x_i)(pi - x_j))/dx_i = -2 (pi - x_j). Contributions of a feature
 * that appears in several gates are summed.
 *
 * The loss chain uses dL/dE from vqc.hpp. Central finite differences of the
 * loss are provided as an independent check.
 */
#pragma once

#include "qvgc/circuits.hpp"
#include "qvgc/encoders.hpp"
#include "qvgc/error.hpp"
#include "qvgc/numeric.hpp"
#include "qvgc/statevec.hpp"
#include "qvgc/vqc.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

namespace qvgc {

struct GradientReport {
    std::vector<double> d_theta_q;
    std::vector<double> d_features;
    double loss = 0.0;
    double expectation = 0.0;
};

/**
 * dE/dt_g for each listed gate g of a concrete circuit, by the shift rule.
 * The state before each listed gate is built once and reused for both shifts.
 */
inline std::vector<double> shift_rule_derivatives(const Circuit &concrete,
                                                  const Statevector &initial,
                                                  std::span<const std::size_t> gate_indices) {
    std::vector<std::size_t> order(gate_indices.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return gate_indices[a] < gate_indices[b]; });

    std::vector<double> out(gate_indices.size(), 0.0);
    Statevector prefix = initial;
    std::size_t applied = 0;
    for (std::size_t k : order) {
        const std::size_t g = gate_indices[k];
        const Gate &gate = concrete[g];
        if (!is_rotation(gate.kind)) {
            throw UsageError("shift rule requested for non-rotation gate " +
                             std::to_string(g));
        }
        run_range(concrete, prefix, applied, g);
        applied = g;
        double e[2];
        for (int side = 0; side < 2; ++side) {
            Statevector s = prefix;
            const double delta = side == 0 ? std::numbers::pi / 2 : -std::numbers::pi / 2;
            s.apply(gate.kind, gate.qubits(), gate.angle.value() + delta);
            run_range(concrete, s, g + 1, concrete.size());
            e[side] = expectation(s);
        }
        out[k] = 0.5 * (e[0] - e[1]);
    }
    return out;
}

/// Gate index of each ansatz slot; throws unless every slot drives exactly
/// one gate with unit scale.
inline std::vector<std::size_t> single_occurrence_slots(const Circuit &ansatz) {
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> where(ansatz.n_params(), kUnset);
    for (std::size_t g = 0; g < ansatz.size(); ++g) {
        const auto &angle = ansatz[g].angle;
        if (!angle.symbolic()) {
            continue;
        }
        const std::size_t slot = *angle.slot();
        if (where[slot] != kUnset || angle.scale() != 1.0) {
            throw UnsupportedError("parameter shift needs each parameter in exactly one "
                                   "gate with unit coefficient (slot " +
                                   std::to_string(slot) + ")");
        }
        where[slot] = g;
    }
    for (std::size_t s = 0; s < where.size(); ++s) {
        if (where[s] == kUnset) {
            throw UnsupportedError("parameter slot " + std::to_string(s) + " is unused");
        }
    }
    return where;
}

namespace detail {

/// Whole model as one concrete circuit acting on a fixed initial state.
struct ExpandedCircuit {
    Circuit circuit;
    Statevector initial;
    std::size_t ansatz_offset = 0;
};

inline ExpandedCircuit expand(const VqcModel &model, std::span<const double> features) {
    model.validate();
    if (features.size() != model.feature_map.n_features) {
        fail_arity("feature count", model.feature_map.n_features, features.size());
    }
    const Circuit bound = bind_params(model.ansatz, model.theta);
    switch (model.feature_map.kind) {
    case FeatureMapSpec::Kind::ZZ: {
        Circuit fm = build_zz_map(features, model.feature_map.repetitions,
                                  model.feature_map.entanglement);
        const std::size_t offset = fm.size();
        return {compose(fm, bound), zero_state(model.n_qubits()), offset};
    }
    case FeatureMapSpec::Kind::Amplitude:
        return {bound, build_amplitude_state(features), 0};
    case FeatureMapSpec::Kind::None:
        return {bound, zero_state(model.n_qubits()), 0};
    }
    throw UsageError("unknown feature map kind");
}

} // namespace detail

/**
 * Loss, expectation and the requested shift-rule gradients in one pass.
 * Feature gradients are only defined for the ZZ map.
 */
inline GradientReport parameter_shift_report(const VqcModel &model,
                                             std::span<const double> features, int label,
                                             bool want_theta, bool want_features) {
    if (want_features && model.feature_map.kind != FeatureMapSpec::Kind::ZZ) {
        throw UnsupportedError("feature gradients are only available for the ZZ map");
    }
    auto ex = detail::expand(model, features);

    std::vector<std::size_t> gates;
    std::vector<std::size_t> slot_gate;
    if (want_theta) {
        slot_gate = single_occurrence_slots(model.ansatz);
        for (std::size_t g : slot_gate) {
            gates.push_back(g + ex.ansatz_offset);
        }
    }
    const std::size_t n_theta_gates = gates.size();
    if (want_features) {
        for (std::size_t g = 0; g < ex.ansatz_offset; ++g) {
            if (is_rotation(ex.circuit[g].kind)) {
                gates.push_back(g);
            }
        }
    }

    GradientReport r;
    r.expectation = expectation(run(ex.circuit, ex.initial));
    r.loss = loss_from_expectation(r.expectation, label);
    const double dl_de = dloss_dexpectation(r.expectation, label);
    const auto de = shift_rule_derivatives(ex.circuit, ex.initial, gates);

    if (want_theta) {
        r.d_theta_q.resize(model.theta.size());
        for (std::size_t k = 0; k < n_theta_gates; ++k) {
            r.d_theta_q[k] = dl_de * de[k];
        }
    }
    if (want_features) {
        r.d_features.assign(features.size(), 0.0);
        for (std::size_t k = n_theta_gates; k < gates.size(); ++k) {
            const Gate &g = ex.circuit[gates[k]];
            const double d = dl_de * de[k];
            if (g.kind == GateKind::RZ) {
                r.d_features[g.targets[0]] += 2.0 * d;
            } else if (g.kind == GateKind::RZZ) {
                const std::size_t i = g.targets[0];
                const std::size_t j = g.targets[1];
                r.d_features[i] += -2.0 * (std::numbers::pi - features[j]) * d;
                r.d_features[j] += -2.0 * (std::numbers::pi - features[i]) * d;
            }
        }
    }
    return r;
}

inline std::vector<double> grad_theta_parameter_shift(const VqcModel &model,
                                                      std::span<const double> features,
                                                      int label) {
    return parameter_shift_report(model, features, label, true, false).d_theta_q;
}

inline std::vector<double> grad_features(const VqcModel &model,
                                         std::span<const double> features, int label) {
    return parameter_shift_report(model, features, label, false, true).d_features;
}

/// Central differences of the loss in every theta entry and every feature.
inline GradientReport grad_finite_difference(const VqcModel &model,
                                             std::span<const double> features, int label,
                                             double h) {
    if (!(h >= 1e-7 && h <= 1e-3)) {
        throw UsageError("finite-difference step must lie in [1e-7, 1e-3]");
    }
    auto loss_at = [&](const VqcModel &m, std::span<const double> x) {
        return loss_from_expectation(forward(m, x).expectation, label);
    };
    GradientReport r;
    r.expectation = forward(model, features).expectation;
    r.loss = loss_from_expectation(r.expectation, label);

    VqcModel shifted = model;
    r.d_theta_q.resize(model.theta.size());
    for (std::size_t k = 0; k < model.theta.size(); ++k) {
        shifted.theta[k] = model.theta[k] + h;
        const double up = loss_at(shifted, features);
        shifted.theta[k] = model.theta[k] - h;
        const double down = loss_at(shifted, features);
        shifted.theta[k] = model.theta[k];
        r.d_theta_q[k] = (up - down) / (2.0 * h);
    }

    std::vector<double> x(features.begin(), features.end());
    r.d_features.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = features[i] + h;
        const double up = loss_at(model, x);
        x[i] = features[i] - h;
        const double down = loss_at(model, x);
        x[i] = features[i];
        r.d_features[i] = (up - down) / (2.0 * h);
    }
    return r;
}

} // namespace qvgc
