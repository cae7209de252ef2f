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
 * Data-encoding feature maps: second-order Pauli (ZZ) and amplitude encoding.
 *
 * ZZ map, one repetition on n qubits:
 *
 *     H on every qubit
 *     RZ(2 x_i) on qubit i
 *     RZZ(2 (pi - x_i)(pi - x_j)) on every pair (i, j), i < j
 *
 * i.e. the diagonal layer is exp(-i sum_S phi_S(x) Z_S) with phi_{i} = x_i and
 * phi_{i,j} = (pi - x_i)(pi - x_j). Features map one-to-one onto qubits.
 *
 * Amplitude map: x in R^n becomes sum_i x_i / |x| |i> on ceil(log2 n) qubits,
 * zero-padded to the next power of two.
 */
#pragma once

#include "qvgc/circuits.hpp"
#include "qvgc/error.hpp"
#include "qvgc/statevec.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qvgc {

/// Which qubit pairs receive a ZZ phase.
enum class Entanglement { Full, Linear };

inline std::string_view entanglement_name(Entanglement e) {
    return e == Entanglement::Full ? "full" : "linear";
}

/// Qubits needed to amplitude-encode n features: ceil(log2 n), at least 1.
inline std::size_t amplitude_qubits(std::size_t n_features) {
    if (n_features < 2) {
        throw UsageError("amplitude encoding needs at least 2 features");
    }
    return static_cast<std::size_t>(std::bit_width(n_features - 1));
}

inline std::vector<std::pair<std::size_t, std::size_t>> zz_pairs(std::size_t n,
                                                                 Entanglement e) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (e == Entanglement::Full || j == i + 1) {
                pairs.emplace_back(i, j);
            }
        }
    }
    return pairs;
}

struct FeatureMapSpec {
    enum class Kind { None, ZZ, Amplitude };

    Kind kind = Kind::None;
    std::size_t n_features = 0;
    std::size_t repetitions = 1;
    Entanglement entanglement = Entanglement::Full;
    /// Register width when kind == None (no data is encoded).
    std::size_t bare_qubits = 1;

    static FeatureMapSpec zz(std::size_t n_features, std::size_t repetitions = 2,
                             Entanglement e = Entanglement::Full) {
        if (n_features < 1 || repetitions < 1) {
            throw UsageError("ZZ map needs >= 1 feature and >= 1 repetition");
        }
        return {Kind::ZZ, n_features, repetitions, e, 0};
    }

    static FeatureMapSpec amplitude(std::size_t n_features) {
        amplitude_qubits(n_features);
        return {Kind::Amplitude, n_features, 1, Entanglement::Full, 0};
    }

    /// Identity map: the ansatz acts directly on |0...0>.
    static FeatureMapSpec none(std::size_t n_qubits) {
        return {Kind::None, 0, 1, Entanglement::Full, n_qubits};
    }

    [[nodiscard]] std::size_t n_qubits() const {
        switch (kind) {
        case Kind::ZZ: return n_features;
        case Kind::Amplitude: return amplitude_qubits(n_features);
        case Kind::None: return bare_qubits;
        }
        return 0;
    }

    bool operator==(const FeatureMapSpec &) const = default;
};

inline std::string_view feature_map_name(FeatureMapSpec::Kind k) {
    switch (k) {
    case FeatureMapSpec::Kind::ZZ: return "zz";
    case FeatureMapSpec::Kind::Amplitude: return "amplitude";
    case FeatureMapSpec::Kind::None: return "none";
    }
    return "?";
}

inline Circuit build_zz_map(std::span<const double> x, std::size_t repetitions,
                            Entanglement entanglement = Entanglement::Full) {
    if (x.empty()) {
        throw UsageError("ZZ map: empty input vector");
    }
    if (repetitions < 1) {
        throw UsageError("ZZ map: repetitions must be >= 1");
    }
    const std::size_t n = x.size();
    const auto pairs = zz_pairs(n, entanglement);
    Circuit c(n);
    for (std::size_t r = 0; r < repetitions; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            c.h(i);
        }
        for (std::size_t i = 0; i < n; ++i) {
            c.rz(i, 2.0 * x[i]);
        }
        for (auto [i, j] : pairs) {
            c.rzz(i, j, 2.0 * (std::numbers::pi - x[i]) * (std::numbers::pi - x[j]));
        }
    }
    return c;
}

inline Statevector build_amplitude_state(std::span<const double> x) {
    const std::size_t nq = amplitude_qubits(x.size());
    double sq = 0.0;
    for (double v : x) {
        sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw DegenerateInputError("amplitude encoding of a zero or non-finite vector");
    }
    std::vector<complex_t> amps(std::size_t{1} << nq, complex_t{0.0, 0.0});
    for (std::size_t i = 0; i < x.size(); ++i) {
        amps[i] = x[i] / norm;
    }
    return Statevector::from_amplitudes(std::move(amps));
}

/// The state U_phi(x)|0> for any feature map.
inline Statevector encode(const FeatureMapSpec &spec, std::span<const double> x) {
    if (x.size() != spec.n_features) {
        detail::fail_arity("feature count", spec.n_features, x.size());
    }
    switch (spec.kind) {
    case FeatureMapSpec::Kind::ZZ:
        return run(build_zz_map(x, spec.repetitions, spec.entanglement));
    case FeatureMapSpec::Kind::Amplitude:
        return build_amplitude_state(x);
    case FeatureMapSpec::Kind::None:
        return zero_state(spec.bare_qubits);
    }
    throw UsageError("unknown feature map kind");
}

} // namespace qvgc
