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
 * Dense statevector simulator.
 *
 * Qubit q is bit q of the basis index (qubit 0 is the least significant bit),
 * so the basis state |b_{n-1} ... b_1 b_0> lives at index sum_q b_q 2^q.
 * Every kernel walks the 2^n amplitudes in place; no gate matrix larger than
 * 2x2 is ever materialised.
 *
 * Rotation conventions:
 *   RX(t) = exp(-i t X / 2),  RY(t) = exp(-i t Y / 2),  RZ(t) = exp(-i t Z / 2)
 *   RZZ(t) = exp(-i t Z(x)Z / 2)
 */
#pragma once

#include "qvgc/error.hpp"
#include "qvgc/numeric.hpp"
#include "qvgc/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qvgc {

using complex_t = std::complex<double>;

/// Largest register the simulator will allocate (2^24 amplitudes, 256 MiB).
inline constexpr std::size_t kMaxQubits = 24;

enum class GateKind { H, X, Y, Z, S, T, CNOT, RX, RY, RZ, RZZ };

constexpr std::size_t gate_arity(GateKind kind) noexcept {
    return (kind == GateKind::CNOT || kind == GateKind::RZZ) ? 2 : 1;
}

constexpr bool is_rotation(GateKind kind) noexcept {
    return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ ||
           kind == GateKind::RZZ;
}

constexpr std::string_view gate_name(GateKind kind) noexcept {
    switch (kind) {
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::S: return "S";
    case GateKind::T: return "T";
    case GateKind::CNOT: return "CNOT";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::RZZ: return "RZZ";
    }
    return "?";
}

inline GateKind parse_gate_kind(std::string_view name) {
    for (auto k : {GateKind::H, GateKind::X, GateKind::Y, GateKind::Z, GateKind::S,
                   GateKind::T, GateKind::CNOT, GateKind::RX, GateKind::RY, GateKind::RZ,
                   GateKind::RZZ}) {
        if (gate_name(k) == name) {
            return k;
        }
    }
    throw FormatError("unknown gate kind '" + std::string(name) + "'");
}

/// Z(x)Z(x)...(x)Z; eigenvalue +1 on even-parity basis states, -1 on odd.
enum class Observable { ParityZ };

class Statevector {
  public:
    /// |0...0> on n_qubits qubits.
    explicit Statevector(std::size_t n_qubits) : n_qubits_(check_qubits(n_qubits)) {
        amps_.assign(std::size_t{1} << n_qubits_, complex_t{0.0, 0.0});
        amps_[0] = 1.0;
    }

    /// Adopt an amplitude vector; its length must be a power of two >= 2.
    /// The caller is responsible for normalisation.
    static Statevector from_amplitudes(std::vector<complex_t> amps) {
        if (amps.size() < 2 || !std::has_single_bit(amps.size())) {
            throw ArityError("amplitude count must be a power of two >= 2, got " +
                             std::to_string(amps.size()));
        }
        Statevector s;
        s.n_qubits_ = check_qubits(static_cast<std::size_t>(std::countr_zero(amps.size())));
        s.amps_ = std::move(amps);
        return s;
    }

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t dim() const noexcept { return amps_.size(); }
    [[nodiscard]] std::span<const complex_t> amplitudes() const noexcept { return amps_; }
    [[nodiscard]] std::span<complex_t> amplitudes() noexcept { return amps_; }
    [[nodiscard]] complex_t operator[](std::size_t i) const { return amps_[i]; }

    [[nodiscard]] double norm_squared() const noexcept {
        double s = 0.0;
        for (const auto &a : amps_) {
            s += std::norm(a);
        }
        return s;
    }

    /// Apply a gate in place. `angle` is ignored for non-rotation kinds.
    void apply(GateKind kind, std::span<const std::size_t> targets, double angle = 0.0) {
        check_targets(kind, targets);
        const std::size_t q = targets[0];
        switch (kind) {
        case GateKind::H: {
            const double r = 1.0 / std::numbers::sqrt2;
            apply_1q(q, r, r, r, -r);
            break;
        }
        case GateKind::X:
            for_each_pair(q, [](complex_t &a0, complex_t &a1) { std::swap(a0, a1); });
            break;
        case GateKind::Y:
            for_each_pair(q, [](complex_t &a0, complex_t &a1) {
                const complex_t t0 = a0;
                a0 = complex_t{a1.imag(), -a1.real()};  // -i * a1
                a1 = complex_t{-t0.imag(), t0.real()};  //  i * a0
            });
            break;
        case GateKind::Z:
            apply_phase_1q(q, 1.0, -1.0);
            break;
        case GateKind::S:
            apply_phase_1q(q, 1.0, complex_t{0.0, 1.0});
            break;
        case GateKind::T:
            apply_phase_1q(q, 1.0, std::polar(1.0, std::numbers::pi / 4.0));
            break;
        case GateKind::RX: {
            const double c = std::cos(angle / 2.0);
            const double s = std::sin(angle / 2.0);
            apply_1q(q, c, complex_t{0.0, -s}, complex_t{0.0, -s}, c);
            break;
        }
        case GateKind::RY: {
            const double c = std::cos(angle / 2.0);
            const double s = std::sin(angle / 2.0);
            apply_1q(q, c, -s, s, c);
            break;
        }
        case GateKind::RZ:
            apply_phase_1q(q, std::polar(1.0, -angle / 2.0), std::polar(1.0, angle / 2.0));
            break;
        case GateKind::CNOT:
            apply_cnot(targets[0], targets[1]);
            break;
        case GateKind::RZZ:
            apply_rzz(targets[0], targets[1], angle);
            break;
        }
    }

    void apply(GateKind kind, std::initializer_list<std::size_t> targets, double angle = 0.0) {
        apply(kind, std::span<const std::size_t>(targets.begin(), targets.size()), angle);
    }

  private:
    Statevector() = default;

    static std::size_t check_qubits(std::size_t n) {
        if (n < 1 || n > kMaxQubits) {
            throw CapacityError("qubit count " + std::to_string(n) + " outside [1, " +
                                std::to_string(kMaxQubits) + "]");
        }
        return n;
    }

    void check_targets(GateKind kind, std::span<const std::size_t> targets) const {
        if (targets.size() != gate_arity(kind)) {
            throw IndexError(std::string(gate_name(kind)) + " takes " +
                             std::to_string(gate_arity(kind)) + " target(s), got " +
                             std::to_string(targets.size()));
        }
        for (std::size_t t : targets) {
            if (t >= n_qubits_) {
                throw IndexError("qubit " + std::to_string(t) + " out of range for " +
                                 std::to_string(n_qubits_) + "-qubit state");
            }
        }
        if (targets.size() == 2 && targets[0] == targets[1]) {
            throw IndexError("duplicate target qubit " + std::to_string(targets[0]));
        }
    }

    /// Visit (a[i], a[i | 1<<q]) for every index i with bit q clear.
    template <class F> void for_each_pair(std::size_t q, F &&f) {
        const std::size_t stride = std::size_t{1} << q;
        const std::size_t half = amps_.size() >> 1U;
        for (std::size_t k = 0; k < half; ++k) {
            const std::size_t i0 = ((k >> q) << (q + 1)) | (k & (stride - 1));
            f(amps_[i0], amps_[i0 | stride]);
        }
    }

    void apply_1q(std::size_t q, complex_t m00, complex_t m01, complex_t m10, complex_t m11) {
        for_each_pair(q, [&](complex_t &a0, complex_t &a1) {
            const complex_t t0 = a0;
            const complex_t t1 = a1;
            a0 = m00 * t0 + m01 * t1;
            a1 = m10 * t0 + m11 * t1;
        });
    }

    void apply_phase_1q(std::size_t q, complex_t p0, complex_t p1) {
        for_each_pair(q, [&](complex_t &a0, complex_t &a1) {
            a0 *= p0;
            a1 *= p1;
        });
    }

    void apply_cnot(std::size_t control, std::size_t target) {
        const std::size_t cmask = std::size_t{1} << control;
        const std::size_t tmask = std::size_t{1} << target;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & cmask) != 0 && (i & tmask) == 0) {
                std::swap(amps_[i], amps_[i | tmask]);
            }
        }
    }

    void apply_rzz(std::size_t a, std::size_t b, double angle) {
        const complex_t even = std::polar(1.0, -angle / 2.0);
        const complex_t odd = std::polar(1.0, angle / 2.0);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            const bool parity = (((i >> a) ^ (i >> b)) & 1U) != 0;
            amps_[i] *= parity ? odd : even;
        }
    }

    std::size_t n_qubits_ = 0;
    std::vector<complex_t> amps_;
};

inline Statevector zero_state(std::size_t n_qubits) { return Statevector(n_qubits); }

/// Value-returning form of Statevector::apply.
inline Statevector apply_gate(Statevector state, GateKind kind,
                              std::span<const std::size_t> targets, double angle = 0.0) {
    state.apply(kind, targets, angle);
    return state;
}

inline double expectation(const Statevector &state, Observable obs = Observable::ParityZ) {
    switch (obs) {
    case Observable::ParityZ: {
        const auto amps = state.amplitudes();
        double even = 0.0;
        double odd = 0.0;
        for (std::size_t i = 0; i < amps.size(); ++i) {
            ((std::popcount(i) & 1) != 0 ? odd : even) += std::norm(amps[i]);
        }
        return std::clamp(even - odd, -1.0, 1.0);
    }
    }
    return 0.0;
}

/**
 * Draw `shots` basis-state outcomes from |amplitude|^2 by inverse-CDF
 * sampling. The probabilities are renormalised, so tiny norm drift does not
 * bias the draw. Outcomes with zero probability are never returned.
 */
inline std::map<std::uint64_t, std::uint64_t> sample(const Statevector &state,
                                                     std::size_t shots, std::uint64_t seed) {
    if (shots < 1) {
        throw UsageError("shots must be >= 1");
    }
    const auto amps = state.amplitudes();
    std::vector<double> cdf(amps.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        acc += std::norm(amps[i]);
        cdf[i] = acc;
    }
    if (!(acc > 0.0)) {
        throw DegenerateInputError("cannot sample from a zero state");
    }
    Rng rng(seed);
    std::map<std::uint64_t, std::uint64_t> counts;
    for (std::size_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) {
            // u rounded up to the total mass: take the last non-empty bin.
            it = std::prev(cdf.end());
            while (it != cdf.begin() && *it == *(it - 1)) {
                --it;
            }
        }
        ++counts[static_cast<std::uint64_t>(it - cdf.begin())];
    }
    return counts;
}

} // namespace qvgc
