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
 * Circuit intermediate representation.
 *
 * A circuit is an ordered gate list over a fixed register. Rotation angles
 * are either fixed reals or affine expressions `scale * p[slot] + offset` of
 * a parameter vector supplied at bind time. That is the only symbolic form;
 * anything nonlinear in the data (e.g. the pairwise ZZ phases) is evaluated
 * classically before the circuit is built.
 */
#pragma once

#include "qvgc/error.hpp"
#include "qvgc/statevec.hpp"

#include <array>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace qvgc {

class Angle {
  public:
    Angle() = default;

    static Angle fixed(double value) {
        Angle a;
        a.offset_ = value;
        return a;
    }

    static Angle param(std::size_t slot, double scale = 1.0, double offset = 0.0) {
        Angle a;
        a.slot_ = slot;
        a.scale_ = scale;
        a.offset_ = offset;
        return a;
    }

    [[nodiscard]] bool symbolic() const noexcept { return slot_.has_value(); }
    [[nodiscard]] std::optional<std::size_t> slot() const noexcept { return slot_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] double offset() const noexcept { return offset_; }

    /// Concrete value; throws if the angle still references a slot.
    [[nodiscard]] double value() const {
        if (slot_) {
            throw UsageError("angle references unbound parameter slot " +
                             std::to_string(*slot_));
        }
        return offset_;
    }

    [[nodiscard]] double evaluate(std::span<const double> params) const {
        return slot_ ? scale_ * params[*slot_] + offset_ : offset_;
    }

    [[nodiscard]] Angle shifted_slot(std::size_t by) const {
        Angle a = *this;
        if (a.slot_) {
            *a.slot_ += by;
        }
        return a;
    }

    bool operator==(const Angle &) const = default;

  private:
    std::optional<std::size_t> slot_;
    double scale_ = 1.0;
    double offset_ = 0.0;
};

struct Gate {
    GateKind kind = GateKind::H;
    /// For CNOT: {control, target}. Single-qubit gates use targets[0] only.
    std::array<std::size_t, 2> targets{0, 0};
    Angle angle;

    [[nodiscard]] std::size_t arity() const noexcept { return gate_arity(kind); }
    [[nodiscard]] std::span<const std::size_t> qubits() const noexcept {
        return std::span<const std::size_t>(targets.data(), arity());
    }

    bool operator==(const Gate &) const = default;
};

class Circuit {
  public:
    Circuit() = default;

    explicit Circuit(std::size_t n_qubits, std::size_t n_params = 0)
        : n_qubits_(n_qubits), n_params_(n_params) {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw CapacityError("circuit qubit count " + std::to_string(n_qubits) +
                                " outside [1, " + std::to_string(kMaxQubits) + "]");
        }
    }

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t n_params() const noexcept { return n_params_; }
    [[nodiscard]] std::span<const Gate> gates() const noexcept { return gates_; }
    [[nodiscard]] std::size_t size() const noexcept { return gates_.size(); }
    [[nodiscard]] bool empty() const noexcept { return gates_.empty(); }
    [[nodiscard]] const Gate &operator[](std::size_t i) const { return gates_[i]; }

    [[nodiscard]] bool concrete() const noexcept {
        for (const auto &g : gates_) {
            if (g.angle.symbolic()) {
                return false;
            }
        }
        return true;
    }

    /// Append a gate after validating arity, targets and slot range.
    Circuit &add(const Gate &gate) {
        for (std::size_t t : gate.qubits()) {
            if (t >= n_qubits_) {
                throw IndexError("gate target " + std::to_string(t) + " out of range for " +
                                 std::to_string(n_qubits_) + "-qubit circuit");
            }
        }
        if (gate.arity() == 2 && gate.targets[0] == gate.targets[1]) {
            throw IndexError("duplicate target qubit " + std::to_string(gate.targets[0]));
        }
        if (gate.angle.symbolic()) {
            if (!is_rotation(gate.kind)) {
                throw UsageError("only rotation gates may carry a symbolic angle");
            }
            if (*gate.angle.slot() >= n_params_) {
                throw IndexError("parameter slot " + std::to_string(*gate.angle.slot()) +
                                 " >= n_params " + std::to_string(n_params_));
            }
        }
        gates_.push_back(gate);
        return *this;
    }

    Circuit &h(std::size_t q) { return add({GateKind::H, {q, 0}, {}}); }
    Circuit &x(std::size_t q) { return add({GateKind::X, {q, 0}, {}}); }
    Circuit &y(std::size_t q) { return add({GateKind::Y, {q, 0}, {}}); }
    Circuit &z(std::size_t q) { return add({GateKind::Z, {q, 0}, {}}); }
    Circuit &s(std::size_t q) { return add({GateKind::S, {q, 0}, {}}); }
    Circuit &t(std::size_t q) { return add({GateKind::T, {q, 0}, {}}); }
    Circuit &cnot(std::size_t control, std::size_t target) {
        return add({GateKind::CNOT, {control, target}, {}});
    }
    Circuit &rx(std::size_t q, Angle a) { return add({GateKind::RX, {q, 0}, a}); }
    Circuit &ry(std::size_t q, Angle a) { return add({GateKind::RY, {q, 0}, a}); }
    Circuit &rz(std::size_t q, Angle a) { return add({GateKind::RZ, {q, 0}, a}); }
    Circuit &rzz(std::size_t a, std::size_t b, Angle angle) {
        return add({GateKind::RZZ, {a, b}, angle});
    }
    Circuit &rx(std::size_t q, double a) { return rx(q, Angle::fixed(a)); }
    Circuit &ry(std::size_t q, double a) { return ry(q, Angle::fixed(a)); }
    Circuit &rz(std::size_t q, double a) { return rz(q, Angle::fixed(a)); }
    Circuit &rzz(std::size_t a, std::size_t b, double angle) {
        return rzz(a, b, Angle::fixed(angle));
    }

    /// Replace the angle of gate i (used by shift-rule differentiation).
    void set_angle(std::size_t i, Angle a) { gates_.at(i).angle = a; }

    bool operator==(const Circuit &) const = default;

  private:
    std::size_t n_qubits_ = 1;
    std::size_t n_params_ = 0;
    std::vector<Gate> gates_;
};

/// Evaluate every symbolic angle against `values`; the result has n_params 0.
inline Circuit bind_params(const Circuit &circuit, std::span<const double> values) {
    if (values.size() != circuit.n_params()) {
        detail::fail_arity("bind parameter count", circuit.n_params(), values.size());
    }
    Circuit out(circuit.n_qubits());
    for (const auto &g : circuit.gates()) {
        Gate b = g;
        b.angle = Angle::fixed(g.angle.evaluate(values));
        out.add(b);
    }
    return out;
}

inline void apply_gate(Statevector &state, const Gate &g) {
    state.apply(g.kind, g.qubits(), is_rotation(g.kind) ? g.angle.value() : 0.0);
}

/// Apply gates[first, last) of a concrete circuit in place.
inline void run_range(const Circuit &circuit, Statevector &state, std::size_t first,
                      std::size_t last) {
    for (std::size_t i = first; i < last; ++i) {
        apply_gate(state, circuit[i]);
    }
}

inline Statevector run(const Circuit &circuit, Statevector initial) {
    if (initial.n_qubits() != circuit.n_qubits()) {
        throw ArityError("circuit has " + std::to_string(circuit.n_qubits()) +
                         " qubits, state has " + std::to_string(initial.n_qubits()));
    }
    run_range(circuit, initial, 0, circuit.size());
    return initial;
}

inline Statevector run(const Circuit &circuit) {
    return run(circuit, zero_state(circuit.n_qubits()));
}

/// Gates of `a` followed by gates of `b`; b's slots are renumbered after a's.
inline Circuit compose(const Circuit &a, const Circuit &b) {
    if (a.n_qubits() != b.n_qubits()) {
        throw ArityError("compose: qubit counts differ (" + std::to_string(a.n_qubits()) +
                         " vs " + std::to_string(b.n_qubits()) + ")");
    }
    Circuit out(a.n_qubits(), a.n_params() + b.n_params());
    for (const auto &g : a.gates()) {
        out.add(g);
    }
    for (const auto &g : b.gates()) {
        Gate s = g;
        s.angle = g.angle.shifted_slot(a.n_params());
        out.add(s);
    }
    return out;
}

/**
 * Text dump, one gate per line: `KIND targets angle`. Fixed angles print
 * with 17 significant digits; symbolic ones as `scale*p[slot]+offset`.
 */
inline std::string dump(const Circuit &circuit) {
    std::ostringstream os;
    os << "qubits " << circuit.n_qubits() << " params " << circuit.n_params() << '\n';
    char buf[64];
    for (const auto &g : circuit.gates()) {
        os << gate_name(g.kind);
        for (std::size_t t : g.qubits()) {
            os << ' ' << t;
        }
        if (is_rotation(g.kind)) {
            if (g.angle.symbolic()) {
                std::snprintf(buf, sizeof buf, " %.17g*p[%zu]%+.17g", g.angle.scale(),
                              *g.angle.slot(), g.angle.offset());
            } else {
                std::snprintf(buf, sizeof buf, " %.17g", g.angle.offset());
            }
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

} // namespace qvgc
