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
 * Versioned JSON checkpoints for VQC and GNN models.
 *
 * Both kinds share one container: {"format", "version", "kind", ...}.
 * Parameters are stored as JSON numbers, which round-trip doubles exactly.
 */
#pragma once

#include "qvgc/error.hpp"
#include "qvgc/gnn.hpp"
#include "qvgc/report.hpp"
#include "qvgc/vqc.hpp"

#include <filesystem>
#include <string>

namespace qvgc {

inline constexpr const char *kCheckpointFormat = "qvgc-checkpoint";
inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline json checkpoint_header(const char *kind) {
    return {{"format", kCheckpointFormat}, {"version", kCheckpointVersion}, {"kind", kind}};
}

inline void check_header(const json &j, const char *kind) {
    if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
        throw FormatError("not a qvgc checkpoint");
    }
    if (j.value("version", -1) != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version");
    }
    if (j.value("kind", "") != kind) {
        throw FormatError(std::string("checkpoint does not hold a ") + kind + " model");
    }
}

} // namespace detail

/// Only models whose ansatz is the standard layered one can be stored.
inline json vqc_to_json(const VqcModel &m) {
    m.validate();
    const std::size_t n = m.n_qubits();
    const std::size_t layers = n > 0 ? m.theta.size() / (2 * n) : 0;
    if (layers == 0 || !(build_ansatz({n, layers}) == m.ansatz)) {
        throw UnsupportedError("only the layered RY/RZ + CNOT ring ansatz can be checkpointed");
    }
    const auto &fm = m.feature_map;
    json j = detail::checkpoint_header("vqc");
    j["feature_map"] = {{"kind", feature_map_name(fm.kind)},
                        {"n_features", fm.n_features},
                        {"repetitions", fm.repetitions},
                        {"entanglement", entanglement_name(fm.entanglement)},
                        {"bare_qubits", fm.bare_qubits}};
    j["ansatz"] = {{"n_qubits", n}, {"layers", layers}};
    j["theta"] = m.theta;
    return j;
}

inline VqcModel vqc_from_json(const json &j) {
    detail::check_header(j, "vqc");
    try {
        const auto &f = j.at("feature_map");
        const auto kind = f.at("kind").get<std::string>();
        FeatureMapSpec fm;
        if (kind == "zz") {
            fm = FeatureMapSpec::zz(f.at("n_features").get<std::size_t>(),
                                    f.at("repetitions").get<std::size_t>(),
                                    parse_entanglement(f.at("entanglement").get<std::string>()));
        } else if (kind == "amplitude") {
            fm = FeatureMapSpec::amplitude(f.at("n_features").get<std::size_t>());
        } else if (kind == "none") {
            fm = FeatureMapSpec::none(f.at("bare_qubits").get<std::size_t>());
        } else {
            throw FormatError("unknown feature map '" + kind + "'");
        }
        const AnsatzSpec spec{j.at("ansatz").at("n_qubits").get<std::size_t>(),
                              j.at("ansatz").at("layers").get<std::size_t>()};
        VqcModel m{fm, build_ansatz(spec), j.at("theta").get<std::vector<double>>()};
        m.validate();
        return m;
    } catch (const json::exception &e) {
        throw FormatError(std::string("malformed VQC checkpoint: ") + e.what());
    }
}

inline json gnn_to_json(const GnnModel &m) {
    json j = detail::checkpoint_header("gnn");
    const auto &c = m.config;
    j["config"] = {{"f_in", c.f_in},
                   {"hidden", c.hidden},
                   {"n_layers", c.n_layers},
                   {"embed_dim", c.embed_dim},
                   {"head_hidden", c.head_hidden}};
    j["encoder"] = m.params;
    j["head"] = m.head.params;
    return j;
}

inline GnnModel gnn_from_json(const json &j) {
    detail::check_header(j, "gnn");
    try {
        const auto &c = j.at("config");
        GnnConfig cfg{c.at("f_in").get<std::size_t>(), c.at("hidden").get<std::size_t>(),
                      c.at("n_layers").get<std::size_t>(), c.at("embed_dim").get<std::size_t>(),
                      c.at("head_hidden").get<std::size_t>()};
        GnnModel m = make_gnn(cfg, 0);
        auto enc = j.at("encoder").get<std::vector<double>>();
        auto head = j.at("head").get<std::vector<double>>();
        if (enc.size() != m.params.size() || head.size() != m.head.params.size()) {
            throw FormatError("GNN checkpoint parameter count does not match its config");
        }
        m.params = std::move(enc);
        m.head.params = std::move(head);
        return m;
    } catch (const json::exception &e) {
        throw FormatError(std::string("malformed GNN checkpoint: ") + e.what());
    }
}

inline void save_checkpoint(const std::filesystem::path &path, const json &j) {
    write_json_atomic(path, j);
}

inline json load_checkpoint(const std::filesystem::path &path) { return read_json(path); }

} // namespace qvgc
