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
 * Run artifacts: config and metrics as JSON, convergence traces and result
 * rows as CSV, and the run manifest.
 *
 * Doubles are written with enough digits to round-trip exactly, and no
 * artifact except the manifest carries a timestamp, so re-running a config
 * reproduces metrics.json byte for byte.
 */
#pragma once

#include "qvgc/dataset.hpp"
#include "qvgc/error.hpp"
#include "qvgc/pipeline.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace qvgc {

using json = nlohmann::ordered_json;

inline constexpr const char *kToolVersion = "0.1.0";

inline json config_to_json(const ExperimentConfig &c) {
    return {
        {"regime", regime_name(c.regime)},
        {"dim", c.dim},
        {"encoding", encoding_name(c.encoding)},
        {"zz_reps", c.zz_reps},
        {"entanglement", entanglement_name(c.entanglement)},
        {"optimizer", optimizer_name(c.optimizer)},
        {"epochs", c.epochs},
        {"patience", c.patience},
        {"monitor", monitor_name(c.monitor)},
        {"fraction", c.fraction},
        {"seed", c.seed},
        {"shots", c.shots},
        {"ansatz_layers", c.ansatz_layers},
        {"gnn_hidden", c.gnn_hidden},
        {"gnn_layers", c.gnn_layers},
        {"head_hidden", c.head_hidden},
        {"gnn_epochs", c.gnn_epochs},
        {"gnn_patience", c.gnn_patience},
        {"gnn_lr", c.gnn_lr},
        {"batch_size", c.batch_size},
        {"cobyla_rhobeg", c.cobyla_rhobeg},
        {"cobyla_rhoend", c.cobyla_rhoend},
        {"cobyla_evals_per_epoch", c.cobyla_evals_per_epoch},
        {"bottleneck", c.bottleneck},
        {"bottleneck_epochs", c.bottleneck_epochs},
        {"bottleneck_lr", c.bottleneck_lr},
        {"lr_vqc", c.lr_vqc},
        {"lr_gnn", c.lr_gnn},
        {"vqc_update_every", c.vqc_update_every},
    };
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline ExperimentConfig config_from_json(const json &j) {
    if (!j.is_object()) {
        throw FormatError("config must be a JSON object");
    }
    ExperimentConfig c;
    const json known = config_to_json(c);
    for (const auto &[key, value] : j.items()) {
        if (!known.contains(key)) {
            throw FormatError("unknown config key '" + key + "'");
        }
    }
    try {
        auto get = [&](const char *key, auto &field) {
            if (j.contains(key)) {
                j.at(key).get_to(field);
            }
        };
        auto get_enum = [&](const char *key, auto &field, auto parse) {
            if (j.contains(key)) {
                field = parse(j.at(key).get<std::string>());
            }
        };
        get_enum("regime", c.regime, parse_regime);
        get("dim", c.dim);
        get_enum("encoding", c.encoding, parse_encoding);
        get("zz_reps", c.zz_reps);
        get_enum("entanglement", c.entanglement, parse_entanglement);
        get_enum("optimizer", c.optimizer, parse_optimizer);
        get("epochs", c.epochs);
        get("patience", c.patience);
        get_enum("monitor", c.monitor, parse_monitor);
        get("fraction", c.fraction);
        get("seed", c.seed);
        get("shots", c.shots);
        get("ansatz_layers", c.ansatz_layers);
        get("gnn_hidden", c.gnn_hidden);
        get("gnn_layers", c.gnn_layers);
        get("head_hidden", c.head_hidden);
        get("gnn_epochs", c.gnn_epochs);
        get("gnn_patience", c.gnn_patience);
        get("gnn_lr", c.gnn_lr);
        get("batch_size", c.batch_size);
        get("cobyla_rhobeg", c.cobyla_rhobeg);
        get("cobyla_rhoend", c.cobyla_rhoend);
        get("cobyla_evals_per_epoch", c.cobyla_evals_per_epoch);
        get("bottleneck", c.bottleneck);
        get("bottleneck_epochs", c.bottleneck_epochs);
        get("bottleneck_lr", c.bottleneck_lr);
        get("lr_vqc", c.lr_vqc);
        get("lr_gnn", c.lr_gnn);
        get("vqc_update_every", c.vqc_update_every);
    } catch (const json::exception &e) {
        throw FormatError(std::string("bad config value: ") + e.what());
    }
    return c;
}

inline json generator_to_json(const GeneratorParams &p) {
    return {{"seed", p.seed},           {"n_graphs", p.n_graphs},   {"separation", p.separation},
            {"task_id", p.task_id},     {"min_nodes", p.min_nodes}, {"max_nodes", p.max_nodes},
            {"radius", p.radius},       {"train_frac", p.train_frac}, {"val_frac", p.val_frac}};
}

inline json metrics_to_json(const MetricsReport &m) {
    json per_class = json::array();
    for (const auto &c : m.per_class) {
        per_class.push_back({{"precision", c.precision},
                             {"recall", c.recall},
                             {"f1", c.f1},
                             {"support", c.support}});
    }
    return {{"w_precision", m.precision},
            {"w_recall", m.recall},
            {"w_f1", m.f1},
            {"confusion", m.confusion},
            {"per_class", per_class}};
}

inline json trace_to_json(const std::vector<EpochRecord> &trace) {
    json out = json::array();
    for (const auto &e : trace) {
        out.push_back({{"epoch", e.epoch},
                       {"train_objective", e.train_objective},
                       {"val_loss", e.val_loss},
                       {"val_f1", e.val_f1},
                       {"best_val_loss", e.best_val_loss},
                       {"fevals", e.fevals},
                       {"theta_q_updated", e.theta_q_updated}});
    }
    return out;
}

/// Everything needed to audit a run; contains no timestamps.
inline json result_to_json(const RunResult &r, const GeneratorParams &data) {
    return {{"tool_version", kToolVersion},
            {"config", config_to_json(r.config)},
            {"dataset", generator_to_json(data)},
            {"n_qubits", r.n_qubits},
            {"splits", {{"train", r.n_train}, {"val", r.n_val}, {"test", r.n_test}}},
            {"pretrain", {{"val_f1", r.pretrain_val_f1}, {"epochs", r.pretrain_epochs}}},
            {"test", metrics_to_json(r.test)},
            {"epochs_run", r.epochs_run},
            {"best_epoch", r.best_epoch},
            {"theta_q_update_epochs", r.theta_q_update_epochs},
            {"theta_q", r.theta_q},
            {"trace", trace_to_json(r.trace)}};
}

/// Round-trip formatting for CSV cells.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline constexpr const char *kConvergenceHeader =
    "epoch,train_objective,val_loss,val_f1,best_val_loss,fevals,theta_q_updated";

inline std::string convergence_row(const EpochRecord &e) {
    return std::to_string(e.epoch) + ',' + format_double(e.train_objective) + ',' +
           format_double(e.val_loss) + ',' + format_double(e.val_f1) + ',' +
           format_double(e.best_val_loss) + ',' + std::to_string(e.fevals) + ',' +
           (e.theta_q_updated ? "1" : "0");
}

inline std::string convergence_csv(const std::vector<EpochRecord> &trace) {
    std::string out = std::string(kConvergenceHeader) + '\n';
    for (const auto &e : trace) {
        out += convergence_row(e) + '\n';
    }
    return out;
}

/// Column order of results CSVs. Stable across versions; new columns append.
inline constexpr const char *kResultsHeader =
    "regime,dim,encoding,zz_reps,optimizer,epochs,fraction,seed,shots,bottleneck,n_qubits,"
    "w_precision,w_recall,w_f1,epochs_run,best_epoch,status,error";

inline std::string csv_escape(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    return out + '"';
}

inline std::string results_row(const ExperimentConfig &c, const RunResult *r,
                               const std::string &error) {
    std::ostringstream o;
    o << regime_name(c.regime) << ',' << c.dim << ',' << encoding_name(c.encoding) << ','
      << c.zz_reps << ',' << optimizer_name(c.optimizer) << ',' << c.epochs << ','
      << format_double(c.fraction) << ',' << c.seed << ',' << c.shots << ',' << c.bottleneck
      << ',';
    if (r != nullptr) {
        o << r->n_qubits << ',' << format_double(r->test.precision) << ','
          << format_double(r->test.recall) << ',' << format_double(r->test.f1) << ','
          << r->epochs_run << ',' << r->best_epoch << ",ok,";
    } else {
        o << ",,,,,," << (error.empty() ? "skipped" : "failed") << ',' << csv_escape(error);
    }
    return o.str();
}

inline std::string grid_csv(const std::vector<GridPoint> &points) {
    std::string out = std::string(kResultsHeader) + '\n';
    for (const auto &p : points) {
        out += results_row(p.config, p.result ? &*p.result : nullptr, p.error) + '\n';
    }
    return out;
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_text_atomic(const std::filesystem::path &path, const std::string &text) {
    detail::write_file_atomic(path, std::span<const char>(text.data(), text.size()));
}

inline void write_json_atomic(const std::filesystem::path &path, const json &j) {
    write_text_atomic(path, j.dump(2) + '\n');
}

inline json read_json(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace qvgc
