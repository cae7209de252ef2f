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
 * Experiment orchestration for the three training regimes.
 *
 * classical   GNN + MLP head trained alone; test metrics from the head.
 * serial      GNN pretrained and frozen, VQC trained on its embeddings with
 *             a derivative-free optimiser.
 * end-to-end  Pretrained GNN and VQC trained jointly with Adam; gradients
 *             reach the GNN through the feature map.
 *
 * All randomness is derived from ExperimentConfig::seed, and every reduction
 * runs in a fixed order, so a config and a dataset determine the result bit
 * for bit.
 */
#pragma once

#include "qvgc/autodiff.hpp"
#include "qvgc/dataset.hpp"
#include "qvgc/encoders.hpp"
#include "qvgc/error.hpp"
#include "qvgc/gnn.hpp"
#include "qvgc/metrics.hpp"
#include "qvgc/numeric.hpp"
#include "qvgc/optim.hpp"
#include "qvgc/rng.hpp"
#include "qvgc/vqc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qvgc {

inline constexpr std::size_t kMaxZZQubits = 12;

enum class Regime { Classical, Serial, EndToEnd };
enum class EncodingKind { ZZ, Amplitude };
enum class OptimizerKind { Cobyla, Nft, Adam };
/// Quantity watched by serial early stopping.
enum class Monitor { Loss, F1 };

inline std::string_view regime_name(Regime r) {
    switch (r) {
    case Regime::Classical: return "classical";
    case Regime::Serial: return "serial";
    case Regime::EndToEnd: return "end-to-end";
    }
    return "?";
}
inline std::string_view encoding_name(EncodingKind e) {
    return e == EncodingKind::ZZ ? "zz" : "amplitude";
}
inline std::string_view optimizer_name(OptimizerKind o) {
    switch (o) {
    case OptimizerKind::Cobyla: return "cobyla";
    case OptimizerKind::Nft: return "nft";
    case OptimizerKind::Adam: return "adam";
    }
    return "?";
}
inline std::string_view monitor_name(Monitor m) { return m == Monitor::Loss ? "loss" : "f1"; }

inline Regime parse_regime(std::string_view s) {
    if (s == "classical") return Regime::Classical;
    if (s == "serial") return Regime::Serial;
    if (s == "end-to-end") return Regime::EndToEnd;
    throw UsageError("unknown regime '" + std::string(s) + "'");
}
inline EncodingKind parse_encoding(std::string_view s) {
    if (s == "zz") return EncodingKind::ZZ;
    if (s == "amplitude") return EncodingKind::Amplitude;
    throw UsageError("unknown encoding '" + std::string(s) + "'");
}
inline OptimizerKind parse_optimizer(std::string_view s) {
    if (s == "cobyla") return OptimizerKind::Cobyla;
    if (s == "nft") return OptimizerKind::Nft;
    if (s == "adam") return OptimizerKind::Adam;
    throw UsageError("unknown optimizer '" + std::string(s) + "'");
}
inline Monitor parse_monitor(std::string_view s) {
    if (s == "loss") return Monitor::Loss;
    if (s == "f1") return Monitor::F1;
    throw UsageError("unknown monitor '" + std::string(s) + "'");
}
inline Entanglement parse_entanglement(std::string_view s) {
    if (s == "full") return Entanglement::Full;
    if (s == "linear") return Entanglement::Linear;
    throw UsageError("unknown entanglement '" + std::string(s) + "'");
}

struct ExperimentConfig {
    Regime regime = Regime::Serial;
    /// GNN embedding width d.
    std::size_t dim = 10;
    EncodingKind encoding = EncodingKind::ZZ;
    std::size_t zz_reps = 2;
    Entanglement entanglement = Entanglement::Full;
    /// VQC optimiser for the serial stage. In end-to-end runs, cobyla/nft
    /// warm-start theta_Q with a serial stage first; adam starts it at random.
    OptimizerKind optimizer = OptimizerKind::Nft;
    std::size_t epochs = 100;
    std::size_t patience = 10;
    Monitor monitor = Monitor::Loss;
    /// Share of the training split used, in (0, 1].
    double fraction = 1.0;
    std::uint64_t seed = 0;
    /// Shots per test prediction; 0 uses the sign of the exact expectation.
    std::size_t shots = 1024;
    std::size_t ansatz_layers = 3;

    std::size_t gnn_hidden = 64;
    std::size_t gnn_layers = 3;
    std::size_t head_hidden = 32;
    std::size_t gnn_epochs = 100;
    std::size_t gnn_patience = 10;
    double gnn_lr = 5e-3;
    std::size_t batch_size = 16;

    double cobyla_rhobeg = 1.0;
    double cobyla_rhoend = 1e-4;
    /// Objective evaluations per COBYLA epoch; 0 selects 2 * n_params.
    std::size_t cobyla_evals_per_epoch = 0;

    /// Width of a linear bottleneck between GNN and VQC; 0 disables it.
    std::size_t bottleneck = 0;
    std::size_t bottleneck_epochs = 2;
    double bottleneck_lr = 1e-3;

    double lr_vqc = 1e-3;
    double lr_gnn = 1e-6;
    /// theta_Q is updated on epochs that are multiples of this.
    std::size_t vqc_update_every = 10;

    /// Threads for per-sample evaluation inside one run.
    std::size_t workers = 1;

    bool operator==(const ExperimentConfig &) const = default;

    /// Width of the vector handed to the feature map.
    [[nodiscard]] std::size_t vqc_features() const { return bottleneck > 0 ? bottleneck : dim; }

    [[nodiscard]] FeatureMapSpec feature_map() const {
        return encoding == EncodingKind::ZZ
                   ? FeatureMapSpec::zz(vqc_features(), zz_reps, entanglement)
                   : FeatureMapSpec::amplitude(vqc_features());
    }

    void validate() const {
        if (dim < 1) {
            throw UsageError("embedding dimension must be positive");
        }
        if (!(fraction > 0.0 && fraction <= 1.0)) {
            throw UsageError("data fraction must lie in (0, 1]");
        }
        if (gnn_hidden < 1 || gnn_layers < 1 || head_hidden < 1 || batch_size < 1) {
            throw UsageError("GNN sizes and batch size must be positive");
        }
        if (regime == Regime::Classical) {
            return;
        }
        if (bottleneck > dim) {
            throw UsageError("bottleneck wider than the embedding");
        }
        if (ansatz_layers < 1) {
            throw UsageError("ansatz needs at least one layer");
        }
        if (encoding == EncodingKind::ZZ) {
            if (zz_reps < 1) {
                throw UsageError("ZZ map needs at least one repetition");
            }
            if (vqc_features() > kMaxZZQubits) {
                throw UsageError("ZZ encoding of " + std::to_string(vqc_features()) +
                                 " features exceeds the " + std::to_string(kMaxZZQubits) +
                                 "-qubit cap; use amplitude encoding or a bottleneck");
            }
        } else {
            if (vqc_features() < 2) {
                throw UsageError("amplitude encoding needs at least 2 features");
            }
            if (amplitude_qubits(vqc_features()) > kMaxQubits) {
                throw CapacityError("amplitude encoding exceeds the simulator cap");
            }
        }
        if (regime == Regime::Serial && optimizer == OptimizerKind::Adam) {
            throw UsageError("serial regime trains the VQC with cobyla or nft");
        }
        if (regime == Regime::EndToEnd) {
            if (encoding != EncodingKind::ZZ) {
                throw UnsupportedError(
                    "end-to-end training needs feature gradients, which the amplitude map "
                    "does not provide");
            }
            if (bottleneck > 0) {
                throw UnsupportedError("end-to-end training does not support a bottleneck");
            }
            if (vqc_update_every < 1) {
                throw UsageError("vqc_update_every must be positive");
            }
        }
        if (optimizer == OptimizerKind::Cobyla && !(cobyla_rhobeg > cobyla_rhoend &&
                                                    cobyla_rhoend > 0.0)) {
            throw UsageError("COBYLA needs rhobeg > rhoend > 0");
        }
    }
};

/// Per-epoch trace entry. Epoch 0 is the state before training.
struct EpochRecord {
    std::size_t epoch = 0;
    double train_objective = 0.0;
    double val_loss = 0.0;
    double val_f1 = 0.0;
    double best_val_loss = 0.0;
    std::size_t fevals = 0;
    bool theta_q_updated = false;
};

/// Called with every trace record as soon as it exists.
using EpochObserver = std::function<void(const EpochRecord &)>;

struct RunResult {
    ExperimentConfig config;
    MetricsReport test;
    std::size_t n_qubits = 0;
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    std::size_t n_test = 0;
    double pretrain_val_f1 = 0.0;
    std::size_t pretrain_epochs = 0;
    std::vector<EpochRecord> trace;
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    std::vector<std::size_t> theta_q_update_epochs;
    std::vector<double> theta_q;
};

// ---------------------------------------------------------------------------
// Shared preparation
// ---------------------------------------------------------------------------

namespace seeds {
inline constexpr std::uint64_t kGnnInit = 1;
inline constexpr std::uint64_t kPretrain = 2;
inline constexpr std::uint64_t kTheta = 3;
inline constexpr std::uint64_t kBottleneck = 4;
inline constexpr std::uint64_t kFraction = 5;
inline constexpr std::uint64_t kJoint = 6;
inline constexpr std::uint64_t kShots = 7;
} // namespace seeds

/// Affine per-feature map x_k = (e_k - lo_k) * scale_k + shift.
struct FeatureScaler {
    std::vector<double> lo;
    std::vector<double> scale;
    double shift = 0.0;

    static FeatureScaler identity(std::size_t n) {
        return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), 0.0};
    }

    /// Min-max over `rows` onto [0, pi]; constant columns map to pi / 2.
    static FeatureScaler to_angle_range(std::span<const std::vector<double>> rows) {
        const std::size_t n = rows.front().size();
        std::vector<double> lo(n, std::numeric_limits<double>::infinity());
        std::vector<double> hi(n, -std::numeric_limits<double>::infinity());
        for (const auto &r : rows) {
            for (std::size_t k = 0; k < n; ++k) {
                lo[k] = std::min(lo[k], r[k]);
                hi[k] = std::max(hi[k], r[k]);
            }
        }
        FeatureScaler s{lo, std::vector<double>(n, 0.0), 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            const double span = hi[k] - lo[k];
            if (span > 1e-12) {
                s.scale[k] = std::numbers::pi / span;
            } else {
                s.lo[k] = lo[k] - 0.5;
                s.scale[k] = std::numbers::pi;
            }
        }
        return s;
    }

    [[nodiscard]] std::vector<double> operator()(std::span<const double> e) const {
        std::vector<double> x(e.size());
        for (std::size_t k = 0; k < e.size(); ++k) {
            x[k] = (e[k] - lo[k]) * scale[k] + shift;
        }
        return x;
    }
};

struct PreparedRun {
    GnnModel gnn;
    PretrainResult pretrain;
    std::vector<Graph> train;
    std::vector<Graph> val;
    std::vector<Graph> test;
};

inline PreparedRun prepare_run(const ExperimentConfig &cfg, const Dataset &ds) {
    cfg.validate();
    PreparedRun p;
    const auto train_idx = subsample(ds, ds.indices(Split::Train), cfg.fraction,
                                     derive_seed(cfg.seed, seeds::kFraction));
    for (std::size_t i : train_idx) {
        p.train.push_back(ds.graphs[i]);
    }
    p.val = ds.graphs_in(Split::Val);
    p.test = ds.graphs_in(Split::Test);
    if (p.train.empty() || p.val.empty() || p.test.empty()) {
        throw UsageError("dataset has an empty split");
    }
    const std::size_t f_in = p.train.front().f_in;
    p.gnn = make_gnn({f_in, cfg.gnn_hidden, cfg.gnn_layers, cfg.dim, cfg.head_hidden},
                     derive_seed(cfg.seed, seeds::kGnnInit));
    PretrainOptions opt;
    opt.epochs = cfg.gnn_epochs;
    opt.patience = cfg.gnn_patience;
    opt.lr = cfg.gnn_lr;
    opt.batch_size = cfg.batch_size;
    opt.seed = derive_seed(cfg.seed, seeds::kPretrain);
    p.pretrain = pretrain_classical(p.gnn, p.train, p.val, opt);
    return p;
}

inline std::vector<std::vector<double>> embed_all(const GnnModel &model,
                                                  std::span<const Graph> graphs,
                                                  std::size_t workers) {
    std::vector<std::vector<double>> out(graphs.size());
    parallel_for(graphs.size(), workers, [&](std::size_t i) { out[i] = embed(model, graphs[i]); });
    return out;
}

inline std::vector<int> parity_labels(std::span<const Graph> graphs) {
    std::vector<int> y(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        y[i] = parity_label(graphs[i].label);
    }
    return y;
}

inline std::vector<int> class_labels(std::span<const Graph> graphs) {
    std::vector<int> y(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        y[i] = graphs[i].label;
    }
    return y;
}

/// Exact expectations of `model` on pre-encoded states.
inline std::vector<double> expectations(const VqcModel &model, std::span<const Statevector> states,
                                        std::size_t workers) {
    std::vector<double> e(states.size());
    const Circuit bound = bind_params(model.ansatz, model.theta);
    parallel_for(states.size(), workers,
                 [&](std::size_t i) { e[i] = expectation(run(bound, states[i])); });
    return e;
}

inline double cross_entropy(std::span<const double> e, std::span<const int> y) {
    std::vector<double> terms(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        terms[i] = loss_from_expectation(e[i], y[i]);
    }
    return mean(terms);
}

inline double f1_from_expectations(std::span<const double> e, std::span<const int> y) {
    std::vector<int> pred(e.size());
    std::vector<int> truth(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        pred[i] = class_from_parity(label_from_expectation(e[i]));
        truth[i] = class_from_parity(y[i]);
    }
    return compute_weighted_metrics(pred, truth).f1;
}

/// Test metrics from shot-sampled majority votes (or exact signs if shots == 0).
inline MetricsReport test_metrics(const VqcModel &model,
                                  std::span<const std::vector<double>> features,
                                  std::span<const Graph> graphs, const ExperimentConfig &cfg) {
    std::vector<int> pred(features.size());
    parallel_for(features.size(), cfg.workers, [&](std::size_t i) {
        const int label =
            cfg.shots == 0
                ? forward(model, features[i]).label
                : predict_by_shots(model, features[i], cfg.shots,
                                   derive_seed(derive_seed(cfg.seed, seeds::kShots), i));
        pred[i] = class_from_parity(label);
    });
    return compute_weighted_metrics(pred, class_labels(graphs));
}

// ---------------------------------------------------------------------------
// Classical regime
// ---------------------------------------------------------------------------

inline RunResult run_classical(const ExperimentConfig &cfg, const Dataset &ds,
                               const EpochObserver &observer = {}) {
    if (cfg.regime != Regime::Classical) {
        throw UsageError("run_classical needs the classical regime");
    }
    auto p = prepare_run(cfg, ds);
    RunResult r;
    r.config = cfg;
    r.n_train = p.train.size();
    r.n_val = p.val.size();
    r.n_test = p.test.size();
    r.pretrain_val_f1 = p.pretrain.best_val_f1;
    r.pretrain_epochs = p.pretrain.epochs_run;
    r.epochs_run = p.pretrain.epochs_run;
    r.best_epoch = p.pretrain.best_epoch;
    for (const auto &h : p.pretrain.history) {
        EpochRecord e;
        e.epoch = h.epoch;
        e.train_objective = h.train_loss;
        e.val_f1 = h.val_f1;
        r.trace.push_back(e);
        if (observer) {
            observer(e);
        }
    }
    r.test = evaluate_classifier(p.gnn, p.test);
    return r;
}

// ---------------------------------------------------------------------------
// Serial regime
// ---------------------------------------------------------------------------

/// VQC inputs derived from frozen embeddings.
struct FeatureStage {
    std::optional<Mlp> bottleneck;
    FeatureScaler scaler;

    [[nodiscard]] std::vector<double> operator()(std::span<const double> embedding) const {
        if (bottleneck) {
            return scaler(bottleneck->first_layer(embedding));
        }
        return scaler(embedding);
    }
};

inline FeatureStage fit_feature_stage(const ExperimentConfig &cfg,
                                      std::span<const std::vector<double>> train_embeddings,
                                      std::span<const Graph> train) {
    FeatureStage st;
    std::vector<std::vector<double>> compressed(train_embeddings.begin(), train_embeddings.end());
    if (cfg.bottleneck > 0) {
        Mlp b = make_bottleneck(cfg.dim, cfg.bottleneck, cfg.head_hidden,
                                derive_seed(cfg.seed, seeds::kBottleneck));
        train_mlp_classifier(b, train_embeddings, class_labels(train), cfg.bottleneck_epochs,
                             cfg.bottleneck_lr, cfg.batch_size,
                             derive_seed(cfg.seed, seeds::kBottleneck + 100));
        for (auto &row : compressed) {
            row = b.first_layer(row);
        }
        st.bottleneck = std::move(b);
    }
    st.scaler = cfg.encoding == EncodingKind::ZZ ? FeatureScaler::to_angle_range(compressed)
                                                 : FeatureScaler::identity(cfg.vqc_features());
    return st;
}

struct VqcStageResult {
    VqcModel model;
    std::vector<EpochRecord> trace;
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
};

/**
 * Derivative-free VQC training on fixed features with early stopping.
 *
 * NFT minimises the mean of (1 - y E) / 2, which is sinusoidal in every
 * angle as NFT requires. COBYLA minimises the cross-entropy directly; one
 * COBYLA epoch is a fixed number of objective evaluations. Both stop after
 * `patience` epochs without improvement of the monitored validation quantity
 * and return the best parameters seen.
 */
inline VqcStageResult train_vqc_stage(const ExperimentConfig &cfg, VqcModel model,
                                      std::span<const Statevector> train_states,
                                      std::span<const int> train_y,
                                      std::span<const Statevector> val_states,
                                      std::span<const int> val_y,
                                      const EpochObserver &observer = {}) {
    VqcStageResult res;
    const std::size_t workers = cfg.workers;

    auto surrogate = [&](std::span<const double> e) {
        std::vector<double> t(e.size());
        for (std::size_t i = 0; i < e.size(); ++i) {
            t[i] = 0.5 * (1.0 - train_y[i] * e[i]);
        }
        return mean(t);
    };
    auto objective = [&](std::span<const double> theta) {
        const VqcModel probe{model.feature_map, model.ansatz, {theta.begin(), theta.end()}};
        const auto e = expectations(probe, train_states, workers);
        return cfg.optimizer == OptimizerKind::Nft ? surrogate(e) : cross_entropy(e, train_y);
    };

    double best_score = std::numeric_limits<double>::infinity();
    double best_val_loss = std::numeric_limits<double>::infinity();
    std::vector<double> best_theta = model.theta;
    std::size_t stale = 0;
    std::size_t fevals = 0;

    // Records an epoch; returns false when early stopping triggers.
    auto end_epoch = [&](std::size_t epoch, std::span<const double> theta, double train_obj) {
        const VqcModel probe{model.feature_map, model.ansatz, {theta.begin(), theta.end()}};
        const auto ev = expectations(probe, val_states, workers);
        const double vl = cross_entropy(ev, val_y);
        const double vf = f1_from_expectations(ev, val_y);
        const double score = cfg.monitor == Monitor::Loss ? vl : -vf;
        bool keep_going = true;
        if (score < best_score) {
            best_score = score;
            best_val_loss = vl;
            best_theta.assign(theta.begin(), theta.end());
            res.best_epoch = epoch;
            stale = 0;
        } else if (++stale >= cfg.patience) {
            keep_going = false;
        }
        res.trace.push_back({epoch, train_obj, vl, vf, best_val_loss, fevals, epoch > 0});
        res.epochs_run = epoch;
        if (observer) {
            observer(res.trace.back());
        }
        return keep_going;
    };

    end_epoch(0, model.theta, objective(model.theta));

    if (cfg.optimizer == OptimizerKind::Nft) {
        std::vector<double> theta = model.theta;
        for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
            const auto r = nft_minimize(objective, theta, {1, 32});
            theta = r.params;
            fevals += r.fevals;
            if (!end_epoch(epoch, theta, r.value)) {
                break;
            }
        }
    } else if (cfg.optimizer == OptimizerKind::Cobyla && cfg.epochs > 0) {
        const std::size_t per_epoch = cfg.cobyla_evals_per_epoch > 0
                                          ? cfg.cobyla_evals_per_epoch
                                          : 2 * model.theta.size();
        CobylaOptions opt{cfg.cobyla_rhobeg, cfg.cobyla_rhoend, per_epoch * cfg.epochs};
        std::size_t epoch = 0;
        std::vector<double> last;
        double last_value = 0.0;
        const auto r = cobyla_minimize(
            objective, model.theta, opt,
            [&](const TraceRecord &t, std::span<const double> best) {
                fevals = t.fevals;
                last.assign(best.begin(), best.end());
                last_value = t.best_value;
                if (t.fevals % per_epoch != 0) {
                    return true;
                }
                return end_epoch(++epoch, best, t.best_value);
            });
        // Close a trailing partial epoch when COBYLA converged mid-epoch.
        if (!r.stopped_by_callback && r.fevals % per_epoch != 0 && epoch < cfg.epochs) {
            fevals = r.fevals;
            end_epoch(++epoch, r.params, r.value);
        }
    }
    model.theta = std::move(best_theta);
    res.model = std::move(model);
    return res;
}

inline std::vector<Statevector> encode_all(const FeatureMapSpec &fm,
                                           std::span<const std::vector<double>> features,
                                           std::size_t workers) {
    std::vector<Statevector> out(features.size(), Statevector(fm.n_qubits()));
    parallel_for(features.size(), workers,
                 [&](std::size_t i) { out[i] = encode(fm, features[i]); });
    return out;
}

/// Everything the serial regime produces, kept for reuse by end-to-end runs.
struct SerialState {
    PreparedRun prepared;
    FeatureStage stage;
    VqcStageResult vqc;
    std::vector<std::vector<double>> test_features;
};

inline std::vector<std::vector<double>> apply_stage(const FeatureStage &st,
                                                    std::span<const std::vector<double>> emb) {
    std::vector<std::vector<double>> out;
    out.reserve(emb.size());
    for (const auto &e : emb) {
        out.push_back(st(e));
    }
    return out;
}

inline SerialState serial_stage(const ExperimentConfig &cfg, const Dataset &ds,
                                const EpochObserver &observer = {}) {
    SerialState s{prepare_run(cfg, ds), {}, {}, {}};
    const auto &p = s.prepared;
    const auto e_train = embed_all(p.gnn, p.train, cfg.workers);
    const auto e_val = embed_all(p.gnn, p.val, cfg.workers);
    const auto e_test = embed_all(p.gnn, p.test, cfg.workers);
    s.stage = fit_feature_stage(cfg, e_train, p.train);
    const auto x_train = apply_stage(s.stage, e_train);
    const auto x_val = apply_stage(s.stage, e_val);
    s.test_features = apply_stage(s.stage, e_test);

    const auto fm = cfg.feature_map();
    auto model = make_vqc(fm, cfg.ansatz_layers, derive_seed(cfg.seed, seeds::kTheta));
    if (cfg.optimizer == OptimizerKind::Adam) {
        s.vqc.model = std::move(model);
        return s;
    }
    const auto st_train = encode_all(fm, x_train, cfg.workers);
    const auto st_val = encode_all(fm, x_val, cfg.workers);
    s.vqc = train_vqc_stage(cfg, std::move(model), st_train, parity_labels(p.train), st_val,
                            parity_labels(p.val), observer);
    return s;
}

inline RunResult run_serial(const ExperimentConfig &cfg, const Dataset &ds,
                            const EpochObserver &observer = {}) {
    if (cfg.regime != Regime::Serial) {
        throw UsageError("run_serial needs the serial regime");
    }
    auto s = serial_stage(cfg, ds, observer);
    RunResult r;
    r.config = cfg;
    r.n_qubits = s.vqc.model.n_qubits();
    r.n_train = s.prepared.train.size();
    r.n_val = s.prepared.val.size();
    r.n_test = s.prepared.test.size();
    r.pretrain_val_f1 = s.prepared.pretrain.best_val_f1;
    r.pretrain_epochs = s.prepared.pretrain.epochs_run;
    r.trace = s.vqc.trace;
    r.epochs_run = s.vqc.epochs_run;
    r.best_epoch = s.vqc.best_epoch;
    for (const auto &e : r.trace) {
        if (e.theta_q_updated) {
            r.theta_q_update_epochs.push_back(e.epoch);
        }
    }
    r.theta_q = s.vqc.model.theta;
    r.test = test_metrics(s.vqc.model, s.test_features, s.prepared.test, cfg);
    return r;
}

// ---------------------------------------------------------------------------
// End-to-end regime
// ---------------------------------------------------------------------------

/**
 * Joint Adam training of theta_G and theta_Q on minibatches.
 *
 * theta_G steps every minibatch of every epoch with lr_gnn. theta_Q steps
 * only during epochs that are multiples of vqc_update_every, with lr_vqc.
 * The feature scaler is fitted once on the initial training embeddings and
 * then held fixed, so d(loss)/d(embedding) = d(loss)/d(feature) * scale.
 * Early stopping watches validation cross-entropy; epoch 0 is the starting
 * point, and the best parameters are restored at the end.
 */
inline RunResult run_end_to_end(const ExperimentConfig &cfg, const Dataset &ds,
                                const EpochObserver &observer = {}) {
    if (cfg.regime != Regime::EndToEnd) {
        throw UsageError("run_end_to_end needs the end-to-end regime");
    }
    cfg.validate();
    auto s = serial_stage(cfg, ds);
    GnnModel gnn = std::move(s.prepared.gnn);
    VqcModel vqc = std::move(s.vqc.model);
    const auto &train = s.prepared.train;
    const auto &val = s.prepared.val;
    const auto &test = s.prepared.test;
    const auto &scaler = s.stage.scaler;
    const auto y_train = parity_labels(train);
    const auto y_val = parity_labels(val);

    auto val_expectations = [&](const GnnModel &g, const VqcModel &q) {
        const auto emb = embed_all(g, val, cfg.workers);
        std::vector<double> e(emb.size());
        parallel_for(emb.size(), cfg.workers,
                     [&](std::size_t i) { e[i] = forward(q, scaler(emb[i])).expectation; });
        return e;
    };

    RunResult r;
    r.config = cfg;
    r.n_qubits = vqc.n_qubits();
    r.n_train = train.size();
    r.n_val = val.size();
    r.n_test = test.size();
    r.pretrain_val_f1 = s.prepared.pretrain.best_val_f1;
    r.pretrain_epochs = s.prepared.pretrain.epochs_run;

    double train_obj = 0.0;
    {
        const auto emb = embed_all(gnn, train, cfg.workers);
        std::vector<double> e(emb.size());
        parallel_for(emb.size(), cfg.workers,
                     [&](std::size_t i) { e[i] = forward(vqc, scaler(emb[i])).expectation; });
        train_obj = cross_entropy(e, y_train);
    }
    auto ev = val_expectations(gnn, vqc);
    double best_val = cross_entropy(ev, y_val);
    r.trace.push_back({0, train_obj, best_val, f1_from_expectations(ev, y_val), best_val, 0, false});
    if (observer) {
        observer(r.trace.back());
    }

    std::vector<double> best_g = gnn.params;
    std::vector<double> best_q = vqc.theta;
    AdamState adam_g(gnn.encoder_size(), {cfg.lr_gnn});
    AdamState adam_q(vqc.theta.size(), {cfg.lr_vqc});
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t stale = 0;

    const std::size_t n_enc = gnn.encoder_size();
    const std::size_t n_q = vqc.theta.size();
    const std::size_t batch = cfg.batch_size;
    std::vector<std::vector<double>> g_grad(batch, std::vector<double>(n_enc));
    std::vector<std::vector<double>> q_grad(batch);
    std::vector<double> losses(train.size());

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const bool update_q = epoch % cfg.vqc_update_every == 0;
        const std::vector<double> theta_before = vqc.theta;
        Rng rng(derive_seed(derive_seed(cfg.seed, seeds::kJoint), epoch));
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t stop = std::min(order.size(), start + batch);
            parallel_for(stop - start, cfg.workers, [&](std::size_t k) {
                const std::size_t idx = order[start + k];
                const Graph &g = train[idx];
                const auto cache = embed_forward(gnn, g);
                const auto x = scaler(cache.embedding);
                const auto rep = parameter_shift_report(vqc, x, y_train[idx], update_q, true);
                std::vector<double> d_emb(x.size());
                for (std::size_t j = 0; j < x.size(); ++j) {
                    d_emb[j] = rep.d_features[j] * scaler.scale[j];
                }
                std::fill(g_grad[k].begin(), g_grad[k].end(), 0.0);
                embed_backward(gnn, g, cache, d_emb, g_grad[k]);
                q_grad[k] = rep.d_theta_q;
                losses[start + k] = rep.loss;
            });
            const double inv = 1.0 / static_cast<double>(stop - start);
            std::vector<double> gg(n_enc, 0.0);
            for (std::size_t k = 0; k < stop - start; ++k) {
                for (std::size_t j = 0; j < n_enc; ++j) {
                    gg[j] += g_grad[k][j];
                }
            }
            for (auto &v : gg) {
                v *= inv;
            }
            require_finite(gg, "GNN gradient");
            adam_step(adam_g, gnn.params, gg);
            if (update_q) {
                std::vector<double> gq(n_q, 0.0);
                for (std::size_t k = 0; k < stop - start; ++k) {
                    for (std::size_t j = 0; j < n_q; ++j) {
                        gq[j] += q_grad[k][j];
                    }
                }
                for (auto &v : gq) {
                    v *= inv;
                }
                adam_step(adam_q, vqc.theta, gq);
            }
        }
        train_obj = mean(losses);
        require_finite(train_obj, "training loss");
        ev = val_expectations(gnn, vqc);
        const double vl = cross_entropy(ev, y_val);
        const bool changed = vqc.theta != theta_before;
        if (changed) {
            r.theta_q_update_epochs.push_back(epoch);
        }
        r.epochs_run = epoch;
        bool stop_now = false;
        if (vl < best_val) {
            best_val = vl;
            best_g = gnn.params;
            best_q = vqc.theta;
            r.best_epoch = epoch;
            stale = 0;
        } else if (++stale >= cfg.patience) {
            stop_now = true;
        }
        r.trace.push_back({epoch, train_obj, vl, f1_from_expectations(ev, y_val), best_val, 0,
                           changed});
        if (observer) {
            observer(r.trace.back());
        }
        if (stop_now) {
            break;
        }
    }
    gnn.params = std::move(best_g);
    vqc.theta = std::move(best_q);

    const auto e_test = embed_all(gnn, test, cfg.workers);
    std::vector<std::vector<double>> x_test;
    x_test.reserve(e_test.size());
    for (const auto &e : e_test) {
        x_test.push_back(scaler(e));
    }
    r.theta_q = vqc.theta;
    r.test = test_metrics(vqc, x_test, test, cfg);
    return r;
}

inline RunResult run_experiment(const ExperimentConfig &cfg, const Dataset &ds,
                                const EpochObserver &observer = {}) {
    switch (cfg.regime) {
    case Regime::Classical: return run_classical(cfg, ds, observer);
    case Regime::Serial: return run_serial(cfg, ds, observer);
    case Regime::EndToEnd: return run_end_to_end(cfg, ds, observer);
    }
    throw UsageError("unknown regime");
}

// ---------------------------------------------------------------------------
// Ablation grid
// ---------------------------------------------------------------------------

struct GridPoint {
    ExperimentConfig config;
    std::optional<RunResult> result;
    /// Non-empty when the point was invalid or failed.
    std::string error;
    bool numerical_failure = false;
};

/**
 * Runs dims x fractions x seeds (seeds varying fastest) on a bounded pool.
 * Invalid or failing points carry an error message instead of a result.
 */
inline std::vector<GridPoint> run_ablation_grid(const ExperimentConfig &base, const Dataset &ds,
                                                std::span<const std::size_t> dims,
                                                std::span<const double> fractions,
                                                std::span<const std::uint64_t> seed_list,
                                                std::size_t workers) {
    std::vector<GridPoint> points;
    for (std::size_t d : dims) {
        for (double f : fractions) {
            for (std::uint64_t s : seed_list) {
                auto &cfg = points.emplace_back().config;
                cfg = base;
                cfg.dim = d;
                cfg.fraction = f;
                cfg.seed = s;
            }
        }
    }
    parallel_for(points.size(), workers, [&](std::size_t i) {
        auto &gp = points[i];
        try {
            gp.config.validate();
            gp.result = run_experiment(gp.config, ds);
        } catch (const NumericalError &e) {
            gp.error = e.what();
            gp.numerical_failure = true;
        } catch (const Error &e) {
            gp.error = e.what();
        }
    });
    return points;
}

} // namespace qvgc
