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
 * Message-passing graph encoder with a small MLP classification head.
 *
 * Each layer computes
 *
 *     h'_v = ReLU(W_self h_v + W_nbr mean_{u in N(v)} h_u + b),
 *
 * with the mean over an empty neighbourhood taken as zero. The graph
 * embedding is the node mean of the last layer followed by a linear map to
 * `embed_dim`. Gradients are hand-derived reverse mode over a forward cache.
 */
#pragma once

#include "qvgc/error.hpp"
#include "qvgc/metrics.hpp"
#include "qvgc/numeric.hpp"
#include "qvgc/optim.hpp"
#include "qvgc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qvgc {

struct Graph {
    std::size_t n_nodes = 0;
    std::size_t f_in = 0;
    /// n_nodes x f_in, row-major.
    std::vector<double> features;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    int label = 0;

    [[nodiscard]] std::span<const double> row(std::size_t v) const {
        return std::span<const double>(features).subspan(v * f_in, f_in);
    }

    void validate() const {
        if (n_nodes < 1) {
            throw UsageError("graph has no nodes");
        }
        if (features.size() != n_nodes * f_in) {
            detail::fail_arity("graph feature matrix size", n_nodes * f_in, features.size());
        }
        if (label != 0 && label != 1) {
            throw UsageError("graph label must be 0 or 1");
        }
        std::vector<std::pair<std::uint32_t, std::uint32_t>> seen;
        seen.reserve(edges.size());
        for (auto [a, b] : edges) {
            if (a >= n_nodes || b >= n_nodes) {
                throw IndexError("edge endpoint out of range");
            }
            if (a == b) {
                throw UsageError("self-loop on node " + std::to_string(a));
            }
            seen.emplace_back(std::min(a, b), std::max(a, b));
        }
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
            throw UsageError("duplicate edge");
        }
    }
};

/// Compressed adjacency: neighbours of v are nbr[start[v] .. start[v+1]).
struct Adjacency {
    std::vector<std::size_t> start;
    std::vector<std::uint32_t> nbr;

    explicit Adjacency(const Graph &g) : start(g.n_nodes + 1, 0) {
        for (auto [a, b] : g.edges) {
            ++start[a + 1];
            ++start[b + 1];
        }
        std::partial_sum(start.begin(), start.end(), start.begin());
        nbr.resize(start.back());
        std::vector<std::size_t> fill(start.begin(), start.end() - 1);
        for (auto [a, b] : g.edges) {
            nbr[fill[a]++] = b;
            nbr[fill[b]++] = a;
        }
    }

    [[nodiscard]] std::size_t degree(std::size_t v) const { return start[v + 1] - start[v]; }
};

namespace detail {

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
inline void init_uniform(std::span<double> w, std::size_t fan_in, Rng &rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto &x : w) {
        x = rng.uniform(-bound, bound);
    }
}

/// out[o] += sum_i w[o * in + i] x[i]
inline void gemv_add(std::span<const double> w, std::span<const double> x,
                     std::span<double> out) {
    const std::size_t in = x.size();
    for (std::size_t o = 0; o < out.size(); ++o) {
        const double *row = w.data() + o * in;
        double s = 0.0;
        for (std::size_t i = 0; i < in; ++i) {
            s += row[i] * x[i];
        }
        out[o] += s;
    }
}

/// dx[i] += sum_o w[o * in + i] dy[o];  dw[o * in + i] += dy[o] x[i]
inline void gemv_backward(std::span<const double> w, std::span<const double> x,
                          std::span<const double> dy, std::span<double> dw,
                          std::span<double> dx) {
    const std::size_t in = x.size();
    for (std::size_t o = 0; o < dy.size(); ++o) {
        const double g = dy[o];
        if (g == 0.0) {
            continue;
        }
        const double *row = w.data() + o * in;
        double *drow = dw.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) {
            drow[i] += g * x[i];
        }
        if (!dx.empty()) {
            for (std::size_t i = 0; i < in; ++i) {
                dx[i] += g * row[i];
            }
        }
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Dense multilayer perceptron
// ---------------------------------------------------------------------------

/// Fully connected stack. Layer k maps sizes[k] -> sizes[k+1]; a ReLU follows
/// layer k when relu[k] is set. The last layer is always linear.
struct Mlp {
    std::vector<std::size_t> sizes;
    std::vector<bool> relu;
    std::vector<double> params;

    Mlp() = default;
    Mlp(std::vector<std::size_t> layer_sizes, std::vector<bool> relu_after, std::uint64_t seed)
        : sizes(std::move(layer_sizes)), relu(std::move(relu_after)) {
        if (sizes.size() < 2) {
            throw UsageError("MLP needs at least one layer");
        }
        relu.resize(sizes.size() - 1, false);
        relu.back() = false;
        params.assign(weight_offset(n_layers()), 0.0);
        Rng rng(seed);
        for (std::size_t k = 0; k < n_layers(); ++k) {
            detail::init_uniform(weights(k), sizes[k], rng);
        }
    }

    [[nodiscard]] std::size_t n_layers() const { return sizes.size() - 1; }
    [[nodiscard]] std::size_t n_params() const { return params.size(); }

    /// Offset of layer k's weights; its bias follows the weights.
    [[nodiscard]] std::size_t weight_offset(std::size_t k) const {
        std::size_t off = 0;
        for (std::size_t j = 0; j < k; ++j) {
            off += sizes[j + 1] * (sizes[j] + 1);
        }
        return off;
    }
    [[nodiscard]] std::size_t bias_offset(std::size_t k) const {
        return weight_offset(k) + sizes[k + 1] * sizes[k];
    }

    std::span<double> weights(std::size_t k) {
        return std::span<double>(params).subspan(weight_offset(k), sizes[k + 1] * sizes[k]);
    }

    struct Cache {
        /// acts[0] is the input; acts[k+1] is the output of layer k.
        std::vector<std::vector<double>> acts;
    };

    Cache forward(std::span<const double> x) const {
        if (x.size() != sizes.front()) {
            detail::fail_arity("MLP input width", sizes.front(), x.size());
        }
        Cache c;
        c.acts.reserve(sizes.size());
        c.acts.emplace_back(x.begin(), x.end());
        const std::span<const double> p(params);
        for (std::size_t k = 0; k < n_layers(); ++k) {
            auto b = p.subspan(bias_offset(k), sizes[k + 1]);
            std::vector<double> y(b.begin(), b.end());
            detail::gemv_add(p.subspan(weight_offset(k), sizes[k + 1] * sizes[k]), c.acts[k], y);
            if (relu[k]) {
                for (auto &v : y) {
                    v = std::max(v, 0.0);
                }
            }
            c.acts.push_back(std::move(y));
        }
        return c;
    }

    [[nodiscard]] std::vector<double> operator()(std::span<const double> x) const {
        return forward(x).acts.back();
    }

    /// Output of the first layer only.
    [[nodiscard]] std::vector<double> first_layer(std::span<const double> x) const {
        return forward(x).acts[1];
    }

    /// Accumulates parameter gradients into `grad`; returns d/d(input).
    std::vector<double> backward(const Cache &c, std::span<const double> d_out,
                                 std::span<double> grad) const {
        std::vector<double> dy(d_out.begin(), d_out.end());
        const std::span<const double> p(params);
        for (std::size_t k = n_layers(); k-- > 0;) {
            if (relu[k]) {
                for (std::size_t o = 0; o < dy.size(); ++o) {
                    if (c.acts[k + 1][o] <= 0.0) {
                        dy[o] = 0.0;
                    }
                }
            }
            auto db = grad.subspan(bias_offset(k), sizes[k + 1]);
            for (std::size_t o = 0; o < dy.size(); ++o) {
                db[o] += dy[o];
            }
            std::vector<double> dx(sizes[k], 0.0);
            detail::gemv_backward(p.subspan(weight_offset(k), sizes[k + 1] * sizes[k]),
                                  c.acts[k], dy,
                                  grad.subspan(weight_offset(k), sizes[k + 1] * sizes[k]), dx);
            dy = std::move(dx);
        }
        return dy;
    }
};

/// Softmax cross-entropy of `logits` against class `y`; writes d/d(logits).
inline double softmax_cross_entropy(std::span<const double> logits, int y,
                                    std::span<double> d_logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) {
        z += std::exp(l - mx);
    }
    const double lse = mx + std::log(z);
    for (std::size_t k = 0; k < logits.size(); ++k) {
        d_logits[k] = std::exp(logits[k] - lse) - (static_cast<int>(k) == y ? 1.0 : 0.0);
    }
    return lse - logits[static_cast<std::size_t>(y)];
}

/// Index of the largest logit; ties go to the lower class.
inline int argmax_class(std::span<const double> logits) {
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

// ---------------------------------------------------------------------------
// Graph encoder
// ---------------------------------------------------------------------------

struct GnnConfig {
    std::size_t f_in = 8;
    std::size_t hidden = 64;
    std::size_t n_layers = 3;
    std::size_t embed_dim = 10;
    std::size_t head_hidden = 32;

    bool operator==(const GnnConfig &) const = default;
};

/// Encoder parameters theta_G in one flat vector plus an MLP head.
struct GnnModel {
    GnnConfig config;
    std::vector<double> params;
    Mlp head;

    [[nodiscard]] std::size_t layer_in(std::size_t l) const {
        return l == 0 ? config.f_in : config.hidden;
    }
    /// Layer l block: W_self (hidden x in), W_nbr (hidden x in), b (hidden).
    [[nodiscard]] std::size_t layer_offset(std::size_t l) const {
        std::size_t off = 0;
        for (std::size_t j = 0; j < l; ++j) {
            off += config.hidden * (2 * layer_in(j) + 1);
        }
        return off;
    }
    /// Readout block: P (embed_dim x hidden), p (embed_dim).
    [[nodiscard]] std::size_t readout_offset() const { return layer_offset(config.n_layers); }
    [[nodiscard]] std::size_t encoder_size() const {
        return readout_offset() + config.embed_dim * (config.hidden + 1);
    }
};

inline GnnModel make_gnn(const GnnConfig &cfg, std::uint64_t seed) {
    if (cfg.f_in < 1 || cfg.hidden < 1 || cfg.n_layers < 1 || cfg.embed_dim < 1 ||
        cfg.head_hidden < 1) {
        throw UsageError("GNN sizes must be positive");
    }
    GnnModel m;
    m.config = cfg;
    m.params.assign(m.encoder_size(), 0.0);
    Rng rng(derive_seed(seed, 0x474E4E));
    const std::span<double> p(m.params);
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        const std::size_t in = m.layer_in(l);
        const std::size_t off = m.layer_offset(l);
        detail::init_uniform(p.subspan(off, cfg.hidden * in), in, rng);
        detail::init_uniform(p.subspan(off + cfg.hidden * in, cfg.hidden * in), in, rng);
    }
    detail::init_uniform(p.subspan(m.readout_offset(), cfg.embed_dim * cfg.hidden), cfg.hidden,
                         rng);
    m.head = Mlp({cfg.embed_dim, cfg.head_hidden, 2}, {true}, derive_seed(seed, 0x48454144));
    return m;
}

struct EmbedCache {
    std::size_t n_nodes = 0;
    /// inputs[l]: node states entering layer l (n x in_l); inputs[L] is the output.
    std::vector<std::vector<double>> inputs;
    /// means[l]: neighbour means at layer l (n x in_l).
    std::vector<std::vector<double>> means;
    std::vector<double> readout;
    std::vector<double> embedding;
};

inline EmbedCache embed_forward(const GnnModel &model, const Graph &g) {
    const auto &cfg = model.config;
    if (g.f_in != cfg.f_in) {
        detail::fail_arity("node feature width", cfg.f_in, g.f_in);
    }
    if (g.n_nodes < 1 || g.features.size() != g.n_nodes * g.f_in) {
        throw UsageError("malformed graph");
    }
    const Adjacency adj(g);
    const std::size_t n = g.n_nodes;
    const std::size_t hdim = cfg.hidden;
    const std::span<const double> p(model.params);
    EmbedCache c;
    c.n_nodes = n;
    c.inputs.push_back(g.features);
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        const std::size_t in = model.layer_in(l);
        const auto &h = c.inputs[l];
        std::vector<double> agg(n * in, 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            const std::size_t deg = adj.degree(v);
            if (deg == 0) {
                continue;
            }
            double *dst = agg.data() + v * in;
            for (std::size_t e = adj.start[v]; e < adj.start[v + 1]; ++e) {
                const double *src = h.data() + adj.nbr[e] * in;
                for (std::size_t i = 0; i < in; ++i) {
                    dst[i] += src[i];
                }
            }
            const double inv = 1.0 / static_cast<double>(deg);
            for (std::size_t i = 0; i < in; ++i) {
                dst[i] *= inv;
            }
        }
        const std::size_t off = model.layer_offset(l);
        const auto ws = p.subspan(off, hdim * in);
        const auto wn = p.subspan(off + hdim * in, hdim * in);
        const auto b = p.subspan(off + 2 * hdim * in, hdim);
        std::vector<double> out(n * hdim);
        for (std::size_t v = 0; v < n; ++v) {
            std::span<double> z(out.data() + v * hdim, hdim);
            std::copy(b.begin(), b.end(), z.begin());
            detail::gemv_add(ws, std::span<const double>(h).subspan(v * in, in), z);
            detail::gemv_add(wn, std::span<const double>(agg).subspan(v * in, in), z);
            for (auto &x : z) {
                x = std::max(x, 0.0);
            }
        }
        c.means.push_back(std::move(agg));
        c.inputs.push_back(std::move(out));
    }
    c.readout.assign(hdim, 0.0);
    const auto &last = c.inputs.back();
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t i = 0; i < hdim; ++i) {
            c.readout[i] += last[v * hdim + i];
        }
    }
    for (auto &x : c.readout) {
        x /= static_cast<double>(n);
    }
    const std::size_t ro = model.readout_offset();
    const auto pb = p.subspan(ro + cfg.embed_dim * hdim, cfg.embed_dim);
    c.embedding.assign(pb.begin(), pb.end());
    detail::gemv_add(p.subspan(ro, cfg.embed_dim * hdim), c.readout, c.embedding);
    return c;
}

inline std::vector<double> embed(const GnnModel &model, const Graph &g) {
    return embed_forward(model, g).embedding;
}

/// Adds d(loss)/d(theta_G) into `grad` (encoder_size entries) given
/// d(loss)/d(embedding).
inline void embed_backward(const GnnModel &model, const Graph &g, const EmbedCache &c,
                           std::span<const double> d_embedding, std::span<double> grad) {
    const auto &cfg = model.config;
    if (d_embedding.size() != cfg.embed_dim) {
        detail::fail_arity("embedding gradient length", cfg.embed_dim, d_embedding.size());
    }
    if (grad.size() != model.encoder_size()) {
        detail::fail_arity("encoder gradient length", model.encoder_size(), grad.size());
    }
    const std::size_t n = c.n_nodes;
    const std::size_t hdim = cfg.hidden;
    const std::span<const double> p(model.params);
    const std::size_t ro = model.readout_offset();

    auto dpb = grad.subspan(ro + cfg.embed_dim * hdim, cfg.embed_dim);
    for (std::size_t k = 0; k < cfg.embed_dim; ++k) {
        dpb[k] += d_embedding[k];
    }
    std::vector<double> d_readout(hdim, 0.0);
    detail::gemv_backward(p.subspan(ro, cfg.embed_dim * hdim), c.readout, d_embedding,
                          grad.subspan(ro, cfg.embed_dim * hdim), d_readout);

    // Node mean: every node of the last layer receives d_readout / n.
    std::vector<double> dh(n * hdim);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t i = 0; i < hdim; ++i) {
            dh[v * hdim + i] = d_readout[i] / static_cast<double>(n);
        }
    }

    const Adjacency adj(g);
    for (std::size_t l = cfg.n_layers; l-- > 0;) {
        const std::size_t in = model.layer_in(l);
        const std::size_t off = model.layer_offset(l);
        const auto ws = p.subspan(off, hdim * in);
        const auto wn = p.subspan(off + hdim * in, hdim * in);
        auto dws = grad.subspan(off, hdim * in);
        auto dwn = grad.subspan(off + hdim * in, hdim * in);
        auto db = grad.subspan(off + 2 * hdim * in, hdim);
        const auto &out = c.inputs[l + 1];
        const auto &h = c.inputs[l];
        const auto &agg = c.means[l];

        std::vector<double> dh_in(n * in, 0.0);
        std::vector<double> dagg(in);
        std::vector<double> dz(hdim);
        for (std::size_t v = 0; v < n; ++v) {
            bool any = false;
            for (std::size_t o = 0; o < hdim; ++o) {
                dz[o] = out[v * hdim + o] > 0.0 ? dh[v * hdim + o] : 0.0;
                any = any || dz[o] != 0.0;
            }
            if (!any) {
                continue;
            }
            for (std::size_t o = 0; o < hdim; ++o) {
                db[o] += dz[o];
            }
            detail::gemv_backward(ws, std::span<const double>(h).subspan(v * in, in), dz, dws,
                                  std::span<double>(dh_in).subspan(v * in, in));
            std::fill(dagg.begin(), dagg.end(), 0.0);
            detail::gemv_backward(wn, std::span<const double>(agg).subspan(v * in, in), dz, dwn,
                                  dagg);
            const std::size_t deg = adj.degree(v);
            if (deg == 0) {
                continue;
            }
            const double inv = 1.0 / static_cast<double>(deg);
            for (std::size_t e = adj.start[v]; e < adj.start[v + 1]; ++e) {
                double *dst = dh_in.data() + adj.nbr[e] * in;
                for (std::size_t i = 0; i < in; ++i) {
                    dst[i] += dagg[i] * inv;
                }
            }
        }
        dh = std::move(dh_in);
    }
}

/// Gradient over theta_G for one graph given d(loss)/d(embedding).
inline std::vector<double> gnn_forward_backward(const GnnModel &model, const Graph &g,
                                                std::span<const double> d_embedding) {
    std::vector<double> grad(model.encoder_size(), 0.0);
    embed_backward(model, g, embed_forward(model, g), d_embedding, grad);
    return grad;
}

inline std::vector<double> classifier_logits(const GnnModel &model, const Graph &g) {
    return model.head(embed(model, g));
}

inline int predict_class(const GnnModel &model, const Graph &g) {
    return argmax_class(classifier_logits(model, g));
}

inline MetricsReport evaluate_classifier(const GnnModel &model, std::span<const Graph> graphs) {
    std::vector<int> pred(graphs.size());
    std::vector<int> truth(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        pred[i] = predict_class(model, graphs[i]);
        truth[i] = graphs[i].label;
    }
    return compute_weighted_metrics(pred, truth);
}

// ---------------------------------------------------------------------------
// Classical pretraining
// ---------------------------------------------------------------------------

struct PretrainOptions {
    std::size_t epochs = 100;
    std::size_t patience = 10;
    double lr = 5e-3;
    std::size_t batch_size = 16;
    std::uint64_t seed = 0;
};

struct PretrainEpoch {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_f1 = 0.0;
};

struct PretrainResult {
    double best_val_f1 = -1.0;
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    std::vector<PretrainEpoch> history;
};

/**
 * Adam on minibatches of softmax cross-entropy through encoder and head.
 * Stops after `patience` epochs without a better validation weighted F1 and
 * leaves the best-on-validation parameters in `model`.
 */
inline PretrainResult pretrain_classical(GnnModel &model, std::span<const Graph> train,
                                         std::span<const Graph> val,
                                         const PretrainOptions &opt = {}) {
    if (train.empty() || val.empty()) {
        throw UsageError("pretraining needs non-empty train and validation splits");
    }
    if (opt.batch_size < 1) {
        throw UsageError("batch size must be positive");
    }
    const std::size_t n_enc = model.encoder_size();
    const std::size_t n_head = model.head.n_params();
    AdamState enc_state(n_enc, {opt.lr});
    AdamState head_state(n_head, {opt.lr});

    PretrainResult res;
    std::vector<double> best_enc = model.params;
    std::vector<double> best_head = model.head.params;
    std::size_t stale = 0;
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> g_enc(n_enc);
    std::vector<double> g_head(n_head);
    std::vector<double> d_logits(2);

    for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
        Rng rng(derive_seed(opt.seed, epoch));
        rng.shuffle(std::span<std::size_t>(order));
        std::vector<double> losses;
        losses.reserve(train.size());
        for (std::size_t startb = 0; startb < order.size(); startb += opt.batch_size) {
            const std::size_t stop = std::min(order.size(), startb + opt.batch_size);
            std::fill(g_enc.begin(), g_enc.end(), 0.0);
            std::fill(g_head.begin(), g_head.end(), 0.0);
            for (std::size_t b = startb; b < stop; ++b) {
                const Graph &g = train[order[b]];
                const auto ec = embed_forward(model, g);
                const auto hc = model.head.forward(ec.embedding);
                const double l = softmax_cross_entropy(hc.acts.back(), g.label, d_logits);
                require_finite(l, "pretraining loss");
                losses.push_back(l);
                const auto d_emb = model.head.backward(hc, d_logits, g_head);
                embed_backward(model, g, ec, d_emb, g_enc);
            }
            const double scale = 1.0 / static_cast<double>(stop - startb);
            for (auto &x : g_enc) {
                x *= scale;
            }
            for (auto &x : g_head) {
                x *= scale;
            }
            adam_step(enc_state, model.params, g_enc);
            adam_step(head_state, model.head.params, g_head);
        }
        const double f1 = evaluate_classifier(model, val).f1;
        res.history.push_back({epoch, mean(losses), f1});
        res.epochs_run = epoch;
        if (f1 > res.best_val_f1) {
            res.best_val_f1 = f1;
            res.best_epoch = epoch;
            best_enc = model.params;
            best_head = model.head.params;
            stale = 0;
        } else if (++stale >= opt.patience) {
            break;
        }
    }
    model.params = std::move(best_enc);
    model.head.params = std::move(best_head);
    return res;
}

// ---------------------------------------------------------------------------
// Bottleneck classifier on frozen embeddings
// ---------------------------------------------------------------------------

/// Linear d -> k compression followed by a ReLU MLP to two logits.
inline Mlp make_bottleneck(std::size_t d, std::size_t k, std::size_t head_hidden,
                           std::uint64_t seed) {
    return Mlp({d, k, head_hidden, 2}, {false, true}, seed);
}

/// Plain minibatch Adam on softmax cross-entropy for a fixed epoch budget.
inline void train_mlp_classifier(Mlp &mlp, std::span<const std::vector<double>> inputs,
                                 std::span<const int> labels, std::size_t epochs, double lr,
                                 std::size_t batch_size, std::uint64_t seed) {
    if (inputs.size() != labels.size() || inputs.empty()) {
        throw UsageError("classifier training needs matching, non-empty inputs and labels");
    }
    AdamState state(mlp.n_params(), {lr});
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(mlp.n_params());
    std::vector<double> d_logits(2);
    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        Rng rng(derive_seed(seed, epoch));
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t s = 0; s < order.size(); s += batch_size) {
            const std::size_t stop = std::min(order.size(), s + batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t b = s; b < stop; ++b) {
                const auto c = mlp.forward(inputs[order[b]]);
                require_finite(softmax_cross_entropy(c.acts.back(), labels[order[b]], d_logits),
                               "classifier loss");
                mlp.backward(c, d_logits, grad);
            }
            for (auto &x : grad) {
                x /= static_cast<double>(stop - s);
            }
            adam_step(state, mlp.params, grad);
        }
    }
}

} // namespace qvgc
