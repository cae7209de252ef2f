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
 * Synthetic two-class graph datasets and their binary container.
 *
 * Graphs are random geometric graphs in the unit square. Class 1 differs
 * from class 0 by a `separation`-controlled amount: part of its nodes
 * cluster around a few centres (denser neighbourhoods) and the random node
 * features are shifted along a fixed direction. At separation 0 the classes
 * are identically distributed.
 */
#pragma once

#include "qvgc/error.hpp"
#include "qvgc/gnn.hpp"
#include "qvgc/rng.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace qvgc {

inline constexpr std::size_t kNodeFeatures = 8;
inline constexpr std::size_t kMinGraphs = 20;

struct GeneratorParams {
    std::uint64_t seed = 0;
    std::size_t n_graphs = 320;
    double separation = 1.0;
    /// Selects the class-1 feature shift direction.
    std::uint64_t task_id = 0;
    std::size_t min_nodes = 30;
    std::size_t max_nodes = 80;
    double radius = 0.2;
    double train_frac = 0.6;
    double val_frac = 0.2;

    bool operator==(const GeneratorParams &) const = default;

    void validate() const {
        if (n_graphs < kMinGraphs) {
            throw UsageError("dataset needs at least " + std::to_string(kMinGraphs) +
                             " graphs, got " + std::to_string(n_graphs));
        }
        if (!(separation >= 0.0 && separation <= 1.0)) {
            throw UsageError("separation must lie in [0, 1]");
        }
        if (min_nodes < 1 || max_nodes < min_nodes) {
            throw UsageError("invalid node count range");
        }
        if (!(radius > 0.0)) {
            throw UsageError("radius must be positive");
        }
        if (!(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0)) {
            throw UsageError("split fractions must be positive and leave room for a test split");
        }
    }
};

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

struct Dataset {
    GeneratorParams params;
    std::vector<Graph> graphs;
    std::vector<Split> split;

    [[nodiscard]] std::vector<std::size_t> indices(Split s) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < split.size(); ++i) {
            if (split[i] == s) {
                out.push_back(i);
            }
        }
        return out;
    }

    [[nodiscard]] std::vector<Graph> graphs_in(Split s) const {
        std::vector<Graph> out;
        for (std::size_t i : indices(s)) {
            out.push_back(graphs[i]);
        }
        return out;
    }

    void validate() const {
        if (graphs.size() != split.size()) {
            throw FormatError("graph and split counts differ");
        }
        std::array<std::array<std::size_t, 2>, 3> counts{};
        for (std::size_t i = 0; i < graphs.size(); ++i) {
            graphs[i].validate();
            const auto s = static_cast<std::size_t>(split[i]);
            if (s > 2) {
                throw FormatError("invalid split tag");
            }
            ++counts[s][static_cast<std::size_t>(graphs[i].label)];
        }
        for (const auto &c : counts) {
            if (c[0] == 0 || c[1] == 0) {
                throw FormatError("every split must contain both classes");
            }
        }
    }

    bool operator==(const Dataset &o) const {
        if (!(params == o.params) || split != o.split || graphs.size() != o.graphs.size()) {
            return false;
        }
        for (std::size_t i = 0; i < graphs.size(); ++i) {
            const auto &a = graphs[i];
            const auto &b = o.graphs[i];
            if (a.n_nodes != b.n_nodes || a.f_in != b.f_in || a.label != b.label ||
                a.features != b.features || a.edges != b.edges) {
                return false;
            }
        }
        return true;
    }
};

namespace detail {

inline Graph generate_graph(std::size_t index, int label, const GeneratorParams &p,
                            std::span<const double> shift_dir) {
    Rng rng(derive_seed(p.seed, 0x47524150 + index));
    const double s = p.separation;
    Graph g;
    g.label = label;
    g.f_in = kNodeFeatures;
    g.n_nodes = p.min_nodes + rng.below(p.max_nodes - p.min_nodes + 1);
    const std::size_t n = g.n_nodes;

    std::vector<double> xs(n);
    std::vector<double> ys(n);
    const auto clustered =
        label == 1 ? static_cast<std::size_t>(std::lround(0.5 * s * static_cast<double>(n))) : 0;
    std::array<std::array<double, 2>, 3> centres{};
    for (auto &c : centres) {
        c = {rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85)};
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (v < clustered) {
            const auto &c = centres[v % centres.size()];
            xs[v] = std::clamp(rng.normal(c[0], 0.05), 0.0, 1.0);
            ys[v] = std::clamp(rng.normal(c[1], 0.05), 0.0, 1.0);
        } else {
            xs[v] = rng.uniform();
            ys[v] = rng.uniform();
        }
    }
    std::vector<std::size_t> degree(n, 0);
    const double r2 = p.radius * p.radius;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const double dx = xs[a] - xs[b];
            const double dy = ys[a] - ys[b];
            if (dx * dx + dy * dy < r2) {
                g.edges.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
                ++degree[a];
                ++degree[b];
            }
        }
    }
    g.features.resize(n * kNodeFeatures);
    const double shift = label == 1 ? 0.5 * s : 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        double *f = g.features.data() + v * kNodeFeatures;
        f[0] = xs[v];
        f[1] = ys[v];
        f[2] = static_cast<double>(degree[v]) / 10.0;
        for (std::size_t k = 0; k < shift_dir.size(); ++k) {
            f[3 + k] = rng.normal() + shift * shift_dir[k];
        }
    }
    return g;
}

} // namespace detail

/// Stratified assignment of `frac_train` / `frac_val` / rest per class.
inline std::vector<Split> stratified_split(std::span<const int> labels, double frac_train,
                                           double frac_val, std::uint64_t seed) {
    std::vector<Split> out(labels.size(), Split::Test);
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) {
                members.push_back(i);
            }
        }
        Rng rng(derive_seed(seed, 0x53504C54 + static_cast<std::uint64_t>(cls)));
        rng.shuffle(std::span<std::size_t>(members));
        const auto m = static_cast<double>(members.size());
        const auto n_train = static_cast<std::size_t>(std::lround(frac_train * m));
        const auto n_val = static_cast<std::size_t>(std::lround(frac_val * m));
        for (std::size_t k = 0; k < members.size(); ++k) {
            out[members[k]] = k < n_train ? Split::Train
                              : k < n_train + n_val ? Split::Val
                                                    : Split::Test;
        }
    }
    return out;
}

inline Dataset generate_synthetic_dataset(const GeneratorParams &p) {
    p.validate();
    std::array<double, kNodeFeatures - 3> dir{};
    Rng dir_rng(derive_seed(p.task_id, 0x44495220));
    double norm = 0.0;
    while (norm < 1e-6) {
        norm = 0.0;
        for (auto &d : dir) {
            d = dir_rng.normal();
            norm += d * d;
        }
        norm = std::sqrt(norm);
    }
    for (auto &d : dir) {
        d /= norm;
    }

    // Exactly balanced labels in a seeded order.
    std::vector<int> labels(p.n_graphs);
    for (std::size_t i = 0; i < p.n_graphs; ++i) {
        labels[i] = i < (p.n_graphs + 1) / 2 ? 0 : 1;
    }
    Rng order_rng(derive_seed(p.seed, 0x4C41424C));
    order_rng.shuffle(std::span<int>(labels));

    Dataset ds;
    ds.params = p;
    ds.graphs.reserve(p.n_graphs);
    for (std::size_t i = 0; i < p.n_graphs; ++i) {
        ds.graphs.push_back(detail::generate_graph(i, labels[i], p, dir));
    }
    ds.split = stratified_split(labels, p.train_frac, p.val_frac, p.seed);
    ds.validate();
    return ds;
}

/// Stratified subsample of `indices` keeping round(fraction * count) per class
/// (at least one of each).
inline std::vector<std::size_t> subsample(const Dataset &ds, std::span<const std::size_t> indices,
                                          double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw UsageError("data fraction must lie in (0, 1]");
    }
    if (fraction == 1.0) {
        return {indices.begin(), indices.end()};
    }
    std::vector<std::size_t> keep;
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> members;
        for (std::size_t i : indices) {
            if (ds.graphs[i].label == cls) {
                members.push_back(i);
            }
        }
        Rng rng(derive_seed(seed, 0x46524143 + static_cast<std::uint64_t>(cls)));
        rng.shuffle(std::span<std::size_t>(members));
        const auto n = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::lround(fraction * static_cast<double>(members.size()))),
            std::min<std::size_t>(1, members.size()), members.size());
        keep.insert(keep.end(), members.begin(), members.begin() + static_cast<long>(n));
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

// ---------------------------------------------------------------------------
// Binary container
// ---------------------------------------------------------------------------

inline constexpr char kDatasetMagic[8] = {'Q', 'V', 'G', 'C', 'D', 'A', 'T', 'A'};
inline constexpr std::uint32_t kDatasetVersion = 1;

namespace detail {

class ByteWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int k = 0; k < 4; ++k) {
            u8(static_cast<std::uint8_t>(v >> (8 * k)));
        }
    }
    void u64(std::uint64_t v) {
        for (int k = 0; k < 8; ++k) {
            u8(static_cast<std::uint8_t>(v >> (8 * k)));
        }
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(const char *p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
    [[nodiscard]] const std::vector<char> &bytes() const { return buf_; }

  private:
    std::vector<char> buf_;
};

class ByteReader {
  public:
    explicit ByteReader(std::vector<char> data) : buf_(std::move(data)) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf_[pos_++]);
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) {
            v |= static_cast<std::uint32_t>(u8()) << (8 * k);
        }
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k) {
            v |= static_cast<std::uint64_t>(u8()) << (8 * k);
        }
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void raw(char *p, std::size_t n) {
        need(n);
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    [[nodiscard]] bool done() const { return pos_ == buf_.size(); }

  private:
    void need(std::size_t n) const {
        if (buf_.size() - pos_ < n) {
            throw FormatError("dataset file is truncated");
        }
    }
    std::vector<char> buf_;
    std::size_t pos_ = 0;
};

/// Write to a sibling temporary file, then rename over the target.
inline void write_file_atomic(const std::filesystem::path &path, std::span<const char> bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw UsageError("cannot write " + path.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw UsageError("failed writing " + path.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace detail

inline std::vector<char> serialize_dataset(const Dataset &ds) {
    detail::ByteWriter w;
    w.raw(kDatasetMagic, sizeof kDatasetMagic);
    w.u32(kDatasetVersion);
    const auto &p = ds.params;
    w.u64(p.seed);
    w.u64(p.n_graphs);
    w.f64(p.separation);
    w.u64(p.task_id);
    w.u64(p.min_nodes);
    w.u64(p.max_nodes);
    w.f64(p.radius);
    w.f64(p.train_frac);
    w.f64(p.val_frac);
    w.u64(ds.graphs.size());
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
        const auto &g = ds.graphs[i];
        w.u32(static_cast<std::uint32_t>(g.n_nodes));
        w.u32(static_cast<std::uint32_t>(g.f_in));
        w.u32(static_cast<std::uint32_t>(g.edges.size()));
        w.u8(static_cast<std::uint8_t>(g.label));
        w.u8(static_cast<std::uint8_t>(ds.split[i]));
        for (double f : g.features) {
            w.f64(f);
        }
        for (auto [a, b] : g.edges) {
            w.u32(a);
            w.u32(b);
        }
    }
    return w.bytes();
}

inline Dataset deserialize_dataset(std::vector<char> bytes) {
    detail::ByteReader r(std::move(bytes));
    char magic[sizeof kDatasetMagic];
    r.raw(magic, sizeof magic);
    if (std::memcmp(magic, kDatasetMagic, sizeof magic) != 0) {
        throw FormatError("not a qvgc dataset file");
    }
    if (const auto v = r.u32(); v != kDatasetVersion) {
        throw FormatError("unsupported dataset version " + std::to_string(v));
    }
    Dataset ds;
    auto &p = ds.params;
    p.seed = r.u64();
    p.n_graphs = r.u64();
    p.separation = r.f64();
    p.task_id = r.u64();
    p.min_nodes = r.u64();
    p.max_nodes = r.u64();
    p.radius = r.f64();
    p.train_frac = r.f64();
    p.val_frac = r.f64();
    const std::uint64_t count = r.u64();
    if (count > (1U << 24)) {
        throw FormatError("implausible graph count");
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        Graph g;
        g.n_nodes = r.u32();
        g.f_in = r.u32();
        const std::uint32_t n_edges = r.u32();
        g.label = r.u8();
        ds.split.push_back(static_cast<Split>(r.u8()));
        if (g.n_nodes * g.f_in > (1U << 28) || n_edges > (1U << 28)) {
            throw FormatError("implausible graph size");
        }
        g.features.resize(g.n_nodes * g.f_in);
        for (auto &f : g.features) {
            f = r.f64();
        }
        g.edges.resize(n_edges);
        for (auto &e : g.edges) {
            e.first = r.u32();
            e.second = r.u32();
        }
        ds.graphs.push_back(std::move(g));
    }
    if (!r.done()) {
        throw FormatError("trailing bytes in dataset file");
    }
    try {
        ds.validate();
    } catch (const FormatError &) {
        throw;
    } catch (const Error &e) {
        throw FormatError(std::string("invalid dataset: ") + e.what());
    }
    return ds;
}

inline void save_dataset(const Dataset &ds, const std::filesystem::path &path) {
    detail::write_file_atomic(path, serialize_dataset(ds));
}

inline Dataset load_dataset(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot open dataset " + path.string());
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_dataset(std::move(bytes));
}

} // namespace qvgc
