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
#include "qvgc/dataset.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace qvgc;

namespace {

GeneratorParams params(std::uint64_t seed, std::size_t n = 120, double sep = 1.0) {
    GeneratorParams p;
    p.seed = seed;
    p.n_graphs = n;
    p.separation = sep;
    return p;
}

double mean_degree(const Graph &g) {
    return 2.0 * static_cast<double>(g.edges.size()) / static_cast<double>(g.n_nodes);
}

double class_gap(const Dataset &ds) {
    std::array<double, 2> sum{};
    std::array<double, 2> cnt{};
    for (const auto &g : ds.graphs) {
        sum[static_cast<std::size_t>(g.label)] += mean_degree(g);
        cnt[static_cast<std::size_t>(g.label)] += 1;
    }
    return sum[1] / cnt[1] - sum[0] / cnt[0];
}

} // namespace

TEST(Dataset, GenerationIsDeterministic) {
    const auto a = generate_synthetic_dataset(params(4));
    const auto b = generate_synthetic_dataset(params(4));
    EXPECT_EQ(serialize_dataset(a), serialize_dataset(b));
    EXPECT_NE(serialize_dataset(a), serialize_dataset(generate_synthetic_dataset(params(5))));
}

TEST(Dataset, GraphsAreWellFormed) {
    const auto ds = generate_synthetic_dataset(params(1));
    for (const auto &g : ds.graphs) {
        EXPECT_NO_THROW(g.validate());
        EXPECT_EQ(g.f_in, kNodeFeatures);
        EXPECT_GE(g.n_nodes, 30U);
        EXPECT_LE(g.n_nodes, 80U);
        for (double x : g.features) {
            EXPECT_TRUE(std::isfinite(x));
        }
    }
}

TEST(Dataset, LabelsAreBalanced) {
    for (std::size_t n : {20U, 21U, 120U, 320U}) {
        const auto ds = generate_synthetic_dataset(params(2, n));
        std::size_t ones = 0;
        for (const auto &g : ds.graphs) {
            ones += g.label == 1 ? 1 : 0;
        }
        EXPECT_LE(std::abs(2.0 * static_cast<double>(ones) - static_cast<double>(n)), 1.0);
    }
}

TEST(Dataset, SplitsAreDisjointStratifiedAndExhaustive) {
    auto p = params(3, 320);
    p.train_frac = 0.625;
    p.val_frac = 0.1875;
    const auto ds = generate_synthetic_dataset(p);
    const auto tr = ds.indices(Split::Train);
    const auto va = ds.indices(Split::Val);
    const auto te = ds.indices(Split::Test);
    EXPECT_EQ(tr.size(), 200U);
    EXPECT_EQ(va.size(), 60U);
    EXPECT_EQ(te.size(), 60U);
    std::set<std::size_t> all(tr.begin(), tr.end());
    all.insert(va.begin(), va.end());
    all.insert(te.begin(), te.end());
    EXPECT_EQ(all.size(), ds.graphs.size());
    for (const auto &idx : {tr, va, te}) {
        std::size_t ones = 0;
        for (std::size_t i : idx) {
            ones += ds.graphs[i].label == 1 ? 1 : 0;
        }
        EXPECT_EQ(2 * ones, idx.size());
    }
}

TEST(Dataset, SeparationControlsClassGap) {
    // Clustering raises class-1 degree at full separation only.
    EXPECT_GT(class_gap(generate_synthetic_dataset(params(6, 200, 1.0))), 1.0);
    EXPECT_LT(std::abs(class_gap(generate_synthetic_dataset(params(6, 200, 0.0)))), 0.5);
}

TEST(Dataset, TaskIdChangesFeaturesOnly) {
    auto p = params(7);
    const auto a = generate_synthetic_dataset(p);
    p.task_id = 9;
    const auto b = generate_synthetic_dataset(p);
    EXPECT_EQ(a.split, b.split);
    bool differs = false;
    for (std::size_t i = 0; i < a.graphs.size(); ++i) {
        EXPECT_EQ(a.graphs[i].label, b.graphs[i].label);
        differs = differs || a.graphs[i].features != b.graphs[i].features;
    }
    EXPECT_TRUE(differs);
}

TEST(Dataset, InvalidParametersRejected) {
    EXPECT_THROW(generate_synthetic_dataset(params(0, 10)), UsageError);
    EXPECT_THROW(generate_synthetic_dataset(params(0, 100, 1.5)), UsageError);
    EXPECT_THROW(generate_synthetic_dataset(params(0, 100, -0.1)), UsageError);
    auto p = params(0);
    p.train_frac = 0.9;
    p.val_frac = 0.1;
    EXPECT_THROW(generate_synthetic_dataset(p), UsageError);
}

TEST(Dataset, BinaryRoundTrip) {
    const auto ds = generate_synthetic_dataset(params(8, 40));
    const auto bytes = serialize_dataset(ds);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "QVGCDATA");
    const auto back = deserialize_dataset(bytes);
    EXPECT_TRUE(back == ds);
    EXPECT_EQ(serialize_dataset(back), bytes);
}

TEST(Dataset, FileRoundTripIsAtomic) {
    const auto dir = std::filesystem::temp_directory_path() / "qvgc_test_dataset";
    std::filesystem::create_directories(dir);
    const auto path = dir / "d.bin";
    const auto ds = generate_synthetic_dataset(params(9, 30));
    save_dataset(ds, path);
    EXPECT_TRUE(load_dataset(path) == ds);
    for (const auto &e : std::filesystem::directory_iterator(dir)) {
        EXPECT_EQ(e.path().filename(), "d.bin");  // no leftover temporaries
    }
    std::filesystem::remove_all(dir);
}

TEST(Dataset, CorruptInputRejected) {
    const auto bytes = serialize_dataset(generate_synthetic_dataset(params(10, 30)));
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_THROW(deserialize_dataset(bad_magic), FormatError);
    auto bad_version = bytes;
    bad_version[8] = 2;
    EXPECT_THROW(deserialize_dataset(bad_version), FormatError);
    for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{40}, bytes.size() - 1}) {
        EXPECT_THROW(deserialize_dataset({bytes.begin(), bytes.begin() + static_cast<long>(cut)}),
                     FormatError);
    }
    auto trailing = bytes;
    trailing.push_back(0);
    EXPECT_THROW(deserialize_dataset(trailing), FormatError);
    EXPECT_THROW(load_dataset("/nonexistent/qvgc.bin"), UsageError);
}

TEST(Dataset, SubsampleTouchesOnlyGivenIndices) {
    const auto ds = generate_synthetic_dataset(params(11, 200));
    const auto train = ds.indices(Split::Train);
    const auto keep = subsample(ds, train, 0.25, 3);
    EXPECT_EQ(keep.size(), 30U);
    std::size_t ones = 0;
    for (std::size_t i : keep) {
        EXPECT_EQ(ds.split[i], Split::Train);
        ones += ds.graphs[i].label == 1 ? 1 : 0;
    }
    EXPECT_EQ(ones, 15U);
    EXPECT_EQ(subsample(ds, train, 0.25, 3), keep);
    EXPECT_EQ(subsample(ds, train, 1.0, 3), train);
    EXPECT_EQ(subsample(ds, train, 1e-6, 3).size(), 2U);  // one per class
    EXPECT_THROW(subsample(ds, train, 0.0, 3), UsageError);
    EXPECT_THROW(subsample(ds, train, 1.5, 3), UsageError);
}
