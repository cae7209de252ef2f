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
 * qvgc command-line tool: generate datasets, run single experiments and
 * ablation grids.
 *
 * Exit codes: 0 success, 1 I/O error or failed grid points, 2 usage error,
 * 3 numerical abort.
 */
#include "qvgc/checkpoint.hpp"
#include "qvgc/dataset.hpp"
#include "qvgc/pipeline.hpp"
#include "qvgc/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace qvgc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

/// Flag values for the experiment config; strings are parsed after CLI11.
struct ConfigFlags {
    std::string regime = "serial";
    std::string encoding = "zz";
    std::string optimizer = "nft";
    std::string entanglement = "full";
    std::string monitor = "loss";
    ExperimentConfig cfg;

    void attach(CLI::App *app) {
        app->add_option("--regime", regime, "classical | serial | end-to-end")
            ->check(CLI::IsMember({"classical", "serial", "end-to-end"}));
        app->add_option("--dim", cfg.dim, "GNN embedding dimension");
        app->add_option("--encoding", encoding, "zz | amplitude")
            ->check(CLI::IsMember({"zz", "amplitude"}));
        app->add_option("--zz-reps", cfg.zz_reps, "ZZ map repetitions");
        app->add_option("--entanglement", entanglement, "full | linear")
            ->check(CLI::IsMember({"full", "linear"}));
        app->add_option("--optimizer", optimizer, "cobyla | nft | adam")
            ->check(CLI::IsMember({"cobyla", "nft", "adam"}));
        app->add_option("--epochs", cfg.epochs, "maximum training epochs");
        app->add_option("--patience", cfg.patience, "early-stopping patience");
        app->add_option("--monitor", monitor, "serial early-stopping quantity: loss | f1")
            ->check(CLI::IsMember({"loss", "f1"}));
        app->add_option("--fraction", cfg.fraction, "share of the training split to use");
        app->add_option("--seed", cfg.seed, "experiment seed");
        app->add_option("--shots", cfg.shots, "shots per test prediction (0: exact)");
        app->add_option("--layers", cfg.ansatz_layers, "ansatz layers");
        app->add_option("--bottleneck", cfg.bottleneck, "linear bottleneck width (0: off)");
        app->add_option("--bottleneck-epochs", cfg.bottleneck_epochs, "bottleneck training epochs");
        app->add_option("--gnn-hidden", cfg.gnn_hidden, "GNN hidden width");
        app->add_option("--gnn-layers", cfg.gnn_layers, "GNN message-passing layers");
        app->add_option("--gnn-epochs", cfg.gnn_epochs, "GNN pretraining epochs");
        app->add_option("--lr-vqc", cfg.lr_vqc, "end-to-end learning rate for theta_Q");
        app->add_option("--lr-gnn", cfg.lr_gnn, "end-to-end learning rate for theta_G");
        app->add_option("--vqc-update-every", cfg.vqc_update_every,
                        "end-to-end theta_Q update period in epochs");
        app->add_option("--batch-size", cfg.batch_size, "minibatch size");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig c = cfg;
        c.regime = parse_regime(regime);
        c.encoding = parse_encoding(encoding);
        c.optimizer = parse_optimizer(optimizer);
        c.entanglement = parse_entanglement(entanglement);
        c.monitor = parse_monitor(monitor);
        return c;
    }
};

/// Comma list of numbers; integer ranges may be written a..b.
template <class T> std::vector<T> parse_list(const std::string &spec, const char *what) {
    std::vector<T> out;
    std::size_t pos = 0;
    auto fail = [&] { throw UsageError(std::string("malformed ") + what + " list '" + spec + "'"); };
    if (spec.empty()) {
        fail();
    }
    while (pos <= spec.size()) {
        const std::size_t comma = std::min(spec.find(',', pos), spec.size());
        const std::string item = spec.substr(pos, comma - pos);
        if (item.empty()) {
            fail();
        }
        try {
            std::size_t used = 0;
            if (const auto dots = item.find(".."); dots != std::string::npos) {
                if constexpr (std::is_integral_v<T>) {
                    const auto lo = std::stoull(item.substr(0, dots), &used);
                    if (used != dots) {
                        fail();
                    }
                    const std::string rest = item.substr(dots + 2);
                    const auto hi = std::stoull(rest, &used);
                    if (used != rest.size() || hi < lo || hi - lo > 100000) {
                        fail();
                    }
                    for (auto v = lo; v <= hi; ++v) {
                        out.push_back(static_cast<T>(v));
                    }
                } else {
                    fail();
                }
            } else if constexpr (std::is_integral_v<T>) {
                if (item.front() == '-') {
                    fail();
                }
                out.push_back(static_cast<T>(std::stoull(item, &used)));
                if (used != item.size()) {
                    fail();
                }
            } else {
                out.push_back(static_cast<T>(std::stod(item, &used)));
                if (used != item.size()) {
                    fail();
                }
            }
        } catch (const std::logic_error &) {
            fail();
        }
        pos = comma + 1;
    }
    return out;
}

json base_manifest(const char *command, const ExperimentConfig &cfg, const fs::path &dataset,
                   const GeneratorParams &data, const fs::path &out_dir) {
    return {{"tool", "qvgc"},
            {"tool_version", kToolVersion},
            {"command", command},
            {"config", config_to_json(cfg)},
            {"dataset", {{"path", fs::absolute(dataset).string()}, {"params", generator_to_json(data)}}},
            {"seeds", {{"experiment", cfg.seed}, {"dataset", data.seed}}},
            {"out_dir", fs::absolute(out_dir).string()},
            {"started_at", utc_timestamp()},
            {"finished_at", nullptr},
            {"status", "running"}};
}

void print_table_row(const std::string &model, const MetricsReport &m) {
    std::printf("%-28s %12s %12s %12s\n", "Model", "w-Precision", "w-Recall", "w-F1");
    std::printf("%-28s %12.4f %12.4f %12.4f\n", model.c_str(), m.precision, m.recall, m.f1);
}

std::string model_label(const ExperimentConfig &c) {
    std::string s(regime_name(c.regime));
    if (c.regime != Regime::Classical) {
        s += " " + std::string(encoding_name(c.encoding)) + " d=" + std::to_string(c.dim);
        if (c.bottleneck > 0) {
            s += " bn=" + std::to_string(c.bottleneck);
        }
    }
    return s;
}

// --------------------------------------------------------------------------

int cmd_generate(std::uint64_t seed, std::size_t n, double separation, std::uint64_t task,
                 double train_frac, double val_frac, const std::string &out) {
    GeneratorParams p;
    p.seed = seed;
    p.n_graphs = n;
    p.separation = separation;
    p.task_id = task;
    p.train_frac = train_frac;
    p.val_frac = val_frac;
    const auto ds = generate_synthetic_dataset(p);
    save_dataset(ds, out);
    std::printf("wrote %s: %zu graphs, separation %g\n", out.c_str(), ds.graphs.size(),
                separation);
    for (auto s : {Split::Train, Split::Val, Split::Test}) {
        std::size_t c0 = 0;
        std::size_t c1 = 0;
        for (std::size_t i : ds.indices(s)) {
            (ds.graphs[i].label == 0 ? c0 : c1) += 1;
        }
        const char *name = s == Split::Train ? "train" : s == Split::Val ? "val" : "test";
        std::printf("  %-5s %4zu graphs  class0 %4zu  class1 %4zu\n", name, c0 + c1, c0, c1);
    }
    return kExitOk;
}

int cmd_run(ExperimentConfig cfg, fs::path dataset_path, fs::path out_dir,
            const std::string &manifest_path) {
    if (!manifest_path.empty()) {
        const json m = read_json(manifest_path);
        if (m.value("command", "") != "run") {
            throw UsageError("manifest was not written by 'run'");
        }
        cfg = config_from_json(m.at("config"));
        dataset_path = m.at("dataset").at("path").get<std::string>();
        if (out_dir.empty()) {
            out_dir = m.at("out_dir").get<std::string>();
        }
    }
    if (dataset_path.empty()) {
        throw UsageError("--dataset is required");
    }
    if (out_dir.empty()) {
        out_dir = "qvgc_out";
    }
    cfg.validate();
    cfg.workers = default_worker_count();
    const Dataset ds = load_dataset(dataset_path);

    fs::create_directories(out_dir);
    json manifest = base_manifest("run", cfg, dataset_path, ds.params, out_dir);
    manifest["outputs"] = {{"metrics", "metrics.json"},
                           {"convergence", "convergence.csv"},
                           {"results", "results.csv"}};
    write_json_atomic(out_dir / "manifest.json", manifest);

    std::ofstream trace(out_dir / "convergence.csv", std::ios::trunc);
    trace << kConvergenceHeader << '\n' << std::flush;
    auto finish = [&](const char *status, const std::string &error) {
        manifest["finished_at"] = utc_timestamp();
        manifest["status"] = status;
        if (!error.empty()) {
            manifest["error"] = error;
        }
        write_json_atomic(out_dir / "manifest.json", manifest);
    };

    RunResult r;
    try {
        r = run_experiment(cfg, ds, [&](const EpochRecord &e) {
            trace << convergence_row(e) << '\n' << std::flush;
        });
    } catch (const NumericalError &e) {
        finish("numerical-abort", e.what());
        std::cerr << "numerical abort: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error &e) {
        finish("failed", e.what());
        throw;
    }
    trace.close();
    write_text_atomic(out_dir / "convergence.csv", convergence_csv(r.trace));
    write_json_atomic(out_dir / "metrics.json", result_to_json(r, ds.params));
    write_text_atomic(out_dir / "results.csv",
                      std::string(kResultsHeader) + '\n' + results_row(cfg, &r, "") + '\n');
    finish("ok", "");
    print_table_row(model_label(cfg), r.test);
    return kExitOk;
}

std::string run_dir_name(const ExperimentConfig &c) {
    return "run_d" + std::to_string(c.dim) + "_f" + format_double(c.fraction) + "_s" +
           std::to_string(c.seed);
}

int cmd_grid(ExperimentConfig base, fs::path dataset_path, fs::path out_dir, std::string dims_s,
             std::string fractions_s, std::string seeds_s, const std::string &manifest_path) {
    if (!manifest_path.empty()) {
        const json m = read_json(manifest_path);
        if (m.value("command", "") != "grid") {
            throw UsageError("manifest was not written by 'grid'");
        }
        base = config_from_json(m.at("config"));
        dataset_path = m.at("dataset").at("path").get<std::string>();
        dims_s = m.at("grid").at("dims").get<std::string>();
        fractions_s = m.at("grid").at("fractions").get<std::string>();
        seeds_s = m.at("grid").at("seeds").get<std::string>();
        if (out_dir.empty()) {
            out_dir = m.at("out_dir").get<std::string>();
        }
    }
    // Parse everything before touching the filesystem.
    const auto dims = parse_list<std::size_t>(dims_s, "dims");
    const auto fractions = parse_list<double>(fractions_s, "fractions");
    const auto seeds = parse_list<std::uint64_t>(seeds_s, "seeds");
    if (dataset_path.empty()) {
        throw UsageError("--dataset is required");
    }
    if (out_dir.empty()) {
        out_dir = "qvgc_grid";
    }
    const Dataset ds = load_dataset(dataset_path);

    fs::create_directories(out_dir);
    json manifest = base_manifest("grid", base, dataset_path, ds.params, out_dir);
    manifest["grid"] = {{"dims", dims_s}, {"fractions", fractions_s}, {"seeds", seeds_s}};
    manifest["outputs"] = {{"results", "results.csv"}};
    write_json_atomic(out_dir / "manifest.json", manifest);

    base.workers = 1;
    const auto points =
        run_ablation_grid(base, ds, dims, fractions, seeds, default_worker_count());
    bool numerical = false;
    bool failed = false;
    for (const auto &p : points) {
        if (p.result) {
            const fs::path dir = out_dir / run_dir_name(p.config);
            fs::create_directories(dir);
            write_json_atomic(dir / "metrics.json", result_to_json(*p.result, ds.params));
            write_text_atomic(dir / "convergence.csv", convergence_csv(p.result->trace));
        } else {
            std::cerr << "grid point dim=" << p.config.dim << " fraction=" << p.config.fraction
                      << " seed=" << p.config.seed << ": " << p.error << '\n';
            failed = true;
            numerical = numerical || p.numerical_failure;
        }
    }
    write_text_atomic(out_dir / "results.csv", grid_csv(points));
    manifest["finished_at"] = utc_timestamp();
    manifest["status"] = numerical ? "numerical-abort" : failed ? "partial" : "ok";
    write_json_atomic(out_dir / "manifest.json", manifest);
    std::printf("%zu grid points, results in %s\n", points.size(),
                (out_dir / "results.csv").string().c_str());
    return numerical ? kExitNumerical : failed ? kExitFailure : kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"qvgc: graph embeddings classified by variational quantum circuits"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    auto *gen = app.add_subcommand("generate", "write a synthetic graph dataset");
    std::uint64_t g_seed = 0;
    std::size_t g_n = 320;
    double g_sep = 1.0;
    std::uint64_t g_task = 0;
    double g_train = 0.6;
    double g_val = 0.2;
    std::string g_out;
    gen->add_option("--seed", g_seed, "generator seed");
    gen->add_option("--n", g_n, "number of graphs (>= 20)");
    gen->add_option("--separation", g_sep, "class separation in [0, 1]");
    gen->add_option("--task-id", g_task, "selects the class-1 feature direction");
    gen->add_option("--train-frac", g_train, "training share");
    gen->add_option("--val-frac", g_val, "validation share");
    gen->add_option("--out", g_out, "output file")->required();

    ConfigFlags run_flags;
    std::string r_dataset;
    std::string r_out;
    std::string r_manifest;
    auto *run = app.add_subcommand("run", "train and evaluate one configuration");
    run_flags.attach(run);
    run->add_option("--dataset", r_dataset, "dataset file");
    run->add_option("--out-dir", r_out, "output directory");
    run->add_option("--manifest", r_manifest, "re-run the configuration recorded in a manifest");

    ConfigFlags grid_flags;
    std::string gr_dataset;
    std::string gr_out;
    std::string gr_manifest;
    std::string gr_dims = "10";
    std::string gr_fractions = "1.0";
    std::string gr_seeds = "0";
    auto *grid = app.add_subcommand("grid", "run dims x fractions x seeds");
    grid_flags.attach(grid);
    grid->add_option("--dataset", gr_dataset, "dataset file");
    grid->add_option("--out-dir", gr_out, "output directory");
    grid->add_option("--dims", gr_dims, "comma list of embedding dims");
    grid->add_option("--fractions", gr_fractions, "comma list of data fractions");
    grid->add_option("--seeds", gr_seeds, "comma list or range a..b of seeds");
    grid->add_option("--manifest", gr_manifest, "re-run the grid recorded in a manifest");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            return cmd_generate(g_seed, g_n, g_sep, g_task, g_train, g_val, g_out);
        }
        if (run->parsed()) {
            return cmd_run(run_flags.resolve(), r_dataset, r_out, r_manifest);
        }
        return cmd_grid(grid_flags.resolve(), gr_dataset, gr_out, gr_dims, gr_fractions, gr_seeds,
                        gr_manifest);
    } catch (const NumericalError &e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UnsupportedError &e) {
        std::cerr << "unsupported configuration: " << e.what() << '\n';
        return kExitUsage;
    } catch (const CapacityError &e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
