#include "nlgcl/cli.hpp"

#include "nlgcl/analysis.hpp"
#include "nlgcl/config.hpp"
#include "nlgcl/error.hpp"
#include "nlgcl/parallel.hpp"
#include "nlgcl/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace nlgcl {

namespace {

namespace fs = std::filesystem;

/// Flags shared by every subcommand that reads a run configuration.
struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string scope;
    std::string denominator;
    std::optional<int> threads;
    std::vector<std::string> overrides;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config, "Run configuration file (key = value lines)");
        cmd->add_option("--seed", seed, "Master seed");
        cmd->add_option("--out", out, "Output directory");
        cmd->add_option("--scope", scope, "Contrastive scope: hetero or entire");
        cmd->add_option("--denominator", denominator, "Softmax denominator: full or in_batch");
        cmd->add_option("--threads", threads, "Worker threads for row-parallel kernels");
        cmd->add_option("--set", overrides, "Extra key=value config override (repeatable)");
    }

    RunConfig resolve() const {
        RunConfig cfg = config.empty() ? RunConfig{} : load_run_config(config);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("--set expects key=value, got '" + kv + "'");
            }
            apply_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed) {
            cfg.train.seed = *seed;
        }
        if (!out.empty()) {
            cfg.out_dir = out;
        }
        if (!scope.empty()) {
            cfg.train.loss.scope = parse_scope(scope);
        }
        if (!denominator.empty()) {
            cfg.train.loss.denominator = parse_denominator(denominator);
        }
        if (threads) {
            cfg.threads = *threads;
        }
        set_num_threads(cfg.threads);
        return cfg;
    }
};

ArtifactStamp stamp_for(const RunConfig& cfg) {
    return {cfg.hash(), cfg.train.seed, kVersion};
}

InteractionDataset load_split(const RunConfig& cfg) {
    if (cfg.data_dir.empty()) {
        throw ConfigError("no split directory configured (key 'data')");
    }
    return read_split(cfg.data_dir);
}

void write_metadata(const RunConfig& cfg, const fs::path& path) {
    nlohmann::ordered_json j;
    j["version"] = kVersion;
    j["config_hash"] = hash_hex(cfg.hash());
    j["seed"] = cfg.train.seed;
    j["dim"] = cfg.train.dim;
    j["batch_size"] = cfg.train.batch_size;
    j["layers"] = cfg.train.num_layers;
    j["groups"] = cfg.train.loss.groups;
    j["scope"] = to_string(cfg.train.loss.scope);
    j["denominator"] = to_string(cfg.train.loss.denominator);
    j["anchors"] = to_string(cfg.train.loss.anchors);
    j["normalize_similarity"] = cfg.train.loss.normalize_similarity;
    j["tau"] = cfg.train.loss.tau;
    j["lambda1"] = cfg.train.loss.lambda1;
    j["lambda2"] = cfg.train.loss.lambda2;
    j["lr"] = cfg.train.lr;
    j["max_epochs"] = cfg.train.max_epochs;
    j["patience"] = cfg.train.patience;
    j["eval_ks"] = cfg.train.eval_ks;
    j["data"] = cfg.data_dir.string();
    j["canonical_config"] = cfg.train.canonical();
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

int cmd_prepare(const RunConfig& cfg) {
    if (cfg.raw_path.empty()) {
        throw ConfigError("prepare needs a raw interaction file (--raw or key 'raw')");
    }
    const RawInteractions raw = load_interactions(cfg.raw_path);
    const RawInteractions core = k_core_filter(raw, cfg.k_user, cfg.k_item);
    const InteractionDataset ds = split_per_user(core, cfg.ratios, cfg.train.seed);
    write_split(ds, cfg.out_dir, {cfg.prepare_hash(), cfg.train.seed, kVersion});
    std::cout << "prepared " << core.records.size() << " interactions (" << ds.num_users << " users, "
              << ds.num_items << " items): train=" << ds.train.size() << " val=" << ds.val.size()
              << " test=" << ds.test.size() << " -> " << cfg.out_dir.string() << '\n';
    return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& resume) {
    const InteractionDataset ds = load_split(cfg);
    const BipartiteGraph graph = build_graph(ds);
    const ArtifactStamp stamp = stamp_for(cfg);
    fs::create_directories(cfg.out_dir);
    write_metadata(cfg, cfg.out_dir / "run.json");

    const fs::path history_path = cfg.out_dir / "history.csv";
    const fs::path last_path = cfg.out_dir / "last.ckpt";
    std::ofstream history(history_path);
    if (!history) {
        throw DataError("cannot write " + history_path.string());
    }
    write_stamp_comment(history, stamp);
    history << "epoch,bpr,nl_user,nl_item,reg,total,val_ndcg@10,seconds\n";

    Trainer* active = nullptr;
    TrainHooks hooks;
    hooks.on_epoch = [&](const EpochRecord& rec) {
        history << format_history_row(rec) << '\n' << std::flush;
        save_checkpoint(active->checkpoint(), last_path);
        std::cerr << "epoch " << rec.epoch << " total=" << rec.total << " val_ndcg@10=" << rec.val_ndcg10 << '\n';
    };
    Trainer trainer(ds, graph, cfg.train, hooks);
    active = &trainer;
    if (!resume.empty()) {
        trainer.restore(load_checkpoint(resume));
        for (const auto& rec : trainer.history()) {
            history << format_history_row(rec) << '\n';
        }
        history.flush();
    }
    const TrainedModel model = trainer.run();

    Checkpoint best = trainer.checkpoint();
    best.state = model.best_state;
    best.epoch = model.best_epoch;
    save_checkpoint(best, cfg.out_dir / "best.ckpt");

    const LayerStack stack = propagate(model.best_state, trainer.adjacency(), cfg.train.num_layers);
    const MetricReport val = evaluate(stack, ds, Phase::val, cfg.train.eval_ks);
    const MetricReport test = evaluate(stack, ds, Phase::test, cfg.train.eval_ks);
    write_metric_report(val, {stamp, Phase::val, model.best_epoch}, cfg.out_dir / "val_metrics.json");
    write_metric_report(test, {stamp, Phase::test, model.best_epoch}, cfg.out_dir / "test_metrics.json");
    const Index k = cfg.train.eval_ks.front();
    std::cout << "best epoch " << model.best_epoch << " of " << model.epochs_run << "; test ndcg@" << k << "="
              << test.ndcg(k) << '\n';
    return 0;
}

Checkpoint load_matching_checkpoint(const RunConfig& cfg, const std::string& path) {
    Checkpoint ckpt = load_checkpoint(path);
    if (ckpt.config_hash != cfg.hash()) {
        throw ConfigError("checkpoint " + path + " was written under config " + hash_hex(ckpt.config_hash) +
                          ", current config is " + hash_hex(cfg.hash()));
    }
    return ckpt;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint, const std::string& phase_name) {
    const Phase phase = phase_name == "val" ? Phase::val : Phase::test;
    if (phase_name != "val" && phase_name != "test") {
        throw ConfigError("--phase must be val or test");
    }
    const Checkpoint ckpt = load_matching_checkpoint(cfg, checkpoint);
    const InteractionDataset ds = load_split(cfg);
    const BipartiteGraph graph = build_graph(ds);
    const LayerStack stack = propagate(ckpt.state, normalize(graph), cfg.train.num_layers);
    const MetricReport report = evaluate(stack, ds, phase, cfg.train.eval_ks);
    fs::create_directories(cfg.out_dir);
    const fs::path path = cfg.out_dir / (to_string(phase) + "_metrics.json");
    write_metric_report(report, {stamp_for(cfg), phase, ckpt.epoch}, path);
    for (const auto& m : report.at) {
        std::cout << "recall@" << m.k << "=" << m.recall << " ndcg@" << m.k << "=" << m.ndcg << '\n';
    }
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::vector<std::string>& grid) {
    std::vector<GridAxis> axes;
    for (const auto& g : grid) {
        axes.push_back(parse_grid_axis(g));
    }
    const InteractionDataset ds = load_split(cfg);
    const BipartiteGraph graph = build_graph(ds);
    const SweepResult result = grid_sweep(ds, graph, cfg.train, axes);
    fs::create_directories(cfg.out_dir);
    const ArtifactStamp stamp = stamp_for(cfg);
    write_sweep_csv(result, cfg.train.eval_ks, cfg.out_dir / "sweep.csv", stamp);
    write_sweep_skips(result, cfg.out_dir / "sweep_skipped.csv", stamp);
    std::cout << result.cells.size() << " cells trained, " << result.skipped.size() << " skipped\n";
    return 0;
}

int cmd_analyze(const RunConfig& cfg, const std::string& edges_path, Index layers) {
    InteractionDataset ds;
    std::uint64_t hash = cfg.hash();
    if (!edges_path.empty()) {
        const RawInteractions raw = load_interactions(edges_path);
        ds.ids = IdMap::from(raw);
        ds.num_users = static_cast<Index>(ds.ids.user_tokens.size());
        ds.num_items = static_cast<Index>(ds.ids.item_tokens.size());
        for (const auto& [u, i] : raw.records) {
            ds.train.push_back({ds.ids.user_index(u), ds.ids.item_index(i)});
        }
        hash = fnv1a64("edges=" + edges_path + "\nlayers=" + std::to_string(layers) + '\n');
    } else {
        ds = load_split(cfg);
    }
    const BipartiteGraph graph = build_graph(ds);
    const NormalizedAdjacency adj = normalize(graph);
    SpectrumOptions options;
    options.max_nodes = cfg.max_nodes;
    const SpectrumReport spectrum = eigendecompose(adj, options);
    const DecayCurves curves = decay_curves(spectrum, layers, options.eps_zero);
    const ArtifactStamp stamp{hash, cfg.train.seed, kVersion};
    fs::create_directories(cfg.out_dir);
    write_spectrum_csv(spectrum, cfg.out_dir / "spectrum.csv", stamp);
    write_curves_csv(curves, cfg.out_dir / "curves.csv", stamp);

    ComplexityInputs in;
    in.num_edges = graph.num_edges();
    in.batch_nodes = static_cast<std::uint64_t>(cfg.train.batch_size);
    in.num_layers = static_cast<std::uint64_t>(layers);
    in.dim = static_cast<std::uint64_t>(cfg.train.dim);
    in.groups = static_cast<std::uint64_t>(cfg.train.loss.groups);
    const ComplexityEstimate est = estimate_complexity(in);
    nlohmann::ordered_json j;
    j["version"] = kVersion;
    j["config_hash"] = hash_hex(hash);
    j["seed"] = cfg.train.seed;
    j["encoder_ops"] = est.encoder_ops;
    j["bpr_ops"] = est.bpr_ops;
    j["cl_ops_hetero"] = est.cl_ops_hetero;
    j["cl_ops_entire"] = est.cl_ops_entire;
    j["total_hetero"] = est.total_hetero;
    j["total_entire"] = est.total_entire;
    std::ofstream(cfg.out_dir / "complexity.json") << j.dump(2) << '\n';
    std::cout << "lambda_max=" << spectrum.lambda_max << " lambda_sub=" << spectrum.lambda_sub
              << " zero eigenvalues=" << spectrum.num_zero << '\n';
    return 0;
}

int cmd_export(const RunConfig& cfg, const std::string& checkpoint, const fs::path& out, bool base_only) {
    const Checkpoint ckpt = load_matching_checkpoint(cfg, checkpoint);
    const ArtifactStamp stamp = stamp_for(cfg);
    if (out.has_parent_path()) {
        fs::create_directories(out.parent_path());
    }
    if (base_only) {
        export_embeddings(ckpt.state.user0, ckpt.state.item0, out, stamp);
    } else {
        const InteractionDataset ds = load_split(cfg);
        const BipartiteGraph graph = build_graph(ds);
        const LayerStack stack = propagate(ckpt.state, normalize(graph), cfg.train.num_layers);
        export_embeddings(stack.readout_user, stack.readout_item, out, stamp);
    }
    std::cout << "wrote " << ckpt.state.user0.rows() + ckpt.state.item0.rows() << " rows to " << out.string()
              << '\n';
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Neighbor-layer contrastive graph collaborative filtering"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonFlags flags;
    std::string raw;
    std::optional<std::size_t> k_user;
    std::optional<std::size_t> k_item;
    std::string split;
    auto* prepare = app.add_subcommand("prepare", "k-core filter and split a raw interaction TSV");
    flags.attach(prepare);
    prepare->add_option("--raw", raw, "Raw user<TAB>item[<TAB>...] file");
    prepare->add_option("--k-user", k_user, "Minimum interactions per user");
    prepare->add_option("--k-item", k_item, "Minimum interactions per item");
    prepare->add_option("--split", split, "train,val,test ratios");

    std::string resume;
    auto* train_cmd = app.add_subcommand("train", "Train a model and evaluate the best epoch on test");
    flags.attach(train_cmd);
    train_cmd->add_option("--resume", resume, "Continue from a last.ckpt written by an earlier run");

    std::string checkpoint;
    std::string phase = "test";
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint with the all-rank protocol");
    flags.attach(eval_cmd);
    eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    eval_cmd->add_option("--phase", phase, "val or test");

    std::vector<std::string> grid;
    auto* sweep = app.add_subcommand("sweep", "Grid search over lambda1 x tau or layers x groups");
    flags.attach(sweep);
    sweep->add_option("--grid", grid, "Axis as name=v1,v2,... (repeatable)")->required();

    std::string edges;
    Index layers = 4;
    auto* analyze = app.add_subcommand("analyze", "Spectrum of the normalized adjacency and layer decay curves");
    flags.attach(analyze);
    analyze->add_option("--edges", edges, "Raw user<TAB>item file (instead of the configured split)");
    analyze->add_option("--layers", layers, "Number of layers for the decay curves");

    std::string export_out;
    bool base_only = false;
    auto* export_cmd = app.add_subcommand("export", "Dump embeddings as TSV for external plotting");
    flags.attach(export_cmd);
    export_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    export_cmd->add_option("--file", export_out, "Output TSV (default <out>/embeddings.tsv)");
    export_cmd->add_flag("--base", base_only, "Export layer-0 embeddings instead of the readout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfigError;
    }

    try {
        RunConfig cfg = flags.resolve();
        if (*prepare) {
            if (!raw.empty()) {
                cfg.raw_path = raw;
            }
            if (k_user) {
                cfg.k_user = *k_user;
            }
            if (k_item) {
                cfg.k_item = *k_item;
            }
            if (!split.empty()) {
                apply_config_value(cfg, "split", split);
            }
            return cmd_prepare(cfg);
        }
        if (*train_cmd) {
            return cmd_train(cfg, resume);
        }
        if (*eval_cmd) {
            return cmd_evaluate(cfg, checkpoint, phase);
        }
        if (*sweep) {
            return cmd_sweep(cfg, grid);
        }
        if (*analyze) {
            return cmd_analyze(cfg, edges, layers);
        }
        if (*export_cmd) {
            return cmd_export(cfg, checkpoint, export_out.empty() ? cfg.out_dir / "embeddings.tsv" : fs::path(export_out),
                              base_only);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitDataError;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumericError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitDataError;
    }
    return kExitConfigError;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("nlgcl");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace nlgcl
