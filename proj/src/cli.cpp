#include "coreset/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "coreset/config.hpp"
#include "coreset/curriculum.hpp"
#include "coreset/errors.hpp"
#include "coreset/eval.hpp"
#include "coreset/io.hpp"
#include "coreset/pruner.hpp"
#include "coreset/rng.hpp"
#include "coreset/synth.hpp"
#include "coreset/trainer.hpp"

namespace coreset {

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_meta(const std::filesystem::path& emb_path, std::uint64_t seed,
                std::uint64_t config_hash,
                const std::vector<std::pair<std::string, std::string>>& extra) {
    std::filesystem::path meta = emb_path;
    meta += ".meta";
    atomic_write_file(meta, [&](std::ostream& out) {
        out << "# coreset artifact provenance\n";
        out << "# version=" << kVersion << "\n";
        out << "# seed=" << seed << "\n";
        out << "# config_hash=" << hex64(config_hash) << "\n";
        for (const auto& [k, v] : extra) out << "# " << k << "=" << v << "\n";
    });
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    double keep = -1.0;     // <0 = not set
    double discard = -1.0;  // <0 = not set
    double eta = -1.0;      // <0 = not set
    unsigned threads = 1;

    std::string config_text;  // loaded file contents ("" when defaults)
    std::uint64_t config_hash = 0;

    RunConfig load() {
        RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) throw DataError("cannot open config " + config_path);
            std::ostringstream buf;
            buf << in.rdbuf();
            config_text = buf.str();
            cfg = parse_config(config_text);
            config_hash = config_text_hash(config_text);
        } else {
            cfg = default_run_config();
        }
        if (keep >= 0.0) cfg.curriculum.prune.rho = keep;
        if (discard >= 0.0) cfg.curriculum.prune.rho = 1.0 - discard;
        if (eta >= 0.0) cfg.curriculum.prune.eta = eta;
        cfg.curriculum.prune.threads = threads;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_overrides) {
    cmd->add_option("--config", args.config_path, "config file path");
    cmd->add_option("--seed", args.seed, "root seed")->required();
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--threads", args.threads, "worker threads")
        ->check(CLI::PositiveNumber);
    if (with_overrides) {
        auto* keep = cmd->add_option("--keep", args.keep,
                                     "retained fraction override, (0,1]")
                         ->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--discard", args.discard,
                        "discarded fraction override, [0,1)")
            ->check(CLI::Range(0.0, 1.0))
            ->excludes(keep);
        cmd->add_option("--eta", args.eta, "sampling diversity override, [0,1]")
            ->check(CLI::Range(0.0, 1.0));
    }
}

std::filesystem::path ensure_out_dir(const std::string& out_dir) {
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

int run_synth(CommonArgs& args) {
    RunConfig cfg = args.load();
    SeededRng root(args.seed);
    cfg.synth.seed = root.split("synth").key();

    EmbeddingMatrix data = generate(cfg.synth);
    const auto dir = ensure_out_dir(args.out_dir);
    const auto path = dir / "dataset.emb";
    const std::uint64_t bytes = save_embeddings_file(data, path);
    write_meta(path, args.seed, args.config_hash,
               {{"kind", "dataset"},
                {"n", std::to_string(data.n)},
                {"d", std::to_string(data.d)},
                {"concepts", std::to_string(cfg.synth.m)}});
    std::cout << "wrote " << path.string() << " (" << bytes << " bytes, n=" << data.n
              << ", d=" << data.d << ")\n";
    return 0;
}

int run_prune(CommonArgs& args, const std::string& input) {
    RunConfig cfg = args.load();
    EmbeddingMatrix features = load_embeddings_file(input);

    PruneConfig pc = cfg.curriculum.prune;
    SeededRng root(args.seed);
    pc.seed = root.split("prune").key();

    Selection sel = prune(features, pc);
    sel.provenance.config_hash = args.config_hash;

    const auto dir = ensure_out_dir(args.out_dir);
    const auto path = dir / "selection.txt";
    save_selection_file(sel, path);
    std::cout << "wrote " << path.string() << " (" << sel.size() << " of "
              << features.n << " rows kept)\n";
    return 0;
}

int run_train(CommonArgs& args, const std::string& input) {
    RunConfig cfg = args.load();
    SeededRng root(args.seed);
    cfg.synth.seed = root.split("synth").key();
    cfg.curriculum.seed = root.split("curriculum").key();

    const auto dir = ensure_out_dir(args.out_dir);
    EmbeddingMatrix data;
    if (!input.empty()) {
        data = load_embeddings_file(input);
    } else {
        data = generate(cfg.synth);
        const auto dpath = dir / "dataset.emb";
        save_embeddings_file(data, dpath);
        write_meta(dpath, args.seed, args.config_hash,
                   {{"kind", "dataset"},
                    {"n", std::to_string(data.n)},
                    {"d", std::to_string(data.d)}});
    }

    RunHistory history = run_ssl_ord(cfg.curriculum, cfg.trainer, cfg.d_emb, data);

    atomic_write_file(dir / "history.csv", [&](std::ostream& out) {
        out << "# version=" << kVersion << "\n";
        out << "# seed=" << args.seed << "\n";
        out << "# config_hash=" << hex64(args.config_hash) << "\n";
        save_history_csv(history, out);
    });

    for (Selection& sel : history.selections) {
        sel.provenance.config_hash = args.config_hash;
        char name[32];
        std::snprintf(name, sizeof name, "selection_e%04llu.txt",
                      static_cast<unsigned long long>(sel.provenance.epoch));
        save_selection_file(sel, dir / name);
    }

    {
        const EncoderParams& p = history.final_params;
        EmbeddingMatrix w;
        w.n = p.d_in;
        w.d = p.d_emb;
        w.values.assign(p.w.begin(), p.w.end());
        const auto wpath = dir / "encoder.emb";
        save_embeddings_file(w, wpath);
        write_meta(wpath, args.seed, args.config_hash,
                   {{"kind", "encoder"},
                    {"d_in", std::to_string(p.d_in)},
                    {"d_emb", std::to_string(p.d_emb)}});
    }

    {
        EmbeddingMatrix features = embed(history.final_params, data);
        const auto epath = dir / "embeddings.emb";
        save_embeddings_file(features, epath);
        write_meta(epath, args.seed, args.config_hash, {{"kind", "embeddings"}});
    }

    double final_probe = -1.0;
    for (auto it = history.records.rbegin(); it != history.records.rend(); ++it) {
        if (it->has_probe) {
            final_probe = it->probe_metric;
            break;
        }
    }
    std::cout << "trained " << history.records.size() << " epochs, "
              << history.selections.size() << " prune events";
    if (final_probe >= 0.0) std::cout << ", final probe " << final_probe;
    std::cout << "\n";
    return 0;
}

int run_probe(const std::string& train_path, const std::string& test_path,
              std::size_t k, const std::string& task_name,
              const std::string& out_dir) {
    EmbeddingMatrix train_emb = load_embeddings_file(train_path);
    EmbeddingMatrix test_emb = load_embeddings_file(test_path);
    if (!train_emb.has_labels() || !test_emb.has_labels()) {
        throw DataError("probe: both inputs need labels");
    }
    const ProbeTask task = task_name == "regression" ? ProbeTask::regression
                                                     : ProbeTask::classification;
    std::vector<double> train_targets(train_emb.labels.begin(),
                                      train_emb.labels.end());
    std::vector<double> test_targets(test_emb.labels.begin(),
                                     test_emb.labels.end());
    ProbeReport report =
        probe(train_emb, train_targets, test_emb, test_targets, k, task);

    const char* metric_name =
        task == ProbeTask::classification ? "accuracy" : "rmse";
    std::cout << "task=" << task_name << " k=" << report.k << " " << metric_name
              << "=" << format_double(report.metric) << " train=" << report.train_size
              << " test=" << report.test_size << "\n";
    if (!out_dir.empty()) {
        const auto dir = ensure_out_dir(out_dir);
        atomic_write_file(dir / "probe.csv", [&](std::ostream& out) {
            out << "# version=" << kVersion << "\n";
            out << "task,k,metric,train_size,test_size\n";
            out << task_name << ',' << report.k << ','
                << format_double(report.metric) << ',' << report.train_size << ','
                << report.test_size << "\n";
        });
    }
    return 0;
}

int run_stats(const std::string& input, const std::string& selection_path,
              double eps, const std::string& out_dir) {
    EmbeddingMatrix data = load_embeddings_file(input);
    if (!data.has_labels()) throw DataError("stats: input needs labels");

    std::size_t total_classes = 0;
    for (std::uint32_t l : data.labels) {
        total_classes = std::max<std::size_t>(total_classes, l + 1);
    }

    EmbeddingMatrix rows;
    if (!selection_path.empty()) {
        Selection sel = load_selection_file(selection_path);
        sel.indices.validate(data.n);
        rows = data.take_rows(sel.indices.indices);
    } else {
        rows = data;
    }

    BalanceReport report =
        balance_metrics(rows.labels, rows, eps, total_classes);
    std::cout << "n=" << rows.n << " classes=" << total_classes
              << " entropy=" << format_double(report.entropy)
              << " cv=" << format_double(report.cv)
              << " redundancy=" << format_double(report.redundancy) << "\n";
    if (!out_dir.empty()) {
        const auto dir = ensure_out_dir(out_dir);
        atomic_write_file(dir / "stats.csv", [&](std::ostream& out) {
            out << "# version=" << kVersion << "\n";
            out << "n,classes,entropy,cv,redundancy\n";
            out << rows.n << ',' << total_classes << ','
                << format_double(report.entropy) << ',' << format_double(report.cv)
                << ',' << format_double(report.redundancy) << "\n";
        });
    }
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"dataset curation via clustering-based coreset selection"};
    app.require_subcommand(1);

    CommonArgs synth_args;
    CLI::App* synth_cmd =
        app.add_subcommand("synth", "generate a synthetic labeled dataset");
    add_common(synth_cmd, synth_args, /*with_overrides=*/false);

    CommonArgs train_args;
    std::string train_input;
    CLI::App* train_cmd =
        app.add_subcommand("train", "run the full pruning curriculum");
    add_common(train_cmd, train_args, /*with_overrides=*/true);
    train_cmd->add_option("--input", train_input,
                          "embedding file to train on (default: synthesize)");

    CommonArgs prune_args;
    std::string prune_input;
    CLI::App* prune_cmd =
        app.add_subcommand("prune", "select a balanced subset of an embedding file");
    add_common(prune_cmd, prune_args, /*with_overrides=*/true);
    prune_cmd->add_option("--input", prune_input, "embedding file to prune")
        ->required();

    std::string probe_train, probe_test, probe_task = "classification";
    std::string probe_out;
    std::size_t probe_k = 20;
    CLI::App* probe_cmd = app.add_subcommand("probe", "k-NN probe of embeddings");
    probe_cmd->add_option("--train-emb", probe_train, "labeled train embeddings")
        ->required();
    probe_cmd->add_option("--test-emb", probe_test, "labeled test embeddings")
        ->required();
    probe_cmd->add_option("--k", probe_k, "neighbor count")
        ->check(CLI::PositiveNumber);
    probe_cmd->add_option("--task", probe_task, "classification|regression")
        ->check(CLI::IsMember({"classification", "regression"}));
    probe_cmd->add_option("--out", probe_out, "optional report directory");

    std::string stats_input, stats_selection, stats_out;
    double stats_eps = 0.0;
    CLI::App* stats_cmd =
        app.add_subcommand("stats", "balance and redundancy of a dataset");
    stats_cmd->add_option("--input", stats_input, "labeled embedding file")
        ->required();
    stats_cmd->add_option("--selection", stats_selection,
                          "restrict to a selection file");
    stats_cmd->add_option("--eps", stats_eps, "redundancy radius")
        ->check(CLI::NonNegativeNumber);
    stats_cmd->add_option("--out", stats_out, "optional report directory");

    CLI::App* version_cmd = app.add_subcommand("version", "print version");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        std::cerr << e.what() << "\n" << app.help() << std::flush;
        return 1;
    }

    try {
        if (version_cmd->parsed()) {
            std::cout << "coreset " << kVersion << "\n";
            return 0;
        }
        if (synth_cmd->parsed()) return run_synth(synth_args);
        if (train_cmd->parsed()) return run_train(train_args, train_input);
        if (prune_cmd->parsed()) return run_prune(prune_args, prune_input);
        if (probe_cmd->parsed()) {
            return run_probe(probe_train, probe_test, probe_k, probe_task, probe_out);
        }
        if (stats_cmd->parsed()) {
            return run_stats(stats_input, stats_selection, stats_eps, stats_out);
        }
        std::cerr << app.help() << std::flush;
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args);
}

}  // namespace coreset
