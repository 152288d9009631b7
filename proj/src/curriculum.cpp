#include "coreset/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <ostream>

#include "coreset/errors.hpp"
#include "coreset/eval.hpp"
#include "coreset/io.hpp"
#include "coreset/rng.hpp"

namespace coreset {

void CurriculumConfig::validate() const {
    if (warmup == 0) throw DataError("curriculum: warmup must be >= 1");
    if (prune_every == 0) throw DataError("curriculum: prune_every must be >= 1");
    if (budget_epochs < warmup) {
        throw DataError("curriculum: budget must be >= warmup");
    }
    for (double eta : eta_sequence) {
        if (!(eta >= 0.0) || eta > 1.0) {
            throw DataError("curriculum: eta_sequence values must be in [0,1]");
        }
    }
    if (!(val_fraction >= 0.0) || val_fraction > 0.5) {
        throw DataError("curriculum: val_fraction must be in [0, 0.5]");
    }
    if (probe_k == 0) throw DataError("curriculum: probe_k must be >= 1");
}

std::size_t epochs_for_budget(std::size_t budget, std::size_t warmup, double keep) {
    if (!(keep > 0.0)) throw DataError("epochs_for_budget: keep must be > 0");
    if (keep > 1.0) throw DataError("epochs_for_budget: keep must be <= 1");
    if (warmup > budget) {
        throw DataError("epochs_for_budget: warmup exceeds budget");
    }
    const double stretched = static_cast<double>(budget - warmup) / keep;
    // Guard against round-off pushing an exact quotient over the next integer.
    return warmup + static_cast<std::size_t>(std::ceil(stretched - 1e-9));
}

std::pair<std::vector<std::uint64_t>, std::vector<std::uint64_t>>
stratified_split(const EmbeddingMatrix& data, double fraction, std::uint64_t seed) {
    data.validate();
    if (!(fraction >= 0.0) || fraction > 0.5) {
        throw DataError("stratified_split: fraction must be in [0, 0.5]");
    }
    std::vector<std::uint64_t> val;
    SeededRng rng = SeededRng(seed).split("val");
    if (fraction > 0.0) {
        std::vector<std::vector<std::uint64_t>> groups;
        if (data.has_labels()) {
            std::map<std::uint32_t, std::vector<std::uint64_t>> by_class;
            for (std::size_t i = 0; i < data.n; ++i) {
                by_class[data.labels[i]].push_back(i);
            }
            for (auto& entry : by_class) groups.push_back(std::move(entry.second));
        } else {
            groups.emplace_back(data.n);
            for (std::size_t i = 0; i < data.n; ++i) groups.back()[i] = i;
        }
        for (auto& rows : groups) {
            if (rows.size() < 2) continue;  // never strand a singleton class
            std::size_t want = static_cast<std::size_t>(
                std::llround(fraction * static_cast<double>(rows.size())));
            want = std::max<std::size_t>(want, 1);
            want = std::min(want, rows.size() - 1);
            for (std::size_t i = rows.size(); i > 1; --i) {
                const std::uint64_t j = rng.next_below(i);
                std::swap(rows[i - 1], rows[j]);
            }
            val.insert(val.end(), rows.begin(), rows.begin() + want);
        }
        std::sort(val.begin(), val.end());
    }
    std::vector<std::uint64_t> train;
    train.reserve(data.n - val.size());
    std::size_t vpos = 0;
    for (std::uint64_t i = 0; i < data.n; ++i) {
        if (vpos < val.size() && val[vpos] == i) {
            ++vpos;
        } else {
            train.push_back(i);
        }
    }
    return {std::move(train), std::move(val)};
}

namespace {

// Map pool-relative selection indices back to original dataset rows.
Selection map_to_original(Selection sel, const std::vector<std::uint64_t>& pool) {
    for (std::uint64_t& idx : sel.indices.indices) {
        idx = pool[static_cast<std::size_t>(idx)];
    }
    return sel;
}

double probe_accuracy(const EncoderParams& params, const EmbeddingMatrix& data,
                      const std::vector<std::uint64_t>& train_rows,
                      const std::vector<std::uint64_t>& val_rows, std::size_t k) {
    EmbeddingMatrix features = embed(params, data);
    EmbeddingMatrix train_emb = features.take_rows(train_rows);
    EmbeddingMatrix test_emb = features.take_rows(val_rows);
    std::vector<double> train_targets(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
        train_targets[i] = static_cast<double>(data.labels[train_rows[i]]);
    }
    std::vector<double> test_targets(val_rows.size());
    for (std::size_t i = 0; i < val_rows.size(); ++i) {
        test_targets[i] = static_cast<double>(data.labels[val_rows[i]]);
    }
    const std::size_t k_eff = std::min(k, train_rows.size());
    ProbeReport report = probe(train_emb, train_targets, test_emb, test_targets,
                               k_eff, ProbeTask::classification);
    return report.metric;
}

}  // namespace

RunHistory run_ssl_ord(const CurriculumConfig& config, const TrainerHyper& hyper,
                       std::size_t d_emb, const EmbeddingMatrix& data) {
    config.validate();
    data.validate();

    RunHistory history;
    auto split = stratified_split(data, config.val_fraction, config.seed);
    history.train_rows = std::move(split.first);
    history.val_rows = std::move(split.second);
    const std::vector<std::uint64_t>& pool = history.train_rows;
    if (pool.empty()) throw DataError("curriculum: empty training pool");

    const std::size_t total =
        epochs_for_budget(config.budget_epochs, config.warmup, config.prune.rho);

    SeededRng root(config.seed);
    SeededRng init_rng = root.split("init");
    EncoderParams params = init_encoder(data.d, d_emb, hyper, init_rng);

    MatrixRows rows(data);
    std::vector<std::uint64_t> active(pool);  // original indices
    const bool can_probe = data.has_labels() && !history.val_rows.empty();
    std::size_t event_count = 0;

    for (std::size_t e = 1; e <= total; ++e) {
        EpochRecord rec;
        rec.epoch = e;
        rec.sel_size = active.size();
        rec.prune_event =
            e > config.warmup && (e - config.warmup) % config.prune_every == 0;

        std::future<Selection> pending;
        if (rec.prune_event) {
            PruneConfig pc = config.prune;
            if (!config.eta_sequence.empty()) {
                const std::size_t slot =
                    std::min(event_count, config.eta_sequence.size() - 1);
                pc.eta = config.eta_sequence[slot];
            }
            pc.seed = root.split("prune", event_count).key();
            ++event_count;

            // Snapshot features with the params the epoch starts from.
            EmbeddingMatrix features = embed(params, data).take_rows(pool);
            if (config.async_prune) {
                pending = std::async(
                    std::launch::async,
                    [feats = std::move(features), pc]() { return prune(feats, pc); });
            } else {
                std::promise<Selection> ready;
                ready.set_value(prune(features, pc));
                pending = ready.get_future();
            }
        }

        SeededRng epoch_rng = root.split("epoch", e);
        rec.train_loss = train_epoch(params, rows, active, epoch_rng);

        if (history.val_rows.size() >= params.hyper.batch) {
            SeededRng val_rng = root.split("val_eval", e);
            rec.val_loss = evaluate_loss(params, rows, history.val_rows, val_rng);
        } else {
            rec.val_loss = std::numeric_limits<double>::quiet_NaN();
        }

        const bool probe_now =
            can_probe && (e == total ||
                          (config.probe_every > 0 && e % config.probe_every == 0));
        if (probe_now) {
            rec.probe_metric = probe_accuracy(params, data, active,
                                              history.val_rows, config.probe_k);
            rec.has_probe = true;
        }

        if (pending.valid()) {
            Selection sel = map_to_original(pending.get(), pool);
            sel.provenance.epoch = e;
            active = sel.indices.indices;
            history.selections.push_back(std::move(sel));
        }
        history.records.push_back(rec);
    }

    history.final_params = std::move(params);
    return history;
}

void save_history_csv(const RunHistory& history, std::ostream& out) {
    out << "epoch,sel_size,train_loss,val_loss,probe_metric,prune_event\n";
    for (const EpochRecord& rec : history.records) {
        out << rec.epoch << ',' << rec.sel_size << ','
            << format_double(rec.train_loss) << ',';
        if (!std::isnan(rec.val_loss)) out << format_double(rec.val_loss);
        out << ',';
        if (rec.has_probe) out << format_double(rec.probe_metric);
        out << ',' << (rec.prune_event ? 1 : 0) << "\n";
    }
    if (!out) throw DataError("history csv: sink write failure");
}

void save_history_csv_file(const RunHistory& history,
                           const std::filesystem::path& path) {
    atomic_write_file(path, [&](std::ostream& out) { save_history_csv(history, out); });
}

}  // namespace coreset
