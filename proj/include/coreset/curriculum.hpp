#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "coreset/matrix.hpp"
#include "coreset/pruner.hpp"
#include "coreset/selection.hpp"
#include "coreset/trainer.hpp"

namespace coreset {

struct CurriculumConfig {
    std::size_t budget_epochs = 0;  // full-dataset-equivalent epochs
    std::size_t warmup = 1;         // epochs before the first possible prune
    std::size_t prune_every = 1;    // post-warmup event grid spacing
    PruneConfig prune;
    std::vector<double> eta_sequence;  // per-event eta override; last entry
                                       // repeats if events outnumber entries
    std::size_t probe_every = 0;       // 0 = probe only at the final epoch
    std::size_t probe_k = 20;
    double val_fraction = 0.05;
    bool async_prune = false;  // prune on a worker during the event epoch
    std::uint64_t seed = 0;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    std::size_t sel_size = 0;     // rows trained on this epoch
    double train_loss = 0.0;
    double val_loss = 0.0;        // NaN when the val split is below one batch
    double probe_metric = 0.0;
    bool has_probe = false;
    bool prune_event = false;     // an event fired at the start of this epoch
};

struct RunHistory {
    std::vector<EpochRecord> records;
    std::vector<Selection> selections;  // one per event, original row indices
    std::vector<std::uint64_t> train_rows;
    std::vector<std::uint64_t> val_rows;
    EncoderParams final_params;
};

// Epochs needed to spend the same batch budget as `budget` full-data epochs
// when post-warmup epochs only see a `keep` fraction of the data:
// warmup + ceil((budget - warmup)/keep).
std::size_t epochs_for_budget(std::size_t budget, std::size_t warmup, double keep);

// Per-class held-out split: about `fraction` of each class (at least one row
// for any class with two or more, never the whole class), drawn by substream
// ("val") of `seed`.  Unlabeled data falls back to a plain random subset.
// Returns (train_rows, val_rows), both ascending.
std::pair<std::vector<std::uint64_t>, std::vector<std::uint64_t>>
stratified_split(const EmbeddingMatrix& data, double fraction, std::uint64_t seed);

// The full curriculum: warm-up on the training pool, then at every epoch e
// on the grid {e > warmup, (e - warmup) mod prune_every = 0} re-embed the
// pool with the current encoder and reselect; the event epoch itself still
// trains on the old selection and the new one applies from the next epoch.
// The held-out split never enters a selection.  Deterministic given
// config.seed (async and sync pruning produce identical selections).
RunHistory run_ssl_ord(const CurriculumConfig& config, const TrainerHyper& hyper,
                       std::size_t d_emb, const EmbeddingMatrix& data);

// History CSV: epoch,sel_size,train_loss,val_loss,probe_metric,prune_event.
// NaN losses and unprobed epochs serialize as empty fields; no timestamps,
// so identical runs write identical bytes.
void save_history_csv(const RunHistory& history, std::ostream& out);
void save_history_csv_file(const RunHistory& history,
                           const std::filesystem::path& path);

}  // namespace coreset
