#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "coreset/curriculum.hpp"
#include "coreset/errors.hpp"
#include "coreset/synth.hpp"

using namespace coreset;

namespace {

EmbeddingMatrix labeled_data(std::size_t n, std::uint64_t seed) {
    SynthConfig c;
    c.n = n;
    c.d = 4;
    c.m = 3;
    c.s = 1.0;
    c.sigma = 0.5;
    c.gamma = 8.0;
    c.seed = seed;
    return generate(c);
}

CurriculumConfig small_curriculum() {
    CurriculumConfig cfg;
    cfg.budget_epochs = 8;
    cfg.warmup = 2;
    cfg.prune_every = 2;
    cfg.prune.n_c = 40;
    cfg.prune.ks = {8, 4};
    cfg.prune.rho = 0.5;
    cfg.prune.restarts = 3;
    cfg.probe_every = 3;
    cfg.probe_k = 5;
    cfg.val_fraction = 0.1;
    cfg.seed = 77;
    return cfg;
}

TrainerHyper small_hyper() {
    TrainerHyper h;
    h.batch = 8;
    h.lr = 0.05;
    h.noise = 0.05;
    h.dropout = 0.1;
    return h;
}

bool subset_of(const std::vector<std::uint64_t>& sub,
               const std::vector<std::uint64_t>& super) {
    return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

}  // namespace

TEST_CASE("epochs_for_budget stretches the post-warmup phase") {
    CHECK(epochs_for_budget(200, 20, 0.5) == 380);
    CHECK(epochs_for_budget(200, 20, 0.25) == 740);
    CHECK(epochs_for_budget(30, 30, 0.5) == 30);   // all warmup
    CHECK(epochs_for_budget(50, 10, 1.0) == 50);   // keep-all changes nothing
    CHECK(epochs_for_budget(30, 10, 0.3) == 77);   // 10 + ceil(66.67)
    // exact quotients must not round up an extra epoch
    CHECK(epochs_for_budget(20, 10, 0.1) == 110);
    CHECK_THROWS_AS(epochs_for_budget(20, 10, 0.0), DataError);
    CHECK_THROWS_AS(epochs_for_budget(20, 10, 1.5), DataError);
    CHECK_THROWS_AS(epochs_for_budget(10, 20, 0.5), DataError);
}

TEST_CASE("stratified split reserves rows from every sizable class") {
    EmbeddingMatrix data;
    data.n = 17;
    data.d = 1;
    data.values.assign(17, 0.0f);
    data.labels.assign(17, 0);
    for (std::size_t i = 10; i < 16; ++i) data.labels[i] = 1;  // 6 rows
    data.labels[16] = 2;  // singleton class

    auto [train, val] = stratified_split(data, 0.2, 42);
    CHECK(val.size() == 3);  // 2 from class 0, 1 from class 1
    CHECK(train.size() == 14);
    CHECK(std::is_sorted(train.begin(), train.end()));
    CHECK(std::is_sorted(val.begin(), val.end()));

    // disjoint and complete
    std::vector<std::uint64_t> all(train);
    all.insert(all.end(), val.begin(), val.end());
    std::sort(all.begin(), all.end());
    for (std::uint64_t i = 0; i < 17; ++i) CHECK(all[i] == i);

    // the singleton class stays in train
    CHECK(std::find(val.begin(), val.end(), 16) == val.end());

    int val_class1 = 0;
    for (std::uint64_t i : val) {
        if (data.labels[i] == 1) ++val_class1;
    }
    CHECK(val_class1 == 1);

    auto [train2, val2] = stratified_split(data, 0.2, 42);
    CHECK(train2 == train);
    CHECK(val2 == val);
}

TEST_CASE("stratified split edge cases") {
    EmbeddingMatrix plain;
    plain.n = 20;
    plain.d = 1;
    plain.values.assign(20, 1.0f);

    auto [train, val] = stratified_split(plain, 0.25, 7);  // unlabeled
    CHECK(val.size() == 5);
    CHECK(train.size() == 15);

    auto [train0, val0] = stratified_split(plain, 0.0, 7);
    CHECK(val0.empty());
    CHECK(train0.size() == 20);

    CHECK_THROWS_AS(stratified_split(plain, 0.6, 7), DataError);
}

TEST_CASE("curriculum run follows the event grid") {
    EmbeddingMatrix data = labeled_data(120, 5);
    CurriculumConfig cfg = small_curriculum();
    cfg.eta_sequence = {0.2, 0.8};
    RunHistory h = run_ssl_ord(cfg, small_hyper(), 3, data);

    // 2 + ceil(6 / 0.5) epochs
    REQUIRE(h.records.size() == 14);
    CHECK(h.train_rows.size() + h.val_rows.size() == 120);

    // the split rule, recomputed: clamp(round(0.1 * count), 1, count - 1)
    std::vector<std::size_t> class_counts(3, 0);
    for (std::uint32_t l : data.labels) class_counts[l] += 1;
    std::size_t expect_val = 0;
    for (std::size_t c : class_counts) {
        if (c < 2) continue;
        const auto want = static_cast<std::size_t>(
            std::llround(0.1 * static_cast<double>(c)));
        expect_val += std::min(std::max<std::size_t>(want, 1), c - 1);
    }
    CHECK(h.val_rows.size() == expect_val);

    // events at e > 2 with (e - 2) % 2 == 0
    std::vector<std::size_t> event_epochs;
    for (const EpochRecord& r : h.records) {
        if (r.prune_event) event_epochs.push_back(r.epoch);
    }
    CHECK(event_epochs == std::vector<std::size_t>{4, 6, 8, 10, 12, 14});
    REQUIRE(h.selections.size() == 6);

    const std::size_t pool = h.train_rows.size();
    const std::size_t kept =
        static_cast<std::size_t>(std::llround(0.5 * static_cast<double>(pool)));

    // warmup and the first event epoch train on the full pool; the new
    // selection only applies from the following epoch
    for (std::size_t e = 1; e <= 4; ++e) CHECK(h.records[e - 1].sel_size == pool);
    for (std::size_t e = 5; e <= 14; ++e) CHECK(h.records[e - 1].sel_size == kept);

    for (std::size_t k = 0; k < h.selections.size(); ++k) {
        const Selection& sel = h.selections[k];
        CHECK(sel.provenance.epoch == 4 + 2 * k);
        CHECK(sel.size() == kept);
        // eta sequence: first entry, then the last entry repeats
        CHECK(sel.provenance.eta == (k == 0 ? 0.2 : 0.8));
        // selections are original dataset rows from the train pool only
        CHECK(subset_of(sel.indices.indices, h.train_rows));
    }

    // probes at multiples of 3 and at the final epoch
    for (const EpochRecord& r : h.records) {
        const bool expect = r.epoch % 3 == 0 || r.epoch == 14;
        CHECK(r.has_probe == expect);
        if (r.has_probe) {
            CHECK(r.probe_metric >= 0.0);
            CHECK(r.probe_metric <= 1.0);
        }
    }

    // val split is big enough for one batch here, so losses are recorded
    for (const EpochRecord& r : h.records) CHECK(std::isfinite(r.val_loss));
}

TEST_CASE("async and sync pruning produce identical runs") {
    EmbeddingMatrix data = labeled_data(120, 9);
    CurriculumConfig cfg = small_curriculum();
    RunHistory sync = run_ssl_ord(cfg, small_hyper(), 3, data);
    cfg.async_prune = true;
    RunHistory async = run_ssl_ord(cfg, small_hyper(), 3, data);

    REQUIRE(sync.records.size() == async.records.size());
    for (std::size_t i = 0; i < sync.records.size(); ++i) {
        CHECK(sync.records[i].train_loss == async.records[i].train_loss);
        CHECK(sync.records[i].val_loss == async.records[i].val_loss);
        CHECK(sync.records[i].sel_size == async.records[i].sel_size);
    }
    REQUIRE(sync.selections.size() == async.selections.size());
    for (std::size_t k = 0; k < sync.selections.size(); ++k) {
        CHECK(sync.selections[k].indices.indices ==
              async.selections[k].indices.indices);
    }
    CHECK(sync.final_params.w == async.final_params.w);
}

TEST_CASE("keep-everything pruning does not disturb training") {
    EmbeddingMatrix data = labeled_data(80, 13);
    CurriculumConfig cfg = small_curriculum();
    cfg.budget_epochs = 5;
    cfg.prune.rho = 1.0;
    cfg.prune.n_c = 30;
    RunHistory h = run_ssl_ord(cfg, small_hyper(), 3, data);

    REQUIRE(h.records.size() == 5);  // keep = 1: no stretch
    for (const EpochRecord& r : h.records) {
        CHECK(r.sel_size == h.train_rows.size());
    }
    REQUIRE(h.selections.size() == 1);  // event at epoch 4
    CHECK(h.selections[0].indices.indices == h.train_rows);
}

TEST_CASE("val loss is NaN when the holdout cannot fill a batch") {
    EmbeddingMatrix data = labeled_data(120, 21);
    CurriculumConfig cfg = small_curriculum();
    TrainerHyper hyper = small_hyper();
    hyper.batch = 16;  // val split holds only 12 rows
    RunHistory h = run_ssl_ord(cfg, hyper, 3, data);
    for (const EpochRecord& r : h.records) CHECK(std::isnan(r.val_loss));
}

TEST_CASE("history csv pins its format") {
    EmbeddingMatrix data = labeled_data(120, 5);
    CurriculumConfig cfg = small_curriculum();
    RunHistory h = run_ssl_ord(cfg, small_hyper(), 3, data);

    std::ostringstream out;
    save_history_csv(h, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,sel_size,train_loss,val_loss,probe_metric,prune_event");
    std::size_t rows = 0;
    std::size_t events = 0;
    while (std::getline(in, line)) {
        ++rows;
        REQUIRE(std::count(line.begin(), line.end(), ',') == 5);
        if (line.back() == '1') ++events;
        // epoch 1 has no probe: its probe field is empty
        if (rows == 1) {
            const auto pos = line.rfind(",0");
            REQUIRE(line.size() > 2);
            CHECK(pos == line.size() - 2);
            CHECK(line.find(",,0") != std::string::npos);
        }
    }
    CHECK(rows == h.records.size());
    CHECK(events == h.selections.size());

    // identical runs serialize identically
    RunHistory h2 = run_ssl_ord(cfg, small_hyper(), 3, data);
    std::ostringstream out2;
    save_history_csv(h2, out2);
    CHECK(out.str() == out2.str());
}

TEST_CASE("curriculum config validation") {
    CurriculumConfig cfg = small_curriculum();
    cfg.warmup = 0;
    CHECK_THROWS_AS(cfg.validate(), DataError);
    cfg = small_curriculum();
    cfg.prune_every = 0;
    CHECK_THROWS_AS(cfg.validate(), DataError);
    cfg = small_curriculum();
    cfg.budget_epochs = 1;  // < warmup
    CHECK_THROWS_AS(cfg.validate(), DataError);
    cfg = small_curriculum();
    cfg.eta_sequence = {0.5, 1.5};
    CHECK_THROWS_AS(cfg.validate(), DataError);
    cfg = small_curriculum();
    cfg.val_fraction = 0.6;
    CHECK_THROWS_AS(cfg.validate(), DataError);
    cfg = small_curriculum();
    cfg.probe_k = 0;
    CHECK_THROWS_AS(cfg.validate(), DataError);
}
