#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "coreset/errors.hpp"
#include "coreset/eval.hpp"
#include "coreset/rng.hpp"

using namespace coreset;

namespace {

EmbeddingMatrix points_1d(std::vector<float> xs) {
    EmbeddingMatrix m;
    m.n = xs.size();
    m.d = 1;
    m.values = std::move(xs);
    return m;
}

}  // namespace

TEST_CASE("knn majority vote on a hand-checked instance") {
    // train: 0, 1, 2 -> class 0; 10, 11 -> class 1
    EmbeddingMatrix train = points_1d({0.0f, 1.0f, 2.0f, 10.0f, 11.0f});
    const std::vector<double> targets = {0, 0, 0, 1, 1};
    EmbeddingMatrix query = points_1d({1.0f, 10.5f, 6.9f});
    auto pred = knn_predict(train, targets, query, 3, ProbeTask::classification);
    REQUIRE(pred.size() == 3);
    CHECK(pred[0] == 0.0);  // neighbors 1, 0, 2
    CHECK(pred[1] == 1.0);  // neighbors 10, 11, 2 -> votes 2:1 for class 1
    // 6.9: neighbors are 10 (3.1), 11 (4.1), 2 (4.9) -> class 1
    CHECK(pred[2] == 1.0);
}

TEST_CASE("knn vote ties resolve to the smallest class id") {
    EmbeddingMatrix train = points_1d({0.0f, 1.0f, 10.0f, 11.0f});
    const std::vector<double> targets = {5, 5, 2, 2};
    EmbeddingMatrix query = points_1d({5.5f});
    // k = 4: two votes each for classes 5 and 2 -> the smaller id wins
    auto pred = knn_predict(train, targets, query, 4, ProbeTask::classification);
    CHECK(pred[0] == 2.0);
}

TEST_CASE("knn distance ties resolve to the lower train index") {
    // train points 1 and 3 are equidistant from the query at 2
    EmbeddingMatrix train = points_1d({1.0f, 3.0f, 50.0f});
    const std::vector<double> targets = {7, 9, 0};
    EmbeddingMatrix query = points_1d({2.0f});
    auto pred = knn_predict(train, targets, query, 1, ProbeTask::classification);
    CHECK(pred[0] == 7.0);  // index 0 beats index 1 on the tie
}

TEST_CASE("knn regression averages neighbor targets") {
    EmbeddingMatrix train = points_1d({0.0f, 1.0f, 2.0f, 100.0f});
    const std::vector<double> targets = {1.0, 2.0, 3.0, 50.0};
    EmbeddingMatrix query = points_1d({1.0f});
    auto pred = knn_predict(train, targets, query, 3, ProbeTask::regression);
    CHECK(pred[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("knn argument validation") {
    EmbeddingMatrix train = points_1d({0.0f, 1.0f});
    const std::vector<double> targets = {0, 1};
    EmbeddingMatrix query = points_1d({0.5f});
    CHECK_THROWS_AS(knn_predict(train, targets, query, 0, ProbeTask::classification),
                    DataError);
    CHECK_THROWS_AS(knn_predict(train, targets, query, 3, ProbeTask::classification),
                    DataError);
    const std::vector<double> short_targets = {0};
    CHECK_THROWS_AS(
        knn_predict(train, short_targets, query, 1, ProbeTask::classification),
        DataError);
}

TEST_CASE("probe reports accuracy and rejects overlapping splits") {
    EmbeddingMatrix train = points_1d({0.0f, 0.5f, 10.0f, 10.5f});
    train.ids = {1, 2, 3, 4};
    const std::vector<double> train_targets = {0, 0, 1, 1};
    EmbeddingMatrix test = points_1d({0.25f, 10.25f, 6.5f});
    test.ids = {5, 6, 7};
    const std::vector<double> test_targets = {0, 1, 0};

    ProbeReport r = probe(train, train_targets, test, test_targets, 2,
                          ProbeTask::classification);
    CHECK(r.k == 2);
    CHECK(r.train_size == 4);
    CHECK(r.test_size == 3);
    // queries 0 and 1 are classified correctly; 6.5's two nearest neighbors
    // are 10 and 10.5 (class 1), so it misses its class-0 target.
    CHECK(r.metric == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    test.ids = {5, 3, 7};  // id 3 is in train
    CHECK_THROWS_AS(
        probe(train, train_targets, test, test_targets, 2, ProbeTask::classification),
        DataError);
}

TEST_CASE("probe regression reports RMSE") {
    EmbeddingMatrix train = points_1d({0.0f, 2.0f});
    const std::vector<double> train_targets = {0.0, 2.0};
    EmbeddingMatrix test = points_1d({0.1f, 1.9f});
    const std::vector<double> test_targets = {1.0, 0.0};
    // k=1 predictions: 0 and 2 -> errors 1 and 2 -> RMSE = sqrt(2.5)
    ProbeReport r =
        probe(train, train_targets, test, test_targets, 1, ProbeTask::regression);
    CHECK(r.metric == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
}

TEST_CASE("balance entropy of a 75/25 split") {
    std::vector<std::uint32_t> labels(100, 0);
    for (std::size_t i = 75; i < 100; ++i) labels[i] = 1;
    BalanceReport r = balance_metrics({labels.data(), labels.size()}, 2);
    CHECK(r.class_counts == std::vector<std::uint64_t>{75, 25});
    CHECK(r.entropy == doctest::Approx(0.8112781245).epsilon(1e-4));
    // counts 75/25: mean 50, population sd 25 -> cv = 0.5
    CHECK(r.cv == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("balance counts missing classes as zeros") {
    std::vector<std::uint32_t> labels(100, 0);
    BalanceReport r = balance_metrics({labels.data(), labels.size()}, 2);
    CHECK(r.class_counts == std::vector<std::uint64_t>{100, 0});
    CHECK(r.entropy == doctest::Approx(0.0));
    CHECK(r.cv == doctest::Approx(1.0));  // mean 50, sd 50
}

TEST_CASE("balance with a single class has zero entropy by definition") {
    std::vector<std::uint32_t> labels(10, 0);
    BalanceReport r = balance_metrics({labels.data(), labels.size()}, 1);
    CHECK(r.entropy == 0.0);
    CHECK(r.cv == 0.0);  // one count equal to the mean

    CHECK_THROWS_AS(balance_metrics({labels.data(), labels.size()}, 0), DataError);
    std::vector<std::uint32_t> bad = {0, 3};
    CHECK_THROWS_AS(balance_metrics({bad.data(), bad.size()}, 2), DataError);
}

TEST_CASE("uniform labels maximize normalized entropy") {
    std::vector<std::uint32_t> labels;
    for (std::uint32_t c = 0; c < 4; ++c) {
        for (int i = 0; i < 25; ++i) labels.push_back(c);
    }
    BalanceReport r = balance_metrics({labels.data(), labels.size()}, 4);
    CHECK(r.entropy == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.cv == doctest::Approx(0.0));
}

TEST_CASE("redundancy counts near-duplicate points") {
    // two coincident points, one 0.05 away, one far
    EmbeddingMatrix emb = points_1d({0.0f, 0.0f, 0.05f, 10.0f});
    std::vector<std::uint32_t> labels = {0, 0, 0, 0};
    BalanceReport r = balance_metrics({labels.data(), labels.size()}, emb, 0.01, 1);
    CHECK(r.redundancy == doctest::Approx(0.5));  // only the coincident pair

    BalanceReport wide = balance_metrics({labels.data(), labels.size()}, emb, 0.1, 1);
    CHECK(wide.redundancy == doctest::Approx(0.75));  // 0.05 joins in

    EmbeddingMatrix lone = points_1d({1.0f});
    std::vector<std::uint32_t> one = {0};
    CHECK_THROWS_AS(balance_metrics({one.data(), 1}, lone, 0.1, 1), DataError);
}
