#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "coreset/errors.hpp"
#include "coreset/matrix.hpp"
#include "coreset/rng.hpp"

using namespace coreset;

namespace {

EmbeddingMatrix small_matrix() {
    EmbeddingMatrix m;
    m.n = 3;
    m.d = 2;
    m.values = {1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 6.0f};
    m.labels = {0, 1, 1};
    return m;
}

}  // namespace

TEST_CASE("validate accepts a well-formed matrix") {
    CHECK_NOTHROW(small_matrix().validate());
}

TEST_CASE("validate rejects size and content violations") {
    EmbeddingMatrix m = small_matrix();
    m.values.pop_back();
    CHECK_THROWS_AS(m.validate(), DataError);

    m = small_matrix();
    m.values[3] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(m.validate(), DataError);

    m = small_matrix();
    m.values[0] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(m.validate(), DataError);

    m = small_matrix();
    m.labels = {0, 1};
    CHECK_THROWS_AS(m.validate(), DataError);

    m = small_matrix();
    m.ids = {5, 5, 6};
    CHECK_THROWS_AS(m.validate(), DataError);

    m = small_matrix();
    m.d = 0;
    m.values.clear();
    m.labels.clear();
    CHECK_THROWS_AS(m.validate(), DataError);
}

TEST_CASE("take_rows copies rows with labels and ids") {
    EmbeddingMatrix m = small_matrix();
    m.ids = {10, 20, 30};
    const std::vector<std::uint64_t> pick = {0, 2};
    EmbeddingMatrix sub = m.take_rows(pick);
    CHECK(sub.n == 2);
    CHECK(sub.d == 2);
    CHECK(sub.values == std::vector<float>{1.0f, 2.0f, 5.0f, 6.0f});
    CHECK(sub.labels == std::vector<std::uint32_t>{0, 1});
    CHECK(sub.ids == std::vector<std::uint64_t>{10, 30});

    const std::vector<std::uint64_t> bad = {3};
    CHECK_THROWS_AS(m.take_rows(bad), DataError);
}

TEST_CASE("IndexSubset validates order and bounds") {
    IndexSubset s;
    s.indices = {0, 2, 5};
    CHECK_NOTHROW(s.validate(6));
    CHECK_THROWS_AS(s.validate(5), DataError);

    s.indices = {2, 2};
    CHECK_THROWS_AS(s.validate(5), DataError);

    s.indices = {3, 1};
    CHECK_THROWS_AS(s.validate(5), DataError);
}

TEST_CASE("random_subset returns everything when n_c = n") {
    SeededRng rng(5);
    IndexSubset s = random_subset(5, 5, rng);
    CHECK(s.indices == std::vector<std::uint64_t>{0, 1, 2, 3, 4});
}

TEST_CASE("random_subset rejects invalid sizes") {
    SeededRng rng(5);
    CHECK_THROWS_AS(random_subset(5, 6, rng), DataError);
    CHECK_THROWS_AS(random_subset(5, 0, rng), DataError);
}

TEST_CASE("random_subset is deterministic and sorted") {
    SeededRng a(77), b(77);
    IndexSubset s1 = random_subset(10000, 1000, a);
    IndexSubset s2 = random_subset(10000, 1000, b);
    CHECK(s1.indices == s2.indices);
    CHECK_NOTHROW(s1.validate(10000));
}

TEST_CASE("random_subset draws uniformly") {
    // n=10, n_c=3: every index should appear with frequency 0.3 +- 0.02.
    std::vector<int> hits(10, 0);
    const int trials = 10000;
    SeededRng root(4242);
    for (int t = 0; t < trials; ++t) {
        SeededRng rng = root.split("trial", static_cast<std::uint64_t>(t));
        IndexSubset s = random_subset(10, 3, rng);
        for (std::uint64_t idx : s.indices) hits[idx] += 1;
    }
    for (int h : hits) {
        const double freq = static_cast<double>(h) / trials;
        CHECK(freq > 0.28);
        CHECK(freq < 0.32);
    }
}
