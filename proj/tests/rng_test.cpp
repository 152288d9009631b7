#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "coreset/errors.hpp"
#include "coreset/rng.hpp"

using namespace coreset;

TEST_CASE("identical seeds give identical streams") {
    SeededRng a(123456789);
    SeededRng b(123456789);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    SeededRng c(123456789), d(123456789);
    for (int i = 0; i < 100; ++i) {
        CHECK(c.next_double() == d.next_double());
        CHECK(c.next_normal() == d.next_normal());
    }
}

TEST_CASE("different seeds give different streams") {
    SeededRng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 100; ++i) {
        if (a.next_u64() == b.next_u64()) ++same;
    }
    CHECK(same == 0);
}

TEST_CASE("next_double lands in [0,1)") {
    SeededRng rng(7);
    for (int i = 0; i < 100000; ++i) {
        const double v = rng.next_double();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("next_below stays under bound and rejects bound 0") {
    SeededRng rng(11);
    for (int i = 0; i < 10000; ++i) {
        CHECK(rng.next_below(7) < 7);
    }
    for (int i = 0; i < 100; ++i) {
        CHECK(rng.next_below(1) == 0);
    }
    CHECK_THROWS_AS(rng.next_below(0), DataError);
}

TEST_CASE("next_below is close to uniform") {
    SeededRng rng(13);
    const int trials = 60000;
    std::vector<int> counts(6, 0);
    for (int i = 0; i < trials; ++i) counts[rng.next_below(6)] += 1;
    for (int c : counts) {
        CHECK(c > 9500);  // expectation 10000, generous 5% band
        CHECK(c < 10500);
    }
}

TEST_CASE("next_normal has standard moments") {
    SeededRng rng(17);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.next_normal();
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("split does not disturb the parent stream") {
    SeededRng a(99), b(99);
    (void)a.split("anything", 5);
    (void)a.split("more");
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("substreams with different tags or indices do not collide") {
    SeededRng root(42);
    SeededRng s1 = root.split("alpha", 0);
    SeededRng s2 = root.split("alpha", 1);
    SeededRng s3 = root.split("beta", 0);
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t v1 = s1.next_u64();
        const std::uint64_t v2 = s2.next_u64();
        const std::uint64_t v3 = s3.next_u64();
        CHECK(v1 != v2);
        CHECK(v1 != v3);
        CHECK(v2 != v3);
    }
}

TEST_CASE("split is reproducible") {
    SeededRng root(314);
    SeededRng a = root.split("epoch", 3);
    SeededRng b = root.split("epoch", 3);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("fnv1a64 matches published vectors") {
    CHECK(fnv1a64("") == 14695981039346656037ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("mix64 scrambles and is deterministic") {
    CHECK(mix64(0) == mix64(0));
    std::set<std::uint64_t> outs;
    for (std::uint64_t i = 0; i < 1000; ++i) outs.insert(mix64(i));
    CHECK(outs.size() == 1000);
}
