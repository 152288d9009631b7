#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "coreset/errors.hpp"
#include "coreset/synth.hpp"

using namespace coreset;

namespace {

SynthConfig base_config() {
    SynthConfig c;
    c.n = 100;
    c.d = 4;
    c.m = 5;
    c.s = 1.0;
    c.sigma = 1.0;
    c.gamma = 8.0;
    c.seed = 42;
    return c;
}

double pair_distance(const std::vector<double>& means, std::size_t d,
                     std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = means[a * d + j] - means[b * d + j];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

}  // namespace

TEST_CASE("zipf proportions match the closed form") {
    const auto p = zipf_proportions(3, 1.0);
    REQUIRE(p.size() == 3);
    CHECK(p[0] == doctest::Approx(6.0 / 11.0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(3.0 / 11.0).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(2.0 / 11.0).epsilon(1e-12));
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zipf exponent zero is uniform") {
    const auto p = zipf_proportions(4, 0.0);
    for (double v : p) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("zipf rejects bad arguments") {
    CHECK_THROWS_AS(zipf_proportions(0, 1.0), DataError);
    CHECK_THROWS_AS(zipf_proportions(3, -0.5), DataError);
}

TEST_CASE("concept means are equidistant when d >= m") {
    SynthConfig c = base_config();
    c.m = 4;
    c.d = 6;
    c.sigma = 2.0;
    c.gamma = 8.0;  // sep = 16
    const auto means = concept_means(c);
    REQUIRE(means.size() == 4 * 6);
    CHECK(means[0 * 6 + 0] == doctest::Approx(16.0 / std::sqrt(2.0)).epsilon(1e-12));
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = a + 1; b < 4; ++b) {
            CHECK(pair_distance(means, 6, a, b) == doctest::Approx(16.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("concept means fall back to a line when d < m") {
    SynthConfig c = base_config();
    c.m = 5;
    c.d = 2;
    c.sigma = 1.0;
    c.gamma = 4.0;  // sep = 4
    const auto means = concept_means(c);
    for (std::size_t j = 0; j < 5; ++j) {
        CHECK(means[j * 2 + 0] == doctest::Approx(4.0 * j));
        CHECK(means[j * 2 + 1] == 0.0);
    }
    // adjacent pairs realize the minimum separation
    CHECK(pair_distance(means, 2, 0, 1) == doctest::Approx(4.0));
    CHECK(pair_distance(means, 2, 0, 4) == doctest::Approx(16.0));
}

TEST_CASE("noiseless configs still separate concepts") {
    SynthConfig c = base_config();
    c.sigma = 0.0;
    c.gamma = 3.0;
    const auto means = concept_means(c);  // sep = gamma alone
    CHECK(pair_distance(means, c.d, 0, 1) == doctest::Approx(3.0).epsilon(1e-12));

    c.n = 20;
    EmbeddingMatrix m = generate(c);
    // rows sit exactly on their concept mean
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < m.d; ++j) {
            CHECK(m.values[i * m.d + j] ==
                  static_cast<float>(means[m.labels[i] * c.d + j]));
        }
    }
}

TEST_CASE("generated labels follow the zipf law") {
    SynthConfig c = base_config();
    c.n = 60000;
    EmbeddingMatrix m = generate(c);
    REQUIRE(m.labels.size() == c.n);
    const auto p = zipf_proportions(c.m, c.s);
    std::vector<std::size_t> counts(c.m, 0);
    for (std::uint32_t l : m.labels) {
        REQUIRE(l < c.m);
        counts[l] += 1;
    }
    for (std::size_t j = 0; j < c.m; ++j) {
        const double freq = static_cast<double>(counts[j]) / c.n;
        CHECK(std::abs(freq - p[j]) < 0.01);
    }
}

TEST_CASE("generated rows scatter around their concept mean") {
    SynthConfig c = base_config();
    c.n = 60000;
    EmbeddingMatrix m = generate(c);
    const auto means = concept_means(c);
    // concept 0 dominates (~44%); its sample mean and variance must match
    std::vector<double> sum(c.d, 0.0), sumsq(c.d, 0.0);
    std::size_t n0 = 0;
    for (std::size_t i = 0; i < m.n; ++i) {
        if (m.labels[i] != 0) continue;
        ++n0;
        for (std::size_t j = 0; j < c.d; ++j) {
            const double v = m.values[i * c.d + j];
            sum[j] += v;
            sumsq[j] += v * v;
        }
    }
    REQUIRE(n0 > 20000);
    for (std::size_t j = 0; j < c.d; ++j) {
        const double mean = sum[j] / n0;
        const double var = sumsq[j] / n0 - mean * mean;
        CHECK(std::abs(mean - means[j]) < 0.05);
        CHECK(std::abs(var - 1.0) < 0.05);
    }
}

TEST_CASE("generation is deterministic and prefix-stable") {
    SynthConfig c = base_config();
    c.n = 200;
    EmbeddingMatrix a = generate(c);
    EmbeddingMatrix b = generate(c);
    CHECK(a.values == b.values);
    CHECK(a.labels == b.labels);

    // row substreams: a shorter run is a prefix of a longer one
    SynthConfig half = c;
    half.n = 100;
    EmbeddingMatrix h = generate(half);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(h.labels[i] == a.labels[i]);
        for (std::size_t j = 0; j < c.d; ++j) {
            CHECK(h.values[i * c.d + j] == a.values[i * c.d + j]);
        }
    }

    SynthConfig other = c;
    other.seed = 43;
    EmbeddingMatrix o = generate(other);
    CHECK(o.values != a.values);
}

TEST_CASE("synth config validation") {
    SynthConfig c = base_config();
    c.d = 0;
    CHECK_THROWS_AS(c.validate(), DataError);
    c = base_config();
    c.m = 1;
    CHECK_THROWS_AS(c.validate(), DataError);
    c = base_config();
    c.n = 3;  // < m
    CHECK_THROWS_AS(c.validate(), DataError);
    c = base_config();
    c.s = -1.0;
    CHECK_THROWS_AS(c.validate(), DataError);
    c = base_config();
    c.sigma = -0.1;
    CHECK_THROWS_AS(c.validate(), DataError);
    c = base_config();
    c.gamma = 0.0;
    CHECK_THROWS_AS(c.validate(), DataError);
}
