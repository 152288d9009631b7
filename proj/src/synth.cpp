#include "coreset/synth.hpp"

#include <cmath>

#include "coreset/errors.hpp"
#include "coreset/rng.hpp"

namespace coreset {

void SynthConfig::validate() const {
    if (d == 0) throw DataError("synth: dimension must be >= 1");
    if (m < 2) throw DataError("synth: need at least 2 concepts");
    if (n < m) throw DataError("synth: n must be >= concept count");
    if (!(s >= 0.0)) throw DataError("synth: zipf exponent must be >= 0");
    if (!(sigma >= 0.0)) throw DataError("synth: sigma must be >= 0");
    if (!(gamma > 0.0)) throw DataError("synth: gamma must be > 0");
}

std::vector<double> zipf_proportions(std::size_t m, double s) {
    if (m == 0) throw DataError("zipf_proportions: m must be >= 1");
    if (!(s >= 0.0)) throw DataError("zipf_proportions: s must be >= 0");
    std::vector<double> p(m);
    long double total = 0.0L;
    for (std::size_t j = m; j >= 1; --j) {  // small terms first
        p[j - 1] = std::pow(static_cast<double>(j), -s);
        total += p[j - 1];
    }
    for (double& v : p) v = static_cast<double>(v / total);
    return p;
}

std::vector<double> concept_means(const SynthConfig& config) {
    config.validate();
    const double sep = config.gamma * (config.sigma > 0.0 ? config.sigma : 1.0);
    std::vector<double> means(config.m * config.d, 0.0);
    if (config.d >= config.m) {
        const double coord = sep / std::sqrt(2.0);
        for (std::size_t j = 0; j < config.m; ++j) {
            means[j * config.d + j] = coord;
        }
    } else {
        for (std::size_t j = 0; j < config.m; ++j) {
            means[j * config.d] = sep * static_cast<double>(j);
        }
    }
    return means;
}

EmbeddingMatrix generate(const SynthConfig& config) {
    config.validate();
    const std::vector<double> proportions = zipf_proportions(config.m, config.s);
    std::vector<double> cumulative(config.m);
    double acc = 0.0;
    for (std::size_t j = 0; j < config.m; ++j) {
        acc += proportions[j];
        cumulative[j] = acc;
    }
    cumulative[config.m - 1] = 1.0;  // close the top against round-off

    const std::vector<double> means = concept_means(config);

    EmbeddingMatrix out;
    out.n = config.n;
    out.d = config.d;
    out.values.resize(config.n * config.d);
    out.labels.resize(config.n);

    SeededRng root(config.seed);
    for (std::size_t i = 0; i < config.n; ++i) {
        SeededRng row_rng = root.split("row", i);
        const double u = row_rng.next_double();
        std::size_t cls = 0;
        while (cls + 1 < config.m && u >= cumulative[cls]) ++cls;
        out.labels[i] = static_cast<std::uint32_t>(cls);
        const double* mean = means.data() + cls * config.d;
        float* row = out.values.data() + i * config.d;
        for (std::size_t j = 0; j < config.d; ++j) {
            const double noise =
                config.sigma > 0.0 ? config.sigma * row_rng.next_normal() : 0.0;
            row[j] = static_cast<float>(mean[j] + noise);
        }
    }
    return out;
}

}  // namespace coreset
