#include "coreset/hierarchy.hpp"

#include <fstream>
#include <string>

#include "coreset/errors.hpp"
#include "coreset/io.hpp"

namespace coreset {

namespace {

void check_ks(const std::vector<std::size_t>& ks, std::size_t n) {
    if (ks.empty()) throw DataError("hkmeans: needs at least one level");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] == 0) throw DataError("hkmeans: every k must be >= 1");
        if (i > 0 && ks[i] > ks[i - 1]) {
            throw DataError("hkmeans: ks must be non-increasing (level " +
                            std::to_string(i + 1) + ")");
        }
    }
    if (ks[0] > n) {
        throw DataError("hkmeans: k_1 = " + std::to_string(ks[0]) +
                        " exceeds subset size " + std::to_string(n));
    }
}

std::filesystem::path level_path(const std::filesystem::path& manifest_path,
                                 std::size_t level) {
    std::filesystem::path p = manifest_path;
    p.replace_extension();
    p += ".level" + std::to_string(level) + ".emb";
    return p;
}

}  // namespace

void ClusterModel::validate() const {
    if (levels.empty()) throw DataError("ClusterModel: no levels");
    if (levels.size() != params.ks.size()) {
        throw DataError("ClusterModel: level count != ks length");
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i].k != params.ks[i]) {
            throw DataError("ClusterModel: level " + std::to_string(i + 1) +
                            " holds " + std::to_string(levels[i].k) +
                            " centroids, expected " + std::to_string(params.ks[i]));
        }
        if (levels[i].d != levels[0].d) {
            throw DataError("ClusterModel: level dimension mismatch");
        }
        if (levels[i].values.size() != levels[i].k * levels[i].d) {
            throw DataError("ClusterModel: centroid storage size mismatch");
        }
    }
}

ClusterModel hkmeans(const EmbeddingMatrix& subset, const HierarchyParams& params,
                     SeededRng& rng) {
    subset.validate();
    check_ks(params.ks, subset.n);

    ClusterModel model;
    model.params = params;
    model.levels.reserve(params.ks.size());

    // Level-1 input: the subset rows widened to double.
    std::vector<double> points(subset.values.begin(), subset.values.end());
    std::size_t n = subset.n;
    std::vector<double> weights;  // empty = unit

    for (std::size_t t = 0; t < params.ks.size(); ++t) {
        KMeansConfig cfg;
        cfg.k = params.ks[t];
        cfg.max_iters = params.max_iters;
        cfg.tol = params.tol;
        cfg.restarts = params.restarts;
        SeededRng level_rng = rng.split("level", t + 1);
        KMeansResult res = kmeans(points, n, subset.d, weights, cfg, level_rng);

        if (params.mass_weighted) {
            std::vector<double> next_weights(cfg.k, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                next_weights[res.labels[i]] += weights.empty() ? 1.0 : weights[i];
            }
            weights = std::move(next_weights);
        }
        points = res.centroids.values;
        n = res.centroids.k;
        model.levels.push_back(std::move(res.centroids));
    }
    return model;
}

ClusterModel hkmeans(const EmbeddingMatrix& subset,
                     const std::vector<std::size_t>& ks, SeededRng& rng) {
    HierarchyParams params;
    params.ks = ks;
    return hkmeans(subset, params, rng);
}

const CentroidSet& final_level(const ClusterModel& model) {
    model.validate();
    return model.levels.back();
}

void save_cluster_model(const ClusterModel& model,
                        const std::filesystem::path& manifest_path) {
    model.validate();
    for (std::size_t t = 0; t < model.levels.size(); ++t) {
        const CentroidSet& level = model.levels[t];
        EmbeddingMatrix m;
        m.n = level.k;
        m.d = level.d;
        m.values.assign(level.values.begin(), level.values.end());
        save_embeddings_file(m, level_path(manifest_path, t + 1));
    }
    atomic_write_file(manifest_path, [&](std::ostream& out) {
        out << "# coreset cluster model v1\n";
        out << "version=" << kVersion << "\n";
        out << "levels=" << model.levels.size() << "\n";
        out << "ks=";
        for (std::size_t i = 0; i < model.params.ks.size(); ++i) {
            if (i) out << ',';
            out << model.params.ks[i];
        }
        out << "\n";
        out << "tol=" << format_double(model.params.tol) << "\n";
        out << "max_iters=" << model.params.max_iters << "\n";
        out << "restarts=" << model.params.restarts << "\n";
        out << "mass_weighted=" << (model.params.mass_weighted ? 1 : 0) << "\n";
        for (std::size_t t = 1; t <= model.levels.size(); ++t) {
            out << "level" << t << "="
                << level_path(manifest_path, t).filename().string() << "\n";
        }
    });
}

ClusterModel load_cluster_model(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open " + manifest_path.string());

    ClusterModel model;
    std::size_t levels = 0;
    std::vector<std::filesystem::path> files;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError(FormatError::Kind::bad_record, lineno,
                              "cluster manifest: missing '=' on line " +
                                  std::to_string(lineno));
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        try {
            if (key == "version") {
                // informational
            } else if (key == "levels") {
                levels = std::stoull(value);
            } else if (key == "ks") {
                model.params.ks.clear();
                std::size_t pos = 0;
                while (pos < value.size()) {
                    std::size_t next = value.find(',', pos);
                    if (next == std::string::npos) next = value.size();
                    model.params.ks.push_back(std::stoull(value.substr(pos, next - pos)));
                    pos = next + 1;
                }
            } else if (key == "tol") {
                model.params.tol = std::stod(value);
            } else if (key == "max_iters") {
                model.params.max_iters = std::stoull(value);
            } else if (key == "restarts") {
                model.params.restarts = std::stoull(value);
            } else if (key == "mass_weighted") {
                model.params.mass_weighted = std::stoull(value) != 0;
            } else if (key.rfind("level", 0) == 0) {
                files.push_back(manifest_path.parent_path() / value);
            } else {
                throw FormatError(FormatError::Kind::bad_record, lineno,
                                  "cluster manifest: unknown key '" + key +
                                      "' on line " + std::to_string(lineno));
            }
        } catch (const FormatError&) {
            throw;
        } catch (const std::exception&) {
            throw FormatError(FormatError::Kind::bad_record, lineno,
                              "cluster manifest: bad value on line " +
                                  std::to_string(lineno));
        }
    }
    if (levels == 0 || files.size() != levels) {
        throw DataError("cluster manifest: level file list does not match count");
    }
    for (const auto& f : files) {
        EmbeddingMatrix m = load_embeddings_file(f);
        CentroidSet level;
        level.k = m.n;
        level.d = m.d;
        level.values.assign(m.values.begin(), m.values.end());
        model.levels.push_back(std::move(level));
    }
    model.validate();
    return model;
}

}  // namespace coreset
