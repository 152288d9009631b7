#include "coreset/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coreset/errors.hpp"

namespace coreset {

void EncoderParams::validate() const {
    if (d_in == 0 || d_emb == 0) throw DataError("encoder: zero dimension");
    if (w.size() != d_in * d_emb) throw DataError("encoder: W size mismatch");
    for (double v : w) {
        if (!std::isfinite(v)) throw NumericError("encoder: non-finite weight");
    }
    if (!(hyper.tau > 0.0)) throw DataError("encoder: tau must be > 0");
    if (hyper.batch < 2) throw DataError("encoder: batch must be >= 2");
    if (!(hyper.noise >= 0.0)) throw DataError("encoder: noise must be >= 0");
    if (!(hyper.dropout >= 0.0) || hyper.dropout >= 1.0) {
        throw DataError("encoder: dropout must be in [0,1)");
    }
    if (!std::isfinite(hyper.lr) || !std::isfinite(hyper.weight_decay)) {
        throw DataError("encoder: non-finite hyperparameter");
    }
}

EncoderParams init_encoder(std::size_t d_in, std::size_t d_emb,
                           const TrainerHyper& hyper, SeededRng& rng) {
    EncoderParams p;
    p.d_in = d_in;
    p.d_emb = d_emb;
    p.hyper = hyper;
    p.w.resize(d_in * d_emb);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_in));
    for (double& v : p.w) v = scale * rng.next_normal();
    p.validate();
    return p;
}

void augment(std::span<const float> x, double sigma, double p, SeededRng& rng,
             std::span<double> out) {
    if (out.size() != x.size()) throw DataError("augment: size mismatch");
    if (!(sigma >= 0.0)) throw DataError("augment: sigma must be >= 0");
    if (!(p >= 0.0) || p >= 1.0) throw DataError("augment: p must be in [0,1)");
    for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] = static_cast<double>(x[j]) +
                 (sigma > 0.0 ? sigma * rng.next_normal() : 0.0);
    }
    if (p > 0.0) {
        const double keep_scale = 1.0 / (1.0 - p);
        for (std::size_t j = 0; j < x.size(); ++j) {
            out[j] = rng.next_double() < p ? 0.0 : out[j] * keep_scale;
        }
    }
}

NtxentResult ntxent_loss(std::span<const double> z1, std::span<const double> z2,
                         std::size_t b, std::size_t d_emb, double tau) {
    if (b < 2) throw DataError("ntxent: batch must be >= 2");
    if (!(tau > 0.0)) throw DataError("ntxent: tau must be > 0");
    if (z1.size() != b * d_emb || z2.size() != b * d_emb) {
        throw DataError("ntxent: input size mismatch");
    }
    const std::size_t n = 2 * b;  // stacked views: rows 0..b-1 = z1, b.. = z2

    // Normalize rows; keep norms for the chain rule.
    std::vector<double> u(n * d_emb);
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* src = (i < b ? z1.data() + i * d_emb
                                   : z2.data() + (i - b) * d_emb);
        double s = 0.0;
        for (std::size_t j = 0; j < d_emb; ++j) s += src[j] * src[j];
        const double norm = std::sqrt(s);
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw NumericError("ntxent: zero-norm embedding row " +
                               std::to_string(i) + " (collapse)");
        }
        norms[i] = norm;
        for (std::size_t j = 0; j < d_emb; ++j) u[i * d_emb + j] = src[j] / norm;
    }

    // Similarities s_ij = u_i . u_j / tau (diagonal unused).
    std::vector<double> sim(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t c = 0; c < d_emb; ++c) {
                dot += u[i * d_emb + c] * u[j * d_emb + c];
            }
            sim[i * n + j] = sim[j * n + i] = dot / tau;
        }
    }

    auto positive = [b](std::size_t i) { return i < b ? i + b : i - b; };

    // Loss and softmax rows (over j != i).
    double loss = 0.0;
    std::vector<double> prob(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) mx = std::max(mx, sim[i * n + j]);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            prob[i * n + j] = std::exp(sim[i * n + j] - mx);
            denom += prob[i * n + j];
        }
        for (std::size_t j = 0; j < n; ++j) prob[i * n + j] /= denom;
        loss += -sim[i * n + positive(i)] + mx + std::log(denom);
    }
    loss /= static_cast<double>(n);

    // d loss / d u_m = (1/tau) * sum_j (A_mj + A_jm) u_j,
    // A_ij = (prob_ij - [j = positive(i)]) / n for j != i.
    std::vector<double> grad_u(n * d_emb, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j == m) continue;
            double a = prob[m * n + j] + prob[j * n + m];
            if (j == positive(m)) a -= 2.0;  // symmetric positive pairing
            const double coeff = a * inv_n / tau;
            for (std::size_t c = 0; c < d_emb; ++c) {
                grad_u[m * d_emb + c] += coeff * u[j * d_emb + c];
            }
        }
    }

    // Chain through normalization: d loss / d z = (g - (g.u) u) / ||z||.
    NtxentResult res;
    res.loss = loss;
    res.grad1.resize(b * d_emb);
    res.grad2.resize(b * d_emb);
    for (std::size_t i = 0; i < n; ++i) {
        double gu = 0.0;
        for (std::size_t c = 0; c < d_emb; ++c) {
            gu += grad_u[i * d_emb + c] * u[i * d_emb + c];
        }
        double* dst = (i < b ? res.grad1.data() + i * d_emb
                             : res.grad2.data() + (i - b) * d_emb);
        for (std::size_t c = 0; c < d_emb; ++c) {
            dst[c] = (grad_u[i * d_emb + c] - gu * u[i * d_emb + c]) / norms[i];
        }
    }
    return res;
}

namespace {

// out (rows x d_emb) = views (rows x d_in) . W
void encode_rows(const EncoderParams& params, const std::vector<double>& views,
                 std::size_t rows, std::vector<double>& out) {
    out.assign(rows * params.d_emb, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = views.data() + r * params.d_in;
        double* z = out.data() + r * params.d_emb;
        for (std::size_t i = 0; i < params.d_in; ++i) {
            const double xi = x[i];
            if (xi == 0.0) continue;
            const double* wrow = params.w.data() + i * params.d_emb;
            for (std::size_t j = 0; j < params.d_emb; ++j) z[j] += xi * wrow[j];
        }
    }
}

double batched_pass(EncoderParams& params, const RowSource& data,
                    std::span<const std::uint64_t> order, SeededRng& rng,
                    bool update) {
    params.validate();
    const std::size_t d_in = params.d_in;
    if (data.dim() != d_in) throw DataError("trainer: input dimension mismatch");
    const std::size_t bsz = params.hyper.batch;
    if (order.size() < bsz) {
        throw DataError("trainer: selection smaller than one batch (" +
                        std::to_string(order.size()) + " < " +
                        std::to_string(bsz) + ")");
    }
    const std::size_t batches = order.size() / bsz;  // drop last incomplete

    std::vector<double> v1(bsz * d_in), v2(bsz * d_in);
    std::vector<double> z1, z2;
    double total_loss = 0.0;
    for (std::size_t bi = 0; bi < batches; ++bi) {
        for (std::size_t r = 0; r < bsz; ++r) {
            const std::uint64_t row_idx = order[bi * bsz + r];
            if (row_idx >= data.size()) {
                throw DataError("trainer: selection index out of range");
            }
            const auto x = data.row(static_cast<std::size_t>(row_idx));
            augment(x, params.hyper.noise, params.hyper.dropout, rng,
                    {v1.data() + r * d_in, d_in});
            augment(x, params.hyper.noise, params.hyper.dropout, rng,
                    {v2.data() + r * d_in, d_in});
        }
        encode_rows(params, v1, bsz, z1);
        encode_rows(params, v2, bsz, z2);
        NtxentResult res = ntxent_loss(z1, z2, bsz, params.d_emb, params.hyper.tau);
        total_loss += res.loss;

        if (update) {
            // dW = V1^T G1 + V2^T G2, then SGD with weight decay.
            std::vector<double> dw(d_in * params.d_emb, 0.0);
            for (std::size_t r = 0; r < bsz; ++r) {
                for (std::size_t i = 0; i < d_in; ++i) {
                    const double a1 = v1[r * d_in + i];
                    const double a2 = v2[r * d_in + i];
                    double* wrow = dw.data() + i * params.d_emb;
                    const double* g1 = res.grad1.data() + r * params.d_emb;
                    const double* g2 = res.grad2.data() + r * params.d_emb;
                    for (std::size_t j = 0; j < params.d_emb; ++j) {
                        wrow[j] += a1 * g1[j] + a2 * g2[j];
                    }
                }
            }
            const double lr = params.hyper.lr;
            const double wd = params.hyper.weight_decay;
            for (std::size_t t = 0; t < params.w.size(); ++t) {
                params.w[t] -= lr * (dw[t] + wd * params.w[t]);
            }
        }
    }
    return total_loss / static_cast<double>(batches);
}

}  // namespace

double train_epoch(EncoderParams& params, const RowSource& data,
                   std::span<const std::uint64_t> selection, SeededRng& rng) {
    std::vector<std::uint64_t> order(selection.begin(), selection.end());
    // Fisher-Yates shuffle driven by the epoch stream.
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::uint64_t j = rng.next_below(i);
        std::swap(order[i - 1], order[j]);
    }
    return batched_pass(params, data, order, rng, /*update=*/true);
}

double train_epoch(EncoderParams& params, const EmbeddingMatrix& data,
                   std::span<const std::uint64_t> selection, SeededRng& rng) {
    MatrixRows rows(data);
    return train_epoch(params, rows, selection, rng);
}

double evaluate_loss(const EncoderParams& params, const RowSource& data,
                     std::span<const std::uint64_t> rows, SeededRng& rng) {
    EncoderParams frozen = params;
    return batched_pass(frozen, data, rows, rng, /*update=*/false);
}

EmbeddingMatrix embed(const EncoderParams& params, const EmbeddingMatrix& data) {
    params.validate();
    data.validate();
    if (data.d != params.d_in) throw DataError("embed: dimension mismatch");
    EmbeddingMatrix out;
    out.n = data.n;
    out.d = params.d_emb;
    out.values.resize(data.n * params.d_emb);
    out.labels = data.labels;
    out.ids = data.ids;
    for (std::size_t r = 0; r < data.n; ++r) {
        const auto x = data.row(r);
        float* z = out.values.data() + r * params.d_emb;
        std::vector<double> acc(params.d_emb, 0.0);
        for (std::size_t i = 0; i < params.d_in; ++i) {
            const double xi = static_cast<double>(x[i]);
            if (xi == 0.0) continue;
            const double* wrow = params.w.data() + i * params.d_emb;
            for (std::size_t j = 0; j < params.d_emb; ++j) acc[j] += xi * wrow[j];
        }
        for (std::size_t j = 0; j < params.d_emb; ++j) {
            z[j] = static_cast<float>(acc[j]);
        }
    }
    return out;
}

}  // namespace coreset
