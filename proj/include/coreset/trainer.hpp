#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coreset/matrix.hpp"
#include "coreset/rng.hpp"

namespace coreset {

struct TrainerHyper {
    double lr = 0.05;
    double tau = 0.2;         // temperature, > 0
    double noise = 0.1;       // augmentation Gaussian scale
    double dropout = 0.1;     // augmentation dropout probability, in [0,1)
    std::size_t batch = 64;   // >= 2
    double weight_decay = 1e-4;
};

// Linear encoder x -> x.W with W of shape d_in x d_emb (row-major, double).
struct EncoderParams {
    std::size_t d_in = 0;
    std::size_t d_emb = 0;
    std::vector<double> w;
    TrainerHyper hyper;

    void validate() const;
};

// Gaussian init scaled by 1/sqrt(d_in).
EncoderParams init_encoder(std::size_t d_in, std::size_t d_emb,
                           const TrainerHyper& hyper, SeededRng& rng);

// One augmented view of x: add Gaussian noise (scale sigma), then zero each
// coordinate with probability p and rescale survivors by 1/(1-p).
void augment(std::span<const float> x, double sigma, double p, SeededRng& rng,
             std::span<double> out);

struct NtxentResult {
    double loss = 0.0;
    std::vector<double> grad1;  // d loss / d z1, B x d_emb
    std::vector<double> grad2;  // d loss / d z2
};

// Contrastive loss over 2B views (rows of z1 then z2; the positive of row i
// is its counterpart in the other block).  Rows are L2-normalized inside; a
// zero-norm row throws NumericError (collapsed embedding).  The gradient is
// the exact analytic gradient with respect to the raw (pre-normalization)
// inputs.
NtxentResult ntxent_loss(std::span<const double> z1, std::span<const double> z2,
                         std::size_t b, std::size_t d_emb, double tau);

// Read-only row access used by the trainer, so tests can interpose an
// access-tracking source.
class RowSource {
  public:
    virtual ~RowSource() = default;
    virtual std::size_t size() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::span<const float> row(std::size_t i) const = 0;
};

class MatrixRows : public RowSource {
  public:
    explicit MatrixRows(const EmbeddingMatrix& m) : m_(&m) {}
    std::size_t size() const override { return m_->n; }
    std::size_t dim() const override { return m_->d; }
    std::span<const float> row(std::size_t i) const override { return m_->row(i); }

  private:
    const EmbeddingMatrix* m_;
};

// One pass of shuffled mini-batch SGD over the selected rows; the last
// incomplete batch is dropped.  Returns the mean batch loss.  Throws
// DataError if the selection holds fewer rows than one batch.
double train_epoch(EncoderParams& params, const RowSource& data,
                   std::span<const std::uint64_t> selection, SeededRng& rng);
double train_epoch(EncoderParams& params, const EmbeddingMatrix& data,
                   std::span<const std::uint64_t> selection, SeededRng& rng);

// Mean two-view loss over the given rows (in order, last incomplete batch
// dropped) without touching the parameters.
double evaluate_loss(const EncoderParams& params, const RowSource& data,
                     std::span<const std::uint64_t> rows, SeededRng& rng);

// Rows x.W for the whole matrix; labels and ids are carried over.
EmbeddingMatrix embed(const EncoderParams& params, const EmbeddingMatrix& data);

}  // namespace coreset
