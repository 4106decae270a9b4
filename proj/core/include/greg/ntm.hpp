#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "greg/augment.hpp"
#include "greg/corpus.hpp"
#include "greg/embeddings.hpp"
#include "greg/ot.hpp"
#include "greg/rng.hpp"

namespace greg {

// NVDM-style VAE topic model: a two-layer softplus encoder with Gaussian
// mean / log-variance heads, and a linear decoder whose weight columns carry
// the topics. The same struct doubles as the gradient container (one slot per
// parameter block), which keeps the optimiser generic.
struct NtmParams {
    Eigen::MatrixXd w1;     // H x V
    Eigen::VectorXd b1;     // H
    Eigen::MatrixXd w2;     // H x H
    Eigen::VectorXd b2;     // H
    Eigen::MatrixXd w_mu;   // K x H
    Eigen::VectorXd b_mu;   // K
    Eigen::MatrixXd w_lv;   // K x H
    Eigen::VectorXd b_lv;   // K
    Eigen::MatrixXd dec_w;  // V x K
    Eigen::VectorXd dec_b;  // V

    int vocab() const { return static_cast<int>(w1.cols()); }
    int topics() const { return static_cast<int>(w_mu.rows()); }
    int hidden() const { return static_cast<int>(w1.rows()); }

    // All blocks, in the fixed serialisation order.
    std::vector<const Eigen::MatrixXd*> matrix_blocks() const;
    std::vector<Eigen::MatrixXd*> matrix_blocks();
    std::vector<const Eigen::VectorXd*> vector_blocks() const;
    std::vector<Eigen::VectorXd*> vector_blocks();

    // Shape consistency and finiteness; throws naming the offending block.
    void validate() const;
};

// Zero-valued gradients (or optimiser state) with the same shapes.
NtmParams zeros_like(const NtmParams& params);

// Content fingerprint over all parameter blocks (report metadata, mutation
// checks).
std::uint64_t params_content_hash(const NtmParams& params);

// Seeded initialisation: scaled-normal weights drawn in a fixed order, zero
// biases.
NtmParams init_params(int vocab, int topics, int hidden, std::uint64_t seed);

enum class EncodeMode { Sample, Mean };

// Forward-pass record: the latent draw plus every activation the backward
// pass needs. `eta` is the standard-normal noise (zero in mean mode).
struct Encoded {
    Eigen::VectorXd x_freq;  // encoder input: counts / total
    Eigen::VectorXd pre1, h1, pre2, h2;
    Eigen::VectorXd mu, logvar;
    Eigen::VectorXd eta;
    Eigen::VectorXd z_raw;  // mu + exp(logvar/2) .* eta
};

// Encodes one document. Sample mode draws K normals from `rng`; mean mode
// leaves the generator untouched.
Encoded encode(const BowVector& x, const NtmParams& params, EncodeMode mode, Rng& rng);

// Same forward pass with caller-supplied noise (for finite-difference tests
// and the training loop, which draws all noise up front).
Encoded encode_with_noise(const BowVector& x, const NtmParams& params,
                          const Eigen::VectorXd& eta);

// Softmax over the raw latent: the document's distribution over topics.
Eigen::VectorXd topical_rep(const Eigen::VectorXd& z_raw);

// Multinomial log-likelihood: sum_v x_v * log softmax(dec_w z + dec_b)_v.
double decode_loglik(const BowVector& x, const Eigen::VectorXd& z_raw, const NtmParams& params);

// Negative ELBO for one document: -log p(x|z) + KL[N(mu, sigma^2) || N(0,I)],
// with the KL in closed form. Gradients cover every parameter block.
struct ElboResult {
    double loss = 0.0;
    double loglik = 0.0;
    double kl = 0.0;
    Encoded enc;
};

// Forward only; `eta` as in encode_with_noise.
ElboResult elbo_forward(const BowVector& x, const NtmParams& params, const Eigen::VectorXd& eta);

// Accumulates d(loss)/d(params) for one document into `grads`. `dz_raw_extra`
// adds an external gradient flowing into z_raw (the Greg path); pass an empty
// vector when there is none.
void elbo_backward(const BowVector& x, const NtmParams& params, const ElboResult& fwd,
                   const Eigen::VectorXd& dz_raw_extra, NtmParams& grads);

// Backward pass for a mean-mode encoding (no decoder, no KL): used for the
// augmented branch, where only d(loss)/d(z_raw) flows in.
void encoder_backward_mean(const NtmParams& params, const Encoded& enc,
                           const Eigen::VectorXd& dz_raw, NtmParams& grads);

// Convenience single-call form drawing noise from `rng`.
ElboResult elbo_loss(const BowVector& x, const NtmParams& params, Rng& rng);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
    int topics = 50;
    int hidden = 100;
    double gamma = 300.0;        // Greg weight; 0 disables the branch entirely
    double aug_beta = 0.5;       // augmentation strength for the Greg branch
    AugmentKind augment = AugmentKind::HighestToSimilar;
    int neighbor_pool = 20;      // candidate pool for replacement operators
    int top_i = 20;              // topic truncation size
    ot::SinkhornConfig sinkhorn; // lambda=100, 5000 iterations, stop 0.005
    int batch_size = 64;
    double learning_rate = 1e-3;
    int epochs = 20;
    std::uint64_t seed = 1;

    void validate() const;
};

struct StepLog {
    int step = 0;
    double elbo = 0.0;
    double greg = 0.0;   // unweighted Greg term (0 when gamma == 0)
    double total = 0.0;  // elbo + gamma * greg
    int sinkhorn_nonconverged = 0;
    double max_violation = 0.0;  // worst marginal violation among converged pairs
    double seconds = 0.0;
};

struct TrainResult {
    NtmParams params;
    std::vector<StepLog> log;
    bool halted = false;       // stopped early on a non-finite loss
    std::string halt_reason;   // empty unless halted
    int steps_completed = 0;
};

// One optimisation step's loss and gradients on a fixed batch: deterministic
// given the documents, the augmented documents (empty when gamma == 0), and
// the noise rows. This is the unit the training loop repeats and the unit
// finite-difference tests probe.
struct StepEval {
    double elbo = 0.0;
    double greg = 0.0;
    double total = 0.0;
    NtmParams grads;
    int sinkhorn_nonconverged = 0;
    double max_violation = 0.0;
};

StepEval training_step_eval(const std::vector<const BowVector*>& docs,
                            const std::vector<BowVector>& aug_docs, const Eigen::MatrixXd& etas,
                            const NtmParams& params, const EmbeddingTable& embeddings,
                            const TrainConfig& cfg);

// Algorithm: per step, sample a batch, augment it (gamma > 0 only), draw the
// reparameterisation noise serially, evaluate the joint loss, and apply an
// Adam update. A non-finite loss halts training and returns the parameters
// from before the bad step. When `log_stream` is given, one JSON object per
// step is appended. Training uses the corpus train split (the whole corpus if
// no split is set).
TrainResult train(const Corpus& corpus, const TrainConfig& cfg, const EmbeddingTable& embeddings,
                  std::ostream* log_stream = nullptr);

// Mean-mode topical representations, one row per requested document.
// `indices` selects documents; an empty list means all of them.
Eigen::MatrixXd infer(const Corpus& corpus, const std::vector<int>& indices,
                      const NtmParams& params);

// ---------------------------------------------------------------------------
// Checkpoints

// Binary format: magic "GREGCKPT", format version, V/K/H, a vocabulary hash,
// then the parameter blocks as little-endian 64-bit floats in a fixed order.
void save_checkpoint(const NtmParams& params, std::uint64_t vocab_hash,
                     const std::filesystem::path& file);

struct Checkpoint {
    NtmParams params;
    std::uint64_t vocab_hash = 0;
};

Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace greg
