#include "greg/ntm.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "greg/hash.hpp"
#include "greg/parallel.hpp"
#include "greg/topical.hpp"
#include "json.hpp"

namespace greg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Parameter blocks are serialised (and initialised) in this order.
constexpr const char* kBlockNames[] = {"w1", "b1", "w2",   "b2",   "w_mu",
                                       "b_mu", "w_lv", "b_lv", "dec_w", "dec_b"};

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

VectorXd softplus_vec(const VectorXd& x) { return x.unaryExpr([](double v) { return softplus(v); }); }

VectorXd sigmoid_vec(const VectorXd& x) { return x.unaryExpr([](double v) { return sigmoid(v); }); }

VectorXd softmax_vec(const VectorXd& logits) {
    const VectorXd e = (logits.array() - logits.maxCoeff()).exp().matrix();
    return e / e.sum();
}

// d(loss)/d(z_raw) for a gradient g arriving at z = softmax(z_raw).
VectorXd softmax_backward(const VectorXd& z, const VectorXd& g) {
    return z.cwiseProduct(g - VectorXd::Constant(z.size(), g.dot(z)));
}

void fill_normal(MatrixXd& block, double stddev, Rng& rng) {
    for (Eigen::Index i = 0; i < block.size(); ++i) {
        block.data()[i] = stddev * rng.normal();
    }
}

// Number of fixed gradient-accumulation chunks. A constant (rather than the
// thread count) keeps the reduction order, and therefore every result,
// identical across thread counts.
constexpr std::size_t kGradChunks = 8;

}  // namespace

std::vector<const MatrixXd*> NtmParams::matrix_blocks() const {
    return {&w1, &w2, &w_mu, &w_lv, &dec_w};
}

std::vector<MatrixXd*> NtmParams::matrix_blocks() { return {&w1, &w2, &w_mu, &w_lv, &dec_w}; }

std::vector<const VectorXd*> NtmParams::vector_blocks() const {
    return {&b1, &b2, &b_mu, &b_lv, &dec_b};
}

std::vector<VectorXd*> NtmParams::vector_blocks() { return {&b1, &b2, &b_mu, &b_lv, &dec_b}; }

void NtmParams::validate() const {
    const int v = vocab();
    const int k = topics();
    const int h = hidden();
    if (v < 1 || k < 1 || h < 1) {
        throw std::invalid_argument("NtmParams: empty dimension (V=" + std::to_string(v) +
                                    ", K=" + std::to_string(k) + ", H=" + std::to_string(h) + ")");
    }
    const auto expect = [](bool ok, const char* what) {
        if (!ok) {
            throw std::invalid_argument(std::string("NtmParams: inconsistent shape for ") + what);
        }
    };
    expect(w1.rows() == h && w1.cols() == v, "w1");
    expect(b1.size() == h, "b1");
    expect(w2.rows() == h && w2.cols() == h, "w2");
    expect(b2.size() == h, "b2");
    expect(w_mu.rows() == k && w_mu.cols() == h, "w_mu");
    expect(b_mu.size() == k, "b_mu");
    expect(w_lv.rows() == k && w_lv.cols() == h, "w_lv");
    expect(b_lv.size() == k, "b_lv");
    expect(dec_w.rows() == v && dec_w.cols() == k, "dec_w");
    expect(dec_b.size() == v, "dec_b");

    std::size_t idx = 0;
    for (const MatrixXd* block : matrix_blocks()) {
        if (!block->allFinite()) {
            throw std::invalid_argument(std::string("NtmParams: non-finite values in ") +
                                        kBlockNames[idx * 2]);
        }
        ++idx;
    }
    idx = 0;
    for (const VectorXd* block : vector_blocks()) {
        if (!block->allFinite()) {
            throw std::invalid_argument(std::string("NtmParams: non-finite values in ") +
                                        kBlockNames[idx * 2 + 1]);
        }
        ++idx;
    }
}

NtmParams zeros_like(const NtmParams& params) {
    NtmParams z;
    z.w1 = MatrixXd::Zero(params.w1.rows(), params.w1.cols());
    z.b1 = VectorXd::Zero(params.b1.size());
    z.w2 = MatrixXd::Zero(params.w2.rows(), params.w2.cols());
    z.b2 = VectorXd::Zero(params.b2.size());
    z.w_mu = MatrixXd::Zero(params.w_mu.rows(), params.w_mu.cols());
    z.b_mu = VectorXd::Zero(params.b_mu.size());
    z.w_lv = MatrixXd::Zero(params.w_lv.rows(), params.w_lv.cols());
    z.b_lv = VectorXd::Zero(params.b_lv.size());
    z.dec_w = MatrixXd::Zero(params.dec_w.rows(), params.dec_w.cols());
    z.dec_b = VectorXd::Zero(params.dec_b.size());
    return z;
}

std::uint64_t params_content_hash(const NtmParams& params) {
    std::uint64_t h = kFnvOffset;
    const auto mix = [&h](const double* data, Eigen::Index n) {
        h = fnv1a64(std::string_view(reinterpret_cast<const char*>(data),
                                     sizeof(double) * static_cast<std::size_t>(n)),
                    h);
    };
    const auto ms = params.matrix_blocks();
    const auto vs = params.vector_blocks();
    for (std::size_t j = 0; j < ms.size(); ++j) {
        mix(ms[j]->data(), ms[j]->size());
        mix(vs[j]->data(), vs[j]->size());
    }
    return h;
}

NtmParams init_params(int vocab, int topics, int hidden, std::uint64_t seed) {
    if (vocab < 1 || topics < 1 || hidden < 1) {
        throw std::invalid_argument("init_params: dimensions must be positive");
    }
    Rng rng(seed);
    NtmParams p;
    p.w1.resize(hidden, vocab);
    p.w2.resize(hidden, hidden);
    p.w_mu.resize(topics, hidden);
    p.w_lv.resize(topics, hidden);
    p.dec_w.resize(vocab, topics);
    // Scaled-normal weights (He-style for the softplus stack, Xavier-style
    // heads), zero biases; blocks filled in serialisation order.
    fill_normal(p.w1, std::sqrt(2.0 / vocab), rng);
    fill_normal(p.w2, std::sqrt(2.0 / hidden), rng);
    fill_normal(p.w_mu, std::sqrt(1.0 / hidden), rng);
    fill_normal(p.w_lv, std::sqrt(1.0 / hidden), rng);
    fill_normal(p.dec_w, std::sqrt(2.0 / (vocab + topics)), rng);
    p.b1 = VectorXd::Zero(hidden);
    p.b2 = VectorXd::Zero(hidden);
    p.b_mu = VectorXd::Zero(topics);
    p.b_lv = VectorXd::Zero(topics);
    p.dec_b = VectorXd::Zero(vocab);
    return p;
}

Encoded encode_with_noise(const BowVector& x, const NtmParams& params, const VectorXd& eta) {
    if (x.vocab_size() != params.vocab()) {
        throw std::invalid_argument("encode: document has vocabulary size " +
                                    std::to_string(x.vocab_size()) + " but the model expects " +
                                    std::to_string(params.vocab()));
    }
    if (eta.size() != params.topics()) {
        throw std::invalid_argument("encode: noise vector length " + std::to_string(eta.size()) +
                                    " does not match K = " + std::to_string(params.topics()));
    }
    Encoded e;
    e.x_freq = x.to_dense();
    const double total = static_cast<double>(x.total());
    if (total > 0.0) e.x_freq /= total;  // frequencies keep activations scale-stable
    e.pre1 = params.w1 * e.x_freq + params.b1;
    e.h1 = softplus_vec(e.pre1);
    e.pre2 = params.w2 * e.h1 + params.b2;
    e.h2 = softplus_vec(e.pre2);
    e.mu = params.w_mu * e.h2 + params.b_mu;
    e.logvar = params.w_lv * e.h2 + params.b_lv;
    e.eta = eta;
    e.z_raw = e.mu + (e.logvar * 0.5).array().exp().matrix().cwiseProduct(eta);
    if (!e.z_raw.allFinite() || !e.logvar.allFinite()) {
        throw std::runtime_error("encode: non-finite activations");
    }
    return e;
}

Encoded encode(const BowVector& x, const NtmParams& params, EncodeMode mode, Rng& rng) {
    VectorXd eta = VectorXd::Zero(params.topics());
    if (mode == EncodeMode::Sample) {
        for (Eigen::Index k = 0; k < eta.size(); ++k) eta(k) = rng.normal();
    }
    return encode_with_noise(x, params, eta);
}

VectorXd topical_rep(const VectorXd& z_raw) {
    if (z_raw.size() == 0 || !z_raw.allFinite()) {
        throw std::invalid_argument("topical_rep: non-finite or empty input");
    }
    return softmax_vec(z_raw);
}

double decode_loglik(const BowVector& x, const VectorXd& z_raw, const NtmParams& params) {
    if (x.vocab_size() != params.vocab() || z_raw.size() != params.topics()) {
        throw std::invalid_argument("decode_loglik: dimension mismatch");
    }
    const VectorXd logits = params.dec_w * z_raw + params.dec_b;
    const double lse = std::log((logits.array() - logits.maxCoeff()).exp().sum()) +
                       logits.maxCoeff();
    double loglik = 0.0;
    for (const auto& [word, count] : x.entries()) {
        loglik += static_cast<double>(count) * (logits(word) - lse);
    }
    return loglik;
}

ElboResult elbo_forward(const BowVector& x, const NtmParams& params, const VectorXd& eta) {
    ElboResult res;
    res.enc = encode_with_noise(x, params, eta);
    res.loglik = decode_loglik(x, res.enc.z_raw, params);
    // Closed-form Gaussian KL to the standard-normal prior.
    res.kl = 0.5 * (res.enc.mu.array().square() + res.enc.logvar.array().exp() -
                    res.enc.logvar.array() - 1.0)
                       .sum();
    res.loss = -res.loglik + res.kl;
    return res;
}

void elbo_backward(const BowVector& x, const NtmParams& params, const ElboResult& fwd,
                   const VectorXd& dz_raw_extra, NtmParams& grads) {
    const Encoded& enc = fwd.enc;
    // Decoder: d(-loglik)/d(logits) = softmax * total - counts.
    const VectorXd logits = params.dec_w * enc.z_raw + params.dec_b;
    const VectorXd sm = softmax_vec(logits);
    VectorXd dlogits = sm * static_cast<double>(x.total());
    for (const auto& [word, count] : x.entries()) dlogits(word) -= static_cast<double>(count);
    grads.dec_w += dlogits * enc.z_raw.transpose();
    grads.dec_b += dlogits;

    VectorXd dz = params.dec_w.transpose() * dlogits;
    if (dz_raw_extra.size() != 0) dz += dz_raw_extra;

    // Reparameterisation: z = mu + sigma .* eta, so dz/d(logvar) = (z - mu)/2.
    VectorXd dmu = dz + enc.mu;  // + KL term d/d(mu) = mu
    VectorXd dlv = dz.cwiseProduct(0.5 * (enc.z_raw - enc.mu)) +
                   0.5 * (enc.logvar.array().exp() - 1.0).matrix();  // + KL term
    grads.w_mu += dmu * enc.h2.transpose();
    grads.b_mu += dmu;
    grads.w_lv += dlv * enc.h2.transpose();
    grads.b_lv += dlv;

    VectorXd dh2 = params.w_mu.transpose() * dmu + params.w_lv.transpose() * dlv;
    VectorXd dpre2 = dh2.cwiseProduct(sigmoid_vec(enc.pre2));
    grads.w2 += dpre2 * enc.h1.transpose();
    grads.b2 += dpre2;

    VectorXd dh1 = params.w2.transpose() * dpre2;
    VectorXd dpre1 = dh1.cwiseProduct(sigmoid_vec(enc.pre1));
    grads.w1 += dpre1 * enc.x_freq.transpose();
    grads.b1 += dpre1;
}

void encoder_backward_mean(const NtmParams& params, const Encoded& enc, const VectorXd& dz_raw,
                           NtmParams& grads) {
    // Mean mode: z_raw == mu, so the gradient enters only through the mu head.
    grads.w_mu += dz_raw * enc.h2.transpose();
    grads.b_mu += dz_raw;
    VectorXd dh2 = params.w_mu.transpose() * dz_raw;
    VectorXd dpre2 = dh2.cwiseProduct(sigmoid_vec(enc.pre2));
    grads.w2 += dpre2 * enc.h1.transpose();
    grads.b2 += dpre2;
    VectorXd dh1 = params.w2.transpose() * dpre2;
    VectorXd dpre1 = dh1.cwiseProduct(sigmoid_vec(enc.pre1));
    grads.w1 += dpre1 * enc.x_freq.transpose();
    grads.b1 += dpre1;
}

ElboResult elbo_loss(const BowVector& x, const NtmParams& params, Rng& rng) {
    VectorXd eta(params.topics());
    for (Eigen::Index k = 0; k < eta.size(); ++k) eta(k) = rng.normal();
    return elbo_forward(x, params, eta);
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
    if (topics < 1) throw std::invalid_argument("TrainConfig: topics must be at least 1");
    if (hidden < 1) throw std::invalid_argument("TrainConfig: hidden must be at least 1");
    if (gamma < 0.0 || !std::isfinite(gamma)) {
        throw std::invalid_argument("TrainConfig: gamma must be finite and >= 0");
    }
    if (gamma > 0.0 && (!(aug_beta > 0.0) || aug_beta > 1.0)) {
        throw std::invalid_argument("TrainConfig: aug_beta must lie in (0, 1]");
    }
    if (neighbor_pool < 1) throw std::invalid_argument("TrainConfig: neighbor_pool must be >= 1");
    if (top_i < 1) throw std::invalid_argument("TrainConfig: top_i must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) {
        throw std::invalid_argument("TrainConfig: learning_rate must be positive");
    }
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    sinkhorn.validate();
}

StepEval training_step_eval(const std::vector<const BowVector*>& docs,
                            const std::vector<BowVector>& aug_docs, const MatrixXd& etas,
                            const NtmParams& params, const EmbeddingTable& embeddings,
                            const TrainConfig& cfg) {
    const std::size_t b = docs.size();
    if (b == 0) throw std::invalid_argument("training_step_eval: empty batch");
    if (etas.rows() != static_cast<Eigen::Index>(b) || etas.cols() != params.topics()) {
        throw std::invalid_argument("training_step_eval: noise matrix must be B x K");
    }
    const bool use_greg = cfg.gamma > 0.0;
    if (use_greg && aug_docs.size() != b) {
        throw std::invalid_argument(
            "training_step_eval: augmented batch size does not match the batch");
    }
    if (use_greg && embeddings.size() != params.vocab()) {
        throw std::invalid_argument("training_step_eval: embedding table covers " +
                                    std::to_string(embeddings.size()) +
                                    " words but the model vocabulary has " +
                                    std::to_string(params.vocab()));
    }

    StepEval out;
    out.grads = zeros_like(params);

    std::vector<ElboResult> fwd(b);
    parallel_for(b, [&](std::size_t i) {
        fwd[i] = elbo_forward(*docs[i], params, etas.row(static_cast<Eigen::Index>(i)).transpose());
    });
    double elbo_sum = 0.0;
    for (const ElboResult& r : fwd) elbo_sum += r.loss;
    out.elbo = elbo_sum / static_cast<double>(b);
    out.total = out.elbo;

    // The Greg branch: topical representations of the sampled batch against
    // mean-mode encodings of the augmented batch. Skipped entirely at
    // gamma = 0, keeping the backbone path bit-identical to a plain VAE.
    std::vector<Encoded> aug_enc;
    std::vector<VectorXd> dz_sample(b), dz_aug(b);
    if (use_greg) {
        aug_enc.resize(b);
        const VectorXd zero_eta = VectorXd::Zero(params.topics());
        parallel_for(b, [&](std::size_t i) {
            aug_enc[i] = encode_with_noise(aug_docs[i], params, zero_eta);
        });
        MatrixXd zs(b, params.topics());
        MatrixXd zaug(b, params.topics());
        for (std::size_t i = 0; i < b; ++i) {
            zs.row(static_cast<Eigen::Index>(i)) = softmax_vec(fwd[i].enc.z_raw).transpose();
            zaug.row(static_cast<Eigen::Index>(i)) = softmax_vec(aug_enc[i].z_raw).transpose();
        }
        const topical::GregLossResult gl =
            topical::greg_loss(zs, zaug, params.dec_w, embeddings, cfg.top_i, cfg.sinkhorn);
        out.greg = gl.loss;
        out.sinkhorn_nonconverged = gl.nonconverged;
        out.max_violation = gl.max_violation;
        out.total = out.elbo + cfg.gamma * gl.loss;
        out.grads.dec_w += cfg.gamma * gl.grad_w;
        // Document gradients flow through the softmax into z_raw. They are
        // pre-scaled by B * gamma because the per-document backward sums are
        // divided by B at the end.
        const double scale = cfg.gamma * static_cast<double>(b);
        for (std::size_t i = 0; i < b; ++i) {
            const Eigen::Index r = static_cast<Eigen::Index>(i);
            dz_sample[i] = scale * softmax_backward(zs.row(r).transpose(),
                                                    gl.grad_zs.row(r).transpose());
            dz_aug[i] = scale * softmax_backward(zaug.row(r).transpose(),
                                                 gl.grad_zaug.row(r).transpose());
        }
    }

    // Per-document backward passes accumulate into a fixed number of chunk
    // buffers reduced in order, so gradients are identical for any thread
    // count.
    const std::size_t n_chunks = std::min(kGradChunks, b);
    std::vector<NtmParams> chunk(n_chunks, zeros_like(params));
    const VectorXd empty;
    parallel_for(n_chunks, [&](std::size_t c) {
        const std::size_t begin = c * b / n_chunks;
        const std::size_t end = (c + 1) * b / n_chunks;
        for (std::size_t i = begin; i < end; ++i) {
            elbo_backward(*docs[i], params, fwd[i], use_greg ? dz_sample[i] : empty, chunk[c]);
            if (use_greg) encoder_backward_mean(params, aug_enc[i], dz_aug[i], chunk[c]);
        }
    });
    const double inv_b = 1.0 / static_cast<double>(b);
    for (std::size_t c = 0; c < n_chunks; ++c) {
        const auto src_m = chunk[c].matrix_blocks();
        const auto dst_m = out.grads.matrix_blocks();
        for (std::size_t j = 0; j < dst_m.size(); ++j) *dst_m[j] += inv_b * *src_m[j];
        const auto src_v = chunk[c].vector_blocks();
        const auto dst_v = out.grads.vector_blocks();
        for (std::size_t j = 0; j < dst_v.size(); ++j) *dst_v[j] += inv_b * *src_v[j];
    }
    return out;
}

namespace {

struct AdamState {
    NtmParams m;
    NtmParams v;
    int t = 0;
};

void adam_update(NtmParams& params, const NtmParams& grads, AdamState& state, double lr) {
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    state.t += 1;
    const double bias1 = 1.0 - std::pow(kBeta1, state.t);
    const double bias2 = 1.0 - std::pow(kBeta2, state.t);
    const auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
        m = kBeta1 * m + (1.0 - kBeta1) * g;
        v = (kBeta2 * v).eval();
        v.array() += (1.0 - kBeta2) * g.array().square();
        p.array() -= lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + kEps);
    };
    auto pm = params.matrix_blocks();
    auto gm = grads.matrix_blocks();
    auto mm = state.m.matrix_blocks();
    auto vm = state.v.matrix_blocks();
    for (std::size_t j = 0; j < pm.size(); ++j) update(*pm[j], *gm[j], *mm[j], *vm[j]);
    auto pv = params.vector_blocks();
    auto gv = grads.vector_blocks();
    auto mv = state.m.vector_blocks();
    auto vv = state.v.vector_blocks();
    for (std::size_t j = 0; j < pv.size(); ++j) update(*pv[j], *gv[j], *mv[j], *vv[j]);
}

bool grads_finite(const NtmParams& grads) {
    for (const MatrixXd* m : grads.matrix_blocks()) {
        if (!m->allFinite()) return false;
    }
    for (const VectorXd* v : grads.vector_blocks()) {
        if (!v->allFinite()) return false;
    }
    return true;
}

}  // namespace

TrainResult train(const Corpus& corpus, const TrainConfig& cfg, const EmbeddingTable& embeddings,
                  std::ostream* log_stream) {
    cfg.validate();
    if (corpus.size() == 0) throw std::invalid_argument("train: corpus is empty");
    if (embeddings.size() != corpus.vocab.size()) {
        throw std::invalid_argument("train: embedding table covers " +
                                    std::to_string(embeddings.size()) +
                                    " words but the vocabulary has " +
                                    std::to_string(corpus.vocab.size()));
    }

    std::vector<int> train_idx = corpus.train_idx;
    if (train_idx.empty()) {
        train_idx.resize(corpus.docs.size());
        std::iota(train_idx.begin(), train_idx.end(), 0);
    }
    for (const int idx : train_idx) {
        if (corpus.docs[static_cast<std::size_t>(idx)].empty()) {
            throw std::invalid_argument("train: document '" +
                                        corpus.doc_ids[static_cast<std::size_t>(idx)] +
                                        "' has no tokens");
        }
    }

    const bool use_greg = cfg.gamma > 0.0;
    const bool needs_tfidf = use_greg && (cfg.augment == AugmentKind::HighestToSimilar ||
                                          cfg.augment == AugmentKind::HighestToDissimilar ||
                                          cfg.augment == AugmentKind::LowestToSimilar ||
                                          cfg.augment == AugmentKind::LowestToDissimilar);
    NeighborIndex neighbors;
    VectorXd idf;
    if (use_greg) {
        neighbors = build_neighbor_index(embeddings, cfg.neighbor_pool);
        if (needs_tfidf) idf = idf_weights(corpus.vocab, corpus.size());
    }

    Rng root(cfg.seed);
    const std::uint64_t init_seed = root.next_u64();
    Rng rng(root.next_u64());

    TrainResult result;
    result.params = init_params(corpus.vocab.size(), cfg.topics, cfg.hidden, init_seed);
    AdamState adam{zeros_like(result.params), zeros_like(result.params), 0};

    const int n_train = static_cast<int>(train_idx.size());
    const int batch = std::min(cfg.batch_size, n_train);
    const int steps_per_epoch = (n_train + batch - 1) / batch;
    const int total_steps = steps_per_epoch * cfg.epochs;

    std::vector<int> order = train_idx;
    for (int step = 0; step < total_steps; ++step) {
        const auto started = std::chrono::steady_clock::now();
        const int pos_in_epoch = step % steps_per_epoch;
        if (pos_in_epoch == 0) {
            order = train_idx;
            rng.shuffle(order);
        }
        const int begin = pos_in_epoch * batch;
        const int end = std::min(begin + batch, n_train);
        const std::size_t bsize = static_cast<std::size_t>(end - begin);

        std::vector<const BowVector*> docs(bsize);
        for (std::size_t i = 0; i < bsize; ++i) {
            docs[i] = &corpus.docs[static_cast<std::size_t>(order[static_cast<std::size_t>(begin) + i])];
        }

        // All randomness is drawn serially in batch order: augmentation seeds
        // first, then the reparameterisation noise.
        std::vector<BowVector> aug_docs;
        if (use_greg) {
            aug_docs.resize(bsize);
            for (std::size_t i = 0; i < bsize; ++i) {
                AugmentConfig aug;
                aug.kind = cfg.augment;
                aug.beta = cfg.aug_beta;
                aug.top_words = cfg.neighbor_pool;
                aug.seed = rng.next_u64();
                VectorXd weights;
                if (needs_tfidf) weights = tfidf_weights(*docs[i], idf);
                aug_docs[i] = augment_bow(*docs[i], aug, weights, neighbors).bow;
            }
        }
        MatrixXd etas(bsize, cfg.topics);
        for (std::size_t i = 0; i < bsize; ++i) {
            for (int k = 0; k < cfg.topics; ++k) {
                etas(static_cast<Eigen::Index>(i), k) = rng.normal();
            }
        }

        StepEval eval;
        try {
            eval = training_step_eval(docs, aug_docs, etas, result.params, embeddings, cfg);
        } catch (const std::runtime_error& e) {
            // Numeric blow-ups inside the step (overflowing activations and
            // the like) count as divergence; the parameters still hold the
            // last good state.
            result.halted = true;
            result.halt_reason = std::string("step ") + std::to_string(step) + ": " + e.what();
            break;
        }
        if (!std::isfinite(eval.total) || !grads_finite(eval.grads)) {
            // Halt without applying the bad update.
            result.halted = true;
            result.halt_reason = "non-finite loss or gradient at step " + std::to_string(step);
            break;
        }
        adam_update(result.params, eval.grads, adam, cfg.learning_rate);

        StepLog entry;
        entry.step = step;
        entry.elbo = eval.elbo;
        entry.greg = eval.greg;
        entry.total = eval.total;
        entry.sinkhorn_nonconverged = eval.sinkhorn_nonconverged;
        entry.max_violation = eval.max_violation;
        entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                            .count();
        result.log.push_back(entry);
        result.steps_completed = step + 1;
        if (log_stream != nullptr) {
            nlohmann::json line;
            line["step"] = entry.step;
            line["elbo"] = entry.elbo;
            line["greg"] = entry.greg;
            line["total"] = entry.total;
            line["sinkhorn_nonconverged"] = entry.sinkhorn_nonconverged;
            line["max_violation"] = entry.max_violation;
            line["seconds"] = entry.seconds;
            *log_stream << line.dump() << '\n';
        }
    }
    return result;
}

Eigen::MatrixXd infer(const Corpus& corpus, const std::vector<int>& indices,
                      const NtmParams& params) {
    if (corpus.vocab.size() != params.vocab()) {
        throw std::invalid_argument(
            "infer: corpus vocabulary size " + std::to_string(corpus.vocab.size()) +
            " does not match the model's " + std::to_string(params.vocab()) +
            " (align corpora through a united vocabulary)");
    }
    std::vector<int> rows = indices;
    if (rows.empty()) {
        rows.resize(corpus.docs.size());
        std::iota(rows.begin(), rows.end(), 0);
    }
    for (const int idx : rows) {
        if (idx < 0 || idx >= corpus.size()) {
            throw std::invalid_argument("infer: document index " + std::to_string(idx) +
                                        " outside [0, " + std::to_string(corpus.size()) + ")");
        }
    }
    MatrixXd reps(rows.size(), params.topics());
    const VectorXd zero_eta = VectorXd::Zero(params.topics());
    parallel_for(rows.size(), [&](std::size_t i) {
        const Encoded enc = encode_with_noise(
            corpus.docs[static_cast<std::size_t>(rows[i])], params, zero_eta);
        reps.row(static_cast<Eigen::Index>(i)) = softmax_vec(enc.z_raw).transpose();
    });
    return reps;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

constexpr char kMagic[8] = {'G', 'R', 'E', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_bytes(std::ofstream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ofstream& out, T value) {
    write_bytes(out, &value, sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& what) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("load_checkpoint: truncated file while reading " + what);
    return value;
}

}  // namespace

void save_checkpoint(const NtmParams& params, std::uint64_t vocab_hash,
                     const std::filesystem::path& file) {
    params.validate();
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + file.string());
    write_bytes(out, kMagic, sizeof(kMagic));
    write_pod(out, kVersion);
    write_pod(out, static_cast<std::uint32_t>(params.vocab()));
    write_pod(out, static_cast<std::uint32_t>(params.topics()));
    write_pod(out, static_cast<std::uint32_t>(params.hidden()));
    write_pod(out, vocab_hash);
    // Parameter blocks as raw little-endian doubles, interleaved in the fixed
    // order: w1, b1, w2, b2, w_mu, b_mu, w_lv, b_lv, dec_w, dec_b.
    const auto ms = params.matrix_blocks();
    const auto vs = params.vector_blocks();
    for (std::size_t j = 0; j < ms.size(); ++j) {
        write_bytes(out, ms[j]->data(), sizeof(double) * static_cast<std::size_t>(ms[j]->size()));
        write_bytes(out, vs[j]->data(), sizeof(double) * static_cast<std::size_t>(vs[j]->size()));
    }
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + file.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("load_checkpoint: " + file.string() +
                                 " is not a checkpoint file (bad magic)");
    }
    const auto version = read_pod<std::uint32_t>(in, "version");
    if (version != kVersion) {
        throw std::runtime_error("load_checkpoint: unsupported format version " +
                                 std::to_string(version));
    }
    const auto v = read_pod<std::uint32_t>(in, "V");
    const auto k = read_pod<std::uint32_t>(in, "K");
    const auto h = read_pod<std::uint32_t>(in, "H");
    constexpr std::uint32_t kDimCap = 1u << 24;
    if (v == 0 || k == 0 || h == 0 || v > kDimCap || k > kDimCap || h > kDimCap) {
        throw std::runtime_error("load_checkpoint: implausible dimensions V=" + std::to_string(v) +
                                 " K=" + std::to_string(k) + " H=" + std::to_string(h));
    }
    Checkpoint ckpt;
    ckpt.vocab_hash = read_pod<std::uint64_t>(in, "vocabulary hash");
    NtmParams& p = ckpt.params;
    p.w1.resize(h, v);
    p.b1.resize(h);
    p.w2.resize(h, h);
    p.b2.resize(h);
    p.w_mu.resize(k, h);
    p.b_mu.resize(k);
    p.w_lv.resize(k, h);
    p.b_lv.resize(k);
    p.dec_w.resize(v, k);
    p.dec_b.resize(v);
    const auto ms = p.matrix_blocks();
    const auto vs = p.vector_blocks();
    for (std::size_t j = 0; j < ms.size(); ++j) {
        in.read(reinterpret_cast<char*>(ms[j]->data()),
                static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(ms[j]->size())));
        in.read(reinterpret_cast<char*>(vs[j]->data()),
                static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(vs[j]->size())));
        if (!in) {
            throw std::runtime_error("load_checkpoint: truncated parameter block in " +
                                     file.string());
        }
    }
    char probe;
    if (in.read(&probe, 1)) {
        throw std::runtime_error("load_checkpoint: trailing bytes after parameters in " +
                                 file.string());
    }
    p.validate();
    return ckpt;
}

}  // namespace greg
