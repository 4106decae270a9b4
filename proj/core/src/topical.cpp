#include "greg/topical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "greg/parallel.hpp"

namespace greg::topical {

namespace {

Vector stable_softmax(const Vector& logits) {
    Vector e = (logits.array() - logits.maxCoeff()).exp().matrix();
    return e / e.sum();
}

void assert_doc_cost_invariants(const Matrix& md) {
    if (md.rows() != md.cols()) throw std::logic_error("doc_cost_matrix: result is not square");
    for (int k = 0; k < md.rows(); ++k)
        if (md(k, k) != 0.0) throw std::logic_error("doc_cost_matrix: nonzero diagonal entry");
    if ((md - md.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::logic_error("doc_cost_matrix: asymmetry beyond tolerance");
    if (md.size() > 0 && md.minCoeff() < 0.0) throw std::logic_error("doc_cost_matrix: negative entry");
}

}  // namespace

TopicSet topics_from_decoder(const Matrix& W) {
    if (!W.allFinite()) throw std::invalid_argument("topics_from_decoder: decoder weight has non-finite entries");
    if (W.rows() < 1 || W.cols() < 1) throw std::invalid_argument("topics_from_decoder: decoder weight is empty");
    TopicSet out;
    out.weights.resize(W.cols(), W.rows());
    for (int k = 0; k < W.cols(); ++k) out.weights.row(k) = stable_softmax(W.col(k)).transpose();
    return out;
}

TruncatedTopicSet truncate_topics(const TopicSet& topics, int top_i) {
    if (top_i < 1) throw std::invalid_argument("truncate_topics: top_i must be at least 1");
    const int K = topics.num_topics(), V = topics.vocab_size();
    const int I = std::min(top_i, V);
    TruncatedTopicSet out;
    out.top_i = I;
    out.topics.resize(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
        std::vector<int> order(static_cast<size_t>(V));
        std::iota(order.begin(), order.end(), 0);
        std::partial_sort(order.begin(), order.begin() + I, order.end(), [&](int u, int v) {
            double wu = topics.weights(k, u), wv = topics.weights(k, v);
            return wu > wv || (wu == wv && u < v);
        });
        TruncatedTopic& t = out.topics[static_cast<size_t>(k)];
        t.indices.assign(order.begin(), order.begin() + I);
        t.weights.resize(I);
        for (int p = 0; p < I; ++p) t.weights(p) = topics.weights(k, t.indices[static_cast<size_t>(p)]);
        t.weights /= t.weights.sum();
    }
    return out;
}

DocCostMatrix doc_cost_matrix(const TruncatedTopicSet& topics, const EmbeddingTable& emb) {
    const int K = static_cast<int>(topics.topics.size());
    if (K < 1) throw std::invalid_argument("doc_cost_matrix: no topics");
    for (const TruncatedTopic& t : topics.topics)
        for (int w : t.indices)
            if (w < 0 || w >= emb.size())
                throw std::invalid_argument("doc_cost_matrix: word id " + std::to_string(w) +
                                            " has no embedding row");

    DocCostMatrix out;
    out.cost = Matrix::Zero(K, K);
    const int num_pairs = K * (K - 1) / 2;
    out.pairs.resize(static_cast<size_t>(num_pairs));
    std::vector<std::string> pair_errors(static_cast<size_t>(num_pairs));

    parallel_for(static_cast<size_t>(num_pairs), [&](size_t p) {
        // invert the row-major pair order
        int k1 = 0;
        size_t rem = p;
        while (rem >= static_cast<size_t>(K - 1 - k1)) {
            rem -= static_cast<size_t>(K - 1 - k1);
            ++k1;
        }
        int k2 = k1 + 1 + static_cast<int>(rem);
        out.pairs[p].k1 = k1;
        out.pairs[p].k2 = k2;
        try {
            const TruncatedTopic& ta = topics.topics[static_cast<size_t>(k1)];
            const TruncatedTopic& tb = topics.topics[static_cast<size_t>(k2)];
            Matrix Ea(ta.indices.size(), emb.dim()), Eb(tb.indices.size(), emb.dim());
            for (size_t i = 0; i < ta.indices.size(); ++i) Ea.row(static_cast<Eigen::Index>(i)) = emb.vectors.row(ta.indices[i]);
            for (size_t j = 0; j < tb.indices.size(); ++j) Eb.row(static_cast<Eigen::Index>(j)) = emb.vectors.row(tb.indices[j]);
            Matrix C = ot::cosine_cost(Ea, Eb);
            for (size_t i = 0; i < ta.indices.size(); ++i)
                for (size_t j = 0; j < tb.indices.size(); ++j)
                    if (ta.indices[i] == tb.indices[j]) C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;

            auto plan = ot::exact_ot(ta.weights, tb.weights, C);
            DocCostMatrix::PairSolution& sol = out.pairs[p];
            sol.dual_row = (plan.dual_row.array() - plan.dual_row.mean()).matrix();
            sol.dual_col = (plan.dual_col.array() - plan.dual_col.mean()).matrix();
            out.cost(k1, k2) = plan.objective;
            out.cost(k2, k1) = plan.objective;
        } catch (const std::exception& ex) {
            pair_errors[p] = ex.what();
        }
    });

    for (size_t p = 0; p < pair_errors.size(); ++p)
        if (!pair_errors[p].empty())
            throw std::runtime_error("doc_cost_matrix: pair (" + std::to_string(out.pairs[p].k1) + "," +
                                     std::to_string(out.pairs[p].k2) + "): " + pair_errors[p]);

    assert_doc_cost_invariants(out.cost);
    return out;
}

double topical_ot_distance(const Vector& za, const Vector& zb, const DocCostMatrix& md,
                           const ot::SinkhornConfig& cfg) {
    return ot::sinkhorn(za, zb, md.cost, cfg).objective;
}

double topical_ot_distance_exact(const Vector& za, const Vector& zb, const DocCostMatrix& md) {
    return ot::exact_ot(za, zb, md.cost).objective;
}

GregLossResult greg_loss(const Matrix& zs, const Matrix& zaug, const Matrix& W, const EmbeddingTable& emb,
                         int top_i, const ot::SinkhornConfig& cfg) {
    if (zs.rows() != zaug.rows() || zs.cols() != zaug.cols())
        throw std::invalid_argument("greg_loss: batch shapes differ");
    if (zs.rows() < 1) throw std::invalid_argument("greg_loss: empty batch");
    if (zs.cols() != W.cols())
        throw std::invalid_argument("greg_loss: topic count " + std::to_string(zs.cols()) +
                                    " does not match decoder columns " + std::to_string(W.cols()));

    const int B = static_cast<int>(zs.rows());
    const int K = static_cast<int>(zs.cols());
    const int V = static_cast<int>(W.rows());

    TopicSet topics = topics_from_decoder(W);
    TruncatedTopicSet trunc = truncate_topics(topics, top_i);

    GregLossResult res;
    res.doc_cost = doc_cost_matrix(trunc, emb);
    res.grad_zs = Matrix::Zero(B, K);
    res.grad_zaug = Matrix::Zero(B, K);
    res.grad_w = Matrix::Zero(V, K);

    std::vector<Vector> A(static_cast<size_t>(B)), Bv(static_cast<size_t>(B));
    for (int i = 0; i < B; ++i) {
        A[static_cast<size_t>(i)] = zs.row(i).transpose();
        Bv[static_cast<size_t>(i)] = zaug.row(i).transpose();
    }
    auto solved = ot::sinkhorn_batch(A, Bv, res.doc_cost.cost, cfg);

    // Per-pair gradients are computed in parallel but reduced serially so the
    // result does not depend on the thread count.
    std::vector<ot::SinkhornGradients> grads(static_cast<size_t>(B));
    parallel_for(static_cast<size_t>(B), [&](size_t i) {
        if (solved[i].converged) grads[i] = ot::sinkhorn_grad(solved[i], res.doc_cost.cost);
    });

    double total = 0.0;
    int used = 0;
    Matrix dmd = Matrix::Zero(K, K);
    for (int i = 0; i < B; ++i) {
        const auto& s = solved[static_cast<size_t>(i)];
        if (!s.converged) {
            ++res.nonconverged;
            continue;
        }
        total += s.objective;
        res.max_violation = std::max(res.max_violation, s.marginal_violation);
        dmd += grads[static_cast<size_t>(i)].wrt_cost;
        res.grad_zs.row(i) = grads[static_cast<size_t>(i)].wrt_a.transpose();
        res.grad_zaug.row(i) = grads[static_cast<size_t>(i)].wrt_b.transpose();
        ++used;
    }
    if (used == 0) return res;  // nothing converged: zero loss, zero gradients, all pairs counted

    const double inv = 1.0 / used;
    res.loss = total * inv;
    res.grad_zs *= inv;
    res.grad_zaug *= inv;
    dmd *= inv;

    // Chain rule into the decoder: each pair objective moves both mirrored
    // entries of M^d; its derivative in the truncated weights is the centred
    // exact-OT duals; truncation renormalisation and the column softmax close
    // the path. Index sets stay frozen, the one documented bias.
    for (const auto& sol : res.doc_cost.pairs) {
        double weight = dmd(sol.k1, sol.k2) + dmd(sol.k2, sol.k1);
        if (weight == 0.0) continue;
        for (int side = 0; side < 2; ++side) {
            int k = side == 0 ? sol.k1 : sol.k2;
            const Vector& dual = side == 0 ? sol.dual_row : sol.dual_col;
            const TruncatedTopic& t = trunc.topics[static_cast<size_t>(k)];
            double ssum = 0.0;
            for (int idx : t.indices) ssum += topics.weights(k, idx);
            // d(pair)/d t~ = dual; through renormalisation: (g - <g, t~>) / ssum
            Vector g = weight * dual;
            double gdot = g.dot(t.weights);
            Vector h = Vector::Zero(V);  // gradient on the full softmax topic
            for (size_t p = 0; p < t.indices.size(); ++p)
                h(t.indices[p]) = (g(static_cast<Eigen::Index>(p)) - gdot) / ssum;
            // softmax backward for column k
            Vector tk = topics.weights.row(k).transpose();
            double hdott = h.dot(tk);
            res.grad_w.col(k) += (tk.array() * (h.array() - hdott)).matrix();
        }
    }
    return res;
}

}  // namespace greg::topical
