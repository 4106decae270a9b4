#include "greg/topical.hpp"

#include <doctest.h>

#include <cmath>

#include "greg/rng.hpp"
#include "support/oracles.hpp"

using greg::EmbeddingTable;
using greg::Rng;
using greg::ot::SinkhornConfig;
using greg::topical::Matrix;
using greg::topical::Vector;

namespace {

EmbeddingTable random_embeddings(Rng& rng, int v, int dim) {
    EmbeddingTable emb;
    emb.vectors.resize(v, dim);
    for (int i = 0; i < v; ++i)
        for (int j = 0; j < dim; ++j) emb.vectors(i, j) = rng.normal();
    return emb;
}

Matrix random_decoder(Rng& rng, int v, int k, double scale = 1.0) {
    Matrix W(v, k);
    for (int i = 0; i < v; ++i)
        for (int j = 0; j < k; ++j) W(i, j) = scale * rng.normal();
    return W;
}

Matrix random_simplex_rows(Rng& rng, int rows, int cols) {
    Matrix Z(rows, cols);
    for (int i = 0; i < rows; ++i) {
        double sum = 0.0;
        for (int j = 0; j < cols; ++j) {
            Z(i, j) = 0.05 + rng.uniform_real();
            sum += Z(i, j);
        }
        Z.row(i) /= sum;
    }
    return Z;
}

SinkhornConfig tight_config() {
    SinkhornConfig cfg;
    cfg.lambda = 20.0;
    cfg.max_iters = 50000;
    cfg.stop_threshold = 1e-11;
    return cfg;
}

}  // namespace

TEST_CASE("decoder columns become softmax topics") {
    Matrix W = Matrix::Zero(5, 2);
    W(2, 1) = 1000.0;
    auto topics = greg::topical::topics_from_decoder(W);
    CHECK(topics.num_topics() == 2);
    for (int v = 0; v < 5; ++v) CHECK(topics.weights(0, v) == doctest::Approx(0.2));  // constant column
    CHECK(topics.weights(1, 2) == doctest::Approx(1.0));                              // saturated column
    CHECK(topics.weights.row(1).sum() == doctest::Approx(1.0).epsilon(1e-12));

    Matrix Wshift = W;
    Wshift.col(0).array() += 17.5;
    auto shifted = greg::topical::topics_from_decoder(Wshift);
    CHECK((shifted.weights.row(0) - topics.weights.row(0)).cwiseAbs().maxCoeff() < 1e-9);

    Matrix bad = W;
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(greg::topical::topics_from_decoder(bad), std::invalid_argument);
}

TEST_CASE("truncation keeps the heaviest words and renormalises") {
    greg::topical::TopicSet topics;
    topics.weights.resize(2, 3);
    topics.weights << 0.5, 0.3, 0.2, 1.0 / 3, 1.0 / 3, 1.0 / 3;

    auto t2 = greg::topical::truncate_topics(topics, 2);
    CHECK(t2.topics[0].indices == std::vector<int>{0, 1});
    CHECK(t2.topics[0].weights(0) == doctest::Approx(0.625));
    CHECK(t2.topics[0].weights(1) == doctest::Approx(0.375));
    CHECK(t2.topics[1].indices == std::vector<int>{0, 1});  // ties go to smaller ids

    auto t3 = greg::topical::truncate_topics(topics, 3);
    CHECK(t3.topics[0].weights(0) == doctest::Approx(0.5));
    CHECK(t3.topics[0].weights(2) == doctest::Approx(0.2));

    auto clamped = greg::topical::truncate_topics(topics, 99);
    CHECK(clamped.top_i == 3);

    // truncated mass (before renormalising) grows with I
    double mass2 = 0.5 + 0.3, mass3 = 1.0;
    CHECK(mass3 >= mass2);
}

TEST_CASE("document cost matrix matches per-pair exact transport composed by hand") {
    Rng rng(404);
    const int V = 12, K = 3, I = 4, L = 5;
    auto emb = random_embeddings(rng, V, L);
    auto topics = greg::topical::topics_from_decoder(random_decoder(rng, V, K));
    auto trunc = greg::topical::truncate_topics(topics, I);
    auto md = greg::topical::doc_cost_matrix(trunc, emb);

    CHECK(md.cost.rows() == K);
    CHECK(md.cost.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK((md.cost - md.cost.transpose()).cwiseAbs().maxCoeff() < 1e-12);

    for (int k1 = 0; k1 < K; ++k1)
        for (int k2 = k1 + 1; k2 < K; ++k2) {
            const auto& ta = trunc.topics[static_cast<size_t>(k1)];
            const auto& tb = trunc.topics[static_cast<size_t>(k2)];
            Matrix Ea(I, L), Eb(I, L);
            for (int p = 0; p < I; ++p) {
                Ea.row(p) = emb.vectors.row(ta.indices[static_cast<size_t>(p)]);
                Eb.row(p) = emb.vectors.row(tb.indices[static_cast<size_t>(p)]);
            }
            Matrix C = greg::ot::cosine_cost(Ea, Eb);
            for (int p = 0; p < I; ++p)
                for (int q = 0; q < I; ++q)
                    if (ta.indices[static_cast<size_t>(p)] == tb.indices[static_cast<size_t>(q)]) C(p, q) = 0.0;
            double ref = oracles::lp_transport_cost(ta.weights, tb.weights, C);
            CHECK(md.cost(k1, k2) == doctest::Approx(ref).epsilon(1e-9));
        }
}

TEST_CASE("identical truncated topics are at zero cost") {
    Rng rng(11);
    auto emb = random_embeddings(rng, 8, 4);
    greg::topical::TopicSet topics;
    topics.weights.resize(2, 8);
    Vector w(8);
    for (int v = 0; v < 8; ++v) w(v) = 0.05 + rng.uniform_real();
    w /= w.sum();
    topics.weights.row(0) = w.transpose();
    topics.weights.row(1) = w.transpose();
    auto md = greg::topical::doc_cost_matrix(greg::topical::truncate_topics(topics, 5), emb);
    CHECK(md.cost(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("single topic gives the 1x1 zero matrix") {
    Rng rng(12);
    auto emb = random_embeddings(rng, 6, 3);
    auto topics = greg::topical::topics_from_decoder(random_decoder(rng, 6, 1));
    auto md = greg::topical::doc_cost_matrix(greg::topical::truncate_topics(topics, 3), emb);
    CHECK(md.cost.rows() == 1);
    CHECK(md.cost(0, 0) == 0.0);
}

TEST_CASE("missing embedding rows are reported") {
    Rng rng(13);
    auto emb = random_embeddings(rng, 4, 3);  // too small for V=8
    auto topics = greg::topical::topics_from_decoder(random_decoder(rng, 8, 2));
    auto trunc = greg::topical::truncate_topics(topics, 6);
    CHECK_THROWS_WITH_AS(greg::topical::doc_cost_matrix(trunc, emb), doctest::Contains("no embedding row"),
                         std::invalid_argument);
}

TEST_CASE("topical distance variants bracket each other") {
    Rng rng(505);
    const int K = 4;
    auto emb = random_embeddings(rng, 15, 6);
    auto topics = greg::topical::topics_from_decoder(random_decoder(rng, 15, K));
    auto md = greg::topical::doc_cost_matrix(greg::topical::truncate_topics(topics, 5), emb);

    Vector za = random_simplex_rows(rng, 1, K).row(0).transpose();
    Vector zb = random_simplex_rows(rng, 1, K).row(0).transpose();

    double exact = greg::topical::topical_ot_distance_exact(za, zb, md);
    double sink = greg::topical::topical_ot_distance(za, zb, md, tight_config());
    CHECK(exact <= sink + 1e-9);
    CHECK(sink - exact < 0.1);

    // identical documents
    double self_exact = greg::topical::topical_ot_distance_exact(za, za, md);
    CHECK(self_exact == doctest::Approx(0.0).epsilon(1e-12));
    SinkhornConfig cfg;  // default lambda 100
    double self_sink = greg::topical::topical_ot_distance(za, za, md, cfg);
    CHECK(self_sink <= cfg.epsilon() * std::log(static_cast<double>(K)) + 1e-6);

    // two-topic corner case: all mass moves across the only off-diagonal entry
    greg::topical::DocCostMatrix md2;
    md2.cost.resize(2, 2);
    md2.cost << 0.0, 0.37, 0.37, 0.0;
    Vector e0(2), e1(2);
    e0 << 1.0, 0.0;
    e1 << 0.0, 1.0;
    CHECK(greg::topical::topical_ot_distance_exact(e0, e1, md2) == doctest::Approx(0.37));

    // zero cost matrix
    greg::topical::DocCostMatrix zero;
    zero.cost = Matrix::Zero(K, K);
    CHECK(greg::topical::topical_ot_distance_exact(za, zb, zero) == 0.0);
    CHECK(greg::topical::topical_ot_distance(za, zb, zero, cfg) == 0.0);
}

TEST_CASE("greg loss on a single pair reduces to the scalar distance") {
    Rng rng(606);
    const int V = 10, K = 2;
    auto emb = random_embeddings(rng, V, 4);
    Matrix W = random_decoder(rng, V, K);
    Matrix zs = random_simplex_rows(rng, 1, K), zaug = random_simplex_rows(rng, 1, K);
    SinkhornConfig cfg = tight_config();
    auto res = greg::topical::greg_loss(zs, zaug, W, emb, 4, cfg);
    auto topics = greg::topical::topics_from_decoder(W);
    auto md = greg::topical::doc_cost_matrix(greg::topical::truncate_topics(topics, 4), emb);
    double ref = greg::topical::topical_ot_distance(zs.row(0).transpose(), zaug.row(0).transpose(), md, cfg);
    CHECK(res.loss == doctest::Approx(ref).epsilon(1e-12));
    CHECK(res.nonconverged == 0);
}

TEST_CASE("greg loss is symmetric for matched batches") {
    Rng rng(707);
    const int V = 12, K = 3, B = 4;
    auto emb = random_embeddings(rng, V, 4);
    Matrix W = random_decoder(rng, V, K);
    Matrix zs = random_simplex_rows(rng, B, K);
    // Identical marginals make small-epsilon scaling painfully slow, so this
    // case runs at a mild epsilon where every pair converges tightly.
    SinkhornConfig cfg;
    cfg.lambda = 5.0;
    cfg.max_iters = 20000;
    cfg.stop_threshold = 1e-10;
    auto res = greg::topical::greg_loss(zs, zs, W, emb, 5, cfg);
    CHECK(res.nonconverged == 0);
    CHECK(res.loss < cfg.epsilon() * std::log(static_cast<double>(K)) + 1e-6);
    // Swapping the two batches cannot change anything, so the smooth
    // objective's two gradients coincide, and both stay near zero: the
    // matched batch sits in the flat bottom of the transport landscape.
    CHECK((res.grad_zs - res.grad_zaug).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(res.grad_zs.cwiseAbs().maxCoeff() < 5e-2);
}

TEST_CASE("greg loss is invariant under consistent topic permutation") {
    Rng rng(808);
    const int V = 14, K = 4, B = 3;
    auto emb = random_embeddings(rng, V, 5);
    Matrix W = random_decoder(rng, V, K);
    Matrix zs = random_simplex_rows(rng, B, K), zaug = random_simplex_rows(rng, B, K);
    SinkhornConfig cfg = tight_config();
    auto base = greg::topical::greg_loss(zs, zaug, W, emb, 5, cfg);

    std::vector<int> perm = {2, 0, 3, 1};
    Matrix Wp(V, K), zsp(B, K), zaugp(B, K);
    for (int k = 0; k < K; ++k) {
        Wp.col(k) = W.col(perm[static_cast<size_t>(k)]);
        zsp.col(k) = zs.col(perm[static_cast<size_t>(k)]);
        zaugp.col(k) = zaug.col(perm[static_cast<size_t>(k)]);
    }
    auto permuted = greg::topical::greg_loss(zsp, zaugp, Wp, emb, 5, cfg);
    CHECK(permuted.loss == doctest::Approx(base.loss).epsilon(1e-8));
    for (int k = 0; k < K; ++k) {
        CHECK(permuted.grad_w.col(k).isApprox(base.grad_w.col(perm[static_cast<size_t>(k)]), 1e-6));
        CHECK(permuted.grad_zs.col(k).isApprox(base.grad_zs.col(perm[static_cast<size_t>(k)]), 1e-6));
    }
}

TEST_CASE("greg loss gradients in z match finite differences") {
    Rng rng(909);
    const int V = 10, K = 3, B = 2;
    auto emb = random_embeddings(rng, V, 4);
    Matrix W = random_decoder(rng, V, K);
    Matrix zs = random_simplex_rows(rng, B, K), zaug = random_simplex_rows(rng, B, K);
    SinkhornConfig cfg = tight_config();
    auto res = greg::topical::greg_loss(zs, zaug, W, emb, 4, cfg);

    const double h = 1e-6;
    for (int i = 0; i < B; ++i) {
        Vector dz(K);
        for (int k = 0; k < K; ++k) dz(k) = rng.normal();
        dz.array() -= dz.mean();  // stay on the simplex
        Matrix up = zs, down = zs;
        up.row(i) += h * dz.transpose();
        down.row(i) -= h * dz.transpose();
        double fd = (greg::topical::greg_loss(up, zaug, W, emb, 4, cfg).loss -
                     greg::topical::greg_loss(down, zaug, W, emb, 4, cfg).loss) /
                    (2.0 * h);
        double analytic = res.grad_zs.row(i).transpose().dot(dz);
        CHECK(std::abs(analytic - fd) / std::max(1.0, std::abs(fd)) < 1e-4);
    }
}

TEST_CASE("greg loss gradient in the decoder matches finite differences") {
    Rng rng(1010);
    const int V = 10, K = 3, B = 2, I = 4;
    auto emb = random_embeddings(rng, V, 4);
    Matrix W = random_decoder(rng, V, K);
    Matrix zs = random_simplex_rows(rng, B, K), zaug = random_simplex_rows(rng, B, K);
    SinkhornConfig cfg = tight_config();
    auto res = greg::topical::greg_loss(zs, zaug, W, emb, I, cfg);

    auto index_sets = [&](const Matrix& Wx) {
        auto trunc = greg::topical::truncate_topics(greg::topical::topics_from_decoder(Wx), I);
        std::vector<std::vector<int>> sets;
        for (auto& t : trunc.topics) {
            auto sorted = t.indices;
            std::sort(sorted.begin(), sorted.end());
            sets.push_back(sorted);
        }
        return sets;
    };
    auto base_sets = index_sets(W);

    const double h = 1e-6;
    int accepted = 0;
    for (int probe = 0; probe < 12 && accepted < 4; ++probe) {
        Matrix dW(V, K);
        for (int v = 0; v < V; ++v)
            for (int k = 0; k < K; ++k) dW(v, k) = rng.normal();
        Matrix up = W + h * dW, down = W - h * dW;
        // a probe that flips any top-I set is invalid for the frozen-index
        // gradient; resample it
        if (index_sets(up) != base_sets || index_sets(down) != base_sets) continue;
        double fd =
            (greg::topical::greg_loss(zs, zaug, up, emb, I, cfg).loss -
             greg::topical::greg_loss(zs, zaug, down, emb, I, cfg).loss) /
            (2.0 * h);
        double analytic = (res.grad_w.array() * dW.array()).sum();
        CHECK(std::abs(analytic - fd) / std::max(1.0, std::abs(fd)) < 1e-3);
        ++accepted;
    }
    CHECK(accepted == 4);
}
