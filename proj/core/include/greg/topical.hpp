#pragma once

#include <Eigen/Dense>
#include <vector>

#include "greg/embeddings.hpp"
#include "greg/ot.hpp"

namespace greg::topical {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// K topics over V words; rows are distributions.
struct TopicSet {
    Matrix weights;  // K x V, each row sums to 1

    int num_topics() const { return static_cast<int>(weights.rows()); }
    int vocab_size() const { return static_cast<int>(weights.cols()); }
};

// One topic cut down to its heaviest words.
struct TruncatedTopic {
    std::vector<int> indices;  // word ids, heaviest first, ties to the smaller id
    Vector weights;            // renormalised to sum 1, aligned with indices
};

struct TruncatedTopicSet {
    std::vector<TruncatedTopic> topics;
    int top_i = 0;
};

// Normalise decoder columns into topics: t_k = softmax(W[:,k]).
TopicSet topics_from_decoder(const Matrix& W);

// Keep each topic's top_i largest-weight words and renormalise. top_i is
// clamped to the vocabulary size.
TruncatedTopicSet truncate_topics(const TopicSet& topics, int top_i);

// K x K matrix of exact transport distances between truncated topics over
// cosine word costs, plus the per-pair solver artifacts the training gradient
// needs. Symmetric with a zero diagonal by construction, verified on every
// build.
struct DocCostMatrix {
    Matrix cost;  // K x K

    // Upper-triangle pair solutions in row-major pair order, k1 < k2.
    struct PairSolution {
        int k1 = 0, k2 = 0;
        Vector dual_row, dual_col;  // exact-OT duals, centred
    };
    std::vector<PairSolution> pairs;

    int num_topics() const { return static_cast<int>(cost.rows()); }
};

DocCostMatrix doc_cost_matrix(const TruncatedTopicSet& topics, const EmbeddingTable& emb);

// Transport distance between two documents' topic distributions under a
// document cost matrix. The Sinkhorn form is the training path; the exact
// form is for evaluation, where determinism matters more than speed.
double topical_ot_distance(const Vector& za, const Vector& zb, const DocCostMatrix& md,
                           const ot::SinkhornConfig& cfg);
double topical_ot_distance_exact(const Vector& za, const Vector& zb, const DocCostMatrix& md);

// Mean Sinkhorn distance between matched batches of topic distributions,
// differentiated with respect to the distributions and, through the document
// cost matrix, the decoder weight. Top-I index sets are handled as constants
// for the step, so the W path is exact only between reselections.
struct GregLossResult {
    double loss = 0.0;
    Matrix grad_zs;    // B x K
    Matrix grad_zaug;  // B x K
    Matrix grad_w;     // V x K
    int nonconverged = 0;       // batch pairs excluded from the mean
    double max_violation = 0.0;  // worst marginal violation among converged pairs
    DocCostMatrix doc_cost;
};

GregLossResult greg_loss(const Matrix& zs, const Matrix& zaug, const Matrix& W, const EmbeddingTable& emb,
                         int top_i, const ot::SinkhornConfig& cfg);

}  // namespace greg::topical
