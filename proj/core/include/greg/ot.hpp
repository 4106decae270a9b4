#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace greg::ot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Discrete distribution over an indexed support. Weights must be nonnegative
// and sum to 1 within 1e-9.
struct DiscreteDistribution {
    Vector weights;
    std::vector<int> support_ids;  // optional labels for the paired cost rows
};

struct SinkhornConfig {
    double lambda = 100.0;  // entropic coefficient is epsilon = 1 / lambda
    int max_iters = 5000;
    double stop_threshold = 0.005;  // max marginal violation, L-infinity

    double epsilon() const { return 1.0 / lambda; }
    void validate() const;
};

// Pairwise cosine dissimilarity, entry(i,j) = 1 - cos(a_i, b_j), clamped to
// [0, 2]. Rows are vectors; zero-norm rows are rejected by index.
Matrix cosine_cost(const Matrix& emb_a, const Matrix& emb_b);
// Single-support variant: symmetric with exact zero diagonal.
Matrix cosine_cost(const Matrix& emb);

// Result of the exact solver. Duals have gauge dual_row[first solved row]=0;
// complementary slackness against them is verified before returning.
struct ExactPlan {
    Matrix plan;
    double objective = 0.0;
    Vector dual_row;
    Vector dual_col;
};

// Exact optimal transport by the transportation simplex. Intended for small
// dense instances (supports up to a few dozen). Zero-weight atoms are trimmed
// before solving and reinserted as zero rows/columns.
ExactPlan exact_ot(const Vector& a, const Vector& b, const Matrix& cost);

struct SinkhornResult {
    Matrix plan;
    double objective = 0.0;
    bool converged = false;
    double marginal_violation = 0.0;  // at exit, max over both marginals
    int iterations = 0;
    Vector f, g;  // scaling potentials, zero at trimmed atoms
    double epsilon = 0.0;
    Vector a, b;  // inputs, kept for gradient evaluation
    std::string error;  // set by sinkhorn_batch when a pair failed outright
};

// Entropic OT via alternating scaling. Runs in the log domain unless the
// largest exponent max(cost)/epsilon is small enough for plain scaling; plain
// iterations that lose finiteness restart in the log domain. Non-convergence
// is reported through the flag, never silently.
SinkhornResult sinkhorn(const Vector& a, const Vector& b, const Matrix& cost,
                        const SinkhornConfig& cfg);

// Independent solves of pairs (A[i], B[i]) under one shared cost matrix.
// A failing pair is flagged in its slot; the batch never aborts.
std::vector<SinkhornResult> sinkhorn_batch(const std::vector<Vector>& A,
                                           const std::vector<Vector>& B,
                                           const Matrix& cost,
                                           const SinkhornConfig& cfg);

// Gradients of the transport objective <P, cost> at a converged solve,
// obtained by differentiating through the final scaling state. wrt_a and
// wrt_b are centred to sum to zero; they are derivatives along mass-
// preserving directions.
struct SinkhornGradients {
    Matrix wrt_cost;
    Vector wrt_a;
    Vector wrt_b;
};
SinkhornGradients sinkhorn_grad(const SinkhornResult& result, const Matrix& cost);

// Max L-infinity violation of the two marginal constraints.
double marginal_violation(const Matrix& plan, const Vector& a, const Vector& b);

}  // namespace greg::ot
