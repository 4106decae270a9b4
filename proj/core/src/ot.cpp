#include "greg/ot.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>

#include "greg/parallel.hpp"

namespace greg::ot {

namespace {

constexpr double kSumTol = 1e-9;

void check_weights(const char* fn, const char* which, const Vector& w) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        double v = w(i);
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument(std::string(fn) + ": " + which + " has invalid weight at index " +
                                        std::to_string(i));
        sum += v;
    }
    if (w.size() == 0 || std::abs(sum - 1.0) > kSumTol)
        throw std::invalid_argument(std::string(fn) + ": " + which + " weights must sum to 1 (got " +
                                    std::to_string(sum) + ")");
}

void check_pair(const char* fn, const Vector& a, const Vector& b, const Matrix& M) {
    if (a.size() != M.rows() || b.size() != M.cols())
        throw std::invalid_argument(std::string(fn) + ": cost is " + std::to_string(M.rows()) + "x" +
                                    std::to_string(M.cols()) + " but weights have sizes " +
                                    std::to_string(a.size()) + " and " + std::to_string(b.size()));
    check_weights(fn, "first distribution", a);
    check_weights(fn, "second distribution", b);
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            double c = M(i, j);
            if (!std::isfinite(c) || c < 0.0)
                throw std::invalid_argument(std::string(fn) + ": cost entry (" + std::to_string(i) + "," +
                                            std::to_string(j) + ") is negative or non-finite");
        }
}

std::vector<int> positive_support(const Vector& w) {
    std::vector<int> idx;
    idx.reserve(static_cast<size_t>(w.size()));
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (w(i) > 0.0) idx.push_back(static_cast<int>(i));
    return idx;
}

Vector gather(const Vector& w, const std::vector<int>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = w(idx[k]);
    return out;
}

Matrix gather(const Matrix& M, const std::vector<int>& rows, const std::vector<int>& cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = M(rows[i], cols[j]);
    return out;
}

// log(sum_j exp(T(i,j))) per row, stable against large negative exponents.
Vector log_sum_exp_rows(const Matrix& T) {
    Vector mx = T.rowwise().maxCoeff();
    Eigen::ArrayXd tail = (T.colwise() - mx).array().exp().rowwise().sum();
    return (mx.array() + tail.log()).matrix();
}

Vector log_sum_exp_cols(const Matrix& T) { return log_sum_exp_rows(T.transpose()); }

// ---------------------------------------------------------------------------
// Transportation simplex on the trimmed (strictly positive) problem.
// ---------------------------------------------------------------------------

struct SimplexProblem {
    int n = 0, m = 0;
    Matrix cost;
    Vector a, b;
    Matrix flow;
    std::vector<uint8_t> basic;  // n*m flags, exactly n+m-1 set

    bool is_basic(int i, int j) const { return basic[static_cast<size_t>(i) * m + j] != 0; }
    void set_basic(int i, int j, bool v) { basic[static_cast<size_t>(i) * m + j] = v ? 1 : 0; }
};

// Northwest-corner start: walks the grid once and leaves a spanning tree of
// n+m-1 basic cells, degenerate zeros included.
void northwest_init(SimplexProblem& p) {
    p.flow = Matrix::Zero(p.n, p.m);
    p.basic.assign(static_cast<size_t>(p.n) * p.m, 0);
    int i = 0, j = 0;
    double ra = p.a(0), cb = p.b(0);
    while (true) {
        double t = std::min(ra, cb);
        p.flow(i, j) = t;
        p.set_basic(i, j, true);
        ra -= t;
        cb -= t;
        if (i == p.n - 1 && j == p.m - 1) break;
        if (j == p.m - 1) {
            ++i;
            ra = p.a(i);
        } else if (i == p.n - 1) {
            ++j;
            cb = p.b(j);
        } else if (ra <= cb) {
            ++i;
            ra = p.a(i);
        } else {
            ++j;
            cb = p.b(j);
        }
    }
}

// Node ids: rows are 0..n-1, columns n..n+m-1.
void compute_duals(const SimplexProblem& p, Vector& u, Vector& v) {
    int n = p.n, m = p.m;
    std::vector<std::vector<int>> row_cols(static_cast<size_t>(n)), col_rows(static_cast<size_t>(m));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (p.is_basic(i, j)) {
                row_cols[static_cast<size_t>(i)].push_back(j);
                col_rows[static_cast<size_t>(j)].push_back(i);
            }
    u.setConstant(n, std::numeric_limits<double>::quiet_NaN());
    v.setConstant(m, std::numeric_limits<double>::quiet_NaN());
    u(0) = 0.0;
    std::deque<int> queue{0};
    int seen = 1;
    while (!queue.empty()) {
        int node = queue.front();
        queue.pop_front();
        if (node < n) {
            for (int j : row_cols[static_cast<size_t>(node)])
                if (std::isnan(v(j))) {
                    v(j) = p.cost(node, j) - u(node);
                    queue.push_back(n + j);
                    ++seen;
                }
        } else {
            int j = node - n;
            for (int i : col_rows[static_cast<size_t>(j)])
                if (std::isnan(u(i))) {
                    u(i) = p.cost(i, j) - v(j);
                    queue.push_back(i);
                    ++seen;
                }
        }
    }
    if (seen != n + m) throw std::logic_error("exact_ot: basis lost spanning-tree connectivity");
}

// Unique tree path between the entering cell's column node and row node.
// Returned as the ordered list of basic cells along the walk.
std::vector<std::pair<int, int>> basis_path(const SimplexProblem& p, int enter_i, int enter_j) {
    int n = p.n, m = p.m, total = n + m;
    std::vector<int> parent(static_cast<size_t>(total), -1);
    std::vector<uint8_t> visited(static_cast<size_t>(total), 0);
    int start = n + enter_j, goal = enter_i;
    visited[static_cast<size_t>(start)] = 1;
    std::deque<int> queue{start};
    while (!queue.empty() && !visited[static_cast<size_t>(goal)]) {
        int node = queue.front();
        queue.pop_front();
        if (node < n) {
            for (int j = 0; j < m; ++j)
                if (p.is_basic(node, j) && !visited[static_cast<size_t>(n + j)]) {
                    visited[static_cast<size_t>(n + j)] = 1;
                    parent[static_cast<size_t>(n + j)] = node;
                    queue.push_back(n + j);
                }
        } else {
            int j = node - n;
            for (int i = 0; i < n; ++i)
                if (p.is_basic(i, j) && !visited[static_cast<size_t>(i)]) {
                    visited[static_cast<size_t>(i)] = 1;
                    parent[static_cast<size_t>(i)] = node;
                    queue.push_back(i);
                }
        }
    }
    if (!visited[static_cast<size_t>(goal)]) throw std::logic_error("exact_ot: basis tree is disconnected");
    std::vector<std::pair<int, int>> path;
    for (int node = goal; node != start; node = parent[static_cast<size_t>(node)]) {
        int prev = parent[static_cast<size_t>(node)];
        int i = std::min(node, prev);
        int j = std::max(node, prev) - n;
        path.push_back({i, j});
    }
    std::reverse(path.begin(), path.end());
    return path;
}

void solve_simplex(SimplexProblem& p) {
    int n = p.n, m = p.m;
    Vector u(n), v(m);
    const int bland_after = 5 * n * m + 100;
    const int hard_cap = 50 * n * m + 1000;
    for (int pivot = 0;; ++pivot) {
        if (pivot > hard_cap) throw std::logic_error("exact_ot: pivot limit exceeded");
        compute_duals(p, u, v);
        int best_i = -1, best_j = -1;
        double best_red = -1e-12;
        bool bland = pivot >= bland_after;
        for (int i = 0; i < n && !(bland && best_i >= 0); ++i)
            for (int j = 0; j < m; ++j) {
                if (p.is_basic(i, j)) continue;
                double red = p.cost(i, j) - u(i) - v(j);
                if (red < best_red) {
                    best_red = red;
                    best_i = i;
                    best_j = j;
                    if (bland) break;
                }
            }
        if (best_i < 0) break;  // all reduced costs nonnegative: optimal

        auto path = basis_path(p, best_i, best_j);
        // Walking entering -> path, the entering cell gains mass and signs
        // alternate from there; odd positions along the path lose mass.
        double theta = std::numeric_limits<double>::infinity();
        int leave_i = -1, leave_j = -1;
        for (size_t t = 0; t < path.size(); t += 2) {
            auto [pi, pj] = path[t];
            double fl = p.flow(pi, pj);
            if (fl < theta - 1e-15 ||
                (std::abs(fl - theta) <= 1e-15 && (leave_i < 0 || pi < leave_i || (pi == leave_i && pj < leave_j)))) {
                theta = fl;
                leave_i = pi;
                leave_j = pj;
            }
        }
        if (leave_i < 0) throw std::logic_error("exact_ot: unbounded pivot");
        p.flow(best_i, best_j) += theta;
        for (size_t t = 0; t < path.size(); ++t) {
            auto [pi, pj] = path[t];
            p.flow(pi, pj) += (t % 2 == 0) ? -theta : theta;
        }
        p.flow(leave_i, leave_j) = 0.0;
        p.set_basic(best_i, best_j, true);
        p.set_basic(leave_i, leave_j, false);
    }
}

void certify(const SimplexProblem& p, const Vector& u, const Vector& v) {
    Vector row = p.flow.rowwise().sum(), col = p.flow.colwise().sum();
    if ((row - p.a).cwiseAbs().maxCoeff() > kSumTol || (col - p.b).cwiseAbs().maxCoeff() > kSumTol)
        throw std::logic_error("exact_ot: optimal plan violates the marginal constraints");
    for (int i = 0; i < p.n; ++i)
        for (int j = 0; j < p.m; ++j) {
            double slack = p.cost(i, j) - u(i) - v(j);
            if (slack < -1e-8) throw std::logic_error("exact_ot: dual feasibility certificate failed");
            if (p.flow(i, j) > 1e-12 && std::abs(slack) > 1e-8)
                throw std::logic_error("exact_ot: complementary slackness certificate failed");
        }
}

}  // namespace

void SinkhornConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("sinkhorn: lambda must be positive and finite");
    if (max_iters < 1) throw std::invalid_argument("sinkhorn: max_iters must be at least 1");
    if (!(stop_threshold > 0.0)) throw std::invalid_argument("sinkhorn: stop_threshold must be positive");
}

Matrix cosine_cost(const Matrix& emb_a, const Matrix& emb_b) {
    if (emb_a.cols() != emb_b.cols())
        throw std::invalid_argument("cosine_cost: embedding dimensions differ (" + std::to_string(emb_a.cols()) +
                                    " vs " + std::to_string(emb_b.cols()) + ")");
    Vector na = emb_a.rowwise().norm(), nb = emb_b.rowwise().norm();
    for (Eigen::Index i = 0; i < na.size(); ++i)
        if (!(na(i) > 0.0))
            throw std::invalid_argument("cosine_cost: zero-norm vector at row " + std::to_string(i) +
                                        " of first argument");
    for (Eigen::Index j = 0; j < nb.size(); ++j)
        if (!(nb(j) > 0.0))
            throw std::invalid_argument("cosine_cost: zero-norm vector at row " + std::to_string(j) +
                                        " of second argument");
    Matrix C = Matrix::Ones(emb_a.rows(), emb_b.rows()) -
               (na.cwiseInverse().asDiagonal() * emb_a) * (nb.cwiseInverse().asDiagonal() * emb_b).transpose();
    return C.cwiseMax(0.0).cwiseMin(2.0);
}

Matrix cosine_cost(const Matrix& emb) {
    Matrix C = cosine_cost(emb, emb);
    C = ((C + C.transpose()) / 2.0).eval();
    C.diagonal().setZero();
    return C;
}

ExactPlan exact_ot(const Vector& a, const Vector& b, const Matrix& cost) {
    check_pair("exact_ot", a, b, cost);
    std::vector<int> rows = positive_support(a), cols = positive_support(b);

    SimplexProblem p;
    p.n = static_cast<int>(rows.size());
    p.m = static_cast<int>(cols.size());
    p.a = gather(a, rows);
    p.b = gather(b, cols);
    // The trimmed sums can disagree by a few ulps; the simplex needs them
    // exactly balanced, so the slack is folded into the largest atom.
    double imbalance = p.a.sum() - p.b.sum();
    if (imbalance > 0.0) {
        Eigen::Index k;
        p.b.maxCoeff(&k);
        p.b(k) += imbalance;
    } else if (imbalance < 0.0) {
        Eigen::Index k;
        p.a.maxCoeff(&k);
        p.a(k) -= imbalance;
    }
    p.cost = gather(cost, rows, cols);

    northwest_init(p);
    solve_simplex(p);

    Vector u(p.n), v(p.m);
    compute_duals(p, u, v);
    certify(p, u, v);

    ExactPlan out;
    out.plan = Matrix::Zero(a.size(), b.size());
    for (int i = 0; i < p.n; ++i)
        for (int j = 0; j < p.m; ++j) out.plan(rows[static_cast<size_t>(i)], cols[static_cast<size_t>(j)]) = p.flow(i, j);
    out.objective = (p.flow.array() * p.cost.array()).sum();
    // Zero-weight atoms get the cheapest dual-feasible completion, which is
    // also the marginal cost of routing new mass through them.
    out.dual_row = Vector::Zero(a.size());
    out.dual_col = Vector::Zero(b.size());
    for (int i = 0; i < p.n; ++i) out.dual_row(rows[static_cast<size_t>(i)]) = u(i);
    for (int j = 0; j < p.m; ++j) out.dual_col(cols[static_cast<size_t>(j)]) = v(j);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) > 0.0) continue;
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < p.m; ++j) best = std::min(best, cost(i, cols[static_cast<size_t>(j)]) - v(j));
        out.dual_row(i) = best;
    }
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        if (b(j) > 0.0) continue;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < p.n; ++i) best = std::min(best, cost(rows[static_cast<size_t>(i)], j) - u(i));
        out.dual_col(j) = best;
    }
    return out;
}

double marginal_violation(const Matrix& plan, const Vector& a, const Vector& b) {
    double r = (plan.rowwise().sum() - a).cwiseAbs().maxCoeff();
    double c = (plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff();
    return std::max(r, c);
}

namespace {

// One alternating-scaling run in the log domain. Always numerically safe.
void sinkhorn_log_domain(const Vector& a, const Vector& b, const Matrix& M, const SinkhornConfig& cfg,
                         SinkhornResult& res) {
    const double eps = cfg.epsilon();
    Vector log_a = a.array().log().matrix(), log_b = b.array().log().matrix();
    Vector f = Vector::Zero(a.size()), g = Vector::Zero(b.size());
    for (int it = 1; it <= cfg.max_iters; ++it) {
        f = eps * (log_a - log_sum_exp_rows(Matrix(((-M).rowwise() + g.transpose()) / eps)));
        g = eps * (log_b - log_sum_exp_cols(Matrix(((-M).colwise() + f) / eps)));
        res.plan = ((((-M).colwise() + f).rowwise() + g.transpose()) / eps).array().exp().matrix();
        res.iterations = it;
        res.marginal_violation = marginal_violation(res.plan, a, b);
        if (res.marginal_violation < cfg.stop_threshold) {
            res.converged = true;
            break;
        }
    }
    res.f = f;
    res.g = g;
    res.objective = (res.plan.array() * M.array()).sum();
}

// Plain-domain scaling for well-conditioned exponents. Returns false if the
// scalings lose finiteness or stall above the stop threshold (its roundoff
// floor sits higher than the log domain's), in which case the caller
// restarts in log space.
bool sinkhorn_plain_domain(const Vector& a, const Vector& b, const Matrix& M, const SinkhornConfig& cfg,
                           SinkhornResult& res) {
    const double eps = cfg.epsilon();
    Matrix K = (-M / eps).array().exp().matrix();
    Vector u = Vector::Ones(a.size()), v = Vector::Ones(b.size());
    for (int it = 1; it <= cfg.max_iters; ++it) {
        Vector kv = K * v;
        if ((kv.array() <= 0.0).any()) return false;
        u = a.cwiseQuotient(kv);
        Vector ktu = K.transpose() * u;
        if ((ktu.array() <= 0.0).any()) return false;
        v = b.cwiseQuotient(ktu);
        if (!u.allFinite() || !v.allFinite()) return false;
        res.plan = u.asDiagonal() * K * v.asDiagonal();
        res.iterations = it;
        res.marginal_violation = marginal_violation(res.plan, a, b);
        if (res.marginal_violation < cfg.stop_threshold) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged) return false;
    res.f = (eps * u.array().log()).matrix();
    res.g = (eps * v.array().log()).matrix();
    res.objective = (res.plan.array() * M.array()).sum();
    return res.f.allFinite() && res.g.allFinite();
}

}  // namespace

SinkhornResult sinkhorn(const Vector& a, const Vector& b, const Matrix& cost, const SinkhornConfig& cfg) {
    cfg.validate();
    check_pair("sinkhorn", a, b, cost);

    std::vector<int> rows = positive_support(a), cols = positive_support(b);
    Vector at = gather(a, rows), bt = gather(b, cols);
    Matrix Mt = gather(cost, rows, cols);

    SinkhornResult trimmed;
    const double eps = cfg.epsilon();
    bool plain_ok = Mt.size() > 0 && Mt.maxCoeff() / eps < 30.0;
    if (!plain_ok || !sinkhorn_plain_domain(at, bt, Mt, cfg, trimmed)) {
        trimmed = SinkhornResult{};
        sinkhorn_log_domain(at, bt, Mt, cfg, trimmed);
    }

    SinkhornResult out;
    out.plan = Matrix::Zero(a.size(), b.size());
    out.f = Vector::Zero(a.size());
    out.g = Vector::Zero(b.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        out.f(rows[i]) = trimmed.f(static_cast<Eigen::Index>(i));
        for (size_t j = 0; j < cols.size(); ++j)
            out.plan(rows[i], cols[j]) = trimmed.plan(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    for (size_t j = 0; j < cols.size(); ++j) out.g(cols[j]) = trimmed.g(static_cast<Eigen::Index>(j));
    out.objective = trimmed.objective;
    out.converged = trimmed.converged;
    out.marginal_violation = trimmed.marginal_violation;
    out.iterations = trimmed.iterations;
    out.epsilon = eps;
    out.a = a;
    out.b = b;
    return out;
}

std::vector<SinkhornResult> sinkhorn_batch(const std::vector<Vector>& A, const std::vector<Vector>& B,
                                           const Matrix& cost, const SinkhornConfig& cfg) {
    if (A.size() != B.size())
        throw std::invalid_argument("sinkhorn_batch: got " + std::to_string(A.size()) + " first and " +
                                    std::to_string(B.size()) + " second distributions");
    std::vector<SinkhornResult> out(A.size());
    parallel_for(A.size(), [&](size_t k) {
        try {
            out[k] = sinkhorn(A[k], B[k], cost, cfg);
        } catch (const std::exception& ex) {
            out[k] = SinkhornResult{};
            out[k].converged = false;
            out[k].error = ex.what();
        }
    });
    return out;
}

SinkhornGradients sinkhorn_grad(const SinkhornResult& result, const Matrix& cost) {
    if (!result.converged)
        throw std::invalid_argument("sinkhorn_grad: plan did not converge; gradients would be meaningless");
    if (result.a.size() != cost.rows() || result.b.size() != cost.cols())
        throw std::invalid_argument("sinkhorn_grad: cost shape does not match the solved instance");

    std::vector<int> rows = positive_support(result.a), cols = positive_support(result.b);
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size()), m = static_cast<Eigen::Index>(cols.size());
    Vector at = gather(result.a, rows), bt = gather(result.b, cols);
    Matrix Mt = gather(cost, rows, cols);
    Matrix Pt(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) Pt(i, j) = result.plan(rows[static_cast<size_t>(i)], cols[static_cast<size_t>(j)]);

    // Differentiating the fixed point (marginals pinned to a and b) gives a
    // symmetric system for the potential sensitivities w, z:
    //   [diag(a)  P ] [w]   [row sums of P.*M]
    //   [P^T diag(b)] [z] = [col sums of P.*M]
    // The matrix is singular along the usual additive gauge, so the
    // minimal-norm solution is taken.
    Matrix PM = (Pt.array() * Mt.array()).matrix();
    Vector rhs(n + m);
    rhs.head(n) = PM.rowwise().sum();
    rhs.tail(m) = PM.colwise().sum();
    Matrix A = Matrix::Zero(n + m, n + m);
    A.topLeftCorner(n, n) = Matrix(at.asDiagonal());
    A.topRightCorner(n, m) = Pt;
    A.bottomLeftCorner(m, n) = Pt.transpose();
    A.bottomRightCorner(m, m) = Matrix(bt.asDiagonal());
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
    Vector sol = cod.solve(rhs);
    Vector w = sol.head(n), z = sol.tail(m);

    SinkhornGradients out;
    out.wrt_cost = Matrix::Zero(cost.rows(), cost.cols());
    Matrix Gt =
        (Pt.array() * (1.0 + ((((-Mt).colwise() + w).rowwise() + z.transpose()) / result.epsilon).array())).matrix();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            out.wrt_cost(rows[static_cast<size_t>(i)], cols[static_cast<size_t>(j)]) = Gt(i, j);
    out.wrt_a = Vector::Zero(result.a.size());
    out.wrt_b = Vector::Zero(result.b.size());
    double wc = w.size() > 0 ? w.mean() : 0.0, zc = z.size() > 0 ? z.mean() : 0.0;
    for (Eigen::Index i = 0; i < n; ++i) out.wrt_a(rows[static_cast<size_t>(i)]) = w(i) - wc;
    for (Eigen::Index j = 0; j < m; ++j) out.wrt_b(cols[static_cast<size_t>(j)]) = z(j) - zc;
    return out;
}

}  // namespace greg::ot
