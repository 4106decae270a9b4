#include "oracles.hpp"

#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracles {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFlowTol = 1e-15;

// Minimum cost over all spanning trees (with nonnegative flows) of the
// complete bipartite graph on `rows` x `cols`. Decomposition: fix the first
// row r0; deleting r0 from any spanning tree leaves one component per
// neighbour of r0, so trees correspond to (partition of the columns, a
// representative column per part, row assignment, subtrees). The flow on the
// edge r0->s is forced by mass balance of s's part, which is where negative
// branches get pruned.
double tree_min(const std::vector<int>& rows, const std::vector<int>& cols, const Eigen::VectorXd& a,
                const Eigen::VectorXd& b, const Eigen::MatrixXd& M) {
    if (rows.size() == 1) {
        double c = 0.0;
        for (int j : cols) c += b(j) * M(rows[0], j);
        return c;
    }
    if (cols.size() == 1) {
        double c = 0.0;
        for (int i : rows) c += a(i) * M(i, cols[0]);
        return c;
    }

    const int r0 = rows[0];
    const std::vector<int> rest_rows(rows.begin() + 1, rows.end());
    const size_t m = cols.size();
    double best = kInf;

    // Restricted-growth codes enumerate the set partitions of `cols`.
    std::vector<int> code(m, 0);
    std::function<void(size_t, int)> emit_partitions = [&](size_t pos, int max_block) {
        if (pos < m) {
            for (int blk = 0; blk <= max_block + 1; ++blk) {
                code[pos] = blk;
                emit_partitions(pos + 1, std::max(max_block, blk));
            }
            return;
        }
        const int k = max_block + 1;
        std::vector<std::vector<int>> part_cols(static_cast<size_t>(k));
        for (size_t j = 0; j < m; ++j) part_cols[static_cast<size_t>(code[j])].push_back(cols[j]);

        // Assign the remaining rows to parts via a base-k counter.
        std::vector<int> assign(rest_rows.size(), 0);
        while (true) {
            std::vector<std::vector<int>> part_rows(static_cast<size_t>(k));
            for (size_t r = 0; r < rest_rows.size(); ++r)
                part_rows[static_cast<size_t>(assign[r])].push_back(rest_rows[r]);

            double total = 0.0;
            for (int t = 0; t < k && total < kInf; ++t) {
                double x = 0.0;  // flow on the edge r0 -> representative of part t
                for (int j : part_cols[static_cast<size_t>(t)]) x += b(j);
                for (int i : part_rows[static_cast<size_t>(t)]) x -= a(i);
                if (x < -kFlowTol) {
                    total = kInf;
                    break;
                }
                x = std::max(x, 0.0);

                double sub_best = kInf;
                for (int s : part_cols[static_cast<size_t>(t)]) {
                    double bs = b(s) - x;
                    if (bs < -kFlowTol) continue;
                    double sub;
                    if (part_rows[static_cast<size_t>(t)].empty()) {
                        if (part_cols[static_cast<size_t>(t)].size() > 1) continue;
                        sub = 0.0;  // bare leaf column fed only by r0
                    } else {
                        Eigen::VectorXd b2 = b;
                        b2(s) = std::max(bs, 0.0);
                        sub = tree_min(part_rows[static_cast<size_t>(t)], part_cols[static_cast<size_t>(t)], a, b2, M);
                    }
                    sub_best = std::min(sub_best, sub + x * M(r0, s));
                }
                total = (sub_best == kInf) ? kInf : total + sub_best;
            }
            best = std::min(best, total);

            size_t r = 0;
            while (r < assign.size() && ++assign[r] == k) assign[r++] = 0;
            if (r == assign.size()) break;
        }
    };
    if (m > 0) emit_partitions(1, 0);
    return best;
}

}  // namespace

double lp_transport_cost(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cost) {
    std::vector<int> rows, cols;
    for (int i = 0; i < a.size(); ++i)
        if (a(i) > 0.0) rows.push_back(i);
    for (int j = 0; j < b.size(); ++j)
        if (b(j) > 0.0) cols.push_back(j);
    if (rows.empty() || cols.empty()) throw std::invalid_argument("lp_transport_cost: empty support");
    double v = tree_min(rows, cols, a, b, cost);
    if (v == kInf) throw std::logic_error("lp_transport_cost: no feasible tree found");
    return v;
}

}  // namespace oracles
