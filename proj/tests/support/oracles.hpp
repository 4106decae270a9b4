#pragma once

#include <Eigen/Dense>

// Test-only reference implementations, kept independent of the library code
// they check.
namespace oracles {

// Exact transport optimum by exhaustive vertex enumeration. Every vertex of
// the transportation polytope is the flow solution of some spanning tree of
// the complete bipartite support graph; the recursion below walks all such
// trees (pruning branches whose partial flows already went negative) and
// returns the cheapest objective. Only viable for supports of about six
// atoms or fewer.
double lp_transport_cost(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cost);

}  // namespace oracles
