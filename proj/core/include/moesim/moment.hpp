#pragma once

#include <vector>

#include <Eigen/Dense>

namespace moesim {

// Symmetric nonnegative-integer matrix with zero diagonal whose row sums
// equal a prescribed degree vector; the multigraph bookkeeping behind
// E[prod He_{k_i}].
struct DegreeMatrix {
  Eigen::MatrixXi entries;
};

struct MomentRequest {
  std::vector<int> degrees;    // k in N^n
  Eigen::MatrixXd covariance;  // unit diagonal, |entries| <= 1
};

// All degree matrices for row sums `degrees`, enumerated by backtracking
// over the upper triangle with remaining-degree pruning. Output order is
// lexicographic in the upper-triangle entries, deterministic. Odd total
// degree yields the empty set.
// Caps: each degree <= 24; for n > 4 additionally sum(degrees) <= 16.
std::vector<DegreeMatrix> enumerate_degree_matrices(
    const std::vector<int>& degrees);

// E[prod_i He_{k_i}(x_i)] for x ~ N(0, Sigma) with unit-variance marginals:
//   (prod_i k_i!) * sum_M prod_{i<j} Sigma_ij^{M_ij} / M_ij!.
double gaussian_hermite_moment(const MomentRequest& req);

// The same sum without the (prod k_i!) prefactor. The series assemblies in
// the oracle divide that prefactor back out, so they consume this form
// directly and skip the large intermediate factorials.
double gaussian_hermite_moment_normalized(const std::vector<int>& degrees,
                                          const Eigen::MatrixXd& covariance);

}  // namespace moesim
