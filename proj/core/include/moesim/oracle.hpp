#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "moesim/activation.hpp"
#include "moesim/model.hpp"

namespace moesim {

// Four-polynomial Gaussian moments for one (i, j) pair, indexed by the
// (k, l) router degrees, one matrix per expert-degree combination (a, b).
// raw(k, l) stores the moment divided by k! l! (the series weight), i.e.
// a! b! sum_M prod Sigma^M / M!.
struct PairMoments {
  Eigen::MatrixXd m33, m23, m32, m22;  // (K+1) x (K+1) each
};

// lambda_{i,j,1..5} and their teacher-facing hatted counterparts, plus the
// raw moment blocks they were assembled from.
//   lambda1 = sum c_{k+1} c_{l+1} /k!l! C_{k,l,3,3}
//   lambda2 = sum c_{k+1} c_l     /k!l! C_{k,l,2,3}
//   lambda3 = sum c_k     c_{l+1} /k!l! C_{k,l,2,3}
//   lambda4 = sum c_{k+1} c_l     /k!l! C_{k,l,3,2}
//   lambda5 = sum c_k     c_l     /k!l! C_{k,l,2,2}
struct LambdaTable {
  int m = 0;
  int m_star = 0;
  int K = 0;
  std::array<Eigen::MatrixXd, 6> lambda;     // [1..5] used, m x m
  std::array<Eigen::MatrixXd, 6> lambdahat;  // [1..5] used, m x m_star
  std::vector<PairMoments> C;     // student-student, index i*m + j
  std::vector<PairMoments> Chat;  // student-teacher, index i*m_star + j

  // Rebuilds a raw moment (times 1/k!l!) from the stored blocks.
  double raw(int i, int j, int k, int l, int a, int b) const;
  double raw_hat(int i, int j, int k, int l, int a, int b) const;
};

LambdaTable build_lambda_tables(const ModelParams& params,
                                const TeacherSpec& teacher,
                                const ActivationProfile& profile);

// Exact (series-truncated) population loss
//   1/2 E[f^2] - E[f f*] + 1/2 E[f*^2]
// of the normalized student against the orthonormal teacher.
double population_loss(const ModelParams& params, const TeacherSpec& teacher,
                       const ActivationProfile& profile);

// E[f*(x)^2] by the same series; the loss of the zero-expert model is half
// of this.
double teacher_second_moment(const TeacherSpec& teacher,
                             const ActivationProfile& profile);

struct PopulationGradient {
  Eigen::MatrixXd dV;  // m x d
  Eigen::MatrixXd dW;  // m x d
};

// Analytic gradient assembled from the lambda tables; every row is exactly
// tangent to its parameter row.
PopulationGradient population_grad(const ModelParams& params,
                                   const TeacherSpec& teacher,
                                   const ActivationProfile& profile);

}  // namespace moesim
