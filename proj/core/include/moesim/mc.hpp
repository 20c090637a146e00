#pragma once

#include <Eigen/Dense>

#include "moesim/model.hpp"

namespace moesim {

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int batch_size = 0;
};

// (1/2B) sum_b (f(theta, x_b) - f*(x_b))^2 with the standard error of the
// per-sample halves.
McEstimate mc_loss(const ModelParams& params, const TeacherSpec& teacher,
                   const GaussianBatch& batch);

struct McGradient {
  Eigen::MatrixXd dV;  // m x d batch means
  Eigen::MatrixXd dW;
  Eigen::VectorXd se_v;  // per-row aggregated standard error:
  Eigen::VectorXd se_w;  // sqrt(sum_coord Var_coord / B)
  McEstimate loss;       // from the same batch, for free
};

// Batch mean of the exact per-sample gradients of the normalized model.
// Every per-sample contribution is tangent to its own row. Accumulation is
// chunked (256 samples) in fixed order, so results are bit-stable.
// with_se = false skips the second-moment pass (used in the training loop).
McGradient mc_grad(const ModelParams& params, const TeacherSpec& teacher,
                   const GaussianBatch& batch, bool with_se = true);

}  // namespace moesim
