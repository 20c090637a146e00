#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "moesim/rng.hpp"

namespace moesim {

// Student parameters: router rows v_i and expert rows w_i with cached norms.
// The model only ever evaluates normalized rows; the norms are conserved by
// the training loop.
struct ModelParams {
  Eigen::MatrixXd V;  // m x d
  Eigen::MatrixXd W;  // m x d
  Eigen::VectorXd norms_v;
  Eigen::VectorXd norms_w;

  int experts() const { return static_cast<int>(V.rows()); }
  int dim() const { return static_cast<int>(V.cols()); }

  void refresh_norms();
  Eigen::MatrixXd normalized_v() const;
  Eigen::MatrixXd normalized_w() const;

  // Keeps only the given rows, in the given order.
  ModelParams restricted(const std::vector<int>& keep) const;
};

enum class TeacherMode { canonical, random_orthogonal };

// Orthonormal teacher: the 2*m_star rows of (Vstar; Wstar) form an
// orthonormal list.
struct TeacherSpec {
  Eigen::MatrixXd Vstar;  // m_star x d, unit rows
  Eigen::MatrixXd Wstar;  // m_star x d, unit rows
  TeacherMode mode = TeacherMode::canonical;

  int experts() const { return static_cast<int>(Vstar.rows()); }
  int dim() const { return static_cast<int>(Vstar.cols()); }
};

struct GaussianBatch {
  Eigen::MatrixXd samples;  // B x d
  std::uint64_t seed = 0;
  std::uint64_t stream_index = 0;

  int size() const { return static_cast<int>(samples.rows()); }
};

TeacherSpec make_teacher(int m_star, int d, TeacherMode mode,
                         std::uint64_t seed = 0);

// v_hat_i, w_i ~ N(0, I_d / d); v_i = v_hat_i - (v_hat_i . wbar_i) wbar_i,
// so v_i(0)^T w_i(0) = 0 exactly.
ModelParams init_student(int m, int d, std::uint64_t seed);

// Fresh i.i.d. N(0, I_d) batch keyed by (seed, stream, step).
GaussianBatch make_batch(int batch_size, int d, std::uint64_t seed,
                         Stream stream, std::uint64_t step);

double forward(const ModelParams& params, const Eigen::VectorXd& x);
double forward(const TeacherSpec& teacher, const Eigen::VectorXd& x);

// f(theta, x_b) for every row x_b of the batch.
Eigen::VectorXd batch_forward(const ModelParams& params,
                              const Eigen::MatrixXd& X);
Eigen::VectorXd batch_forward(const TeacherSpec& teacher,
                              const Eigen::MatrixXd& X);

// Rescales each row to the target norm; directions are untouched.
void renormalize(ModelParams& params, const Eigen::VectorXd& target_norms_v,
                 const Eigen::VectorXd& target_norms_w);

}  // namespace moesim
