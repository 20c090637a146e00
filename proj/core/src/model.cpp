#include "moesim/model.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace moesim {

namespace {

inline Eigen::MatrixXd row_normalized(const Eigen::MatrixXd& A,
                                      const Eigen::VectorXd& norms) {
  return norms.cwiseInverse().asDiagonal() * A;
}

// sigmoid(zv) * He3(zw), summed over experts, vectorized over the batch
Eigen::VectorXd gate_expert_sum(const Eigen::MatrixXd& Zv,
                                const Eigen::MatrixXd& Zw) {
  Eigen::ArrayXXd gate = 1.0 / (1.0 + (-Zv.array()).exp());
  Eigen::ArrayXXd expert = Zw.array().cube() - 3.0 * Zw.array();
  return (gate * expert).rowwise().sum().matrix();
}

}  // namespace

void ModelParams::refresh_norms() {
  norms_v = V.rowwise().norm();
  norms_w = W.rowwise().norm();
  for (int i = 0; i < experts(); ++i)
    if (norms_v(i) == 0.0 || norms_w(i) == 0.0)
      throw std::runtime_error("ModelParams: zero row");
}

Eigen::MatrixXd ModelParams::normalized_v() const {
  return row_normalized(V, norms_v);
}

Eigen::MatrixXd ModelParams::normalized_w() const {
  return row_normalized(W, norms_w);
}

ModelParams ModelParams::restricted(const std::vector<int>& keep) const {
  ModelParams out;
  out.V.resize(keep.size(), dim());
  out.W.resize(keep.size(), dim());
  out.norms_v.resize(keep.size());
  out.norms_w.resize(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    int i = keep[r];
    if (i < 0 || i >= experts())
      throw std::invalid_argument("restricted: index out of range");
    out.V.row(r) = V.row(i);
    out.W.row(r) = W.row(i);
    out.norms_v(r) = norms_v(i);
    out.norms_w(r) = norms_w(i);
  }
  return out;
}

TeacherSpec make_teacher(int m_star, int d, TeacherMode mode,
                         std::uint64_t seed) {
  if (2 * m_star > d)
    throw std::invalid_argument("make_teacher: need 2*m_star <= d");
  TeacherSpec t;
  t.mode = mode;
  t.Vstar = Eigen::MatrixXd::Zero(m_star, d);
  t.Wstar = Eigen::MatrixXd::Zero(m_star, d);
  for (int j = 0; j < m_star; ++j) {
    t.Vstar(j, j) = 1.0;
    t.Wstar(j, m_star + j) = 1.0;
  }
  if (mode == TeacherMode::random_orthogonal) {
    // Haar-distributed orthonormal frame: QR of a Gaussian d x 2m* block
    // with the sign fix from R's diagonal.
    Eigen::MatrixXd G =
        gaussian_matrix(d, 2 * m_star, 1.0, seed, Stream::teacher);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(
                                                d, 2 * m_star);
    Eigen::MatrixXd R =
        qr.matrixQR().topLeftCorner(2 * m_star, 2 * m_star);
    for (int j = 0; j < 2 * m_star; ++j)
      if (R(j, j) < 0) Q.col(j) = -Q.col(j);
    t.Vstar = Q.leftCols(m_star).transpose();
    t.Wstar = Q.rightCols(m_star).transpose();
  }
  return t;
}

ModelParams init_student(int m, int d, std::uint64_t seed) {
  if (m < 1 || d < 2) throw std::invalid_argument("init_student: m>=1, d>=2");
  double sigma = 1.0 / std::sqrt(static_cast<double>(d));
  ModelParams p;
  p.W = gaussian_matrix(m, d, sigma, seed, Stream::init_experts);
  Eigen::MatrixXd Vhat =
      gaussian_matrix(m, d, sigma, seed, Stream::init_routers);
  p.V.resize(m, d);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd wbar = p.W.row(i).normalized();
    double proj = Vhat.row(i).dot(wbar);
    p.V.row(i) = Vhat.row(i) - proj * wbar.transpose();
  }
  p.refresh_norms();
  return p;
}

GaussianBatch make_batch(int batch_size, int d, std::uint64_t seed,
                         Stream stream, std::uint64_t step) {
  GaussianBatch b;
  b.seed = seed;
  b.stream_index = step;
  b.samples = gaussian_matrix(batch_size, d, 1.0, seed, stream, step);
  return b;
}

double forward(const ModelParams& params, const Eigen::VectorXd& x) {
  if (x.size() != params.dim())
    throw std::invalid_argument("forward: dimension mismatch");
  Eigen::VectorXd zv = params.normalized_v() * x;
  Eigen::VectorXd zw = params.normalized_w() * x;
  double acc = 0.0;
  for (int i = 0; i < params.experts(); ++i) {
    double gate = 1.0 / (1.0 + std::exp(-zv(i)));
    acc += gate * (zw(i) * zw(i) * zw(i) - 3.0 * zw(i));
  }
  return acc;
}

double forward(const TeacherSpec& teacher, const Eigen::VectorXd& x) {
  if (x.size() != teacher.dim())
    throw std::invalid_argument("forward: dimension mismatch");
  Eigen::VectorXd zv = teacher.Vstar * x;
  Eigen::VectorXd zw = teacher.Wstar * x;
  double acc = 0.0;
  for (int i = 0; i < teacher.experts(); ++i) {
    double gate = 1.0 / (1.0 + std::exp(-zv(i)));
    acc += gate * (zw(i) * zw(i) * zw(i) - 3.0 * zw(i));
  }
  return acc;
}

Eigen::VectorXd batch_forward(const ModelParams& params,
                              const Eigen::MatrixXd& X) {
  if (X.cols() != params.dim())
    throw std::invalid_argument("batch_forward: dimension mismatch");
  return gate_expert_sum(X * params.normalized_v().transpose(),
                         X * params.normalized_w().transpose());
}

Eigen::VectorXd batch_forward(const TeacherSpec& teacher,
                              const Eigen::MatrixXd& X) {
  if (X.cols() != teacher.dim())
    throw std::invalid_argument("batch_forward: dimension mismatch");
  return gate_expert_sum(X * teacher.Vstar.transpose(),
                         X * teacher.Wstar.transpose());
}

void renormalize(ModelParams& params, const Eigen::VectorXd& target_norms_v,
                 const Eigen::VectorXd& target_norms_w) {
  for (int i = 0; i < params.experts(); ++i) {
    if (target_norms_v(i) <= 0.0 || target_norms_w(i) <= 0.0)
      throw std::invalid_argument("renormalize: nonpositive target norm");
    double nv = params.V.row(i).norm();
    double nw = params.W.row(i).norm();
    if (nv == 0.0 || nw == 0.0)
      throw std::runtime_error("renormalize: zero row");
    params.V.row(i) *= target_norms_v(i) / nv;
    params.W.row(i) *= target_norms_w(i) / nw;
    params.norms_v(i) = target_norms_v(i);
    params.norms_w(i) = target_norms_w(i);
  }
}

}  // namespace moesim
