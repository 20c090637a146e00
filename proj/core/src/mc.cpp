#include "moesim/mc.hpp"

#include <cmath>
#include <stdexcept>

namespace moesim {

namespace {

constexpr int kChunk = 256;

}  // namespace

McEstimate mc_loss(const ModelParams& params, const TeacherSpec& teacher,
                   const GaussianBatch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("mc_loss: empty batch");
  if (batch.samples.cols() != params.dim())
    throw std::invalid_argument("mc_loss: dimension mismatch");
  Eigen::VectorXd r = batch_forward(params, batch.samples) -
                      batch_forward(teacher, batch.samples);
  const int B = batch.size();
  double sum = 0.0, sum_sq = 0.0;
  for (int c0 = 0; c0 < B; c0 += kChunk) {
    double cs = 0.0, css = 0.0;
    int hi = std::min(B, c0 + kChunk);
    for (int b = c0; b < hi; ++b) {
      double h = 0.5 * r(b) * r(b);
      cs += h;
      css += h * h;
    }
    sum += cs;
    sum_sq += css;
  }
  McEstimate e;
  e.batch_size = B;
  e.value = sum / B;
  double var = std::max(0.0, sum_sq / B - e.value * e.value);
  e.std_error = B > 1 ? std::sqrt(var / (B - 1)) : 0.0;
  return e;
}

McGradient mc_grad(const ModelParams& params, const TeacherSpec& teacher,
                   const GaussianBatch& batch, bool with_se) {
  if (batch.size() == 0) throw std::invalid_argument("mc_grad: empty batch");
  if (batch.samples.cols() != params.dim())
    throw std::invalid_argument("mc_grad: dimension mismatch");

  const int B = batch.size();
  const int m = params.experts();
  const int d = params.dim();
  const Eigen::MatrixXd& X = batch.samples;

  Eigen::MatrixXd Vb = params.normalized_v();
  Eigen::MatrixXd Wb = params.normalized_w();

  Eigen::MatrixXd Zv = X * Vb.transpose();  // B x m
  Eigen::MatrixXd Zw = X * Wb.transpose();

  Eigen::ArrayXXd gate = 1.0 / (1.0 + (-Zv.array()).exp());
  Eigen::ArrayXXd expert = Zw.array().cube() - 3.0 * Zw.array();
  Eigen::VectorXd r = (gate * expert).rowwise().sum().matrix() -
                      batch_forward(teacher, X);

  // per-sample scalar weights:
  //   alpha = r * pi'(zv) * sigma(zw)   -> router rows
  //   beta  = r * pi(zv) * sigma'(zw),  sigma' = 3(zw^2 - 1)
  Eigen::ArrayXXd alpha =
      r.array().replicate(1, m) * gate * (1.0 - gate) * expert;
  Eigen::ArrayXXd beta = r.array().replicate(1, m) * gate *
                         (3.0 * (Zw.array().square() - 1.0));

  // chunked fixed-order accumulation of A^T X
  auto chunked_mean = [&](const Eigen::ArrayXXd& A) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, d);
    for (int c0 = 0; c0 < B; c0 += kChunk) {
      int len = std::min(kChunk, B - c0);
      acc.noalias() += A.matrix().middleRows(c0, len).transpose() *
                       X.middleRows(c0, len);
    }
    return Eigen::MatrixXd(acc / B);
  };

  Eigen::MatrixXd raw_v = chunked_mean(alpha);
  Eigen::MatrixXd raw_w = chunked_mean(beta);

  McGradient g;
  g.dV.resize(m, d);
  g.dW.resize(m, d);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd vbar = Vb.row(i).transpose();
    Eigen::VectorXd wbar = Wb.row(i).transpose();
    Eigen::VectorXd rv = raw_v.row(i).transpose();
    Eigen::VectorXd rw = raw_w.row(i).transpose();
    g.dV.row(i) = ((rv - vbar.dot(rv) * vbar) / params.norms_v(i)).transpose();
    g.dW.row(i) = ((rw - wbar.dot(rw) * wbar) / params.norms_w(i)).transpose();
  }

  // loss estimate from the same residuals
  double sum = 0.0, sum_sq = 0.0;
  for (int c0 = 0; c0 < B; c0 += kChunk) {
    double cs = 0.0, css = 0.0;
    int hi = std::min(B, c0 + kChunk);
    for (int b = c0; b < hi; ++b) {
      double h = 0.5 * r(b) * r(b);
      cs += h;
      css += h * h;
    }
    sum += cs;
    sum_sq += css;
  }
  g.loss.batch_size = B;
  g.loss.value = sum / B;
  double lvar = std::max(0.0, sum_sq / B - g.loss.value * g.loss.value);
  g.loss.std_error = B > 1 ? std::sqrt(lvar / (B - 1)) : 0.0;

  g.se_v = Eigen::VectorXd::Zero(m);
  g.se_w = Eigen::VectorXd::Zero(m);
  if (with_se && B > 1) {
    // E[g_c^2] per coordinate via one more pass of squared products against
    // squared samples; the tangent projection is dropped here (it removes
    // variance along one of d directions), so the estimate over-states
    // slightly.
    Eigen::MatrixXd X2 = X.array().square().matrix();
    auto chunked_mean_sq = [&](const Eigen::ArrayXXd& A) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, d);
      for (int c0 = 0; c0 < B; c0 += kChunk) {
        int len = std::min(kChunk, B - c0);
        acc.noalias() += A.square().matrix().middleRows(c0, len).transpose() *
                         X2.middleRows(c0, len);
      }
      return Eigen::MatrixXd(acc / B);
    };
    Eigen::MatrixXd sq_v = chunked_mean_sq(alpha);
    Eigen::MatrixXd sq_w = chunked_mean_sq(beta);
    for (int i = 0; i < m; ++i) {
      double acc_v = 0.0, acc_w = 0.0;
      for (int c = 0; c < d; ++c) {
        double mv = raw_v(i, c), mw = raw_w(i, c);
        acc_v += std::max(0.0, sq_v(i, c) - mv * mv);
        acc_w += std::max(0.0, sq_w(i, c) - mw * mw);
      }
      g.se_v(i) = std::sqrt(acc_v / (B - 1)) / params.norms_v(i);
      g.se_w(i) = std::sqrt(acc_w / (B - 1)) / params.norms_w(i);
    }
  }
  return g;
}

}  // namespace moesim
