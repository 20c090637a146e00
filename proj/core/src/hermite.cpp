#include "moesim/hermite.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace moesim {

double he_eval(int k, double x) {
  if (k < 0) throw std::invalid_argument("he_eval: negative degree");
  if (k > kHermiteDegreeCap)
    throw std::invalid_argument("he_eval: degree above cap");
  if (k == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int j = 1; j < k; ++j) {
    double next = x * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> he_eval_all(int k, double x) {
  if (k < 0 || k > kHermiteDegreeCap)
    throw std::invalid_argument("he_eval_all: degree out of range");
  std::vector<double> out(k + 1);
  out[0] = 1.0;
  if (k >= 1) out[1] = x;
  for (int j = 1; j < k; ++j) out[j + 1] = x * out[j] - j * out[j - 1];
  return out;
}

double factorial(int k) {
  static const std::vector<double> table = [] {
    std::vector<double> t(171);
    t[0] = 1.0;
    for (int i = 1; i <= 170; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  if (k < 0 || k > 170) throw std::invalid_argument("factorial: out of range");
  return table[k];
}

GaussHermiteRule::GaussHermiteRule(int order) {
  if (order < 1 || order > 2000)
    throw std::invalid_argument("GaussHermiteRule: bad order");
  // Jacobi matrix of the monic He_n family: zero diagonal, offdiag sqrt(n).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
  for (int i = 1; i < order; ++i) {
    double b = std::sqrt(static_cast<double>(i));
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes_.resize(order);
  weights_.resize(order);
  for (int i = 0; i < order; ++i) {
    nodes_[i] = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    weights_[i] = v0 * v0;  // mu_0 = 1 for N(0,1)
  }
}

double GaussHermiteRule::expectation(
    const std::function<double(double)>& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    acc += weights_[i] * f(nodes_[i]);
  return acc;
}

}  // namespace moesim
