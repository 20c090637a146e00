#pragma once

#include <functional>
#include <vector>

namespace moesim {

// Highest Hermite degree the evaluation routines accept.
inline constexpr int kHermiteDegreeCap = 32;

// Probabilist's Hermite polynomial He_k(x) via the three-term recurrence
// He_{k+1} = x He_k - k He_{k-1}. He_0 = 1, He_1 = x, He_3 = x^3 - 3x.
double he_eval(int k, double x);

// He_0(x) .. He_k(x) in one sweep.
std::vector<double> he_eval_all(int k, double x);

// k! as a double (exact through 22!, correctly rounded beyond).
double factorial(int k);

// Gauss-Hermite rule in the probabilist's convention:
//   E_{x~N(0,1)}[f(x)] ~= sum_i weight[i] * f(node[i]),
// exact for polynomials of degree <= 2*order - 1. Nodes and weights come
// from the symmetric tridiagonal Jacobi matrix (Golub-Welsch), which stays
// well-conditioned at the orders used here (hundreds).
class GaussHermiteRule {
 public:
  explicit GaussHermiteRule(int order);

  double expectation(const std::function<double(double)>& f) const;
  int order() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace moesim
