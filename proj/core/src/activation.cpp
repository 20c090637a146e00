#include "moesim/activation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "moesim/hermite.hpp"

namespace moesim {

double SigmoidActivation::value(double x) const {
  return 1.0 / (1.0 + std::exp(-x));
}

double SigmoidActivation::derivative(double x, int order) const {
  double s = value(x);
  double sp = s * (1.0 - s);
  switch (order) {
    case 0:
      return s;
    case 1:
      return sp;
    case 2:
      return sp * (1.0 - 2.0 * s);
    case 3:
      return sp * (1.0 - 6.0 * s + 6.0 * s * s);
    default:
      throw std::invalid_argument("SigmoidActivation: derivative order > 3");
  }
}

double IdentityActivation::derivative(double x, int order) const {
  if (order == 0) return x;
  if (order == 1) return 1.0;
  if (order <= 3) return 0.0;
  throw std::invalid_argument("IdentityActivation: derivative order > 3");
}

double ActivationProfile::coeff_sq_partial_sum(int k) const {
  if (k < 0 || k >= static_cast<int>(coeffs.size()))
    throw std::invalid_argument("coeff_sq_partial_sum: index out of range");
  double s = 0.0;
  for (int j = 0; j <= k; ++j) s += coeffs[j] * coeffs[j] / factorial(j);
  return s;
}

double ActivationProfile::series_tail() const {
  return deriv_sq_moments[0] - coeff_sq_partial_sum(truncation_order);
}

ActivationProfile hermite_coeffs(const Activation& activation, int K) {
  if (K < 8) throw std::invalid_argument("hermite_coeffs: K < 8");
  if (K > kHermiteDegreeCap - 4)
    throw std::invalid_argument("hermite_coeffs: K too large for degree cap");

  int order = std::max(200, 4 * K);
  GaussHermiteRule rule(order);
  GaussHermiteRule rule2(2 * order);

  ActivationProfile p;
  p.truncation_order = K;
  p.activation_name = activation.name();
  p.coeffs.resize(K + 1);
  std::vector<double> coeffs2(K + 1);

  auto project = [&](const GaussHermiteRule& r, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 0; i < r.order(); ++i) {
      double x = r.nodes()[i];
      double wf = r.weights()[i] * activation.value(x);
      std::vector<double> he = he_eval_all(K, x);
      for (int k = 0; k <= K; ++k) out[k] += wf * he[k];
    }
  };
  project(rule, p.coeffs);
  project(rule2, coeffs2);

  p.quad_delta = 0.0;
  for (int k = 0; k <= K; ++k)
    p.quad_delta = std::max(p.quad_delta, std::abs(p.coeffs[k] - coeffs2[k]));
  p.quad_converged = p.quad_delta <= 1e-9;
  p.coeffs = coeffs2;  // keep the finer rule's values

  p.deriv_sq_moments.resize(4);
  for (int l = 0; l <= 3; ++l) {
    p.deriv_sq_moments[l] = rule2.expectation([&](double x) {
      double d = activation.derivative(x, l);
      return d * d;
    });
  }
  p.cs0 = 2.0 * p.deriv_sq_moments[0];
  p.cs1 = 6.0 * p.deriv_sq_moments[1];
  p.cs2 = 0.0;
  for (int k = 0; k + 2 <= K; ++k)
    p.cs2 +=
        (p.coeffs[k + 1] * p.coeffs[k + 1] + p.coeffs[k] * p.coeffs[k + 2]) /
        factorial(k);
  return p;
}

double corr_series(const std::vector<double>& coeffs_a,
                   const std::vector<double>& coeffs_b, double rho) {
  if (coeffs_a.size() != coeffs_b.size())
    throw std::invalid_argument("corr_series: length mismatch");
  double acc = 0.0;
  double rho_k = 1.0;
  for (std::size_t k = 0; k < coeffs_a.size(); ++k) {
    acc += coeffs_a[k] * coeffs_b[k] / factorial(static_cast<int>(k)) * rho_k;
    rho_k *= rho;
  }
  return acc;
}

SigmoidAssumptionReport assumption_sigmoid_check(
    const ActivationProfile& profile, const std::vector<double>& grid,
    AssumptionEstimator estimator, const Activation* activation,
    int quad_order) {
  if (grid.empty())
    throw std::invalid_argument("assumption_sigmoid_check: empty grid");

  SigmoidAssumptionReport report;
  report.grid = grid;
  report.values.reserve(grid.size());

  if (estimator == AssumptionEstimator::series) {
    // Hermite coefficients of pi' are c_{k+1}, of pi''' are c_{k+3}, so the
    // cross moment at correlation rho is sum_k c_{k+1} c_{k+3} / k! rho^k.
    int K = profile.truncation_order;
    for (double rho : grid) {
      double acc = 0.0, rho_k = 1.0;
      for (int k = 0; k + 3 <= K; ++k) {
        acc += profile.coeffs[k + 1] * profile.coeffs[k + 3] / factorial(k) *
               rho_k;
        rho_k *= rho;
      }
      report.values.push_back(acc);
    }
  } else {
    if (activation == nullptr)
      throw std::invalid_argument(
          "assumption_sigmoid_check: quadrature estimator needs the "
          "activation");
    GaussHermiteRule rule(quad_order);
    for (double rho : grid) {
      double root = std::sqrt(std::max(0.0, 1.0 - rho * rho));
      double acc = 0.0;
      for (int i = 0; i < rule.order(); ++i) {
        double z1 = rule.nodes()[i];
        double inner = 0.0;
        for (int j = 0; j < rule.order(); ++j) {
          double z2 = rho * z1 + root * rule.nodes()[j];
          inner += rule.weights()[j] * activation->derivative(z2, 3);
        }
        acc += rule.weights()[i] * activation->derivative(z1, 1) * inner;
      }
      report.values.push_back(acc);
    }
  }

  report.max_value = *std::max_element(report.values.begin(),
                                       report.values.end());
  report.pass = report.max_value <= report.tolerance;
  return report;
}

CsRatioReport cs_ratio_check(const ActivationProfile& profile) {
  CsRatioReport r;
  r.cs0 = profile.cs0;
  r.cs1 = profile.cs1;
  r.ratio = profile.cs1 != 0.0
                ? profile.cs0 / profile.cs1
                : std::numeric_limits<double>::infinity();
  r.pass = r.ratio >= 1.1;
  return r;
}

}  // namespace moesim
