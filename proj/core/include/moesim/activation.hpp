#pragma once

#include <memory>
#include <string>
#include <vector>

namespace moesim {

// Scalar router nonlinearity with analytic derivatives up to order 3.
class Activation {
 public:
  virtual ~Activation() = default;
  virtual double value(double x) const = 0;
  // order 0 returns value(x); orders 1..3 the analytic derivatives.
  virtual double derivative(double x, int order) const = 0;
  virtual std::string name() const = 0;
};

class SigmoidActivation final : public Activation {
 public:
  double value(double x) const override;
  double derivative(double x, int order) const override;
  std::string name() const override { return "sigmoid"; }
};

class IdentityActivation final : public Activation {
 public:
  double value(double x) const override { return x; }
  double derivative(double x, int order) const override;
  std::string name() const override { return "identity"; }
};

// Hermite coefficients c_k = E[pi(x) He_k(x)] = E[pi^(k)(x)] of the router
// nonlinearity, with the derived constants used across the project:
//   cs0 = 2 E[pi(x)^2],  cs1 = 6 E[pi'(x)^2],
//   cs2 = sum_k (c_{k+1}^2 + c_k c_{k+2}) / k!.
struct ActivationProfile {
  std::vector<double> coeffs;            // c_0 .. c_K
  int truncation_order = 0;              // K
  double cs0 = 0.0;
  double cs1 = 0.0;
  double cs2 = 0.0;
  std::vector<double> deriv_sq_moments;  // E[pi^(l)(x)^2], l = 0..3
  bool quad_converged = true;            // doubling the rule moved no c_k > 1e-9
  double quad_delta = 0.0;               // largest such move
  std::string activation_name;

  // Partial sum S(k) = sum_{j<=k} c_j^2/j!; nondecreasing, -> E[pi^2].
  double coeff_sq_partial_sum(int k) const;
  // E[pi^2] - S(K): series mass beyond the truncation.
  double series_tail() const;
};

// Builds the profile by Gauss-Hermite quadrature (order >= 4K, floor 200),
// including the doubling guard.
ActivationProfile hermite_coeffs(const Activation& activation, int K);

// sum_{k=0}^{K} a_k b_k / k! * rho^k over the common length of a and b.
double corr_series(const std::vector<double>& coeffs_a,
                   const std::vector<double>& coeffs_b, double rho);

struct SigmoidAssumptionReport {
  std::vector<double> grid;
  std::vector<double> values;  // E[pi'(z1) pi'''(z2)] at Cov(z1,z2) = rho
  double max_value = 0.0;
  double tolerance = 1e-6;
  bool pass = false;
};

enum class AssumptionEstimator { series, quadrature_2d };

// Checks E[pi'(z1) pi'''(z2)] <= tol over a correlation grid. The default
// series route is sum_k c_{k+1} c_{k+3} / k! rho^k; the 2-D tensor
// quadrature route is an independent cross-check.
SigmoidAssumptionReport assumption_sigmoid_check(
    const ActivationProfile& profile, const std::vector<double>& grid,
    AssumptionEstimator estimator = AssumptionEstimator::series,
    const Activation* activation = nullptr, int quad_order = 80);

struct CsRatioReport {
  double cs0 = 0.0;
  double cs1 = 0.0;
  double ratio = 0.0;
  bool pass = false;  // ratio >= 1.1
};

CsRatioReport cs_ratio_check(const ActivationProfile& profile);

}  // namespace moesim
