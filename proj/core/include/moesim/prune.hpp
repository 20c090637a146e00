#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "moesim/alignment.hpp"
#include "moesim/mc.hpp"
#include "moesim/model.hpp"
#include "moesim/oracle.hpp"

namespace moesim {

// Loss estimator used by pruning: the exact series oracle, or a fixed
// common-random-numbers evaluation batch (one batch per prune step, shared
// by every candidate within that step).
struct LossEstimator {
  enum class Kind { analytic, mc } kind = Kind::analytic;
  const ActivationProfile* profile = nullptr;  // analytic
  int batch = 1 << 16;                         // mc
  std::uint64_t seed = 0;                      // mc
};

// Loss of the sub-model that omits the rows in `pruned`. pruned = all rows
// is allowed: the loss of the zero function, 1/2 E[f*^2].
McEstimate submodel_loss(const ModelParams& params, const TeacherSpec& teacher,
                         const std::vector<int>& pruned,
                         const LossEstimator& estimator);

struct PruneResult {
  std::vector<int> removal_order;      // r_tau, tau = 1..tau_star
  std::vector<McEstimate> losses;      // [0] = full model, then after each removal
  int tau_star = 0;
  std::vector<int> kept;               // ascending indices into the original model
  ModelParams pruned_params;
};

// Greedy loss pruning: repeatedly remove the expert whose removal minimizes
// the sub-model loss; stop when the best candidate no longer improves on the
// current loss by more than `margin`. margin < 0 selects the default:
// 1e-9 for the analytic estimator, 2x the paired-difference SE for mc.
// Argmin ties break toward the smallest index.
PruneResult greedy_prune(const ModelParams& params, const TeacherSpec& teacher,
                         const LossEstimator& estimator, double margin = -1.0);

struct FinetuneConfig {
  bool analytic_gradient = true;  // population_grad; otherwise mc_grad
  int batch = 4096;               // mc gradient batch
  double eta = 0.05;
  int steps = 1000;
  int record_every = 10;
  double noise_floor = 1e-10;     // exclude dist_sq below this from the fit
  double epsilon_precondition = 0.5;  // per-row distance bound checked at entry
  std::uint64_t seed = 0;
};

struct FinetuneReport {
  std::vector<double> ts;
  std::vector<double> dist_sq;  // sum over rows of |vbar-v*|^2 + |wbar-w*|^2
  double kappa_hat = 0.0;       // -2 x slope of log dist_sq vs t
  double fit_r2 = 0.0;
  int fit_points = 0;
  bool at_optimum = false;      // started at/below the noise floor
  bool diverged = false;        // dist_sq grew > 50% above its start
  bool precondition_ok = true;  // per-row distances <= epsilon at entry
  ModelParams final_params;
};

// SGD-with-renormalization on the pruned model (m = m*), tracking the
// squared parameter distance to the teacher under the fixed pairing and
// fitting its exponential decay rate.
FinetuneReport finetune(const ModelParams& pruned, const TeacherSpec& teacher,
                        const PairingMap& pairing,
                        const ActivationProfile& profile,
                        const FinetuneConfig& config);

struct HessianProbe {
  double value = 0.0;         // [g(th+eps u) - g(th-eps u)]^T u / (2 eps |u|^2)
  double value_coarse = 0.0;  // same at 2 eps
  bool step_too_small = false;
};

// Symmetric finite-difference quadratic form of the loss Hessian along a
// tangent direction pair (U, Q). Directions must be nonzero and row-tangent.
HessianProbe hessian_quadratic_form(const ModelParams& params,
                                    const TeacherSpec& teacher,
                                    const ActivationProfile& profile,
                                    const Eigen::MatrixXd& U,
                                    const Eigen::MatrixXd& Q, double fd_step);

}  // namespace moesim
