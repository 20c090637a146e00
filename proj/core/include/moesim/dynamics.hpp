#pragma once

#include <cstdint>
#include <vector>

#include "moesim/alignment.hpp"
#include "moesim/model.hpp"

namespace moesim {

struct TrainConfig {
  double eta = 0.05;
  int steps = 0;          // derived from t_max when 0
  double t_max = 0.0;     // gradient-flow time budget; steps = t_max / eta
  int batch = 4096;
  int record_count = 200; // evenly spaced snapshots (plus the initial one)
  std::uint64_t seed = 0;
  Stream data_stream = Stream::data;

  int resolved_steps() const;
  int record_stride() const;
};

enum class TrainStatus { ok, diverged };

// One recorded point along the trajectory.
struct TrajectoryPoint {
  double t = 0.0;
  AlignmentSnapshot snapshot;
  double loss = 0.0;      // mini-batch estimate from the training batch
  double loss_se = 0.0;
  Eigen::VectorXd norms_v, norms_w;
  // running suprema of the two aggregate errors, per induction level
  std::vector<double> sup_eps_a1, sup_eps_a2;
};

struct TrajectoryRecord {
  std::vector<TrajectoryPoint> points;
  TrainStatus status = TrainStatus::ok;
  int steps_run = 0;
  double eta = 0.0;
  ModelParams final_params;
  PairingMap pairing;  // greedy pairing from the initial snapshot
};

// Online SGD simulating gradient flow: theta <- theta - eta * mc_grad(theta)
// on a fresh batch every step, then renormalize rows to their initial norms.
// Records a snapshot + loss every record stride; the time axis is
// t = step * eta. NaN/overflow stops the run with status = diverged and the
// last good snapshot retained.
TrajectoryRecord train(const ModelParams& params0, const TeacherSpec& teacher,
                       const TrainConfig& config);

struct RecoveryReport {
  double xi = 0.0;
  std::vector<double> T_ell;      // first time paired gamma2 >= xi, +inf if never
  std::vector<double> T_r;        // same at xi = 0.9
  bool order_matches_pairing = false;  // T_1 <= ... <= T_m* up to one stride
  std::vector<double> final_gamma1_paired, final_gamma2_paired;
};

// Crossing times by linear interpolation between recorded snapshots.
RecoveryReport recovery_times(const TrajectoryRecord& traj,
                              const PairingMap& pairing, double xi);

}  // namespace moesim
