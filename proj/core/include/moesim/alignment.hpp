#pragma once

#include <vector>

#include <Eigen/Dense>

#include "moesim/model.hpp"

namespace moesim {

// The seven alignment matrices at one time point, all from normalized rows:
//   gamma1 = Vbar Vstar^T   gamma2 = Wbar Wstar^T   (targets, m x m*)
//   zeta1  = Vbar Wstar^T   zeta2  = Wbar Vstar^T   (cross, m x m*)
//   I1 = Vbar Vbar^T  I2 = Wbar Wbar^T  I3 = Vbar Wbar^T  (self, m x m)
struct AlignmentSnapshot {
  double t = 0.0;
  Eigen::MatrixXd gamma1, gamma2, zeta1, zeta2;
  Eigen::MatrixXd I1, I2, I3;
};

AlignmentSnapshot alignment_snapshot(const ModelParams& params,
                                     const TeacherSpec& teacher, double t);

// Injective student-to-teacher matching built greedily from the initial
// expert alignments.
struct PairingMap {
  // pairs[l] = (student index i*_l, teacher index j*_l), selection order l
  std::vector<std::pair<int, int>> pairs;

  int student_of_teacher(int j) const;  // -1 if unmatched
  std::vector<int> matched_students() const;
};

enum class PairingWeight {
  raw_inner_product,  // w_i(0)^T wbar*_j = b_i * gamma2_ij (default)
  normalized,         // gamma2_ij
};

// Repeatedly selects the largest remaining entry, removing its row and
// column; ties break toward the smallest (i, j) lexicographically.
PairingMap greedy_pairing(const AlignmentSnapshot& snapshot0,
                          const Eigen::VectorXd& norms_w,
                          PairingWeight weight =
                              PairingWeight::raw_inner_product);

// The four initialization gap conditions evaluated on A_ij = w_i(0)^T wbar*_j
// under the greedy pairing, plus the norm band and max cross alignment.
struct InitReport {
  double delta_s = 0.0;
  std::vector<bool> rowwise_ok, colwise_ok, threshold_ok, magnitude_ok;
  std::vector<double> rowwise_margin, colwise_margin, threshold_margin,
      magnitude_margin;
  bool all_gaps_ok = false;
  bool norm_band_ok = false;
  double norm_dev_max = 0.0;        // max_i |row_norm^2 - 1|
  double cross_alignment_max = 0.0; // max |entry| outside targets/diagonals
  PairingMap pairing;
};

InitReport check_init_conditions(const AlignmentSnapshot& snapshot0,
                                 const ModelParams& params0, double delta_s);

// Error diagnostics for one induction level l (1-based), exactly the max
// expressions over the snapshot's index sets.
struct ErrorDiagnostics {
  double eps1 = 0, eps2 = 0, eps3 = 0, eps4 = 0, eps5 = 0;
  double eps_f = 0;        // forward error
  double eps_b1 = 0;       // backward error, first variant
  double eps_b2 = 0;       // backward error, second variant (adds eps1)
  double eps_b_gate = 0;   // max |I3_ii| over unrecovered students
  double eps_a1_hat = 0;   // aggregate, first variant
  double eps_a2_hat = 0;   // aggregate, second variant
};

ErrorDiagnostics error_diagnostics(const AlignmentSnapshot& snapshot,
                                   const PairingMap& pairing, int ell);

}  // namespace moesim
