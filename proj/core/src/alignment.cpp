#include "moesim/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace moesim {

AlignmentSnapshot alignment_snapshot(const ModelParams& params,
                                     const TeacherSpec& teacher, double t) {
  if (params.dim() != teacher.dim())
    throw std::invalid_argument("alignment_snapshot: dimension mismatch");
  AlignmentSnapshot s;
  s.t = t;
  Eigen::MatrixXd Vb = params.normalized_v();
  Eigen::MatrixXd Wb = params.normalized_w();
  s.gamma1 = Vb * teacher.Vstar.transpose();
  s.gamma2 = Wb * teacher.Wstar.transpose();
  s.zeta1 = Vb * teacher.Wstar.transpose();
  s.zeta2 = Wb * teacher.Vstar.transpose();
  s.I1 = Vb * Vb.transpose();
  s.I2 = Wb * Wb.transpose();
  s.I3 = Vb * Wb.transpose();
  return s;
}

int PairingMap::student_of_teacher(int j) const {
  for (const auto& [i, jj] : pairs)
    if (jj == j) return i;
  return -1;
}

std::vector<int> PairingMap::matched_students() const {
  std::vector<int> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.first);
  return out;
}

PairingMap greedy_pairing(const AlignmentSnapshot& snapshot0,
                          const Eigen::VectorXd& norms_w,
                          PairingWeight weight) {
  const int m = static_cast<int>(snapshot0.gamma2.rows());
  const int m_star = static_cast<int>(snapshot0.gamma2.cols());
  if (m < m_star)
    throw std::invalid_argument("greedy_pairing: m < m_star");

  Eigen::MatrixXd A = snapshot0.gamma2;
  if (weight == PairingWeight::raw_inner_product)
    A = norms_w.asDiagonal() * A;

  std::vector<bool> row_used(m, false), col_used(m_star, false);
  PairingMap map;
  for (int step = 0; step < m_star; ++step) {
    int bi = -1, bj = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (row_used[i]) continue;
      for (int j = 0; j < m_star; ++j) {
        if (col_used[j]) continue;
        if (A(i, j) > best) {  // strict: ties keep the smallest (i, j)
          best = A(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    row_used[bi] = true;
    col_used[bj] = true;
    map.pairs.emplace_back(bi, bj);
  }
  return map;
}

InitReport check_init_conditions(const AlignmentSnapshot& snapshot0,
                                 const ModelParams& params0, double delta_s) {
  const int m = static_cast<int>(snapshot0.gamma2.rows());
  const int m_star = static_cast<int>(snapshot0.gamma2.cols());
  const double d = static_cast<double>(params0.dim());

  InitReport rep;
  rep.delta_s = delta_s;
  rep.pairing = greedy_pairing(snapshot0, params0.norms_w,
                               PairingWeight::raw_inner_product);

  // unnormalized initial expert alignments A_ij = w_i(0)^T wbar*_j
  Eigen::MatrixXd A = params0.norms_w.asDiagonal() * snapshot0.gamma2;
  const double gap = 1.0 + 2.0 * delta_s;

  rep.rowwise_ok.assign(m_star, true);
  rep.colwise_ok.assign(m_star, true);
  rep.threshold_ok.assign(m_star, true);
  rep.magnitude_ok.assign(m_star, true);
  rep.rowwise_margin.assign(m_star,
                            std::numeric_limits<double>::infinity());
  rep.colwise_margin.assign(m_star,
                            std::numeric_limits<double>::infinity());
  rep.threshold_margin.assign(m_star,
                              std::numeric_limits<double>::infinity());
  rep.magnitude_margin.assign(m_star, 0.0);

  std::vector<bool> row_in_R(m, false), col_in_C(m_star, false);
  for (int l = 0; l < m_star; ++l) {
    auto [il, jl] = rep.pairing.pairs[l];
    row_in_R[il] = true;
    col_in_C[jl] = true;
    double a = A(il, jl);

    // row-wise: beats every not-yet-chosen column in its own row
    for (int j = 0; j < m_star; ++j) {
      if (col_in_C[j]) continue;
      double margin = a - gap * A(il, j);
      rep.rowwise_margin[l] = std::min(rep.rowwise_margin[l], margin);
      if (margin < 0) rep.rowwise_ok[l] = false;
    }
    // column-wise: beats every not-yet-chosen row in its own column
    for (int i = 0; i < m; ++i) {
      if (row_in_R[i]) continue;
      double margin = a - gap * A(i, jl);
      rep.colwise_margin[l] = std::min(rep.colwise_margin[l], margin);
      if (margin < 0) rep.colwise_ok[l] = false;
    }
    // threshold: beats the square of the next selection
    if (l + 1 < m_star) {
      auto [in, jn] = rep.pairing.pairs[l + 1];
      double margin = a - gap * A(in, jn) * A(in, jn);
      rep.threshold_margin[l] = margin;
      if (margin < 0) rep.threshold_ok[l] = false;
    }
    // magnitude lower bound: a^2 >= log(m*) / d
    double bound = std::log(static_cast<double>(m_star)) / d;
    rep.magnitude_margin[l] = a * a - bound;
    if (rep.magnitude_margin[l] < 0) rep.magnitude_ok[l] = false;
  }

  rep.all_gaps_ok = true;
  for (int l = 0; l < m_star; ++l)
    rep.all_gaps_ok = rep.all_gaps_ok && rep.rowwise_ok[l] &&
                      rep.colwise_ok[l] && rep.threshold_ok[l] &&
                      rep.magnitude_ok[l];

  rep.norm_dev_max = 0.0;
  for (int i = 0; i < m; ++i) {
    double nv = params0.norms_v(i), nw = params0.norms_w(i);
    rep.norm_dev_max = std::max({rep.norm_dev_max, std::abs(nv * nv - 1.0),
                                 std::abs(nw * nw - 1.0)});
  }
  rep.norm_band_ok = rep.norm_dev_max <= delta_s;

  double cm = 0.0;
  cm = std::max(cm, snapshot0.gamma1.cwiseAbs().maxCoeff());
  cm = std::max(cm, snapshot0.zeta1.cwiseAbs().maxCoeff());
  cm = std::max(cm, snapshot0.zeta2.cwiseAbs().maxCoeff());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i != j) {
        cm = std::max(cm, std::abs(snapshot0.I1(i, j)));
        cm = std::max(cm, std::abs(snapshot0.I2(i, j)));
      }
      cm = std::max(cm, std::abs(snapshot0.I3(i, j)));
    }
  rep.cross_alignment_max = cm;
  return rep;
}

ErrorDiagnostics error_diagnostics(const AlignmentSnapshot& snapshot,
                                   const PairingMap& pairing, int ell) {
  const int m = static_cast<int>(snapshot.gamma1.rows());
  const int m_star = static_cast<int>(snapshot.gamma1.cols());
  if (ell < 1 || ell > m_star)
    throw std::invalid_argument("error_diagnostics: ell out of range");

  std::vector<bool> in_R_ell(m, false), in_R_prev(m, false);
  for (int l = 0; l < ell; ++l) in_R_ell[pairing.pairs[l].first] = true;
  for (int l = 0; l + 1 < ell; ++l) in_R_prev[pairing.pairs[l].first] = true;
  auto [i_ell, j_ell] = pairing.pairs[ell - 1];

  ErrorDiagnostics e;
  // eps1 / eps3: unselected students against every teacher column
  for (int i = 0; i < m; ++i) {
    if (in_R_ell[i]) continue;
    for (int j = 0; j < m_star; ++j) {
      e.eps1 = std::max(e.eps1, std::abs(snapshot.gamma1(i, j)));
      e.eps3 = std::max(e.eps3, std::abs(snapshot.gamma2(i, j)));
    }
  }
  // eps2 / eps4: the level's own student against off-target columns
  for (int j = 0; j < m_star; ++j) {
    if (j == j_ell) continue;
    e.eps2 = std::max(e.eps2, std::abs(snapshot.gamma1(i_ell, j)));
    e.eps4 = std::max(e.eps4, std::abs(snapshot.gamma2(i_ell, j)));
  }
  e.eps5 = std::abs(snapshot.I3(i_ell, i_ell));

  // forward: recovered levels' off-target gammas and their cross terms
  double f1 = 0.0;
  for (int l = 0; l < ell; ++l) {
    int il = pairing.pairs[l].first;
    int jl = pairing.pairs[l].second;
    for (int j = 0; j < m_star; ++j) {
      if (j == jl) continue;
      f1 = std::max({f1, std::abs(snapshot.gamma1(il, j)),
                     std::abs(snapshot.gamma2(il, j))});
    }
  }
  double f2 = 0.0;
  for (int i = 0; i < m; ++i) {
    if (!in_R_prev[i]) continue;
    for (int j = 0; j < m_star; ++j)
      f2 = std::max({f2, std::abs(snapshot.zeta1(i, j)),
                     std::abs(snapshot.zeta2(i, j))});
  }
  e.eps_f = std::max(f1, f2);

  // backward: cross terms of not-yet-recovered students + pairwise self terms
  double b1 = 0.0;
  for (int i = 0; i < m; ++i) {
    if (in_R_prev[i]) continue;
    for (int j = 0; j < m_star; ++j)
      b1 = std::max({b1, std::abs(snapshot.zeta1(i, j)),
                     std::abs(snapshot.zeta2(i, j))});
  }
  double b2 = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      b2 = std::max({b2, std::abs(snapshot.I1(i, j)),
                     std::abs(snapshot.I2(i, j)),
                     std::abs(snapshot.I3(i, j))});
    }
  e.eps_b1 = std::max({b1, b2, e.eps2});
  e.eps_b2 = std::max(e.eps_b1, e.eps1);

  for (int i = 0; i < m; ++i) {
    if (in_R_ell[i]) continue;
    e.eps_b_gate = std::max(e.eps_b_gate, std::abs(snapshot.I3(i, i)));
  }

  e.eps_a1_hat = std::max({e.eps4, e.eps_b1, e.eps_f});
  e.eps_a2_hat = std::max({e.eps_a1_hat, e.eps1, e.eps3});
  return e;
}

}  // namespace moesim
