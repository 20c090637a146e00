#include "moesim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "moesim/mc.hpp"

namespace moesim {

int TrainConfig::resolved_steps() const {
  if (steps > 0) return steps;
  if (t_max > 0.0 && eta > 0.0)
    return static_cast<int>(std::llround(t_max / eta));
  return 0;
}

int TrainConfig::record_stride() const {
  int n = resolved_steps();
  if (record_count <= 0 || n == 0) return std::max(1, n);
  return std::max(1, n / record_count);
}

namespace {

bool finite(const Eigen::MatrixXd& A) { return A.allFinite(); }

TrajectoryPoint make_point(const ModelParams& params,
                           const TeacherSpec& teacher, double t, double loss,
                           double loss_se, const PairingMap& pairing,
                           const std::vector<double>* prev_sup1,
                           const std::vector<double>* prev_sup2) {
  TrajectoryPoint pt;
  pt.t = t;
  pt.snapshot = alignment_snapshot(params, teacher, t);
  pt.loss = loss;
  pt.loss_se = loss_se;
  pt.norms_v = params.norms_v;
  pt.norms_w = params.norms_w;
  int m_star = teacher.experts();
  pt.sup_eps_a1.resize(m_star);
  pt.sup_eps_a2.resize(m_star);
  for (int l = 1; l <= m_star; ++l) {
    ErrorDiagnostics e = error_diagnostics(pt.snapshot, pairing, l);
    double s1 = e.eps_a1_hat, s2 = e.eps_a2_hat;
    if (prev_sup1) s1 = std::max(s1, (*prev_sup1)[l - 1]);
    if (prev_sup2) s2 = std::max(s2, (*prev_sup2)[l - 1]);
    pt.sup_eps_a1[l - 1] = s1;
    pt.sup_eps_a2[l - 1] = s2;
  }
  return pt;
}

}  // namespace

TrajectoryRecord train(const ModelParams& params0, const TeacherSpec& teacher,
                       const TrainConfig& config) {
  if (config.eta <= 0.0) throw std::invalid_argument("train: eta <= 0");
  const int steps = config.resolved_steps();
  const int stride = config.record_stride();

  TrajectoryRecord rec;
  rec.eta = config.eta;

  ModelParams params = params0;
  const Eigen::VectorXd norms_v0 = params.norms_v;
  const Eigen::VectorXd norms_w0 = params.norms_w;

  AlignmentSnapshot s0 = alignment_snapshot(params, teacher, 0.0);
  rec.pairing = greedy_pairing(s0, params.norms_w);

  {
    GaussianBatch b0 =
        make_batch(config.batch, params.dim(), config.seed,
                   config.data_stream, 0);
    McEstimate l0 = mc_loss(params, teacher, b0);
    rec.points.push_back(make_point(params, teacher, 0.0, l0.value,
                                    l0.std_error, rec.pairing, nullptr,
                                    nullptr));
  }

  for (int step = 0; step < steps; ++step) {
    GaussianBatch batch =
        make_batch(config.batch, params.dim(), config.seed,
                   config.data_stream, static_cast<std::uint64_t>(step) + 1);
    McGradient g = mc_grad(params, teacher, batch, /*with_se=*/false);
    params.V -= config.eta * g.dV;
    params.W -= config.eta * g.dW;
    if (!finite(params.V) || !finite(params.W)) {
      rec.status = TrainStatus::diverged;
      rec.steps_run = step;
      break;
    }
    renormalize(params, norms_v0, norms_w0);
    rec.steps_run = step + 1;

    if ((step + 1) % stride == 0 || step + 1 == steps) {
      const TrajectoryPoint& prev = rec.points.back();
      rec.points.push_back(make_point(params, teacher,
                                      (step + 1) * config.eta, g.loss.value,
                                      g.loss.std_error, rec.pairing,
                                      &prev.sup_eps_a1, &prev.sup_eps_a2));
    }
  }

  rec.final_params = params;
  return rec;
}

RecoveryReport recovery_times(const TrajectoryRecord& traj,
                              const PairingMap& pairing, double xi) {
  if (xi <= 0.0 || xi >= 1.0)
    throw std::invalid_argument("recovery_times: xi must be in (0,1)");
  if (traj.points.empty())
    throw std::invalid_argument("recovery_times: empty trajectory");

  const int m_star = static_cast<int>(pairing.pairs.size());
  const double inf = std::numeric_limits<double>::infinity();

  auto crossing = [&](double threshold) {
    std::vector<double> T(m_star, inf);
    for (int l = 0; l < m_star; ++l) {
      auto [i, j] = pairing.pairs[l];
      double prev_t = traj.points.front().t;
      double prev_g = traj.points.front().snapshot.gamma2(i, j);
      if (prev_g >= threshold) {
        T[l] = prev_t;
        continue;
      }
      for (std::size_t p = 1; p < traj.points.size(); ++p) {
        double t = traj.points[p].t;
        double g = traj.points[p].snapshot.gamma2(i, j);
        if (g >= threshold) {
          double frac = (threshold - prev_g) / (g - prev_g);
          T[l] = prev_t + frac * (t - prev_t);
          break;
        }
        prev_t = t;
        prev_g = g;
      }
    }
    return T;
  };

  RecoveryReport rep;
  rep.xi = xi;
  rep.T_ell = crossing(xi);
  rep.T_r = crossing(0.9);

  double stride_t = traj.points.size() > 1
                        ? traj.points[1].t - traj.points[0].t
                        : 0.0;
  rep.order_matches_pairing = true;
  for (int l = 0; l + 1 < m_star; ++l) {
    if (std::isinf(rep.T_ell[l]) || std::isinf(rep.T_ell[l + 1]) ||
        rep.T_ell[l] > rep.T_ell[l + 1] + stride_t) {
      rep.order_matches_pairing = false;
      break;
    }
  }
  if (m_star == 1 && std::isinf(rep.T_ell[0]))
    rep.order_matches_pairing = false;

  const AlignmentSnapshot& last = traj.points.back().snapshot;
  for (int l = 0; l < m_star; ++l) {
    auto [i, j] = pairing.pairs[l];
    rep.final_gamma1_paired.push_back(last.gamma1(i, j));
    rep.final_gamma2_paired.push_back(last.gamma2(i, j));
  }
  return rep;
}

}  // namespace moesim
