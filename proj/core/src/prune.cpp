#include "moesim/prune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace moesim {

namespace {

std::vector<int> complement(const std::vector<int>& pruned, int m) {
  std::vector<bool> out(m, true);
  for (int r : pruned) {
    if (r < 0 || r >= m)
      throw std::invalid_argument("pruned index out of range");
    out[r] = false;
  }
  std::vector<int> keep;
  for (int i = 0; i < m; ++i)
    if (out[i]) keep.push_back(i);
  return keep;
}

// Per-expert outputs h_i(x_b) for every sample: B x m.
Eigen::MatrixXd expert_outputs(const ModelParams& params,
                               const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Zv = X * params.normalized_v().transpose();
  Eigen::MatrixXd Zw = X * params.normalized_w().transpose();
  Eigen::ArrayXXd gate = 1.0 / (1.0 + (-Zv.array()).exp());
  Eigen::ArrayXXd expert = Zw.array().cube() - 3.0 * Zw.array();
  return (gate * expert).matrix();
}

McEstimate mse_half(const Eigen::VectorXd& residual) {
  const int B = static_cast<int>(residual.size());
  double sum = 0.0, sum_sq = 0.0;
  for (int b = 0; b < B; ++b) {
    double h = 0.5 * residual(b) * residual(b);
    sum += h;
    sum_sq += h * h;
  }
  McEstimate e;
  e.batch_size = B;
  e.value = sum / B;
  double var = std::max(0.0, sum_sq / B - e.value * e.value);
  e.std_error = B > 1 ? std::sqrt(var / (B - 1)) : 0.0;
  return e;
}

struct FitResult {
  double slope = 0.0;
  double r2 = 0.0;
  int points = 0;
};

FitResult log_linear_fit(const std::vector<double>& ts,
                         const std::vector<double>& ys, double floor) {
  std::vector<double> t, ly;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ys[i] > floor) {
      t.push_back(ts[i]);
      ly.push_back(std::log(ys[i]));
    }
  }
  FitResult fit;
  fit.points = static_cast<int>(t.size());
  if (fit.points < 3) return fit;
  double n = static_cast<double>(t.size());
  double mt = std::accumulate(t.begin(), t.end(), 0.0) / n;
  double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (stt == 0.0 || syy == 0.0) return fit;
  fit.slope = sty / stt;
  double ss_res = syy - sty * sty / stt;
  fit.r2 = 1.0 - ss_res / syy;
  return fit;
}

}  // namespace

McEstimate submodel_loss(const ModelParams& params, const TeacherSpec& teacher,
                         const std::vector<int>& pruned,
                         const LossEstimator& estimator) {
  std::vector<int> keep = complement(pruned, params.experts());

  if (estimator.kind == LossEstimator::Kind::analytic) {
    if (estimator.profile == nullptr)
      throw std::invalid_argument("submodel_loss: analytic needs a profile");
    McEstimate e;
    e.std_error = 0.0;
    e.batch_size = 0;
    if (keep.empty())
      e.value = 0.5 * teacher_second_moment(teacher, *estimator.profile);
    else
      e.value =
          population_loss(params.restricted(keep), teacher, *estimator.profile);
    return e;
  }

  GaussianBatch batch = make_batch(estimator.batch, params.dim(),
                                   estimator.seed, Stream::prune_eval, 0);
  Eigen::VectorXd f_star = batch_forward(teacher, batch.samples);
  if (keep.empty()) return mse_half(-f_star);
  ModelParams sub = params.restricted(keep);
  Eigen::VectorXd resid = batch_forward(sub, batch.samples) - f_star;
  return mse_half(resid);
}

PruneResult greedy_prune(const ModelParams& params, const TeacherSpec& teacher,
                         const LossEstimator& estimator, double margin) {
  const int m = params.experts();
  const bool analytic = estimator.kind == LossEstimator::Kind::analytic;

  PruneResult res;
  std::vector<int> pruned;

  if (analytic) {
    if (estimator.profile == nullptr)
      throw std::invalid_argument("greedy_prune: analytic needs a profile");
    double eff_margin = margin >= 0.0 ? margin : 1e-9;
    std::vector<int> keep(m);
    std::iota(keep.begin(), keep.end(), 0);
    double current =
        population_loss(params, teacher, *estimator.profile);
    res.losses.push_back({current, 0.0, 0});
    while (!keep.empty()) {
      int best_r = -1;
      double best_loss = std::numeric_limits<double>::infinity();
      for (int r : keep) {
        std::vector<int> cand = pruned;
        cand.push_back(r);
        std::vector<int> ck = complement(cand, m);
        double loss =
            ck.empty()
                ? submodel_loss(params, teacher, cand, estimator).value
                : population_loss(params.restricted(ck), teacher,
                                  *estimator.profile);
        if (loss < best_loss) {  // strict: ties keep the smallest r
          best_loss = loss;
          best_r = r;
        }
      }
      if (best_loss >= current - eff_margin) break;
      pruned.push_back(best_r);
      keep.erase(std::find(keep.begin(), keep.end(), best_r));
      current = best_loss;
      res.removal_order.push_back(best_r);
      res.losses.push_back({best_loss, 0.0, 0});
    }
  } else {
    // Common random numbers: one evaluation batch per prune step, shared by
    // every candidate; the stopping margin uses the paired-difference SE.
    for (std::uint64_t step = 0;; ++step) {
      GaussianBatch batch =
          make_batch(estimator.batch, params.dim(), estimator.seed,
                     Stream::prune_eval, step);
      Eigen::VectorXd f_star = batch_forward(teacher, batch.samples);
      Eigen::MatrixXd H = expert_outputs(params, batch.samples);

      std::vector<int> keep = complement(pruned, m);
      Eigen::VectorXd f_cur = -f_star;
      for (int i : keep) f_cur += H.col(i);
      McEstimate cur = mse_half(f_cur);
      if (step == 0) res.losses.push_back(cur);

      if (keep.empty()) break;
      int best_r = -1;
      McEstimate best;
      best.value = std::numeric_limits<double>::infinity();
      double best_diff_se = 0.0;
      for (int r : keep) {
        Eigen::VectorXd f_cand = f_cur - H.col(r);
        McEstimate cand = mse_half(f_cand);
        if (cand.value < best.value) {
          best = cand;
          best_r = r;
          // SE of the loss *difference* on the shared batch
          const int B = cand.batch_size;
          double sum = 0.0, sum_sq = 0.0;
          for (int b = 0; b < B; ++b) {
            double dl = 0.5 * (f_cand(b) * f_cand(b) - f_cur(b) * f_cur(b));
            sum += dl;
            sum_sq += dl * dl;
          }
          double mean = sum / B;
          double var = std::max(0.0, sum_sq / B - mean * mean);
          best_diff_se = B > 1 ? std::sqrt(var / (B - 1)) : 0.0;
        }
      }
      double eff_margin = margin >= 0.0 ? margin : 2.0 * best_diff_se;
      if (best.value >= cur.value - eff_margin) break;
      pruned.push_back(best_r);
      res.removal_order.push_back(best_r);
      res.losses.push_back(best);
    }
  }

  res.tau_star = static_cast<int>(res.removal_order.size());
  res.kept = complement(pruned, m);
  res.pruned_params = params.restricted(res.kept);
  return res;
}

FinetuneReport finetune(const ModelParams& pruned, const TeacherSpec& teacher,
                        const PairingMap& pairing,
                        const ActivationProfile& profile,
                        const FinetuneConfig& config) {
  const int m_star = teacher.experts();
  if (pruned.experts() != m_star)
    throw std::invalid_argument(
        "finetune: pruned model must have exactly m_star experts");
  if (static_cast<int>(pairing.pairs.size()) != m_star)
    throw std::invalid_argument("finetune: pairing size mismatch");

  // teacher rows reordered so row l matches student row index map
  // pruned models are indexed 0..m*-1; pairing maps original student indices
  // to teacher columns, and the caller passes a pairing already rebased onto
  // the pruned indexing.
  auto dist_sq_now = [&](const ModelParams& p) {
    Eigen::MatrixXd Vb = p.normalized_v();
    Eigen::MatrixXd Wb = p.normalized_w();
    double acc = 0.0;
    for (const auto& [i, j] : pairing.pairs) {
      acc += (Vb.row(i) - teacher.Vstar.row(j)).squaredNorm();
      acc += (Wb.row(i) - teacher.Wstar.row(j)).squaredNorm();
    }
    return acc;
  };
  auto max_row_dist = [&](const ModelParams& p) {
    Eigen::MatrixXd Vb = p.normalized_v();
    Eigen::MatrixXd Wb = p.normalized_w();
    double mx = 0.0;
    for (const auto& [i, j] : pairing.pairs) {
      mx = std::max(mx, (Vb.row(i) - teacher.Vstar.row(j)).norm());
      mx = std::max(mx, (Wb.row(i) - teacher.Wstar.row(j)).norm());
    }
    return mx;
  };

  FinetuneReport rep;
  ModelParams params = pruned;
  const Eigen::VectorXd norms_v0 = params.norms_v;
  const Eigen::VectorXd norms_w0 = params.norms_w;

  rep.precondition_ok = max_row_dist(params) <= config.epsilon_precondition;
  double d0 = dist_sq_now(params);
  rep.ts.push_back(0.0);
  rep.dist_sq.push_back(d0);
  if (d0 <= config.noise_floor) {
    rep.at_optimum = true;
  }

  for (int step = 0; step < config.steps && !rep.at_optimum; ++step) {
    if (config.analytic_gradient) {
      PopulationGradient g = population_grad(params, teacher, profile);
      params.V -= config.eta * g.dV;
      params.W -= config.eta * g.dW;
    } else {
      GaussianBatch batch =
          make_batch(config.batch, params.dim(), config.seed,
                     Stream::finetune_data, static_cast<std::uint64_t>(step));
      McGradient g = mc_grad(params, teacher, batch, /*with_se=*/false);
      params.V -= config.eta * g.dV;
      params.W -= config.eta * g.dW;
    }
    if (!params.V.allFinite() || !params.W.allFinite()) {
      rep.diverged = true;
      break;
    }
    renormalize(params, norms_v0, norms_w0);
    if ((step + 1) % config.record_every == 0 || step + 1 == config.steps) {
      double ds = dist_sq_now(params);
      rep.ts.push_back((step + 1) * config.eta);
      rep.dist_sq.push_back(ds);
      if (ds > 1.5 * d0 && d0 > config.noise_floor) {
        rep.diverged = true;
        break;
      }
    }
  }

  FitResult fit = log_linear_fit(rep.ts, rep.dist_sq, config.noise_floor);
  rep.kappa_hat = -2.0 * fit.slope;
  rep.fit_r2 = fit.r2;
  rep.fit_points = fit.points;
  rep.final_params = params;
  return rep;
}

HessianProbe hessian_quadratic_form(const ModelParams& params,
                                    const TeacherSpec& teacher,
                                    const ActivationProfile& profile,
                                    const Eigen::MatrixXd& U,
                                    const Eigen::MatrixXd& Q, double fd_step) {
  const int m = params.experts();
  if (U.rows() != m || Q.rows() != m || U.cols() != params.dim() ||
      Q.cols() != params.dim())
    throw std::invalid_argument("hessian_quadratic_form: shape mismatch");
  double norm_sq = U.squaredNorm() + Q.squaredNorm();
  if (norm_sq == 0.0)
    throw std::invalid_argument("hessian_quadratic_form: zero direction");
  Eigen::MatrixXd Vb = params.normalized_v();
  Eigen::MatrixXd Wb = params.normalized_w();
  for (int i = 0; i < m; ++i) {
    if (std::abs(U.row(i).dot(Vb.row(i))) > 1e-8 * (1.0 + U.row(i).norm()) ||
        std::abs(Q.row(i).dot(Wb.row(i))) > 1e-8 * (1.0 + Q.row(i).norm()))
      throw std::invalid_argument(
          "hessian_quadratic_form: direction not tangent");
  }

  auto probe = [&](double eps) {
    ModelParams plus = params;
    plus.V += eps * U;
    plus.W += eps * Q;
    plus.refresh_norms();
    ModelParams minus = params;
    minus.V -= eps * U;
    minus.W -= eps * Q;
    minus.refresh_norms();
    PopulationGradient gp = population_grad(plus, teacher, profile);
    PopulationGradient gm = population_grad(minus, teacher, profile);
    double dot = ((gp.dV - gm.dV).array() * U.array()).sum() +
                 ((gp.dW - gm.dW).array() * Q.array()).sum();
    return dot / (2.0 * eps * norm_sq);
  };

  HessianProbe out;
  out.value = probe(fd_step);
  out.value_coarse = probe(2.0 * fd_step);
  out.step_too_small =
      std::abs(out.value - out.value_coarse) >
      0.1 * std::abs(out.value) + 1e-6;
  return out;
}

}  // namespace moesim
