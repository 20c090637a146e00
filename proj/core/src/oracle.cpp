#include "moesim/oracle.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <utility>

#include "moesim/hermite.hpp"
#include "moesim/moment.hpp"

namespace moesim {

namespace {

// Covariance of (v1^T x, v2^T x, w1^T x, w2^T x) for unit rows.
Eigen::MatrixXd four_node_covariance(const Eigen::VectorXd& v1,
                                     const Eigen::VectorXd& v2,
                                     const Eigen::VectorXd& w1,
                                     const Eigen::VectorXd& w2) {
  Eigen::MatrixXd S(4, 4);
  const Eigen::VectorXd* u[4] = {&v1, &v2, &w1, &w2};
  for (int a = 0; a < 4; ++a) {
    S(a, a) = 1.0;
    for (int b = a + 1; b < 4; ++b) {
      double dot = u[a]->dot(*u[b]);
      // guard Cauchy-Schwarz roundoff so the moment validator stays happy
      if (dot > 1.0) dot = 1.0;
      if (dot < -1.0) dot = -1.0;
      S(a, b) = dot;
      S(b, a) = dot;
    }
  }
  return S;
}

// Fills one PairMoments block. Entries are zero when k+l+a+b is odd or when
// |k-l| > a+b (no feasible degree matrix: the routers' surplus degree has
// nowhere to go but the two expert nodes).
PairMoments pair_moments(const Eigen::MatrixXd& S, int K) {
  PairMoments pm;
  for (auto* mat : {&pm.m33, &pm.m23, &pm.m32, &pm.m22})
    *mat = Eigen::MatrixXd::Zero(K + 1, K + 1);
  struct AB {
    int a, b;
    Eigen::MatrixXd* dst;
  };
  AB blocks[4] = {{3, 3, &pm.m33}, {2, 3, &pm.m23}, {3, 2, &pm.m32},
                  {2, 2, &pm.m22}};
  for (auto& blk : blocks) {
    double ab_fact = factorial(blk.a) * factorial(blk.b);
    for (int k = 0; k <= K; ++k) {
      for (int l = 0; l <= K; ++l) {
        if ((k + l + blk.a + blk.b) % 2 != 0) continue;
        if (std::abs(k - l) > blk.a + blk.b) continue;
        double s = gaussian_hermite_moment_normalized({k, l, blk.a, blk.b}, S);
        // (k! l! a! b! * s) / (k! l!) = a! b! * s
        (*blk.dst)(k, l) = ab_fact * s;
      }
    }
  }
  return pm;
}

struct SeriesWeights {
  // c[k] padded so c_{K+1} is addressable
  std::vector<double> c;
  int K;
};

SeriesWeights weights_from(const ActivationProfile& profile) {
  SeriesWeights w;
  w.K = profile.truncation_order;
  w.c = profile.coeffs;
  w.c.resize(w.K + 2, 0.0);  // c_{K+1} treated as beyond truncation
  return w;
}

double assemble(const Eigen::MatrixXd& block, const SeriesWeights& w,
                int shift_k, int shift_l) {
  // sum_{k,l<=K} c_{k+shift_k} c_{l+shift_l} * block(k, l)
  double acc = 0.0;
  for (int k = 0; k <= w.K; ++k) {
    for (int l = 0; l <= w.K; ++l) {
      double b = block(k, l);
      if (b == 0.0) continue;
      acc += w.c[k + shift_k] * w.c[l + shift_l] * b;
    }
  }
  return acc;
}

// sum over all (i, j) pairs of the c_k c_l weighted (3,3) moments: the
// quadratic form E[f1 f2] for two row families.
double quadratic_term(const Eigen::MatrixXd& V1, const Eigen::MatrixXd& W1,
                      const Eigen::MatrixXd& V2, const Eigen::MatrixXd& W2,
                      const SeriesWeights& w) {
  double acc = 0.0;
  for (int i = 0; i < V1.rows(); ++i) {
    for (int j = 0; j < V2.rows(); ++j) {
      Eigen::MatrixXd S = four_node_covariance(V1.row(i), V2.row(j),
                                               W1.row(i), W2.row(j));
      double ab_fact = 36.0;  // 3! * 3!
      for (int k = 0; k <= w.K; ++k) {
        for (int l = 0; l <= w.K; ++l) {
          if ((k + l) % 2 != 0) continue;
          if (std::abs(k - l) > 6) continue;
          double s = gaussian_hermite_moment_normalized({k, l, 3, 3}, S);
          if (s == 0.0) continue;
          acc += w.c[k] * w.c[l] * ab_fact * s;
        }
      }
    }
  }
  return acc;
}

}  // namespace

double LambdaTable::raw(int i, int j, int k, int l, int a, int b) const {
  const PairMoments& pm = C.at(static_cast<std::size_t>(i) * m + j);
  if (a == 3 && b == 3) return pm.m33(k, l);
  if (a == 2 && b == 3) return pm.m23(k, l);
  if (a == 3 && b == 2) return pm.m32(k, l);
  if (a == 2 && b == 2) return pm.m22(k, l);
  throw std::invalid_argument("LambdaTable::raw: unsupported (a, b)");
}

double LambdaTable::raw_hat(int i, int j, int k, int l, int a, int b) const {
  const PairMoments& pm = Chat.at(static_cast<std::size_t>(i) * m_star + j);
  if (a == 3 && b == 3) return pm.m33(k, l);
  if (a == 2 && b == 3) return pm.m23(k, l);
  if (a == 3 && b == 2) return pm.m32(k, l);
  if (a == 2 && b == 2) return pm.m22(k, l);
  throw std::invalid_argument("LambdaTable::raw_hat: unsupported (a, b)");
}

LambdaTable build_lambda_tables(const ModelParams& params,
                                const TeacherSpec& teacher,
                                const ActivationProfile& profile) {
  SeriesWeights w = weights_from(profile);
  LambdaTable t;
  t.m = params.experts();
  t.m_star = teacher.experts();
  t.K = w.K;

  Eigen::MatrixXd Vb = params.normalized_v();
  Eigen::MatrixXd Wb = params.normalized_w();

  for (int idx = 1; idx <= 5; ++idx) {
    t.lambda[idx] = Eigen::MatrixXd::Zero(t.m, t.m);
    t.lambdahat[idx] = Eigen::MatrixXd::Zero(t.m, t.m_star);
  }
  t.C.resize(static_cast<std::size_t>(t.m) * t.m);
  t.Chat.resize(static_cast<std::size_t>(t.m) * t.m_star);

  for (int i = 0; i < t.m; ++i) {
    for (int j = 0; j < t.m; ++j) {
      Eigen::MatrixXd S =
          four_node_covariance(Vb.row(i), Vb.row(j), Wb.row(i), Wb.row(j));
      PairMoments pm = pair_moments(S, w.K);
      t.lambda[1](i, j) = assemble(pm.m33, w, 1, 1);
      t.lambda[2](i, j) = assemble(pm.m23, w, 1, 0);
      t.lambda[3](i, j) = assemble(pm.m23, w, 0, 1);
      t.lambda[4](i, j) = assemble(pm.m32, w, 1, 0);
      t.lambda[5](i, j) = assemble(pm.m22, w, 0, 0);
      t.C[static_cast<std::size_t>(i) * t.m + j] = std::move(pm);
    }
    for (int j = 0; j < t.m_star; ++j) {
      Eigen::MatrixXd S = four_node_covariance(
          Vb.row(i), teacher.Vstar.row(j), Wb.row(i), teacher.Wstar.row(j));
      PairMoments pm = pair_moments(S, w.K);
      t.lambdahat[1](i, j) = assemble(pm.m33, w, 1, 1);
      t.lambdahat[2](i, j) = assemble(pm.m23, w, 1, 0);
      t.lambdahat[3](i, j) = assemble(pm.m23, w, 0, 1);
      t.lambdahat[4](i, j) = assemble(pm.m32, w, 1, 0);
      t.lambdahat[5](i, j) = assemble(pm.m22, w, 0, 0);
      t.Chat[static_cast<std::size_t>(i) * t.m_star + j] = std::move(pm);
    }
  }
  return t;
}

double population_loss(const ModelParams& params, const TeacherSpec& teacher,
                       const ActivationProfile& profile) {
  SeriesWeights w = weights_from(profile);
  Eigen::MatrixXd Vb = params.normalized_v();
  Eigen::MatrixXd Wb = params.normalized_w();
  double qss = quadratic_term(Vb, Wb, Vb, Wb, w);
  double qst = quadratic_term(Vb, Wb, teacher.Vstar, teacher.Wstar, w);
  double qtt =
      quadratic_term(teacher.Vstar, teacher.Wstar, teacher.Vstar,
                     teacher.Wstar, w);
  return 0.5 * qss - qst + 0.5 * qtt;
}

double teacher_second_moment(const TeacherSpec& teacher,
                             const ActivationProfile& profile) {
  SeriesWeights w = weights_from(profile);
  return quadratic_term(teacher.Vstar, teacher.Wstar, teacher.Vstar,
                        teacher.Wstar, w);
}

PopulationGradient population_grad(const ModelParams& params,
                                   const TeacherSpec& teacher,
                                   const ActivationProfile& profile) {
  LambdaTable t = build_lambda_tables(params, teacher, profile);
  Eigen::MatrixXd Vb = params.normalized_v();
  Eigen::MatrixXd Wb = params.normalized_w();
  int m = t.m, d = params.dim();

  PopulationGradient g;
  g.dV = Eigen::MatrixXd::Zero(m, d);
  g.dW = Eigen::MatrixXd::Zero(m, d);

  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd sv = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd sw = Eigen::VectorXd::Zero(d);
    for (int r = 0; r < m; ++r) {
      sv += t.lambda[1](i, r) * Vb.row(r).transpose() +
            3.0 * t.lambda[2](i, r) * Wb.row(i).transpose() +
            3.0 * t.lambda[4](i, r) * Wb.row(r).transpose();
      sw += t.lambda[2](i, r) * Vb.row(i).transpose() +
            t.lambda[3](i, r) * Vb.row(r).transpose() +
            3.0 * t.lambda[5](i, r) * Wb.row(r).transpose();
    }
    for (int r = 0; r < t.m_star; ++r) {
      sv -= t.lambdahat[1](i, r) * teacher.Vstar.row(r).transpose() +
            3.0 * t.lambdahat[2](i, r) * Wb.row(i).transpose() +
            3.0 * t.lambdahat[4](i, r) * teacher.Wstar.row(r).transpose();
      sw -= t.lambdahat[2](i, r) * Vb.row(i).transpose() +
            t.lambdahat[3](i, r) * teacher.Vstar.row(r).transpose() +
            3.0 * t.lambdahat[5](i, r) * teacher.Wstar.row(r).transpose();
    }
    // project onto the tangent of the row and undo the row norm
    Eigen::VectorXd vbar = Vb.row(i).transpose();
    Eigen::VectorXd wbar = Wb.row(i).transpose();
    g.dV.row(i) = ((sv - vbar.dot(sv) * vbar) / params.norms_v(i)).transpose();
    g.dW.row(i) =
        (3.0 * (sw - wbar.dot(sw) * wbar) / params.norms_w(i)).transpose();
  }
  return g;
}

}  // namespace moesim
