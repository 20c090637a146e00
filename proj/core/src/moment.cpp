#include "moesim/moment.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "moesim/hermite.hpp"

namespace moesim {

namespace {

void validate_degrees(const std::vector<int>& degrees) {
  int n = static_cast<int>(degrees.size());
  if (n < 1) throw std::invalid_argument("degree vector is empty");
  int total = 0;
  for (int k : degrees) {
    if (k < 0) throw std::invalid_argument("negative degree");
    if (k > 24) throw std::invalid_argument("degree above cap 24");
    total += k;
  }
  if (n > 4 && total > 16)
    throw std::invalid_argument("degree sum above cap 16 for n > 4");
}

void validate_covariance(const Eigen::MatrixXd& sigma, int n) {
  if (sigma.rows() != n || sigma.cols() != n)
    throw std::invalid_argument("covariance dimension mismatch");
  for (int i = 0; i < n; ++i) {
    if (std::abs(sigma(i, i) - 1.0) > 1e-9)
      throw std::invalid_argument("covariance diagonal must be 1");
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-12)
        throw std::invalid_argument("covariance must be symmetric");
      if (std::abs(sigma(i, j)) > 1.0 + 1e-12)
        throw std::invalid_argument("covariance entry outside [-1, 1]");
    }
  }
}

struct UpperPair {
  int a, b;
};

// Enumeration keyed by the degree vector only; cached because the oracle
// requests the same vectors thousands of times per table build.
using EnumKey = std::vector<int>;

void backtrack(const std::vector<UpperPair>& pairs, std::size_t idx,
               std::vector<int>& rem, std::vector<int>& slot,
               const std::vector<std::vector<int>>& cap_after,
               std::vector<std::vector<int>>& out) {
  if (idx == pairs.size()) {
    for (int r : rem)
      if (r != 0) return;
    out.push_back(slot);
    return;
  }
  auto [a, b] = pairs[idx];
  int hi = std::min(rem[a], rem[b]);
  for (int v = 0; v <= hi; ++v) {
    // prune: remaining degree must fit in the slots still open
    bool feasible = true;
    for (std::size_t q = 0; q < rem.size(); ++q) {
      int r = rem[q] - (static_cast<int>(q) == a ? v : 0) -
              (static_cast<int>(q) == b ? v : 0);
      if (r > cap_after[idx][q]) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    slot[idx] = v;
    rem[a] -= v;
    rem[b] -= v;
    backtrack(pairs, idx + 1, rem, slot, cap_after, out);
    rem[a] += v;
    rem[b] += v;
  }
  slot[idx] = 0;
}

const std::vector<std::vector<int>>& enumerate_slots(
    const std::vector<int>& degrees) {
  thread_local std::map<EnumKey, std::vector<std::vector<int>>> cache;
  auto it = cache.find(degrees);
  if (it != cache.end()) return it->second;

  int n = static_cast<int>(degrees.size());
  std::vector<UpperPair> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});

  // cap_after[idx][q]: the largest total degree node q can still place in
  // pairs idx.. (excluding none), bounded by the partner degrees.
  std::vector<std::vector<int>> cap_after(pairs.size() + 1,
                                          std::vector<int>(n, 0));
  for (int idx = static_cast<int>(pairs.size()) - 1; idx >= 0; --idx) {
    cap_after[idx] = cap_after[idx + 1];
    cap_after[idx][pairs[idx].a] += degrees[pairs[idx].b];
    cap_after[idx][pairs[idx].b] += degrees[pairs[idx].a];
  }

  std::vector<std::vector<int>> out;
  int total = std::accumulate(degrees.begin(), degrees.end(), 0);
  if (total % 2 == 0) {
    std::vector<int> rem = degrees;
    std::vector<int> slot(pairs.size(), 0);
    backtrack(pairs, 0, rem, slot, cap_after, out);
  }
  return cache.emplace(degrees, std::move(out)).first->second;
}

}  // namespace

std::vector<DegreeMatrix> enumerate_degree_matrices(
    const std::vector<int>& degrees) {
  validate_degrees(degrees);
  int n = static_cast<int>(degrees.size());
  const auto& slots = enumerate_slots(degrees);

  std::vector<DegreeMatrix> out;
  out.reserve(slots.size());
  for (const auto& s : slots) {
    DegreeMatrix dm;
    dm.entries = Eigen::MatrixXi::Zero(n, n);
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        dm.entries(i, j) = s[idx];
        dm.entries(j, i) = s[idx];
        ++idx;
      }
    out.push_back(std::move(dm));
  }
  return out;
}

double gaussian_hermite_moment_normalized(const std::vector<int>& degrees,
                                          const Eigen::MatrixXd& covariance) {
  validate_degrees(degrees);
  int n = static_cast<int>(degrees.size());
  validate_covariance(covariance, n);

  const auto& slots = enumerate_slots(degrees);
  if (slots.empty()) return 0.0;

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  double total = 0.0;
  for (const auto& s : slots) {
    double term = 1.0;
    for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
      int m = s[idx];
      if (m == 0) continue;
      double rho = covariance(pairs[idx].first, pairs[idx].second);
      term *= std::pow(rho, m) / factorial(m);
    }
    total += term;
  }
  return total;
}

double gaussian_hermite_moment(const MomentRequest& req) {
  double sum = gaussian_hermite_moment_normalized(req.degrees, req.covariance);
  double pre = 1.0;
  for (int k : req.degrees) pre *= factorial(k);
  return pre * sum;
}

}  // namespace moesim
