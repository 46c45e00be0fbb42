#pragma once
// Independent checks on the power allocator: an exhaustive grid search over
// per-user powers and first-order optimality probes for the budget split.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mmnoma/power.hpp"

namespace mmnoma::oracles {

struct OracleResult {
  double best_value = 0.0;         // best feasible sum rate found on the grid
  std::vector<double> best_point;  // watts per user, group-major flat order
  int grid_resolution = 0;
  // Empirical allowance for the grid spacing: twice the dimension times the
  // largest sum-rate change observed when one power quantum is moved between
  // two users at the best point. The continuous optimum lies within one
  // quantum per coordinate of some grid point, so it cannot beat best_value
  // by more than this unless the objective is wilder between grid points
  // than anywhere next to the best one.
  double sensitivity_bound = 0.0;
  double max_gap_to_candidate = 0.0;  // for callers comparing a specific run
  bool any_feasible = false;
};

// Enumerates every split of the budget into resolution quanta across all
// users (at most 4) and returns the best split meeting the rate floors.
// Rates use the full interference expression, not the allocator's frozen
// approximation, so this bounds what the allocator could have achieved.
inline OracleResult grid_power_oracle(const power::EffectiveGains& gains,
                                      const std::vector<std::vector<double>>& eta,
                                      double budget, double noise_power,
                                      int resolution) {
  const int m_count = static_cast<int>(gains.gains.size());
  std::vector<std::pair<int, int>> slots;  // (group, position) per flat index
  for (int m = 0; m < m_count; ++m)
    for (int n = 0; n < static_cast<int>(gains.gains[m].rows()); ++n)
      slots.emplace_back(m, n);
  const int d = static_cast<int>(slots.size());
  if (d > 4)
    throw std::invalid_argument("grid_power_oracle: more than 4 users");
  if (resolution < 1)
    throw std::invalid_argument("grid_power_oracle: resolution must be positive");

  // SINR-domain floor thresholds with the rate-domain slack folded in, so
  // feasibility tests need no logarithms.
  std::vector<double> gamma_floor(d);
  for (int i = 0; i < d; ++i) {
    const double e = eta[slots[i].first][slots[i].second];
    const double r = std::log2(1.0 + e);
    gamma_floor[i] =
        (1.0 + e) * std::exp2(-1e-12 * std::max(1.0, r)) - 1.0;
  }

  OracleResult out;
  out.grid_resolution = resolution;
  out.best_value = -std::numeric_limits<double>::infinity();
  const double quantum = budget / resolution;

  std::vector<double> p(d, 0.0);
  std::vector<double> group_power(m_count, 0.0);
  std::vector<double> gamma(d, 0.0);
  const auto compute_gammas = [&] {
    std::fill(group_power.begin(), group_power.end(), 0.0);
    for (int i = 0; i < d; ++i) group_power[slots[i].first] += p[i];
    int idx = 0;
    for (int m = 0; m < m_count; ++m) {
      const auto& g = gains.gains[m];
      double intra = 0.0;
      for (int n = 0; n < static_cast<int>(g.rows()); ++n, ++idx) {
        double inter = 0.0;
        for (int i = 0; i < m_count; ++i)
          if (i != m) inter += g(n, i) * group_power[i];
        gamma[idx] =
            g(n, m) * p[idx] / (g(n, m) * intra + inter + noise_power);
        intra += p[idx];
      }
    }
  };
  const auto raw_sum = [&] {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += std::log2(1.0 + gamma[i]);
    return s;
  };

  std::vector<int> c(d, 0), best_c;
  const std::function<void(int, int)> enumerate = [&](int pos, int remaining) {
    if (pos == d - 1) {
      c[pos] = remaining;
      for (int i = 0; i < d; ++i) p[i] = quantum * c[i];
      compute_gammas();
      for (int i = 0; i < d; ++i)
        if (!(gamma[i] >= gamma_floor[i])) return;
      out.any_feasible = true;
      const double s = raw_sum();
      if (s > out.best_value) {
        out.best_value = s;
        best_c = c;
      }
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      c[pos] = v;
      enumerate(pos + 1, remaining - v);
    }
  };
  enumerate(0, resolution);

  if (!out.any_feasible) {
    out.best_value = 0.0;
    return out;
  }
  out.best_point.resize(d);
  for (int i = 0; i < d; ++i) out.best_point[i] = quantum * best_c[i];

  p = out.best_point;
  compute_gammas();
  const double base = raw_sum();
  double worst_step = 0.0;
  for (int u = 0; u < d; ++u) {
    if (best_c[u] < 1) continue;
    for (int v = 0; v < d; ++v) {
      if (v == u) continue;
      p = out.best_point;
      p[u] -= quantum;
      p[v] += quantum;
      compute_gammas();
      worst_step = std::max(worst_step, std::abs(raw_sum() - base));
    }
  }
  out.sensitivity_bound = 2.0 * d * worst_step;
  return out;
}

// First-order optimality of a budget split under the affine SINR model: the
// marginal utilities k/(k P + b + 1) of all unpinned groups must agree, and
// the budgets must exhaust the total. Returns the sum of the worst relative
// marginal mismatch and the relative budget error; ~0 at an exact optimum.
inline double kkt_residual(const power::LinearSinrCoeffs& coeffs,
                           const std::vector<double>& group_power,
                           const std::vector<std::uint8_t>& pinned,
                           double total_power) {
  double mu_min = std::numeric_limits<double>::infinity();
  double mu_max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t m = 0; m < group_power.size(); ++m) {
    sum += group_power[m];
    if (pinned[m]) continue;
    const double mu =
        coeffs.k[m] /
        (coeffs.k[m] * group_power[m] + coeffs.b[m] + 1.0);
    mu_min = std::min(mu_min, mu);
    mu_max = std::max(mu_max, mu);
  }
  double res = std::abs(sum - total_power) / total_power;
  if (mu_max > 0.0 && std::isfinite(mu_max))
    res += (mu_max - mu_min) / mu_max;
  return res;
}

// Exchange test: moves eps watts between every ordered pair of groups that
// can donate without dropping below the floor-induced minimum budget, and
// returns the largest objective improvement found (negative when every legal
// exchange hurts). A correct split never improves beyond rounding noise.
inline double lemma2_exchange_check(const power::LinearSinrCoeffs& coeffs,
                                    const std::vector<double>& group_power,
                                    const std::vector<double>& eta_first,
                                    double total_power, double eps = 0.0) {
  if (eps <= 0.0) eps = 1e-6 * total_power;
  const int m_count = static_cast<int>(group_power.size());
  const auto objective = [&](const std::vector<double>& p) {
    double f = 0.0;
    for (int m = 0; m < m_count; ++m)
      f += std::log2(1.0 + coeffs.k[m] * p[m] + coeffs.b[m]);
    return f;
  };
  const double base = objective(group_power);
  double best_gain = -std::numeric_limits<double>::infinity();
  for (int donor = 0; donor < m_count; ++donor) {
    const double pin =
        (eta_first[donor] - coeffs.b[donor]) / coeffs.k[donor];
    if (group_power[donor] - eps < pin) continue;
    for (int receiver = 0; receiver < m_count; ++receiver) {
      if (receiver == donor) continue;
      auto p = group_power;
      p[donor] -= eps;
      p[receiver] += eps;
      best_gain = std::max(best_gain, objective(p) - base);
    }
  }
  return best_gain;
}

}  // namespace mmnoma::oracles
