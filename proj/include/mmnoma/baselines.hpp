#pragma once
// Reference transmission schemes the grouped-NOMA design is compared against.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmnoma/beamformer.hpp"
#include "mmnoma/channel.hpp"
#include "mmnoma/config.hpp"
#include "mmnoma/grouping.hpp"
#include "mmnoma/rates.hpp"

namespace mmnoma::baselines {

enum class Scheme { kProposed, kIdeal, kTdmaZf, kFdma, kDigitalZf };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kProposed: return "proposed";
    case Scheme::kIdeal: return "ideal";
    case Scheme::kTdmaZf: return "tdma_zf";
    case Scheme::kFdma: return "fdma";
    case Scheme::kDigitalZf: return "digital_zf";
  }
  return "?";
}

inline Scheme scheme_from_name(const std::string& name) {
  for (Scheme s : {Scheme::kProposed, Scheme::kIdeal, Scheme::kTdmaZf,
                   Scheme::kFdma, Scheme::kDigitalZf})
    if (name == scheme_name(s)) return s;
  throw std::invalid_argument("unknown scheme: " + name);
}

struct BaselineResult {
  Scheme scheme;
  double asr_bps_hz = 0.0;
  double ee_bps_hz_per_w = 0.0;
  std::vector<double> per_user_rate;  // indexed by original user id
};

namespace detail {

// Exact water-filling over parallel channels: maximizes sum log2(1 + p/n)
// subject to sum p = budget, p >= 0. Entries with non-finite n get nothing.
inline std::vector<double> water_fill(const std::vector<double>& noise_over_gain,
                                      double budget) {
  const int k = static_cast<int>(noise_over_gain.size());
  std::vector<double> p(k, 0.0);
  std::vector<int> order;
  order.reserve(k);
  for (int i = 0; i < k; ++i)
    if (std::isfinite(noise_over_gain[i])) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return noise_over_gain[a] < noise_over_gain[b];
  });
  double prefix = 0.0;
  for (int i : order) prefix += noise_over_gain[i];
  for (int m = static_cast<int>(order.size()); m >= 1; --m) {
    const double level = (budget + prefix) / m;
    if (level > noise_over_gain[order[m - 1]]) {
      for (int i = 0; i < m; ++i)
        p[order[i]] = level - noise_over_gain[order[i]];
      break;
    }
    prefix -= noise_over_gain[order[m - 1]];
  }
  return p;
}

}  // namespace detail

// One RF chain per antenna, zero-forcing across all users at once. Needs at
// least as many antennas as users. The precoder inverts the stacked channel
// rows, which leaves every user an interference-free link; the budget is then
// water-filled over those parallel links.
inline BaselineResult fully_digital_zf(const channel::ChannelSet& channels,
                                       const SystemConfig& config) {
  const int k = config.n_users;
  if (k > config.n_antennas)
    throw std::invalid_argument(
        "fully digital zero-forcing needs n_antennas >= n_users");
  Eigen::MatrixXcd h(k, config.n_antennas);
  for (int u = 0; u < k; ++u) h.row(u) = channels.h[u].adjoint();
  Eigen::MatrixXcd w = beam::detail::pseudo_inverse(h);
  std::vector<double> noise_over_gain(k);
  for (int u = 0; u < k; ++u) {
    const double norm = w.col(u).norm();
    if (norm > 0.0) w.col(u) /= norm;
    const double gain = std::norm(channels.h[u].dot(w.col(u)));
    noise_over_gain[u] =
        gain > 0.0 ? config.noise_power / gain
                   : std::numeric_limits<double>::infinity();
  }
  const auto p = detail::water_fill(noise_over_gain, config.total_power);

  BaselineResult out;
  out.scheme = Scheme::kDigitalZf;
  out.per_user_rate.assign(k, 0.0);
  for (int u = 0; u < k; ++u) {
    if (p[u] > 0.0)
      out.per_user_rate[u] = std::log2(1.0 + p[u] / noise_over_gain[u]);
    out.asr_bps_hz += out.per_user_rate[u];
  }
  out.ee_bps_hz_per_w = rates::energy_efficiency(
      out.asr_bps_hz, config, rates::Architecture::kFullyDigital);
  return out;
}

// Hybrid front end serving one user per RF chain per time slot. Users are
// interleaved across groups round-robin and chunked into ceil(K/M) slots.
// Within a slot each user gets an analog beam steered at its strongest path
// and a digital stage that zero-forces the slot's channels, so the slot again
// decomposes into parallel links; each slot water-fills the full budget and
// rates are scaled by the slot duty cycle.
inline BaselineResult tdma_zf(const channel::ChannelSet& channels,
                              const grouping::Grouping& grouping,
                              const SystemConfig& config) {
  const int k = config.n_users;
  const int m = config.n_rf_chains;
  std::vector<int> flat;
  flat.reserve(k);
  for (std::size_t offset = 0; flat.size() < static_cast<std::size_t>(k);
       ++offset)
    for (const auto& group : grouping.groups)
      if (offset < group.size()) flat.push_back(group[offset]);
  const int n_slots = (k + m - 1) / m;

  BaselineResult out;
  out.scheme = Scheme::kTdmaZf;
  out.per_user_rate.assign(k, 0.0);
  for (int slot = 0; slot < n_slots; ++slot) {
    const int begin = slot * m;
    const int s = std::min(m, k - begin);
    Eigen::MatrixXcd a(config.n_antennas, s);
    Eigen::MatrixXcd h(config.n_antennas, s);
    for (int i = 0; i < s; ++i) {
      const int u = flat[begin + i];
      int strongest = 0;
      for (int l = 1; l < config.n_paths; ++l)
        if (std::abs(channels.path_gains[u][l]) >
            std::abs(channels.path_gains[u][strongest]))
          strongest = l;
      a.col(i) = channel::steering_vector(config.n_antennas,
                                          channels.path_aod_cos[u][strongest],
                                          config.antenna_spacing_ratio) /
                 std::sqrt(static_cast<double>(config.n_antennas));
      h.col(i) = channels.h[u];
    }
    Eigen::MatrixXcd w = a * beam::detail::pseudo_inverse(h.adjoint() * a);
    std::vector<double> noise_over_gain(s);
    for (int i = 0; i < s; ++i) {
      const double norm = w.col(i).norm();
      if (norm > 0.0) w.col(i) /= norm;
      const double gain = std::norm(h.col(i).dot(w.col(i)));
      noise_over_gain[i] =
          gain > 0.0 ? config.noise_power / gain
                     : std::numeric_limits<double>::infinity();
    }
    const auto p = detail::water_fill(noise_over_gain, config.total_power);
    for (int i = 0; i < s; ++i)
      if (p[i] > 0.0)
        out.per_user_rate[flat[begin + i]] =
            std::log2(1.0 + p[i] / noise_over_gain[i]) / n_slots;
  }
  for (double r : out.per_user_rate) out.asr_bps_hz += r;
  out.ee_bps_hz_per_w = rates::energy_efficiency(out.asr_bps_hz, config,
                                                 rates::Architecture::kHybrid);
  return out;
}

// Frequency split of the NOMA design: each group's band is divided evenly
// among its members, every user transmits at the average per-user power, and
// the beams are the ones the grouped design produced. Cross-group leakage
// scales with the number of users sharing each interfering beam; noise scales
// with the per-user bandwidth share.
inline BaselineResult fdma(const channel::ChannelSet& channels,
                           const grouping::Grouping& grouping,
                           const SystemConfig& config,
                           const Eigen::MatrixXcd& w) {
  const int k = config.n_users;
  const int m_count = static_cast<int>(grouping.groups.size());
  const double p_share = config.total_power / k;

  BaselineResult out;
  out.scheme = Scheme::kFdma;
  out.per_user_rate.assign(k, 0.0);
  for (int m = 0; m < m_count; ++m) {
    const double share = 1.0 / static_cast<double>(grouping.groups[m].size());
    for (int u : grouping.groups[m]) {
      const double own = std::norm(channels.h[u].dot(w.col(m)));
      double inter = 0.0;
      for (int i = 0; i < m_count; ++i)
        if (i != m)
          inter += std::norm(channels.h[u].dot(w.col(i))) * p_share *
                   static_cast<double>(grouping.groups[i].size());
      const double sinr =
          own * p_share / (inter + config.noise_power * share);
      out.per_user_rate[u] = share * std::log2(1.0 + sinr);
      out.asr_bps_hz += out.per_user_rate[u];
    }
  }
  out.ee_bps_hz_per_w = rates::energy_efficiency(out.asr_bps_hz, config,
                                                 rates::Architecture::kHybrid);
  return out;
}

}  // namespace mmnoma::baselines
