#pragma once
// Correlation-driven K-means user grouping.
//
// Users are clustered around M representatives: each remaining user joins the
// group whose representative it is most correlated with, then every group
// re-elects the member with the smallest total correlation to users outside
// the group. The loop stops once the set of representatives repeats.
// Ties anywhere break toward the lowest index so runs are reproducible.

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <vector>

#include "mmnoma/channel.hpp"
#include "mmnoma/config.hpp"
#include "mmnoma/rng.hpp"

namespace mmnoma::grouping {

struct Grouping {
  std::vector<std::vector<int>> groups;  // user ids, each list sorted ascending
  std::vector<int> representatives;      // one member per group
  bool converged = true;                 // false if the iteration cap was hit
};

// Group whose representative has the highest correlation with user k.
inline int assign_user(int k, const std::vector<int>& reps,
                       const Eigen::MatrixXd& corr) {
  int best = 0;
  double best_corr = corr(k, reps[0]);
  for (int m = 1; m < static_cast<int>(reps.size()); ++m) {
    if (corr(k, reps[m]) > best_corr) {
      best_corr = corr(k, reps[m]);
      best = m;
    }
  }
  return best;
}

// Sum of user k's correlations with every user outside its own group.
inline double outgroup_correlation(int k, const Grouping& grouping,
                                   const Eigen::MatrixXd& corr) {
  int own = -1;
  for (int m = 0; m < static_cast<int>(grouping.groups.size()); ++m)
    for (int member : grouping.groups[m])
      if (member == k) own = m;
  if (own < 0)
    throw std::invalid_argument("outgroup_correlation: user not in any group");
  double sum = 0.0;
  for (int m = 0; m < static_cast<int>(grouping.groups.size()); ++m) {
    if (m == own) continue;
    for (int member : grouping.groups[m]) sum += corr(k, member);
  }
  return sum;
}

// Member of group m with the smallest out-group correlation sum.
inline int update_representative(int m, const Grouping& grouping,
                                 const Eigen::MatrixXd& corr) {
  const auto& members = grouping.groups[m];
  if (members.empty())
    throw std::invalid_argument("update_representative: empty group");
  int best = members[0];
  double best_sum = outgroup_correlation(members[0], grouping, corr);
  for (std::size_t i = 1; i < members.size(); ++i) {
    const double sum = outgroup_correlation(members[i], grouping, corr);
    if (sum < best_sum) {
      best_sum = sum;
      best = members[i];
    }
  }
  return best;
}

// Core loop with explicit initial representatives (must be distinct users).
inline Grouping kmeans_grouping(const Eigen::MatrixXd& corr,
                                std::vector<int> reps,
                                int max_iterations = 100) {
  const int k = static_cast<int>(corr.rows());
  const int m = static_cast<int>(reps.size());
  Grouping grouping;
  grouping.converged = false;
  for (int iter = 0; iter < max_iterations; ++iter) {
    grouping.groups.assign(m, {});
    grouping.representatives = reps;
    for (int g = 0; g < m; ++g) grouping.groups[g].push_back(reps[g]);
    for (int u = 0; u < k; ++u) {
      if (std::find(reps.begin(), reps.end(), u) != reps.end()) continue;
      grouping.groups[assign_user(u, reps, corr)].push_back(u);
    }
    for (auto& group : grouping.groups) std::sort(group.begin(), group.end());

    std::vector<int> next(m);
    for (int g = 0; g < m; ++g) next[g] = update_representative(g, grouping, corr);

    std::vector<int> a = reps, b = next;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a == b) {
      grouping.representatives = next;  // members of their groups by construction
      grouping.converged = true;
      break;
    }
    reps = std::move(next);
  }
  return grouping;
}

inline Grouping group_users(const channel::ChannelSet& channels,
                            const SystemConfig& config, RngStream& rng) {
  const int k = config.n_users;
  const int m = config.n_rf_chains;
  if (k <= m)
    throw std::invalid_argument("group_users: need more users than groups");
  const Eigen::MatrixXd corr = channel::correlation_matrix(channels);

  // Distinct initial representatives via a partial Fisher-Yates shuffle.
  std::vector<int> ids(k);
  for (int i = 0; i < k; ++i) ids[i] = i;
  for (int i = 0; i < m; ++i) {
    const auto j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k - i)));
    std::swap(ids[i], ids[j]);
  }
  std::vector<int> reps(ids.begin(), ids.begin() + m);

  return kmeans_grouping(corr, std::move(reps));
}

inline void write_grouping_csv(std::ostream& os, const Grouping& grouping) {
  os << "user_id,group_id,is_representative\n";
  // Rows ordered by user id for stable output.
  std::vector<std::pair<int, int>> by_user;  // (user, group)
  for (int g = 0; g < static_cast<int>(grouping.groups.size()); ++g)
    for (int u : grouping.groups[g]) by_user.emplace_back(u, g);
  std::sort(by_user.begin(), by_user.end());
  for (const auto& [u, g] : by_user) {
    const bool rep = grouping.representatives[g] == u;
    os << u << ',' << g << ',' << (rep ? 1 : 0) << '\n';
  }
}

}  // namespace mmnoma::grouping
