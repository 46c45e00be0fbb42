#pragma once
// Hybrid beamformer assembly: an analog phase-shifter matrix A whose entries
// all have modulus 1/sqrt(N), cascaded with a digital matrix D chosen so the
// combined W = A*D nulls inter-group interference at each group's strongest
// user and has unit-norm columns.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mmnoma/channel.hpp"
#include "mmnoma/grouping.hpp"

namespace mmnoma::beam {

struct HybridBeamformer {
  Eigen::MatrixXcd A;  // N x M analog stage, constant-modulus entries
  Eigen::MatrixXcd D;  // M x M digital stage
  Eigen::MatrixXcd W;  // A * D, one unit-norm column per group
  // Largest |anchor_m^H w_i| / ||anchor_m|| over i != m, where anchor_m is
  // the channel the digital stage zero-forces for group m.
  double zf_residual = 0.0;
  // Set when some column of A*D has zero norm and cannot be normalized.
  bool degenerate = false;
};

namespace detail {

inline Eigen::MatrixXcd pseudo_inverse(const Eigen::MatrixXcd& m) {
  return Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd>(m)
      .pseudoInverse();
}

}  // namespace detail

// Index of the user with the largest channel norm in each group. This is the
// gain of the raw response, not the gain after beamforming, and ties break
// toward the lowest user id.
inline std::vector<int> zf_anchor_users(const channel::ChannelSet& channels,
                                        const grouping::Grouping& grouping) {
  std::vector<int> anchors;
  anchors.reserve(grouping.groups.size());
  for (const auto& group : grouping.groups) {
    if (group.empty())
      throw std::invalid_argument("zf_anchor_users: empty group");
    int best = group[0];
    double best_norm = channels.h[group[0]].norm();
    for (std::size_t i = 1; i < group.size(); ++i) {
      const double n = channels.h[group[i]].norm();
      if (n > best_norm) {
        best_norm = n;
        best = group[i];
      }
    }
    anchors.push_back(best);
  }
  return anchors;
}

// Digital stage for a fixed analog matrix: stack the anchor channels into
// H_t (N x M), take D = (H_t^H A)^+, and scale each column so ||A d_m|| = 1.
inline HybridBeamformer azf_digital(const Eigen::MatrixXcd& A,
                                    const channel::ChannelSet& channels,
                                    const grouping::Grouping& grouping) {
  const int m = static_cast<int>(grouping.groups.size());
  const auto anchors = zf_anchor_users(channels, grouping);

  Eigen::MatrixXcd h_t(A.rows(), m);
  for (int g = 0; g < m; ++g) h_t.col(g) = channels.h[anchors[g]];

  HybridBeamformer bf;
  bf.A = A;
  const Eigen::MatrixXcd d_raw = detail::pseudo_inverse(h_t.adjoint() * A);
  bf.D.resize(m, m);
  for (int g = 0; g < m; ++g) {
    const Eigen::VectorXcd col = A * d_raw.col(g);
    const double norm = col.norm();
    if (norm == 0.0) {
      bf.degenerate = true;
      bf.D.col(g) = d_raw.col(g);
      continue;
    }
    bf.D.col(g) = d_raw.col(g) / norm;
  }
  bf.W = A * bf.D;

  const Eigen::MatrixXcd cross = h_t.adjoint() * bf.W;  // M x M
  for (int g = 0; g < m; ++g) {
    const double anchor_norm = h_t.col(g).norm();
    for (int i = 0; i < m; ++i) {
      if (i == g || anchor_norm == 0.0) continue;
      bf.zf_residual = std::max(bf.zf_residual, std::abs(cross(g, i)) / anchor_norm);
    }
  }
  return bf;
}

// Largest deviation of |A_ij| * sqrt(N) from 1 over all entries.
inline double constant_modulus_deviation(const Eigen::MatrixXcd& A) {
  const double scale = std::sqrt(static_cast<double>(A.rows()));
  double worst = 0.0;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      worst = std::max(worst, std::abs(std::abs(A(i, j)) * scale - 1.0));
  return worst;
}

}  // namespace mmnoma::beam
