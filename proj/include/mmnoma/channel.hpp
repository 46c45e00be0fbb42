#pragma once
// Multipath channel generation for a uniform linear array.
//
// Each user's response is a sum of L plane-wave paths,
//   h = sum_l gain_l * a(theta_l),
// where a(theta) is the array steering vector and theta is the cosine of the
// angle of departure. Path gains are circularly symmetric gaussians whose
// mean total power follows a distance power law anchored at 0 dB (gain 1.0,
// in noise-referenced units) at ref_dist_m.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "mmnoma/config.hpp"
#include "mmnoma/csv.hpp"
#include "mmnoma/rng.hpp"

namespace mmnoma::channel {

struct ChannelSet {
  std::vector<Eigen::VectorXcd> h;                            // K vectors, length N
  std::vector<std::vector<std::complex<double>>> path_gains;  // K x L
  std::vector<std::vector<double>> path_aod_cos;              // K x L, in (-1, 1]
  std::vector<double> distances_m;                            // K (empty when loaded)
};

// Entry i is exp(j * 2*pi * i * spacing_ratio * theta), i = 0..N-1.
inline Eigen::VectorXcd steering_vector(int n_antennas, double theta,
                                        double spacing_ratio = 0.5) {
  Eigen::VectorXcd a(n_antennas);
  const double step = 2.0 * M_PI * spacing_ratio * theta;
  for (int i = 0; i < n_antennas; ++i)
    a(i) = std::polar(1.0, step * static_cast<double>(i));
  return a;
}

// |h_i^H h_j| / (||h_i|| * ||h_j||), in [0, 1]. The magnitude is taken so
// that the value is comparable; the raw inner product is complex.
inline double correlation(const Eigen::VectorXcd& h_i, const Eigen::VectorXcd& h_j) {
  const double ni = h_i.norm();
  const double nj = h_j.norm();
  if (ni == 0.0 || nj == 0.0)
    throw std::invalid_argument("correlation: zero-norm channel vector");
  return std::abs(h_i.dot(h_j)) / (ni * nj);
}

inline Eigen::MatrixXd correlation_matrix(const ChannelSet& channels) {
  const int k = static_cast<int>(channels.h.size());
  Eigen::MatrixXd corr(k, k);
  for (int i = 0; i < k; ++i) {
    corr(i, i) = 1.0;
    for (int j = i + 1; j < k; ++j) {
      corr(i, j) = correlation(channels.h[i], channels.h[j]);
      corr(j, i) = corr(i, j);
    }
  }
  return corr;
}

// Draw order per user is fixed (distance, then L angle cosines, then L
// complex gains) so that a given stream always yields the same channels.
//
// Per-path mean powers: in LOS mode path 1 carries the line-of-sight power
// and paths 2..L are nlos_backoff_db weaker; in NLOS mode the stated per-path
// power is the same constant for every path. Either profile is normalized so
// the mean aggregate path power equals the distance law, which pins the
// absolute scale that a constant per-path power alone would leave ambiguous.
// The steering vectors have unit-modulus entries, so the response norm grows
// with the array on top of that budget.
inline ChannelSet generate_channels(const SystemConfig& config, RngStream& rng) {
  const int n = config.n_antennas;
  const int k = config.n_users;
  const int l = config.n_paths;

  std::vector<double> weights(l, 1.0);
  if (config.los && l > 1) {
    const double backoff = db_to_linear(-config.nlos_backoff_db);
    for (int p = 1; p < l; ++p) weights[p] = backoff;
  }
  double weight_sum = 0.0;
  for (double w : weights) weight_sum += w;

  ChannelSet out;
  out.h.resize(k);
  out.path_gains.assign(k, std::vector<std::complex<double>>(l));
  out.path_aod_cos.assign(k, std::vector<double>(l));
  out.distances_m.resize(k);

  for (int u = 0; u < k; ++u) {
    const double dist = rng.uniform_in(config.cell_min_m, config.cell_max_m);
    out.distances_m[u] = dist;
    // Mean aggregate path power, 1.0 at the reference distance.
    const double mean_power =
        std::pow(config.ref_dist_m / dist, config.path_loss_exp);

    for (int p = 0; p < l; ++p)
      out.path_aod_cos[u][p] = rng.uniform_open_closed(-1.0, 1.0);

    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(n);
    for (int p = 0; p < l; ++p) {
      const double var = mean_power * weights[p] / weight_sum;
      const std::complex<double> gain = std::sqrt(var) * rng.complex_gaussian();
      out.path_gains[u][p] = gain;
      h += gain * steering_vector(n, out.path_aod_cos[u][p],
                                  config.antenna_spacing_ratio);
    }
    out.h[u] = h;
  }
  return out;
}

// One row per (user, path); responses are rebuilt from the paths on load, so
// a dump/load round trip reproduces h exactly.
inline void write_channels_csv(std::ostream& os, const ChannelSet& channels) {
  os << "user,path,gain_re,gain_im,aod_cos\n";
  for (std::size_t u = 0; u < channels.path_gains.size(); ++u)
    for (std::size_t p = 0; p < channels.path_gains[u].size(); ++p)
      os << u << ',' << p << ',' << csv::fmt(channels.path_gains[u][p].real())
         << ',' << csv::fmt(channels.path_gains[u][p].imag()) << ','
         << csv::fmt(channels.path_aod_cos[u][p]) << '\n';
}

inline ChannelSet read_channels_csv(std::istream& is, int n_antennas,
                                    double spacing_ratio = 0.5) {
  ChannelSet out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (row == 1 || line.empty()) continue;  // header
    const auto cells = csv::split(line);
    if (cells.size() != 5)
      throw std::runtime_error("csv: row " + std::to_string(row) +
                               ": expected 5 fields");
    const auto user = static_cast<std::size_t>(csv::parse_int(cells[0], row));
    if (user >= out.path_gains.size()) {
      out.path_gains.resize(user + 1);
      out.path_aod_cos.resize(user + 1);
    }
    out.path_gains[user].emplace_back(csv::parse_double(cells[2], row),
                                      csv::parse_double(cells[3], row));
    out.path_aod_cos[user].push_back(csv::parse_double(cells[4], row));
  }
  out.h.resize(out.path_gains.size());
  for (std::size_t u = 0; u < out.path_gains.size(); ++u) {
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(n_antennas);
    for (std::size_t p = 0; p < out.path_gains[u].size(); ++p)
      h += out.path_gains[u][p] *
           steering_vector(n_antennas, out.path_aod_cos[u][p], spacing_ratio);
    out.h[u] = h;
  }
  return out;
}

}  // namespace mmnoma::channel
