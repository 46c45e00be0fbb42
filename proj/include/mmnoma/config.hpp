#pragma once
// Scenario configuration and validation.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmnoma {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// Hyper-parameters of the swarm search for the analog beamformer.
struct PsoConfig {
  int n_particles = 800;
  int n_iterations = 200;
  double c1 = 1.4;  // cognitive ratio
  double c2 = 1.4;  // social ratio
  double omega_max = 0.9;
  double omega_min = 0.4;
  // Draw separate uniform scalars for the real and imaginary velocity
  // components instead of one scalar per complex entry. Comparison knob;
  // the default single-scalar update is the reference behavior.
  bool componentwise_rand = false;
};

// Full scenario description. Field names double as configuration file keys
// and CLI flag names. A validated config is immutable by convention and safe
// to share across threads.
struct SystemConfig {
  int n_antennas = 64;  // N, transmit array size
  int n_rf_chains = 2;  // M, one analog beam and one user group per chain
  int n_users = 6;      // K, must exceed n_rf_chains

  double total_power = 1.0;    // P, watts
  double noise_power = 1e-3;   // sigma^2, watts; defaults give P/sigma^2 = 30 dB
  // Per-user minimum rates in bits/s/Hz, indexed by original user id.
  std::vector<double> rate_floors = std::vector<double>(6, 1.0);

  int n_paths = 4;  // L, multipath components per user
  bool los = false;
  double nlos_backoff_db = 15.0;  // LOS mode: non-LOS paths this much weaker

  double cell_min_m = 10.0;
  double cell_max_m = 100.0;
  double ref_dist_m = 30.0;  // distance whose mean aggregate path power is 1
  double path_loss_exp = 2.0;
  double antenna_spacing_ratio = 0.5;  // element spacing over wavelength

  PsoConfig pso;
  int f_max = 6;  // interference refreshes of the power allocator

  double rf_chain_power_w = 0.25;
  double phase_shifter_power_w = 0.001;

  std::uint64_t seed = 1;

  // Alternate reading of the closed-form SINR coefficients where the
  // denominator gain of user n is taken along beam column n instead of the
  // group's own beam. Comparison knob; see power.hpp.
  bool coeff_gain_user_column = false;
};

// Returns the config unchanged if every invariant holds, otherwise throws
// std::invalid_argument naming the first failing field.
inline SystemConfig validate(SystemConfig config) {
  const auto fail = [](const std::string& what) {
    throw std::invalid_argument("config: " + what);
  };
  if (config.n_antennas < 1) fail("n_antennas must be positive");
  if (config.n_rf_chains < 1) fail("n_rf_chains must be positive");
  if (config.n_users < 1) fail("n_users must be positive");
  if (config.n_users <= config.n_rf_chains)
    fail("n_users must exceed n_rf_chains, got n_users=" +
         std::to_string(config.n_users) + " n_rf_chains=" +
         std::to_string(config.n_rf_chains));
  if (config.n_antennas < config.n_rf_chains)
    fail("n_antennas must be at least n_rf_chains");
  if (!(config.total_power > 0.0)) fail("total_power must be positive");
  if (!(config.noise_power > 0.0)) fail("noise_power must be positive");
  if (static_cast<int>(config.rate_floors.size()) != config.n_users)
    fail("rate_floors must list one floor per user, got " +
         std::to_string(config.rate_floors.size()) + " for n_users=" +
         std::to_string(config.n_users));
  for (double r : config.rate_floors)
    if (!(r >= 0.0)) fail("rate_floors entries must be non-negative");
  if (config.n_paths < 1) fail("n_paths must be positive");
  if (!(config.nlos_backoff_db >= 0.0)) fail("nlos_backoff_db must be non-negative");
  if (!(config.cell_min_m > 0.0)) fail("cell_min_m must be positive");
  if (!(config.cell_max_m >= config.cell_min_m))
    fail("cell_max_m must be at least cell_min_m");
  if (!(config.ref_dist_m > 0.0)) fail("ref_dist_m must be positive");
  if (!(config.path_loss_exp >= 0.0)) fail("path_loss_exp must be non-negative");
  if (config.antenna_spacing_ratio != 0.5)
    fail("antenna_spacing_ratio is fixed at 0.5");
  if (config.pso.n_particles < 1) fail("pso.n_particles must be positive");
  if (config.pso.n_iterations < 1) fail("pso.n_iterations must be positive");
  if (!(config.pso.c1 >= 0.0)) fail("pso.c1 must be non-negative");
  if (!(config.pso.c2 >= 0.0)) fail("pso.c2 must be non-negative");
  if (!(config.pso.omega_min > 0.0)) fail("pso.omega_min must be positive");
  if (!(config.pso.omega_max >= config.pso.omega_min))
    fail("pso.omega_max must be at least pso.omega_min");
  if (config.f_max < 1) fail("f_max must be positive");
  if (!(config.rf_chain_power_w > 0.0)) fail("rf_chain_power_w must be positive");
  if (!(config.phase_shifter_power_w > 0.0))
    fail("phase_shifter_power_w must be positive");
  return config;
}

}  // namespace mmnoma
