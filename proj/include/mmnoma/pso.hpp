#pragma once
// Analog beamformer search: a particle swarm over complex matrices with a
// shrinking inner boundary.
//
// Each particle is an N x M matrix of analog weights. Positions start on the
// circle of radius 1/sqrt(N) and may then move within an annulus whose inner
// radius grows linearly from 0 back to 1/sqrt(N) over the run, so the swarm
// searches magnitude-relaxed beamformers early and is constant-modulus again
// by the last iteration. Personal bests are dragged outward along with the
// boundary, which keeps the returned matrix inside the final annulus. The
// fitness of a candidate is the achievable sum rate after the zero-forcing
// digital stage and the two-level power allocation; candidates that cannot
// meet the rate floors score negative infinity.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

#include "mmnoma/beamformer.hpp"
#include "mmnoma/channel.hpp"
#include "mmnoma/config.hpp"
#include "mmnoma/csv.hpp"
#include "mmnoma/grouping.hpp"
#include "mmnoma/power.hpp"
#include "mmnoma/rates.hpp"
#include "mmnoma/rng.hpp"

namespace mmnoma::pso {

inline constexpr double kInfeasibleFitness =
    -std::numeric_limits<double>::infinity();

// Every infeasible candidate scores at or below this bound: the negated
// allocator badness grades how far the floors overshoot what the candidate
// delivers, so a swarm with no feasible particle yet still has a slope to
// follow. Feasible candidates score their (non-negative) sum rate.
inline constexpr double kInfeasibleCeiling = -power::kNearMissBadness;

struct Evaluation {
  beam::HybridBeamformer bf;
  power::EffectiveGains gains;
  power::PowerAllocation alloc;
  rates::RateReport report;
};

// Runs one analog candidate through the full receive chain. zero_inter_group
// deletes the cross-beam gains before allocation, modeling groups served on
// orthogonal resources; it bounds what interference coordination could add.
inline Evaluation evaluate_candidate(const Eigen::MatrixXcd& a,
                                     const channel::ChannelSet& channels,
                                     const grouping::Grouping& grouping,
                                     const SystemConfig& config,
                                     bool zero_inter_group = false) {
  Evaluation ev;
  ev.bf = beam::azf_digital(a, channels, grouping);
  ev.gains = power::effective_gains(channels, grouping, ev.bf.W);
  const int m_count = static_cast<int>(ev.gains.gains.size());
  if (zero_inter_group)
    for (int m = 0; m < m_count; ++m)
      for (int i = 0; i < m_count; ++i)
        if (i != m) ev.gains.gains[m].col(i).setZero();

  const auto eta =
      power::eta_from_floors(power::reorder_floors(ev.gains, config.rate_floors));
  if (ev.bf.degenerate) {
    // A zero beam cannot carry a group; skip the allocator rather than
    // divide by zero gains.
    ev.alloc.feasible = false;
    ev.alloc.eta = eta;
    ev.alloc.group_power.assign(m_count, 0.0);
    ev.alloc.user_power.resize(m_count);
    for (int m = 0; m < m_count; ++m)
      ev.alloc.user_power[m].assign(ev.gains.gains[m].rows(), 0.0);
  } else {
    ev.alloc = power::inter_gpa(ev.gains, eta, config.total_power,
                                config.noise_power, config.f_max,
                                config.coeff_gain_user_column);
  }
  ev.report =
      rates::rate_report(ev.gains, ev.alloc, config, rates::Architecture::kHybrid);
  return ev;
}

inline double fitness(const Evaluation& ev) {
  if (ev.bf.degenerate) return kInfeasibleFitness;
  if (!ev.alloc.feasible) return -ev.alloc.infeasibility;
  return ev.report.asr_bps_hz;
}

struct IterationTrace {
  int iteration = 0;
  double g_best_fitness = kInfeasibleFitness;
  // Mean over this iteration's feasible evaluations; -inf when there were none.
  double mean_fitness = kInfeasibleFitness;
  double d_in = 0.0;
};

// Swarm state between iterations. Each particle carries its own RNG stream,
// keyed by (seed, particle id), so any evaluation schedule yields the same
// numbers.
struct Swarm {
  std::vector<Eigen::MatrixXcd> pos;
  std::vector<Eigen::MatrixXcd> vel;
  std::vector<Eigen::MatrixXcd> best_pos;
  std::vector<double> best_fit;
  std::vector<RngStream> rng;
  int g_best = 0;
  double d_out = 0.0;
};

// Positions start on the outer circle with uniform phases, velocities at
// zero. Personal bests are the starting positions, still unevaluated: the
// caller scores them before the first step.
inline Swarm init_swarm(int n_antennas, int n_beams, int n_particles,
                        std::uint64_t seed) {
  Swarm swarm;
  swarm.d_out = 1.0 / std::sqrt(static_cast<double>(n_antennas));
  swarm.pos.resize(n_particles);
  swarm.vel.resize(n_particles);
  swarm.best_pos.resize(n_particles);
  swarm.best_fit.assign(n_particles, kInfeasibleFitness);

  RngStream init_rng(seed, kSwarmInitStream);
  for (int p = 0; p < n_particles; ++p) {
    swarm.pos[p].resize(n_antennas, n_beams);
    for (int i = 0; i < n_antennas; ++i)
      for (int j = 0; j < n_beams; ++j)
        swarm.pos[p](i, j) =
            std::polar(swarm.d_out, 2.0 * M_PI * init_rng.uniform());
    swarm.vel[p] = Eigen::MatrixXcd::Zero(n_antennas, n_beams);
    swarm.best_pos[p] = swarm.pos[p];
  }

  swarm.rng.reserve(n_particles);
  for (int p = 0; p < n_particles; ++p)
    swarm.rng.emplace_back(seed,
                           kParticleStreamBase + static_cast<std::uint64_t>(p));
  return swarm;
}

struct StepStats {
  double feasible_sum = 0.0;
  int feasible_count = 0;
};

// One swarm iteration, 1 <= t <= t_max: velocity and position updates against
// the personal bests and a start-of-iteration snapshot of the global best,
// radial clamping into the annulus [d_in, d_out] with d_in = (t/t_max)*d_out
// (a zero entry needing an outward push gets phase 0), personal bests dragged
// out to the boundary, then one fitness evaluation per particle and the
// global-best refresh. fitness_of maps an analog matrix to a score; larger is
// better and anything at or below kInfeasibleCeiling is an infeasible
// candidate.
template <class FitnessFn>
StepStats pso_step(Swarm& swarm, int t, int t_max, const PsoConfig& pso,
                   FitnessFn&& fitness_of) {
  const int n_particles = static_cast<int>(swarm.pos.size());
  const double d_out = swarm.d_out;
  const double frac = static_cast<double>(t) / t_max;
  const double d_in = frac * d_out;
  const double omega = pso.omega_max - frac * (pso.omega_max - pso.omega_min);
  // All particles this iteration chase the best known position as of now;
  // later improvements within the iteration wait until the next one.
  const Eigen::MatrixXcd g_snapshot = swarm.best_pos[swarm.g_best];

  StepStats stats;
  for (int p = 0; p < n_particles; ++p) {
    auto& rng = swarm.rng[p];
    auto& pos = swarm.pos[p];
    auto& vel = swarm.vel[p];
    auto& best = swarm.best_pos[p];
    for (int i = 0; i < pos.rows(); ++i)
      for (int j = 0; j < pos.cols(); ++j) {
        const std::complex<double> to_best = best(i, j) - pos(i, j);
        const std::complex<double> to_global = g_snapshot(i, j) - pos(i, j);
        std::complex<double> pull;
        if (pso.componentwise_rand) {
          const double c_re = pso.c1 * rng.uniform() * to_best.real();
          const double c_im = pso.c1 * rng.uniform() * to_best.imag();
          const double s_re = pso.c2 * rng.uniform() * to_global.real();
          const double s_im = pso.c2 * rng.uniform() * to_global.imag();
          pull = {c_re + s_re, c_im + s_im};
        } else {
          pull = pso.c1 * rng.uniform() * to_best +
                 pso.c2 * rng.uniform() * to_global;
        }
        vel(i, j) = omega * vel(i, j) + pull;
        pos(i, j) += vel(i, j);

        const double rho = std::abs(pos(i, j));
        if (rho > d_out) {
          pos(i, j) *= d_out / rho;
        } else if (rho < d_in) {
          pos(i, j) = rho == 0.0 ? std::complex<double>(d_in, 0.0)
                                 : pos(i, j) * (d_in / rho);
        }
        // Drag the personal best outward with the boundary so stale bests
        // cannot park inside the shrunken annulus.
        const double best_rho = std::abs(best(i, j));
        if (best_rho < d_in)
          best(i, j) = best_rho == 0.0 ? std::complex<double>(d_in, 0.0)
                                       : best(i, j) * (d_in / best_rho);
      }

    const double f = fitness_of(pos);
    if (f > swarm.best_fit[p]) {
      swarm.best_fit[p] = f;
      best = pos;
    }
    if (f > kInfeasibleCeiling) {
      stats.feasible_sum += f;
      ++stats.feasible_count;
    }
  }

  swarm.g_best = 0;
  for (int p = 1; p < n_particles; ++p)
    if (swarm.best_fit[p] > swarm.best_fit[swarm.g_best]) swarm.g_best = p;
  return stats;
}

struct OptimizeResult {
  beam::HybridBeamformer bf;
  power::EffectiveGains gains;
  power::PowerAllocation alloc;
  rates::RateReport report;
  std::vector<IterationTrace> trace;  // rows 0 (initial swarm) .. n_iterations
  bool feasible = false;
  // Worst digital-stage leakage across every candidate evaluated in the run.
  double max_zf_residual = 0.0;
};

inline OptimizeResult optimize(const channel::ChannelSet& channels,
                               const grouping::Grouping& grouping,
                               const SystemConfig& config, std::uint64_t seed,
                               bool zero_inter_group = false) {
  const int n = config.n_antennas;
  const int m = static_cast<int>(grouping.groups.size());
  const PsoConfig& pso = config.pso;
  const int n_particles = pso.n_particles;
  const int t_max = pso.n_iterations;

  OptimizeResult result;
  result.trace.reserve(t_max + 1);

  Swarm swarm = init_swarm(n, m, n_particles, seed);

  const auto evaluate = [&](const Eigen::MatrixXcd& a) {
    Evaluation ev = evaluate_candidate(a, channels, grouping, config,
                                       zero_inter_group);
    result.max_zf_residual = std::max(result.max_zf_residual, ev.bf.zf_residual);
    return ev;
  };
  const auto push_trace = [&](int t, double d_in, const StepStats& stats) {
    result.trace.push_back({t, swarm.best_fit[swarm.g_best],
                            stats.feasible_count > 0
                                ? stats.feasible_sum / stats.feasible_count
                                : kInfeasibleFitness,
                            d_in});
  };

  {
    StepStats stats;
    for (int p = 0; p < n_particles; ++p) {
      swarm.best_fit[p] = fitness(evaluate(swarm.pos[p]));
      if (swarm.best_fit[p] > kInfeasibleCeiling) {
        stats.feasible_sum += swarm.best_fit[p];
        ++stats.feasible_count;
      }
    }
    swarm.g_best = 0;
    for (int p = 1; p < n_particles; ++p)
      if (swarm.best_fit[p] > swarm.best_fit[swarm.g_best]) swarm.g_best = p;
    push_trace(0, 0.0, stats);
  }

  for (int t = 1; t <= t_max; ++t) {
    const StepStats stats = pso_step(
        swarm, t, t_max, pso,
        [&](const Eigen::MatrixXcd& a) { return fitness(evaluate(a)); });
    push_trace(t, static_cast<double>(t) / t_max * swarm.d_out, stats);
  }

  // Re-run the winner through the full chain so the reported rates belong to
  // the exact matrix returned (its entries may have been dragged since the
  // cached fitness was computed).
  Evaluation final_ev = evaluate(swarm.best_pos[swarm.g_best]);
  result.bf = std::move(final_ev.bf);
  result.gains = std::move(final_ev.gains);
  result.alloc = std::move(final_ev.alloc);
  result.report = std::move(final_ev.report);
  result.feasible = result.alloc.feasible && !result.bf.degenerate;
  return result;
}

inline void write_trace_csv(std::ostream& os,
                            const std::vector<IterationTrace>& trace) {
  os << "iteration,g_best_fitness,mean_fitness,d_in\n";
  for (const auto& row : trace)
    os << row.iteration << ',' << csv::fmt(row.g_best_fitness) << ','
       << csv::fmt(row.mean_fitness) << ',' << csv::fmt(row.d_in) << '\n';
}

}  // namespace mmnoma::pso
