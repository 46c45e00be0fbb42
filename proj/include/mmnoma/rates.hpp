#pragma once
// Per-user SINR and rate bookkeeping plus the energy-efficiency figure.

#include <cmath>
#include <vector>

#include "mmnoma/config.hpp"
#include "mmnoma/power.hpp"

namespace mmnoma::rates {

enum class Architecture { kHybrid, kFullyDigital };

struct RateReport {
  std::vector<std::vector<double>> sinr;  // decoding order, as EffectiveGains
  std::vector<std::vector<double>> rate;  // bits/s/Hz
  double asr_bps_hz = 0.0;                // 0 when infeasible
  double ee_bps_hz_per_w = 0.0;
  double total_consumed_power_w = 0.0;
  bool feasible = true;
};

// Transmit power plus circuit power. A hybrid front end runs one RF chain per
// beam and a phase shifter per antenna-beam pair; a fully digital one runs an
// RF chain per antenna and no shifters.
inline double consumed_power(const SystemConfig& config, Architecture arch) {
  const double n = config.n_antennas;
  const double m = config.n_rf_chains;
  const double chains = arch == Architecture::kHybrid ? m : n;
  const double shifters = arch == Architecture::kHybrid ? m * n : 0.0;
  return config.total_power + chains * config.rf_chain_power_w +
         shifters * config.phase_shifter_power_w;
}

inline double energy_efficiency(double asr_bps_hz, const SystemConfig& config,
                                Architecture arch) {
  return asr_bps_hz / consumed_power(config, arch);
}

inline RateReport rate_report(const power::EffectiveGains& gains,
                              const power::PowerAllocation& alloc,
                              const SystemConfig& config,
                              Architecture arch = Architecture::kHybrid) {
  RateReport report;
  report.feasible = alloc.feasible;
  report.total_consumed_power_w = consumed_power(config, arch);
  const int m_count = static_cast<int>(gains.gains.size());
  report.sinr.resize(m_count);
  report.rate.resize(m_count);
  double sum = 0.0;
  for (int m = 0; m < m_count; ++m) {
    const int s = static_cast<int>(gains.gains[m].rows());
    report.sinr[m].assign(s, 0.0);
    report.rate[m].assign(s, 0.0);
    if (!alloc.feasible) continue;
    for (int n = 0; n < s; ++n) {
      const double sinr = power::detail::sinr_of(
          gains, alloc.user_power, alloc.group_power, m, n,
          config.noise_power);
      report.sinr[m][n] = sinr;
      report.rate[m][n] = std::log2(1.0 + sinr);
      sum += report.rate[m][n];
    }
  }
  report.asr_bps_hz = alloc.feasible ? sum : 0.0;
  report.ee_bps_hz_per_w =
      energy_efficiency(report.asr_bps_hz, config, arch);
  return report;
}

}  // namespace mmnoma::rates
