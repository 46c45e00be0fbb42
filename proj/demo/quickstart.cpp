// Minimal end-to-end walk through the library: draw a channel set, group the
// users, search for an analog beamformer, and print what each user gets.
//
// Build with the project CMake and run:  ./demo/quickstart

#include <cstdio>

#include "mmnoma/mmnoma.hpp"

using namespace mmnoma;

int main() {
  SystemConfig config;           // 64 antennas, 2 RF chains, 6 users, 30 dB
  config.pso.n_particles = 60;   // small swarm, keeps the demo under a minute
  config.pso.n_iterations = 40;
  config.seed = 7;
  config = validate(config);

  RngStream channel_rng(config.seed, kChannelStream);
  const auto channels = channel::generate_channels(config, channel_rng);

  RngStream grouping_rng(config.seed, kGroupingStream);
  const auto groups = grouping::group_users(channels, config, grouping_rng);
  for (std::size_t m = 0; m < groups.groups.size(); ++m) {
    std::printf("group %zu:", m);
    for (int u : groups.groups[m]) std::printf(" user %d", u);
    std::printf("\n");
  }

  const auto result = pso::optimize(channels, groups, config, config.seed);
  if (!result.feasible) {
    std::printf("no beamformer met every rate floor\n");
    return 1;
  }

  std::printf("sum rate %.3f bits/s/Hz, energy efficiency %.3f bits/s/Hz/W\n",
              result.report.asr_bps_hz, result.report.ee_bps_hz_per_w);
  for (std::size_t m = 0; m < result.gains.user_order.size(); ++m)
    for (std::size_t n = 0; n < result.gains.user_order[m].size(); ++n)
      std::printf("user %d: %.4f W, %.3f bits/s/Hz\n",
                  result.gains.user_order[m][n], result.alloc.user_power[m][n],
                  result.report.rate[m][n]);

  // The same pipeline as one comparison row against the reference schemes.
  const auto tdma = baselines::tdma_zf(channels, groups, config);
  const auto fdma = baselines::fdma(channels, groups, config, result.bf.W);
  std::printf("tdma_zf %.3f, fdma %.3f bits/s/Hz\n", tdma.asr_bps_hz,
              fdma.asr_bps_hz);
  return 0;
}
