#pragma once
// Umbrella header for the whole library.

#include "mmnoma/baselines.hpp"
#include "mmnoma/beamformer.hpp"
#include "mmnoma/channel.hpp"
#include "mmnoma/config.hpp"
#include "mmnoma/csv.hpp"
#include "mmnoma/experiment.hpp"
#include "mmnoma/grouping.hpp"
#include "mmnoma/oracles.hpp"
#include "mmnoma/power.hpp"
#include "mmnoma/pso.hpp"
#include "mmnoma/rates.hpp"
#include "mmnoma/rng.hpp"
