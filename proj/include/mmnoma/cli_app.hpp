#pragma once
// Command-line front end. Kept in a header so the test suite can drive the
// exact production argument handling in-process.
//
// Subcommands:
//   run        one scenario, per-scheme table, optional CSV dumps
//   sweep      vary one parameter over seeded channel realizations
//   summarize  aggregate a sweep table into per-point means and gaps
//
// Scenario fields are top-level flags (also INI keys via --config); swarm
// fields live under the pso. prefix. In a config file the dotted names must
// be quoted, e.g. 'pso.n_particles'=40, matching the format the parser
// itself writes. The tool defaults to a smaller swarm and fewer realizations
// than the library so a full sweep stays interactive; pass larger values to
// reproduce the slow, publication-size runs.

#include <chrono>
#include <exception>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmnoma/mmnoma.hpp"

namespace mmnoma::cli {

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

inline std::vector<baselines::Scheme> parse_schemes(
    const std::vector<std::string>& names) {
  std::vector<baselines::Scheme> schemes;
  schemes.reserve(names.size());
  for (const auto& name : names)
    schemes.push_back(baselines::scheme_from_name(name));
  return schemes;
}

inline void print_run_table(std::ostream& os, const SystemConfig& config,
                            const grouping::Grouping& grouping,
                            const std::vector<experiment::RowRecord>& rows) {
  os << "scenario: n_antennas=" << config.n_antennas
     << " n_rf_chains=" << config.n_rf_chains << " n_users=" << config.n_users
     << " total_power=" << config.total_power
     << " noise_power=" << config.noise_power << " seed=" << config.seed
     << "\n";
  for (std::size_t m = 0; m < grouping.groups.size(); ++m) {
    os << "group " << m << ": users";
    for (int u : grouping.groups[m]) os << ' ' << u;
    os << " (representative " << grouping.representatives[m] << ")\n";
  }
  os << std::left << std::setw(12) << "scheme" << std::right << std::setw(14)
     << "asr_bps_hz" << std::setw(18) << "ee_bps_hz_per_w" << std::setw(10)
     << "feasible" << "\n";
  for (const auto& row : rows) {
    std::ostringstream asr, ee;
    asr << std::fixed << std::setprecision(4) << row.asr_bps_hz;
    ee << std::fixed << std::setprecision(4) << row.ee_bps_hz_per_w;
    os << std::left << std::setw(12) << row.scheme << std::right
       << std::setw(14) << asr.str() << std::setw(18) << ee.str()
       << std::setw(10) << (row.feasible > 0.0 ? 1 : 0) << "\n";
  }
}

}  // namespace detail

// Returns the process exit code. Output and error text go to the supplied
// streams; CLI11's own help/version text goes where CLI11 sends it.
inline int run_cli(int argc, const char* const* argv,
                   std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Downlink mmWave NOMA simulator: user grouping, hybrid "
               "beamforming, two-level power allocation"};
  app.fallthrough();

  SystemConfig config;
  config.pso.n_particles = 100;  // tool-level defaults favor fast turnaround
  config.pso.n_iterations = 60;

  app.set_config("--config", "", "INI file with the flags below as keys");
  app.add_option("--seed", config.seed, "Master seed")->capture_default_str();
  app.add_option("--n_antennas", config.n_antennas)->capture_default_str();
  app.add_option("--n_rf_chains", config.n_rf_chains)->capture_default_str();
  app.add_option("--n_users", config.n_users)->capture_default_str();
  app.add_option("--total_power", config.total_power)->capture_default_str();
  app.add_option("--noise_power", config.noise_power)->capture_default_str();
  auto* floors_opt =
      app.add_option("--rate_floors", config.rate_floors,
                     "Per-user floors in bits/s/Hz; one value broadcasts")
          ->delimiter(',');
  app.add_option("--n_paths", config.n_paths)->capture_default_str();
  app.add_flag("--los", config.los, "Make path 0 dominant");
  app.add_option("--nlos_backoff_db", config.nlos_backoff_db)
      ->capture_default_str();
  app.add_option("--cell_min_m", config.cell_min_m)->capture_default_str();
  app.add_option("--cell_max_m", config.cell_max_m)->capture_default_str();
  app.add_option("--ref_dist_m", config.ref_dist_m)->capture_default_str();
  app.add_option("--path_loss_exp", config.path_loss_exp)
      ->capture_default_str();
  app.add_option("--f_max", config.f_max, "Interference refreshes")
      ->capture_default_str();
  app.add_option("--rf_chain_power_w", config.rf_chain_power_w)
      ->capture_default_str();
  app.add_option("--phase_shifter_power_w", config.phase_shifter_power_w)
      ->capture_default_str();
  app.add_option("--pso.n_particles", config.pso.n_particles)
      ->capture_default_str();
  app.add_option("--pso.n_iterations", config.pso.n_iterations)
      ->capture_default_str();
  app.add_option("--pso.c1", config.pso.c1)->capture_default_str();
  app.add_option("--pso.c2", config.pso.c2)->capture_default_str();
  app.add_option("--pso.omega_max", config.pso.omega_max)
      ->capture_default_str();
  app.add_option("--pso.omega_min", config.pso.omega_min)
      ->capture_default_str();
  app.add_flag("--pso.componentwise_rand", config.pso.componentwise_rand);
  app.add_flag("--coeff_gain_user_column", config.coeff_gain_user_column);

  std::vector<std::string> scheme_names = {"proposed", "tdma_zf", "fdma"};
  bool timing = false;

  auto* run_cmd = app.add_subcommand("run", "Run one scenario");
  std::string run_out, dump_channels, dump_grouping, dump_allocation,
      dump_trace;
  run_cmd->add_option("--schemes", scheme_names, "Comma-separated scheme list")
      ->delimiter(',');
  run_cmd->add_option("--out", run_out, "Write the result rows as CSV");
  run_cmd->add_option("--dump-channels", dump_channels);
  run_cmd->add_option("--dump-grouping", dump_grouping);
  run_cmd->add_option("--dump-allocation", dump_allocation,
                      "Per-user powers and rates of the grouped design");
  run_cmd->add_option("--trace", dump_trace,
                      "Swarm search progress of the grouped design");
  run_cmd->add_flag("--timing", timing, "Record wall-clock per scheme");

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter");
  std::string var_name = "rate_floor";
  std::vector<double> values;
  int realizations = 20;
  std::string sweep_out;
  sweep_cmd->add_option("--var", var_name, "rate_floor | snr_db | n_rf_chains")
      ->capture_default_str();
  sweep_cmd->add_option("--values", values, "Comma-separated, ascending")
      ->delimiter(',')
      ->required();
  sweep_cmd->add_option("--realizations", realizations)->capture_default_str();
  sweep_cmd->add_option("--schemes", scheme_names, "Comma-separated scheme list")
      ->delimiter(',');
  sweep_cmd->add_option("--out", sweep_out, "CSV path (default: stdout)");
  sweep_cmd->add_flag("--timing", timing, "Record wall-clock per scheme");

  auto* summarize_cmd =
      app.add_subcommand("summarize", "Aggregate a sweep CSV");
  std::string in_path, summary_out;
  summarize_cmd->add_option("--in", in_path, "Sweep CSV to read")->required();
  summarize_cmd->add_option("--out", summary_out, "CSV path (default: stdout)");

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    // Floors track n_users unless explicitly set; a single value broadcasts.
    if (floors_opt->count() == 0)
      config.rate_floors.assign(config.n_users, 1.0);
    else if (config.rate_floors.size() == 1 && config.n_users > 1)
      config.rate_floors.assign(config.n_users, config.rate_floors[0]);

    if (summarize_cmd->parsed()) {
      std::ifstream is(in_path, std::ios::binary);
      if (!is) throw std::runtime_error("cannot open for reading: " + in_path);
      const auto rows = experiment::read_sweep_csv(is);
      const auto summary = experiment::summarize(rows);
      if (summary_out.empty()) {
        experiment::write_summary_csv(out, summary);
      } else {
        auto os = detail::open_out(summary_out);
        experiment::write_summary_csv(os, summary);
      }
      return 0;
    }

    config = validate(config);
    const auto schemes = detail::parse_schemes(scheme_names);

    if (sweep_cmd->parsed()) {
      experiment::SweepSpec spec;
      spec.var = experiment::sweep_var_from_name(var_name);
      spec.values = values;
      spec.n_realizations = realizations;
      spec.schemes = schemes;
      const auto rows = experiment::run_sweep(config, spec, timing);
      if (sweep_out.empty()) {
        experiment::write_sweep_csv(out, rows);
      } else {
        auto os = detail::open_out(sweep_out);
        experiment::write_sweep_csv(os, rows);
      }
      return 0;
    }

    // run: one realization seeded directly by --seed, so any row of a sweep
    // table can be replayed by passing its seed column here.
    const std::uint64_t seed = config.seed;
    RngStream channel_rng(seed, kChannelStream);
    const auto channels = channel::generate_channels(config, channel_rng);
    RngStream grouping_rng(seed, kGroupingStream);
    const auto grouping = grouping::group_users(channels, config, grouping_rng);

    if (!dump_channels.empty()) {
      auto os = detail::open_out(dump_channels);
      channel::write_channels_csv(os, channels);
    }
    if (!dump_grouping.empty()) {
      auto os = detail::open_out(dump_grouping);
      grouping::write_grouping_csv(os, grouping);
    }

    bool need_proposed = !dump_allocation.empty() || !dump_trace.empty();
    for (auto s : schemes)
      if (s == baselines::Scheme::kProposed || s == baselines::Scheme::kFdma)
        need_proposed = true;

    pso::OptimizeResult proposed;
    bool proposed_ok = false;
    double proposed_ms = 0.0;
    if (need_proposed) {
      const auto start = std::chrono::steady_clock::now();
      try {
        proposed = pso::optimize(channels, grouping, config, seed);
        proposed_ok = true;
      } catch (const std::exception& e) {
        err << "warning: grouped-design optimization failed: " << e.what()
            << "\n";
      }
      proposed_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    }

    std::vector<experiment::RowRecord> rows;
    for (auto scheme : schemes) {
      experiment::RowRecord row;
      row.sweep_var = "none";
      row.seed = seed;
      row.scheme = baselines::scheme_name(scheme);
      const auto start = std::chrono::steady_clock::now();
      try {
        switch (scheme) {
          case baselines::Scheme::kProposed: {
            if (!proposed_ok) throw std::runtime_error("optimization failed");
            row.asr_bps_hz = proposed.report.asr_bps_hz;
            row.ee_bps_hz_per_w = proposed.report.ee_bps_hz_per_w;
            row.feasible = proposed.feasible ? 1.0 : 0.0;
            break;
          }
          case baselines::Scheme::kIdeal: {
            const auto r = pso::optimize(channels, grouping, config, seed, true);
            row.asr_bps_hz = r.report.asr_bps_hz;
            row.ee_bps_hz_per_w = r.report.ee_bps_hz_per_w;
            row.feasible = r.feasible ? 1.0 : 0.0;
            break;
          }
          case baselines::Scheme::kTdmaZf: {
            const auto r = baselines::tdma_zf(channels, grouping, config);
            row.asr_bps_hz = r.asr_bps_hz;
            row.ee_bps_hz_per_w = r.ee_bps_hz_per_w;
            row.feasible = 1.0;
            break;
          }
          case baselines::Scheme::kFdma: {
            if (!proposed_ok) throw std::runtime_error("optimization failed");
            const auto r =
                baselines::fdma(channels, grouping, config, proposed.bf.W);
            row.asr_bps_hz = r.asr_bps_hz;
            row.ee_bps_hz_per_w = r.ee_bps_hz_per_w;
            row.feasible = 1.0;
            break;
          }
          case baselines::Scheme::kDigitalZf: {
            const auto r = baselines::fully_digital_zf(channels, config);
            row.asr_bps_hz = r.asr_bps_hz;
            row.ee_bps_hz_per_w = r.ee_bps_hz_per_w;
            row.feasible = 1.0;
            break;
          }
        }
      } catch (const std::exception&) {
        row.asr_bps_hz = 0.0;
        row.ee_bps_hz_per_w = 0.0;
        row.feasible = 0.0;
      }
      if (timing) {
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
        if (scheme == baselines::Scheme::kProposed) row.wall_ms += proposed_ms;
      }
      rows.push_back(std::move(row));
    }

    if (proposed_ok) {
      if (!dump_allocation.empty()) {
        auto os = detail::open_out(dump_allocation);
        power::write_allocation_csv(os, proposed.gains, proposed.alloc,
                                    config.noise_power);
      }
      if (!dump_trace.empty()) {
        auto os = detail::open_out(dump_trace);
        pso::write_trace_csv(os, proposed.trace);
      }
    } else if (!dump_allocation.empty() || !dump_trace.empty()) {
      err << "warning: skipping dumps that need the grouped design\n";
    }

    detail::print_run_table(out, config, grouping, rows);
    if (!run_out.empty()) {
      auto os = detail::open_out(run_out);
      experiment::write_sweep_csv(os, rows);
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mmnoma::cli
