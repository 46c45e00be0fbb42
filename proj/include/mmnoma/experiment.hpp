#pragma once
// Monte-Carlo driver: sweeps one scenario parameter, averages the schemes
// over deterministic channel realizations, and reads/writes the result table.
//
// Every realization r of a sweep uses derive_seed(base seed, r) regardless of
// the sweep value, so curves across values are paired over the same channel
// draws. Realizations may run on a thread pool (capped by the MMNOMA_THREADS
// environment variable); results are gathered in realization order, so the
// output is byte-identical however many workers ran.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "mmnoma/baselines.hpp"
#include "mmnoma/channel.hpp"
#include "mmnoma/config.hpp"
#include "mmnoma/csv.hpp"
#include "mmnoma/grouping.hpp"
#include "mmnoma/pso.hpp"
#include "mmnoma/rng.hpp"

namespace mmnoma::experiment {

enum class SweepVar { kRateFloor, kSnrDb, kNRfChains };

inline const char* sweep_var_name(SweepVar v) {
  switch (v) {
    case SweepVar::kRateFloor: return "rate_floor";
    case SweepVar::kSnrDb: return "snr_db";
    case SweepVar::kNRfChains: return "n_rf_chains";
  }
  return "?";
}

inline SweepVar sweep_var_from_name(const std::string& name) {
  for (SweepVar v : {SweepVar::kRateFloor, SweepVar::kSnrDb,
                     SweepVar::kNRfChains})
    if (name == sweep_var_name(v)) return v;
  throw std::invalid_argument("unknown sweep variable: " + name);
}

struct SweepSpec {
  SweepVar var = SweepVar::kRateFloor;
  std::vector<double> values;
  int n_realizations = 100;
  std::vector<baselines::Scheme> schemes;
};

inline void validate(const SweepSpec& spec) {
  if (spec.values.empty())
    throw std::invalid_argument("sweep: values must be non-empty");
  if (!std::is_sorted(spec.values.begin(), spec.values.end()))
    throw std::invalid_argument("sweep: values must be sorted ascending");
  if (spec.n_realizations < 1)
    throw std::invalid_argument("sweep: n_realizations must be positive");
  if (spec.schemes.empty())
    throw std::invalid_argument("sweep: schemes must be non-empty");
}

struct RowRecord {
  std::string sweep_var;
  double sweep_value = 0.0;
  long long realization = 0;  // -1 on rows holding per-point means
  std::uint64_t seed = 0;
  std::string scheme;
  double asr_bps_hz = 0.0;
  double ee_bps_hz_per_w = 0.0;
  double feasible = 0.0;  // 0/1 on raw rows, a fraction on mean rows
  double wall_ms = 0.0;   // stays 0 unless timing was requested
};

// Rewrites the swept field. The result is re-validated, so a value that
// breaks an invariant (say more RF chains than users) throws here.
inline SystemConfig apply_sweep_value(SystemConfig config, SweepVar var,
                                      double value) {
  switch (var) {
    case SweepVar::kRateFloor:
      config.rate_floors.assign(config.n_users, value);
      break;
    case SweepVar::kSnrDb:
      config.noise_power = config.total_power / db_to_linear(value);
      break;
    case SweepVar::kNRfChains:
      config.n_rf_chains = static_cast<int>(value);
      break;
  }
  return mmnoma::validate(config);
}

// One channel draw, all schemes. A scheme that throws (for example the fully
// digital baseline when users outnumber antennas) contributes a zero row
// instead of aborting. The grouped-NOMA optimization is shared between the
// schemes that need it and runs at most once.
inline std::vector<RowRecord> run_realization(
    const SystemConfig& config, std::uint64_t seed,
    const std::vector<baselines::Scheme>& schemes, bool timing = false) {
  std::vector<RowRecord> rows;
  rows.reserve(schemes.size());

  bool setup_ok = true;
  channel::ChannelSet channels;
  grouping::Grouping grouping;
  try {
    RngStream channel_rng(seed, kChannelStream);
    channels = channel::generate_channels(config, channel_rng);
    RngStream grouping_rng(seed, kGroupingStream);
    grouping = grouping::group_users(channels, config, grouping_rng);
  } catch (const std::exception&) {
    setup_ok = false;
  }

  bool have_proposed = false;
  pso::OptimizeResult proposed;
  const auto ensure_proposed = [&]() -> const pso::OptimizeResult& {
    if (!have_proposed) {
      proposed = pso::optimize(channels, grouping, config, seed);
      have_proposed = true;
    }
    return proposed;
  };

  for (auto scheme : schemes) {
    RowRecord row;
    row.seed = seed;
    row.scheme = baselines::scheme_name(scheme);
    const auto start = std::chrono::steady_clock::now();
    try {
      if (!setup_ok) throw std::runtime_error("scenario setup failed");
      switch (scheme) {
        case baselines::Scheme::kProposed: {
          const auto& r = ensure_proposed();
          row.asr_bps_hz = r.report.asr_bps_hz;
          row.ee_bps_hz_per_w = r.report.ee_bps_hz_per_w;
          row.feasible = r.feasible ? 1.0 : 0.0;
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
          const auto r =
              baselines::fdma(channels, grouping, config, ensure_proposed().bf.W);
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
    if (timing)
      row.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    rows.push_back(std::move(row));
  }
  return rows;
}

inline int thread_cap() {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("MMNOMA_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed >= 1)
      cap = static_cast<int>(parsed);
  }
  return cap;
}

// Raw rows for every value x realization x scheme, each followed (per value)
// by one mean row per scheme with realization -1 and seed 0.
inline std::vector<RowRecord> run_sweep(const SystemConfig& base,
                                        const SweepSpec& spec,
                                        bool timing = false) {
  validate(spec);
  mmnoma::validate(base);
  const int n_real = spec.n_realizations;
  std::vector<RowRecord> rows;

  for (double value : spec.values) {
    std::vector<std::vector<RowRecord>> slots(n_real);

    bool value_ok = true;
    SystemConfig config = base;
    try {
      config = apply_sweep_value(base, spec.var, value);
    } catch (const std::exception&) {
      value_ok = false;
    }

    if (value_ok) {
      std::atomic<int> next{0};
      const auto work = [&] {
        for (int r; (r = next.fetch_add(1)) < n_real;)
          slots[r] = run_realization(config, derive_seed(base.seed, r),
                                     spec.schemes, timing);
      };
      const int workers = std::min(thread_cap(), n_real);
      if (workers <= 1) {
        work();
      } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
      }
    } else {
      for (int r = 0; r < n_real; ++r)
        for (auto scheme : spec.schemes) {
          RowRecord row;
          row.seed = derive_seed(base.seed, r);
          row.scheme = baselines::scheme_name(scheme);
          slots[r].push_back(std::move(row));
        }
    }

    for (int r = 0; r < n_real; ++r)
      for (auto& row : slots[r]) {
        row.sweep_var = sweep_var_name(spec.var);
        row.sweep_value = value;
        row.realization = r;
        rows.push_back(std::move(row));
      }

    for (std::size_t s = 0; s < spec.schemes.size(); ++s) {
      RowRecord mean;
      mean.sweep_var = sweep_var_name(spec.var);
      mean.sweep_value = value;
      mean.realization = -1;
      mean.scheme = baselines::scheme_name(spec.schemes[s]);
      for (int r = 0; r < n_real; ++r) {
        const auto& row = slots[r][s];
        mean.asr_bps_hz += row.asr_bps_hz;
        mean.ee_bps_hz_per_w += row.ee_bps_hz_per_w;
        mean.feasible += row.feasible;
        mean.wall_ms += row.wall_ms;
      }
      mean.asr_bps_hz /= n_real;
      mean.ee_bps_hz_per_w /= n_real;
      mean.feasible /= n_real;
      mean.wall_ms /= n_real;
      rows.push_back(std::move(mean));
    }
  }
  return rows;
}

inline constexpr const char* kSweepCsvHeader =
    "sweep_var,sweep_value,realization,seed,scheme,asr_bps_hz,"
    "ee_bps_hz_per_w,feasible,wall_ms";

inline void write_sweep_csv(std::ostream& os,
                            const std::vector<RowRecord>& rows) {
  os << kSweepCsvHeader << '\n';
  for (const auto& r : rows)
    os << r.sweep_var << ',' << csv::fmt(r.sweep_value) << ',' << r.realization
       << ',' << r.seed << ',' << r.scheme << ',' << csv::fmt(r.asr_bps_hz)
       << ',' << csv::fmt(r.ee_bps_hz_per_w) << ',' << csv::fmt(r.feasible)
       << ',' << csv::fmt(r.wall_ms) << '\n';
}

inline std::vector<RowRecord> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSweepCsvHeader)
    throw std::runtime_error("csv: row 1: expected sweep table header");
  std::vector<RowRecord> rows;
  for (std::size_t row_no = 2; std::getline(is, line); ++row_no) {
    if (line.empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() != 9)
      throw std::runtime_error("csv: row " + std::to_string(row_no) +
                               ": expected 9 fields, got " +
                               std::to_string(cells.size()));
    RowRecord r;
    r.sweep_var = cells[0];
    r.sweep_value = csv::parse_double(cells[1], row_no);
    r.realization = csv::parse_int(cells[2], row_no);
    r.seed = csv::parse_uint(cells[3], row_no);
    r.scheme = cells[4];
    r.asr_bps_hz = csv::parse_double(cells[5], row_no);
    r.ee_bps_hz_per_w = csv::parse_double(cells[6], row_no);
    r.feasible = csv::parse_double(cells[7], row_no);
    r.wall_ms = csv::parse_double(cells[8], row_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

struct SummaryRow {
  std::string sweep_var;
  double sweep_value = 0.0;
  std::string scheme;
  double mean_asr_bps_hz = 0.0;
  double mean_ee_bps_hz_per_w = 0.0;
  double feasible_fraction = 0.0;
  // Mean achievable sum rate minus the best orthogonal-access scheme at the
  // same sweep value (tdma_zf or fdma, whichever is higher). When no
  // orthogonal scheme is present, the best of the other schemes stands in;
  // a lone scheme gets 0.
  double gap_bps_hz = 0.0;
};

inline std::vector<SummaryRow> summarize(const std::vector<RowRecord>& rows) {
  // Mean rows are a convenience for readers; recompute from raw rows when
  // any are present so nothing is double counted.
  std::vector<const RowRecord*> use;
  for (const auto& r : rows)
    if (r.realization >= 0) use.push_back(&r);
  if (use.empty())
    for (const auto& r : rows) use.push_back(&r);

  struct Acc {
    double asr = 0.0, ee = 0.0, feasible = 0.0;
    int n = 0;
  };
  std::map<std::tuple<std::string, double, std::string>, Acc> acc;
  for (const auto* r : use) {
    auto& a = acc[{r->sweep_var, r->sweep_value, r->scheme}];
    a.asr += r->asr_bps_hz;
    a.ee += r->ee_bps_hz_per_w;
    a.feasible += r->feasible;
    a.n += 1;
  }

  std::vector<SummaryRow> out;
  out.reserve(acc.size());
  for (const auto& [key, a] : acc) {
    SummaryRow s;
    s.sweep_var = std::get<0>(key);
    s.sweep_value = std::get<1>(key);
    s.scheme = std::get<2>(key);
    s.mean_asr_bps_hz = a.asr / a.n;
    s.mean_ee_bps_hz_per_w = a.ee / a.n;
    s.feasible_fraction = a.feasible / a.n;
    out.push_back(std::move(s));
  }

  for (auto& s : out) {
    bool any_oma = false;
    double best_oma = 0.0, best_other = 0.0;
    bool any_other = false;
    for (const auto& t : out) {
      if (t.sweep_var != s.sweep_var || t.sweep_value != s.sweep_value)
        continue;
      if (t.scheme == "tdma_zf" || t.scheme == "fdma") {
        if (!any_oma || t.mean_asr_bps_hz > best_oma)
          best_oma = t.mean_asr_bps_hz;
        any_oma = true;
      }
      if (t.scheme != s.scheme) {
        if (!any_other || t.mean_asr_bps_hz > best_other)
          best_other = t.mean_asr_bps_hz;
        any_other = true;
      }
    }
    if (any_oma)
      s.gap_bps_hz = s.mean_asr_bps_hz - best_oma;
    else if (any_other)
      s.gap_bps_hz = s.mean_asr_bps_hz - best_other;
    else
      s.gap_bps_hz = 0.0;
  }
  return out;  // map iteration already sorted by (var, value, scheme)
}

inline void write_summary_csv(std::ostream& os,
                              const std::vector<SummaryRow>& rows) {
  os << "sweep_var,sweep_value,scheme,mean_asr_bps_hz,mean_ee_bps_hz_per_w,"
        "feasible_fraction,gap_bps_hz\n";
  for (const auto& r : rows)
    os << r.sweep_var << ',' << csv::fmt(r.sweep_value) << ',' << r.scheme
       << ',' << csv::fmt(r.mean_asr_bps_hz) << ','
       << csv::fmt(r.mean_ee_bps_hz_per_w) << ','
       << csv::fmt(r.feasible_fraction) << ',' << csv::fmt(r.gap_bps_hz)
       << '\n';
}

}  // namespace mmnoma::experiment
