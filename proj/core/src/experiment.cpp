#include "xlmimo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "xlmimo/pipeline.hpp"
#include "xlmimo/rng.hpp"
#include "xlmimo/scenario.hpp"

namespace xlmimo {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs every (mode, snr) cell of one realization into `out`, laid out as
// out[mode * n_snr + snr].
void run_realization(const ExperimentConfig& config, int r, std::vector<ExperimentRecord*>& out) {
  const auto& plan = config.sweep;
  const std::uint64_t seed = realization_seed(config.scenario.seed, r);
  auto fill_failure = [&](const std::string& what) {
    for (auto* rec : out) {
      rec->sum_se = kNaN;
      rec->error = what;
    }
  };

  std::optional<Scenario> scenario;
  BlockDraws draws;
  try {
    scenario.emplace(build_scenario(config.scenario, seed));
    draws = draw_block(*scenario, seed);
  } catch (const std::exception& e) {
    fill_failure(e.what());
    return;
  }

  std::size_t i = 0;
  for (SchedulerMode mode : plan.modes) {
    SchedulerConfig sched = config.scheduler;
    sched.mode = mode;
    for (double snr_db : plan.snr_db) {
      ExperimentRecord& rec = *out[i++];
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto link = LinkBudget::from_snr_db(config.scenario.transmit_power, snr_db);
        const auto outcome = run_block_pipeline(*scenario, draws, sched, link);
        rec.sum_se = outcome.sum_se();
        rec.n_scheduled = static_cast<int>(outcome.num_scheduled());
        rec.n_candidates = static_cast<int>(outcome.num_candidates());
        rec.prelog = outcome.prelog;
      } catch (const std::exception& e) {
        rec.sum_se = kNaN;
        rec.error = e.what();
      }
      if (plan.record_runtime)
        rec.runtime_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
  }
}

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  f << text;
  f.flush();
  if (!f) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace

std::uint64_t realization_seed(std::uint64_t master_seed, int realization) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(realization)});
}

std::vector<ExperimentRecord> snr_sweep(const ExperimentConfig& config,
                                        const std::function<void(const SweepProgress&)>& progress) {
  config.scenario.validate();
  config.scheduler.validate();
  config.sweep.validate();
  const auto& plan = config.sweep;
  const std::size_t n_modes = plan.modes.size();
  const std::size_t n_snr = plan.snr_db.size();
  const auto n_real = static_cast<std::size_t>(plan.realizations);

  std::vector<ExperimentRecord> records(n_modes * n_snr * n_real);
  for (std::size_t m = 0; m < n_modes; ++m)
    for (std::size_t s = 0; s < n_snr; ++s)
      for (std::size_t r = 0; r < n_real; ++r) {
        auto& rec = records[(m * n_snr + s) * n_real + r];
        rec.mode = plan.modes[m];
        rec.snr_db = plan.snr_db[s];
        rec.realization = static_cast<int>(r);
        rec.seed = realization_seed(config.scenario.seed, static_cast<int>(r));
      }

  std::atomic<std::size_t> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    std::vector<ExperimentRecord*> slots(n_modes * n_snr);
    for (std::size_t r; (r = next.fetch_add(1)) < n_real;) {
      for (std::size_t c = 0; c < slots.size(); ++c) slots[c] = &records[c * n_real + r];
      run_realization(config, static_cast<int>(r), slots);
      const int d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress({d, static_cast<int>(n_real)});
      }
    }
  };

  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(plan.threads, 1)), n_real);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  return records;
}

Aggregation aggregate(const std::vector<ExperimentRecord>& records) {
  struct Cell {
    SchedulerMode mode;
    double snr_db;
    std::vector<double> values;
    int failed = 0;
  };
  std::vector<Cell> cells;
  for (const auto& rec : records) {
    auto it = std::find_if(cells.begin(), cells.end(),
                           [&](const Cell& c) { return c.mode == rec.mode && c.snr_db == rec.snr_db; });
    if (it == cells.end()) {
      cells.push_back({rec.mode, rec.snr_db, {}, 0});
      it = std::prev(cells.end());
    }
    if (rec.failed())
      ++it->failed;
    else
      it->values.push_back(rec.sum_se);
  }

  Aggregation out;
  for (const auto& c : cells) {
    const auto n = c.values.size();
    if (n == 0) {
      out.warnings.push_back(
          fmt::format("{} at {} dB: no valid realizations ({} failed), cell omitted", to_string(c.mode), c.snr_db, c.failed));
      continue;
    }
    if (c.failed > 0)
      out.warnings.push_back(fmt::format("{} at {} dB: {} failed realizations excluded", to_string(c.mode), c.snr_db, c.failed));
    double mean = 0.0;
    for (double v : c.values) mean += v;
    mean /= static_cast<double>(n);
    double se = 0.0;
    double half = 0.0;
    if (n >= 2) {
      double ss = 0.0;
      for (double v : c.values) ss += (v - mean) * (v - mean);
      se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
      const boost::math::students_t t(static_cast<double>(n - 1));
      half = boost::math::quantile(t, 0.975) * se;
    }
    out.rows.push_back({c.mode, c.snr_db, mean, se, mean - half, mean + half, static_cast<int>(n), c.failed});
  }
  return out;
}

std::string format_raw_csv(const std::vector<ExperimentRecord>& records) {
  std::string s = kRawCsvHeader;
  s += '\n';
  for (const auto& r : records)
    s += fmt::format("{},{},{},{},{},{},{},{},{}\n", to_string(r.mode), format_number(r.snr_db), r.realization, r.seed,
                     format_number(r.sum_se), r.n_scheduled, r.n_candidates, format_number(r.prelog),
                     format_number(r.runtime_ms));
  return s;
}

std::string format_aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string s = kAggregateCsvHeader;
  s += '\n';
  for (const auto& r : rows)
    s += fmt::format("{},{},{},{},{},{},{}\n", to_string(r.mode), format_number(r.snr_db), format_number(r.mean_se),
                     format_number(r.stderr_se), format_number(r.ci95_lo), format_number(r.ci95_hi), r.n);
  return s;
}

void write_raw_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path) {
  write_text(format_raw_csv(records), path);
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::filesystem::path& path) {
  write_text(format_aggregate_csv(rows), path);
}

std::vector<ExperimentRecord> parse_raw_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kRawCsvHeader)
    throw std::runtime_error("raw CSV: missing or unexpected header");
  std::vector<ExperimentRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw std::runtime_error(fmt::format("raw CSV line {}: expected 9 fields, got {}", lineno, f.size()));
    try {
      ExperimentRecord r;
      r.mode = parse_scheduler_mode(f[0]);
      r.snr_db = std::stod(f[1]);
      r.realization = std::stoi(f[2]);
      r.seed = std::stoull(f[3]);
      r.sum_se = f[4] == "nan" ? kNaN : std::stod(f[4]);
      r.n_scheduled = std::stoi(f[5]);
      r.n_candidates = std::stoi(f[6]);
      r.prelog = std::stod(f[7]);
      r.runtime_ms = std::stod(f[8]);
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("raw CSV line {}: {}", lineno, e.what()));
    }
  }
  return out;
}

std::vector<ExperimentRecord> read_raw_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << f.rdbuf();
  try {
    return parse_raw_csv(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace xlmimo
