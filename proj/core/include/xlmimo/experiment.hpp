#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "xlmimo/config.hpp"

namespace xlmimo {

struct ExperimentRecord {
  SchedulerMode mode = SchedulerMode::kIsp;
  double snr_db = 0.0;
  int realization = 0;
  std::uint64_t seed = 0;
  double sum_se = 0.0;  // NaN for a failed row
  int n_scheduled = 0;
  int n_candidates = 0;
  double prelog = 1.0;
  double runtime_ms = 0.0;
  std::string error;  // empty unless the row failed; not persisted

  bool failed() const noexcept { return sum_se != sum_se; }
};

// Seed of realization r: derive_seed(master, {r}). It drives both the
// scenario and the block draws, so every mode and SNR point of one
// realization sees the same world, channels and unit noise.
std::uint64_t realization_seed(std::uint64_t master_seed, int realization);

struct SweepProgress {
  int done = 0;
  int total = 0;
};

// Runs every (mode, snr, realization) of config.sweep on config.scenario.
// Records come back sorted by (mode order in the plan, snr order, realization)
// whatever the thread count. Component errors mark the row as failed and the
// sweep continues.
std::vector<ExperimentRecord> snr_sweep(const ExperimentConfig& config,
                                        const std::function<void(const SweepProgress&)>& progress = {});

struct AggregateRow {
  SchedulerMode mode = SchedulerMode::kIsp;
  double snr_db = 0.0;
  double mean_se = 0.0;
  double stderr_se = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  int n = 0;
  int failed = 0;
};

struct Aggregation {
  std::vector<AggregateRow> rows;
  std::vector<std::string> warnings;
};

// Mean, standard error and Student-t 95% interval per (mode, snr) cell, in
// first-appearance order. Failed rows are excluded and counted; a cell with no
// valid rows is omitted with a warning. With one valid row the standard error
// is reported as 0.
Aggregation aggregate(const std::vector<ExperimentRecord>& records);

void write_raw_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path);
void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::filesystem::path& path);
std::string format_raw_csv(const std::vector<ExperimentRecord>& records);
std::string format_aggregate_csv(const std::vector<AggregateRow>& rows);

std::vector<ExperimentRecord> read_raw_csv(const std::filesystem::path& path);
std::vector<ExperimentRecord> parse_raw_csv(const std::string& text);

inline constexpr const char* kRawCsvHeader =
    "scheduler,snr_db,realization,seed,sum_se,n_scheduled,n_candidates,prelog,runtime_ms";
inline constexpr const char* kAggregateCsvHeader = "scheduler,snr_db,mean_se,stderr_se,ci95_lo,ci95_hi,n";

}  // namespace xlmimo
