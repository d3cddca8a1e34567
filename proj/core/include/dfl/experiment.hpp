#pragma once

// Semi-supervised digit experiments: the digit knowledge base, single runs,
// implication sweeps and formula ablations, with CSV reports.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfl/dataset.hpp"
#include "dfl/diagnostics.hpp"
#include "dfl/knowledge_base.hpp"
#include "dfl/params.hpp"
#include "dfl/run_config.hpp"

namespace dfl {

/// Shape 1: forall x y. digit(x) & digit(y) -> same(x, y), one per digit.
/// Shape 2: forall x y. digit(x) & same(x, y) -> digit(y), one per digit.
/// Shape 3: forall x y. same(x, y) -> same(y, x).
/// Throws std::invalid_argument on an empty mask or an entry outside 1..3.
KnowledgeBase build_digit_kb(std::span<const int> mask);

/// config.data_dir, else $DFL_DATA_DIR, else `fallback`.
std::filesystem::path resolve_data_dir(const RunConfig& config, const std::filesystem::path& fallback);

/// First train_size training rows and test_size test rows from the standard
/// IDX file names under `dir`, split with labeled_fraction and the run seed.
DigitDataset load_experiment_data(const RunConfig& config, const std::filesystem::path& dir);

struct ReportRow {
  std::size_t iteration = 0;
  /// Mean training loss since the previous row.
  double loss = 0.0;
  double accuracy = 0.0;
  GradientMetrics metrics;
};

struct RunReport {
  std::string label;
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;
  /// Metrics summed over the whole run.
  GradientMetrics total;
  double final_accuracy = 0.0;
  /// Non-empty when a non-finite gradient stopped the run.
  std::string abort_message;

  [[nodiscard]] bool aborted() const noexcept { return !abort_message.empty(); }
};

/// Trains on a dataset already split by make_split. Deterministic in the
/// config and data. The trained parameters are copied to final_params if given.
RunReport run_single(const RunConfig& config, const DigitDataset& data, InterpretationParams* final_params = nullptr);

struct ExperimentResult {
  RunReport run;
  std::optional<RunReport> baseline;
};

/// run_single, plus the w_dfl = 0 run when config.baseline is set.
ExperimentResult run_experiment(const RunConfig& config, const DigitDataset& data);

/// `iteration,loss,accuracy,cons_pct,cu_cons_pct,cu_ant_pct,cons_abs,ant_abs`
void write_report_csv(std::ostream& out, const RunReport& report);

struct SweepRow {
  std::string label;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  GradientMetrics metrics;
  bool aborted = false;
};

/// One run per (implication, seed); label "baseline" rows use w_dfl = 0.
/// `load` maps a config to its split dataset, so each seed gets its own split.
template <class Loader>
std::vector<SweepRow> run_sweep(const RunConfig& base, std::span<const std::string> implications,
                                std::span<const std::uint64_t> seeds, bool with_baseline, Loader&& load);

/// One run per (formula mask, seed).
template <class Loader>
std::vector<SweepRow> run_ablation(const RunConfig& base, std::span<const std::vector<int>> masks,
                                   std::span<const std::uint64_t> seeds, Loader&& load);

/// `label,seed,accuracy,cons_pct,cu_cons_pct,cu_ant_pct,cons_abs,ant_abs,aborted`
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

struct SweepStats {
  std::string label;
  std::size_t runs = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::optional<double> mean_cons_pct;
  std::optional<double> std_cons_pct;
};

/// Per-label mean and sample standard deviation, labels in first-seen order.
std::vector<SweepStats> sweep_stats(std::span<const SweepRow> rows);

/// `label,runs,mean_accuracy,std_accuracy,mean_cons_pct,std_cons_pct`
void write_sweep_stats_csv(std::ostream& out, std::span<const SweepStats> stats);

std::string mask_label(std::span<const int> mask);

// ---------------------------------------------------------------------------

template <class Loader>
std::vector<SweepRow> run_sweep(const RunConfig& base, std::span<const std::string> implications,
                                std::span<const std::uint64_t> seeds, bool with_baseline, Loader&& load) {
  std::vector<SweepRow> rows;
  for (std::uint64_t seed : seeds) {
    RunConfig cfg = base;
    cfg.seed = seed;
    cfg.baseline = false;
    const DigitDataset data = load(cfg);
    auto record = [&](const RunConfig& c, const std::string& label) {
      const RunReport r = run_single(c, data);
      rows.push_back({label, seed, r.final_accuracy, r.total, r.aborted()});
    };
    if (with_baseline) {
      RunConfig b = cfg;
      b.w_dfl = 0.0;
      record(b, "baseline");
    }
    for (const auto& imp : implications) {
      RunConfig c = cfg;
      c.implication = imp;
      record(c, imp);
    }
  }
  return rows;
}

template <class Loader>
std::vector<SweepRow> run_ablation(const RunConfig& base, std::span<const std::vector<int>> masks,
                                   std::span<const std::uint64_t> seeds, Loader&& load) {
  std::vector<SweepRow> rows;
  for (std::uint64_t seed : seeds) {
    RunConfig cfg = base;
    cfg.seed = seed;
    cfg.baseline = false;
    const DigitDataset data = load(cfg);
    for (const auto& mask : masks) {
      RunConfig c = cfg;
      c.formulas = mask;
      const RunReport r = run_single(c, data);
      rows.push_back({mask_label(mask), seed, r.final_accuracy, r.total, r.aborted()});
    }
  }
  return rows;
}

}  // namespace dfl
