#pragma once

// Gradient-flow metrics over implication instances on a valuation tape,
// derivative surfaces of the implications, and per-run metric reports.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dfl/fuzzy_ops.hpp"
#include "dfl/grounding.hpp"

namespace dfl {

/// Aggregated: the per-instance partial includes d(aggregate)/d(instance).
/// ImplicationLocal: only the implication's own partials.
enum class ChainMode { Aggregated, ImplicationLocal };

ChainMode parse_chain_mode(std::string_view name);
std::string_view to_string(ChainMode mode) noexcept;

struct GradientMetrics {
  double cons_magnitude = 0.0;
  double ant_magnitude = 0.0;
  /// Undefined when no labeler was available.
  std::optional<double> cu_cons;
  std::optional<double> cu_ant;
  std::size_t instances = 0;

  [[nodiscard]] std::optional<double> cons_ratio() const;
  [[nodiscard]] std::optional<double> cu_cons_ratio() const;
  [[nodiscard]] std::optional<double> cu_ant_ratio() const;

  /// Sums magnitudes; a cu field stays defined only if both sides define it.
  GradientMetrics& operator+=(const GradientMetrics& other);
};

/// Boolean ground truth of an atom.
using AtomLabeler = std::function<bool(const GroundAtom&)>;

/// Sums the consequent and negated-antecedent partials of every implication
/// instance on the tape. With a labeler, cu_cons collects the consequent
/// partials of instances whose consequent is classically true and cu_ant the
/// antecedent partials of instances whose antecedent is classically false.
GradientMetrics collect_metrics(const ValuationTape& tape, const AtomLabeler* labeler = nullptr,
                                ChainMode mode = ChainMode::Aggregated);

/// Classical truth of a tape node under Boolean atom labels.
bool classical_value(const ValuationTape& tape, std::uint32_t node, const AtomLabeler& labeler);

enum class SurfaceQuantity {
  Value,
  DConsequent,
  DNegAntecedent,
  LogAggregatedDConsequent,
  LogAggregatedDNegAntecedent,
};

SurfaceQuantity parse_surface_quantity(std::string_view name);
std::string_view to_string(SurfaceQuantity q) noexcept;

struct SurfaceGrid {
  Implication implication;
  SurfaceQuantity quantity = SurfaceQuantity::Value;
  int resolution = 0;
  bool log_scale = false;
  /// cells[i * resolution + j] at a = i/(resolution-1), c = j/(resolution-1).
  std::vector<double> cells;

  [[nodiscard]] double coord(int i) const { return static_cast<double>(i) / (resolution - 1); }
  [[nodiscard]] double at(int i, int j) const { return cells.at(static_cast<std::size_t>(i * resolution + j)); }
};

/// Log-aggregated quantities divide the partial by max(I(a,c), eps). With
/// log_scale every cell becomes log10(max(cell, eps)). Throws
/// std::invalid_argument when resolution < 2.
SurfaceGrid export_surface(const Implication& kind, SurfaceQuantity quantity, int resolution, bool log_scale = false);

/// CSV `a,c,value`.
void write_surface_csv(std::ostream& out, const SurfaceGrid& grid);

struct EpochRecord {
  std::size_t epoch = 0;
  GradientMetrics metrics;
  double accuracy = 0.0;
};

struct RunSummary {
  std::vector<EpochRecord> rows;
  GradientMetrics total;
  double final_accuracy = 0.0;
  double mean_accuracy = 0.0;
};

/// Throws std::invalid_argument on an empty history or non-increasing epochs.
RunSummary summarize_run(std::span<const EpochRecord> history);

/// Empty string for an undefined value, otherwise %.10g.
std::string format_optional(std::optional<double> v);

/// CSV `epoch,cons_pct,cu_cons_pct,cu_ant_pct,accuracy`, ratios as fractions.
void write_metrics_csv(std::ostream& out, std::span<const EpochRecord> rows);

/// key=value aggregate lines.
void write_summary(std::ostream& out, const RunSummary& summary);

}  // namespace dfl
