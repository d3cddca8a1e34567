#include "dfl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace dfl {

namespace {

std::optional<double> ratio(double num, double den) {
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

std::optional<double> add_optional(std::optional<double> a, std::optional<double> b) {
  if (!a || !b) return std::nullopt;
  return *a + *b;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

ChainMode parse_chain_mode(std::string_view name) {
  if (name == "aggregated") return ChainMode::Aggregated;
  if (name == "local" || name == "implication-local") return ChainMode::ImplicationLocal;
  throw std::invalid_argument("unknown chain mode '" + std::string(name) + "'");
}

std::string_view to_string(ChainMode mode) noexcept {
  return mode == ChainMode::Aggregated ? "aggregated" : "local";
}

std::optional<double> GradientMetrics::cons_ratio() const {
  return ratio(cons_magnitude, cons_magnitude + ant_magnitude);
}

std::optional<double> GradientMetrics::cu_cons_ratio() const {
  if (!cu_cons) return std::nullopt;
  return ratio(*cu_cons, cons_magnitude);
}

std::optional<double> GradientMetrics::cu_ant_ratio() const {
  if (!cu_ant) return std::nullopt;
  return ratio(*cu_ant, ant_magnitude);
}

GradientMetrics& GradientMetrics::operator+=(const GradientMetrics& other) {
  cons_magnitude += other.cons_magnitude;
  ant_magnitude += other.ant_magnitude;
  cu_cons = add_optional(cu_cons, other.cu_cons);
  cu_ant = add_optional(cu_ant, other.cu_ant);
  instances += other.instances;
  return *this;
}

bool classical_value(const ValuationTape& tape, std::uint32_t node, const AtomLabeler& labeler) {
  const TapeNode& n = tape.nodes.at(node);
  switch (n.op) {
    case TapeOp::Leaf: return labeler(tape.atoms.at(n.lhs));
    case TapeOp::Not: return !classical_value(tape, n.lhs, labeler);
    case TapeOp::And: return classical_value(tape, n.lhs, labeler) && classical_value(tape, n.rhs, labeler);
    case TapeOp::Or: return classical_value(tape, n.lhs, labeler) || classical_value(tape, n.rhs, labeler);
    case TapeOp::Implies: return !classical_value(tape, n.lhs, labeler) || classical_value(tape, n.rhs, labeler);
    case TapeOp::Aggregate:
    case TapeOp::Loss: {
      for (auto c : tape.children(n)) {
        if (!classical_value(tape, c, labeler)) return false;
      }
      return true;
    }
  }
  return false;
}

GradientMetrics collect_metrics(const ValuationTape& tape, const AtomLabeler* labeler, ChainMode mode) {
  GradientMetrics m;
  if (labeler) {
    m.cu_cons = 0.0;
    m.cu_ant = 0.0;
  }
  std::vector<double> values, chain;
  for (const auto& rec : tape.formulas) {
    values.resize(rec.instance_nodes.size());
    chain.assign(rec.instance_nodes.size(), 1.0);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = tape.nodes[rec.instance_nodes[i]].value;
    if (mode == ChainMode::Aggregated && !values.empty()) ops::aggregate_grad(tape.suite.aggregator, values, chain);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const TapeNode& n = tape.nodes[rec.instance_nodes[i]];
      if (n.op != TapeOp::Implies) continue;
      const GradPair g = ops::implication_grad(tape.suite.implication, tape.nodes[n.lhs].value, tape.nodes[n.rhs].value);
      const double d_cons = chain[i] * g.d_consequent;
      const double d_ant = chain[i] * g.d_neg_antecedent;
      m.cons_magnitude += d_cons;
      m.ant_magnitude += d_ant;
      ++m.instances;
      if (labeler) {
        if (classical_value(tape, n.rhs, *labeler)) *m.cu_cons += d_cons;
        if (!classical_value(tape, n.lhs, *labeler)) *m.cu_ant += d_ant;
      }
    }
  }
  return m;
}

SurfaceQuantity parse_surface_quantity(std::string_view name) {
  if (name == "value") return SurfaceQuantity::Value;
  if (name == "d_consequent") return SurfaceQuantity::DConsequent;
  if (name == "d_neg_antecedent") return SurfaceQuantity::DNegAntecedent;
  if (name == "log_aggregated_d_consequent") return SurfaceQuantity::LogAggregatedDConsequent;
  if (name == "log_aggregated_d_neg_antecedent") return SurfaceQuantity::LogAggregatedDNegAntecedent;
  throw std::invalid_argument("unknown surface quantity '" + std::string(name) + "'");
}

std::string_view to_string(SurfaceQuantity q) noexcept {
  switch (q) {
    case SurfaceQuantity::Value: return "value";
    case SurfaceQuantity::DConsequent: return "d_consequent";
    case SurfaceQuantity::DNegAntecedent: return "d_neg_antecedent";
    case SurfaceQuantity::LogAggregatedDConsequent: return "log_aggregated_d_consequent";
    case SurfaceQuantity::LogAggregatedDNegAntecedent: return "log_aggregated_d_neg_antecedent";
  }
  return "?";
}

SurfaceGrid export_surface(const Implication& kind, SurfaceQuantity quantity, int resolution, bool log_scale) {
  if (resolution < 2) throw std::invalid_argument("surface resolution must be at least 2");
  SurfaceGrid grid{kind, quantity, resolution, log_scale, {}};
  grid.cells.reserve(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution));
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      const double a = grid.coord(i);
      const double c = grid.coord(j);
      const GradPair g = ops::implication_grad(kind, a, c);
      const double guard = std::max(ops::implication(kind, a, c), kEpsilon);
      double v = 0.0;
      switch (quantity) {
        case SurfaceQuantity::Value: v = ops::implication(kind, a, c); break;
        case SurfaceQuantity::DConsequent: v = g.d_consequent; break;
        case SurfaceQuantity::DNegAntecedent: v = g.d_neg_antecedent; break;
        case SurfaceQuantity::LogAggregatedDConsequent: v = g.d_consequent / guard; break;
        case SurfaceQuantity::LogAggregatedDNegAntecedent: v = g.d_neg_antecedent / guard; break;
      }
      if (log_scale) v = std::log10(std::max(v, kEpsilon));
      grid.cells.push_back(v);
    }
  }
  return grid;
}

void write_surface_csv(std::ostream& out, const SurfaceGrid& grid) {
  out << "a,c,value\n";
  for (int i = 0; i < grid.resolution; ++i) {
    for (int j = 0; j < grid.resolution; ++j) {
      out << format_real(grid.coord(i)) << ',' << format_real(grid.coord(j)) << ',' << format_real(grid.at(i, j))
          << '\n';
    }
  }
}

RunSummary summarize_run(std::span<const EpochRecord> history) {
  if (history.empty()) throw std::invalid_argument("empty run history");
  RunSummary s;
  s.rows.assign(history.begin(), history.end());
  s.total = history.front().metrics;
  double acc = history.front().accuracy;
  for (std::size_t k = 1; k < history.size(); ++k) {
    if (history[k].epoch <= history[k - 1].epoch) throw std::invalid_argument("epoch indices must increase");
    s.total += history[k].metrics;
    acc += history[k].accuracy;
  }
  s.final_accuracy = history.back().accuracy;
  s.mean_accuracy = acc / static_cast<double>(history.size());
  return s;
}

std::string format_optional(std::optional<double> v) { return v ? format_real(*v) : std::string(); }

void write_metrics_csv(std::ostream& out, std::span<const EpochRecord> rows) {
  out << "epoch,cons_pct,cu_cons_pct,cu_ant_pct,accuracy\n";
  for (const auto& r : rows) {
    out << r.epoch << ',' << format_optional(r.metrics.cons_ratio()) << ','
        << format_optional(r.metrics.cu_cons_ratio()) << ',' << format_optional(r.metrics.cu_ant_ratio()) << ','
        << format_real(r.accuracy) << '\n';
  }
}

void write_summary(std::ostream& out, const RunSummary& summary) {
  out << "epochs=" << summary.rows.size() << '\n';
  out << "cons_magnitude=" << format_real(summary.total.cons_magnitude) << '\n';
  out << "ant_magnitude=" << format_real(summary.total.ant_magnitude) << '\n';
  out << "cons_pct=" << format_optional(summary.total.cons_ratio()) << '\n';
  out << "cu_cons_pct=" << format_optional(summary.total.cu_cons_ratio()) << '\n';
  out << "cu_ant_pct=" << format_optional(summary.total.cu_ant_ratio()) << '\n';
  out << "final_accuracy=" << format_real(summary.final_accuracy) << '\n';
  out << "mean_accuracy=" << format_real(summary.mean_accuracy) << '\n';
}

}  // namespace dfl
