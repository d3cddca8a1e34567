#pragma once

// Grid audit of the optional implication properties (LN, EP, IP, CP, L-CP,
// R-CP), contrapositive differentiable symmetry, and the fuzzy-implication
// axioms themselves (boundary values and monotonicity).

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dfl/fuzzy_ops.hpp"

namespace dfl {

enum class Property {
  FuzzyImplication,  // I(0,0)=I(1,1)=1, I(1,0)=0, decreasing in a, increasing in c
  LeftNeutrality,
  ExchangePrinciple,
  IdentityPrinciple,
  ContrapositiveSymmetry,
  LeftContrapositiveSymmetry,
  RightContrapositiveSymmetry,
  DifferentiableSymmetry,
};

inline constexpr std::array kAllProperties = {
    Property::FuzzyImplication,          Property::LeftNeutrality,
    Property::ExchangePrinciple,         Property::IdentityPrinciple,
    Property::ContrapositiveSymmetry,    Property::LeftContrapositiveSymmetry,
    Property::RightContrapositiveSymmetry, Property::DifferentiableSymmetry,
};

std::string_view to_string(Property p) noexcept;

/// Violations below this count as "holds".
inline constexpr double kAuditTolerance = 1e-9;
/// Grid points closer than this to a non-differentiable locus are skipped by
/// the derivative-symmetry check.
inline constexpr double kTieMargin = 1e-3;

struct PropertyResult {
  Property property;
  double max_violation = 0.0;
  bool holds = true;
};

struct PropertyReport {
  std::string implication;
  int grid_n = 0;
  std::vector<PropertyResult> results;

  [[nodiscard]] const PropertyResult& at(Property p) const;
  [[nodiscard]] bool holds(Property p) const { return at(p).holds; }

  /// One `key=value` per line: `implication=..`, `grid_n=..`, then
  /// `<PROP>.max_violation=..` and `<PROP>.holds=true|false`.
  [[nodiscard]] std::string to_text() const;
  static PropertyReport from_text(std::string_view text);
};

/// An implication given as plain functions, so that the audit can be pointed
/// at arbitrary (including deliberately broken) operators.
struct ImplicationFunctions {
  std::function<double(double, double)> value;
  std::function<GradPair(double, double)> grad;
  /// Distance of (a,c) from the non-differentiable locus; empty if smooth.
  std::function<double(double, double)> tie_distance;

  static ImplicationFunctions of(const Implication& kind);
};

/// Throws std::invalid_argument if grid_n < 2.
PropertyReport audit_properties(const ImplicationFunctions& fns, std::string name, int grid_n);
PropertyReport audit_properties(const Implication& kind, int grid_n);

/// An implication together with the properties the literature claims for
/// it. Properties absent from `claims` are reported but not checked.
struct CatalogEntry {
  std::string label;
  ImplicationFunctions functions;
  std::vector<std::pair<Property, bool>> claims;
};

/// The five classic implications with their documented property columns,
/// plus sigmoidal wraps of the S-implications.
std::vector<CatalogEntry> default_catalog(double sigmoidal_spread = 9.0);

/// Audits every entry and prints the reports followed by one verdict line
/// per entry. Returns 0 iff no claimed property is violated on the grid, 1
/// otherwise. A property claimed to fail but holding on the grid is marked
/// "(?)" without affecting the status: coarse grids may miss the witness.
int check_props(const std::vector<CatalogEntry>& catalog, int grid_n, std::ostream& out);

}  // namespace dfl
