#pragma once

// Fuzzy connectives over [0,1] with closed-form partial derivatives.
//
// Two layers are exposed. The checked layer works on TruthValue and rejects
// out-of-range inputs. The `dfl::ops` layer works on plain doubles and is what
// the grounding engine calls in its inner loops; callers guarantee the range.

#include <span>
#include <string>
#include <string_view>

namespace dfl {

/// Guard used for the Goguen denominators and the log-product floor.
inline constexpr double kEpsilon = 1e-6;

/// A real in [0,1]. Construction from anything else (including NaN) throws
/// std::domain_error.
class TruthValue {
public:
  constexpr TruthValue() noexcept = default;
  explicit TruthValue(double v);

  [[nodiscard]] constexpr double value() const noexcept { return value_; }

  friend constexpr bool operator==(TruthValue, TruthValue) noexcept = default;

private:
  double value_ = 0.0;
};

enum class BaseImplication { KleeneDienes, Reichenbach, Lukasiewicz, Godel, Goguen };

/// A base implication, optionally wrapped once by the sigmoidal transform
/// with spread s > 0. Nesting is impossible by construction.
class Implication {
public:
  constexpr Implication(BaseImplication base) noexcept : base_(base) {}  // NOLINT(implicit)

  static Implication sigmoidal(BaseImplication inner, double s);

  /// Accepts short or long names ("rc", "reichenbach", "sigmoidal-rc@9", ...).
  /// The spread after '@' is optional when `default_s` is given.
  static Implication parse(std::string_view name, double default_s = 0.0);

  [[nodiscard]] constexpr BaseImplication base() const noexcept { return base_; }
  [[nodiscard]] constexpr bool is_sigmoidal() const noexcept { return spread_ > 0.0; }
  [[nodiscard]] constexpr double spread() const noexcept { return spread_; }
  [[nodiscard]] Implication inner() const noexcept { return Implication(base_); }

  /// Built as S(1-a, c) from a t-conorm (KD, RC, LK).
  [[nodiscard]] bool is_s_implication() const noexcept;
  /// Built as the residuum of a t-norm (LK, Godel, Goguen).
  [[nodiscard]] bool is_r_implication() const noexcept;

  [[nodiscard]] std::string name() const;

  friend constexpr bool operator==(const Implication&, const Implication&) noexcept = default;

private:
  BaseImplication base_;
  double spread_ = 0.0;
};

std::string_view short_name(BaseImplication kind) noexcept;

enum class TNormKind { Godel, Product, Lukasiewicz, Yager };

class TNorm {
public:
  constexpr TNorm(TNormKind kind = TNormKind::Product) noexcept : kind_(kind) {}  // NOLINT(implicit)

  /// Yager t-norm; throws std::invalid_argument unless p >= 1.
  static TNorm yager(double p);
  static TNorm parse(std::string_view name, double yager_p = 2.0);

  [[nodiscard]] constexpr TNormKind kind() const noexcept { return kind_; }
  [[nodiscard]] constexpr double p() const noexcept { return p_; }
  [[nodiscard]] std::string name() const;

  friend constexpr bool operator==(const TNorm&, const TNorm&) noexcept = default;

private:
  TNormKind kind_;
  double p_ = 2.0;
};

/// LogProduct does not produce a truth value: it returns sum(log(max(x, eps))),
/// a non-positive score.
enum class AggregatorKind { Product, LogProduct, Minimum };

AggregatorKind parse_aggregator(std::string_view name);
std::string_view to_string(AggregatorKind kind) noexcept;

/// (dI/dc, -dI/da).
struct GradPair {
  double d_consequent = 0.0;
  double d_neg_antecedent = 0.0;
};

/// Partials of a binary connective with respect to both operands.
struct BinaryGrad {
  double d_lhs = 0.0;
  double d_rhs = 0.0;
};

/// Negation is fixed to 1-a. Disjunction uses the dual of `disjunction`.
struct OperatorSuite {
  TNorm conjunction = TNormKind::Product;
  TNorm disjunction = TNormKind::Product;
  Implication implication = BaseImplication::Reichenbach;
  AggregatorKind aggregator = AggregatorKind::Product;

  [[nodiscard]] std::string describe() const;
};

// ---------------------------------------------------------------------------
// Checked API.

TruthValue negate(TruthValue a) noexcept;
TruthValue tnorm(const TNorm& kind, TruthValue a, TruthValue b);
/// Dual S(a,b) = 1 - T(1-a, 1-b).
TruthValue tconorm(const TNorm& kind, TruthValue a, TruthValue b);
TruthValue implication(const Implication& kind, TruthValue a, TruthValue c);
GradPair implication_grad(const Implication& kind, TruthValue a, TruthValue c);
/// Throws std::invalid_argument if s <= 0.
TruthValue sigmoidal_transform(BaseImplication inner, double s, TruthValue a, TruthValue c);
/// Throws std::invalid_argument on an empty list.
double aggregate(AggregatorKind kind, std::span<const TruthValue> xs);

// ---------------------------------------------------------------------------
// Unchecked kernels.

namespace ops {

inline double negate(double a) noexcept { return 1.0 - a; }

double tnorm(const TNorm& kind, double a, double b) noexcept;
BinaryGrad tnorm_grad(const TNorm& kind, double a, double b) noexcept;
double tconorm(const TNorm& kind, double a, double b) noexcept;
BinaryGrad tconorm_grad(const TNorm& kind, double a, double b) noexcept;

double base_implication(BaseImplication kind, double a, double c) noexcept;
GradPair base_implication_grad(BaseImplication kind, double a, double c) noexcept;

/// Maps an implication value through the renormalised logistic with spread s.
double sigmoid_squash(double s, double value) noexcept;
/// d sigmoid_squash / d value. Strictly positive for every finite input.
double sigmoid_squash_grad(double s, double value) noexcept;

double implication(const Implication& kind, double a, double c) noexcept;
GradPair implication_grad(const Implication& kind, double a, double c) noexcept;

double aggregate(AggregatorKind kind, std::span<const double> xs) noexcept;
/// Writes d aggregate / d xs[i] into out[i]; out.size() == xs.size().
void aggregate_grad(AggregatorKind kind, std::span<const double> xs, std::span<double> out) noexcept;

}  // namespace ops

}  // namespace dfl
