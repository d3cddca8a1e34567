#include "dfl/fuzzy_ops.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfl {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

BaseImplication parse_base(std::string_view raw) {
  const std::string name = lower(raw);
  if (name == "kd" || name == "kleene-dienes" || name == "kleenedienes") return BaseImplication::KleeneDienes;
  if (name == "rc" || name == "reichenbach") return BaseImplication::Reichenbach;
  if (name == "lk" || name == "lukasiewicz") return BaseImplication::Lukasiewicz;
  if (name == "g" || name == "godel" || name == "goedel") return BaseImplication::Godel;
  if (name == "gg" || name == "goguen") return BaseImplication::Goguen;
  throw std::invalid_argument("unknown implication '" + std::string(raw) + "'");
}

std::string format_real(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

TruthValue::TruthValue(double v) : value_(v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("truth value " + format_real(v) + " outside [0,1]");
  }
}

// ---------------------------------------------------------------------------

Implication Implication::sigmoidal(BaseImplication inner, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("sigmoidal spread must be a positive finite real, got " + format_real(s));
  }
  Implication imp(inner);
  imp.spread_ = s;
  return imp;
}

Implication Implication::parse(std::string_view name, double default_s) {
  std::string_view body = name;
  double s = default_s;
  if (auto at = body.find('@'); at != std::string_view::npos) {
    const auto num = body.substr(at + 1);
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), s);
    if (ec != std::errc() || ptr != num.data() + num.size()) {
      throw std::invalid_argument("bad spread in implication '" + std::string(name) + "'");
    }
    body = body.substr(0, at);
  }
  constexpr std::string_view prefixes[] = {"sigmoidal-", "sigmoidal_", "sigmoid-", "s-"};
  for (auto prefix : prefixes) {
    if (body.starts_with(prefix)) {
      return sigmoidal(parse_base(body.substr(prefix.size())), s);
    }
  }
  return Implication(parse_base(body));
}

bool Implication::is_s_implication() const noexcept {
  return base_ == BaseImplication::KleeneDienes || base_ == BaseImplication::Reichenbach ||
         base_ == BaseImplication::Lukasiewicz;
}

bool Implication::is_r_implication() const noexcept {
  return base_ == BaseImplication::Lukasiewicz || base_ == BaseImplication::Godel || base_ == BaseImplication::Goguen;
}

std::string Implication::name() const {
  std::string out(short_name(base_));
  if (is_sigmoidal()) out = "sigmoidal-" + out + "@" + format_real(spread_);
  return out;
}

std::string_view short_name(BaseImplication kind) noexcept {
  switch (kind) {
    case BaseImplication::KleeneDienes: return "kd";
    case BaseImplication::Reichenbach: return "rc";
    case BaseImplication::Lukasiewicz: return "lk";
    case BaseImplication::Godel: return "godel";
    case BaseImplication::Goguen: return "goguen";
  }
  return "?";
}

TNorm TNorm::yager(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("Yager t-norm requires p >= 1, got " + format_real(p));
  }
  TNorm t(TNormKind::Yager);
  t.p_ = p;
  return t;
}

TNorm TNorm::parse(std::string_view raw, double yager_p) {
  const std::string name = lower(raw);
  if (name == "godel" || name == "min" || name == "goedel") return TNormKind::Godel;
  if (name == "product" || name == "prod") return TNormKind::Product;
  if (name == "lukasiewicz" || name == "lk") return TNormKind::Lukasiewicz;
  if (name == "yager") return yager(yager_p);
  throw std::invalid_argument("unknown t-norm '" + std::string(raw) + "'");
}

std::string TNorm::name() const {
  switch (kind_) {
    case TNormKind::Godel: return "godel";
    case TNormKind::Product: return "product";
    case TNormKind::Lukasiewicz: return "lukasiewicz";
    case TNormKind::Yager: return "yager@" + format_real(p_);
  }
  return "?";
}

AggregatorKind parse_aggregator(std::string_view raw) {
  const std::string name = lower(raw);
  if (name == "product" || name == "prod") return AggregatorKind::Product;
  if (name == "log-product" || name == "logproduct" || name == "log_product") return AggregatorKind::LogProduct;
  if (name == "minimum" || name == "min") return AggregatorKind::Minimum;
  throw std::invalid_argument("unknown aggregator '" + std::string(raw) + "'");
}

std::string_view to_string(AggregatorKind kind) noexcept {
  switch (kind) {
    case AggregatorKind::Product: return "product";
    case AggregatorKind::LogProduct: return "log-product";
    case AggregatorKind::Minimum: return "minimum";
  }
  return "?";
}

std::string OperatorSuite::describe() const {
  return "T=" + conjunction.name() + " S=dual(" + disjunction.name() + ") I=" + implication.name() +
         " A=" + std::string(to_string(aggregator));
}

// ---------------------------------------------------------------------------

namespace ops {

double tnorm(const TNorm& kind, double a, double b) noexcept {
  switch (kind.kind()) {
    case TNormKind::Godel: return std::min(a, b);
    case TNormKind::Product: return a * b;
    case TNormKind::Lukasiewicz: return std::max(a + b - 1.0, 0.0);
    case TNormKind::Yager: {
      const double p = kind.p();
      const double r = std::pow(std::pow(1.0 - a, p) + std::pow(1.0 - b, p), 1.0 / p);
      return std::max(1.0 - r, 0.0);
    }
  }
  return 0.0;
}

BinaryGrad tnorm_grad(const TNorm& kind, double a, double b) noexcept {
  switch (kind.kind()) {
    case TNormKind::Godel:
      return a <= b ? BinaryGrad{1.0, 0.0} : BinaryGrad{0.0, 1.0};
    case TNormKind::Product:
      return {b, a};
    case TNormKind::Lukasiewicz:
      return a + b - 1.0 >= 0.0 ? BinaryGrad{1.0, 1.0} : BinaryGrad{0.0, 0.0};
    case TNormKind::Yager: {
      const double p = kind.p();
      const double ua = 1.0 - a;
      const double ub = 1.0 - b;
      const double r = std::pow(std::pow(ua, p) + std::pow(ub, p), 1.0 / p);
      if (r > 1.0) return {0.0, 0.0};
      if (r == 0.0) {
        // Limit along the diagonal.
        const double g = std::pow(2.0, (1.0 - p) / p);
        return {g, g};
      }
      return {std::pow(ua / r, p - 1.0), std::pow(ub / r, p - 1.0)};
    }
  }
  return {};
}

double tconorm(const TNorm& kind, double a, double b) noexcept {
  return 1.0 - tnorm(kind, 1.0 - a, 1.0 - b);
}

BinaryGrad tconorm_grad(const TNorm& kind, double a, double b) noexcept {
  return tnorm_grad(kind, 1.0 - a, 1.0 - b);
}

double base_implication(BaseImplication kind, double a, double c) noexcept {
  switch (kind) {
    case BaseImplication::KleeneDienes: return std::max(1.0 - a, c);
    case BaseImplication::Reichenbach: return 1.0 - a + a * c;
    case BaseImplication::Lukasiewicz: return std::min(1.0 - a + c, 1.0);
    case BaseImplication::Godel: return a <= c ? 1.0 : c;
    case BaseImplication::Goguen: return a <= c ? 1.0 : c / a;
  }
  return 0.0;
}

// Ties take the unsatisfied-side derivative so that they still carry signal,
// except Kleene-Dienes, whose max splits evenly (keeps D_c(a,c) = D_na(1-c,1-a)).
GradPair base_implication_grad(BaseImplication kind, double a, double c) noexcept {
  switch (kind) {
    case BaseImplication::KleeneDienes:
      if (1.0 - a == c) return {0.5, 0.5};
      return 1.0 - a < c ? GradPair{1.0, 0.0} : GradPair{0.0, 1.0};
    case BaseImplication::Reichenbach:
      return {a, 1.0 - c};
    case BaseImplication::Lukasiewicz:
      return a >= c ? GradPair{1.0, 1.0} : GradPair{0.0, 0.0};
    case BaseImplication::Godel:
      return a >= c ? GradPair{1.0, 0.0} : GradPair{0.0, 0.0};
    case BaseImplication::Goguen: {
      if (a < c) return {0.0, 0.0};
      const double denom = std::max(a, kEpsilon);
      return {1.0 / denom, c / (denom * denom)};
    }
  }
  return {};
}

// ((1+e^{s/2}) sigma(s v - s/2) - 1) / (e^{s/2} - 1) rewritten with tanh;
// equals 1/2 + coth(s/4) tanh((s v - s/2)/2) / 2.
double sigmoid_squash(double s, double value) noexcept {
  const double half = s / 2.0;
  const double x = s * value - half;
  const double out = 0.5 + 0.5 * std::tanh(x / 2.0) / std::tanh(half / 2.0);
  return std::clamp(out, 0.0, 1.0);
}

double sigmoid_squash_grad(double s, double value) noexcept {
  const double half = s / 2.0;
  const double x = s * value - half;
  const double ch = std::cosh(x / 2.0);
  return (s / 4.0) / (ch * ch) / std::tanh(half / 2.0);
}

double implication(const Implication& kind, double a, double c) noexcept {
  const double v = base_implication(kind.base(), a, c);
  return kind.is_sigmoidal() ? sigmoid_squash(kind.spread(), v) : v;
}

GradPair implication_grad(const Implication& kind, double a, double c) noexcept {
  GradPair g = base_implication_grad(kind.base(), a, c);
  if (kind.is_sigmoidal()) {
    const double outer = sigmoid_squash_grad(kind.spread(), base_implication(kind.base(), a, c));
    g.d_consequent *= outer;
    g.d_neg_antecedent *= outer;
  }
  return g;
}

double aggregate(AggregatorKind kind, std::span<const double> xs) noexcept {
  switch (kind) {
    case AggregatorKind::Product: {
      double acc = 1.0;
      for (double x : xs) acc *= x;
      return acc;
    }
    case AggregatorKind::LogProduct: {
      double acc = 0.0;
      for (double x : xs) acc += std::log(std::max(x, kEpsilon));
      return acc;
    }
    case AggregatorKind::Minimum: {
      double acc = 1.0;
      for (double x : xs) acc = std::min(acc, x);
      return acc;
    }
  }
  return 0.0;
}

void aggregate_grad(AggregatorKind kind, std::span<const double> xs, std::span<double> out) noexcept {
  const std::size_t n = xs.size();
  switch (kind) {
    case AggregatorKind::Product: {
      // prefix/suffix products so that zeros are handled exactly
      double prefix = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = prefix;
        prefix *= xs[i];
      }
      double suffix = 1.0;
      for (std::size_t i = n; i-- > 0;) {
        out[i] *= suffix;
        suffix *= xs[i];
      }
      return;
    }
    case AggregatorKind::LogProduct:
      for (std::size_t i = 0; i < n; ++i) out[i] = xs[i] > kEpsilon ? 1.0 / xs[i] : 0.0;
      return;
    case AggregatorKind::Minimum: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (xs[i] < xs[best]) best = i;
      }
      for (std::size_t i = 0; i < n; ++i) out[i] = i == best ? 1.0 : 0.0;
      return;
    }
  }
}

}  // namespace ops

// ---------------------------------------------------------------------------

TruthValue negate(TruthValue a) noexcept { return TruthValue(ops::negate(a.value())); }

TruthValue tnorm(const TNorm& kind, TruthValue a, TruthValue b) {
  return TruthValue(ops::tnorm(kind, a.value(), b.value()));
}

TruthValue tconorm(const TNorm& kind, TruthValue a, TruthValue b) {
  return TruthValue(ops::tconorm(kind, a.value(), b.value()));
}

TruthValue implication(const Implication& kind, TruthValue a, TruthValue c) {
  return TruthValue(ops::implication(kind, a.value(), c.value()));
}

GradPair implication_grad(const Implication& kind, TruthValue a, TruthValue c) {
  return ops::implication_grad(kind, a.value(), c.value());
}

TruthValue sigmoidal_transform(BaseImplication inner, double s, TruthValue a, TruthValue c) {
  return implication(Implication::sigmoidal(inner, s), a, c);
}

double aggregate(AggregatorKind kind, std::span<const TruthValue> xs) {
  if (xs.empty()) throw std::invalid_argument("aggregate of an empty list");
  std::vector<double> raw;
  raw.reserve(xs.size());
  for (auto x : xs) raw.push_back(x.value());
  return ops::aggregate(kind, raw);
}

}  // namespace dfl
