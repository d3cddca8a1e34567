#include "dfl/property_audit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dfl {

std::string_view to_string(Property p) noexcept {
  switch (p) {
    case Property::FuzzyImplication: return "FI";
    case Property::LeftNeutrality: return "LN";
    case Property::ExchangePrinciple: return "EP";
    case Property::IdentityPrinciple: return "IP";
    case Property::ContrapositiveSymmetry: return "CP";
    case Property::LeftContrapositiveSymmetry: return "L-CP";
    case Property::RightContrapositiveSymmetry: return "R-CP";
    case Property::DifferentiableSymmetry: return "CDS";
  }
  return "?";
}

namespace {

std::optional<Property> property_from(std::string_view s) {
  for (auto p : kAllProperties) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

}  // namespace

const PropertyResult& PropertyReport::at(Property p) const {
  for (const auto& r : results) {
    if (r.property == p) return r;
  }
  throw std::out_of_range("property not audited: " + std::string(to_string(p)));
}

std::string PropertyReport::to_text() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "implication=" << implication << '\n' << "grid_n=" << grid_n << '\n';
  for (const auto& r : results) {
    os << to_string(r.property) << ".max_violation=" << r.max_violation << '\n';
    os << to_string(r.property) << ".holds=" << (r.holds ? "true" : "false") << '\n';
  }
  return os.str();
}

PropertyReport PropertyReport::from_text(std::string_view text) {
  PropertyReport report;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "implication") {
      report.implication = value;
      continue;
    }
    if (key == "grid_n") {
      report.grid_n = std::stoi(value);
      continue;
    }
    const auto dot = key.find('.');
    if (dot == std::string::npos) throw std::invalid_argument("bad report key '" + key + "'");
    auto prop = property_from(std::string_view(key).substr(0, dot));
    if (!prop) throw std::invalid_argument("unknown property in '" + key + "'");
    auto it = std::find_if(report.results.begin(), report.results.end(),
                           [&](const PropertyResult& r) { return r.property == *prop; });
    if (it == report.results.end()) {
      report.results.push_back({*prop, 0.0, true});
      it = std::prev(report.results.end());
    }
    const std::string field = key.substr(dot + 1);
    if (field == "max_violation") {
      it->max_violation = std::stod(value);
    } else if (field == "holds") {
      it->holds = value == "true";
    } else {
      throw std::invalid_argument("unknown field in '" + key + "'");
    }
  }
  return report;
}

ImplicationFunctions ImplicationFunctions::of(const Implication& kind) {
  ImplicationFunctions fns;
  fns.value = [kind](double a, double c) { return ops::implication(kind, a, c); };
  fns.grad = [kind](double a, double c) { return ops::implication_grad(kind, a, c); };
  switch (kind.base()) {
    case BaseImplication::KleeneDienes:
      fns.tie_distance = [](double a, double c) { return std::abs(1.0 - a - c); };
      break;
    case BaseImplication::Lukasiewicz:
    case BaseImplication::Godel:
    case BaseImplication::Goguen:
      fns.tie_distance = [](double a, double c) { return std::abs(a - c); };
      break;
    case BaseImplication::Reichenbach:
      break;
  }
  return fns;
}

PropertyReport audit_properties(const ImplicationFunctions& fns, std::string name, int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("audit grid needs at least 2 points per axis");
  const auto n = static_cast<std::size_t>(grid_n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  // 1 - x[i] taken from the grid itself, exactly
  auto neg = [&](std::size_t i) { return x[n - 1 - i]; };
  const auto& I = fns.value;

  double fi = std::max({std::abs(I(0.0, 0.0) - 1.0), std::abs(I(1.0, 1.0) - 1.0), std::abs(I(1.0, 0.0))});
  double ln = 0, ep = 0, ip = 0, cp = 0, lcp = 0, rcp = 0, cds = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ln = std::max(ln, std::abs(I(1.0, x[i]) - x[i]));
    ip = std::max(ip, std::abs(I(x[i], x[i]) - 1.0));
    for (std::size_t j = 0; j < n; ++j) {
      const double a = x[i];
      const double c = x[j];
      if (i + 1 < n) fi = std::max(fi, I(x[i + 1], c) - I(a, c));
      if (j + 1 < n) fi = std::max(fi, I(a, c) - I(a, x[j + 1]));
      cp = std::max(cp, std::abs(I(a, c) - I(neg(j), neg(i))));
      lcp = std::max(lcp, std::abs(I(neg(i), c) - I(neg(j), a)));
      rcp = std::max(rcp, std::abs(I(a, neg(j)) - I(c, neg(i))));
      for (std::size_t k = 0; k < n; ++k) {
        const double b = x[k];
        ep = std::max(ep, std::abs(I(a, I(b, c)) - I(b, I(a, c))));
      }
      if (fns.grad) {
        const double ma = neg(j);
        const double mc = neg(i);
        if (fns.tie_distance && (fns.tie_distance(a, c) < kTieMargin || fns.tie_distance(ma, mc) < kTieMargin)) {
          continue;
        }
        cds = std::max(cds, std::abs(fns.grad(a, c).d_consequent - fns.grad(ma, mc).d_neg_antecedent));
      }
    }
  }

  PropertyReport report;
  report.implication = std::move(name);
  report.grid_n = grid_n;
  auto add = [&](Property p, double v) { report.results.push_back({p, v, v < kAuditTolerance}); };
  add(Property::FuzzyImplication, fi);
  add(Property::LeftNeutrality, ln);
  add(Property::ExchangePrinciple, ep);
  add(Property::IdentityPrinciple, ip);
  add(Property::ContrapositiveSymmetry, cp);
  add(Property::LeftContrapositiveSymmetry, lcp);
  add(Property::RightContrapositiveSymmetry, rcp);
  add(Property::DifferentiableSymmetry, cds);
  return report;
}

PropertyReport audit_properties(const Implication& kind, int grid_n) {
  return audit_properties(ImplicationFunctions::of(kind), kind.name(), grid_n);
}

std::vector<CatalogEntry> default_catalog(double sigmoidal_spread) {
  using P = Property;
  // S-implications: everything but IP.
  const std::vector<std::pair<P, bool>> s_claims = {
      {P::FuzzyImplication, true}, {P::LeftNeutrality, true}, {P::ExchangePrinciple, true},
      {P::IdentityPrinciple, false}, {P::ContrapositiveSymmetry, true}, {P::LeftContrapositiveSymmetry, true},
      {P::RightContrapositiveSymmetry, true}, {P::DifferentiableSymmetry, true},
  };
  const std::vector<std::pair<P, bool>> all_claims = {
      {P::FuzzyImplication, true}, {P::LeftNeutrality, true}, {P::ExchangePrinciple, true},
      {P::IdentityPrinciple, true}, {P::ContrapositiveSymmetry, true}, {P::LeftContrapositiveSymmetry, true},
      {P::RightContrapositiveSymmetry, true}, {P::DifferentiableSymmetry, true},
  };
  // R-implications that are not S-implications: LN, EP, IP only.
  const std::vector<std::pair<P, bool>> r_claims = {
      {P::FuzzyImplication, true}, {P::LeftNeutrality, true}, {P::ExchangePrinciple, true},
      {P::IdentityPrinciple, true}, {P::ContrapositiveSymmetry, false}, {P::LeftContrapositiveSymmetry, false},
      {P::RightContrapositiveSymmetry, false}, {P::DifferentiableSymmetry, false},
  };
  // The sigmoidal wrap keeps the equational properties of its inner implication
  // (IP and the contrapositive family) but not LN or EP.
  auto sigmoidal_claims = [](const std::vector<std::pair<P, bool>>& inner) {
    std::vector<std::pair<P, bool>> out;
    for (auto [p, v] : inner) {
      if (p == P::LeftNeutrality || p == P::ExchangePrinciple) continue;
      out.emplace_back(p, v);
    }
    return out;
  };

  std::vector<CatalogEntry> catalog;
  auto add = [&](const Implication& imp, const std::vector<std::pair<P, bool>>& claims) {
    catalog.push_back({imp.name(), ImplicationFunctions::of(imp), claims});
  };
  add(BaseImplication::KleeneDienes, s_claims);
  add(BaseImplication::Reichenbach, s_claims);
  add(BaseImplication::Lukasiewicz, all_claims);
  add(BaseImplication::Godel, r_claims);
  add(BaseImplication::Goguen, r_claims);
  add(Implication::sigmoidal(BaseImplication::KleeneDienes, sigmoidal_spread), sigmoidal_claims(s_claims));
  add(Implication::sigmoidal(BaseImplication::Reichenbach, sigmoidal_spread), sigmoidal_claims(s_claims));
  add(Implication::sigmoidal(BaseImplication::Lukasiewicz, sigmoidal_spread), sigmoidal_claims(all_claims));
  return catalog;
}

int check_props(const std::vector<CatalogEntry>& catalog, int grid_n, std::ostream& out) {
  int status = 0;
  std::vector<std::string> verdicts;
  for (const auto& entry : catalog) {
    const PropertyReport report = audit_properties(entry.functions, entry.label, grid_n);
    out << report.to_text() << '\n';
    std::string line = entry.label + ":";
    bool ok = true;
    int unwitnessed = 0;
    for (const auto& r : report.results) {
      line += ' ';
      line += to_string(r.property);
      line += r.holds ? "=yes" : "=no";
      for (auto [p, expected] : entry.claims) {
        if (p != r.property || expected == r.holds) continue;
        if (expected) {
          ok = false;
          line += "(!)";
        } else {
          // A grid without a counterexample cannot refute "fails".
          line += "(?)";
          ++unwitnessed;
        }
      }
    }
    line += ok ? "  [ok]" : "  [CONTRADICTS CLAIM]";
    if (unwitnessed > 0) line += " " + std::to_string(unwitnessed) + " failure(s) not witnessed on this grid";
    if (!ok) status = 1;
    verdicts.push_back(std::move(line));
  }
  for (const auto& v : verdicts) out << v << '\n';
  return status;
}

}  // namespace dfl
