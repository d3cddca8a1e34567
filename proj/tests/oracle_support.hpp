#pragma once

// Shared by the grounding tests and the acceptance checks: a lookup-table
// interpretation and a recursive evaluator written independently of the
// engine.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfl/formula.hpp"
#include "dfl/grounding.hpp"

namespace dfl::testing {

// Truths looked up by ground atom; missing atoms read as `fallback`.
class TableInterpretation final : public Interpretation {
public:
  std::map<GroundAtom, double> table;
  double fallback = 0.5;

  std::size_t object_dim() const override { return 1; }
  void truths(const Eigen::MatrixXd&, std::span<const GroundAtom> atoms, std::span<double> out) const override {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const auto it = table.find(atoms[i]);
      out[i] = it == table.end() ? fallback : it->second;
    }
  }
};

inline GroundingBatch objects(std::size_t n) { return GroundingBatch{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 1), {}}; }

// Closed forms written out independently of the library kernels.
struct OracleSuite {
  std::string name;
  OperatorSuite suite;
  std::function<double(double, double)> t, s, i;
  std::function<double(const std::vector<double>&)> agg;
};

inline std::vector<OracleSuite> oracle_suites() {
  std::vector<OracleSuite> out;
  {
    OracleSuite o{"product/reichenbach", {}, {}, {}, {}, {}};
    o.suite.conjunction = TNormKind::Product;
    o.suite.disjunction = TNormKind::Product;
    o.suite.implication = BaseImplication::Reichenbach;
    o.suite.aggregator = AggregatorKind::Product;
    o.t = [](double a, double b) { return a * b; };
    o.s = [](double a, double b) { return a + b - a * b; };
    o.i = [](double a, double c) { return 1 - a + a * c; };
    o.agg = [](const std::vector<double>& v) {
      double p = 1;
      for (double x : v) p *= x;
      return p;
    };
    out.push_back(o);
  }
  {
    OracleSuite o{"godel/kleene-dienes/min", {}, {}, {}, {}, {}};
    o.suite.conjunction = TNormKind::Godel;
    o.suite.disjunction = TNormKind::Godel;
    o.suite.implication = BaseImplication::KleeneDienes;
    o.suite.aggregator = AggregatorKind::Minimum;
    o.t = [](double a, double b) { return std::min(a, b); };
    o.s = [](double a, double b) { return std::max(a, b); };
    o.i = [](double a, double c) { return std::max(1 - a, c); };
    o.agg = [](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); };
    out.push_back(o);
  }
  {
    OracleSuite o{"lukasiewicz/log-product", {}, {}, {}, {}, {}};
    o.suite.conjunction = TNormKind::Lukasiewicz;
    o.suite.disjunction = TNormKind::Lukasiewicz;
    o.suite.implication = BaseImplication::Lukasiewicz;
    o.suite.aggregator = AggregatorKind::LogProduct;
    o.t = [](double a, double b) { return std::max(0.0, a + b - 1); };
    o.s = [](double a, double b) { return std::min(1.0, a + b); };
    o.i = [](double a, double c) { return std::min(1.0, 1 - a + c); };
    o.agg = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += std::log(std::max(x, 1e-6));
      return s;
    };
    out.push_back(o);
  }
  {
    OracleSuite o{"yager/goguen", {}, {}, {}, {}, {}};
    o.suite.conjunction = TNorm::yager(2);
    o.suite.disjunction = TNorm::yager(2);
    o.suite.implication = BaseImplication::Goguen;
    o.suite.aggregator = AggregatorKind::Product;
    o.t = [](double a, double b) { return std::max(0.0, 1 - std::sqrt((1 - a) * (1 - a) + (1 - b) * (1 - b))); };
    o.s = [](double a, double b) { return std::min(1.0, std::sqrt(a * a + b * b)); };
    o.i = [](double a, double c) { return a <= c ? 1.0 : c / a; };
    o.agg = out.front().agg;
    out.push_back(o);
  }
  return out;
}

inline double oracle_eval(const OracleSuite& o, const Formula& f, std::map<std::string, ObjectIndex>& env,
                   const TableInterpretation& interp) {
  switch (f.kind()) {
    case FormulaKind::Atom: {
      const auto& a = f.as<node::Atom>();
      GroundAtom g{a.predicate, {}};
      for (const auto& v : a.args) g.args.push_back(env.at(v));
      const auto it = interp.table.find(g);
      return it == interp.table.end() ? interp.fallback : it->second;
    }
    case FormulaKind::Not: return 1 - oracle_eval(o, *f.as<node::Not>().operand, env, interp);
    case FormulaKind::And: {
      const auto& n = f.as<node::And>();
      return o.t(oracle_eval(o, *n.lhs, env, interp), oracle_eval(o, *n.rhs, env, interp));
    }
    case FormulaKind::Or: {
      const auto& n = f.as<node::Or>();
      return o.s(oracle_eval(o, *n.lhs, env, interp), oracle_eval(o, *n.rhs, env, interp));
    }
    case FormulaKind::Implies: {
      const auto& n = f.as<node::Implies>();
      return o.i(oracle_eval(o, *n.antecedent, env, interp), oracle_eval(o, *n.consequent, env, interp));
    }
    case FormulaKind::Forall: break;
  }
  throw std::logic_error("quantifier below the prefix");
}

// Joint grounding over all tuples, enumerated recursively.
inline double oracle_value(const OracleSuite& o, const Formula& f, std::size_t n_objects, const TableInterpretation& interp) {
  const auto vars = quantified_variables(f);
  std::vector<double> instances;
  std::map<std::string, ObjectIndex> env;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == vars.size()) {
      instances.push_back(oracle_eval(o, matrix(f), env, interp));
      return;
    }
    for (ObjectIndex i = 0; i < n_objects; ++i) {
      env[vars[k]] = i;
      rec(k + 1);
    }
  };
  rec(0);
  return o.agg(instances);
}

inline TableInterpretation chair_example() {
  TableInterpretation t;
  t.table = {
      {{"chair", {0}}, 0.9},        {{"chair", {1}}, 0.4},        {{"cushion", {0}}, 0.05},
      {{"cushion", {1}}, 0.5},      {{"armRest", {0}}, 0.05},     {{"armRest", {1}}, 0.1},
      {{"partOf", {0, 0}}, 0.001},  {{"partOf", {1, 1}}, 0.001},  {{"partOf", {0, 1}}, 0.01},
      {{"partOf", {1, 0}}, 0.95},
  };
  return t;
}

inline const char* kChair = "forall x y. chair(x) & partOf(y,x) -> cushion(y) | armRest(y)";

// Central differences of `value(table)` for every atom on the tape.
inline std::vector<double> numeric_adjoints(const ValuationTape& tape, TableInterpretation interp,
                                     const std::function<double(const TableInterpretation&)>& value, double h = 1e-6) {
  std::vector<double> out;
  for (std::size_t k = 0; k < tape.atoms.size(); ++k) {
    const double v = tape.atom_truths[k];
    interp.table[tape.atoms[k]] = v + h;
    const double up = value(interp);
    interp.table[tape.atoms[k]] = v - h;
    const double down = value(interp);
    interp.table[tape.atoms[k]] = v;
    out.push_back((up - down) / (2 * h));
  }
  return out;
}

// Random formula over p/1, q/1, r/2 with `connectives` connectives, quantified over `vars`.
inline Formula::Ptr random_formula(std::mt19937_64& rng, int connectives, const std::vector<std::string>& vars) {
  auto var = [&] { return vars[std::uniform_int_distribution<std::size_t>(0, vars.size() - 1)(rng)]; };
  std::function<Formula::Ptr(int)> gen = [&](int budget) -> Formula::Ptr {
    if (budget == 0) {
      switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0: return Formula::atom("p", {var()});
        case 1: return Formula::atom("q", {var()});
        default: return Formula::atom("r", {var(), var()});
      }
    }
    const int left = std::uniform_int_distribution<int>(0, budget - 1)(rng);
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
      case 0: return Formula::negation(gen(budget - 1));
      case 1: return Formula::conjunction(gen(left), gen(budget - 1 - left));
      case 2: return Formula::disjunction(gen(left), gen(budget - 1 - left));
      default: return Formula::implies(gen(left), gen(budget - 1 - left));
    }
  };
  return Formula::forall(vars, gen(connectives));
}

}  // namespace dfl::testing
