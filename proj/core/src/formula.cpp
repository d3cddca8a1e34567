#include "dfl/formula.hpp"

#include <algorithm>
#include <stdexcept>

namespace dfl {

namespace {

void require_operand(const Formula::Ptr& f, const char* what) {
  if (!f) throw std::invalid_argument(std::string(what) + ": null operand");
  if (f->has_quantifier()) {
    throw std::invalid_argument(std::string(what) + ": quantifier below a connective is not in prenex normal form");
  }
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void print(const Formula& f, std::string& out) {
  std::visit(overloaded{
                 [&](const node::Atom& n) {
                   out += n.predicate;
                   out += '(';
                   for (std::size_t i = 0; i < n.args.size(); ++i) {
                     if (i) out += ", ";
                     out += n.args[i];
                   }
                   out += ')';
                 },
                 [&](const node::Not& n) {
                   out += '~';
                   print(*n.operand, out);
                 },
                 [&](const node::And& n) {
                   out += '(';
                   print(*n.lhs, out);
                   out += " & ";
                   print(*n.rhs, out);
                   out += ')';
                 },
                 [&](const node::Or& n) {
                   out += '(';
                   print(*n.lhs, out);
                   out += " | ";
                   print(*n.rhs, out);
                   out += ')';
                 },
                 [&](const node::Implies& n) {
                   out += '(';
                   print(*n.antecedent, out);
                   out += " -> ";
                   print(*n.consequent, out);
                   out += ')';
                 },
                 [&](const node::Forall& n) {
                   out += "forall ";
                   out += n.var;
                   out += ". ";
                   print(*n.body, out);
                 },
             },
             f.node());
}

void collect_predicates(const Formula& f, std::vector<std::pair<std::string, std::size_t>>& out) {
  std::visit(overloaded{
                 [&](const node::Atom& n) {
                   const auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) {
                     return p.first == n.predicate && p.second == n.args.size();
                   });
                   if (it == out.end()) out.emplace_back(n.predicate, n.args.size());
                 },
                 [&](const node::Not& n) { collect_predicates(*n.operand, out); },
                 [&](const node::And& n) {
                   collect_predicates(*n.lhs, out);
                   collect_predicates(*n.rhs, out);
                 },
                 [&](const node::Or& n) {
                   collect_predicates(*n.lhs, out);
                   collect_predicates(*n.rhs, out);
                 },
                 [&](const node::Implies& n) {
                   collect_predicates(*n.antecedent, out);
                   collect_predicates(*n.consequent, out);
                 },
                 [&](const node::Forall& n) { collect_predicates(*n.body, out); },
             },
             f.node());
}

void collect_free(const Formula& f, std::vector<std::string>& bound, std::vector<std::string>& out) {
  std::visit(overloaded{
                 [&](const node::Atom& n) {
                   for (const auto& v : n.args) {
                     if (std::find(bound.begin(), bound.end(), v) == bound.end() &&
                         std::find(out.begin(), out.end(), v) == out.end()) {
                       out.push_back(v);
                     }
                   }
                 },
                 [&](const node::Not& n) { collect_free(*n.operand, bound, out); },
                 [&](const node::And& n) {
                   collect_free(*n.lhs, bound, out);
                   collect_free(*n.rhs, bound, out);
                 },
                 [&](const node::Or& n) {
                   collect_free(*n.lhs, bound, out);
                   collect_free(*n.rhs, bound, out);
                 },
                 [&](const node::Implies& n) {
                   collect_free(*n.antecedent, bound, out);
                   collect_free(*n.consequent, bound, out);
                 },
                 [&](const node::Forall& n) {
                   bound.push_back(n.var);
                   collect_free(*n.body, bound, out);
                   bound.pop_back();
                 },
             },
             f.node());
}

}  // namespace

Formula::Ptr Formula::atom(std::string predicate, std::vector<std::string> args) {
  if (predicate.empty()) throw std::invalid_argument("atom: empty predicate symbol");
  return Ptr(new Formula(node::Atom{std::move(predicate), std::move(args)}, false));
}

Formula::Ptr Formula::negation(Ptr operand) {
  require_operand(operand, "negation");
  return Ptr(new Formula(node::Not{std::move(operand)}, false));
}

Formula::Ptr Formula::conjunction(Ptr lhs, Ptr rhs) {
  require_operand(lhs, "conjunction");
  require_operand(rhs, "conjunction");
  return Ptr(new Formula(node::And{std::move(lhs), std::move(rhs)}, false));
}

Formula::Ptr Formula::disjunction(Ptr lhs, Ptr rhs) {
  require_operand(lhs, "disjunction");
  require_operand(rhs, "disjunction");
  return Ptr(new Formula(node::Or{std::move(lhs), std::move(rhs)}, false));
}

Formula::Ptr Formula::implies(Ptr antecedent, Ptr consequent) {
  require_operand(antecedent, "implication");
  require_operand(consequent, "implication");
  return Ptr(new Formula(node::Implies{std::move(antecedent), std::move(consequent)}, false));
}

Formula::Ptr Formula::forall(std::string var, Ptr body) {
  if (!body) throw std::invalid_argument("forall: null body");
  if (var.empty()) throw std::invalid_argument("forall: empty variable symbol");
  const auto inner = quantified_variables(*body);
  if (std::find(inner.begin(), inner.end(), var) != inner.end()) {
    throw std::invalid_argument("forall: variable '" + var + "' is bound twice");
  }
  return Ptr(new Formula(node::Forall{std::move(var), std::move(body)}, true));
}

Formula::Ptr Formula::forall(const std::vector<std::string>& vars, Ptr body) {
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = forall(*it, std::move(body));
  return body;
}

std::string Formula::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.kind() != b.kind()) return false;
  return std::visit(
      overloaded{
          [&](const node::Atom& n) {
            const auto& m = b.as<node::Atom>();
            return n.predicate == m.predicate && n.args == m.args;
          },
          [&](const node::Not& n) { return *n.operand == *b.as<node::Not>().operand; },
          [&](const node::And& n) {
            const auto& m = b.as<node::And>();
            return *n.lhs == *m.lhs && *n.rhs == *m.rhs;
          },
          [&](const node::Or& n) {
            const auto& m = b.as<node::Or>();
            return *n.lhs == *m.lhs && *n.rhs == *m.rhs;
          },
          [&](const node::Implies& n) {
            const auto& m = b.as<node::Implies>();
            return *n.antecedent == *m.antecedent && *n.consequent == *m.consequent;
          },
          [&](const node::Forall& n) {
            const auto& m = b.as<node::Forall>();
            return n.var == m.var && *n.body == *m.body;
          },
      },
      a.node());
}

std::vector<std::string> quantified_variables(const Formula& f) {
  std::vector<std::string> vars;
  const Formula* cur = &f;
  while (cur->kind() == FormulaKind::Forall) {
    const auto& q = cur->as<node::Forall>();
    vars.push_back(q.var);
    cur = q.body.get();
  }
  return vars;
}

const Formula& matrix(const Formula& f) {
  const Formula* cur = &f;
  while (cur->kind() == FormulaKind::Forall) cur = cur->as<node::Forall>().body.get();
  return *cur;
}

Formula::Ptr matrix_ptr(const Formula::Ptr& f) {
  Formula::Ptr cur = f;
  while (cur->kind() == FormulaKind::Forall) cur = cur->as<node::Forall>().body;
  return cur;
}

std::optional<std::pair<Formula::Ptr, Formula::Ptr>> implication_instances(const Formula::Ptr& f) {
  const Formula::Ptr body = matrix_ptr(f);
  if (body->kind() != FormulaKind::Implies) return std::nullopt;
  const auto& imp = body->as<node::Implies>();
  return std::make_pair(imp.antecedent, imp.consequent);
}

std::vector<std::pair<std::string, std::size_t>> predicates_of(const Formula& f) {
  std::vector<std::pair<std::string, std::size_t>> out;
  collect_predicates(f, out);
  return out;
}

std::vector<std::string> free_variables(const Formula& f) {
  std::vector<std::string> bound;
  std::vector<std::string> out;
  collect_free(f, bound, out);
  return out;
}

}  // namespace dfl
