#pragma once

// Immutable first-order formula trees (function-free, prenex normal form).

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dfl {

class Formula;

namespace node {

struct Atom {
  std::string predicate;
  std::vector<std::string> args;  // variable symbols
};
struct Not {
  std::shared_ptr<const Formula> operand;
};
struct And {
  std::shared_ptr<const Formula> lhs, rhs;
};
struct Or {
  std::shared_ptr<const Formula> lhs, rhs;
};
struct Implies {
  std::shared_ptr<const Formula> antecedent, consequent;
};
struct Forall {
  std::string var;
  std::shared_ptr<const Formula> body;
};

}  // namespace node

enum class FormulaKind { Atom, Not, And, Or, Implies, Forall };

/// A formula node. Instances are only created through the static factories,
/// which reject quantifiers below a connective; every Formula is therefore in
/// prenex normal form. Shared subtrees are immutable and safe to share across
/// threads.
class Formula {
public:
  using Node = std::variant<node::Atom, node::Not, node::And, node::Or, node::Implies, node::Forall>;
  using Ptr = std::shared_ptr<const Formula>;

  static Ptr atom(std::string predicate, std::vector<std::string> args);
  static Ptr negation(Ptr operand);
  static Ptr conjunction(Ptr lhs, Ptr rhs);
  static Ptr disjunction(Ptr lhs, Ptr rhs);
  static Ptr implies(Ptr antecedent, Ptr consequent);
  static Ptr forall(std::string var, Ptr body);
  /// forall v1. forall v2. ... body
  static Ptr forall(const std::vector<std::string>& vars, Ptr body);

  [[nodiscard]] FormulaKind kind() const noexcept { return static_cast<FormulaKind>(node_.index()); }
  [[nodiscard]] const Node& node() const noexcept { return node_; }
  [[nodiscard]] bool has_quantifier() const noexcept { return has_quantifier_; }

  template <class T>
  [[nodiscard]] const T& as() const {
    return std::get<T>(node_);
  }

  /// Fully parenthesised text accepted by parse_formula.
  [[nodiscard]] std::string to_string() const;

  /// Structural equality.
  friend bool operator==(const Formula& a, const Formula& b);

private:
  Formula(Node n, bool has_quantifier) : node_(std::move(n)), has_quantifier_(has_quantifier) {}

  Node node_;
  bool has_quantifier_;
};

/// Variables of the quantifier prefix, outermost first.
std::vector<std::string> quantified_variables(const Formula& f);

/// The formula below the quantifier prefix.
const Formula& matrix(const Formula& f);
Formula::Ptr matrix_ptr(const Formula::Ptr& f);

/// Antecedent and consequent when the quantifier-free body is an implication.
std::optional<std::pair<Formula::Ptr, Formula::Ptr>> implication_instances(const Formula::Ptr& f);

/// (predicate, arity) pairs in order of first appearance.
std::vector<std::pair<std::string, std::size_t>> predicates_of(const Formula& f);

/// Variables used in atoms but not bound by an enclosing Forall.
std::vector<std::string> free_variables(const Formula& f);

}  // namespace dfl
