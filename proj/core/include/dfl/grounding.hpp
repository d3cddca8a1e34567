#pragma once

// Valuation of prenex formulas over a batch of embedded objects, recorded on
// a tape so that reverse-mode differentiation yields the derivative of the
// result with respect to every ground atom.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dfl/formula.hpp"
#include "dfl/fuzzy_ops.hpp"
#include "dfl/knowledge_base.hpp"

namespace dfl {

using ObjectIndex = std::uint32_t;

/// Objects assigned to the quantified variables, in prefix order.
using Assignment = std::vector<ObjectIndex>;

struct GroundAtom {
  std::string predicate;
  std::vector<ObjectIndex> args;

  friend auto operator<=>(const GroundAtom&, const GroundAtom&) = default;
  friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
};

/// The embedded interpretation: maps ground atoms over object vectors to
/// truth values in [0,1].
class Interpretation {
public:
  virtual ~Interpretation() = default;

  /// Dimension of the object vectors this interpretation accepts.
  [[nodiscard]] virtual std::size_t object_dim() const = 0;

  /// Fills out[i] with the truth of atoms[i]; `objects` holds one object per row.
  virtual void truths(const Eigen::MatrixXd& objects, std::span<const GroundAtom> atoms,
                      std::span<double> out) const = 0;
};

struct DflStructure {
  const Interpretation& interpretation;
};

struct GroundingBatch {
  /// One object per row.
  Eigen::MatrixXd objects;
  /// Explicit assignment lists keyed by the number of quantified variables.
  /// A formula whose variable count has no entry is grounded over the full
  /// cross product of all objects.
  std::map<std::size_t, std::vector<Assignment>> assignments;

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(objects.rows()); }
  [[nodiscard]] std::vector<Assignment> assignments_for(std::size_t num_vars) const;
};

/// All b^m tuples in lexicographic order.
std::vector<Assignment> cross_product(std::size_t num_vars, std::size_t batch_size);

/// The full cross product if it has at most `max_instances` elements,
/// otherwise `max_instances` distinct tuples drawn uniformly at random.
/// Output is sorted and depends only on the arguments.
std::vector<Assignment> subsample_assignments(std::size_t num_vars, std::size_t batch_size, std::size_t max_instances,
                                              std::uint64_t rng_seed);

enum class TapeOp : std::uint8_t { Leaf, Not, And, Or, Implies, Aggregate, Loss };

struct TapeNode {
  TapeOp op;
  /// Leaf: atom index. Unary/binary: operand nodes. Aggregate/Loss: [lhs, rhs)
  /// range into ValuationTape::links.
  std::uint32_t lhs = 0;
  std::uint32_t rhs = 0;
  double value = 0.0;
  double adjoint = 0.0;
};

struct FormulaRecord {
  Formula::Ptr formula;
  double weight = 1.0;
  std::uint32_t root = 0;  // the Aggregate node
  std::vector<Assignment> assignments;
  /// Root of the quantifier-free body for each assignment, same order.
  std::vector<std::uint32_t> instance_nodes;
};

/// Nodes are stored in topological order (operands before users).
class ValuationTape {
public:
  OperatorSuite suite;
  std::vector<TapeNode> nodes;
  std::vector<std::uint32_t> links;
  std::vector<GroundAtom> atoms;
  std::vector<double> atom_truths;
  std::vector<FormulaRecord> formulas;
  std::uint32_t root = 0;
  bool has_adjoints = false;
  std::size_t backward_visits = 0;

  [[nodiscard]] double value() const { return nodes.at(root).value; }
  [[nodiscard]] double formula_value(std::size_t k) const { return nodes.at(formulas.at(k).root).value; }
  [[nodiscard]] std::span<const std::uint32_t> children(const TapeNode& n) const {
    return {links.data() + n.lhs, links.data() + n.rhs};
  }
  /// Index into `atoms`, or -1 when the atom is not on the tape.
  [[nodiscard]] std::ptrdiff_t find_atom(const GroundAtom& atom) const;
};

struct Valuation {
  double value = 0.0;
  ValuationTape tape;
};

/// Recursively applies the connectives to the formula over every assignment of
/// its quantifier prefix and reduces the instances with the suite's
/// aggregator. Assignments are processed in sorted order.
/// Throws std::invalid_argument when the object dimension does not match the
/// interpretation, and std::domain_error when the interpretation returns a
/// value outside [0,1].
Valuation evaluate(const DflStructure& structure, const OperatorSuite& suite, const Formula::Ptr& f,
                   const GroundingBatch& batch);

/// loss = -sum_k w_k e(phi_k). With the log-product aggregator e is the
/// log-valued score, so weights multiply log-truths. Identical ground atoms
/// across formulas share a leaf.
Valuation dfl_loss(const DflStructure& structure, const OperatorSuite& suite, const KnowledgeBase& kb,
                   const GroundingBatch& batch);

/// d(root)/d(atom) * seed for every atom on the tape, aligned with tape.atoms.
/// Also leaves node adjoints on the tape.
std::vector<double> backward(ValuationTape& tape, double seed = 1.0);

std::map<GroundAtom, double> adjoint_map(const ValuationTape& tape, std::span<const double> adjoints);

/// CSV `predicate,objects,truth,adjoint`; objects are ';'-separated indices.
void write_adjoint_csv(std::ostream& out, const ValuationTape& tape, std::span<const double> adjoints);

}  // namespace dfl
