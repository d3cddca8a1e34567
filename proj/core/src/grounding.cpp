#include "dfl/grounding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace dfl {

std::vector<Assignment> cross_product(std::size_t num_vars, std::size_t batch_size) {
  std::vector<Assignment> out;
  if (batch_size == 0 && num_vars > 0) return out;
  Assignment cur(num_vars, 0);
  for (;;) {
    out.push_back(cur);
    std::size_t k = num_vars;
    while (k > 0) {
      --k;
      if (++cur[k] < batch_size) break;
      cur[k] = 0;
      if (k == 0) return out;
    }
    if (num_vars == 0) return out;
  }
}

std::vector<Assignment> GroundingBatch::assignments_for(std::size_t num_vars) const {
  if (auto it = assignments.find(num_vars); it != assignments.end()) return it->second;
  return cross_product(num_vars, size());
}

std::vector<Assignment> subsample_assignments(std::size_t num_vars, std::size_t batch_size, std::size_t max_instances,
                                              std::uint64_t rng_seed) {
  if (max_instances == 0) throw std::invalid_argument("max_instances must be at least 1");
  // total = batch_size^num_vars, saturating
  std::uint64_t total = 1;
  bool saturated = false;
  for (std::size_t i = 0; i < num_vars; ++i) {
    if (batch_size != 0 && total > std::numeric_limits<std::uint64_t>::max() / batch_size) {
      saturated = true;
      break;
    }
    total *= batch_size;
  }
  if (!saturated && total <= max_instances) return cross_product(num_vars, batch_size);
  if (saturated) throw std::invalid_argument("assignment space too large to index");

  // Floyd's algorithm: max_instances distinct draws from [0, total)
  std::mt19937_64 rng(rng_seed);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(max_instances * 2);
  for (std::uint64_t j = total - max_instances; j < total; ++j) {
    const std::uint64_t t = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> codes(chosen.begin(), chosen.end());
  std::sort(codes.begin(), codes.end());
  std::vector<Assignment> out;
  out.reserve(codes.size());
  for (std::uint64_t code : codes) {
    Assignment a(num_vars);
    for (std::size_t k = num_vars; k-- > 0;) {
      a[k] = static_cast<ObjectIndex>(code % batch_size);
      code /= batch_size;
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::ptrdiff_t ValuationTape::find_atom(const GroundAtom& atom) const {
  const auto it = std::find(atoms.begin(), atoms.end(), atom);
  return it == atoms.end() ? -1 : std::distance(atoms.begin(), it);
}

namespace {

struct Instr {
  TapeOp op;
  std::uint32_t pred = 0;
  std::vector<std::uint32_t> arg_pos;
};

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint32_t>& key) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : key) {
      h ^= v;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

class TapeBuilder {
public:
  TapeBuilder(const DflStructure& structure, const OperatorSuite& suite, const GroundingBatch& batch)
      : interp_(structure.interpretation), batch_(batch) {
    if (static_cast<std::size_t>(batch.objects.cols()) != interp_.object_dim()) {
      throw std::invalid_argument("object dimension " + std::to_string(batch.objects.cols()) +
                                  " does not match interpretation dimension " +
                                  std::to_string(interp_.object_dim()));
    }
    tape_.suite = suite;
  }

  void add_formula(const Formula::Ptr& f, double weight) {
    if (!f) throw std::invalid_argument("null formula");
    const auto vars = quantified_variables(*f);
    Pending p;
    p.record.formula = f;
    p.record.weight = weight;
    p.record.assignments = batch_.assignments_for(vars.size());
    std::sort(p.record.assignments.begin(), p.record.assignments.end());
    for (const auto& a : p.record.assignments) {
      if (a.size() != vars.size()) throw std::invalid_argument("assignment length does not match quantifier prefix");
      for (auto o : a) {
        if (o >= batch_.size()) throw std::invalid_argument("assignment refers to an object outside the batch");
      }
    }
    if (p.record.assignments.empty()) throw std::invalid_argument("formula has no assignments in this batch");
    compile(matrix(*f), vars, p.code);
    for (const auto& a : p.record.assignments) {
      for (const auto& ins : p.code) {
        if (ins.op == TapeOp::Leaf) intern(ins, a);
      }
    }
    pending_.push_back(std::move(p));
  }

  ValuationTape build(bool with_loss) {
    const std::size_t n_atoms = tape_.atoms.size();
    tape_.atom_truths.assign(n_atoms, 0.0);
    if (n_atoms > 0) interp_.truths(batch_.objects, tape_.atoms, tape_.atom_truths);
    for (std::size_t i = 0; i < n_atoms; ++i) {
      const double v = tape_.atom_truths[i];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::domain_error("interpretation returned " + std::to_string(v) + " for atom '" +
                                tape_.atoms[i].predicate + "'");
      }
      tape_.nodes.push_back({TapeOp::Leaf, static_cast<std::uint32_t>(i), 0, v, 0.0});
    }

    const auto& suite = tape_.suite;
    std::vector<std::uint32_t> stack;
    std::vector<double> child_values;
    for (auto& p : pending_) {
      auto& rec = p.record;
      rec.instance_nodes.reserve(rec.assignments.size());
      for (const auto& a : rec.assignments) {
        stack.clear();
        for (const auto& ins : p.code) {
          switch (ins.op) {
            case TapeOp::Leaf:
              stack.push_back(lookup(ins, a));
              break;
            case TapeOp::Not: {
              const auto x = stack.back();
              stack.back() = push({TapeOp::Not, x, 0, ops::negate(tape_.nodes[x].value), 0.0});
              break;
            }
            case TapeOp::And:
            case TapeOp::Or:
            case TapeOp::Implies: {
              const auto r = stack.back();
              stack.pop_back();
              const auto l = stack.back();
              const double lv = tape_.nodes[l].value;
              const double rv = tape_.nodes[r].value;
              double v = 0.0;
              if (ins.op == TapeOp::And) v = ops::tnorm(suite.conjunction, lv, rv);
              if (ins.op == TapeOp::Or) v = ops::tconorm(suite.disjunction, lv, rv);
              if (ins.op == TapeOp::Implies) v = ops::implication(suite.implication, lv, rv);
              stack.back() = push({ins.op, l, r, v, 0.0});
              break;
            }
            default:
              break;
          }
        }
        rec.instance_nodes.push_back(stack.back());
      }
      const auto begin = static_cast<std::uint32_t>(tape_.links.size());
      child_values.clear();
      for (auto node : rec.instance_nodes) {
        tape_.links.push_back(node);
        child_values.push_back(tape_.nodes[node].value);
      }
      const auto end = static_cast<std::uint32_t>(tape_.links.size());
      rec.root = push({TapeOp::Aggregate, begin, end, ops::aggregate(suite.aggregator, child_values), 0.0});
      tape_.formulas.push_back(std::move(rec));
    }

    if (with_loss) {
      const auto begin = static_cast<std::uint32_t>(tape_.links.size());
      double loss = 0.0;
      for (const auto& rec : tape_.formulas) {
        tape_.links.push_back(rec.root);
        loss -= rec.weight * tape_.nodes[rec.root].value;
      }
      const auto end = static_cast<std::uint32_t>(tape_.links.size());
      tape_.root = push({TapeOp::Loss, begin, end, loss, 0.0});
    } else {
      tape_.root = tape_.formulas.back().root;
    }
    return std::move(tape_);
  }

private:
  struct Pending {
    FormulaRecord record;
    std::vector<Instr> code;  // postfix
  };

  std::uint32_t push(const TapeNode& n) {
    tape_.nodes.push_back(n);
    return static_cast<std::uint32_t>(tape_.nodes.size() - 1);
  }

  std::uint32_t pred_id(const std::string& name) {
    const auto it = std::find(pred_names_.begin(), pred_names_.end(), name);
    if (it != pred_names_.end()) return static_cast<std::uint32_t>(it - pred_names_.begin());
    pred_names_.push_back(name);
    return static_cast<std::uint32_t>(pred_names_.size() - 1);
  }

  void compile(const Formula& f, const std::vector<std::string>& vars, std::vector<Instr>& code) {
    switch (f.kind()) {
      case FormulaKind::Atom: {
        const auto& atom = f.as<node::Atom>();
        Instr ins{TapeOp::Leaf, pred_id(atom.predicate), {}};
        for (const auto& v : atom.args) {
          const auto it = std::find(vars.begin(), vars.end(), v);
          if (it == vars.end()) throw std::invalid_argument("free variable '" + v + "' in " + f.to_string());
          ins.arg_pos.push_back(static_cast<std::uint32_t>(it - vars.begin()));
        }
        code.push_back(std::move(ins));
        return;
      }
      case FormulaKind::Not:
        compile(*f.as<node::Not>().operand, vars, code);
        code.push_back({TapeOp::Not, 0, {}});
        return;
      case FormulaKind::And:
        compile(*f.as<node::And>().lhs, vars, code);
        compile(*f.as<node::And>().rhs, vars, code);
        code.push_back({TapeOp::And, 0, {}});
        return;
      case FormulaKind::Or:
        compile(*f.as<node::Or>().lhs, vars, code);
        compile(*f.as<node::Or>().rhs, vars, code);
        code.push_back({TapeOp::Or, 0, {}});
        return;
      case FormulaKind::Implies:
        compile(*f.as<node::Implies>().antecedent, vars, code);
        compile(*f.as<node::Implies>().consequent, vars, code);
        code.push_back({TapeOp::Implies, 0, {}});
        return;
      case FormulaKind::Forall:
        throw std::invalid_argument("quantifier inside the formula matrix");
    }
  }

  std::vector<std::uint32_t>& key_for(const Instr& ins, const Assignment& a) {
    key_.clear();
    key_.push_back(ins.pred);
    for (auto pos : ins.arg_pos) key_.push_back(a[pos]);
    return key_;
  }

  void intern(const Instr& ins, const Assignment& a) {
    auto& key = key_for(ins, a);
    if (index_.contains(key)) return;
    index_.emplace(key, static_cast<std::uint32_t>(tape_.atoms.size()));
    GroundAtom atom{pred_names_[ins.pred], {}};
    atom.args.assign(key.begin() + 1, key.end());
    tape_.atoms.push_back(std::move(atom));
  }

  std::uint32_t lookup(const Instr& ins, const Assignment& a) { return index_.at(key_for(ins, a)); }

  const Interpretation& interp_;
  const GroundingBatch& batch_;
  ValuationTape tape_;
  std::vector<Pending> pending_;
  std::vector<std::string> pred_names_;
  std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, KeyHash> index_;
  std::vector<std::uint32_t> key_;
};

}  // namespace

Valuation evaluate(const DflStructure& structure, const OperatorSuite& suite, const Formula::Ptr& f,
                   const GroundingBatch& batch) {
  TapeBuilder builder(structure, suite, batch);
  builder.add_formula(f, 1.0);
  Valuation out;
  out.tape = builder.build(false);
  out.value = out.tape.value();
  return out;
}

Valuation dfl_loss(const DflStructure& structure, const OperatorSuite& suite, const KnowledgeBase& kb,
                   const GroundingBatch& batch) {
  if (kb.formulas.empty()) throw std::invalid_argument("knowledge base has no formulas");
  TapeBuilder builder(structure, suite, batch);
  for (const auto& wf : kb.formulas) builder.add_formula(wf.formula, wf.weight);
  Valuation out;
  out.tape = builder.build(true);
  out.value = out.tape.value();
  return out;
}

std::vector<double> backward(ValuationTape& tape, double seed) {
  auto& nodes = tape.nodes;
  for (auto& n : nodes) n.adjoint = 0.0;
  nodes.at(tape.root).adjoint = seed;
  const auto& suite = tape.suite;
  std::vector<double> atom_adjoints(tape.atoms.size(), 0.0);
  std::vector<double> values;
  std::vector<double> grads;
  tape.backward_visits = 0;

  for (std::size_t i = nodes.size(); i-- > 0;) {
    const TapeNode& n = nodes[i];
    ++tape.backward_visits;
    const double adj = n.adjoint;
    switch (n.op) {
      case TapeOp::Leaf:
        atom_adjoints[n.lhs] += adj;
        break;
      case TapeOp::Not:
        nodes[n.lhs].adjoint -= adj;
        break;
      case TapeOp::And: {
        const auto g = ops::tnorm_grad(suite.conjunction, nodes[n.lhs].value, nodes[n.rhs].value);
        nodes[n.lhs].adjoint += adj * g.d_lhs;
        nodes[n.rhs].adjoint += adj * g.d_rhs;
        break;
      }
      case TapeOp::Or: {
        const auto g = ops::tconorm_grad(suite.disjunction, nodes[n.lhs].value, nodes[n.rhs].value);
        nodes[n.lhs].adjoint += adj * g.d_lhs;
        nodes[n.rhs].adjoint += adj * g.d_rhs;
        break;
      }
      case TapeOp::Implies: {
        const auto g = ops::implication_grad(suite.implication, nodes[n.lhs].value, nodes[n.rhs].value);
        nodes[n.lhs].adjoint -= adj * g.d_neg_antecedent;
        nodes[n.rhs].adjoint += adj * g.d_consequent;
        break;
      }
      case TapeOp::Aggregate: {
        const auto kids = tape.children(n);
        values.resize(kids.size());
        grads.resize(kids.size());
        for (std::size_t k = 0; k < kids.size(); ++k) values[k] = nodes[kids[k]].value;
        ops::aggregate_grad(suite.aggregator, values, grads);
        for (std::size_t k = 0; k < kids.size(); ++k) nodes[kids[k]].adjoint += adj * grads[k];
        break;
      }
      case TapeOp::Loss: {
        const auto kids = tape.children(n);
        for (std::size_t k = 0; k < kids.size(); ++k) nodes[kids[k]].adjoint -= adj * tape.formulas[k].weight;
        break;
      }
    }
  }
  tape.has_adjoints = true;
  return atom_adjoints;
}

std::map<GroundAtom, double> adjoint_map(const ValuationTape& tape, std::span<const double> adjoints) {
  if (adjoints.size() != tape.atoms.size()) throw std::invalid_argument("adjoints do not match the tape");
  std::map<GroundAtom, double> out;
  for (std::size_t i = 0; i < adjoints.size(); ++i) out.emplace(tape.atoms[i], adjoints[i]);
  return out;
}

void write_adjoint_csv(std::ostream& out, const ValuationTape& tape, std::span<const double> adjoints) {
  if (adjoints.size() != tape.atoms.size()) throw std::invalid_argument("adjoints do not match the tape");
  const auto old_precision = out.precision(17);
  out << "predicate,objects,truth,adjoint\n";
  for (std::size_t i = 0; i < adjoints.size(); ++i) {
    const auto& atom = tape.atoms[i];
    out << atom.predicate << ',';
    for (std::size_t k = 0; k < atom.args.size(); ++k) {
      if (k) out << ';';
      out << atom.args[k];
    }
    out << ',' << tape.atom_truths[i] << ',' << adjoints[i] << '\n';
  }
  out.precision(old_precision);
}

}  // namespace dfl
