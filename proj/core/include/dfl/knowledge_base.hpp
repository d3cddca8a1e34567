#pragma once

// Weighted knowledge bases and their text file format:
//
//   # comment
//   pred same/2
//   rule 1.0 forall x y. same(x,y) -> same(y,x)

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dfl/formula.hpp"
#include "dfl/parser.hpp"

namespace dfl {

struct WeightedFormula {
  Formula::Ptr formula;
  double weight = 1.0;
};

struct KnowledgeBase {
  Declarations declarations;
  std::vector<WeightedFormula> formulas;
};

struct Diagnostic {
  static constexpr std::size_t kNoFormula = static_cast<std::size_t>(-1);

  std::size_t formula_index = kNoFormula;
  std::string message;
};

/// Empty iff every weight is positive and finite, every predicate is declared
/// with the arity it is used with, and no formula has free variables.
std::vector<Diagnostic> validate_kb(const KnowledgeBase& kb);

/// Parses the text format. Syntax errors throw ParseError positioned in the
/// file; semantic problems are left to validate_kb.
KnowledgeBase parse_kb(std::string_view text);
KnowledgeBase load_kb(const std::filesystem::path& path);
std::string to_text(const KnowledgeBase& kb);

}  // namespace dfl
