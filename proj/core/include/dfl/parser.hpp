#pragma once

// Text syntax for prenex formulas:
//
//   formula := ('forall' var+ '.')* implication
//   implication := disjunction ('->' implication)?      right-associative
//   disjunction := conjunction ('|' conjunction)*
//   conjunction := unary ('&' unary)*
//   unary := '~' unary | '(' implication ')' | pred '(' var (',' var)* ')' | pred
//
// `exists` is a reserved word and rejected as unsupported.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dfl/formula.hpp"

namespace dfl {

/// Predicate symbol -> arity.
using Declarations = std::map<std::string, std::size_t, std::less<>>;

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);

  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }
  /// The message without the position prefix.
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

/// Parses a closed formula. Rejects syntax errors, quantifiers outside the
/// prefix, unbound variables, and a predicate used with two arities. When
/// `declarations` is given, atoms must also match the declared arity.
Formula::Ptr parse_formula(std::string_view text, const Declarations* declarations = nullptr);

}  // namespace dfl
