#include "dfl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace dfl {

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      detail_(message) {}

namespace {

enum class Tok { Ident, Forall, Exists, LParen, RParen, Comma, Dot, And, Or, Not, Arrow, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::Ident: return "identifier '" + t.text + "'";
    case Tok::End: return "end of input";
    default: return "'" + t.text + "'";
  }
}

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const auto ch = static_cast<unsigned char>(text[i]);
    if (std::isspace(ch)) {
      advance(1);
      continue;
    }
    const std::size_t l = line;
    const std::size_t c = col;
    if (std::isalpha(ch) || ch == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
        ++j;
      }
      std::string word(text.substr(i, j - i));
      Tok kind = Tok::Ident;
      if (word == "forall") kind = Tok::Forall;
      if (word == "exists") kind = Tok::Exists;
      out.push_back({kind, std::move(word), l, c});
      advance(j - i);
      continue;
    }
    if (ch == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      out.push_back({Tok::Arrow, "->", l, c});
      advance(2);
      continue;
    }
    Tok kind;
    switch (ch) {
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case ',': kind = Tok::Comma; break;
      case '.': kind = Tok::Dot; break;
      case '&': kind = Tok::And; break;
      case '|': kind = Tok::Or; break;
      case '~': kind = Tok::Not; break;
      default: {
        std::string shown = std::isprint(ch) ? std::string(1, static_cast<char>(ch)) : "\\x" + std::to_string(ch);
        throw ParseError("unexpected character '" + shown + "'", l, c);
      }
    }
    out.push_back({kind, std::string(1, static_cast<char>(ch)), l, c});
    advance(1);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
public:
  Parser(std::vector<Token> tokens, const Declarations* decls) : toks_(std::move(tokens)), decls_(decls) {}

  Formula::Ptr parse() {
    std::vector<std::string> prefix;
    while (peek().kind == Tok::Forall || peek().kind == Tok::Exists) {
      const Token q = take();
      if (q.kind == Tok::Exists) throw ParseError("existential quantification is unsupported", q.line, q.column);
      if (peek().kind != Tok::Ident) throw error("expected a variable after 'forall'");
      while (peek().kind == Tok::Ident) {
        const Token v = take();
        if (std::find(prefix.begin(), prefix.end(), v.text) != prefix.end()) {
          throw ParseError("variable '" + v.text + "' is bound twice", v.line, v.column);
        }
        prefix.push_back(v.text);
      }
      expect(Tok::Dot, "'.' after quantified variables");
    }
    // Report a misplaced quantifier before any binding error it would cause.
    for (std::size_t i = pos_; i < toks_.size(); ++i) {
      if (toks_[i].kind == Tok::Forall) {
        throw ParseError("quantifier not in prefix: formulas must be in prenex normal form", toks_[i].line,
                         toks_[i].column);
      }
    }
    bound_ = prefix;
    Formula::Ptr body = implication();
    if (peek().kind != Tok::End) throw error("unexpected " + describe(peek()));
    return Formula::forall(prefix, std::move(body));
  }

private:
  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_++]; }

  ParseError error(const std::string& what) const { return ParseError(what, peek().line, peek().column); }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) throw error(std::string("expected ") + what + ", found " + describe(peek()));
    ++pos_;
  }

  Formula::Ptr implication() {
    Formula::Ptr lhs = disjunction();
    if (peek().kind == Tok::Arrow) {
      take();
      return Formula::implies(std::move(lhs), implication());
    }
    return lhs;
  }

  Formula::Ptr disjunction() {
    Formula::Ptr lhs = conjunction();
    while (peek().kind == Tok::Or) {
      take();
      lhs = Formula::disjunction(std::move(lhs), conjunction());
    }
    return lhs;
  }

  Formula::Ptr conjunction() {
    Formula::Ptr lhs = unary();
    while (peek().kind == Tok::And) {
      take();
      lhs = Formula::conjunction(std::move(lhs), unary());
    }
    return lhs;
  }

  Formula::Ptr unary() {
    const Token& t = peek();
    if (++depth_ > kMaxDepth) throw error("formula nested too deeply");
    struct Leave {
      int& d;
      ~Leave() { --d; }
    } leave{depth_};
    switch (t.kind) {
      case Tok::Not:
        take();
        return Formula::negation(unary());
      case Tok::LParen: {
        take();
        Formula::Ptr inner = implication();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Forall:
        throw error("quantifier not in prefix: formulas must be in prenex normal form");
      case Tok::Exists:
        throw error("existential quantification is unsupported");
      case Tok::Ident:
        return atom();
      default:
        throw error("expected a formula, found " + describe(t));
    }
  }

  Formula::Ptr atom() {
    const Token name = take();
    std::vector<std::string> args;
    if (peek().kind == Tok::LParen) {
      take();
      if (peek().kind != Tok::RParen) {
        for (;;) {
          if (peek().kind != Tok::Ident) throw error("expected a variable, found " + describe(peek()));
          const Token v = take();
          if (std::find(bound_.begin(), bound_.end(), v.text) == bound_.end()) {
            throw ParseError("unbound variable '" + v.text + "'", v.line, v.column);
          }
          args.push_back(v.text);
          if (peek().kind != Tok::Comma) break;
          take();
        }
      }
      expect(Tok::RParen, "')' closing the argument list");
    }
    check_arity(name, args.size());
    return Formula::atom(name.text, std::move(args));
  }

  void check_arity(const Token& name, std::size_t arity) {
    if (decls_) {
      const auto it = decls_->find(name.text);
      if (it == decls_->end()) throw ParseError("undeclared predicate '" + name.text + "'", name.line, name.column);
      if (it->second != arity) {
        throw ParseError("arity mismatch for '" + name.text + "': declared " + std::to_string(it->second) +
                             ", used with " + std::to_string(arity),
                         name.line, name.column);
      }
    }
    const auto [it, inserted] = seen_.emplace(name.text, arity);
    if (!inserted && it->second != arity) {
      throw ParseError("arity mismatch for '" + name.text + "': used with " + std::to_string(it->second) + " and " +
                           std::to_string(arity) + " arguments",
                       name.line, name.column);
    }
  }

  static constexpr int kMaxDepth = 512;

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  const Declarations* decls_;
  std::vector<std::string> bound_;
  Declarations seen_;
};

}  // namespace

Formula::Ptr parse_formula(std::string_view text, const Declarations* declarations) {
  return Parser(lex(text), declarations).parse();
}

}  // namespace dfl
