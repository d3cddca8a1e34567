#include "dfl/knowledge_base.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dfl {

std::vector<Diagnostic> validate_kb(const KnowledgeBase& kb) {
  std::vector<Diagnostic> out;
  for (const auto& [name, arity] : kb.declarations) {
    if (name.empty()) out.push_back({Diagnostic::kNoFormula, "empty predicate name in declarations"});
  }
  for (std::size_t i = 0; i < kb.formulas.size(); ++i) {
    const auto& wf = kb.formulas[i];
    if (!wf.formula) {
      out.push_back({i, "missing formula"});
      continue;
    }
    if (!(wf.weight > 0.0) || !std::isfinite(wf.weight)) {
      std::ostringstream os;
      os << "weight must be positive and finite, got " << wf.weight;
      out.push_back({i, os.str()});
    }
    for (const auto& [pred, arity] : predicates_of(*wf.formula)) {
      const auto it = kb.declarations.find(pred);
      if (it == kb.declarations.end()) {
        out.push_back({i, "undeclared predicate '" + pred + "'"});
      } else if (it->second != arity) {
        out.push_back({i, "predicate '" + pred + "' declared with arity " + std::to_string(it->second) +
                              " but used with " + std::to_string(arity)});
      }
    }
    for (const auto& v : free_variables(*wf.formula)) {
      out.push_back({i, "free variable '" + v + "'"});
    }
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KnowledgeBase parse_kb(std::string_view text) {
  KnowledgeBase kb;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    ++line_no;
    start = end + 1;

    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const std::size_t indent = static_cast<std::size_t>(line.data() - raw.data());

    const auto sp = line.find_first_of(" \t");
    const std::string_view keyword = line.substr(0, sp);
    const std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));
    const std::size_t rest_col = rest.empty() ? line.size() + 1 : static_cast<std::size_t>(rest.data() - raw.data()) + 1;

    if (keyword == "pred") {
      const auto slash = rest.rfind('/');
      if (slash == std::string_view::npos) throw ParseError("expected 'pred <name>/<arity>'", line_no, rest_col);
      const std::string name(trim(rest.substr(0, slash)));
      const std::string_view num = trim(rest.substr(slash + 1));
      std::size_t arity = 0;
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), arity);
      if (name.empty() || ec != std::errc() || ptr != num.data() + num.size()) {
        throw ParseError("expected 'pred <name>/<arity>'", line_no, rest_col);
      }
      if (auto [it, inserted] = kb.declarations.emplace(name, arity); !inserted && it->second != arity) {
        throw ParseError("predicate '" + name + "' redeclared with a different arity", line_no, rest_col);
      }
    } else if (keyword == "rule") {
      const auto wsp = rest.find_first_of(" \t");
      const std::string_view wtext = rest.substr(0, wsp);
      double weight = 0.0;
      auto [ptr, ec] = std::from_chars(wtext.data(), wtext.data() + wtext.size(), weight);
      if (wtext.empty() || ec != std::errc() || ptr != wtext.data() + wtext.size()) {
        throw ParseError("expected 'rule <weight> <formula>'", line_no, rest_col);
      }
      if (wsp == std::string_view::npos) throw ParseError("rule without a formula", line_no, rest_col);
      const std::string_view ftext = trim(rest.substr(wsp));
      const std::size_t fcol = static_cast<std::size_t>(ftext.data() - raw.data());
      try {
        kb.formulas.push_back({parse_formula(ftext), weight});
      } catch (const ParseError& e) {
        // rule text is a single line, so only the column needs shifting
        throw ParseError(e.detail(), line_no, fcol + e.column());
      }
    } else {
      throw ParseError("unknown directive '" + std::string(keyword) + "'", line_no, indent + 1);
    }
  }
  return kb;
}

KnowledgeBase load_kb(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open knowledge base '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kb(ss.str());
}

std::string to_text(const KnowledgeBase& kb) {
  std::ostringstream os;
  for (const auto& [name, arity] : kb.declarations) os << "pred " << name << '/' << arity << '\n';
  for (const auto& wf : kb.formulas) os << "rule " << wf.weight << ' ' << wf.formula->to_string() << '\n';
  return os.str();
}

}  // namespace dfl
