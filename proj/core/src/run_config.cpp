#include "dfl/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dfl {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw std::invalid_argument("bad value '" + std::string(value) + "' for " + std::string(key));
}

double to_real(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v);
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v);
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v);
}

std::string real_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<int> parse_formula_mask(std::string_view text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    const auto item = trim(text.substr(pos, comma - pos));
    if (item != "1" && item != "2" && item != "3") {
      throw std::invalid_argument("formula mask entries must be 1, 2 or 3, got '" + std::string(item) + "'");
    }
    const int f = item[0] - '0';
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    pos = comma + 1;
  }
  std::sort(out.begin(), out.end());
  return out;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "data_dir") data_dir = value;
  else if (key == "train_size") train_size = to_uint(key, value);
  else if (key == "test_size") test_size = to_uint(key, value);
  else if (key == "labeled_fraction") labeled_fraction = to_real(key, value);
  else if (key == "implication") implication = value;
  else if (key == "s") s = to_real(key, value);
  else if (key == "conjunction") conjunction = value;
  else if (key == "disjunction") disjunction = value;
  else if (key == "yager_p") yager_p = to_real(key, value);
  else if (key == "aggregator") aggregator = value;
  else if (key == "w_dfl") w_dfl = to_real(key, value);
  else if (key == "optimizer") optimizer = value;
  else if (key == "learning_rate") learning_rate = to_real(key, value);
  else if (key == "iterations") iterations = to_uint(key, value);
  else if (key == "labeled_batch") labeled_batch = to_uint(key, value);
  else if (key == "unlabeled_batch") unlabeled_batch = to_uint(key, value);
  else if (key == "max_instances") max_instances = to_uint(key, value);
  else if (key == "dfl_normalize") dfl_normalize = to_bool(key, value);
  else if (key == "dfl_warmup") dfl_warmup = to_uint(key, value);
  else if (key == "negative_ratio") negative_ratio = to_real(key, value);
  else if (key == "conv") conv = to_bool(key, value);
  else if (key == "eval_every") eval_every = to_uint(key, value);
  else if (key == "seed") seed = to_uint(key, value);
  else if (key == "formulas") formulas = parse_formula_mask(value);
  else if (key == "baseline") baseline = to_bool(key, value);
  else if (key == "chain") chain = value;
  else throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

void RunConfig::validate() const {
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) throw std::invalid_argument("labeled_fraction must be in (0,1]");
  if (w_dfl < 0.0) throw std::invalid_argument("w_dfl must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (train_size == 0 || test_size == 0) throw std::invalid_argument("train_size and test_size must be positive");
  if (labeled_batch == 0 || unlabeled_batch == 0) throw std::invalid_argument("batch sizes must be positive");
  if (max_instances == 0) throw std::invalid_argument("max_instances must be positive");
  if (eval_every == 0) throw std::invalid_argument("eval_every must be positive");
  if (negative_ratio < 0.0) throw std::invalid_argument("negative_ratio must be >= 0");
  if (formulas.empty()) throw std::invalid_argument("formula mask must be non-empty");
  (void)suite();
  (void)optimizer_config();
  (void)chain_mode();
}

OperatorSuite RunConfig::suite() const {
  OperatorSuite out;
  out.conjunction = TNorm::parse(conjunction, yager_p);
  out.disjunction = TNorm::parse(disjunction, yager_p);
  out.implication = Implication::parse(implication, s);
  out.aggregator = parse_aggregator(aggregator);
  return out;
}

OptimizerConfig RunConfig::optimizer_config() const {
  OptimizerConfig c;
  c.kind = parse_optimizer(optimizer);
  c.learning_rate = learning_rate;
  return c;
}

RunConfig parse_run_config(std::string_view text) {
  RunConfig c;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = std::min(text.find('\n', pos), text.size());
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    try {
      c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_text(const RunConfig& c) {
  std::ostringstream o;
  o << "data_dir=" << c.data_dir << '\n'
    << "train_size=" << c.train_size << '\n'
    << "test_size=" << c.test_size << '\n'
    << "labeled_fraction=" << real_text(c.labeled_fraction) << '\n'
    << "implication=" << c.implication << '\n'
    << "s=" << real_text(c.s) << '\n'
    << "conjunction=" << c.conjunction << '\n'
    << "disjunction=" << c.disjunction << '\n'
    << "yager_p=" << real_text(c.yager_p) << '\n'
    << "aggregator=" << c.aggregator << '\n'
    << "w_dfl=" << real_text(c.w_dfl) << '\n'
    << "optimizer=" << c.optimizer << '\n'
    << "learning_rate=" << real_text(c.learning_rate) << '\n'
    << "iterations=" << c.iterations << '\n'
    << "labeled_batch=" << c.labeled_batch << '\n'
    << "unlabeled_batch=" << c.unlabeled_batch << '\n'
    << "max_instances=" << c.max_instances << '\n'
    << "dfl_normalize=" << (c.dfl_normalize ? "true" : "false") << '\n'
    << "dfl_warmup=" << c.dfl_warmup << '\n'
    << "negative_ratio=" << real_text(c.negative_ratio) << '\n'
    << "conv=" << (c.conv ? "true" : "false") << '\n'
    << "eval_every=" << c.eval_every << '\n'
    << "seed=" << c.seed << '\n'
    << "formulas=";
  for (std::size_t i = 0; i < c.formulas.size(); ++i) o << (i ? "," : "") << c.formulas[i];
  o << '\n'
    << "baseline=" << (c.baseline ? "true" : "false") << '\n'
    << "chain=" << c.chain << '\n';
  return o.str();
}

}  // namespace dfl
