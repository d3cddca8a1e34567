#pragma once

// Flat key=value run configuration. Lines starting with '#' are comments.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dfl/diagnostics.hpp"
#include "dfl/fuzzy_ops.hpp"
#include "dfl/trainer.hpp"

namespace dfl {

struct RunConfig {
  /// Empty: DFL_DATA_DIR, then the build's default.
  std::string data_dir;
  std::size_t train_size = 5000;
  std::size_t test_size = 1000;
  double labeled_fraction = 0.01;

  std::string implication = "rc";
  double s = 9.0;
  std::string conjunction = "yager";
  std::string disjunction = "yager";
  double yager_p = 2.0;
  std::string aggregator = "log-product";

  double w_dfl = 10.0;
  std::string optimizer = "sgd";
  double learning_rate = 0.01;
  std::size_t iterations = 5000;
  std::size_t labeled_batch = 50;
  std::size_t unlabeled_batch = 32;
  std::size_t max_instances = 512;
  bool dfl_normalize = true;
  /// Supervised-only iterations before the logic loss is switched on.
  std::size_t dfl_warmup = 0;
  double negative_ratio = 1.0;
  bool conv = false;

  std::size_t eval_every = 500;
  std::uint64_t seed = 0;
  std::vector<int> formulas{1, 2, 3};
  bool baseline = false;
  std::string chain = "aggregated";

  /// Throws std::invalid_argument on an unknown key or a malformed value.
  void set(std::string_view key, std::string_view value);

  /// Throws std::invalid_argument if any field is out of range.
  void validate() const;

  [[nodiscard]] OperatorSuite suite() const;
  [[nodiscard]] OptimizerConfig optimizer_config() const;
  [[nodiscard]] ChainMode chain_mode() const { return parse_chain_mode(chain); }
};

RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Round-trips through parse_run_config.
std::string to_text(const RunConfig& config);

/// "1,2,3" -> {1,2,3}
std::vector<int> parse_formula_mask(std::string_view text);

}  // namespace dfl
