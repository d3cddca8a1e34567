#pragma once

// One optimization step on supervised_loss + w_dfl * dfl_loss.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "dfl/fuzzy_ops.hpp"
#include "dfl/grounding.hpp"
#include "dfl/knowledge_base.hpp"
#include "dfl/models.hpp"
#include "dfl/neural_interp.hpp"
#include "dfl/params.hpp"

namespace dfl {

enum class OptimizerKind { Sgd, Adam };

OptimizerKind parse_optimizer(std::string_view name);
std::string_view to_string(OptimizerKind kind) noexcept;

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Sgd;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Optimizer {
public:
  Optimizer(OptimizerConfig config, std::size_t num_params);

  void apply(InterpretationParams& params, const InterpretationParams& grad);

  [[nodiscard]] const OptimizerConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::size_t steps() const noexcept { return steps_; }

private:
  OptimizerConfig config_;
  Eigen::VectorXd m_, v_;
  std::size_t steps_ = 0;
};

struct DflOptions {
  /// Cap on the grounded tuples per quantifier arity for one batch.
  std::size_t max_instances = 512;
  /// Divide the logic loss by the mean number of instances per formula so its
  /// scale does not grow with the batch.
  bool normalize = true;
};

struct StepInput {
  const LabeledBatch* labeled = nullptr;
  /// Unlabeled images grounding the knowledge base, one per row.
  const Eigen::MatrixXd* unlabeled = nullptr;
  const KnowledgeBase* kb = nullptr;
  OperatorSuite suite;
  double w_dfl = 0.0;
  SupervisedLossOptions supervised;
  DflOptions dfl;
  std::uint64_t grounding_seed = 0;
};

struct StepResult {
  double loss = 0.0;
  double supervised = 0.0;
  /// Logic loss after normalization, before the w_dfl weight.
  double dfl = 0.0;
  double grad_norm = 0.0;
  /// The logic tape after its backward pass; empty when w_dfl is 0.
  std::optional<ValuationTape> tape;
};

class NonFiniteGradient : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// With w_dfl = 0 the logic loss is not evaluated at all. Throws
/// NonFiniteGradient, leaving params unchanged, when the gradient is not finite.
StepResult train_step(const DigitModel& model, InterpretationParams& params, Optimizer& optimizer,
                      const StepInput& input);

/// The gradient train_step would apply, without updating anything.
StepResult compute_gradient(const DigitModel& model, const InterpretationParams& params, const StepInput& input,
                            InterpretationParams& grad);

}  // namespace dfl
