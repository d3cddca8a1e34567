#include "dfl/trainer.hpp"

#include <cmath>
#include <set>

#include "dfl/formula.hpp"

namespace dfl {

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(OptimizerKind kind) noexcept {
  return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

Optimizer::Optimizer(OptimizerConfig config, std::size_t num_params) : config_(config) {
  if (!(config_.learning_rate > 0.0) || !std::isfinite(config_.learning_rate)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (config_.kind == OptimizerKind::Adam) {
    m_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params));
    v_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params));
  }
}

void Optimizer::apply(InterpretationParams& params, const InterpretationParams& grad) {
  if (params.theta.size() != grad.theta.size()) throw std::invalid_argument("gradient size mismatch");
  ++steps_;
  if (config_.kind == OptimizerKind::Sgd) {
    params.theta.noalias() -= config_.learning_rate * grad.theta;
    return;
  }
  const double t = static_cast<double>(steps_);
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad.theta;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.theta.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  params.theta.array() -=
      config_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.epsilon);
}

StepResult compute_gradient(const DigitModel& model, const InterpretationParams& params, const StepInput& input,
                            InterpretationParams& grad) {
  if (!(input.w_dfl >= 0.0) || !std::isfinite(input.w_dfl)) throw std::invalid_argument("w_dfl must be >= 0");
  if (!input.labeled) throw std::invalid_argument("labeled batch required");
  StepResult r;
  r.supervised = supervised_loss(model, params, *input.labeled, input.supervised, &grad).value;
  r.loss = r.supervised;

  const bool logic = input.w_dfl > 0.0 && input.kb && input.unlabeled && input.unlabeled->rows() > 0;
  if (logic) {
    GroundingBatch batch{*input.unlabeled, {}};
    std::set<std::size_t> arities;
    for (const auto& wf : input.kb->formulas) arities.insert(quantified_variables(*wf.formula).size());
    for (std::size_t m : arities) {
      if (m == 0) continue;
      batch.assignments[m] = subsample_assignments(m, batch.size(), input.dfl.max_instances, input.grounding_seed + m);
    }
    const DigitInterpretation interp(model, params, batch.objects);
    Valuation val = dfl_loss(DflStructure{interp}, input.suite, *input.kb, batch);
    double scale = 1.0;
    if (input.dfl.normalize && !val.tape.formulas.empty()) {
      double instances = 0.0;
      for (const auto& f : val.tape.formulas) instances += static_cast<double>(f.assignments.size());
      scale = static_cast<double>(val.tape.formulas.size()) / std::max(instances, 1.0);
    }
    r.dfl = val.value * scale;
    r.loss += input.w_dfl * r.dfl;
    const std::vector<double> adj = backward(val.tape, input.w_dfl * scale);
    interp.accumulate_gradient(val.tape.atoms, adj, grad);
    r.tape = std::move(val.tape);
  }
  r.grad_norm = grad.theta.norm();
  return r;
}

StepResult train_step(const DigitModel& model, InterpretationParams& params, Optimizer& optimizer,
                      const StepInput& input) {
  InterpretationParams grad(params.layout);
  StepResult r;
  try {
    r = compute_gradient(model, params, input, grad);
  } catch (const std::domain_error& e) {
    // A NaN truth value from the network surfaces here before any gradient exists.
    throw NonFiniteGradient(std::string("non-finite forward pass: ") + e.what());
  }
  if (!grad.all_finite() || !std::isfinite(r.loss)) {
    throw NonFiniteGradient("non-finite gradient (loss " + std::to_string(r.loss) + ", supervised " +
                            std::to_string(r.supervised) + ", logic " + std::to_string(r.dfl) + ")");
  }
  optimizer.apply(params, grad);
  return r;
}

}  // namespace dfl
