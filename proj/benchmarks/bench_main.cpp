#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dfl/experiment.hpp"
#include "dfl/fuzzy_ops.hpp"
#include "dfl/grounding.hpp"
#include "dfl/models.hpp"
#include "dfl/neural_interp.hpp"

namespace {

std::vector<double> uniform(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_Implication(benchmark::State& state, dfl::Implication kind) {
  const auto a = uniform(1024, 1);
  const auto c = uniform(1024, 2);
  for (auto _ : state) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto g = dfl::ops::implication_grad(kind, a[i], c[i]);
      acc += dfl::ops::implication(kind, a[i], c[i]) + g.d_consequent + g.d_neg_antecedent;
    }
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK_CAPTURE(BM_Implication, reichenbach, dfl::BaseImplication::Reichenbach);
BENCHMARK_CAPTURE(BM_Implication, kleene_dienes, dfl::BaseImplication::KleeneDienes);
BENCHMARK_CAPTURE(BM_Implication, sigmoidal_rc9, dfl::Implication::sigmoidal(dfl::BaseImplication::Reichenbach, 9.0));

void BM_YagerTNorm(benchmark::State& state) {
  const auto a = uniform(1024, 3);
  const auto b = uniform(1024, 4);
  const auto t = dfl::TNorm::yager(2.0);
  for (auto _ : state) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += dfl::ops::tnorm(t, a[i], b[i]);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_YagerTNorm);

// Random truths for any atom, so grounding cost is measured without a network.
class TableInterpretation final : public dfl::Interpretation {
public:
  std::size_t object_dim() const override { return 1; }
  void truths(const Eigen::MatrixXd&, std::span<const dfl::GroundAtom> atoms, std::span<double> out) const override {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      std::uint64_t h = std::hash<std::string>{}(atoms[i].predicate);
      for (auto o : atoms[i].args) h = h * 1099511628211ull + o;
      out[i] = static_cast<double>(h % 1000) / 1000.0;
    }
  }
};

void BM_DigitKbLossAndBackward(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const std::vector<int> mask{1, 2, 3};
  const auto kb = dfl::build_digit_kb(mask);
  TableInterpretation interp;
  dfl::GroundingBatch batch{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(b), 1), {}};
  batch.assignments[2] = dfl::subsample_assignments(2, b, 512, 7);
  dfl::OperatorSuite suite;
  suite.conjunction = dfl::TNorm::yager(2.0);
  suite.aggregator = dfl::AggregatorKind::LogProduct;
  for (auto _ : state) {
    auto v = dfl::dfl_loss(dfl::DflStructure{interp}, suite, kb, batch);
    benchmark::DoNotOptimize(dfl::backward(v.tape));
  }
}
BENCHMARK(BM_DigitKbLossAndBackward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_TrainingForwardBackward(benchmark::State& state) {
  const dfl::DigitModel model(dfl::ClassifierSpec{}, dfl::NTNSpec{});
  const auto params = model.init_params(1);
  dfl::LabeledBatch batch{Eigen::MatrixXd::Random(50, 784).cwiseAbs(), {}};
  for (int i = 0; i < 50; ++i) batch.labels.push_back(i % 10);
  for (auto _ : state) {
    dfl::InterpretationParams grad(params.layout);
    benchmark::DoNotOptimize(dfl::supervised_loss(model, params, batch, {}, &grad).value);
  }
}
BENCHMARK(BM_TrainingForwardBackward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
