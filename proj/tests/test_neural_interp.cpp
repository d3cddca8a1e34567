#include <doctest.h>

#include <cmath>
#include <random>

#include "dfl/grounding.hpp"
#include "dfl/neural_interp.hpp"
#include "dfl/parser.hpp"

using namespace dfl;

namespace {

Eigen::MatrixXd random_images(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = u(rng);
  }
  return m;
}

DigitModel small_model() {
  ClassifierSpec spec;
  spec.input_dim = 12;
  spec.hidden_dims = {8, 6};
  return DigitModel(spec, NTNSpec{6, 2, 4});
}

// Output layer forced to fixed logits: zero weights and the given bias.
void set_output_bias(InterpretationParams& p, const Eigen::VectorXd& bias) {
  const auto& w = p.layout.find("dense2.W");
  const auto& b = p.layout.find("dense2.b");
  p.theta.segment(static_cast<Eigen::Index>(w.offset), static_cast<Eigen::Index>(w.size())).setZero();
  p.theta.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.size())) = bias;
}

}  // namespace

TEST_CASE("digit predicate names") {
  CHECK(digit_of("zero") == 0);
  CHECK(digit_of("nine") == 9);
  CHECK_FALSE(digit_of("same"));
  CHECK_FALSE(digit_of("ten"));
}

TEST_CASE("untrained digit predicates are near chance") {
  const DigitModel model(ClassifierSpec{}, NTNSpec{});
  const auto params = model.init_params(0);
  const Eigen::MatrixXd x = random_images(20, 784, 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const std::vector<Eigen::VectorXd> obj = {x.row(i).transpose()};
    double sum = 0.0;
    for (auto d : kDigitPredicates) {
      const double v = predicate_truth(model, params, d, obj).value();
      CHECK(std::abs(v - 0.1) <= 0.05);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-6);
  }
}

TEST_CASE("outputs stay in [0,1] for random inputs") {
  const DigitModel model = small_model();
  const auto params = model.init_params(2);
  const Eigen::MatrixXd x = random_images(1000, 12, 3) * 20.0;
  const DigitInterpretation interp(model, params, x);
  std::vector<GroundAtom> atoms;
  for (ObjectIndex i = 0; i < 1000; ++i) {
    atoms.push_back({"three", {i}});
    atoms.push_back({"same", {i, (i * 7) % 1000}});
  }
  std::vector<double> out(atoms.size());
  interp.truths(x, atoms, out);
  for (double v : out) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("predicate errors") {
  const DigitModel model = small_model();
  const auto params = model.init_params(0);
  const std::vector<Eigen::VectorXd> one = {Eigen::VectorXd::Zero(12)};
  const std::vector<Eigen::VectorXd> two = {Eigen::VectorXd::Zero(12), Eigen::VectorXd::Zero(12)};
  CHECK_THROWS_AS(predicate_truth(model, params, "chair", one), std::invalid_argument);
  CHECK_THROWS_AS(predicate_truth(model, params, "same", one), std::invalid_argument);
  CHECK_THROWS_AS(predicate_truth(model, params, "zero", two), std::invalid_argument);
  CHECK_NOTHROW(predicate_truth(model, params, "same", two));
  const std::vector<Eigen::VectorXd> wrong = {Eigen::VectorXd::Zero(5)};
  CHECK_THROWS_AS(predicate_truth(model, params, "zero", wrong), std::invalid_argument);

  const Eigen::MatrixXd x = random_images(3, 12, 0);
  const DigitInterpretation interp(model, params, x);
  std::vector<GroundAtom> atoms = {{"zero", {5}}};
  std::vector<double> out(1);
  CHECK_THROWS(interp.truths(x, atoms, out));
  atoms = {{"zero", {0}}};
  CHECK_THROWS_AS(interp.truths(random_images(3, 12, 1), atoms, out), std::invalid_argument);
}

TEST_CASE("cross-entropy closed forms") {
  const DigitModel model = small_model();
  auto params = model.init_params(4);
  LabeledBatch batch{random_images(6, 12, 5), {0, 1, 2, 3, 4, 5}};
  SupervisedLossOptions opts;
  opts.include_same = false;

  set_output_bias(params, Eigen::VectorXd::Zero(10));
  CHECK(supervised_loss(model, params, batch, opts).cross_entropy == doctest::Approx(std::log(10.0)).epsilon(1e-12));

  batch.labels.assign(6, 3);
  Eigen::VectorXd confident = Eigen::VectorXd::Constant(10, -200.0);
  confident[3] = 200.0;
  set_output_bias(params, confident);
  CHECK(supervised_loss(model, params, batch, opts).cross_entropy < 1e-100);
}

TEST_CASE("same-pair sampling keeps the configured balance") {
  const std::vector<int> labels = {0, 0, 1, 2, 2, 2, 3, 4, 5, 5};
  // Positives: ordered same-label pairs including (i, i).
  const std::size_t positives = 4 + 1 + 9 + 1 + 1 + 4;
  for (double r : {0.0, 0.5, 1.0, 2.0}) {
    const auto sp = sample_same_pairs(labels, r, 3);
    CHECK(sp.positive.size() == positives);
    CHECK(sp.negative.size() == static_cast<std::size_t>(std::llround(r * positives)));
    for (auto [i, j] : sp.positive) CHECK(labels[i] == labels[j]);
    for (auto [i, j] : sp.negative) CHECK(labels[i] != labels[j]);
  }
  // The negatives run out before a large ratio is met.
  CHECK(sample_same_pairs(labels, 100.0, 3).negative.size() == labels.size() * labels.size() - positives);
  CHECK_THROWS_AS(sample_same_pairs(labels, -1.0, 3), std::invalid_argument);
}

TEST_CASE("supervised loss gradient matches finite differences") {
  const DigitModel model = small_model();
  const auto params = model.init_params(6);
  const LabeledBatch batch{random_images(5, 12, 7), {1, 1, 4, 7, 4}};
  SupervisedLossOptions opts;
  opts.seed = 8;
  InterpretationParams grad(params.layout);
  const auto l = supervised_loss(model, params, batch, opts, &grad);
  CHECK(l.value == doctest::Approx(l.cross_entropy + l.same_bce));
  CHECK(l.positive_pairs == 9);
  CHECK(l.negative_pairs == 9);
  auto p = params;
  const double h = 1e-5;
  for (Eigen::Index k = 0; k < p.theta.size(); ++k) {
    const double v = p.theta[k];
    p.theta[k] = v + h;
    const double up = supervised_loss(model, p, batch, opts).value;
    p.theta[k] = v - h;
    const double down = supervised_loss(model, p, batch, opts).value;
    p.theta[k] = v;
    const double fd = (up - down) / (2 * h);
    CHECK(std::abs(fd - grad.theta[k]) <= 1e-3 * std::max(std::abs(fd), 1e-3));
  }
}

TEST_CASE("logic loss chains through the interpretation") {
  const DigitModel model = small_model();
  const auto params = model.init_params(9);
  const Eigen::MatrixXd objects = random_images(2, 12, 10);
  const auto kb = parse_kb("pred three/1\npred same/2\nrule 1 forall x y. three(x) & same(x, y) -> three(y)\n");
  OperatorSuite suite;
  suite.conjunction = TNorm::yager(2);
  suite.aggregator = AggregatorKind::LogProduct;
  GroundingBatch batch{objects, {}};

  auto loss_of = [&](const InterpretationParams& p) {
    const DigitInterpretation interp(model, p, objects);
    return dfl_loss(DflStructure{interp}, suite, kb, batch).value;
  };
  const DigitInterpretation interp(model, params, objects);
  auto v = dfl_loss(DflStructure{interp}, suite, kb, batch);
  const auto adj = backward(v.tape);
  InterpretationParams grad(params.layout);
  interp.accumulate_gradient(v.tape.atoms, adj, grad);

  auto p = params;
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < p.theta.size(); ++k) {
    const double t = p.theta[k];
    p.theta[k] = t + h;
    const double up = loss_of(p);
    p.theta[k] = t - h;
    const double down = loss_of(p);
    p.theta[k] = t;
    CHECK(std::abs((up - down) / (2 * h) - grad.theta[k]) < 1e-4);
  }
}

TEST_CASE("accuracy") {
  const DigitModel model = small_model();
  auto params = model.init_params(11);
  const Eigen::MatrixXd x = random_images(10, 12, 12);
  const std::vector<int> labels = {7, 7, 7, 7, 1, 2, 3, 7, 5, 7};
  Eigen::VectorXd bias = Eigen::VectorXd::Zero(10);
  bias[7] = 5.0;
  set_output_bias(params, bias);
  CHECK(evaluate_accuracy(model, params, x, labels) == doctest::Approx(0.6));
  CHECK_THROWS_AS(evaluate_accuracy(model, params, x, std::vector<int>{1}), std::invalid_argument);
}

TEST_CASE("random init is near chance on balanced labels") {
  const DigitModel model(ClassifierSpec{}, NTNSpec{});
  const auto params = model.init_params(13);
  const Eigen::MatrixXd x = random_images(1000, 784, 14);
  std::vector<int> labels(1000);
  for (int i = 0; i < 1000; ++i) labels[static_cast<std::size_t>(i)] = i % 10;
  const double acc = evaluate_accuracy(model, params, x, labels);
  CHECK(acc >= 0.05);
  CHECK(acc <= 0.15);
}

TEST_CASE("index sampling") {
  const auto a = sample_indices(100, 10, 1);
  CHECK(a.size() == 10);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK(a == sample_indices(100, 10, 1));
  CHECK(sample_indices(5, 10, 1).size() == 5);
  CHECK(sample_indices(0, 3, 1).empty());
}
