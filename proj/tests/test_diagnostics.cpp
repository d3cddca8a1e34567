#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "dfl/diagnostics.hpp"
#include "dfl/parser.hpp"

using namespace dfl;

namespace {

class TableInterpretation final : public Interpretation {
public:
  std::map<GroundAtom, double> table;

  std::size_t object_dim() const override { return 1; }
  void truths(const Eigen::MatrixXd&, std::span<const GroundAtom> atoms, std::span<double> out) const override {
    for (std::size_t i = 0; i < atoms.size(); ++i) out[i] = table.at(atoms[i]);
  }
};

ValuationTape pq_tape(const OperatorSuite& suite, const std::vector<std::pair<double, double>>& instances) {
  TableInterpretation interp;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    interp.table[{"p", {static_cast<ObjectIndex>(i)}}] = instances[i].first;
    interp.table[{"q", {static_cast<ObjectIndex>(i)}}] = instances[i].second;
  }
  KnowledgeBase kb = parse_kb("pred p/1\npred q/1\nrule 1 forall x. p(x) -> q(x)\n");
  GroundingBatch batch{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(instances.size()), 1), {}};
  auto v = dfl_loss(DflStructure{interp}, suite, kb, batch);
  backward(v.tape);
  return std::move(v.tape);
}

}  // namespace

TEST_CASE("single Reichenbach instance") {
  OperatorSuite s;
  s.implication = BaseImplication::Reichenbach;
  s.aggregator = AggregatorKind::Product;
  const auto tape = pq_tape(s, {{0.9, 0.5}});
  const auto m = collect_metrics(tape);
  CHECK(m.cons_magnitude == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(m.ant_magnitude == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(*m.cons_ratio() == doctest::Approx(0.6429).epsilon(1e-4));
  CHECK(*m.cons_ratio() == doctest::Approx(0.9 / 1.4).epsilon(1e-14));
  CHECK(m.instances == 1);
  CHECK_FALSE(m.cu_cons.has_value());
  CHECK_FALSE(m.cu_cons_ratio().has_value());

  // Consequent true, negated antecedent false.
  const AtomLabeler labeler = [](const GroundAtom&) { return true; };
  const auto lm = collect_metrics(tape, &labeler);
  CHECK(*lm.cu_cons_ratio() == 1.0);
  CHECK(*lm.cu_ant_ratio() == 0.0);
}

TEST_CASE("aggregated and local chain modes") {
  OperatorSuite s;
  s.aggregator = AggregatorKind::Product;
  const auto tape = pq_tape(s, {{0.9, 0.5}, {0.4, 0.8}});
  const auto local = collect_metrics(tape, nullptr, ChainMode::ImplicationLocal);
  CHECK(local.cons_magnitude == doctest::Approx(0.9 + 0.4).epsilon(1e-14));
  CHECK(local.ant_magnitude == doctest::Approx(0.5 + 0.2).epsilon(1e-14));
  // Product aggregation scales each instance by the other instance's truth.
  const double i1 = 1 - 0.9 + 0.45, i2 = 1 - 0.4 + 0.32;
  const auto agg = collect_metrics(tape, nullptr, ChainMode::Aggregated);
  CHECK(agg.cons_magnitude == doctest::Approx(0.9 * i2 + 0.4 * i1).epsilon(1e-14));
  CHECK(agg.ant_magnitude == doctest::Approx(0.5 * i2 + 0.2 * i1).epsilon(1e-14));
  CHECK(parse_chain_mode("local") == ChainMode::ImplicationLocal);
  CHECK(parse_chain_mode("aggregated") == ChainMode::Aggregated);
  CHECK_THROWS_AS(parse_chain_mode("global"), std::invalid_argument);
}

TEST_CASE("Godel sends nothing to the antecedent") {
  OperatorSuite s;
  s.implication = BaseImplication::Godel;
  std::mt19937_64 rng(1);
  std::vector<std::pair<double, double>> inst;
  for (int i = 0; i < 20; ++i) {
    inst.emplace_back(std::uniform_real_distribution<double>(0, 1)(rng), std::uniform_real_distribution<double>(0, 1)(rng));
  }
  const AtomLabeler labeler = [](const GroundAtom& a) { return a.args[0] % 2 == 0; };
  const auto m = collect_metrics(pq_tape(s, inst), &labeler);
  CHECK(m.ant_magnitude == 0.0);
  CHECK(m.cons_magnitude > 0.0);
  CHECK_FALSE(m.cu_ant_ratio().has_value());
  CHECK(format_optional(m.cu_ant_ratio()).empty());
}

TEST_CASE("S-implications split evenly when c = 1 - a") {
  std::mt19937_64 rng(2);
  for (auto imp : {Implication(BaseImplication::KleeneDienes), Implication(BaseImplication::Reichenbach),
                   Implication(BaseImplication::Lukasiewicz), Implication::sigmoidal(BaseImplication::Reichenbach, 9)}) {
    for (auto agg : {AggregatorKind::Product, AggregatorKind::LogProduct}) {
      OperatorSuite s;
      s.implication = imp;
      s.aggregator = agg;
      std::vector<std::pair<double, double>> inst;
      for (int i = 0; i < 16; ++i) {
        const double a = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        inst.emplace_back(a, 1.0 - a);
      }
      CAPTURE(s.describe());
      CHECK(std::abs(*collect_metrics(pq_tape(s, inst)).cons_ratio() - 0.5) < 1e-9);
    }
  }
}

TEST_CASE("correctly-updated parts are bounded by the magnitudes") {
  OperatorSuite s;
  s.aggregator = AggregatorKind::LogProduct;
  std::mt19937_64 rng(3);
  std::vector<std::pair<double, double>> inst;
  for (int i = 0; i < 30; ++i) {
    inst.emplace_back(std::uniform_real_distribution<double>(0, 1)(rng), std::uniform_real_distribution<double>(0, 1)(rng));
  }
  const AtomLabeler labeler = [](const GroundAtom& a) { return (a.args[0] * 7 + a.predicate.size()) % 3 == 0; };
  const auto m = collect_metrics(pq_tape(s, inst), &labeler);
  CHECK(*m.cu_cons <= m.cons_magnitude);
  CHECK(*m.cu_ant <= m.ant_magnitude);
  CHECK(*m.cu_cons_ratio() >= 0.0);
  CHECK(*m.cu_cons_ratio() <= 1.0);
  CHECK(*m.cu_ant_ratio() >= 0.0);
  CHECK(*m.cu_ant_ratio() <= 1.0);
  CHECK(*m.cu_cons + (m.cons_magnitude - *m.cu_cons) == m.cons_magnitude);
}

TEST_CASE("classical values of compound nodes") {
  TableInterpretation interp;
  interp.table = {{{"p", {0}}, 0.9}, {{"q", {0}}, 0.2}, {{"r", {0}}, 0.7}};
  auto v = evaluate(DflStructure{interp}, OperatorSuite{}, parse_formula("forall x. p(x) & ~q(x) -> r(x) | q(x)"),
                    GroundingBatch{Eigen::MatrixXd::Zero(1, 1), {}});
  const auto& rec = v.tape.formulas.at(0);
  const auto& imp = v.tape.nodes.at(rec.instance_nodes.at(0));
  REQUIRE(imp.op == TapeOp::Implies);
  const AtomLabeler labeler = [](const GroundAtom& a) { return a.predicate == "p"; };
  CHECK(classical_value(v.tape, imp.lhs, labeler));
  CHECK_FALSE(classical_value(v.tape, imp.rhs, labeler));
  CHECK_FALSE(classical_value(v.tape, rec.instance_nodes[0], labeler));
}

TEST_CASE("metric sums") {
  GradientMetrics a{1.0, 3.0, 0.5, 1.0, 2};
  GradientMetrics b{2.0, 1.0, std::nullopt, 0.5, 1};
  a += b;
  CHECK(a.cons_magnitude == 3.0);
  CHECK(a.ant_magnitude == 4.0);
  CHECK_FALSE(a.cu_cons.has_value());
  CHECK(*a.cu_ant == 1.5);
  CHECK(a.instances == 3);
  CHECK_FALSE(GradientMetrics{}.cons_ratio().has_value());
}

TEST_CASE("surface examples") {
  const auto rc = export_surface(BaseImplication::Reichenbach, SurfaceQuantity::DNegAntecedent, 11);
  CHECK(rc.at(0, 0) == 1.0);
  const auto goguen = export_surface(BaseImplication::Goguen, SurfaceQuantity::DConsequent, 11);
  CHECK(goguen.coord(1) == doctest::Approx(0.1));
  CHECK(goguen.at(1, 0) == doctest::Approx(10.0).epsilon(1e-12));

  const auto plain = export_surface(BaseImplication::Reichenbach, SurfaceQuantity::DConsequent, 11);
  const auto sig = export_surface(Implication::sigmoidal(BaseImplication::Reichenbach, 9), SurfaceQuantity::DConsequent, 11);
  CHECK(sig.at(10, 10) < plain.at(10, 10));
  // At (0,0) the Reichenbach consequent partial is already 0; the corner's
  // gradient goes to the negated antecedent, and that one shrinks.
  CHECK(sig.at(0, 0) <= plain.at(0, 0));
  const auto sig_na = export_surface(Implication::sigmoidal(BaseImplication::Reichenbach, 9), SurfaceQuantity::DNegAntecedent, 11);
  CHECK(sig_na.at(0, 0) < rc.at(0, 0));

  // The consequent derivative at (1,1) shrinks as the spread grows.
  double prev = INFINITY;
  for (double s : {1.0, 3.0, 6.0, 9.0}) {
    const double d = export_surface(Implication::sigmoidal(BaseImplication::Reichenbach, s),
                                    SurfaceQuantity::DConsequent, 2).at(1, 1);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("log-aggregated surfaces divide by the implication value") {
  const auto v = export_surface(BaseImplication::Reichenbach, SurfaceQuantity::Value, 21);
  const auto d = export_surface(BaseImplication::Reichenbach, SurfaceQuantity::DConsequent, 21);
  const auto l = export_surface(BaseImplication::Reichenbach, SurfaceQuantity::LogAggregatedDConsequent, 21);
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) {
      CHECK(l.at(i, j) == doctest::Approx(d.at(i, j) / std::max(v.at(i, j), kEpsilon)).epsilon(1e-14));
    }
  }
  const auto lg = export_surface(BaseImplication::Reichenbach, SurfaceQuantity::Value, 21, true);
  CHECK(lg.at(20, 0) == doctest::Approx(std::log10(kEpsilon)));
  CHECK(lg.at(0, 0) == 0.0);
}

TEST_CASE("surface corners satisfy the boundary values") {
  for (auto b : {BaseImplication::KleeneDienes, BaseImplication::Reichenbach, BaseImplication::Lukasiewicz,
                 BaseImplication::Godel, BaseImplication::Goguen}) {
    const auto g = export_surface(b, SurfaceQuantity::Value, 101);
    CHECK(g.at(0, 0) == 1.0);
    CHECK(g.at(100, 100) == 1.0);
    CHECK(g.at(100, 0) == 0.0);
    for (double x : g.cells) CHECK(std::isfinite(x));
  }
  CHECK_THROWS_AS(export_surface(BaseImplication::Reichenbach, SurfaceQuantity::Value, 1), std::invalid_argument);
}

TEST_CASE("surface csv and quantity names") {
  std::ostringstream out;
  write_surface_csv(out, export_surface(BaseImplication::Reichenbach, SurfaceQuantity::Value, 3));
  const auto text = out.str();
  CHECK(text.rfind("a,c,value\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);
  for (auto q : {SurfaceQuantity::Value, SurfaceQuantity::DConsequent, SurfaceQuantity::DNegAntecedent,
                 SurfaceQuantity::LogAggregatedDConsequent, SurfaceQuantity::LogAggregatedDNegAntecedent}) {
    CHECK(parse_surface_quantity(to_string(q)) == q);
  }
  CHECK_THROWS_AS(parse_surface_quantity("curl"), std::invalid_argument);
}

TEST_CASE("run summaries") {
  const std::vector<EpochRecord> one = {{1, GradientMetrics{1.0, 3.0, 0.5, 1.0, 4}, 0.7}};
  const auto s1 = summarize_run(one);
  REQUIRE(s1.rows.size() == 1);
  CHECK(s1.final_accuracy == 0.7);
  CHECK(s1.mean_accuracy == 0.7);
  CHECK(*s1.total.cons_ratio() == *one[0].metrics.cons_ratio());

  const std::vector<EpochRecord> zero = {{1, GradientMetrics{0.0, 0.0, 0.0, 0.0, 0}, 0.1}};
  std::ostringstream z;
  write_metrics_csv(z, zero);
  CHECK(z.str() == "epoch,cons_pct,cu_cons_pct,cu_ant_pct,accuracy\n1,,,,0.1\n");
  CHECK(z.str().find("nan") == std::string::npos);

  std::vector<EpochRecord> many;
  for (std::size_t e = 1; e <= 5; ++e) many.push_back({e, GradientMetrics{1.0, 1.0, 0.5, 0.5, 1}, 0.1 * static_cast<double>(e)});
  const auto s = summarize_run(many);
  CHECK(s.final_accuracy == doctest::Approx(0.5));
  CHECK(s.mean_accuracy == doctest::Approx(0.3));
  std::ostringstream out;
  write_metrics_csv(out, s.rows);
  const auto csv = out.str();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  std::ostringstream sum;
  write_summary(sum, s);
  CHECK(sum.str().find("final_accuracy=0.5") != std::string::npos);

  CHECK_THROWS_AS(summarize_run(std::span<const EpochRecord>{}), std::invalid_argument);
  many[3].epoch = 2;
  CHECK_THROWS_AS(summarize_run(many), std::invalid_argument);
}
