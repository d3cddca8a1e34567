#include "dfl/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dfl/models.hpp"
#include "dfl/neural_interp.hpp"
#include "dfl/trainer.hpp"

namespace dfl {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t iteration, std::uint64_t stream) {
  return splitmix(splitmix(splitmix(seed) ^ iteration) ^ stream);
}

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::size_t> pick(std::span<const std::size_t> pool, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> out;
  for (std::size_t k : sample_indices(pool.size(), count, seed)) out.push_back(pool[k]);
  return out;
}

}  // namespace

std::string mask_label(std::span<const int> mask) {
  std::string out;
  for (std::size_t i = 0; i < mask.size(); ++i) out += (i ? "+" : "") + std::to_string(mask[i]);
  return out;
}

KnowledgeBase build_digit_kb(std::span<const int> mask) {
  if (mask.empty()) throw std::invalid_argument("formula mask must be non-empty");
  bool use[4] = {false, false, false, false};
  for (int m : mask) {
    if (m < 1 || m > 3) throw std::invalid_argument("formula mask entries must be 1, 2 or 3");
    use[m] = true;
  }
  std::ostringstream kb;
  for (auto d : kDigitPredicates) kb << "pred " << d << "/1\n";
  kb << "pred same/2\n";
  if (use[1]) {
    for (auto d : kDigitPredicates) kb << "rule 1 forall x y. " << d << "(x) & " << d << "(y) -> same(x, y)\n";
  }
  if (use[2]) {
    for (auto d : kDigitPredicates) kb << "rule 1 forall x y. " << d << "(x) & same(x, y) -> " << d << "(y)\n";
  }
  if (use[3]) kb << "rule 1 forall x y. same(x, y) -> same(y, x)\n";
  return parse_kb(kb.str());
}

std::filesystem::path resolve_data_dir(const RunConfig& config, const std::filesystem::path& fallback) {
  if (!config.data_dir.empty()) return config.data_dir;
  if (const char* env = std::getenv("DFL_DATA_DIR"); env && *env) return env;
  return fallback;
}

DigitDataset load_experiment_data(const RunConfig& config, const std::filesystem::path& dir) {
  const DigitDataset train = take(load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte"),
                                  config.train_size);
  const DigitDataset test = take(load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte"),
                                 config.test_size);
  return make_split(with_test_set(train, test), config.labeled_fraction, config.seed);
}

RunReport run_single(const RunConfig& config, const DigitDataset& data, InterpretationParams* final_params) {
  config.validate();
  RunReport report;
  report.label = config.w_dfl > 0.0 ? config.implication : "baseline";
  report.seed = config.seed;

  ClassifierSpec spec;
  spec.input_dim = data.image_dim();
  spec.conv_frontend = config.conv;
  const DigitModel model(spec, NTNSpec{});
  InterpretationParams params = model.init_params(config.seed);
  Optimizer optimizer(config.optimizer_config(), params.theta.size());

  const auto labeled = data.indices(SplitTag::Labeled);
  const auto unlabeled = data.indices(SplitTag::Unlabeled);
  const auto test = data.indices(SplitTag::Test);
  if (labeled.empty()) throw std::invalid_argument("dataset has no labeled rows");
  const Eigen::MatrixXd test_images = gather_images(data, test);
  std::vector<int> test_labels;
  for (std::size_t r : test) test_labels.push_back(data.labels[r]);

  const KnowledgeBase kb = build_digit_kb(config.formulas);
  const bool logic = config.w_dfl > 0.0 && !unlabeled.empty();
  const ChainMode chain = config.chain_mode();

  std::vector<int> batch_labels;
  const AtomLabeler labeler = [&](const GroundAtom& atom) {
    if (const auto d = digit_of(atom.predicate)) return batch_labels.at(atom.args.at(0)) == *d;
    return batch_labels.at(atom.args.at(0)) == batch_labels.at(atom.args.at(1));
  };

  StepInput input;
  input.suite = config.suite();
  input.supervised.negative_ratio = config.negative_ratio;
  input.dfl.max_instances = config.max_instances;
  input.dfl.normalize = config.dfl_normalize;

  GradientMetrics window;
  window.cu_cons = 0.0;
  window.cu_ant = 0.0;
  report.total = window;
  double window_loss = 0.0;
  std::size_t window_steps = 0;

  for (std::size_t it = 1; it <= config.iterations; ++it) {
    const LabeledBatch lb = gather(data, pick(labeled, config.labeled_batch, stream_seed(config.seed, it, 1)));
    const auto unl_rows = pick(unlabeled, config.unlabeled_batch, stream_seed(config.seed, it, 2));
    const Eigen::MatrixXd ub = gather_images(data, unl_rows);
    batch_labels.clear();
    for (std::size_t r : unl_rows) batch_labels.push_back(data.labels[r]);

    const bool warm = it > config.dfl_warmup;
    input.kb = logic && warm ? &kb : nullptr;
    input.w_dfl = logic && warm ? config.w_dfl : 0.0;
    input.labeled = &lb;
    input.unlabeled = &ub;
    input.supervised.seed = stream_seed(config.seed, it, 3);
    input.grounding_seed = stream_seed(config.seed, it, 4);
    StepResult step;
    try {
      step = train_step(model, params, optimizer, input);
    } catch (const NonFiniteGradient& e) {
      report.abort_message = "iteration " + std::to_string(it) + ": " + e.what() + "; suite " +
                             input.suite.describe() + "; |theta| " + real(params.theta.norm());
      break;
    }
    window_loss += step.loss;
    ++window_steps;
    if (step.tape) window += collect_metrics(*step.tape, &labeler, chain);

    if (it % config.eval_every == 0 || it == config.iterations) {
      ReportRow row;
      row.iteration = it;
      row.loss = window_loss / static_cast<double>(window_steps);
      row.accuracy = evaluate_accuracy(model, params, test_images, test_labels);
      row.metrics = window;
      report.rows.push_back(row);
      report.total += window;
      window = GradientMetrics{};
      window.cu_cons = 0.0;
      window.cu_ant = 0.0;
      window_loss = 0.0;
      window_steps = 0;
    }
  }
  report.final_accuracy = evaluate_accuracy(model, params, test_images, test_labels);
  if (final_params) *final_params = params;
  return report;
}

ExperimentResult run_experiment(const RunConfig& config, const DigitDataset& data) {
  ExperimentResult out{run_single(config, data), std::nullopt};
  if (config.baseline) {
    RunConfig b = config;
    b.w_dfl = 0.0;
    out.baseline = run_single(b, data);
  }
  return out;
}

void write_report_csv(std::ostream& out, const RunReport& report) {
  out << "iteration,loss,accuracy,cons_pct,cu_cons_pct,cu_ant_pct,cons_abs,ant_abs\n";
  for (const auto& r : report.rows) {
    out << r.iteration << ',' << real(r.loss) << ',' << real(r.accuracy) << ',' << format_optional(r.metrics.cons_ratio())
        << ',' << format_optional(r.metrics.cu_cons_ratio()) << ',' << format_optional(r.metrics.cu_ant_ratio()) << ','
        << real(r.metrics.cons_magnitude) << ',' << real(r.metrics.ant_magnitude) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "label,seed,accuracy,cons_pct,cu_cons_pct,cu_ant_pct,cons_abs,ant_abs,aborted\n";
  for (const auto& r : rows) {
    out << r.label << ',' << r.seed << ',' << real(r.accuracy) << ',' << format_optional(r.metrics.cons_ratio()) << ','
        << format_optional(r.metrics.cu_cons_ratio()) << ',' << format_optional(r.metrics.cu_ant_ratio()) << ','
        << real(r.metrics.cons_magnitude) << ',' << real(r.metrics.ant_magnitude) << ',' << (r.aborted ? 1 : 0)
        << '\n';
  }
}

std::vector<SweepStats> sweep_stats(std::span<const SweepRow> rows) {
  std::vector<SweepStats> out;
  for (const auto& r : rows) {
    bool seen = false;
    for (const auto& s : out) seen = seen || s.label == r.label;
    if (seen) continue;
    std::vector<double> acc, cons;
    for (const auto& q : rows) {
      if (q.label != r.label) continue;
      acc.push_back(q.accuracy);
      if (const auto c = q.metrics.cons_ratio()) cons.push_back(*c);
    }
    auto mean_std = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      return std::pair{m, sd};
    };
    SweepStats s;
    s.label = r.label;
    s.runs = acc.size();
    std::tie(s.mean_accuracy, s.std_accuracy) = mean_std(acc);
    if (cons.size() == acc.size()) {
      const auto [m, sd] = mean_std(cons);
      s.mean_cons_pct = m;
      s.std_cons_pct = sd;
    }
    out.push_back(s);
  }
  return out;
}

void write_sweep_stats_csv(std::ostream& out, std::span<const SweepStats> stats) {
  out << "label,runs,mean_accuracy,std_accuracy,mean_cons_pct,std_cons_pct\n";
  for (const auto& s : stats) {
    out << s.label << ',' << s.runs << ',' << real(s.mean_accuracy) << ',' << real(s.std_accuracy) << ','
        << format_optional(s.mean_cons_pct) << ',' << format_optional(s.std_cons_pct) << '\n';
  }
}

}  // namespace dfl
