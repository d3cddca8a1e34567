// dfl: train, sweep, surface, check-props, ablate.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dfl/checkpoint.hpp"
#include "dfl/diagnostics.hpp"
#include "dfl/experiment.hpp"
#include "dfl/property_audit.hpp"
#include "dfl/run_config.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::string data_dir;
  std::optional<std::string> implication;
  std::optional<double> s;
  std::optional<double> w_dfl;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key=value run configuration")->check(CLI::ExistingFile);
    app->add_option("--data-dir", data_dir, "directory holding the IDX files");
    app->add_option("--s", s, "sigmoidal spread");
    app->add_option("--w-dfl", w_dfl, "logic loss weight");
    app->add_option("--seed", seed, "run seed");
    app->add_option("--iterations", iterations, "training iterations");
    app->add_option("--set", sets, "extra key=value override (repeatable)");
  }

  dfl::RunConfig build() const {
    dfl::RunConfig c = config_path.empty() ? dfl::RunConfig{} : dfl::load_run_config(config_path);
    if (!data_dir.empty()) c.data_dir = data_dir;
    if (implication) c.implication = *implication;
    if (s) c.s = *s;
    if (w_dfl) c.w_dfl = *w_dfl;
    if (seed) c.seed = *seed;
    if (iterations) c.iterations = *iterations;
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
      c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    c.validate();
    return c;
  }
};

dfl::DigitDataset load_data(const dfl::RunConfig& c) {
  return dfl::load_experiment_data(c, dfl::resolve_data_dir(c, DFL_DEFAULT_DATA_DIR));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& s : split(text, ',')) out.push_back(std::stoull(s));
  return out;
}

// Writes to `path`, or stdout when path is empty or "-".
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write(out);
}

std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable fuzzy logic experiments"};
  app.require_subcommand(1);

  Overrides train_opts;
  std::string train_out, train_checkpoint;
  bool train_baseline = false;
  auto* train = app.add_subcommand("train", "train one model and write its report CSV");
  train_opts.attach(train);
  train->add_option("--implication", train_opts.implication, "implication (kd, rc, lk, godel, goguen, sigmoidal-rc, ...)");
  train->add_option("--out", train_out, "report CSV path (default stdout)");
  train->add_option("--checkpoint", train_checkpoint, "write trained parameters here");
  train->add_flag("--baseline", train_baseline, "also run w_dfl = 0 and write <out>.baseline.csv");

  Overrides sweep_opts;
  std::string sweep_imps = "kd,rc,lk,godel,goguen", sweep_seeds = "0,1,2", sweep_out, sweep_stats_out;
  bool sweep_no_baseline = false;
  auto* sweep = app.add_subcommand("sweep", "train every implication for every seed");
  sweep_opts.attach(sweep);
  sweep->add_option("--implications", sweep_imps, "comma-separated implication names");
  sweep->add_option("--seeds", sweep_seeds, "comma-separated seeds");
  sweep->add_option("--out", sweep_out, "per-run CSV (default stdout)");
  sweep->add_option("--stats", sweep_stats_out, "per-implication mean/std CSV");
  sweep->add_flag("--no-baseline", sweep_no_baseline, "skip the w_dfl = 0 runs");

  std::string surf_imp = "rc", surf_quantity = "value", surf_out;
  double surf_s = 9.0;
  int surf_res = 101;
  bool surf_log = false;
  auto* surface = app.add_subcommand("surface", "export an implication value or derivative surface");
  surface->add_option("--implication", surf_imp, "implication name");
  surface->add_option("--s", surf_s, "spread for sigmoidal implications");
  surface->add_option("--quantity", surf_quantity,
                      "value, d_consequent, d_neg_antecedent, log_aggregated_d_consequent, "
                      "log_aggregated_d_neg_antecedent");
  surface->add_option("--resolution", surf_res, "grid points per axis")->check(CLI::Range(2, 100000));
  surface->add_option("--out", surf_out, "CSV path (default stdout)");
  surface->add_flag("--log", surf_log, "log10 of each cell");

  int props_grid = 101;
  double props_s = 9.0;
  auto* props = app.add_subcommand("check-props", "audit the implication catalog against its property claims");
  props->add_option("--grid", props_grid, "grid points per axis")->check(CLI::Range(2, 100000));
  props->add_option("--s", props_s, "spread for the sigmoidal entries");

  Overrides ablate_opts;
  std::string ablate_masks = "1+2+3;1+2;1+3;2+3;1;2;3", ablate_seeds = "0,1,2", ablate_out, ablate_stats_out;
  auto* ablate = app.add_subcommand("ablate", "train with subsets of the digit formulas");
  ablate_opts.attach(ablate);
  ablate->add_option("--implication", ablate_opts.implication, "implication name");
  ablate->add_option("--masks", ablate_masks, "';'-separated formula subsets, e.g. 1+2;2+3");
  ablate->add_option("--seeds", ablate_seeds, "comma-separated seeds");
  ablate->add_option("--out", ablate_out, "per-run CSV (default stdout)");
  ablate->add_option("--stats", ablate_stats_out, "per-mask mean/std CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const dfl::RunConfig cfg = train_opts.build();
      const dfl::DigitDataset data = load_data(cfg);
      dfl::InterpretationParams params{dfl::ParamLayout{}};
      const dfl::RunReport run = dfl::run_single(cfg, data, &params);
      emit(train_out, [&](std::ostream& o) { dfl::write_report_csv(o, run); });
      if (!train_checkpoint.empty()) dfl::save_checkpoint(train_checkpoint, params);
      std::cerr << run.label << " seed " << run.seed << " accuracy " << run.final_accuracy << '\n';
      if (train_baseline || cfg.baseline) {
        dfl::RunConfig b = cfg;
        b.w_dfl = 0.0;
        const dfl::RunReport base = dfl::run_single(b, data);
        const std::string path = train_out.empty() || train_out == "-" ? "" : sibling(train_out, ".baseline");
        emit(path, [&](std::ostream& o) { dfl::write_report_csv(o, base); });
        std::cerr << "baseline seed " << base.seed << " accuracy " << base.final_accuracy << '\n';
      }
      if (run.aborted()) {
        std::cerr << "aborted: " << run.abort_message << '\n';
        return 2;
      }
      return 0;
    }
    if (*sweep) {
      const dfl::RunConfig cfg = sweep_opts.build();
      const auto imps = split(sweep_imps, ',');
      const auto seeds = parse_seeds(sweep_seeds);
      const auto rows = dfl::run_sweep(cfg, imps, seeds, !sweep_no_baseline, load_data);
      emit(sweep_out, [&](std::ostream& o) { dfl::write_sweep_csv(o, rows); });
      const auto stats = dfl::sweep_stats(rows);
      if (!sweep_stats_out.empty()) emit(sweep_stats_out, [&](std::ostream& o) { dfl::write_sweep_stats_csv(o, stats); });
      else dfl::write_sweep_stats_csv(std::cerr, stats);
      return 0;
    }
    if (*surface) {
      const auto kind = dfl::Implication::parse(surf_imp, surf_s);
      const auto grid = dfl::export_surface(kind, dfl::parse_surface_quantity(surf_quantity), surf_res, surf_log);
      emit(surf_out, [&](std::ostream& o) { dfl::write_surface_csv(o, grid); });
      return 0;
    }
    if (*props) {
      return dfl::check_props(dfl::default_catalog(props_s), props_grid, std::cout);
    }
    if (*ablate) {
      const dfl::RunConfig cfg = ablate_opts.build();
      std::vector<std::vector<int>> masks;
      for (auto m : split(ablate_masks, ';')) {
        for (char& ch : m) ch = ch == '+' ? ',' : ch;
        masks.push_back(dfl::parse_formula_mask(m));
      }
      const auto rows = dfl::run_ablation(cfg, masks, parse_seeds(ablate_seeds), load_data);
      emit(ablate_out, [&](std::ostream& o) { dfl::write_sweep_csv(o, rows); });
      const auto stats = dfl::sweep_stats(rows);
      if (!ablate_stats_out.empty()) emit(ablate_stats_out, [&](std::ostream& o) { dfl::write_sweep_stats_csv(o, stats); });
      else dfl::write_sweep_stats_csv(std::cerr, stats);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
