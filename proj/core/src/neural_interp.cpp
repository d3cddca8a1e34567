#include "dfl/neural_interp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace dfl {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void scatter_pairs(const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const Eigen::MatrixXd& d_e1,
                   const Eigen::MatrixXd& d_e2, Eigen::MatrixXd& d_embed) {
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    const auto col = static_cast<Eigen::Index>(n);
    d_embed.col(static_cast<Eigen::Index>(pairs[n].first)) += d_e1.col(col);
    d_embed.col(static_cast<Eigen::Index>(pairs[n].second)) += d_e2.col(col);
  }
}

void gather_pairs(const Eigen::MatrixXd& embeddings, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                  Eigen::MatrixXd& e1, Eigen::MatrixXd& e2) {
  const auto n = static_cast<Eigen::Index>(pairs.size());
  e1.resize(embeddings.rows(), n);
  e2.resize(embeddings.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    e1.col(k) = embeddings.col(static_cast<Eigen::Index>(pairs[static_cast<std::size_t>(k)].first));
    e2.col(k) = embeddings.col(static_cast<Eigen::Index>(pairs[static_cast<std::size_t>(k)].second));
  }
}

}  // namespace

std::optional<int> digit_of(std::string_view predicate) noexcept {
  for (std::size_t i = 0; i < kDigitPredicates.size(); ++i) {
    if (kDigitPredicates[i] == predicate) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> out;
  if (count >= n) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return out;
  }
  std::mt19937_64 rng(seed);
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(count * 2);
  for (std::size_t j = n - count; j < n; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  out.assign(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

DigitInterpretation::DigitInterpretation(const DigitModel& model, const InterpretationParams& params,
                                         const Eigen::MatrixXd& objects)
    : model_(model), params_(params), objects_(objects), acts_(model.classify(params, objects)) {}

std::size_t DigitInterpretation::object_dim() const {
  return static_cast<std::size_t>(model_.classifier_spec().input_dim);
}

void DigitInterpretation::check_objects(const Eigen::MatrixXd& objects) const {
  if (objects.rows() != objects_.rows() || objects.cols() != objects_.cols() || objects != objects_) {
    throw std::invalid_argument("objects differ from the batch this interpretation was built on");
  }
}

void DigitInterpretation::truths(const Eigen::MatrixXd& objects, std::span<const GroundAtom> atoms,
                                 std::span<double> out) const {
  check_objects(objects);
  if (out.size() != atoms.size()) throw std::invalid_argument("output span size mismatch");
  const auto n_obj = static_cast<ObjectIndex>(objects_.rows());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> pair_slots;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto& atom = atoms[i];
    for (ObjectIndex o : atom.args) {
      if (o >= n_obj) throw std::out_of_range("object index " + std::to_string(o) + " outside the batch");
    }
    if (const auto d = digit_of(atom.predicate)) {
      if (atom.args.size() != 1) throw std::invalid_argument("predicate '" + atom.predicate + "' has arity 1");
      out[i] = acts_.probs(*d, static_cast<Eigen::Index>(atom.args[0]));
    } else if (atom.predicate == kSamePredicate) {
      if (atom.args.size() != 2) throw std::invalid_argument("predicate 'same' has arity 2");
      pairs.emplace_back(atom.args[0], atom.args[1]);
      pair_slots.push_back(i);
    } else {
      throw std::invalid_argument("unknown predicate '" + atom.predicate + "'");
    }
  }
  if (pairs.empty()) return;
  Eigen::MatrixXd e1, e2;
  gather_pairs(acts_.embeddings(), pairs, e1, e2);
  const NtnActivations rel = model_.relate(params_, e1, e2);
  for (std::size_t k = 0; k < pairs.size(); ++k) out[pair_slots[k]] = rel.out(static_cast<Eigen::Index>(k));
}

void DigitInterpretation::accumulate_gradient(std::span<const GroundAtom> atoms, std::span<const double> d_truths,
                                              InterpretationParams& grad) const {
  if (d_truths.size() != atoms.size()) throw std::invalid_argument("gradient span size mismatch");
  Eigen::MatrixXd d_probs = Eigen::MatrixXd::Zero(acts_.probs.rows(), acts_.probs.cols());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> d_pairs;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto& atom = atoms[i];
    if (const auto d = digit_of(atom.predicate)) {
      d_probs(*d, static_cast<Eigen::Index>(atom.args.at(0))) += d_truths[i];
    } else if (atom.predicate == kSamePredicate) {
      pairs.emplace_back(atom.args.at(0), atom.args.at(1));
      d_pairs.push_back(d_truths[i]);
    } else {
      throw std::invalid_argument("unknown predicate '" + atom.predicate + "'");
    }
  }
  Eigen::MatrixXd d_embed = Eigen::MatrixXd::Zero(acts_.embeddings().rows(), acts_.embeddings().cols());
  if (!pairs.empty()) {
    Eigen::MatrixXd e1, e2;
    gather_pairs(acts_.embeddings(), pairs, e1, e2);
    const NtnActivations rel = model_.relate(params_, e1, e2);
    Eigen::VectorXd d_logit(rel.out.size());
    for (Eigen::Index k = 0; k < d_logit.size(); ++k) {
      const double s = rel.out(k);
      d_logit(k) = d_pairs[static_cast<std::size_t>(k)] * s * (1.0 - s);
    }
    Eigen::MatrixXd d_e1, d_e2;
    model_.relate_backward(params_, rel, d_logit, grad, d_e1, d_e2);
    scatter_pairs(pairs, d_e1, d_e2, d_embed);
  }
  const Eigen::MatrixXd d_logits = DigitModel::probs_to_logits_grad(acts_.probs, d_probs);
  model_.classifier_backward(params_, acts_, d_logits, &d_embed, grad);
}

TruthValue predicate_truth(const DigitModel& model, const InterpretationParams& params, std::string_view predicate,
                           std::span<const Eigen::VectorXd> objects) {
  const std::size_t arity = digit_of(predicate) ? 1 : predicate == kSamePredicate ? 2 : 0;
  if (arity == 0) throw std::invalid_argument("unknown predicate '" + std::string(predicate) + "'");
  if (objects.size() != arity) {
    throw std::invalid_argument("predicate '" + std::string(predicate) + "' has arity " + std::to_string(arity) +
                                ", got " + std::to_string(objects.size()) + " objects");
  }
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(arity), model.classifier_spec().input_dim);
  for (std::size_t i = 0; i < arity; ++i) {
    if (objects[i].size() != rows.cols()) throw std::invalid_argument("object vector has the wrong dimension");
    rows.row(static_cast<Eigen::Index>(i)) = objects[i].transpose();
  }
  const DigitInterpretation interp(model, params, rows);
  GroundAtom atom{std::string(predicate), {}};
  for (std::size_t i = 0; i < arity; ++i) atom.args.push_back(static_cast<ObjectIndex>(i));
  double v = 0.0;
  interp.truths(rows, {&atom, 1}, {&v, 1});
  return TruthValue(v);
}

SamePairs sample_same_pairs(std::span<const int> labels, double negative_ratio, std::uint64_t seed) {
  if (!(negative_ratio >= 0.0) || !std::isfinite(negative_ratio)) {
    throw std::invalid_argument("negative ratio must be finite and non-negative");
  }
  SamePairs out;
  std::vector<std::pair<std::size_t, std::size_t>> negatives;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      (labels[i] == labels[j] ? out.positive : negatives).emplace_back(i, j);
    }
  }
  const auto keep = static_cast<std::size_t>(std::llround(negative_ratio * static_cast<double>(out.positive.size())));
  for (std::size_t k : sample_indices(negatives.size(), keep, seed)) out.negative.push_back(negatives[k]);
  return out;
}

SupervisedLoss supervised_loss(const DigitModel& model, const InterpretationParams& params, const LabeledBatch& batch,
                               const SupervisedLossOptions& options, InterpretationParams* grad) {
  const auto n = static_cast<std::size_t>(batch.images.rows());
  if (batch.labels.size() != n) throw std::invalid_argument("label count does not match image count");
  const auto classes = model.classifier_spec().num_classes;
  for (int y : batch.labels) {
    if (y < 0 || y >= classes) throw std::invalid_argument("label " + std::to_string(y) + " out of range");
  }
  SupervisedLoss loss;
  if (n == 0) return loss;

  const ClassifierActivations acts = model.classify(params, batch.images);
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd d_logits = acts.probs * inv_n;
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const auto y = static_cast<Eigen::Index>(batch.labels[j]);
    const double m = acts.logits.col(col).maxCoeff();
    const double lse = m + std::log((acts.logits.col(col).array() - m).exp().sum());
    loss.cross_entropy += (lse - acts.logits(y, col)) * inv_n;
    d_logits(y, col) -= inv_n;
  }

  Eigen::MatrixXd d_embed;
  if (options.include_same) {
    const SamePairs sp = sample_same_pairs(batch.labels, options.negative_ratio, options.seed);
    loss.positive_pairs = sp.positive.size();
    loss.negative_pairs = sp.negative.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs = sp.positive;
    pairs.insert(pairs.end(), sp.negative.begin(), sp.negative.end());
    Eigen::MatrixXd e1, e2;
    gather_pairs(acts.embeddings(), pairs, e1, e2);
    const NtnActivations rel = model.relate(params, e1, e2);
    const double inv_p = 1.0 / static_cast<double>(pairs.size());
    Eigen::VectorXd d_logit(rel.logit.size());
    for (Eigen::Index k = 0; k < d_logit.size(); ++k) {
      const double y = static_cast<std::size_t>(k) < sp.positive.size() ? 1.0 : 0.0;
      const double z = rel.logit(k);
      loss.same_bce += (softplus(z) - y * z) * inv_p;
      d_logit(k) = (logistic(z) - y) * inv_p;
    }
    if (grad) {
      Eigen::MatrixXd d_e1, d_e2;
      model.relate_backward(params, rel, d_logit, *grad, d_e1, d_e2);
      d_embed = Eigen::MatrixXd::Zero(acts.embeddings().rows(), acts.embeddings().cols());
      scatter_pairs(pairs, d_e1, d_e2, d_embed);
    }
  }
  loss.value = loss.cross_entropy + loss.same_bce;
  if (grad) model.classifier_backward(params, acts, d_logits, d_embed.size() ? &d_embed : nullptr, *grad);
  return loss;
}

double evaluate_accuracy(const DigitModel& model, const InterpretationParams& params, const Eigen::MatrixXd& images,
                         std::span<const int> labels) {
  if (labels.size() != static_cast<std::size_t>(images.rows())) {
    throw std::invalid_argument("label count does not match image count");
  }
  if (labels.empty()) return 0.0;
  constexpr Eigen::Index kChunk = 256;
  std::size_t correct = 0;
  for (Eigen::Index start = 0; start < images.rows(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, images.rows() - start);
    const ClassifierActivations acts = model.classify(params, images.middleRows(start, len));
    for (Eigen::Index j = 0; j < len; ++j) {
      Eigen::Index arg = 0;
      acts.probs.col(j).maxCoeff(&arg);
      if (arg == labels[static_cast<std::size_t>(start + j)]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace dfl
