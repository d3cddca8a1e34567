#pragma once

// Embedded interpretation for the digit domain: ten unary class predicates
// read off the classifier softmax and a binary `same` predicate scored by the
// relation network on the classifier's embeddings.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dfl/grounding.hpp"
#include "dfl/models.hpp"
#include "dfl/params.hpp"

namespace dfl {

inline constexpr std::array<std::string_view, 10> kDigitPredicates = {"zero", "one", "two",   "three", "four",
                                                                      "five", "six", "seven", "eight", "nine"};
inline constexpr std::string_view kSamePredicate = "same";

/// Class index of a digit predicate name, or nullopt.
std::optional<int> digit_of(std::string_view predicate) noexcept;

class DigitInterpretation final : public Interpretation {
public:
  /// Runs the classifier on `objects` (one image per row) once; atoms are
  /// then answered from that forward pass.
  DigitInterpretation(const DigitModel& model, const InterpretationParams& params, const Eigen::MatrixXd& objects);

  [[nodiscard]] std::size_t object_dim() const override;

  /// `objects` must be the matrix given at construction.
  void truths(const Eigen::MatrixXd& objects, std::span<const GroundAtom> atoms, std::span<double> out) const override;

  /// Chains d loss / d truth for each atom into parameter gradients.
  void accumulate_gradient(std::span<const GroundAtom> atoms, std::span<const double> d_truths,
                           InterpretationParams& grad) const;

  [[nodiscard]] const ClassifierActivations& activations() const noexcept { return acts_; }

private:
  void check_objects(const Eigen::MatrixXd& objects) const;

  const DigitModel& model_;
  const InterpretationParams& params_;
  Eigen::MatrixXd objects_;
  ClassifierActivations acts_;
};

/// Truth of one atom on explicit object vectors. Throws std::invalid_argument
/// on an unknown predicate or an arity mismatch.
TruthValue predicate_truth(const DigitModel& model, const InterpretationParams& params, std::string_view predicate,
                           std::span<const Eigen::VectorXd> objects);

struct LabeledBatch {
  Eigen::MatrixXd images;  // one per row
  std::vector<int> labels;
};

struct SupervisedLossOptions {
  /// Negative `same` pairs kept per positive pair.
  double negative_ratio = 1.0;
  std::uint64_t seed = 0;
  bool include_same = true;
};

struct SupervisedLoss {
  double value = 0.0;
  double cross_entropy = 0.0;
  double same_bce = 0.0;
  std::size_t positive_pairs = 0;
  std::size_t negative_pairs = 0;
};

/// Mean categorical cross-entropy on the digits plus mean binary
/// cross-entropy of `same` over ordered labeled pairs, negatives undersampled
/// to negative_ratio times the positives. Adds the gradient into `grad` when
/// given.
SupervisedLoss supervised_loss(const DigitModel& model, const InterpretationParams& params, const LabeledBatch& batch,
                               const SupervisedLossOptions& options, InterpretationParams* grad = nullptr);

/// Ordered pairs (i, j) of the batch split into same-label and undersampled
/// different-label lists.
struct SamePairs {
  std::vector<std::pair<std::size_t, std::size_t>> positive;
  std::vector<std::pair<std::size_t, std::size_t>> negative;
};
SamePairs sample_same_pairs(std::span<const int> labels, double negative_ratio, std::uint64_t seed);

/// Fraction of rows whose argmax class equals the label.
double evaluate_accuracy(const DigitModel& model, const InterpretationParams& params, const Eigen::MatrixXd& images,
                         std::span<const int> labels);

/// Picks `count` distinct values from [0, n), sorted. Depends only on the arguments.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed);

}  // namespace dfl
