#pragma once

// Digit classifier p(y|x) and a neural tensor network for a binary relation
// over the classifier's hidden embeddings, with hand-written backprop.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "dfl/params.hpp"

namespace dfl {

struct ClassifierSpec {
  Eigen::Index input_dim = 784;
  /// Fully connected ReLU layers. With the conv front-end the first dense
  /// layer receives its 320 flattened features.
  std::vector<Eigen::Index> hidden_dims{320, 50};
  Eigen::Index num_classes = 10;
  /// Which hidden layer's activations serve as object embeddings.
  std::size_t embedding_layer = 1;
  /// conv5x5(10) -> maxpool2 -> relu -> conv5x5(20) -> maxpool2 -> relu, for
  /// square single-channel images.
  bool conv_frontend = false;
};

struct NTNSpec {
  Eigen::Index embedding_dim = 50;
  Eigen::Index tensor_slices = 4;
  Eigen::Index hidden = 50;
};

struct ConvCache {
  std::vector<Eigen::MatrixXd> patches1;  // per image
  std::vector<Eigen::MatrixXd> patches2;
  std::vector<std::vector<Eigen::Index>> argmax1;
  std::vector<std::vector<Eigen::Index>> argmax2;
  std::vector<Eigen::MatrixXd> pooled1;  // post-relu, 10 x 144
};

struct ClassifierActivations {
  Eigen::MatrixXd input;                // features x batch fed to the first dense layer
  std::vector<Eigen::MatrixXd> hidden;  // post-ReLU, one per dense hidden layer
  Eigen::MatrixXd logits;
  Eigen::MatrixXd probs;                // classes x batch
  ConvCache conv;
  std::size_t embedding_layer = 0;

  [[nodiscard]] const Eigen::MatrixXd& embeddings() const { return hidden.at(embedding_layer); }
  [[nodiscard]] Eigen::Index batch() const { return probs.cols(); }
};

struct NtnActivations {
  Eigen::MatrixXd e1, e2;          // dim x pairs
  std::vector<Eigen::MatrixXd> w_e2;  // W_k e2 per slice
  Eigen::MatrixXd slices;          // K x pairs
  Eigen::MatrixXd h;               // hidden x pairs (tanh)
  Eigen::VectorXd logit;
  Eigen::VectorXd out;             // sigmoid(logit)
};

class DigitModel {
public:
  DigitModel(ClassifierSpec classifier, NTNSpec ntn);

  [[nodiscard]] const ClassifierSpec& classifier_spec() const noexcept { return cls_; }
  [[nodiscard]] const NTNSpec& ntn_spec() const noexcept { return ntn_; }
  [[nodiscard]] const ParamLayout& layout() const noexcept { return layout_; }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every block.
  [[nodiscard]] InterpretationParams init_params(std::uint64_t seed) const;

  /// `images` holds one image per row.
  [[nodiscard]] ClassifierActivations classify(const InterpretationParams& params, const Eigen::MatrixXd& images) const;

  /// Backprop from gradients on the logits (classes x batch) and optionally on
  /// the embedding activations (dim x batch). Accumulates into `grad`.
  void classifier_backward(const InterpretationParams& params, const ClassifierActivations& acts,
                           const Eigen::MatrixXd& d_logits, const Eigen::MatrixXd* d_embed,
                           InterpretationParams& grad) const;

  /// Relation truth for the pairs (e1.col(n), e2.col(n)).
  [[nodiscard]] NtnActivations relate(const InterpretationParams& params, const Eigen::MatrixXd& e1,
                                      const Eigen::MatrixXd& e2) const;

  /// Backprop from d loss / d logit per pair. Accumulates parameter gradients
  /// into `grad` and writes the embedding gradients into d_e1, d_e2.
  void relate_backward(const InterpretationParams& params, const NtnActivations& acts, const Eigen::VectorXd& d_logit,
                       InterpretationParams& grad, Eigen::MatrixXd& d_e1, Eigen::MatrixXd& d_e2) const;

  /// Softmax Jacobian-vector product: gradient on the logits from a gradient on the probabilities.
  static Eigen::MatrixXd probs_to_logits_grad(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& d_probs);

private:
  struct Dense {
    std::size_t w, b;
  };

  void conv_forward(const InterpretationParams& params, const Eigen::MatrixXd& images, ClassifierActivations& acts) const;
  void conv_backward(const InterpretationParams& params, const ClassifierActivations& acts, const Eigen::MatrixXd& d_features,
                     InterpretationParams& grad) const;

  ClassifierSpec cls_;
  NTNSpec ntn_;
  ParamLayout layout_;
  std::vector<Dense> dense_;  // hidden layers then output
  std::size_t conv1_w_ = 0, conv1_b_ = 0, conv2_w_ = 0, conv2_b_ = 0;
  Eigen::Index side_ = 0;
  std::size_t ntn_w_ = 0, ntn_p_ = 0, ntn_v_ = 0, ntn_b_ = 0, ntn_u_ = 0, ntn_c_ = 0;
};

}  // namespace dfl
