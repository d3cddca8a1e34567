#include "dfl/models.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace dfl {

namespace {

constexpr Eigen::Index kKernel = 5;
constexpr Eigen::Index kFilters1 = 10;
constexpr Eigen::Index kFilters2 = 20;

// Input: C x (H*W) feature map. Output: (C*k*k) x (OH*OW) patches.
Eigen::MatrixXd im2col(const Eigen::MatrixXd& in, Eigen::Index side, Eigen::Index k) {
  const Eigen::Index channels = in.rows();
  const Eigen::Index out_side = side - k + 1;
  Eigen::MatrixXd patches(channels * k * k, out_side * out_side);
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (Eigen::Index dy = 0; dy < k; ++dy) {
      for (Eigen::Index dx = 0; dx < k; ++dx) {
        const Eigen::Index row = c * k * k + dy * k + dx;
        for (Eigen::Index oy = 0; oy < out_side; ++oy) {
          for (Eigen::Index ox = 0; ox < out_side; ++ox) {
            patches(row, oy * out_side + ox) = in(c, (oy + dy) * side + ox + dx);
          }
        }
      }
    }
  }
  return patches;
}

Eigen::MatrixXd col2im(const Eigen::MatrixXd& patches, Eigen::Index channels, Eigen::Index side, Eigen::Index k) {
  const Eigen::Index out_side = side - k + 1;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(channels, side * side);
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (Eigen::Index dy = 0; dy < k; ++dy) {
      for (Eigen::Index dx = 0; dx < k; ++dx) {
        const Eigen::Index row = c * k * k + dy * k + dx;
        for (Eigen::Index oy = 0; oy < out_side; ++oy) {
          for (Eigen::Index ox = 0; ox < out_side; ++ox) {
            out(c, (oy + dy) * side + ox + dx) += patches(row, oy * out_side + ox);
          }
        }
      }
    }
  }
  return out;
}

// 2x2 max pooling over C x (side*side); records the flat source index of each max.
Eigen::MatrixXd max_pool(const Eigen::MatrixXd& in, Eigen::Index side, std::vector<Eigen::Index>& argmax) {
  const Eigen::Index half = side / 2;
  Eigen::MatrixXd out(in.rows(), half * half);
  argmax.resize(static_cast<std::size_t>(in.rows() * half * half));
  for (Eigen::Index c = 0; c < in.rows(); ++c) {
    for (Eigen::Index py = 0; py < half; ++py) {
      for (Eigen::Index px = 0; px < half; ++px) {
        Eigen::Index best = (2 * py) * side + 2 * px;
        for (Eigen::Index dy = 0; dy < 2; ++dy) {
          for (Eigen::Index dx = 0; dx < 2; ++dx) {
            const Eigen::Index idx = (2 * py + dy) * side + 2 * px + dx;
            if (in(c, idx) > in(c, best)) best = idx;
          }
        }
        out(c, py * half + px) = in(c, best);
        argmax[static_cast<std::size_t>(c * half * half + py * half + px)] = best;
      }
    }
  }
  return out;
}

Eigen::MatrixXd unpool(const Eigen::MatrixXd& d_out, Eigen::Index side, const std::vector<Eigen::Index>& argmax) {
  const Eigen::Index half = side / 2;
  Eigen::MatrixXd d_in = Eigen::MatrixXd::Zero(d_out.rows(), side * side);
  for (Eigen::Index c = 0; c < d_out.rows(); ++c) {
    for (Eigen::Index p = 0; p < half * half; ++p) {
      d_in(c, argmax[static_cast<std::size_t>(c * half * half + p)]) += d_out(c, p);
    }
  }
  return d_in;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

DigitModel::DigitModel(ClassifierSpec classifier, NTNSpec ntn) : cls_(std::move(classifier)), ntn_(ntn) {
  if (cls_.hidden_dims.empty()) throw std::invalid_argument("classifier needs at least one hidden layer");
  if (cls_.embedding_layer >= cls_.hidden_dims.size()) throw std::invalid_argument("embedding layer out of range");
  if (cls_.hidden_dims[cls_.embedding_layer] != ntn_.embedding_dim) {
    throw std::invalid_argument("embedding layer width " + std::to_string(cls_.hidden_dims[cls_.embedding_layer]) +
                                " does not match the relation network input " + std::to_string(ntn_.embedding_dim));
  }
  Eigen::Index in = cls_.input_dim;
  if (cls_.conv_frontend) {
    side_ = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(cls_.input_dim))));
    if (side_ * side_ != cls_.input_dim || side_ < 16) {
      throw std::invalid_argument("conv front-end needs square images of side >= 16");
    }
    conv1_w_ = layout_.add("conv1.W", kFilters1, kKernel * kKernel);
    conv1_b_ = layout_.add("conv1.b", kFilters1, 1);
    conv2_w_ = layout_.add("conv2.W", kFilters2, kFilters1 * kKernel * kKernel);
    conv2_b_ = layout_.add("conv2.b", kFilters2, 1);
    const Eigen::Index s1 = (side_ - kKernel + 1) / 2;
    const Eigen::Index s2 = (s1 - kKernel + 1) / 2;
    in = kFilters2 * s2 * s2;
  }
  for (std::size_t l = 0; l <= cls_.hidden_dims.size(); ++l) {
    const Eigen::Index out = l < cls_.hidden_dims.size() ? cls_.hidden_dims[l] : cls_.num_classes;
    const std::string tag = "dense" + std::to_string(l);
    const auto w = layout_.add(tag + ".W", out, in);
    const auto b = layout_.add(tag + ".b", out, 1);
    dense_.push_back({w, b});
    in = out;
  }
  const Eigen::Index d = ntn_.embedding_dim;
  ntn_w_ = layout_.add("ntn.W", d, d * ntn_.tensor_slices);
  ntn_p_ = layout_.add("ntn.P", ntn_.hidden, ntn_.tensor_slices);
  ntn_v_ = layout_.add("ntn.V", ntn_.hidden, 2 * d);
  ntn_b_ = layout_.add("ntn.b", ntn_.hidden, 1);
  ntn_u_ = layout_.add("ntn.u", ntn_.hidden, 1);
  ntn_c_ = layout_.add("ntn.c", 1, 1);
}

InterpretationParams DigitModel::init_params(std::uint64_t seed) const {
  InterpretationParams p(layout_);
  std::mt19937_64 rng(seed);
  auto fill = [&](std::size_t block, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto v = p.view(block);
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, j) = dist(rng);
    }
  };
  if (cls_.conv_frontend) {
    fill(conv1_w_, kKernel * kKernel);
    fill(conv1_b_, kKernel * kKernel);
    fill(conv2_w_, kFilters1 * kKernel * kKernel);
    fill(conv2_b_, kFilters1 * kKernel * kKernel);
  }
  for (const auto& layer : dense_) {
    const double fan_in = static_cast<double>(layout_.block(layer.w).cols);
    fill(layer.w, fan_in);
    fill(layer.b, fan_in);
  }
  const double d = static_cast<double>(ntn_.embedding_dim);
  fill(ntn_w_, d);
  fill(ntn_p_, static_cast<double>(ntn_.tensor_slices));
  fill(ntn_v_, 2 * d);
  fill(ntn_b_, 2 * d);
  fill(ntn_u_, static_cast<double>(ntn_.hidden));
  fill(ntn_c_, static_cast<double>(ntn_.hidden));
  return p;
}

void DigitModel::conv_forward(const InterpretationParams& params, const Eigen::MatrixXd& images,
                              ClassifierActivations& acts) const {
  const Eigen::Index batch = images.rows();
  const Eigen::Index s1 = side_ - kKernel + 1;
  const Eigen::Index p1 = s1 / 2;
  const Eigen::Index s2 = p1 - kKernel + 1;
  const Eigen::Index p2 = s2 / 2;
  const auto w1 = params.view(conv1_w_);
  const auto b1 = params.view(conv1_b_);
  const auto w2 = params.view(conv2_w_);
  const auto b2 = params.view(conv2_b_);
  auto& cache = acts.conv;
  const auto n = static_cast<std::size_t>(batch);
  cache.patches1.resize(n);
  cache.patches2.resize(n);
  cache.argmax1.resize(n);
  cache.argmax2.resize(n);
  cache.pooled1.resize(n);
  acts.input.resize(kFilters2 * p2 * p2, batch);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const Eigen::MatrixXd img = images.row(i);
    cache.patches1[u] = im2col(img, side_, kKernel);
    Eigen::MatrixXd o1 = w1 * cache.patches1[u];
    o1.colwise() += b1.col(0);
    cache.pooled1[u] = max_pool(o1, s1, cache.argmax1[u]).cwiseMax(0.0);
    cache.patches2[u] = im2col(cache.pooled1[u], p1, kKernel);
    Eigen::MatrixXd o2 = w2 * cache.patches2[u];
    o2.colwise() += b2.col(0);
    const Eigen::MatrixXd pooled2 = max_pool(o2, s2, cache.argmax2[u]).cwiseMax(0.0);
    acts.input.col(i) = Eigen::Map<const Eigen::VectorXd>(pooled2.data(), pooled2.size());
  }
}

void DigitModel::conv_backward(const InterpretationParams& params, const ClassifierActivations& acts,
                               const Eigen::MatrixXd& d_features, InterpretationParams& grad) const {
  const Eigen::Index s1 = side_ - kKernel + 1;
  const Eigen::Index p1 = s1 / 2;
  const Eigen::Index s2 = p1 - kKernel + 1;
  const Eigen::Index p2 = s2 / 2;
  const auto w2 = params.view(conv2_w_);
  auto gw1 = grad.view(conv1_w_);
  auto gb1 = grad.view(conv1_b_);
  auto gw2 = grad.view(conv2_w_);
  auto gb2 = grad.view(conv2_b_);
  const auto& cache = acts.conv;
  for (Eigen::Index i = 0; i < d_features.cols(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    Eigen::MatrixXd d_pooled2 = Eigen::Map<const Eigen::MatrixXd>(d_features.col(i).data(), kFilters2, p2 * p2);
    const Eigen::Map<const Eigen::MatrixXd> pooled2(acts.input.col(i).data(), kFilters2, p2 * p2);
    d_pooled2 = (pooled2.array() > 0.0).select(d_pooled2, 0.0);
    const Eigen::MatrixXd d_o2 = unpool(d_pooled2, s2, cache.argmax2[u]);
    gw2.noalias() += d_o2 * cache.patches2[u].transpose();
    gb2.col(0) += d_o2.rowwise().sum();
    Eigen::MatrixXd d_pooled1 = col2im(w2.transpose() * d_o2, kFilters1, p1, kKernel);
    d_pooled1 = (cache.pooled1[u].array() > 0.0).select(d_pooled1, 0.0);
    const Eigen::MatrixXd d_o1 = unpool(d_pooled1, s1, cache.argmax1[u]);
    gw1.noalias() += d_o1 * cache.patches1[u].transpose();
    gb1.col(0) += d_o1.rowwise().sum();
  }
}

ClassifierActivations DigitModel::classify(const InterpretationParams& params, const Eigen::MatrixXd& images) const {
  if (images.cols() != cls_.input_dim) {
    throw std::invalid_argument("classifier expects " + std::to_string(cls_.input_dim) + " inputs, got " +
                                std::to_string(images.cols()));
  }
  ClassifierActivations acts;
  acts.embedding_layer = cls_.embedding_layer;
  if (cls_.conv_frontend) {
    conv_forward(params, images, acts);
  } else {
    acts.input = images.transpose();
  }
  const Eigen::MatrixXd* x = &acts.input;
  for (std::size_t l = 0; l < cls_.hidden_dims.size(); ++l) {
    Eigen::MatrixXd z = params.view(dense_[l].w) * *x;
    z.colwise() += params.view(dense_[l].b).col(0);
    acts.hidden.push_back(z.cwiseMax(0.0));
    x = &acts.hidden.back();
  }
  const auto& out = dense_.back();
  acts.logits = params.view(out.w) * *x;
  acts.logits.colwise() += params.view(out.b).col(0);
  acts.probs.resize(acts.logits.rows(), acts.logits.cols());
  for (Eigen::Index j = 0; j < acts.logits.cols(); ++j) {
    const double m = acts.logits.col(j).maxCoeff();
    auto e = (acts.logits.col(j).array() - m).exp();
    acts.probs.col(j) = e / e.sum();
  }
  return acts;
}

void DigitModel::classifier_backward(const InterpretationParams& params, const ClassifierActivations& acts,
                                     const Eigen::MatrixXd& d_logits, const Eigen::MatrixXd* d_embed,
                                     InterpretationParams& grad) const {
  const std::size_t hidden = cls_.hidden_dims.size();
  auto layer_input = [&](std::size_t l) -> const Eigen::MatrixXd& { return l == 0 ? acts.input : acts.hidden[l - 1]; };

  Eigen::MatrixXd dz = d_logits;
  for (std::size_t l = hidden + 1; l-- > 0;) {
    const auto& layer = dense_[l];
    grad.view(layer.w).noalias() += dz * layer_input(l).transpose();
    grad.view(layer.b).col(0) += dz.rowwise().sum();
    if (l == 0 && !cls_.conv_frontend) break;
    Eigen::MatrixXd dx = params.view(layer.w).transpose() * dz;
    if (l == 0) {
      conv_backward(params, acts, dx, grad);
      break;
    }
    const std::size_t below = l - 1;  // hidden layer feeding this one
    if (d_embed && below == cls_.embedding_layer) dx += *d_embed;
    dz = (acts.hidden[below].array() > 0.0).select(dx, 0.0);
  }
}

Eigen::MatrixXd DigitModel::probs_to_logits_grad(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& d_probs) {
  Eigen::MatrixXd out(probs.rows(), probs.cols());
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    const double dot = probs.col(j).dot(d_probs.col(j));
    out.col(j) = probs.col(j).cwiseProduct((d_probs.col(j).array() - dot).matrix());
  }
  return out;
}

NtnActivations DigitModel::relate(const InterpretationParams& params, const Eigen::MatrixXd& e1,
                                  const Eigen::MatrixXd& e2) const {
  const Eigen::Index d = ntn_.embedding_dim;
  if (e1.rows() != d || e2.rows() != d || e1.cols() != e2.cols()) {
    throw std::invalid_argument("relation network input shape mismatch");
  }
  NtnActivations a;
  a.e1 = e1;
  a.e2 = e2;
  const auto w = params.view(ntn_w_);
  const Eigen::Index n = e1.cols();
  a.slices.resize(ntn_.tensor_slices, n);
  a.w_e2.resize(static_cast<std::size_t>(ntn_.tensor_slices));
  for (Eigen::Index k = 0; k < ntn_.tensor_slices; ++k) {
    auto& m = a.w_e2[static_cast<std::size_t>(k)];
    m.noalias() = w.middleCols(k * d, d) * e2;
    a.slices.row(k) = e1.cwiseProduct(m).colwise().sum();
  }
  const auto v = params.view(ntn_v_);
  Eigen::MatrixXd pre = params.view(ntn_p_) * a.slices;
  pre.noalias() += v.leftCols(d) * e1;
  pre.noalias() += v.rightCols(d) * e2;
  pre.colwise() += params.view(ntn_b_).col(0);
  a.h = pre.array().tanh().matrix();
  a.logit = (params.view(ntn_u_).transpose() * a.h).transpose();
  a.logit.array() += params.view(ntn_c_)(0, 0);
  a.out = a.logit.unaryExpr([](double x) { return sigmoid(x); });
  return a;
}

void DigitModel::relate_backward(const InterpretationParams& params, const NtnActivations& a,
                                 const Eigen::VectorXd& d_logit, InterpretationParams& grad, Eigen::MatrixXd& d_e1,
                                 Eigen::MatrixXd& d_e2) const {
  const Eigen::Index d = ntn_.embedding_dim;
  const auto u = params.view(ntn_u_);
  const auto v = params.view(ntn_v_);
  const auto w = params.view(ntn_w_);
  grad.view(ntn_u_).col(0) += a.h * d_logit;
  grad.view(ntn_c_)(0, 0) += d_logit.sum();
  // d pre = (u d_logit^T) .* (1 - h^2)
  const Eigen::MatrixXd d_pre = ((u.col(0) * d_logit.transpose()).array() * (1.0 - a.h.array().square())).matrix();
  grad.view(ntn_p_).noalias() += d_pre * a.slices.transpose();
  grad.view(ntn_v_).leftCols(d).noalias() += d_pre * a.e1.transpose();
  grad.view(ntn_v_).rightCols(d).noalias() += d_pre * a.e2.transpose();
  grad.view(ntn_b_).col(0) += d_pre.rowwise().sum();
  const Eigen::MatrixXd d_slices = params.view(ntn_p_).transpose() * d_pre;
  d_e1.noalias() = v.leftCols(d).transpose() * d_pre;
  d_e2.noalias() = v.rightCols(d).transpose() * d_pre;
  auto gw = grad.view(ntn_w_);
  for (Eigen::Index k = 0; k < ntn_.tensor_slices; ++k) {
    const Eigen::RowVectorXd ds = d_slices.row(k);
    const Eigen::MatrixXd e1_scaled = a.e1.array().rowwise() * ds.array();
    gw.middleCols(k * d, d).noalias() += e1_scaled * a.e2.transpose();
    d_e1 += (a.w_e2[static_cast<std::size_t>(k)].array().rowwise() * ds.array()).matrix();
    d_e2.noalias() += w.middleCols(k * d, d).transpose() * e1_scaled;
  }
}

}  // namespace dfl
