#include "dfl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include "dfl/idx.hpp"

namespace dfl {

std::vector<std::size_t> DigitDataset::indices(SplitTag tag) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == tag) out.push_back(i);
  }
  return out;
}

DigitDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  std::ifstream img_in(images_path, std::ios::binary);
  if (!img_in) throw std::runtime_error("cannot open " + images_path.string());
  std::ifstream lbl_in(labels_path, std::ios::binary);
  if (!lbl_in) throw std::runtime_error("cannot open " + labels_path.string());
  const IdxImages img = read_idx_images(img_in);
  const std::vector<std::uint8_t> lbl = read_idx_labels(lbl_in);
  if (img.count != lbl.size()) {
    throw std::runtime_error("image count " + std::to_string(img.count) + " does not match label count " +
                             std::to_string(lbl.size()));
  }
  DigitDataset ds;
  const auto n = static_cast<Eigen::Index>(img.count);
  const auto d = static_cast<Eigen::Index>(img.rows * img.cols);
  ds.images.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      ds.images(i, j) = img.pixels[static_cast<std::size_t>(i * d + j)] / 255.0;
    }
  }
  ds.labels.assign(lbl.begin(), lbl.end());
  ds.tags.assign(lbl.size(), SplitTag::Unlabeled);
  return ds;
}

DigitDataset take(const DigitDataset& ds, std::size_t count) {
  count = std::min(count, ds.size());
  DigitDataset out;
  out.images = ds.images.topRows(static_cast<Eigen::Index>(count));
  out.labels.assign(ds.labels.begin(), ds.labels.begin() + static_cast<std::ptrdiff_t>(count));
  out.tags.assign(ds.tags.begin(), ds.tags.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

DigitDataset with_test_set(DigitDataset train, const DigitDataset& test) {
  if (train.size() > 0 && test.size() > 0 && train.image_dim() != test.image_dim()) {
    throw std::invalid_argument("train and test images differ in dimension");
  }
  const Eigen::Index n = train.images.rows();
  Eigen::MatrixXd images(n + test.images.rows(), test.size() ? test.image_dim() : train.image_dim());
  images.topRows(n) = train.images;
  images.bottomRows(test.images.rows()) = test.images;
  train.images = std::move(images);
  train.labels.insert(train.labels.end(), test.labels.begin(), test.labels.end());
  train.tags.insert(train.tags.end(), test.size(), SplitTag::Test);
  return train;
}

DigitDataset make_split(DigitDataset ds, double labeled_fraction, std::uint64_t seed) {
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) {
    throw std::invalid_argument("labeled fraction must be in (0,1]");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  std::size_t total = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.tags[i] == SplitTag::Test) continue;
    by_class[ds.labels[i]].push_back(i);
    ++total;
  }
  const auto target = static_cast<std::size_t>(std::llround(labeled_fraction * static_cast<double>(total)));
  std::map<int, std::size_t> quota;
  std::vector<std::pair<double, int>> remainders;
  std::size_t assigned = 0;
  for (const auto& [label, rows] : by_class) {
    const double exact = labeled_fraction * static_cast<double>(rows.size());
    quota[label] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[label];
    remainders.emplace_back(exact - std::floor(exact), label);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < target && k < remainders.size(); ++k, ++assigned) ++quota[remainders[k].second];

  for (const auto& [label, rows] : by_class) {
    if (quota[label] == 0) {
      throw std::invalid_argument("labeled fraction " + std::to_string(labeled_fraction) +
                                  " leaves class " + std::to_string(label) + " without a labeled example");
    }
    const std::uint64_t class_seed = seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(label + 1));
    for (std::size_t r : rows) ds.tags[r] = SplitTag::Unlabeled;
    for (std::size_t k : sample_indices(rows.size(), quota[label], class_seed)) ds.tags[rows[k]] = SplitTag::Labeled;
  }
  return ds;
}

Eigen::MatrixXd gather_images(const DigitDataset& ds, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), ds.image_dim());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = ds.images.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

LabeledBatch gather(const DigitDataset& ds, std::span<const std::size_t> rows) {
  LabeledBatch b{gather_images(ds, rows), {}};
  b.labels.reserve(rows.size());
  for (std::size_t r : rows) b.labels.push_back(ds.labels.at(r));
  return b;
}

}  // namespace dfl
