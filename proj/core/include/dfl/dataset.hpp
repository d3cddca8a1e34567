#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dfl/neural_interp.hpp"

namespace dfl {

enum class SplitTag : std::uint8_t { Labeled, Unlabeled, Test };

struct DigitDataset {
  Eigen::MatrixXd images;  // n x d, pixels in [0,1]
  std::vector<int> labels;
  std::vector<SplitTag> tags;

  [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
  [[nodiscard]] Eigen::Index image_dim() const noexcept { return images.cols(); }
  [[nodiscard]] std::vector<std::size_t> indices(SplitTag tag) const;
};

/// Reads an image/label IDX pair; every row is tagged Unlabeled. Throws
/// IdxFormatError on malformed input and std::runtime_error on a count
/// mismatch or unreadable file.
DigitDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

/// The first `count` rows (all rows if count exceeds the size).
DigitDataset take(const DigitDataset& ds, std::size_t count);

/// Appends `test` with every row tagged Test.
DigitDataset with_test_set(DigitDataset train, const DigitDataset& test);

/// Re-tags the non-test rows: round(fraction * n) of them Labeled, stratified by
/// class with largest-remainder allocation, the rest Unlabeled. Throws
/// std::invalid_argument when fraction is outside (0,1] or some class would
/// get no labeled example.
DigitDataset make_split(DigitDataset ds, double labeled_fraction, std::uint64_t seed);

LabeledBatch gather(const DigitDataset& ds, std::span<const std::size_t> rows);
Eigen::MatrixXd gather_images(const DigitDataset& ds, std::span<const std::size_t> rows);

}  // namespace dfl
