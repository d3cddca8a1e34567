#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dfl {

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(rows * cols); }
};

/// Named matrix blocks packed into one flat vector (column-major within a block).
class ParamLayout {
public:
  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols);

  [[nodiscard]] const ParamBlock& block(std::size_t i) const { return blocks_.at(i); }
  [[nodiscard]] const ParamBlock& find(const std::string& name) const;
  [[nodiscard]] const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }

  /// Stable 64-bit fingerprint of block names and shapes.
  [[nodiscard]] std::uint64_t fingerprint() const noexcept;

  friend bool operator==(const ParamLayout& a, const ParamLayout& b) { return a.fingerprint() == b.fingerprint(); }

private:
  std::vector<ParamBlock> blocks_;
  std::size_t size_ = 0;
};

/// The trainable vector theta together with its block layout. Also used for
/// gradients, which share the layout.
struct InterpretationParams {
  ParamLayout layout;
  Eigen::VectorXd theta;

  explicit InterpretationParams(ParamLayout l) : layout(std::move(l)), theta(Eigen::VectorXd::Zero(layout.size())) {}

  [[nodiscard]] Eigen::Map<Eigen::MatrixXd> view(std::size_t block) {
    const auto& b = layout.block(block);
    return {theta.data() + b.offset, b.rows, b.cols};
  }
  [[nodiscard]] Eigen::Map<const Eigen::MatrixXd> view(std::size_t block) const {
    const auto& b = layout.block(block);
    return {theta.data() + b.offset, b.rows, b.cols};
  }
  [[nodiscard]] bool all_finite() const { return theta.allFinite(); }
};

}  // namespace dfl
