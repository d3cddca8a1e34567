#include "dfl/params.hpp"

#include <stdexcept>

namespace dfl {

std::size_t ParamLayout::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("parameter block '" + name + "' has an empty shape");
  for (const auto& b : blocks_) {
    if (b.name == name) throw std::invalid_argument("duplicate parameter block '" + name + "'");
  }
  blocks_.push_back({std::move(name), size_, rows, cols});
  size_ += blocks_.back().size();
  return blocks_.size() - 1;
}

const ParamBlock& ParamLayout::find(const std::string& name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw std::out_of_range("no parameter block '" + name + "'");
}

std::uint64_t ParamLayout::fingerprint() const noexcept {
  // FNV-1a
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const auto& b : blocks_) {
    for (unsigned char ch : b.name) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    mix(static_cast<std::uint64_t>(b.rows));
    mix(static_cast<std::uint64_t>(b.cols));
  }
  return h;
}

}  // namespace dfl
