#pragma once

// IDX files: big-endian magic 0x00000803 (u8 images, n x rows x cols) and
// 0x00000801 (u8 labels, n).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace dfl {

class IdxFormatError : public std::runtime_error {
public:
  IdxFormatError(const std::string& message, std::size_t offset);
  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major
};

IdxImages read_idx_images(std::istream& in);
std::vector<std::uint8_t> read_idx_labels(std::istream& in);
void write_idx_images(std::ostream& out, const IdxImages& images);
void write_idx_labels(std::ostream& out, std::span<const std::uint8_t> labels);

}  // namespace dfl
