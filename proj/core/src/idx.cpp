#include "dfl/idx.hpp"

#include <array>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

namespace dfl {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

std::uint32_t read_be32(std::istream& in, std::size_t& offset, const char* what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw IdxFormatError(std::string("truncated file while reading ") + what, offset);
  }
  offset += 4;
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                                 static_cast<char>(v)};
  out.write(b.data(), 4);
}

void read_payload(std::istream& in, std::vector<std::uint8_t>& data, std::size_t offset) {
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got != data.size()) {
    throw IdxFormatError("truncated file: expected " + std::to_string(data.size()) + " payload bytes, got " +
                             std::to_string(got),
                         offset + got);
  }
}

}  // namespace

IdxFormatError::IdxFormatError(const std::string& message, std::size_t offset)
    : std::runtime_error("IDX offset " + std::to_string(offset) + ": " + message), offset_(offset) {}

IdxImages read_idx_images(std::istream& in) {
  std::size_t offset = 0;
  const std::uint32_t magic = read_be32(in, offset, "magic");
  if (magic != kImageMagic) throw IdxFormatError("bad image magic " + hex(magic) + ", expected 0x00000803", 0);
  IdxImages img;
  img.count = read_be32(in, offset, "image count");
  img.rows = read_be32(in, offset, "row count");
  img.cols = read_be32(in, offset, "column count");
  img.pixels.resize(img.count * img.rows * img.cols);
  read_payload(in, img.pixels, offset);
  return img;
}

std::vector<std::uint8_t> read_idx_labels(std::istream& in) {
  std::size_t offset = 0;
  const std::uint32_t magic = read_be32(in, offset, "magic");
  if (magic != kLabelMagic) throw IdxFormatError("bad label magic " + hex(magic) + ", expected 0x00000801", 0);
  std::vector<std::uint8_t> labels(read_be32(in, offset, "label count"));
  read_payload(in, labels, offset);
  return labels;
}

void write_idx_images(std::ostream& out, const IdxImages& images) {
  if (images.pixels.size() != images.count * images.rows * images.cols) {
    throw std::invalid_argument("pixel buffer does not match the image dimensions");
  }
  write_be32(out, kImageMagic);
  write_be32(out, static_cast<std::uint32_t>(images.count));
  write_be32(out, static_cast<std::uint32_t>(images.rows));
  write_be32(out, static_cast<std::uint32_t>(images.cols));
  out.write(reinterpret_cast<const char*>(images.pixels.data()), static_cast<std::streamsize>(images.pixels.size()));
}

void write_idx_labels(std::ostream& out, std::span<const std::uint8_t> labels) {
  write_be32(out, kLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

}  // namespace dfl
