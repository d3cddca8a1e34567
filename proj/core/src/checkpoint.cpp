#include "dfl/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace dfl {

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'F', 'L', 'C', 'K', 'P', 'T', '\0'};

template <class T>
void put_le(std::ostream& out, T v) {
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(buf.data(), buf.size());
}

template <class T>
T get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> buf{};
  if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
    throw std::runtime_error(std::string("checkpoint truncated while reading ") + what);
  }
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const InterpretationParams& params) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, params.layout.fingerprint());
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(params.theta.size()));
  for (Eigen::Index i = 0; i < params.theta.size(); ++i) {
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(params.theta(i))));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const InterpretationParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(out, params);
}

InterpretationParams read_checkpoint(std::istream& in, const ParamLayout& layout) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw std::runtime_error("not a checkpoint (bad magic)");
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  if (get_le<std::uint64_t>(in, "layout fingerprint") != layout.fingerprint()) {
    throw std::runtime_error("checkpoint was written for a different parameter layout");
  }
  const auto w = get_le<std::uint64_t>(in, "parameter count");
  if (w != layout.size()) throw std::runtime_error("checkpoint parameter count does not match the layout");
  InterpretationParams p(layout);
  for (std::uint64_t i = 0; i < w; ++i) {
    p.theta(static_cast<Eigen::Index>(i)) = std::bit_cast<float>(get_le<std::uint32_t>(in, "parameters"));
  }
  if (!p.all_finite()) throw std::runtime_error("checkpoint contains non-finite parameters");
  return p;
}

InterpretationParams load_checkpoint(const std::filesystem::path& path, const ParamLayout& layout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(in, layout);
}

}  // namespace dfl
