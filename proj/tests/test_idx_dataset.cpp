#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dfl/dataset.hpp"
#include "dfl/idx.hpp"

using namespace dfl;

namespace {

IdxImages synthetic_images(std::size_t n) {
  IdxImages img{n, 28, 28, {}};
  img.pixels.resize(n * 28 * 28);
  for (std::size_t k = 0; k < img.pixels.size(); ++k) img.pixels[k] = static_cast<std::uint8_t>((k * 37) % 256);
  return img;
}

DigitDataset labelled_rows(const std::vector<int>& labels) {
  DigitDataset ds;
  ds.images = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) ds.images(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
  ds.labels = labels;
  ds.tags.assign(labels.size(), SplitTag::Unlabeled);
  return ds;
}

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("IDX round-trip") {
  const auto img = synthetic_images(10);
  std::stringstream buf;
  write_idx_images(buf, img);
  CHECK(buf.str().size() == 16 + 10 * 784);
  const auto back = read_idx_images(buf);
  CHECK(back.count == 10);
  CHECK(back.rows == 28);
  CHECK(back.cols == 28);
  CHECK(back.pixels == img.pixels);

  const std::vector<std::uint8_t> labels = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::stringstream lb;
  write_idx_labels(lb, labels);
  CHECK(read_idx_labels(lb) == labels);
}

TEST_CASE("IDX errors name the offset") {
  std::string zero_magic(16, '\0');
  std::stringstream s(zero_magic);
  try {
    read_idx_images(s);
    FAIL("expected a format error");
  } catch (const IdxFormatError& e) {
    CHECK(e.offset() == 0);
    CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
  }

  std::stringstream full;
  write_idx_images(full, synthetic_images(2));
  std::stringstream cut(full.str().substr(0, 16 + 784 + 100));
  try {
    read_idx_images(cut);
    FAIL("expected a format error");
  } catch (const IdxFormatError& e) {
    CHECK(e.offset() >= 16);
  }

  std::stringstream short_header(std::string("\0\0\x08\x03\0\0", 6));
  CHECK_THROWS_AS(read_idx_images(short_header), IdxFormatError);

  std::stringstream labels_as_images;
  write_idx_labels(labels_as_images, std::vector<std::uint8_t>{1, 2});
  CHECK_THROWS_AS(read_idx_images(labels_as_images), IdxFormatError);

  CHECK_THROWS_AS(load_idx("/nonexistent/a", "/nonexistent/b"), std::runtime_error);
}

TEST_CASE("load_idx scales pixels and checks counts") {
  const auto ip = temp_file("dfl_test_images.idx");
  const auto lp = temp_file("dfl_test_labels.idx");
  {
    std::ofstream a(ip, std::ios::binary);
    write_idx_images(a, synthetic_images(10));
    std::ofstream b(lp, std::ios::binary);
    write_idx_labels(b, std::vector<std::uint8_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  }
  const auto ds = load_idx(ip, lp);
  CHECK(ds.size() == 10);
  CHECK(ds.image_dim() == 784);
  CHECK(ds.images.minCoeff() >= 0.0);
  CHECK(ds.images.maxCoeff() <= 1.0);
  CHECK(ds.images(0, 1) == doctest::Approx(37.0 / 255.0));
  CHECK(ds.indices(SplitTag::Unlabeled).size() == 10);
  {
    std::ofstream b(lp, std::ios::binary);
    write_idx_labels(b, std::vector<std::uint8_t>{0, 1, 2});
  }
  CHECK_THROWS_AS(load_idx(ip, lp), std::runtime_error);
  std::filesystem::remove(ip);
  std::filesystem::remove(lp);
}

TEST_CASE("bundled digit files load") {
  const std::filesystem::path dir = DFL_TEST_DATA_DIR;
  if (!std::filesystem::exists(dir / "train-images-idx3-ubyte")) return;
  const auto train = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
  CHECK(train.image_dim() == 784);
  CHECK(train.size() >= 5000);
  for (int y : train.labels) REQUIRE((y >= 0 && y <= 9));
}

TEST_CASE("one percent of 60000 is 60 per class") {
  std::vector<int> labels(60000);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 10);
  const auto ds = make_split(labelled_rows(labels), 0.01, 1);
  const auto lab = ds.indices(SplitTag::Labeled);
  CHECK(lab.size() == 600);
  std::vector<int> per(10, 0);
  for (auto r : lab) ++per[static_cast<std::size_t>(ds.labels[r])];
  for (int c : per) CHECK(c == 60);
  CHECK(ds.indices(SplitTag::Unlabeled).size() == 59400);
}

TEST_CASE("largest-remainder allocation on uneven classes") {
  // Classes of 37, 23 and 40: 10% gives quotas 3.7, 2.3, 4.0 -> 4, 2, 4.
  std::vector<int> labels;
  for (int i = 0; i < 37; ++i) labels.push_back(0);
  for (int i = 0; i < 23; ++i) labels.push_back(1);
  for (int i = 0; i < 40; ++i) labels.push_back(2);
  const auto ds = make_split(labelled_rows(labels), 0.1, 5);
  std::vector<int> per(3, 0);
  for (auto r : ds.indices(SplitTag::Labeled)) ++per[static_cast<std::size_t>(ds.labels[r])];
  CHECK(per == std::vector<int>{4, 2, 4});
}

TEST_CASE("split contracts") {
  std::vector<int> labels(200);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 10);
  const auto base = with_test_set(labelled_rows(labels), labelled_rows(std::vector<int>(30, 3)));
  CHECK(base.size() == 230);

  const auto all = make_split(base, 1.0, 0);
  CHECK(all.indices(SplitTag::Labeled).size() == 200);
  CHECK(all.indices(SplitTag::Unlabeled).empty());
  CHECK(all.indices(SplitTag::Test).size() == 30);

  const auto a = make_split(base, 0.1, 42);
  const auto b = make_split(base, 0.1, 42);
  const auto c = make_split(base, 0.1, 43);
  CHECK(a.indices(SplitTag::Labeled) == b.indices(SplitTag::Labeled));
  CHECK(a.indices(SplitTag::Labeled) != c.indices(SplitTag::Labeled));
  // Tags partition the training rows; test rows are untouched.
  std::set<std::size_t> seen;
  for (auto tag : {SplitTag::Labeled, SplitTag::Unlabeled, SplitTag::Test}) {
    for (auto r : a.indices(tag)) CHECK(seen.insert(r).second);
  }
  CHECK(seen.size() == 230);
  for (auto r : a.indices(SplitTag::Test)) CHECK(r >= 200);

  CHECK_THROWS_AS(make_split(base, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_split(base, 1.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_split(base, 0.01, 1), std::invalid_argument);  // 2 labeled rows for 10 classes
}

TEST_CASE("take and gather") {
  std::vector<int> labels = {3, 1, 4, 1, 5};
  const auto ds = labelled_rows(labels);
  CHECK(take(ds, 3).size() == 3);
  CHECK(take(ds, 30).size() == 5);
  const std::vector<std::size_t> rows = {4, 0};
  const auto batch = gather(ds, rows);
  CHECK(batch.labels == std::vector<int>{5, 3});
  CHECK(batch.images(0, 0) == 4.0);
  CHECK(gather_images(ds, rows)(1, 0) == 0.0);
}
