#include "test_util.hpp"
#include "xalign/embedding.hpp"
#include "xalign/errors.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>
#include <iterator>

using namespace xalign;
using testutil::TempDir;

namespace {

std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::uint32_t u32_at(const std::vector<char>& b, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + i])) << (8 * i);
  return v;
}

std::uint64_t u64_at(const std::vector<char>& b, std::size_t off) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[off + i])) << (8 * i);
  return v;
}

EmbeddingMatrix sample(Dtype dtype = Dtype::f32) {
  Eigen::MatrixXd data = testutil::gaussian(5, 3, 42);
  if (dtype == Dtype::f32) data = data.cast<float>().cast<double>();
  auto m = testutil::matrix("vit", Modality::vision, data, testutil::ids("img_", 5), 7);
  m.variant = "grayscale";
  m.dtype = dtype;
  return m;
}

}  // namespace

TEST(Embedding, ZeroMatrixFileLayout) {
  TempDir dir;
  auto m = testutil::matrix("m", Modality::language, Eigen::MatrixXd::Zero(2, 3), {"a", "b"});
  m.dtype = Dtype::f32;
  write_embeddings(m, dir / "z.emb");
  const auto bytes = read_bytes(dir / "z.emb");

  ASSERT_GE(bytes.size(), kEmbFixedHeaderBytes);
  EXPECT_EQ(std::memcmp(bytes.data(), "EMB1", 4), 0);
  EXPECT_EQ(u32_at(bytes, 4), 1u);
  EXPECT_EQ(u32_at(bytes, 8), 0u);
  EXPECT_EQ(u64_at(bytes, 12), 2u);
  EXPECT_EQ(u64_at(bytes, 20), 3u);
  const std::uint32_t meta_len = u32_at(bytes, 28);
  EXPECT_EQ(bytes.size(), kEmbFixedHeaderBytes + meta_len + 24);

  const auto meta = nlohmann::json::parse(std::string(bytes.data() + 32, meta_len));
  EXPECT_EQ(meta["model_id"], "m");
  EXPECT_EQ(meta["layer_index"], 0);
  EXPECT_EQ(meta["modality"], "language");
  EXPECT_EQ(meta["variant"], "original");
  EXPECT_EQ(meta["item_ids"], nlohmann::json({"a", "b"}));
  for (std::size_t i = 32 + meta_len; i < bytes.size(); ++i) EXPECT_EQ(bytes[i], 0);

  EXPECT_EQ(read_embeddings(dir / "z.emb"), m);
}

TEST(Embedding, PayloadIsLittleEndianRowMajor) {
  TempDir dir;
  Eigen::MatrixXd data(2, 2);
  data << 1.0, 2.0, 3.0, -0.5;
  auto m = testutil::matrix("m", Modality::vision, data, {"a", "b"});
  m.dtype = Dtype::f64;
  write_embeddings(m, dir / "x.emb");
  const auto bytes = read_bytes(dir / "x.emb");
  const std::size_t payload = 32 + u32_at(bytes, 28);
  const double expected[] = {1.0, 2.0, 3.0, -0.5};
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(u64_at(bytes, payload + 8 * static_cast<std::size_t>(k)), std::bit_cast<std::uint64_t>(expected[k]));
  }
}

TEST(Embedding, RoundtripIsExactForBothDtypes) {
  TempDir dir;
  for (Dtype d : {Dtype::f32, Dtype::f64}) {
    const auto m = sample(d);
    write_embeddings(m, dir / "r.emb");
    EXPECT_EQ(read_embeddings(dir / "r.emb"), m);
  }
}

TEST(Embedding, RoundtripPropertyOverRandomShapes) {
  TempDir dir;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng() % 40);
    const auto d = static_cast<Eigen::Index>(1 + rng() % 17);
    auto m = testutil::matrix("model" + std::to_string(trial), trial % 2 ? Modality::vision : Modality::language,
                              testutil::gaussian(n, d, rng()), testutil::ids("id", static_cast<std::size_t>(n)),
                              trial);
    m.dtype = trial % 3 ? Dtype::f64 : Dtype::f32;
    if (m.dtype == Dtype::f32) m.data = m.data.cast<float>().cast<double>();
    write_embeddings(m, dir / "p.emb");
    const auto bytes1 = read_bytes(dir / "p.emb");
    const auto back = read_embeddings(dir / "p.emb");
    ASSERT_EQ(back, m);
    write_embeddings(back, dir / "q.emb");
    EXPECT_EQ(read_bytes(dir / "q.emb"), bytes1);
  }
}

TEST(Embedding, RejectsNonFiniteWithPosition) {
  TempDir dir;
  auto m = testutil::matrix("m", Modality::vision, testutil::gaussian(8, 4, 1), testutil::ids("i", 8));
  m.data(5, 2) = std::nan("");
  try {
    write_embeddings(m, dir / "nan.emb");
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 5"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "nan.emb"));
}

TEST(Embedding, RejectsInvalidMatrices) {
  auto one_row = testutil::matrix("m", Modality::vision, Eigen::MatrixXd::Zero(1, 3), {"a"});
  EXPECT_THROW(validate(one_row), FormatError);
  auto dup = testutil::matrix("m", Modality::vision, Eigen::MatrixXd::Zero(2, 3), {"a", "a"});
  EXPECT_THROW(validate(dup), FormatError);
  auto short_ids = testutil::matrix("m", Modality::vision, Eigen::MatrixXd::Zero(3, 3), {"a", "b"});
  EXPECT_THROW(validate(short_ids), FormatError);
}

TEST(Embedding, UnwritablePathIsIoError) {
  const auto m = sample();
  EXPECT_THROW(write_embeddings(m, "/nonexistent-dir/sub/x.emb"), IoError);
  EXPECT_THROW(read_embeddings("/nonexistent-dir/x.emb"), IoError);
}

namespace {

std::string format_error_of(const std::filesystem::path& p) {
  try {
    read_embeddings(p);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Embedding, DistinctFormatErrors) {
  TempDir dir;
  write_embeddings(sample(), dir / "ok.emb");
  const auto good = read_bytes(dir / "ok.emb");

  auto bad_magic = good;
  std::memcpy(bad_magic.data(), "XEMB", 4);
  write_bytes(dir / "magic.emb", bad_magic);
  EXPECT_NE(format_error_of(dir / "magic.emb").find("bad magic"), std::string::npos);

  auto truncated = good;
  truncated.pop_back();
  write_bytes(dir / "trunc.emb", truncated);
  EXPECT_NE(format_error_of(dir / "trunc.emb").find("truncated payload"), std::string::npos);

  auto dtype = good;
  dtype[8] = 7;
  write_bytes(dir / "dtype.emb", dtype);
  EXPECT_NE(format_error_of(dir / "dtype.emb").find("unknown dtype code"), std::string::npos);

  auto version = good;
  version[4] = 2;
  write_bytes(dir / "version.emb", version);
  EXPECT_NE(format_error_of(dir / "version.emb").find("version"), std::string::npos);

  auto trailing = good;
  trailing.push_back(0);
  write_bytes(dir / "trailing.emb", trailing);
  EXPECT_NE(format_error_of(dir / "trailing.emb").find("trailing"), std::string::npos);

  write_bytes(dir / "short.emb", std::vector<char>(good.begin(), good.begin() + 10));
  EXPECT_NE(format_error_of(dir / "short.emb").find("truncated header"), std::string::npos);
}

TEST(Embedding, HeaderOnlyRead) {
  TempDir dir;
  const auto m = sample(Dtype::f64);
  write_embeddings(m, dir / "h.emb");
  const auto h = read_embedding_header(dir / "h.emb");
  EXPECT_EQ(h.version, 1u);
  EXPECT_EQ(h.dtype, Dtype::f64);
  EXPECT_EQ(h.rows, 5u);
  EXPECT_EQ(h.cols, 3u);
  EXPECT_EQ(nlohmann::json::parse(h.metadata_json)["layer_index"], 7);
}
