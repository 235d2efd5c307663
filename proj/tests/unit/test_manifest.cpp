#include "test_util.hpp"
#include "xalign/errors.hpp"
#include "xalign/manifest.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace xalign;
using testutil::TempDir;

namespace {

ManifestItem item(std::string id, std::string key, std::optional<int> exemplar = std::nullopt,
                  std::optional<std::string> group = std::nullopt) {
  return {std::move(id), std::move(key), std::move(group), exemplar, std::nullopt};
}

// One image and five captions per pair key.
struct CaptionWorld {
  EmbeddingMatrix images;
  EmbeddingMatrix captions;
  DatasetManifest manifest;
};

CaptionWorld caption_world(std::size_t n_images, int captions_per_image) {
  CaptionWorld w;
  std::vector<std::string> img_ids, cap_ids;
  for (std::size_t i = 0; i < n_images; ++i) {
    img_ids.push_back("img_" + std::to_string(i));
    w.manifest.items.push_back(item(img_ids.back(), "p" + std::to_string(i)));
    for (int c = 0; c < captions_per_image; ++c) {
      cap_ids.push_back("cap_" + std::to_string(i) + "_" + std::to_string(c));
      w.manifest.items.push_back(item(cap_ids.back(), "p" + std::to_string(i), c));
    }
  }
  const auto n = static_cast<Eigen::Index>(n_images);
  Eigen::MatrixXd img(n, 2);
  Eigen::MatrixXd cap(n * captions_per_image, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    img.row(i) << static_cast<double>(i), 0.0;
    for (int c = 0; c < captions_per_image; ++c) cap.row(i * captions_per_image + c) << static_cast<double>(i), c;
  }
  w.images = testutil::matrix("v", Modality::vision, img, img_ids);
  w.captions = testutil::matrix("l", Modality::language, cap, cap_ids);
  return w;
}

}  // namespace

TEST(Manifest, SaveLoadRoundtrip) {
  TempDir dir;
  DatasetManifest m;
  m.dataset_id = "coco";
  m.items = {item("a", "p0"), item("b", "p0", 2, "preferred")};
  m.items[0].modality = Modality::vision;
  save_manifest(m, dir / "m.json");
  const auto back = load_manifest(dir / "m.json");
  EXPECT_EQ(back.dataset_id, "coco");
  ASSERT_EQ(back.items.size(), 2u);
  EXPECT_EQ(back.items[0].modality, Modality::vision);
  EXPECT_EQ(back.items[1].exemplar_index, 2);
  EXPECT_EQ(back.items[1].group, "preferred");
  EXPECT_FALSE(back.items[1].modality.has_value());
}

TEST(Manifest, RejectsDuplicatesAndBadJson) {
  DatasetManifest m;
  m.items = {item("a", "p0"), item("a", "p1")};
  EXPECT_THROW(validate(m), FormatError);
  m.items = {item("a", "")};
  EXPECT_THROW(validate(m), FormatError);

  TempDir dir;
  std::ofstream(dir / "bad.json") << "{\"items\": [{\"item_id\": 3}]}";
  EXPECT_THROW(load_manifest(dir / "bad.json"), FormatError);
  std::ofstream(dir / "broken.json") << "{not json";
  EXPECT_THROW(load_manifest(dir / "broken.json"), FormatError);
}

TEST(AlignRows, ExpandPairsRepeatsTheImageRow) {
  auto w = caption_world(1, 5);
  const EmbeddingMatrix ms[] = {w.images, w.captions};
  const auto a = align_rows(ms, w.manifest, PairingPolicy::expand_pairs);
  ASSERT_EQ(a.size(), 5u);
  for (Eigen::Index r = 0; r < 5; ++r) {
    EXPECT_EQ(a.matrices[0].item_ids[static_cast<std::size_t>(r)], "img_0");
    EXPECT_EQ(a.matrices[0].data.row(r), w.images.data.row(0));
    EXPECT_EQ(a.matrices[1].item_ids[static_cast<std::size_t>(r)], "cap_0_" + std::to_string(r));
    EXPECT_EQ(a.pair_keys[static_cast<std::size_t>(r)], "p0");
  }
}

TEST(AlignRows, ExpandCountIsSumOfPerKeyProducts) {
  // p0: 2 images x 3 captions, p1: 1 x 1, p2: images only.
  std::vector<std::string> img_ids = {"i0a", "i0b", "i1", "i2"};
  std::vector<std::string> cap_ids = {"c0a", "c0b", "c0c", "c1"};
  DatasetManifest m;
  m.items = {item("i0a", "p0", 0), item("i0b", "p0", 1), item("i1", "p1"), item("i2", "p2"),
             item("c0a", "p0", 0), item("c0b", "p0", 1), item("c0c", "p0", 2), item("c1", "p1")};
  const EmbeddingMatrix ms[] = {
      testutil::matrix("v", Modality::vision, testutil::gaussian(4, 2, 1), img_ids),
      testutil::matrix("l", Modality::language, testutil::gaussian(4, 2, 2), cap_ids)};
  EXPECT_EQ(align_rows(ms, m, PairingPolicy::expand_pairs).size(), 2u * 3u + 1u);
  EXPECT_EQ(align_rows(ms, m, PairingPolicy::one_to_one).size(), 2u);
}

TEST(AlignRows, OneToOneOnAlignedInputsKeepsOrder) {
  const auto ids_v = testutil::ids("img_", 6);
  const auto ids_l = testutil::ids("cap_", 6);
  DatasetManifest m;
  for (std::size_t i = 0; i < 6; ++i) {
    m.items.push_back(item(ids_v[i], "k" + std::to_string(i)));
    m.items.push_back(item(ids_l[i], "k" + std::to_string(i)));
  }
  const EmbeddingMatrix ms[] = {testutil::matrix("v", Modality::vision, testutil::gaussian(6, 3, 3), ids_v),
                                testutil::matrix("l", Modality::language, testutil::gaussian(6, 2, 4), ids_l)};
  const auto a = align_rows(ms, m, PairingPolicy::one_to_one);
  EXPECT_EQ(a.matrices[0], ms[0]);
  EXPECT_EQ(a.matrices[1], ms[1]);
}

TEST(AlignRows, ReordersShuffledRowsAndIsDeterministic) {
  auto w = caption_world(6, 1);
  // Reverse the caption file's rows.
  EmbeddingMatrix rev = w.captions;
  rev.data = w.captions.data.colwise().reverse();
  std::reverse(rev.item_ids.begin(), rev.item_ids.end());
  const EmbeddingMatrix ms[] = {w.images, rev};
  const auto a = align_rows(ms, w.manifest, PairingPolicy::one_to_one);
  const auto b = align_rows(ms, w.manifest, PairingPolicy::one_to_one);
  EXPECT_EQ(a.matrices[1], b.matrices[1]);
  EXPECT_EQ(a.pair_keys, b.pair_keys);
  for (Eigen::Index r = 0; r < 6; ++r) EXPECT_EQ(a.matrices[0].data(r, 0), a.matrices[1].data(r, 0));
}

TEST(AlignRows, MissingItemIsNamed) {
  auto w = caption_world(3, 1);
  w.manifest.items.push_back(item("img_999", "p0"));
  const EmbeddingMatrix ms[] = {w.images, w.captions};
  try {
    align_rows(ms, w.manifest, PairingPolicy::one_to_one);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("img_999"), std::string::npos);
  }
}

TEST(AlignRows, EmptyIntersectionIsAnError) {
  DatasetManifest m;
  m.items = {item("img_0", "a"), item("cap_0", "b")};
  const EmbeddingMatrix ms[] = {
      testutil::matrix("v", Modality::vision, Eigen::MatrixXd::Zero(1, 1), {"img_0"}),
      testutil::matrix("l", Modality::language, Eigen::MatrixXd::Zero(1, 1), {"cap_0"})};
  EXPECT_THROW(align_rows(ms, m, PairingPolicy::one_to_one), FormatError);
}

TEST(AlignRows, OneToOneUsesTheLowestExemplarIndex) {
  auto w = caption_world(4, 3);
  // List exemplars in reverse so order must come from exemplar_index.
  std::reverse(w.manifest.items.begin(), w.manifest.items.end());
  const EmbeddingMatrix ms[] = {w.images, w.captions};
  const auto a = align_rows(ms, w.manifest, PairingPolicy::one_to_one);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(a.matrices[1].item_ids[r].substr(a.matrices[1].item_ids[r].size() - 2), "_0");
}

TEST(AlignRows, ConflictingGroupsWithinAPairAreRejected) {
  DatasetManifest m;
  m.items = {item("img_0", "p", std::nullopt, "high"), item("cap_0", "p", std::nullopt, "low")};
  const EmbeddingMatrix ms[] = {
      testutil::matrix("v", Modality::vision, Eigen::MatrixXd::Zero(2, 1), {"img_0", "img_x"}),
      testutil::matrix("l", Modality::language, Eigen::MatrixXd::Zero(2, 1), {"cap_0", "cap_x"})};
  EXPECT_THROW(align_rows(ms, m, PairingPolicy::one_to_one), FormatError);
}

TEST(AlignRows, ByItemIdReordersToTheFirstMatrix) {
  const auto ids = testutil::ids("x", 4);
  auto a = testutil::matrix("a", Modality::vision, testutil::gaussian(4, 2, 1), ids);
  auto b = a;
  b.model_id = "b";
  b.data = a.data.colwise().reverse();
  b.item_ids.assign(ids.rbegin(), ids.rend());
  const EmbeddingMatrix ms[] = {a, b};
  const auto out = align_by_item_id(ms);
  EXPECT_EQ(out.matrices[1].data, a.data);

  auto c = a;
  c.item_ids[0] = "other";
  const EmbeddingMatrix bad[] = {a, c};
  EXPECT_THROW(align_by_item_id(bad), FormatError);
}
