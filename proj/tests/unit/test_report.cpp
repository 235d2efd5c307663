#include "test_util.hpp"
#include "xalign/errors.hpp"
#include "xalign/report.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace xalign;
using testutil::TempDir;

namespace {

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(FormatNumber, RoundTripsAndNan) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, 0.0}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(0.5), "0.5");
}

TEST(Csv, AlignTable) {
  TempDir dir;
  AlignmentResult r;
  r.score = 0.25;
  r.per_fold_scores = {0.2, 0.3};
  r.per_fold_lambda = {1, 10};
  r.n_items = 40;
  r.d_source = 3;
  r.d_target = 2;
  const std::vector<AlignRow> rows = {{"a,b", r}};
  write_align_csv(dir / "align.csv", rows);
  const auto lines = lines_of(dir / "align.csv");
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "# xalign align v1");
  EXPECT_EQ(lines[1], "pair,direction,metric,score,n_items,d_source,d_target,fold_scores,fold_lambdas");
  EXPECT_EQ(lines[2], "\"a,b\",xy,linear_predictivity,0.25,40,3,2,0.20000000000000001;0.29999999999999999,1;10");
}

TEST(Csv, ContrastScoresRoundTrip) {
  TempDir dir;
  const std::vector<ContrastScore> scores = {
      {"p \"1\"", "c", "fam", Direction::yx, 0.123456789012345678, -1e-9, 10, 12},
      {"p2", "c", "fam", Direction::xy, 0.5, 0.25, 3, 3}};
  write_contrast_scores_csv(dir / "s.csv", scores);
  const auto back = read_contrast_scores_csv(dir / "s.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].pair, "p \"1\"");
  EXPECT_EQ(back[0].family, "fam");
  EXPECT_EQ(back[0].direction, Direction::yx);
  EXPECT_EQ(back[0].score_a, scores[0].score_a);
  EXPECT_EQ(back[0].score_b, scores[0].score_b);
}

TEST(Csv, ContrastScoresReaderErrors) {
  TempDir dir;
  std::ofstream(dir / "nofam.csv") << "pair,contrast,direction,score_a,score_b\np,c,xy,0.5,0.4\n";
  EXPECT_EQ(read_contrast_scores_csv(dir / "nofam.csv")[0].family, "default");
  std::ofstream(dir / "short.csv") << "pair,contrast,direction,score_a,score_b\np,c,xy,0.5\n";
  EXPECT_THROW(read_contrast_scores_csv(dir / "short.csv"), FormatError);
  std::ofstream(dir / "word.csv") << "pair,contrast,direction,score_a,score_b\np,c,xy,high,0.4\n";
  EXPECT_THROW(read_contrast_scores_csv(dir / "word.csv"), FormatError);
  std::ofstream(dir / "nan.csv") << "pair,contrast,direction,score_a,score_b\np,c,xy,nan,0.4\n";
  EXPECT_THROW(read_contrast_scores_csv(dir / "nan.csv"), NumericError);
  std::ofstream(dir / "empty.csv") << "pair,contrast,direction,score_a,score_b\n";
  EXPECT_THROW(read_contrast_scores_csv(dir / "empty.csv"), FormatError);
  EXPECT_THROW(read_contrast_scores_csv(dir / "missing.csv"), IoError);
}

TEST(Csv, SummaryWritesNanForMissingStats) {
  TempDir dir;
  ContrastSummary with{"c1", "f", Direction::xy, 3, 0.5, 0.25, StatsResult{2.0, 2, 0.2, 0.4, 3, 0.25}, ""};
  ContrastSummary without{"c2", "f", Direction::xy, 1, 0.5, 0.5, std::nullopt, "fewer than two model pairs"};
  const std::vector<ContrastSummary> s = {with, without};
  write_contrast_summary_csv(dir / "c.csv", s);
  const auto lines = lines_of(dir / "c.csv");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[2], "c1,f,xy,3,0.5,0.25,0.25,2,2,0.20000000000000001,0.40000000000000002,");
  EXPECT_EQ(lines[3], "c2,f,xy,1,0.5,0.5,0,nan,nan,nan,nan,fewer than two model pairs");
}

TEST(Csv, CurveTable) {
  TempDir dir;
  const std::vector<CurvePoint> curve = {{1, Direction::xy, 0.5, std::nan(""), {0.5}},
                                         {2, Direction::xy, 0.75, 0.125, {0.5, 1.0}}};
  write_curve_csv(dir / "a.csv", curve);
  const auto lines = lines_of(dir / "a.csv");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "# xalign aggregation v1");
  EXPECT_EQ(lines[2], "xy,1,0.5,nan,1,0.5");
  EXPECT_EQ(lines[3], "xy,2,0.75,0.125,2,0.5;1");
}

TEST(Json, NanBecomesNull) {
  const std::vector<CurvePoint> curve = {{1, Direction::yx, 0.5, std::nan(""), {0.5}}};
  const auto j = to_json(std::span<const CurvePoint>(curve));
  EXPECT_TRUE(j.dump().find("null") != std::string::npos);
  EXPECT_EQ(j.dump().find("nan"), std::string::npos);
}

TEST(Svg, FilesAreWellFormed) {
  TempDir dir;
  LayerGrid g;
  g.x_model = "v";
  g.y_model = "l";
  g.source_layers = {0, 1};
  g.target_layers = {0};
  for (int s = 0; s < 2; ++s) {
    GridCell c;
    c.source_layer = s;
    c.result.score = 0.1 * s;
    g.cells.push_back(c);
  }
  write_grid_svg(dir / "g.svg", g, Direction::xy);
  const std::vector<CurvePoint> curve = {{1, Direction::xy, 0.5, 0.1, {0.4, 0.6}}, {2, Direction::xy, 0.6, 0.1, {0.5, 0.7}}};
  write_curve_svg(dir / "c.svg", curve, curve);
  for (const char* f : {"g.svg", "c.svg"}) {
    std::ifstream in(dir / f);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto text = ss.str();
    EXPECT_EQ(text.rfind("<svg", 0), 0u) << f;
    EXPECT_NE(text.find("</svg>"), std::string::npos) << f;
  }
}
