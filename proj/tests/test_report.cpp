#include <gtest/gtest.h>

#include "gnb/report.hpp"

using namespace gnb;

namespace {

StudyPoint point(const std::string& ds, double x, ModelKind m, std::vector<double> values) {
  StudyPoint p;
  p.dataset = ds;
  p.x = x;
  p.model = m;
  p.test = summarize(std::move(values));
  p.val = p.test;
  return p;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(RenderTable, ThreeRowLinkTable) {
  const std::vector<StudyPoint> pts{point("WS1000", 0, ModelKind::kGcn, {0.547, 0.543, 0.551}),
                                    point("WS1000", 0, ModelKind::kMlp, {0.49, 0.47, 0.51})};
  const auto t = render_table(pts, true);
  std::vector<std::string> lines;
  std::istringstream in(t);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 5u);  // header, rule, three rows
  EXPECT_EQ(lines[0].rfind("Model", 0), 0u);
  EXPECT_NE(lines[0].find("WS1000"), std::string::npos);
  EXPECT_EQ(lines[2].rfind("Random", 0), 0u);
  EXPECT_NE(lines[2].find("50.0 ± 0.0"), std::string::npos);
  EXPECT_EQ(lines[3].rfind("MLP (tuned)", 0), 0u);
  EXPECT_NE(lines[3].find("49.0 ± 2.0"), std::string::npos);
  EXPECT_EQ(lines[4].rfind("GCN", 0), 0u);
  EXPECT_NE(lines[4].find("54.7 ± 0.4"), std::string::npos);
}

TEST(RenderTable, StudyColumns) {
  const std::vector<StudyPoint> pts{point("d", 100, ModelKind::kMlp, {0.5}), point("d", 200, ModelKind::kMlp, {0.6})};
  const auto t = render_table(pts, false);
  EXPECT_NE(t.find("x=100"), std::string::npos);
  EXPECT_NE(t.find("x=200"), std::string::npos);
  EXPECT_EQ(t.find("Random"), std::string::npos);
}

TEST(RenderSvg, SinglePointHasMarkerNoBand) {
  const auto svg = render_svg({point("d", 0.6, ModelKind::kMlp, {0.6, 0.62})}, "gamma", "ROC AUC");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count(svg, "<circle"), 1u);
  EXPECT_EQ(count(svg, "<polygon"), 0u);
  EXPECT_EQ(count(svg, "<polyline"), 0u);
}

TEST(RenderSvg, BandsPerSeries) {
  std::vector<StudyPoint> pts;
  for (double g : {0.0, 0.5, 1.0}) {
    pts.push_back(point("d", g, ModelKind::kMlp, {0.5 + g / 10, 0.52 + g / 10}));
    pts.push_back(point("d", g, ModelKind::kGcn, {0.55, 0.56}));
  }
  const auto svg = render_svg(pts, "gamma", "ROC AUC");
  EXPECT_EQ(count(svg, "<circle"), 6u);
  EXPECT_EQ(count(svg, "<polygon"), 2u);
  EXPECT_EQ(count(svg, "<polyline"), 2u);
  EXPECT_NE(svg.find("MLP (tuned)"), std::string::npos);
  EXPECT_EQ(svg, render_svg(pts, "gamma", "ROC AUC"));
}
