#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "dsnt/eval.hpp"
#include "support.hpp"

using namespace dsnt;

TEST(MetricsTest, Perfect) {
  auto r = compute_metrics({1, 2, 3}, {1, 2, 3});
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.macro_f1, 1.0);
  EXPECT_EQ(r.mse, 0.0);
  EXPECT_EQ(r.mae, 0.0);
  EXPECT_EQ(r.support, 3u);
}

TEST(MetricsTest, Opposite) {
  auto r = compute_metrics({5, 1}, {1, 5});
  EXPECT_EQ(r.accuracy, 0.0);
  EXPECT_EQ(r.macro_f1, 0.0);
  EXPECT_NEAR(r.mse, 16.0, 1e-12);
  EXPECT_NEAR(r.mae, 4.0, 1e-12);
}

TEST(MetricsTest, MacroF1OverGoldClasses) {
  // class 1: tp 1, fp 1, fn 0 -> 2/3; class 2: tp 1, fp 0, fn 1 -> 2/3
  auto r = compute_metrics({1, 1, 2}, {1, 2, 2});
  EXPECT_NEAR(r.accuracy, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.macro_f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.mse, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.mae, 1.0 / 3.0, 1e-12);
}

TEST(MetricsTest, RejectsBadInput) {
  EXPECT_THROW(compute_metrics({}, {}), Error);
  EXPECT_THROW(compute_metrics({1, 2}, {1}), Error);
  EXPECT_THROW(compute_metrics({0}, {1}), Error);
}

TEST(MetricsTest, PermutationInvariance) {
  Rng rng(4);
  std::vector<int> p, g;
  for (int i = 0; i < 50; ++i) {
    p.push_back(1 + static_cast<int>(uniform_index(rng, 5)));
    g.push_back(1 + static_cast<int>(uniform_index(rng, 5)));
  }
  auto a = compute_metrics(p, g);
  std::vector<std::size_t> idx(50);
  for (std::size_t i = 0; i < 50; ++i) idx[i] = i;
  shuffle(idx, rng);
  std::vector<int> p2, g2;
  for (auto i : idx) {
    p2.push_back(p[i]);
    g2.push_back(g[i]);
  }
  auto b = compute_metrics(p2, g2);
  EXPECT_NEAR(a.accuracy, b.accuracy, 1e-12);
  EXPECT_NEAR(a.macro_f1, b.macro_f1, 1e-12);
  EXPECT_NEAR(a.mse, b.mse, 1e-12);
  EXPECT_NEAR(a.mae, b.mae, 1e-12);
}

TEST(BinnedReportTest, OneToHundredFiveBins) {
  std::vector<int> p, g;
  std::vector<std::size_t> len;
  for (std::size_t l = 1; l <= 100; ++l) {
    len.push_back(l);
    p.push_back(l % 3 == 0 ? 2 : 3);
    g.push_back(3);
  }
  auto r = binned_report(p, g, len, 5);
  ASSERT_EQ(r.bins.size(), 5u);
  const std::size_t lo[] = {1, 21, 41, 61, 81}, hi[] = {20, 40, 60, 80, 100};
  double weighted = 0;
  for (std::size_t b = 0; b < 5; ++b) {
    EXPECT_EQ(r.bins[b].lo, lo[b]);
    EXPECT_EQ(r.bins[b].hi, hi[b]);
    EXPECT_EQ(r.bins[b].metrics.support, 20u);
    weighted += r.bins[b].metrics.accuracy * 20;
  }
  EXPECT_EQ(r.bins[0].label(), "1-20 (20)");
  EXPECT_NEAR(weighted / 100.0, compute_metrics(p, g).accuracy, 1e-12);
}

TEST(BinnedReportTest, EqualLengthsFallInOneBin) {
  auto r = binned_report({1, 2, 3}, {1, 2, 2}, {7, 7, 7}, 5);
  std::size_t populated = 0, total = 0;
  for (const auto& b : r.bins) {
    populated += b.metrics.support > 0;
    total += b.metrics.support;
  }
  EXPECT_EQ(populated, 1u);
  EXPECT_EQ(total, 3u);
  EXPECT_EQ(r.bins[0].label(), "7-7 (3)");
}

TEST(BinnedReportTest, LabelStyle) {
  Bin b;
  b.lo = 1;
  b.hi = 211;
  b.metrics.support = 27447;
  EXPECT_EQ(b.label(), "1-211 (27447)");
}

TEST(BinnedReportTest, CsvRoundTrip) {
  Rng rng(8);
  std::vector<int> p, g;
  std::vector<std::size_t> len;
  for (int i = 0; i < 40; ++i) {
    p.push_back(1 + static_cast<int>(uniform_index(rng, 5)));
    g.push_back(1 + static_cast<int>(uniform_index(rng, 5)));
    len.push_back(1 + uniform_index(rng, 300));
  }
  auto r = binned_report(p, g, len, 4);
  auto path = testkit::scratch_dir("csv") / "bins.csv";
  emit_csv(r, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "bin_lo,bin_hi,support,acc,f1,mse,mae");
  for (const auto& b : r.bins) {
    ASSERT_TRUE(std::getline(in, line));
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 7u);
    EXPECT_EQ(v[0], static_cast<double>(b.lo));
    EXPECT_EQ(v[1], static_cast<double>(b.hi));
    EXPECT_EQ(v[2], static_cast<double>(b.metrics.support));
    EXPECT_EQ(v[3], b.metrics.accuracy);
    EXPECT_EQ(v[4], b.metrics.macro_f1);
    EXPECT_EQ(v[5], b.metrics.mse);
    EXPECT_EQ(v[6], b.metrics.mae);
  }
  EXPECT_EQ(format_csv({}), "bin_lo,bin_hi,support,acc,f1,mse,mae\n");
  EXPECT_THROW(emit_csv(r, "/proc/nonexistent/dir/bins.csv"), Error);
}
