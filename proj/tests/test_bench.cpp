#include <gtest/gtest.h>

#include "test_support.hpp"

namespace iup {
namespace {

TEST(Bench, MinimalRunsReportStd) {
  const auto report = bench::run_bench(32, 24, {3, 4}, 2, 1);
  ASSERT_EQ(report.rows.size(), 2u);
  for (const auto& r : report.rows) {
    EXPECT_EQ(r.runs, 2u);
    EXPECT_GT(r.mean_ms, 0.0);
    EXPECT_GE(r.std_ms, 0.0);
    EXPECT_EQ(r.width, 32u);
    EXPECT_EQ(r.height, 24u);
  }
  EXPECT_FALSE(report.machine.empty());
}

TEST(Bench, RejectsBadInputs) {
  EXPECT_THROW(bench::run_bench(8, 8, {3}, 1, 1), InvalidInput);
  EXPECT_THROW(bench::run_bench(8, 8, {3, 2}, 5, 1), NyquistViolation);
  EXPECT_THROW(bench::run_bench(8, 8, {}, 5, 1), InvalidInput);
}

TEST(Bench, SampleStandardDeviation) {
  const auto ms = bench::mean_std({1.0, 3.0});
  EXPECT_DOUBLE_EQ(ms.mean, 2.0);
  EXPECT_DOUBLE_EQ(ms.std, std::sqrt(2.0));
}

TEST(Bench, CsvRoundTripIsByteIdentical) {
  std::vector<bench::BenchRow> rows{{3, 12.5, 0.25, 100, 4, 1280, 1024}, {15, 61.0625, 1.5, 100, 4, 1280, 1024}};
  const auto csv = bench::to_csv(rows);
  EXPECT_EQ(bench::to_csv(bench::parse_csv(csv)), csv);
  EXPECT_THROW(bench::parse_csv("K,mean\n"), ValidationError);
}

}  // namespace
}  // namespace iup
