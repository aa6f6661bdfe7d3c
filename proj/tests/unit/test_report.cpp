#include <gtest/gtest.h>

#include "regext/grid.hpp"
#include "regext/report.hpp"

using namespace regext;

namespace {

Report sample() {
  CheckResult a;
  a.name = "whitney/square/128/k1";
  a.paper_ref = "cube family";
  a.status = Status::pass;
  a.measured_constant = 4.0;
  a.samples = 12;
  a.tolerance = 4.0;
  a.details = R"({"cubes":12,"worst":"x,y"})";
  CheckResult b = a;
  b.name = "near_best/square/128";
  b.status = Status::fail;
  b.measured_constant = kInf;
  b.tolerance = kInf;
  b.details = "{}";
  CheckResult c = a;
  c.name = "skip";
  c.status = Status::skipped;
  return {a, b, c};
}

}  // namespace

TEST(Report, EmptyIsBareArray) {
  EXPECT_EQ(emit_report({}, ReportFormat::json), "[]");
  EXPECT_TRUE(parse_report("[]").empty());
  EXPECT_EQ(exit_code({}), 0);
}

TEST(Report, JsonRoundTripKeepsInfinity) {
  const Report r = sample();
  const std::string text = emit_report(r, ReportFormat::json);
  EXPECT_NE(text.find("\"measured_constant\": null"), std::string::npos);
  EXPECT_EQ(parse_report(text), r);
  EXPECT_EQ(emit_report(parse_report(text), ReportFormat::json), text);
}

TEST(Report, KeyOrderIsFixed) {
  const std::string text = emit_report({sample()[0]}, ReportFormat::json);
  const char* keys[] = {"name", "paper_ref", "status", "measured_constant", "samples", "tolerance", "details"};
  std::size_t at = 0;
  for (const char* k : keys) {
    const std::size_t p = text.find(std::string("\"") + k + "\"");
    ASSERT_NE(p, std::string::npos) << k;
    EXPECT_GT(p, at);
    at = p;
  }
}

TEST(Report, CsvQuotesFieldsWithCommas) {
  const std::string text = emit_report(sample(), ReportFormat::csv);
  EXPECT_EQ(text.rfind("name,paper_ref,status,measured_constant,samples,tolerance,details\n", 0), 0u);
  EXPECT_NE(text.find("\"{\"\"cubes\"\":12,\"\"worst\"\":\"\"x,y\"\"}\""), std::string::npos);
  EXPECT_NE(text.find(",fail,null,"), std::string::npos);
}

TEST(Report, ExitCodeFollowsFailures) {
  Report r = sample();
  EXPECT_EQ(exit_code(r), 1);
  r[1].status = Status::pass;
  EXPECT_EQ(exit_code(r), 0);
}

TEST(Report, RejectsMalformedInput) {
  EXPECT_THROW(parse_report("{}"), Error);
  EXPECT_THROW(parse_report("[{\"name\":\"x\"}]"), Error);
  EXPECT_THROW(status_from_string("ok"), Error);
  EXPECT_THROW(report_format_from_string("xml"), Error);
}
