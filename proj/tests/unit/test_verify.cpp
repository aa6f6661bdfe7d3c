#include <gtest/gtest.h>

#include "regext/verify.hpp"

using namespace regext;

namespace {

VerifyConfig small_square() {
  return parse_verify_config(R"({
    "sets": [{"name": "unit", "n": 2, "spec": {"kind": "box", "lo": [0, 0, 0], "hi": [1, 1, 0]},
              "box_lo": [-0.5, -0.5], "box_hi": [1.5, 1.5], "resolutions": [32, 64]}],
    "functions": [{"kind": "constant", "name": "one", "value": 1.0}],
    "params": {"k": [1]},
    "reproduction_max_k": 2,
    "samples": {"pointwise": 50, "near_best_pairs": 2, "approx_centers": 2},
    "checks": ["whitney", "partition", "reproduction"]
  })");
}

const CheckResult* find(const Report& r, const std::string& prefix) {
  for (const auto& c : r)
    if (c.name.rfind(prefix, 0) == 0) return &c;
  return nullptr;
}

}  // namespace

TEST(Verify, ConfigDefaults) {
  const VerifyConfig c = default_verify_config();
  EXPECT_EQ(c.sets.size(), 6u);
  EXPECT_EQ(c.k_values, (std::vector<int>{1, 2}));
  EXPECT_TRUE(c.groups.empty());
  const VerifyConfig p = parse_verify_config(R"({"sets": ["square"], "params": {"p": [2, "inf"], "u": [1, "p"]}})");
  ASSERT_EQ(p.sets.size(), 1u);
  EXPECT_EQ(p.sets[0].name, "square");
  EXPECT_EQ(p.p_values[1], kInf);
  EXPECT_EQ(p.u_values[1], 0.0);
}

TEST(Verify, RejectsUnknownInput) {
  EXPECT_THROW(parse_verify_config(R"({"sets": ["nowhere"]})"), Error);
  EXPECT_THROW(parse_verify_config(R"({"checks": ["everything"]})"), Error);
  EXPECT_THROW(parse_verify_config("[1]"), Error);
}

TEST(Verify, SmallRunPassesAndIsDeterministic) {
  const VerifyConfig c = small_square();
  const VerifyRun a = run_verification(c);
  ASSERT_FALSE(a.report.empty());
  for (const auto& r : a.report) EXPECT_NE(r.status, Status::fail) << r.name << " " << r.details;
  ASSERT_NE(find(a.report, "whitney/unit/32"), nullptr);
  ASSERT_NE(find(a.report, "partition/unit/64"), nullptr);
  ASSERT_NE(find(a.report, "reproduction/unit/32"), nullptr);
  EXPECT_EQ(exit_code(a.report), 0);
  const VerifyRun b = run_verification(c);
  EXPECT_EQ(emit_report(a.report, ReportFormat::json), emit_report(b.report, ReportFormat::json));
}

TEST(Verify, SkippedNormalizationFailsPartition) {
  VerifyConfig c = parse_verify_config(R"({
    "sets": [{"name": "interval", "n": 1, "spec": {"kind": "box", "lo": [0, 0, 0], "hi": [1, 0, 0]},
              "box_lo": [-1], "box_hi": [2], "resolutions": [1024]}],
    "functions": [{"kind": "constant", "name": "one", "value": 1.0}],
    "params": {"k": [1]},
    "reproduction_max_k": 1,
    "checks": ["partition"]
  })");
  EXPECT_EQ(exit_code(run_verification(c).report), 0);
  c.fault = "skip_normalization";
  const VerifyRun r = run_verification(c);
  const CheckResult* p = find(r.report, "partition/interval/1024");
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->status, Status::fail);
  EXPECT_EQ(exit_code(r.report), 1);
}
