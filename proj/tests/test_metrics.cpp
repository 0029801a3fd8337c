#include <gtest/gtest.h>

#include "trea/errors.hpp"
#include "trea/metrics.hpp"

using namespace trea;

TEST(Nfpci, Golden) {
  PlatformNumbers p{1000, 1000, 2000, 2000, 0.0, 1e6};
  EXPECT_DOUBLE_EQ(nfpci(p), 1000.0);
  p.luts = 500;
  p.ffs = 1000;
  EXPECT_DOUBLE_EQ(nfpci(p), 250.0);
  p.luts = 0;
  EXPECT_DOUBLE_EQ(nfpci(p), 0.0);
  p.luts_total = 0;
  EXPECT_THROW(nfpci(p), DomainError);
}

TEST(Sfil, Golden) {
  EXPECT_DOUBLE_EQ(sfil(1000, 1e6), 1e-3);
  EXPECT_DOUBLE_EQ(sfil(0, 5e6), 0.0);
  EXPECT_THROW(sfil(10, 0.0), DomainError);
  EXPECT_THROW(sfil(10, -1.0), DomainError);
}

TEST(Ecpi, Golden) {
  EXPECT_DOUBLE_EQ(ecpi(1.0, 1e-3) * 1e6, 1000.0);
  EXPECT_DOUBLE_EQ(ecpi(0.0, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(ecpi(2.5, 0.0), 0.0);
}

TEST(Report, InvariantsHoldExactly) {
  const PlatformNumbers p{100, 400, 50, 100, 0.75, 125e6};
  const MetricReport r = make_report("net", "cfg", 12345, p);
  EXPECT_EQ(r.sfil_s, 12345 / 125e6);
  EXPECT_EQ(r.ecpi_j, 0.75 * r.sfil_s);
  EXPECT_DOUBLE_EQ(r.nfpci, 125.0);
}

TEST(EmitReport, EmptySingleAndRatio) {
  EXPECT_EQ(emit_report({}, ReportFormat::kCsv), "workload,config,nfpci,cpfi,sfil_ms,ecpi_uj_ext_power,latency_gain\n");
  const PlatformNumbers p{0, 0, 0, 0, 1.0, 1e6};
  const auto a = make_report("w", "fxp8", 1000, p);
  const auto b = make_report("w", "fxp4", 250, p);
  EXPECT_EQ(emit_report({a}, ReportFormat::kCsv),
            "workload,config,nfpci,cpfi,sfil_ms,ecpi_uj_ext_power,latency_gain\nw,fxp8,0,1000,1,1000,1\n");
  const std::string two = emit_report({a, b}, ReportFormat::kCsv);
  EXPECT_NE(two.find("w,fxp4,0,250,0.25,250,4\n"), std::string::npos) << two;
  const std::string text = emit_report({a, b}, ReportFormat::kText);
  EXPECT_NE(text.find("externally supplied"), std::string::npos);
  EXPECT_EQ(emit_report({a, b}, ReportFormat::kText), text);
}

TEST(DeviceProfiles, ParseAndLookup) {
  const auto p = parse_device_profiles(R"({"devices": [{"name": "x", "luts_total": 10, "ffs_total": 20}]})");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(find_device(p, "x").ffs_total, 20.0);
  EXPECT_THROW(find_device(p, "y"), FormatError);
  EXPECT_THROW(parse_device_profiles("{"), FormatError);
  EXPECT_THROW(parse_device_profiles(R"({"devices": [{"name": "x"}]})"), FormatError);
  EXPECT_EQ(find_device(builtin_device_profiles(), "xc7vx485t").luts_total, 303600.0);
}
