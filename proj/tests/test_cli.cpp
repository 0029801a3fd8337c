#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "trea/model_io.hpp"

namespace fs = std::filesystem;
using namespace trea;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("trea_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  // Small seeded pipeline; returns the path of the fine-tuned model.
  std::string pipeline(const std::string& tag) {
    EXPECT_EQ(run({"gen-data", "--out", p(tag + "d.json"), "--seed", "3", "--n-train", "96", "--n-test", "32"}).code, 0);
    EXPECT_EQ(run({"train", "--data", p(tag + "d.json"), "--out", p(tag + "r.trm"), "--seed", "3", "--epochs", "2"}).code, 0);
    EXPECT_EQ(run({"quantize", "--model", p(tag + "r.trm"), "--data", p(tag + "d.json"), "--out", p(tag + "q.trm"),
                   "--epsilon", "0.01"}).code, 0);
    EXPECT_EQ(run({"prune", "--model", p(tag + "q.trm"), "--out", p(tag + "p.trm")}).code, 0);
    EXPECT_EQ(run({"finetune", "--model", p(tag + "p.trm"), "--data", p(tag + "d.json"), "--out", p(tag + "f.trm"),
                   "--seed", "3", "--epochs", "1"}).code, 0);
    return p(tag + "f.trm");
  }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, PipelineIsByteIdenticalAcrossRuns) {
  const std::string a = pipeline("a");
  const std::string b = pipeline("b");
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
}

TEST_F(Cli, PruneKeepsFourOfNine) {
  pipeline("x");
  const NetworkDescriptor m = load_model(p("xp.trm"));
  for (const auto& l : m.layers) {
    ASSERT_TRUE(l.mask.has_value());
    if (l.kind == LayerKind::kConv2d) {
      EXPECT_EQ(l.mask->retained_per_window, 4);
      for (std::size_t w = 0; w < l.mask->window_count(); ++w) {
        const auto win = l.mask->window(static_cast<int>(w / l.in_channels), static_cast<int>(w % l.in_channels));
        EXPECT_EQ(std::count(win.begin(), win.end(), 1), 4);
      }
    }
  }
}

TEST_F(Cli, QuantizeWithZeroEpsilonOnLosslessLayersIsAllFxP4) {
  pipeline("z");
  // Zero weights and a bias-only head: accuracy is the same at either precision.
  NetworkDescriptor m = load_model(p("zr.trm"));
  for (auto& l : m.layers) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
    l.bias[0] = 0.5;
    refresh_mn_scale(l);
  }
  save_model(m, p("lossless.trm"));
  const CliRun r = run({"quantize", "--model", p("lossless.trm"), "--data", p("zd.json"), "--out", p("lq.trm"),
                     "--epsilon", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& l : load_model(p("lq.trm")).layers) EXPECT_EQ(l.precision, MacMode::kFxP4Simd);
}

TEST_F(Cli, SimulateWritesTraceAndReportAndCompares) {
  pipeline("s");
  ASSERT_EQ(run({"quantize", "--model", p("sr.trm"), "--out", p("base.trm"), "--precision", "fxp8"}).code, 0);
  const CliRun base = run({"simulate", "--model", p("base.trm"), "--trace-out", p("base.json")});
  ASSERT_EQ(base.code, 0) << base.err;
  const CliRun fast = run({"simulate", "--model", p("sf.trm"), "--data", p("sd.json"), "--trace-out", p("fast.json"),
                        "--report-out", p("fast.csv"), "--power-w", "1"});
  ASSERT_EQ(fast.code, 0) << fast.err;
  EXPECT_NE(fast.out.find("cpfi "), std::string::npos);
  EXPECT_NE(slurp(p("fast.csv")).find("latency_gain"), std::string::npos);
  const CliRun rep = run({"report", "--trace", p("base.json"), "--trace", p("fast.json"), "--format", "csv"});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_EQ(std::count(rep.out.begin(), rep.out.end(), '\n'), 3);

}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"simulate"}).code, cli::kUsage);
  EXPECT_EQ(run({"simulate", "--model", p("missing.trm")}).code, cli::kUsage);
  EXPECT_EQ(run({"sweep", "--iterations", "0"}).code, cli::kUsage);
  EXPECT_EQ(run({"train", "--seed", "1", "--out", p("x")}).code, cli::kUsage);
  EXPECT_EQ(run({"gen-data", "--seed", "1", "--out", p("no/such/dir/x.json")}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
}

TEST_F(Cli, IoErrors) {
  std::ofstream(p("junk.trm")) << "not a model";
  EXPECT_EQ(run({"prune", "--model", p("junk.trm"), "--out", p("o.trm")}).code, cli::kIoError);
  std::ofstream(p("junk.json")) << "{";
  EXPECT_EQ(run({"report", "--trace", p("junk.json")}).code, cli::kIoError);
}

TEST_F(Cli, SweepAndCheck) {
  const CliRun s = run({"sweep", "--precision", "fxp8", "--iterations", "7"});
  ASSERT_EQ(s.code, 0);
  EXPECT_NE(s.out.find("\n7  "), std::string::npos);
  const CliRun a = run({"check"});
  const CliRun b = run({"check"});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const CliRun bad = run({"check", "--inject-fault"});
  EXPECT_EQ(bad.code, cli::kVerifyFailed);
  EXPECT_NE(bad.out.find("counterexample"), std::string::npos);
}
