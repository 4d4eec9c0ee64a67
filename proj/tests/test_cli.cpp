// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "panfuse/cli.hpp"
#include "panfuse/io.hpp"

using namespace panfuse;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "panfuse");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("panfuse_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write_text(const std::string& name, const std::string& text) const {
    io::write_file(dir_ / name, std::vector<std::uint8_t>(text.begin(), text.end()));
  }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"drop-sim", "--p", "2", "--steps", "5", "--seed", "1"}).code, kExitUsage);
  EXPECT_EQ(run({"eval", "--pred", "x"}).code, kExitUsage);
  EXPECT_EQ(run({"gradcheck", "--variant", "cbam"}).code, kExitUsage);
}

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, kExitOk); }

TEST_F(CliTest, SynthInferEvalRoundTrip) {
  write_text("spec.txt", "height = 24\nwidth = 28\nnum_instances = 4\nseed = 5\n");
  const auto synth = run({"synth", "--spec", path("spec.txt"), "--out-dir", path("scene")});
  ASSERT_EQ(synth.code, kExitOk) << synth.err;
  EXPECT_NE(synth.out.find("file.gt = gt.pmsk"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "scene" / "manifest.txt"));

  const auto infer = run({"infer", "--sem", path("scene/sem.pten"), "--cen", path("scene/cen.pten"), "--emb",
                          path("scene/emb.pten"), "--out", path("pred.pmsk")});
  ASSERT_EQ(infer.code, kExitOk) << infer.err;
  EXPECT_EQ(infer.out, "instances 4\n");

  const auto eval = run({"eval", "--pred", path("pred.pmsk"), "--gt", path("scene/gt.pmsk")});
  ASSERT_EQ(eval.code, kExitOk) << eval.err;
  EXPECT_NE(eval.out.find("overall pq 1.000000"), std::string::npos) << eval.out;
  EXPECT_NE(eval.out.find("miou 1.000000"), std::string::npos) << eval.out;

  // Same inputs give byte-identical outputs.
  ASSERT_EQ(run({"infer", "--sem", path("scene/sem.pten"), "--cen", path("scene/cen.pten"), "--emb",
                 path("scene/emb.pten"), "--out", path("pred2.pmsk")})
                .code,
            kExitOk);
  EXPECT_EQ(io::read_file(dir_ / "pred.pmsk"), io::read_file(dir_ / "pred2.pmsk"));
}

TEST_F(CliTest, LossesOnSyntheticScene) {
  write_text("spec.txt", "height = 16\nwidth = 16\nnum_instances = 2\nseed = 1\n");
  ASSERT_EQ(run({"synth", "--spec", path("spec.txt"), "--out-dir", path("s")}).code, kExitOk);
  const auto r = run({"losses", "--sem", path("s/sem.pten"), "--labels", path("s/gt.pmsk"), "--cen", path("s/cen.pten"),
                      "--cen-gt", path("s/cen_gt.pten"), "--emb", path("s/emb.pten"), "--instances",
                      path("s/gt.pmsk")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* key : {"L_sem ", "L_cen ", "L_att ", "L_rep ", "L_reg ", "L_emb ", "L_pan "}) {
    EXPECT_NE(r.out.find(key), std::string::npos) << key;
  }
  EXPECT_NE(r.out.find("L_rep 0.000000"), std::string::npos);
}

TEST_F(CliTest, FormatAndConfigErrorsExitThree) {
  write_text("junk.pten", "XXXXjunk");
  const auto r = run({"eval", "--pred", path("junk.pten"), "--gt", path("junk.pten")});
  EXPECT_EQ(r.code, kExitFormat);
  EXPECT_NE(r.err.find("format error"), std::string::npos);

  write_text("bad.cfg", "unknown_key = 1\n");
  write_text("spec.txt", "height = 8\nwidth = 8\nnum_instances = 0\n");
  ASSERT_EQ(run({"synth", "--spec", path("spec.txt"), "--out-dir", path("s")}).code, kExitOk);
  EXPECT_EQ(run({"eval", "--pred", path("s/gt.pmsk"), "--gt", path("s/gt.pmsk"), "--config", path("bad.cfg")}).code,
            kExitFormat);
  EXPECT_EQ(run({"eval", "--pred", path("missing.pmsk"), "--gt", path("s/gt.pmsk")}).code, kExitFormat);
}

TEST_F(CliTest, EvalIdenticalMasksPrintsOne) {
  const PanopticMask m{LabelMap(2, 2, std::vector<std::int32_t>{0, 3, 3, 1}),
                       LabelMap(2, 2, std::vector<std::int32_t>{0, 1, 1, 0})};
  io::write_mask(dir_ / "m.pmsk", m);
  const auto r = run({"eval", "--pred", path("m.pmsk"), "--gt", path("m.pmsk")});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("overall pq 1.000000"), std::string::npos);
}

TEST_F(CliTest, GradcheckResidualExciteSeed9) {
  const auto r = run({"gradcheck", "--variant", "residual-excite", "--seed", "9"});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  EXPECT_NE(r.out.find("fusion/residual-excite instances 20"), std::string::npos);
  EXPECT_NE(r.out.find("loss/focal"), std::string::npos);
  EXPECT_NE(r.out.find("loss/embedding"), std::string::npos);
}

TEST_F(CliTest, DropSim) {
  const auto r = run({"drop-sim", "--p", "0.5", "--steps", "10000", "--seed", "3"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("steps"), std::string::npos);
  EXPECT_EQ(r.out, run({"drop-sim", "--p", "0.5", "--steps", "10000", "--seed", "3"}).out);
}
