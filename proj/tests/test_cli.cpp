#include "nlc/cli.hpp"
#include "nlc/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nlc;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(NLC_TEST_DATA) / "fixtures";

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "nlc");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path fresh(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "nlc_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string fx(const char* name) { return (kFixtures / name).string(); }

}  // namespace

TEST(Cli, SubcommandsAreListed) {
  EXPECT_EQ(subcommands().size(), 7u);
  const Result r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const auto& s : subcommands()) EXPECT_NE(r.out.find(s), std::string::npos) << s;
}

TEST(Cli, ClassifyBall) {
  const fs::path out = fresh("classify");
  const Result r = run_cli({"classify", "--kernel", fx("kernel_indicator.json"), "--shape", fx("ball.json"), "--out",
                            out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json v = read_json_file(out / "verdict.json");
  EXPECT_EQ(v.at("verdict"), "Ball");
  EXPECT_EQ(v.at("kernel").at("family"), "indicator");
}

TEST(Cli, MalformedKernelIsExitOne) {
  const Result r = run_cli({"classify", "--kernel", fx("bad_kernel.json"), "--shape", fx("ball.json"), "--out",
                            fresh("bad").string()});
  EXPECT_EQ(r.code, 1);
  const Json e = Json::parse(r.err);
  EXPECT_EQ(e.at("exit_code"), 1);
  EXPECT_EQ(e.at("field"), "alpha");
  EXPECT_EQ(e.at("error"), "validation");
}

TEST(Cli, MissingFileAndBadFlag) {
  Result r = run_cli({"classify", "--kernel", fx("nope.json"), "--shape", fx("ball.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(Json::parse(r.err).at("field"), "path");
  r = run_cli({"classify", "--dirs", "many"});
  EXPECT_EQ(r.code, 1);
  r = run_cli({"flow", "--shape", fx("ball.json"), "--variant", "wave"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(Json::parse(r.err).at("field"), "variant");
}

TEST(Cli, NumericalFailureIsExitTwo) {
  // Padding far below the heat stencil width: the mask reaches the zero-extended border.
  const Result r = run_cli({"flow", "--shape", fx("ball_small.json"), "--grid-h", "0.015625", "--padding", "0.05",
                            "--steps", "3", "--out", fresh("edge").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(Json::parse(r.err).at("exit_code"), 2);
}

TEST(Cli, TinyBlobHasConstantBoundaryCurvature) {
  const fs::path out = fresh("blob");
  const Result r = run_cli({"curvature-boundary", "--kernel", fx("kernel_indicator_r1.json"), "--shape",
                            fx("tiny_blob.json"), "--out", out.string(), "--samples", "128"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(slurp(out / "boundary.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "s,x1,x2,H,dH_de");
  // |B_1| - 2 |blob|, blob an ellipse with semi-axes 0.2 and 0.1.
  const double expected = kPi - 2 * kPi * 0.2 * 0.1;
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    ASSERT_EQ(cols.size(), 5u);
    EXPECT_NEAR(std::stod(cols[3]), expected, 1e-6 * kPi);
    ++rows;
  }
  EXPECT_EQ(rows, 128);
}

TEST(Cli, DeterministicOutputs) {
  const std::vector<std::vector<std::string>> cmds = {
      {"curvature-boundary", "--kernel", fx("kernel_smooth.json"), "--shape", fx("ellipse.json"), "--samples", "64",
       "--derivative"},
      {"flow", "--shape", fx("ball_small.json"), "--steps", "5", "--grid-h", "0.015625"},
      {"curvature-field", "--kernel", fx("kernel_smooth.json"), "--shape", fx("ball_small.json"), "--grid-h", "0.03125"},
      {"moving-plane", "--kernel", fx("kernel_indicator.json"), "--shape", fx("ball.json"), "--dirs", "3"},
      {"kernel-check"},
  };
  for (const auto& c : cmds) {
    std::string first, first_out;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = fresh("det" + std::to_string(rep));
      auto args = c;
      args.insert(args.end(), {"--out", out.string(), "--seed", "7", "--threads", "2"});
      const Result r = run_cli(args);
      ASSERT_EQ(r.code, 0) << c[0] << ": " << r.err;
      std::string all;
      for (const auto& f : fs::recursive_directory_iterator(out))
        if (f.is_regular_file()) all += f.path().filename().string() + "\n" + slurp(f.path());
      if (rep == 0) {
        first = all;
        first_out = r.out;
      } else {
        EXPECT_EQ(all, first) << c[0];
        EXPECT_EQ(r.out, first_out) << c[0];
      }
    }
  }
}
