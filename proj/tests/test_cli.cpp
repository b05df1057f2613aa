#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "softgate/calibration.hpp"
#include "softgate/gate.hpp"
#include "softgate/ingest.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using namespace softgate;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "softgate");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("softgate_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Training CSV and calibration artifact for a k-class synthetic fixture.
  void prepare(std::size_t k = 10, double noise = 0.15) {
    ASSERT_EQ(run({"--seed", "3", "synth", "--k", std::to_string(k), "--per-class", "60", "--noise",
                   std::to_string(noise), "--out", path("train.csv")})
                  .code,
              0);
    ASSERT_EQ(run({"--quiet", "calibrate", "--train", path("train.csv"), "--k", std::to_string(k),
                   "--out", path("cal.json"), "--created", "2026-01-01T00:00:00Z"})
                  .code,
              0);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SynthWritesParseableCsv) {
  const auto r = run({"--seed", "7", "synth", "--k", "3", "--per-class", "10", "--concentration", "50",
                      "--out", path("s.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path("s.csv"));
  const auto set = parse_prediction_csv(in, 3).set;
  EXPECT_EQ(set.row_count(), 30u);
  for (const auto& rec : set) EXPECT_TRUE(rec.correct());
}

TEST_F(CliTest, CalibrateWritesLoadableArtifactAndSummary) {
  prepare();
  const auto r = run({"calibrate", "--train", path("train.csv"), "--k", "10", "--out", path("c2.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path("c2.json"));
  EXPECT_EQ(load_calibration(in).k(), 10u);
  EXPECT_NE(r.out.find("class  support  threshold"), std::string::npos);
  EXPECT_NE(r.out.find("pairwise: d_min="), std::string::npos);
  EXPECT_NE(r.out.find("pairs=45"), std::string::npos);
}

TEST_F(CliTest, MissingIncorrectRowsPrintInfiniteFallback) {
  std::ofstream csv(path("t.csv"));
  csv << csv_header(4) << '\n';
  for (std::size_t c = 0; c < 4; ++c) {
    const auto p = fixtures::at_distance_from_vertex(4, c, 0.1);
    csv << p[0] << ',' << p[1] << ',' << p[2] << ',' << p[3] << ',' << c << ',' << c << '\n';
  }
  for (std::size_t c = 0; c < 3; ++c) {
    const auto p = fixtures::at_distance_from_vertex(4, c, 0.4);
    csv << p[0] << ',' << p[1] << ',' << p[2] << ',' << p[3] << ',' << (c + 1) << ',' << c << '\n';
  }
  csv.close();
  const auto r = run({"calibrate", "--train", path("t.csv"), "--k", "4", "--fallback", "infinite", "--out",
                      path("c.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("3  1  inf (fallback)  fallback-infinite"), std::string::npos) << r.out;
}

TEST_F(CliTest, IdentityCentroidsPrintSqrtTwoMean) {
  std::ofstream csv(path("id.csv"));
  csv << csv_header(3) << "\n1,0,0,0,0\n0,1,0,1,1\n0,0,1,2,2\n";
  csv.close();
  const auto r = run({"calibrate", "--train", path("id.csv"), "--k", "3", "--out", path("c.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mean=1.41421"), std::string::npos) << r.out;
}

TEST_F(CliTest, GateSummaryMatchesLibrary) {
  prepare();
  // Correct training rows only.
  std::ifstream in(path("train.csv"));
  const auto train = parse_prediction_csv(in, 10).set;
  const auto [correct, incorrect] = split_by_correctness(train);
  {
    std::ofstream f(path("correct.csv"));
    write_prediction_csv(correct, f);
  }
  const auto r = run({"gate", "--input", path("correct.csv"), "--artifact", path("cal.json"), "--out",
                      path("d.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;

  std::ifstream cal(path("cal.json"));
  const auto art = load_calibration(cal);
  const auto want = gate_batch(correct, art);
  EXPECT_NE(r.err.find("accepted " + std::to_string(want.summary.accepted) + ", unknown " +
                       std::to_string(want.summary.unknown)),
            std::string::npos)
      << r.err;
  const auto lines = slurp(path("d.jsonl"));
  EXPECT_EQ(count_lines(lines), correct.row_count());
  EXPECT_EQ(json::parse(lines.substr(0, lines.find('\n'))).at("mode"), "per-class");
}

TEST_F(CliTest, GlobalGateRejectsFarRows) {
  prepare();
  std::ofstream csv(path("far.csv"));
  csv << csv_header(10) << '\n';
  for (std::size_t i = 0; i < 20; ++i) {
    auto p = fixtures::at_distance_from_vertex(10, i % 10, 0.9);
    for (std::size_t j = 0; j < 10; ++j) csv << p[j] << ',';
    csv << i % 10 << ',' << i % 10 << '\n';
  }
  csv.close();
  const auto r = run({"gate", "--input", path("far.csv"), "--artifact", path("cal.json"), "--mode", "global",
                      "--threshold", "0.05"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("accepted 0, unknown 20, accept_rate 0"), std::string::npos) << r.err;
  EXPECT_EQ(count_lines(r.out), 20u);
}

TEST_F(CliTest, MissingArtifactFailsWithoutOutput) {
  prepare();
  const auto r = run({"gate", "--input", path("train.csv"), "--artifact", path("nope.json"), "--out",
                      path("d.jsonl")});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(fs::exists(path("d.jsonl")));
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, CorruptArtifactIsDataErrorWithoutOutput) {
  prepare();
  const auto text = slurp(path("cal.json"));
  std::ofstream(path("bad.json")) << text.substr(0, text.size() / 3);
  const auto r = run({"sweep", "--input", path("train.csv"), "--artifact", path("bad.json"), "--out",
                      path("s.csv")});
  EXPECT_EQ(r.code, cli::kDataError);
  EXPECT_FALSE(fs::exists(path("s.csv")));
}

TEST_F(CliTest, SweepDefaultGridHasNineRows) {
  prepare();
  const auto r = run({"--quiet", "sweep", "--input", path("train.csv"), "--artifact", path("cal.json"),
                      "--out", "-"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 10u);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')),
            "threshold,retention_pct,accuracy_pct,correct_retained,incorrect_retained,ratio");

  const auto j = run({"--quiet", "--format", "json", "sweep", "--input", path("train.csv"), "--artifact",
                      path("cal.json"), "--grid", "0.5,0.2"});
  ASSERT_EQ(j.code, 0) << j.err;
  EXPECT_EQ(json::parse(j.out).at("rows").size(), 2u);
}

TEST_F(CliTest, ExclusionAcrossNamedInputs) {
  prepare();
  ASSERT_EQ(run({"--seed", "9", "synth", "--k", "10", "--per-class", "10", "--concentration", "0.2",
                 "--noise", "0.5", "--out", path("probe.csv")})
                .code,
            0);
  const auto r = run({"--quiet", "exclusion", "--input", "train=" + path("train.csv"), "--input",
                      "probe=" + path("probe.csv"), "--artifact", path("cal.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 1u + 18u);
  EXPECT_NE(r.out.find("\nprobe,"), std::string::npos);
}

TEST_F(CliTest, DensityDefaultShells) {
  prepare();
  const auto r = run({"--quiet", "--format", "json", "density", "--input", path("train.csv"),
                      "--artifact", path("cal.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  ASSERT_EQ(j.at("shells").size(), 8u);
  EXPECT_NEAR(j.at("shells")[0].at("volume").get<double>() / 2.01786e-1, 1.0, 1e-5);
  EXPECT_NEAR(j.at("inner_sphere").at("volume").get<double>() / 2.49039e-13, 1.0, 1e-5);
}

TEST_F(CliTest, ClusterZeroNoiseHasPerfectFidelity) {
  ASSERT_EQ(run({"synth", "--k", "5", "--per-class", "50", "--concentration", "30", "--out",
                 path("clean.csv")})
                .code,
            0);
  const auto r = run({"cluster", "--input", path("clean.csv"), "--k", "5", "--out", path("clu.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("fidelity 1 (250/250)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("fidelity initial 1"), std::string::npos);
}

TEST_F(CliTest, ExemplarsAcceptForeignSourceLabels) {
  prepare();
  std::ofstream csv(path("ood.csv"));
  csv << csv_header(10) << '\n';
  auto p = fixtures::at_distance_from_vertex(10, 2, 0.3);
  for (double v : p) csv << v << ',';
  csv << "61,2\n";
  csv.close();
  const auto r = run({"--quiet", "--format", "json", "exemplars", "--input", path("ood.csv"), "--artifact",
                      path("cal.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j.at("classes")[2].at("nearest_source_label"), 61);
}

TEST_F(CliTest, DeterministicAcrossRunsAndThreads) {
  prepare();
  const auto a = run({"--threads", "1", "gate", "--input", path("train.csv"), "--artifact", path("cal.json")});
  const auto b = run({"--threads", "4", "gate", "--input", path("train.csv"), "--artifact", path("cal.json")});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto s1 = run({"--seed", "5", "synth", "--k", "4", "--per-class", "5", "--out", "-"});
  const auto s2 = run({"--seed", "5", "synth", "--k", "4", "--per-class", "5", "--out", "-"});
  EXPECT_EQ(s1.out, s2.out);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
  EXPECT_EQ(run({"calibrate", "--k", "3", "--out", path("x.json")}).code, cli::kUsage);

  std::ofstream(path("bad.csv")) << csv_header(3) << "\n0.5,0.5,abc,0,0\n";
  const auto r = run({"calibrate", "--train", path("bad.csv"), "--k", "3", "--out", path("x.json")});
  EXPECT_EQ(r.code, cli::kDataError);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("x.json")));
}

TEST_F(CliTest, EnvironmentOverridesFlags) {
  ::setenv("SOFTGATE_SYNTH_PER_CLASS", "3", 1);
  const auto r = run({"synth", "--k", "2", "--out", "-"});
  ::unsetenv("SOFTGATE_SYNTH_PER_CLASS");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 1u + 6u);
}
