#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "polyinv/cli.hpp"

using namespace polyinv;
namespace fs = std::filesystem;

namespace {

struct CliDir : ::testing::Test {
  fs::path dir;
  std::ostringstream out, err;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("polyinv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string p(const std::string& name) const { return (dir / name).string(); }

  int run(std::vector<std::string> args) {
    out.str("");
    err.str("");
    return cli::run(std::move(args), out, err);
  }

  void make_samples(std::size_t n = 2, std::size_t N = 300) {
    ASSERT_EQ(run({"gen-system", "--n", std::to_string(n), "--modes", "2", "--seed", "3", "--out", p("sys.json")}), 0);
    ASSERT_EQ(run({"sample", "--system", p("sys.json"), "--N", std::to_string(N), "--seed", "4", "--out", p("s.json")}), 0);
  }
};

}  // namespace

TEST(Digest, Fnv1aKnownValues) {
  EXPECT_EQ(cli::fnv1a64(""), "cbf29ce484222325");
  EXPECT_EQ(cli::fnv1a64("a"), "af63dc4c8601ec8c");
}

TEST_F(CliDir, CsvDigestIgnoresTimeColumn) {
  write_text(p("a.csv"), "n,ms,v\n2,1.5,3\n");
  write_text(p("b.csv"), "n,ms,v\n2,99.25,3\n");
  write_text(p("c.csv"), "n,ms,v\n2,1.5,4\n");
  EXPECT_EQ(cli::content_digest(p("a.csv")), cli::content_digest(p("b.csv")));
  EXPECT_NE(cli::content_digest(p("a.csv")), cli::content_digest(p("c.csv")));
}

TEST_F(CliDir, PipelineAndManifest) {
  make_samples();
  ASSERT_EQ(run({"synthesize", "--samples", p("s.json"), "--out", p("r.json")}), 0) << err.str();
  EXPECT_NE(out.str().find("k_tilde"), std::string::npos);
  EXPECT_TRUE(fs::exists(p("r.json.trace.csv")));
  const Json m = parse_json(read_text(p("r.json.manifest.json")));
  EXPECT_EQ(m["command"], "synthesize");
  EXPECT_EQ(m["seed"], 4);
  EXPECT_EQ(m["outputs"].size(), 2u);
  EXPECT_EQ(m["outputs"][0]["digest"], cli::content_digest(p("r.json")));
  EXPECT_EQ(m["inputs"][0]["digest"], cli::content_digest(p("s.json")));
  EXPECT_EQ(load_polytope(p("r.json")).dim(), 2u);
}

TEST_F(CliDir, ReplayReproducesAndDetectsTampering) {
  make_samples();
  ASSERT_EQ(run({"synthesize", "--samples", p("s.json"), "--out", p("r.json")}), 0);
  EXPECT_EQ(run({"replay", "--manifest", p("r.json.manifest.json"), "--out-dir", p("rep")}), 0) << err.str();
  EXPECT_EQ(read_text(p("r.json")), read_text(p("rep/r.json")));

  Json m = parse_json(read_text(p("r.json.manifest.json")));
  m["outputs"][0]["digest"] = "0000000000000000";
  write_text(p("bad.manifest.json"), dump(m));
  EXPECT_EQ(run({"replay", "--manifest", p("bad.manifest.json"), "--out-dir", p("rep2")}), 4);
}

TEST_F(CliDir, CertifyBothModes) {
  make_samples();
  ASSERT_EQ(run({"synthesize", "--samples", p("s.json"), "--out", p("r.json")}), 0);
  ASSERT_EQ(run({"certify", "--polytope", p("r.json"), "--mode", "contraction", "--epsilon", "0.05", "--samples",
                 p("s.json"), "--out", p("c.json")}),
            0)
      << err.str();
  const Json c = parse_json(read_text(p("c.json")));
  EXPECT_EQ(c["inputs"]["N"], 300);
  EXPECT_EQ(c["inputs"]["modes"], 2);

  ASSERT_EQ(run({"certify", "--polytope", p("r.json"), "--mode", "scenario", "--samples", p("s.json"), "--out",
                 p("sc.json")}),
            0)
      << err.str();
  const Json sc = parse_json(read_text(p("sc.json")));
  EXPECT_TRUE(sc["result"]["matches_polytope"].get<bool>());
  EXPECT_GE(sc["result"]["supporting_points"].get<int>(), 1);
}

TEST_F(CliDir, InconclusiveCertificateStillSucceeds) {
  save(p("box.json"), unit_box(4));
  EXPECT_EQ(run({"certify", "--polytope", p("box.json"), "--mode", "contraction", "--epsilon", "0.4", "--N", "200",
                 "--modes", "2", "--out", p("c.json")}),
            0);
  EXPECT_TRUE(parse_json(read_text(p("c.json")))["result"]["lambda"].is_null());
}

TEST_F(CliDir, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"gen-system", "--n", "9", "--out", p("x.json")}), 2);
  EXPECT_EQ(run({"gen-system", "--modes", "17", "--out", p("x.json")}), 2);
  EXPECT_EQ(run({"gen-system", "--decay", "1.2", "--out", p("x.json")}), 2);
  EXPECT_EQ(run({"sample", "--system", p("missing.json"), "--N", "3", "--out", p("x.json")}), 2);
  EXPECT_EQ(run({"nonsense"}), 2);
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"bound-curves", "--eps-grid", "", "--out", p("x.csv")}), 2);
  EXPECT_EQ(run({"bound-curves", "--eps-grid", "0.1", "--N-grid", "100", "--out", p("x.csv")}), 2);
  EXPECT_EQ(run({"bench-table", "--dims", "2,9", "--out", p("x.csv")}), 2);
  write_text(p("broken.json"), "{\n  \"n\": 2,\n  \"M\": \n");
  EXPECT_EQ(run({"sample", "--system", p("broken.json"), "--N", "3", "--out", p("x.json")}), 2);
  EXPECT_NE(err.str().find("line"), std::string::npos);
  EXPECT_FALSE(fs::exists(p("x.json")));
}

TEST_F(CliDir, ScenarioWithoutSamplesIsUsageError) {
  save(p("box.json"), unit_box(2));
  EXPECT_EQ(run({"certify", "--polytope", p("box.json"), "--mode", "scenario", "--out", p("c.json")}), 2);
  EXPECT_EQ(run({"certify", "--polytope", p("box.json"), "--mode", "contraction", "--epsilon", "0.6", "--N", "10",
                 "--modes", "2", "--out", p("c.json")}),
            2);
}

TEST_F(CliDir, NonConvergenceExitsThreeWithTrace) {
  make_samples();
  EXPECT_EQ(run({"synthesize", "--samples", p("s.json"), "--max-iter", "1", "--out", p("r.json")}), 3);
  EXPECT_TRUE(fs::exists(p("r.json.trace.csv")));
  EXPECT_FALSE(fs::exists(p("r.json")));
}

TEST_F(CliDir, RenderIsDeterministicAndTwoDimensionalOnly) {
  make_samples();
  ASSERT_EQ(run({"synthesize", "--samples", p("s.json"), "--out", p("r.json")}), 0);
  save(p("box.json"), unit_box(2));
  ASSERT_EQ(run({"render", "--polytope", p("box.json"), "--polytope", p("r.json"), "--samples", p("s.json"), "--out",
                 p("a.svg")}),
            0);
  ASSERT_EQ(run({"render", "--polytope", p("box.json"), "--polytope", p("r.json"), "--samples", p("s.json"), "--out",
                 p("b.svg")}),
            0);
  const std::string svg = read_text(p("a.svg"));
  EXPECT_EQ(svg, read_text(p("b.svg")));
  EXPECT_NE(svg.find("#1f77b4"), std::string::npos);
  EXPECT_NE(svg.find("#d62728"), std::string::npos);
  EXPECT_NE(svg.find("r=\"1\""), std::string::npos);
  save(p("cube.json"), unit_box(3));
  EXPECT_EQ(run({"render", "--polytope", p("cube.json"), "--out", p("c.svg")}), 2);
}

TEST_F(CliDir, BenchTableAndCurvesWriteCsv) {
  ASSERT_EQ(run({"bench-table", "--dims", "2", "--modes", "2", "--N", "500", "--out", p("b.csv")}), 0) << err.str();
  const std::string b = read_text(p("b.csv"));
  EXPECT_EQ(b.substr(0, b.find('\n')), "n,M,k_tilde,V_tilde,k_star,V_star,lambda_star,ms");
  ASSERT_EQ(run({"bound-curves", "--n", "2", "--modes", "2", "--N-grid", "200,100", "--out", p("k.csv")}), 0)
      << err.str();
  const std::string k = read_text(p("k.csv"));
  EXPECT_NE(k.find("lambda_B,100,"), std::string::npos);
  EXPECT_LT(k.find("lambda_B,100,"), k.find("lambda_B,200,"));
  EXPECT_EQ(run({"replay", "--manifest", p("k.csv.manifest.json"), "--out-dir", p("rep")}), 0);
}
