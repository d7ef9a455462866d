#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  Run r;
  std::string cmd = std::string("\"") + ICCA_CLI_PATH + "\" " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string("\"") + ICCA_DATA_DIR + "/" + name + "\""; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("icca-cli-" + std::to_string(::getpid()) + "-" +
           ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string write(const std::string& name, const std::string& text) {
    auto p = dir / name;
    std::ofstream(p) << text;
    return "\"" + p.string() + "\"";
  }

  fs::path dir;
};

const char* kNoCache = R"({"tasks":[{"name":"t","under_analysis":true,"paths":[[{"id":1,"count":1,"body":[{"block":0}]}]]}]})";

const char* kZeroWays = R"({"cache":{"line_size":16,"miss_latency":100,
  "levels":[{"sets":1,"associativity":0,"hit_latency":5,"shared":true}]},
  "tasks":[{"name":"t","under_analysis":true,"paths":[[{"id":1,"count":1,"body":[{"block":0}]}]]}]})";

}  // namespace

TEST_F(Cli, AnalyzeShippedExamples) {
  for (const char* f : {"scopes.json", "aggregation.json", "carry_on.json", "segments.json"}) {
    auto r = run("analyze " + data(f));
    EXPECT_EQ(r.code, 0) << f << "\n" << r.out;
    EXPECT_NE(r.out.find("proposed"), std::string::npos);
  }
}

TEST_F(Cli, SegmentsJsonTotals) {
  auto r = run("analyze " + data("segments.json") + " --json --no-timestamp");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["methods"]["proposed"]["misses"], 3);
  EXPECT_EQ(j["methods"]["proposed"]["interference_cycles"], 285);
}

TEST_F(Cli, MethodSelection) {
  auto r = run("analyze " + data("segments.json") + " --methods proposed,conflict");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("conflict"), std::string::npos);
  EXPECT_EQ(r.out.find("footprint"), std::string::npos);
  EXPECT_EQ(run("analyze " + data("segments.json") + " --methods bogus").code, 2);
}

TEST_F(Cli, InputErrorsExitTwo) {
  EXPECT_EQ(run("analyze " + write("nocache.json", kNoCache)).code, 2);
  EXPECT_EQ(run("analyze " + write("broken.json", "{\"cache\": [")).code, 2);
  EXPECT_EQ(run("analyze \"" + (dir / "missing.json").string() + "\"").code, 2);
  EXPECT_EQ(run("analyze").code, 2);
}

TEST_F(Cli, ConfigErrorsExitThree) {
  EXPECT_EQ(run("analyze " + write("zero.json", kZeroWays)).code, 3);
  EXPECT_EQ(run("oracle " + data("scopes.json") + " --max-accesses 2").code, 3);
  EXPECT_EQ(run("gen --count 0").code, 3);
}

TEST_F(Cli, OracleOnShippedExample) {
  auto r = run("oracle " + data("carry_on.json"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("SOUND"), std::string::npos);
}

TEST_F(Cli, OutDirWritesBothFiles) {
  auto r = run("analyze " + data("carry_on.json") + " --out-dir \"" + dir.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir / "carry_on.results.json"));
  EXPECT_TRUE(fs::exists(dir / "carry_on.report.txt"));
  auto j = nlohmann::json::parse(slurp(dir / "carry_on.results.json"));
  EXPECT_EQ(j["methods"]["proposed"]["misses"], 2);
}

TEST_F(Cli, GenIsDeterministic) {
  auto a = run("gen --count 4 --seed 9");
  auto b = run("gen --count 4 --seed 9");
  auto c = run("gen --count 4 --seed 10");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  std::istringstream lines(a.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line))
    if (!line.empty()) {
      EXPECT_NO_THROW({ auto j = nlohmann::json::parse(line); EXPECT_TRUE(j.is_object()); });
      ++n;
    }
  EXPECT_EQ(n, 4);
}

TEST_F(Cli, CompareCsvHasRowPerInstancePlusMean) {
  auto csv = dir / "out.csv";
  auto r = run("compare --gen 5 --seed 3 --oracle --csv \"" + csv.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream in(slurp(csv));
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(line);
  ASSERT_EQ(rows.size(), 7u);   // header, 5 instances, mean
  EXPECT_EQ(rows[0].rfind("instance,proposed,conflict,footprint", 0), 0u);
  EXPECT_EQ(rows.back().rfind("mean", 0), 0u);
}

TEST_F(Cli, CompareDirectory) {
  auto r = run("compare " + data(""));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("segments"), std::string::npos);
}

TEST_F(Cli, AgesDump) {
  auto r = run("ages " + data("scopes.json"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("b2"), std::string::npos);
}
