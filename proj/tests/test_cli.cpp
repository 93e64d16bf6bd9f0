#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code;
  std::string out;
};

std::string catalog(const std::string& rel) { return std::string(TORICFLEX_CATALOG) + "/" + rel; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("toricflex_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string& name, const std::string& text) {
    const auto p = (dir_ / name).string();
    std::ofstream(p) << text;
    return p;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static Result run(const std::string& args) {
    const std::string cmd = std::string(TORICFLEX_CLI) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    Result r{-1, {}};
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
  }

  fs::path dir_;
};

TEST_F(Cli, ToricInfoPlane) {
  auto r = run("toric info --variety " + catalog("toric/a2.json"));
  ASSERT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["hilbert_basis"].size(), 2u);
  EXPECT_EQ(j["faces"].size(), 4u);
  EXPECT_TRUE(j["ml"]["trivial"].get<bool>());
  EXPECT_TRUE(j["ml"]["checked"].get<bool>());
}

TEST_F(Cli, ToricInfoConeX21) {
  auto r = run("toric info --variety " + catalog("toric/x21.json"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["hilbert_basis"].size(), 3u);
}

TEST_F(Cli, ToricRoots) {
  auto r = run("toric roots --bound 1 --variety " + catalog("toric/a2.json"));
  ASSERT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  ASSERT_EQ(j["classes"].size(), 2u);
  std::size_t total = 0;
  for (const auto& c : j["classes"]) total += c["roots"].size();
  // (-1,0),(-1,1),(0,-1),(1,-1)
  EXPECT_EQ(total, 4u);
}

TEST_F(Cli, ToricActIdentityAtZeroTime) {
  const auto x = catalog("toric/a2.json");
  const auto p = file("p.json", R"({"points": [{"hilb": ["2","3"]}, {"hilb": ["0","5"]}]})");
  const auto w = file("w.json", R"({"letters": [{"e": [-1, 0], "t": "0"}]})");
  auto image = run("toric act --variety " + x + " --points " + p + " --word " + w);
  ASSERT_EQ(image.code, 0);
  const auto back = file("back.json", image.out);
  auto again = run("toric act --variety " + x + " --points " + back + " --word " + w);
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(image.out, again.out);
  // x-translation by 4; hilb input is ordered (y, x), char values (x, y)
  const auto w4 = file("w4.json", R"([{"e": [-1, 0], "t": "4"}])");
  auto moved = json::parse(run("toric act --variety " + x + " --points " + p + " --word " + w4).out);
  EXPECT_EQ(moved["points"][0]["char"]["values"], json::array({"7", "2"}));
}

TEST_F(Cli, ToricSolveVerifyDeterministic) {
  const auto x = catalog("toric/x21.json");
  const auto p = file("p.json", R"({"points": [{"hilb": ["1","1","1"]}, {"hilb": ["4","2","1"]}]})");
  const auto cert = path("cert.json");
  auto a = run("toric solve --variety " + x + " --points " + p + " --out " + cert);
  ASSERT_EQ(a.code, 0);
  std::string first;
  {
    std::ifstream f(cert);
    first.assign(std::istreambuf_iterator<char>(f), {});
  }
  auto b = run("toric solve --variety " + x + " --points " + p);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(first, b.out);
  auto j = json::parse(first);
  EXPECT_TRUE(j["verdict"]["verified"].get<bool>());
  auto v = run("toric verify --variety " + x + " --points " + p + " --word " + cert);
  EXPECT_EQ(v.code, 0);
  EXPECT_TRUE(json::parse(v.out)["verified"].get<bool>());
}

TEST_F(Cli, ToricSolveToTargets) {
  const auto x = catalog("toric/a2.json");
  const auto p = file("p.json", R"({"points": [{"hilb": ["2","3"]}, {"hilb": ["0","5"]}]})");
  const auto t = file("t.json", R"({"points": [{"hilb": ["1","-1"]}, {"hilb": ["7","2"]}]})");
  const auto cert = path("cert.json");
  ASSERT_EQ(run("toric solve --variety " + x + " --points " + p + " --targets " + t + " --out " + cert).code, 0);
  EXPECT_EQ(run("toric verify --variety " + x + " --points " + p + " --word " + cert + " --expect " + t).code, 0);
  // without --expect the standard tuple is the goal, which these targets are not
  EXPECT_EQ(run("toric verify --variety " + x + " --points " + p + " --word " + cert).code, 1);
}

TEST_F(Cli, ToricTamperedWordRejected) {
  const auto x = catalog("toric/a2.json");
  const auto p = file("p.json", R"({"points": [{"hilb": ["2","3"]}, {"hilb": ["0","5"]}]})");
  const auto cert = path("cert.json");
  ASSERT_EQ(run("toric solve --variety " + x + " --points " + p + " --out " + cert).code, 0);
  json j;
  {
    std::ifstream f(cert);
    j = json::parse(f);
  }
  ASSERT_FALSE(j["letters"].empty());
  j["letters"][0]["t"] = "12345";
  const auto bad = file("bad.json", j.dump());
  auto v = run("toric verify --variety " + x + " --points " + p + " --word " + bad);
  EXPECT_NE(v.code, 0);
  EXPECT_FALSE(json::parse(v.out)["verified"].get<bool>());
  // a certificate for another variety is refused
  auto other = run("toric verify --variety " + catalog("toric/x21.json") + " --points " + p + " --word " + cert);
  EXPECT_NE(other.code, 0);
}

TEST_F(Cli, ToricFlexAndMl) {
  for (const char* name : {"a2", "a3", "x21", "x31", "quadric"}) {
    const auto x = catalog(std::string("toric/") + name + ".json");
    auto f = run("toric flex --variety " + x);
    ASSERT_EQ(f.code, 0) << name;
    EXPECT_TRUE(json::parse(f.out)["flexible"].get<bool>()) << name;
    auto m = run("toric ml --variety " + x);
    EXPECT_EQ(m.code, 0) << name;
  }
}

TEST_F(Cli, ToricFlexOffOpenOrbit) {
  const auto x = catalog("toric/a2.json");
  const auto p = file("p.json", R"({"points": [{"hilb": ["0","5"]}]})");
  EXPECT_EQ(run("toric flex --variety " + x + " --points " + p).code, 2);
}

TEST_F(Cli, MalformedInputs) {
  const auto bad = file("bad.json", "{\"rank\": 2, \"rays\": [[1, 0], ");
  EXPECT_EQ(run("toric info --variety " + bad).code, 3);
  EXPECT_EQ(run("susp build --variety " + bad).code, 3);
  EXPECT_EQ(run("toric info").code, 3);
  EXPECT_EQ(run("toric nonsense").code, 3);
  EXPECT_EQ(run("toric info --mode fuzzy --variety " + catalog("toric/a2.json")).code, 3);
  EXPECT_EQ(run("toric info --variety " + path("missing.json")).code, 3);
  const auto p = file("p.json", R"({"points": [{"nowhere": 1}]})");
  EXPECT_EQ(run("toric act --variety " + catalog("toric/a2.json") + " --points " + p + " --word " + p).code, 3);
}

TEST_F(Cli, SuspBuild) {
  auto r = run("susp build --variety " + catalog("susp/tower2.json"));
  ASSERT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["level"], 2);
  EXPECT_EQ(j["dim"], 3);
  EXPECT_FALSE(j["surface"].get<bool>());
  EXPECT_EQ(j["relations"].size(), 2u);
}

TEST_F(Cli, SuspActExactAndNumeric) {
  const auto x = catalog("susp/x2.json");
  const auto p = file("p.json", R"({"points": [["1","1","1"]]})");
  const auto w = file("w.json", R"([{"side": "u", "q": ["0", "1"], "t": "1"}])");
  auto e = run("susp act --variety " + x + " --points " + p + " --word " + w);
  ASSERT_EQ(e.code, 0);
  EXPECT_EQ(json::parse(e.out)["points"][0], json::array({"2", "1", "4"}));
  auto n = run("susp act --mode numeric --variety " + x + " --points " + p + " --word " + w);
  ASSERT_EQ(n.code, 0);
  auto z = json::parse(n.out)["points"][0];
  EXPECT_NEAR(z[0][0].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(z[2][0].get<double>(), 4.0, 1e-12);
  const auto w0 = file("w0.json", R"([{"side": "v", "q": ["0", "3", "1"], "t": "0"}])");
  auto id = run("susp act --variety " + x + " --points " + p + " --word " + w0);
  EXPECT_EQ(json::parse(id.out)["points"][0], json::array({"1", "1", "1"}));
}

TEST_F(Cli, SuspSolveNumericSurface) {
  const auto x = catalog("susp/x3px.json");
  const auto p = file("p.json", R"({"points": [["1","1","2"], ["2","5","2"], ["-1","-2","1"]]})");
  const auto cert = path("cert.json");
  auto s = run("susp solve --mode numeric --variety " + x + " --points " + p + " --out " + cert);
  ASSERT_EQ(s.code, 0);
  json j;
  {
    std::ifstream f(cert);
    j = json::parse(f);
  }
  EXPECT_LE(j["verdict"]["residual"].get<double>(), 1e-9);
  auto v = run("susp verify --mode numeric --variety " + x + " --points " + p + " --word " + cert);
  EXPECT_EQ(v.code, 0);
  EXPECT_TRUE(json::parse(v.out)["steps_rechecked"].get<bool>());
  j["letters"][0]["t"] = json::array({j["letters"][0]["t"][0].get<double>() + 0.5, 0.0});
  const auto bad = file("bad.json", j.dump());
  EXPECT_NE(run("susp verify --mode numeric --variety " + x + " --points " + p + " --word " + bad).code, 0);
  auto again = run("susp solve --mode numeric --variety " + x + " --points " + p);
  std::ifstream f(cert);
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(f), {}), again.out);
}

TEST_F(Cli, SuspSolveTowerExact) {
  const auto x = catalog("susp/tower2.json");
  const auto p = file("p.json", R"({"points": [["1","1","1","2","1"], ["2","1","2","5","1"]]})");
  const auto cert = path("cert.json");
  ASSERT_EQ(run("susp solve --variety " + x + " --points " + p + " --out " + cert).code, 0);
  EXPECT_EQ(run("susp verify --variety " + x + " --points " + p + " --word " + cert).code, 0);
  EXPECT_EQ(run("susp solve --mode numeric --variety " + x + " --points " + p).code, 2);
}

TEST_F(Cli, SuspFlex) {
  const auto x = catalog("susp/tower2.json");
  const auto p = file("p.json", R"({"points": [["1","1","1","2","1"]]})");
  auto r = run("susp flex --variety " + x + " --points " + p);
  ASSERT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["points"][0]["rank"], 3);
  EXPECT_TRUE(j["flexible"].get<bool>());
}

}  // namespace
