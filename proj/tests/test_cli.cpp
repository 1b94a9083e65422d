#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

const std::string kSrc = PSILAT_SOURCE_DIR;

CliRun run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + PSILAT_CLI + "\" " + args + " 2>/dev/null";
  CliRun r;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), f)) > 0) r.out.append(buf.data(), n);
  const int st = pclose(f);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string fixture(const std::string& name) { return "\"" + kSrc + "/fixtures/" + name + "\""; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reports embed the input path; drop it so goldens do not depend on the checkout.
json strip_paths(json j) {
  if (j.is_object()) {
    j.erase("path");
    for (auto& [k, v] : j.items()) v = strip_paths(v);
  } else if (j.is_array()) {
    for (auto& v : j) v = strip_paths(v);
  }
  return j;
}

void check_golden(const std::string& name, const std::string& args) {
  const CliRun r = run(args);
  ASSERT_EQ(r.code, 0) << args;
  const json got = strip_paths(json::parse(r.out));
  const std::string path = kSrc + "/tests/golden/" + name + ".json";
  if (std::getenv("PSILAT_UPDATE_GOLDEN")) {
    std::ofstream(path) << got.dump(2) << "\n";
    return;
  }
  const std::string want = slurp(path);
  ASSERT_FALSE(want.empty()) << "missing golden " << path;
  EXPECT_EQ(got, json::parse(want)) << name;
}

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("validate " + fixture("trivial_rank1_Qp.json")).code, 0);
  EXPECT_EQ(run("validate " + fixture("broken_commutation.json")).code, 1);
  EXPECT_EQ(run("validate " + fixture("does_not_exist.json")).code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("example q").code, 2);
  for (const char* f : {"a.json", "b.json", "c.json", "d.json"}) EXPECT_EQ(run(std::string("validate ") + fixture(f)).code, 0) << f;
}

TEST(Cli, MalformedInputIsOperationalError) {
  const std::string path = ::testing::TempDir() + "psilat_bad.json";
  std::ofstream(path) << "{\"ring\": {\"p\": 4}}";
  EXPECT_EQ(run("validate \"" + path + "\"").code, 2);
  std::ofstream(path) << "not json";
  EXPECT_EQ(run("dsharp \"" + path + "\"").code, 2);
}

TEST(Cli, ReportCarriesVersionAndCanonicalInput) {
  const CliRun r = run("validate " + fixture("trivial_rank1_Qp.json"));
  const json j = json::parse(r.out);
  EXPECT_EQ(j["version"].get<std::string>().rfind("psi-lattice ", 0), 0u);
  EXPECT_EQ(j["command"], "validate");
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["input"]["ring"]["p"], 3);
  // Canonical form fills defaults.
  EXPECT_TRUE(j["input"]["ring"].contains("precision"));
  EXPECT_TRUE(j["input"]["ring"].contains("modulus"));
}

TEST(Cli, Deterministic) {
  for (const std::string args : {"dsharp " + fixture("trivial_rank1_Qp.json"), std::string("example b --q 3 --alpha 1 --report exactness"),
                                  std::string("lubin-tate --p 2 --tprec 8 --gamma 3")}) {
    const CliRun a = run(args), b = run(args);
    EXPECT_EQ(a.code, 0) << args;
    EXPECT_EQ(a.out, b.out) << args;
  }
}

TEST(Cli, JobsDoNotChangeOutput) {
  const std::string files = fixture("trivial_rank1_Qp.json") + " " + fixture("a.json") + " " + fixture("b.json") + " " +
                            fixture("c.json") + " " + fixture("d.json");
  for (const char* cmd : {"validate ", "dual "}) {
    const CliRun one = run(std::string(cmd) + files);
    const CliRun four = run(std::string(cmd) + "--jobs 4 " + files);
    EXPECT_EQ(one.code, four.code) << cmd;
    EXPECT_EQ(one.out, four.out) << cmd;
    EXPECT_FALSE(one.out.empty());
  }
}

TEST(Cli, SeedControlsRandomElements) {
  const std::string args = "psi --random 3 " + fixture("trivial_rank1_Qp.json");
  const CliRun a = run(args, "PSI_LATTICE_SEED=11"), b = run(args, "PSI_LATTICE_SEED=11"), c = run(args, "PSI_LATTICE_SEED=12");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_EQ(run(args, "PSI_LATTICE_SEED=abc").code, 2);
}

TEST(Cli, DSharpOfTrivialModule) {
  const json j = json::parse(run("dsharp " + fixture("trivial_rank1_Qp.json")).out);
  EXPECT_EQ(j["result"]["quotient_dim"], 1);
  EXPECT_EQ(j["result"]["dsharp_basis"]["pivot_valuations"], json::array({-1}));
  EXPECT_EQ(j["result"]["dnatural_basis"]["pivot_valuations"], json::array({0}));
}

TEST(Cli, ExampleALattices) {
  const CliRun r = run("example a --vars 2 --report lattices");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["result"]["distinct"], 5);
}

TEST(Cli, ReportExactness) {
  const CliRun r = run("report-exactness b --q 3 --alpha 1");
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out)["result"];
  EXPECT_EQ(j["natural"]["middle_homology_dim"], 1);
  EXPECT_TRUE(j["natural"]["left_exact"].get<bool>());
}

TEST(Cli, LubinTateMatchesMultiplicativeGroup) {
  // q = 2: [3](t) = (1+t)^3 - 1 = 3t + 3t^2 + t^3, which is t + t^2 + t^3 mod 2.
  const CliRun r = run("lubin-tate --p 2 --tprec 6 --gamma 3");
  ASSERT_EQ(r.code, 0);
  const json s = json::parse(r.out)["result"]["samples"][0];
  EXPECT_TRUE(s["functional_equation"].get<bool>());
  EXPECT_EQ(s["reduced"], json::array({"1:1", "2:1", "3:1"}));
}

TEST(Cli, Golden) {
  check_golden("validate_trivial", "validate " + fixture("trivial_rank1_Qp.json"));
  check_golden("dsharp_trivial", "dsharp " + fixture("trivial_rank1_Qp.json"));
  check_golden("dual_a", "dual " + fixture("a.json"));
  check_golden("example_b_exactness", "example b --q 3 --alpha 1 --report exactness");
  check_golden("lubin_tate_p2", "lubin-tate --p 2 --tprec 6 --gamma 3 --gamma teich");
}
