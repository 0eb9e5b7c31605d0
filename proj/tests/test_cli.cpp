#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mfgz/cli.hpp"

using namespace mfgz;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "mfgz");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mfgz_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("value runs are byte-identical") {
  const fs::path a = scratch("a"), b = scratch("b");
  for (const fs::path& dir : {a, b})
    REQUIRE(run({"--out", dir.string(), "value", "example2_dirac", "--steps", "6"}) == kExitOk);
  for (const char* f : {"value_lower.txt", "value_upper.txt", "strategy_lower.csv", "strategy_upper.csv"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const std::string manifest = slurp(a / "manifest.txt");
  CHECK(manifest.find("subcommand = value") != std::string::npos);
  CHECK(manifest.find("file.value_lower.txt = fnv1a64:") != std::string::npos);
}

TEST_CASE("solve-hji writes snapshots") {
  const fs::path d = scratch("hji");
  REQUIRE(run({"--out", d.string(), "solve-hji", "terminal_only", "--kind", "both"}) == kExitOk);
  CHECK(fs::exists(d / "hji_lower.csv"));
  CHECK(fs::exists(d / "hji_upper_surface.dat"));
}

TEST_CASE("exit codes") {
  const std::string out = scratch("codes").string();
  CHECK(run({"--out", out, "check", "example1_gaussian", "metric"}) == kExitOk);
  CHECK(run({"--out", out, "check", "example1_gaussian", "nonsense"}) == kExitUsage);
  CHECK(run({"--out", out, "value", "missing_config"}) == kExitUsage);
  CHECK(run({"--out", out, "solve-hji", "example2_dirac", "--steps", "3"}) == kExitCfl);
  CHECK(run({"--out", out, "value", "example2_dirac", "--mode", "sideways"}) == kExitUsage);
  CHECK(run({"--out", out}) == kExitUsage);
  CHECK(run({"--version"}) == kExitOk);
}

TEST_CASE("wasserstein subcommand reads measure files") {
  const fs::path d = scratch("w");
  fs::create_directories(d);
  std::ofstream(d / "a.csv") << "weight,x1\n0.5,0\n0.5,2\n";
  std::ofstream(d / "b.csv") << "0.5,1\n0.5,3\n";
  CHECK(run({"wasserstein", (d / "a.csv").string(), (d / "b.csv").string()}) == kExitOk);
  std::ofstream(d / "bad.csv") << "0.5,1\n0.5\n";
  CHECK(run({"wasserstein", (d / "a.csv").string(), (d / "bad.csv").string()}) == kExitUsage);
}
