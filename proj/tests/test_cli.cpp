#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr discarded; `env` is prefixed to the command line.
Run run(const std::string& args, const std::string& env = "") {
  const char* bin = std::getenv("PHICAL_BIN");
  REQUIRE(bin != nullptr);
  const std::string cmd = env + " '" + std::string(bin) + "' " + args + " 2>/dev/null";
  Run r;
  FILE* f = popen(cmd.c_str(), "r");
  REQUIRE(f != nullptr);
  std::array<char, 4096> buf{};
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), f)) > 0) r.out.append(buf.data(), n);
  const int st = pclose(f);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

Json run_json(const std::string& args, int expect_code = 0, const std::string& env = "") {
  const Run r = run("--json " + args, env);
  INFO(r.out);
  REQUIRE(r.code == expect_code);
  return Json::parse(r.out);
}

fs::path scratch_dir(const char* name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("associate prints the closed-form rows", "[cli]") {
  const Json j = run_json("associate --p \"x^2\" --order 6");
  CHECK(j.at("schema") == "phical/1");
  CHECK(j.at("verify").at("pass") == true);
  const Run t = run("associate --p x --order 3");
  CHECK(t.code == 0);
  CHECK(t.out.find("f_0 = ") != std::string::npos);
  CHECK(t.out.find("PASS") != std::string::npos);
}

TEST_CASE("associate output is deterministic", "[cli]") {
  const Run a = run("--json associate --p \"x^-1 + x^3\" --order 5");
  const Run b = run("--json associate --p \"x^-1 + x^3\" --order 5");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("exit codes", "[cli]") {
  CHECK(run("verify --p x --order 4").code == 0);
  // a base that is not an associate fails its check
  CHECK(run("verify --phi \"x+z+z*x\" --order 3").code == 1);
  // malformed input
  CHECK(run("associate --p \"x + \"").code == 2);
  CHECK(run("associate").code == 2);
  CHECK(run("no-such-command").code == 2);
  CHECK(run("coeffs --system rat --q 0").code == 2);
  CHECK(run("iota --expr \"1/(x-z)\" --outer x --inner x").code == 2);
  // precision exhausted
  CHECK(run("associate --p x --order 0").code == 3);
  CHECK(run("--help").code == 0);
}

TEST_CASE("iota and coefficients", "[cli]") {
  const Json j = run_json("iota --expr \"1/(x-z)\" --outer x --inner z --order 4");
  CHECK(j.at("command") == "iota");
  const Json c = run_json("coeffs --system trig --q symbolic --order 4");
  CHECK(c.at("lambda").at(0) == "q");
  CHECK(c.at("check").at("pass") == true);
  const Json one = run_json("coeffs --system rat --q 1 --order 3");
  CHECK(one.at("mu") == Json::array({"1", "0", "0"}));
}

TEST_CASE("check-suite items", "[cli]") {
  const Json j = run_json("check-suite --name log-exp --order 12");
  CHECK(j.at("pass") == true);
  CHECK(j.at("items").size() == 1);
  CHECK(j.at("items")[0].at("item") == "log-exp");
  CHECK(run("check-suite --name nonsense").code == 2);
}

TEST_CASE("module caches through the CLI", "[cli][cache]") {
  const fs::path dir = scratch_dir("phical_cli_cache");
  const std::string env = "PHICAL_CACHE_DIR='" + dir.string() + "'";
  const Json b = run_json("qbg-build --system rat --q -1 --depth 2 --floor -4 --window 3 --cache m.qbg", 0, env);
  CHECK(b.at("relations").at("pass") == true);
  CHECK(fs::exists(dir / "m.qbg"));
  CHECK(b.at("basis") == 37);

  const Json v = run_json("qbg-verify --cache m.qbg --window 3", 0, env);
  CHECK(v.at("pass") == true);
  CHECK(v.at("integrity").at("pass") == true);

  const Json i = run_json("cache-info --cache m.qbg", 0, env);
  CHECK(i.at("version") == 1);
  CHECK(i.at("format") == "phical-qbg");
  CHECK(i.at("kind") == "rat");

  // an absolute path ignores the cache directory
  const fs::path abs = dir / "abs.qbg";
  CHECK(run("qbg-build --system trig --q -1 --window 2 --cache '" + abs.string() + "'").code == 0);
  CHECK(fs::exists(abs));

  const fs::path junk = dir / "junk.qbg";
  FILE* f = std::fopen(junk.c_str(), "w");
  std::fputs("not a cache", f);
  std::fclose(f);
  CHECK(run("qbg-verify --cache '" + junk.string() + "'").code == 2);
  CHECK(run("cache-info --cache '" + (dir / "missing.qbg").string() + "'").code == 2);
  fs::remove_all(dir);
}

TEST_CASE("modes of the exponential vertex operators", "[cli]") {
  const Json id = run_json("modes --q -1 --a beta --b gamma --n 0 --expect identity");
  CHECK(id.at("check").at("pass") == true);
  CHECK(run("modes --q -1 --a beta --b gamma --n 1 --expect zero").code == 0);
  CHECK(run("modes --q -1 --a beta --b gamma --n -3 --expect zero").code == 1);
  const Json y = run_json("yphi --q -1 --a beta --b gamma --nlo -1 --nhi 1");
  CHECK(y.at("search").at("meta").at("k") == 1);
}
