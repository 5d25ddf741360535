#include <cstdio>
#include <filesystem>
#include <fstream>

#include "common.hpp"
#include "doctest.h"

#ifndef COOC_CLI
#error "COOC_CLI must name the cli binary"
#endif

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(COOC_CLI) + " " + args + " 2>/dev/null";
  Run r{0, {}};
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  for (size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cooc_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

void write_file(const std::string& path, const std::string& s) { std::ofstream(path, std::ios::binary) << s; }

}  // namespace

TEST_CASE("cli build, index and query") {
  TempDir d;
  write_file(d / "t.txt", testutil::kText);
  REQUIRE(run("build " + d / "t.txt" + " " + d / "t.slp").code == 0);
  REQUIRE(run("build " + d / "t.txt" + " " + d / "t.rl --rlslp").code == 0);
  for (std::string g : {"t.slp", "t.rl"}) {
    REQUIRE(run("index " + d / g + " " + d / "t.idx").code == 0);
    Run q = run("query " + d / "t.idx" + " ab ac --b 2");
    CHECK(q.code == 0);
    CHECK(q.out == "3\t5\n");
    CHECK(run("query " + d / "t.idx" + " a c --all").out == "5\t6\n7\t8\n9\t11\n");
    Run z = run("query " + d / "t.idx" + " ab zz --b 5");
    CHECK(z.code == 0);
    CHECK(z.out.empty());
  }
  write_file(d / "p1", "ab");
  write_file(d / "p2", "ac");
  CHECK(run("query " + d / "t.idx" + " --p1-file " + d / "p1" + " --p2-file " + d / "p2" + " --b 2").out == "3\t5\n");
}

TEST_CASE("cli index options") {
  TempDir d;
  write_file(d / "g", "SLPX 3 2\n0 = 'a'\n1 = 'b'\n2 = 0 1\n");
  CHECK(run("index " + d / "g" + " " + d / "i --eager").code == 0);
  CHECK(run("query " + d / "i" + " a b --b 1").out == "0\t1\n");
  CHECK(run("index " + d / "g" + " " + d / "i --eager=0").code == 1);
  write_file(d / "t.txt", testutil::kText);
  REQUIRE(run("build " + d / "t.txt" + " " + d / "t.rl --rlslp").code == 0);
  CHECK(run("index " + d / "t.rl" + " " + d / "b.idx --broad").code == 0);
  CHECK(run("query " + d / "b.idx" + " ab ac --b 2").out == "3\t5\n");

  // re-serializing a loaded index reproduces the file
  REQUIRE(run("index " + d / "t.rl" + " " + d / "x.idx").code == 0);
  auto li = cooc::load_index(d / "x.idx");
  std::ostringstream os;
  cooc::write_index(os, *li.co);
  std::ifstream in(d / "x.idx", std::ios::binary);
  std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(os.str() == file);
  file[file.size() / 2] ^= 1;
  write_file(d / "y.idx", file);
  CHECK(run("query " + d / "y.idx" + " ab ac --b 2").code == 2);
}

TEST_CASE("cli errors and exit codes") {
  TempDir d;
  CHECK(run("build " + d / "missing.txt" + " " + d / "o").code == 2);
  CHECK(run("index " + d / "missing" + " " + d / "o").code == 2);
  CHECK(run("query " + d / "missing" + " a b --b 1").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("--help").code == 0);
  write_file(d / "t.txt", "abab");
  REQUIRE(run("build " + d / "t.txt" + " " + d / "g").code == 0);
  REQUIRE(run("index " + d / "g" + " " + d / "i").code == 0);
  CHECK(run("query " + d / "i" + " a b").code == 2);
  CHECK(run("query " + d / "i" + " a b --b 1 --all").code == 2);
  CHECK(run("query " + d / "i" + " a b --b -1").code == 2);
}

TEST_CASE("cli selftest") {
  CHECK(run("selftest --n 0").code == 0);
  CHECK(run("selftest --n 20 --maxlen 40 --seed 1").code == 0);
  Run f = run("selftest --n 20 --maxlen 40 --seed 1 --inject-fault");
  CHECK(f.code == 1);
  CHECK(f.out.find("minimized:") != std::string::npos);
}

TEST_CASE("cli build on a unary text") {
  TempDir d;
  write_file(d / "a.txt", std::string(1024, 'a'));
  REQUIRE(run("build " + d / "a.txt" + " " + d / "a.rl --rlslp").code == 0);
  std::ifstream in(d / "a.rl");
  auto gf = cooc::read_grammar(in);
  CHECK(cooc::expand(gf.g) == std::string(1024, 'a'));
  CHECK(gf.g.height() <= 2 * 10 + 2);
}
