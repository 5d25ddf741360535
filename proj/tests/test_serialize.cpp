#include "common.hpp"
#include "doctest.h"

using namespace cooc;
using namespace testutil;

namespace {

std::string bytes_of(const CoIndex& ci, bool quads = true) {
  std::ostringstream os;
  write_index(os, ci, quads);
  return os.str();
}

LoadedIndex from_bytes(const std::string& s) {
  std::istringstream is(s);
  return read_index(is);
}

Errc load_error(const std::string& s) {
  try {
    from_bytes(s);
  } catch (const Error& e) {
    return e.code;
  }
  return Errc::IO;
}

}  // namespace

TEST_CASE("index round trip") {
  std::mt19937_64 rng(14);
  for (int it = 0; it < 20; ++it) {
    std::string t = random_text(rng, 1 + int(rng() % 300), 1 + int(rng() % 4));
    Built b = index_text(t, rng());
    std::string p1 = random_text(rng, 1 + int(rng() % 4), 3), p2 = random_text(rng, 1 + int(rng() % 4), 3);
    auto want = b.co->query_close(p1, p2, 4);
    std::string s = bytes_of(*b.co);
    LoadedIndex li = from_bytes(s);
    CHECK(li.co->memo_size() == b.co->memo_size());
    CHECK(bytes_of(*li.co) == s);
    CHECK(li.co->query_close(p1, p2, 4) == want);
    CHECK(li.co->query_close(p2, p1, int64_t(t.size())) == oracle::naive_b_close(t, p2, p1, int64_t(t.size())));
    LoadedIndex bare = from_bytes(bytes_of(*b.co, false));
    CHECK(bare.co->memo_size() == 0);
    CHECK(bare.co->query_close(p1, p2, 4) == want);
  }
}

TEST_CASE("plain SLP round trip keeps broad mode") {
  Built b = index_grammar(hand_grammar());
  LoadedIndex li = from_bytes(bytes_of(*b.co));
  CHECK(li.ctx->effective_mode() == SplitMode::Broad);
  CHECK(li.co->query_close("ab", "ac", 2) == std::vector<CoOcc>{{3, 5}});
}

TEST_CASE("damaged index files are rejected") {
  Built b = index_text(kText);
  std::string s = bytes_of(*b.co);
  std::string flipped = s;
  flipped[s.size() / 2] ^= 0x20;
  CHECK(load_error(flipped) == Errc::BadIndexFile);
  CHECK(load_error(s.substr(0, s.size() - 3)) == Errc::BadIndexFile);
  CHECK(load_error("NOTANIDX") == Errc::BadIndexFile);
  CHECK(load_error("") == Errc::BadIndexFile);
  std::string ver = s;
  ver[8] = 9;
  CHECK(load_error(ver) == Errc::BadIndexFile);
  CHECK_THROWS_AS(load_index("/nonexistent/dir/x.idx"), Error);
}
