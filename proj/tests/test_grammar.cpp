#include "common.hpp"
#include "doctest.h"

using namespace cooc;
using namespace testutil;

TEST_CASE("grammar lengths and expansion") {
  Grammar g = abab_grammar();
  CHECK(g.exp_len(3) == 4);
  CHECK(expand(g, 3) == "abab");
  Grammar p = make_grammar(GrammarKind::RLSLP, 1, {{0, Rule::leaf('a')}, {1, Rule::power(0, 3)}});
  CHECK(p.exp_len(1) == 3);
  CHECK(expand(p, 1) == "aaa");
  CHECK(extract_affix(p, 1, Side::Suffix, 2) == "aa");
  CHECK(expand(hand_grammar()) == kText);
}

TEST_CASE("grammar validation errors") {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code;
    }
    FAIL("no error");
    return Errc::IO;
  };
  CHECK(code([] { make_grammar(GrammarKind::SLP, 0, {{0, Rule::pair(1, 1)}, {1, Rule::pair(0, 0)}}); }) ==
        Errc::CyclicGrammar);
  CHECK(code([] { make_grammar(GrammarKind::SLP, 0, {{0, Rule::pair(0, 0)}}); }) == Errc::CyclicGrammar);
  CHECK(code([] { make_grammar(GrammarKind::SLP, 0, {{0, Rule::pair(1, 2)}, {1, Rule::leaf('a')}}); }) ==
        Errc::MissingProduction);
  CHECK(code([] { make_grammar(GrammarKind::SLP, 0, {{0, Rule::leaf('a')}, {0, Rule::leaf('b')}}); }) ==
        Errc::DuplicateProduction);
  CHECK(code([] { make_grammar(GrammarKind::RLSLP, 1, {{0, Rule::leaf('a')}, {1, Rule::power(0, 1)}}); }) ==
        Errc::BadExponent);
  CHECK(code([] { make_grammar(GrammarKind::SLP, 1, {{0, Rule::leaf('a')}, {1, Rule::power(0, 2)}}); }) ==
        Errc::BadExponent);
  // 2^62 * 4 overflows
  CHECK(code([] {
          make_grammar(GrammarKind::RLSLP, 2, {{0, Rule::leaf('a')}, {1, Rule::power(0, int64_t(1) << 62)}, {2, Rule::power(1, 4)}});
        }) == Errc::LengthOverflow);
  CHECK(code([] { random_access(abab_grammar(), 4); }) == Errc::OutOfBounds);
}

TEST_CASE("random access and affixes agree with expansion") {
  Grammar g = hand_grammar();
  CHECK(random_access(g, 6) == 'c');
  CHECK(random_access(g, 0) == 'a');
  CHECK(extract_affix(abab_grammar(), 3, Side::Prefix, 3) == "aba");
  CHECK(extract_affix(g, g.start, Side::Suffix, 0) == "");
  std::mt19937_64 rng(3);
  for (int it = 0; it < 40; ++it) {
    auto rc = recompress(random_text(rng, 1 + int(rng() % 200), 1 + int(rng() % 4)), rng());
    const Grammar& h = rc.g;
    std::string t = expand(h);
    for (int64_t i = 0; i < h.N(); ++i) REQUIRE(random_access(h, i) == uint8_t(t[size_t(i)]));
    for (Sym a = 0; a < h.size(); ++a) {
      std::string e = expand(h, a);
      const Rule& r = h.rule(a);
      if (r.kind == RuleKind::Pair) CHECK(e == expand(h, r.left) + expand(h, r.right));
      if (r.kind == RuleKind::Power) {
        std::string tail;
        for (int64_t k = 1; k < r.exp; ++k) tail += expand(h, r.left);
        CHECK(e == expand(h, r.left) + tail);
      }
      for (int64_t l = 0; l <= h.len[a]; l += 1 + l / 3) {
        CHECK(extract_affix(h, a, Side::Prefix, l) == e.substr(0, size_t(l)));
        CHECK(extract_affix(h, a, Side::Suffix, l) == e.substr(e.size() - size_t(l)));
      }
    }
  }
}

TEST_CASE("grammar file round trip") {
  Grammar g = hand_grammar();
  std::stringstream ss;
  write_grammar(ss, g, {"meta line"});
  GrammarFile f = read_grammar(ss);
  CHECK(expand(f.g) == kText);
  CHECK(f.meta == std::vector<std::string>{"meta line"});
  std::istringstream bad("SLPX 1 0\n0 = 0 0 0 0\n");
  CHECK_THROWS_AS(read_grammar(bad), Error);
  std::istringstream ok("# comment\nRLSLP 2 1\n0 = 'a'\n1 = 0 ^ 5\n");
  CHECK(expand(read_grammar(ok).g) == "aaaaa");
}

TEST_CASE("expansion cap") {
  Grammar g = make_grammar(GrammarKind::RLSLP, 1, {{0, Rule::leaf('a')}, {1, Rule::power(0, int64_t(1) << 40)}});
  CHECK_THROWS_AS(expand(g), Error);
  CHECK(random_access(g, (int64_t(1) << 40) - 1) == 'a');
}
