#include "common.hpp"
#include "doctest.h"

using namespace cooc;
using namespace testutil;

TEST_CASE("small field arithmetic") {
  Field f({101, 10});
  Fingerprint a = f.symbol(1), b = f.symbol(2);
  CHECK(a.phi == 1);
  CHECK(b.phi == 2);
  Fingerprint ab = f.combine(a, b);
  CHECK(ab.phi == 21);
  CHECK(f.combine(ab, f.empty()) == ab);
  CHECK(f.combine(f.empty(), ab) == ab);
  CHECK(f.subtract_prefix(ab, a).phi == 2);
  CHECK(f.subtract_suffix(ab, b) == a);
  Fingerprint c = f.symbol(3);
  CHECK(f.combine(f.combine(a, b), c) == f.combine(a, f.combine(b, c)));
  CHECK(f.repeat(ab, 3) == f.combine(ab, f.combine(ab, ab)));
}

TEST_CASE("affix fingerprints match direct evaluation") {
  FingerprintParams prm{kMersenne61, 1234567891011ULL};
  Grammar g = abab_grammar();
  GrammarFingerprints gf(g, prm);
  const Field& f = gf.field();
  CHECK(fp_affix(gf, 3, Side::Prefix, false, 4) == f.combine(f.of_string("ab"), f.of_string("ab")));
  CHECK(fp_affix(gf, 3, Side::Prefix, false, 0) == f.empty());
  Grammar p = power_grammar(5);
  GrammarFingerprints pf(p, prm);
  CHECK(fp_affix(pf, 3, Side::Prefix, false, 7).phi == fp_direct_phi(pf.field(), "abababa"));
  CHECK_THROWS_AS(fp_affix(pf, 3, Side::Prefix, false, 11), Error);

  std::mt19937_64 rng(5);
  for (int it = 0; it < 30; ++it) {
    auto rc = recompress(random_text(rng, 1 + int(rng() % 150), 1 + int(rng() % 4)), rng());
    GrammarFingerprints h(rc.g, prm);
    for (Sym a = 0; a < rc.g.size(); ++a) {
      std::string e = expand(rc.g, a);
      for (int64_t l = 0; l <= rc.g.len[a]; ++l)
        for (Side side : {Side::Prefix, Side::Suffix})
          for (bool rev : {false, true}) {
            std::string x = extract_affix(rc.g, a, side, l);
            if (rev) std::reverse(x.begin(), x.end());
            Fingerprint fp = fp_affix(h, a, side, rev, l);
            REQUIRE(fp.phi == fp_direct_phi(h.field(), x));
            REQUIRE(fp.len == l);
          }
    }
  }
}

TEST_CASE("parameter search") {
  Grammar g = make_grammar(GrammarKind::SLP, 4,
                           {{0, Rule::leaf('a')}, {1, Rule::leaf('b')}, {2, Rule::pair(0, 1)}, {3, Rule::pair(1, 0)},
                            {4, Rule::pair(2, 3)}});
  std::vector<ImplicitString> ab_ba{{2, 1, false}, {3, 1, false}};
  // over F_3, "ab" and "ba" collide exactly when r = 1
  std::vector<uint64_t> draws{1, 2};
  size_t i = 0;
  ParamChoice c = choose_params_with(g, ab_ba, [&] { return draws[i++]; }, 3);
  CHECK(c.attempts == 2);
  CHECK(c.params.r == 2);
  CHECK(c.verified);
  CHECK_THROWS_AS(choose_params_with(g, ab_ba, [] { return uint64_t(1); }, 3, 4), Error);

  std::vector<ImplicitString> same{{2, 1, false}, {2, 1, false}};
  CHECK(choose_params_with(g, same, [] { return uint64_t(1); }, 3).verified);

  std::vector<ImplicitString> ab{{0, 1, false}, {1, 1, false}};
  ParamChoice d = choose_params(g, ab, 9);
  Field f(d.params);
  CHECK(f.of_char('a').phi != f.of_char('b').phi);
  CHECK(d.verified);

  // above the verification cap nothing is checked
  ParamChoice e = choose_params(g, ab_ba, 9, kMersenne61, 16, 1);
  CHECK_FALSE(e.verified);
}

TEST_CASE("chosen parameters are collision free on the indexed set") {
  std::mt19937_64 rng(8);
  for (int it = 0; it < 20; ++it) {
    auto rc = recompress(random_text(rng, 1 + int(rng() % 400), 1 + int(rng() % 3)), rng());
    auto ents = indexed_strings(rc.g);
    ParamChoice c = choose_params(rc.g, ents, rng());
    REQUIRE(c.verified);
    std::vector<std::string> strs;
    for (auto& e : ents) strs.push_back(materialize(rc.g, e));
    CHECK(prefixes_collision_free(Field(c.params), strs));
  }
}
