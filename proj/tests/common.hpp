#pragma once

#include <bit>
#include <random>
#include <string>

#include "cooc/cooc.hpp"

namespace testutil {

using namespace cooc;

inline constexpr char kText[] = "aababacacabc";

// Hand-built SLP for kText. Symbol 6 = "aabab", symbol 9 = "acacabc" (head "acac", tail "abc").
inline Grammar hand_grammar() {
  return make_grammar(GrammarKind::SLP, 10,
                      {{0, Rule::leaf('a')},
                       {1, Rule::leaf('b')},
                       {2, Rule::leaf('c')},
                       {3, Rule::pair(0, 1)},
                       {4, Rule::pair(0, 2)},
                       {5, Rule::pair(0, 3)},
                       {6, Rule::pair(5, 3)},
                       {7, Rule::pair(4, 4)},
                       {8, Rule::pair(3, 2)},
                       {9, Rule::pair(7, 8)},
                       {10, Rule::pair(6, 9)}});
}
inline constexpr Sym kHandA = 6, kHandC = 9;

// {0->a, 1->b, 2->0 1, 3->2 2}
inline Grammar abab_grammar() {
  return make_grammar(GrammarKind::SLP, 3, {{0, Rule::leaf('a')}, {1, Rule::leaf('b')}, {2, Rule::pair(0, 1)}, {3, Rule::pair(2, 2)}});
}

// {0->a, 1->b, 2->0 1, 3->2^k}
inline Grammar power_grammar(int64_t k) {
  return make_grammar(GrammarKind::RLSLP, 3, {{0, Rule::leaf('a')}, {1, Rule::leaf('b')}, {2, Rule::pair(0, 1)}, {3, Rule::power(2, k)}});
}

inline std::string random_text(std::mt19937_64& rng, int len, int sigma) {
  std::string t;
  for (int i = 0; i < len; ++i) t += char('a' + rng() % uint64_t(sigma));
  return t;
}

inline std::string fibonacci_word(int64_t n) {
  std::string a = "a", b = "ab";
  while (int64_t(b.size()) < n) {
    std::string c = b + a;
    a = std::move(b);
    b = std::move(c);
  }
  return b.substr(0, size_t(n));
}

inline std::string thue_morse(int64_t n) {
  std::string t;
  for (int64_t i = 0; i < n; ++i) t += (std::popcount(uint64_t(i)) & 1) ? 'b' : 'a';
  return t;
}

struct Built {
  std::shared_ptr<GrammarContext> ctx;
  std::unique_ptr<CoIndex> co;
};

inline Built index_text(const std::string& text, uint64_t seed = 1) {
  auto rc = recompress(text, seed);
  Built b;
  b.ctx = make_context(std::move(rc.g), &rc.scheme, seed);
  b.co = std::make_unique<CoIndex>(b.ctx);
  return b;
}

inline Built index_grammar(Grammar g, uint64_t seed = 1) {
  Built b;
  b.ctx = make_context(std::move(g), nullptr, seed);
  b.co = std::make_unique<CoIndex>(b.ctx);
  return b;
}

}  // namespace testutil
