#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cooc/grammar.hpp"

namespace cooc {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct PairHash {
  size_t operator()(const std::pair<uint64_t, uint64_t>& p) const {
    return size_t(splitmix64(p.first * 0x100000001B3ULL ^ splitmix64(p.second)));
  }
};

// ---- Re-Pair style SLP construction ----

inline Grammar build_slp(std::string_view text) {
  if (text.empty()) throw Error(Errc::EmptyText, "cannot build a grammar for the empty text");
  std::vector<Rule> rules;
  std::array<Sym, 256> leaf;
  leaf.fill(kNone);
  {
    std::array<bool, 256> present{};
    for (unsigned char c : text) present[c] = true;
    for (int c = 0; c < 256; ++c)
      if (present[size_t(c)]) {
        leaf[size_t(c)] = Sym(rules.size());
        rules.push_back(Rule::leaf(uint8_t(c)));
      }
  }
  std::vector<Sym> seq(text.size());
  for (size_t i = 0; i < text.size(); ++i) seq[i] = leaf[(unsigned char)text[i]];

  std::unordered_map<uint64_t, uint32_t> freq;
  for (;;) {
    if (seq.size() < 4) break;
    freq.clear();
    freq.reserve(seq.size());
    // non-overlapping counts: inside a run x x x only every second pair counts
    bool prev_counted_same = false;
    for (size_t i = 0; i + 1 < seq.size(); ++i) {
      bool same = seq[i] == seq[i + 1];
      if (same && prev_counted_same && seq[i - 1] == seq[i]) {
        prev_counted_same = false;
        continue;
      }
      ++freq[(uint64_t(seq[i]) << 32) | seq[i + 1]];
      prev_counted_same = same;
    }
    uint64_t best = 0;
    uint32_t best_f = 0;
    for (auto& [code, f] : freq)
      if (f > best_f || (f == best_f && code < best)) best = code, best_f = f;
    if (best_f < 2) break;
    Sym a = Sym(best >> 32), b = Sym(best & 0xffffffffu);
    Sym x = Sym(rules.size());
    rules.push_back(Rule::pair(a, b));
    size_t w = 0;
    for (size_t i = 0; i < seq.size();) {
      if (i + 1 < seq.size() && seq[i] == a && seq[i + 1] == b) {
        seq[w++] = x;
        i += 2;
      } else {
        seq[w++] = seq[i++];
      }
    }
    seq.resize(w);
  }
  Sym acc = seq[0];
  for (size_t i = 1; i < seq.size(); ++i) {
    rules.push_back(Rule::pair(acc, seq[i]));
    acc = Sym(rules.size() - 1);
  }
  Grammar g;
  g.kind = GrammarKind::SLP;
  g.rules = std::move(rules);
  g.start = acc;
  return validate_and_index(std::move(g));
}

// ---- recompression ----

enum class LevelKind : uint8_t { Run, Pair };

struct Level {
  LevelKind kind = LevelKind::Run;
  uint64_t seed = 0;
  bool operator==(const Level&) const = default;
};

struct LevelScheme {
  uint64_t base_seed = 0;
  std::vector<Level> levels;
  bool operator==(const LevelScheme&) const = default;

  std::vector<std::string> to_meta() const {
    std::vector<std::string> out;
    out.push_back("scheme " + std::to_string(base_seed) + " " + std::to_string(levels.size()));
    for (auto& l : levels) out.push_back(l.kind == LevelKind::Run ? "level run" : "level pair " + std::to_string(l.seed));
    return out;
  }

  // Returns false when the meta lines carry no scheme.
  static bool from_meta(const std::vector<std::string>& meta, LevelScheme& out) {
    bool found = false;
    size_t expected = 0;
    out = LevelScheme{};
    for (auto& line : meta) {
      std::istringstream in(line);
      std::string w;
      in >> w;
      if (w == "scheme") {
        found = true;
        if (!(in >> out.base_seed >> expected)) throw Error(Errc::Parse, "bad scheme header: " + line);
      } else if (w == "level") {
        std::string kind;
        in >> kind;
        if (kind == "run") {
          out.levels.push_back({LevelKind::Run, 0});
        } else if (kind == "pair") {
          uint64_t seed;
          if (!(in >> seed)) throw Error(Errc::Parse, "bad level line: " + line);
          out.levels.push_back({LevelKind::Pair, seed});
        } else {
          throw Error(Errc::Parse, "bad level line: " + line);
        }
      }
    }
    if (found && out.levels.size() != expected) throw Error(Errc::Parse, "scheme level count mismatch");
    return found;
  }
};

inline bool pair_color(uint64_t seed, Sym x) { return splitmix64(seed ^ (uint64_t(x) * 0xD6E8FEB86659FD93ULL)) & 1; }

inline constexpr int kSeedBudget = 32;
inline constexpr size_t kLevelCap = 4096;

// Hash-consing tables of an RLSLP, shared by construction and split replay.
struct SymbolTables {
  std::array<Sym, 256> leaf;
  std::unordered_map<std::pair<uint64_t, uint64_t>, Sym, PairHash> pair, power;

  SymbolTables() { leaf.fill(kNone); }
  explicit SymbolTables(const Grammar& g) : SymbolTables() {
    for (Sym a = 0; a < g.size(); ++a) {
      const Rule& r = g.rules[a];
      if (r.kind == RuleKind::Leaf) leaf[r.ch] = a;
      else if (r.kind == RuleKind::Pair) pair.emplace(std::pair<uint64_t, uint64_t>{r.left, r.right}, a);
      else power.emplace(std::pair<uint64_t, uint64_t>{r.left, uint64_t(r.exp)}, a);
    }
  }
};

struct Recompressed {
  Grammar g;
  LevelScheme scheme;
};

inline Recompressed recompress(std::string_view text, uint64_t base_seed = 1) {
  if (text.empty()) throw Error(Errc::EmptyText, "cannot build a grammar for the empty text");
  Recompressed out;
  out.scheme.base_seed = base_seed;
  std::vector<Rule> rules;
  SymbolTables tab;
  {
    std::array<bool, 256> present{};
    for (unsigned char c : text) present[c] = true;
    for (int c = 0; c < 256; ++c)
      if (present[size_t(c)]) {
        tab.leaf[size_t(c)] = Sym(rules.size());
        rules.push_back(Rule::leaf(uint8_t(c)));
      }
  }
  std::vector<Sym> seq(text.size()), next;
  for (size_t i = 0; i < text.size(); ++i) seq[i] = tab.leaf[(unsigned char)text[i]];
  auto intern = [&](auto& map, uint64_t x, uint64_t y, Rule r) {
    auto [it, fresh] = map.emplace(std::pair<uint64_t, uint64_t>{x, y}, Sym(rules.size()));
    if (fresh) rules.push_back(r);
    return it->second;
  };
  uint64_t counter = 0;
  while (seq.size() > 1) {
    if (out.scheme.levels.size() + 2 > kLevelCap) throw Error(Errc::SeedExhausted, "level cap reached");
    // maximal runs become power symbols
    next.clear();
    for (size_t i = 0; i < seq.size();) {
      size_t j = i;
      while (j < seq.size() && seq[j] == seq[i]) ++j;
      int64_t k = int64_t(j - i);
      next.push_back(k >= 2 ? intern(tab.power, seq[i], uint64_t(k), Rule::power(seq[i], k)) : seq[i]);
      i = j;
    }
    seq.swap(next);
    out.scheme.levels.push_back({LevelKind::Run, 0});
    if (seq.size() == 1) break;
    // pair compression: merge xy where color(x)=0, color(y)=1
    const size_t n = seq.size();
    uint64_t seed = 0;
    bool ok = false;
    for (int attempt = 0; attempt < kSeedBudget && !ok; ++attempt) {
      seed = splitmix64(base_seed ^ splitmix64(++counter));
      size_t merges = 0;
      for (size_t i = 0; i + 1 < n; ++i)
        if (!pair_color(seed, seq[i]) && pair_color(seed, seq[i + 1])) ++merges;
      ok = 8 * (n - merges) <= 7 * n + 8;
    }
    if (!ok) throw Error(Errc::SeedExhausted, "no seed met the size check in " + std::to_string(kSeedBudget) + " tries");
    next.clear();
    for (size_t i = 0; i < n;) {
      if (i + 1 < n && !pair_color(seed, seq[i]) && pair_color(seed, seq[i + 1])) {
        next.push_back(intern(tab.pair, seq[i], seq[i + 1], Rule::pair(seq[i], seq[i + 1])));
        i += 2;
      } else {
        next.push_back(seq[i++]);
      }
    }
    seq.swap(next);
    out.scheme.levels.push_back({LevelKind::Pair, seed});
  }
  out.g.kind = GrammarKind::RLSLP;
  out.g.rules = std::move(rules);
  out.g.start = seq[0];
  out.g = validate_and_index(std::move(out.g));
  return out;
}

inline constexpr int64_t kRecompressCap = int64_t(1) << 32;

inline Recompressed to_rlslp(const Grammar& slp, uint64_t base_seed = 1) {
  return recompress(expand(slp, slp.start, kRecompressCap), base_seed);
}

// ---- split sets ----

enum class SplitMode : uint8_t { Fast, Broad };

struct SplitResult {
  bool absent = false;     // replay certified that the pattern does not occur
  int certificate_level = -1;
  SplitMode mode = SplitMode::Fast;
  int64_t m = 0;
  std::vector<int64_t> splits;  // sorted, within [1, m-1]
};

inline SplitResult broad_splits(int64_t m) {
  SplitResult r;
  r.mode = SplitMode::Broad;
  r.m = m;
  for (int64_t s = 1; s < m; ++s) r.splits.push_back(s);
  return r;
}

// Replays the level scheme on P. Blocks of P's standalone parse that lie strictly between
// the leftmost and rightmost uncertain blocks are parsed identically in every occurrence;
// the boundaries collected at each level cover the first and last internal boundaries
// of any occurrence at every level.
inline SplitResult compute_splits(const SymbolTables& tab, const LevelScheme& scheme, std::string_view p,
                                  SplitMode mode) {
  if (p.empty()) throw Error(Errc::EmptyPattern, "empty pattern");
  const int64_t m = int64_t(p.size());
  if (mode == SplitMode::Broad) return broad_splits(m);
  SplitResult res;
  res.m = m;
  constexpr Sym kForeign = Sym(1) << 31;
  Sym next_foreign = kForeign + 256;
  std::unordered_map<std::pair<uint64_t, uint64_t>, Sym, PairHash> fpair, fpow;
  auto lookup = [&](const auto& tabmap, auto& fmap, uint64_t x, uint64_t y) -> Sym {
    auto it = tabmap.find({x, y});
    if (it != tabmap.end()) return it->second;
    auto [jt, fresh] = fmap.emplace(std::pair<uint64_t, uint64_t>{x, y}, next_foreign);
    if (fresh) ++next_foreign;
    return jt->second;
  };
  std::set<int64_t> cand;
  auto add = [&](int64_t x) {
    if (x >= 1 && x <= m - 1) cand.insert(x);
  };
  std::vector<Sym> syms(static_cast<size_t>(m)), nsyms;
  std::vector<int64_t> starts(size_t(m) + 1), nstarts;
  for (int64_t i = 0; i < m; ++i) {
    Sym s = tab.leaf[(unsigned char)p[size_t(i)]];
    if (s == kNone) {
      res.absent = true;
      res.certificate_level = 0;
      return res;
    }
    syms[size_t(i)] = s;
    starts[size_t(i)] = i;
  }
  starts[size_t(m)] = m;
  size_t lo = 0, hi = size_t(m);
  auto note_region = [&] {
    add(starts[lo]);
    add(starts[hi]);
    if (hi - lo >= 2) {
      add(starts[lo + 1]);
      add(starts[hi - 1]);
    }
  };
  note_region();
  bool vanished = false;
  for (size_t lv = 0; lv < scheme.levels.size(); ++lv) {
    const Level& L = scheme.levels[lv];
    int64_t nc, nd;
    if (L.kind == LevelKind::Run) {
      size_t e1 = lo;
      while (e1 < hi && syms[e1] == syms[lo]) ++e1;
      if (e1 >= hi) {
        vanished = true;
        break;
      }
      size_t s2 = hi - 1;
      while (s2 > lo && syms[s2 - 1] == syms[hi - 1]) --s2;
      nc = starts[e1];
      nd = starts[s2];
    } else {
      nc = pair_color(L.seed, syms[lo]) ? starts[lo + 1] : starts[lo];
      nd = pair_color(L.seed, syms[hi - 1]) ? starts[hi] : starts[hi - 1];
    }
    // apply the level to all of P
    nsyms.clear();
    nstarts.clear();
    const size_t n = syms.size();
    if (L.kind == LevelKind::Run) {
      for (size_t i = 0; i < n;) {
        size_t j = i;
        while (j < n && syms[j] == syms[i]) ++j;
        nstarts.push_back(starts[i]);
        nsyms.push_back(j - i >= 2 ? lookup(tab.power, fpow, syms[i], j - i) : syms[i]);
        i = j;
      }
    } else {
      for (size_t i = 0; i < n;) {
        nstarts.push_back(starts[i]);
        if (i + 1 < n && !pair_color(L.seed, syms[i]) && pair_color(L.seed, syms[i + 1])) {
          nsyms.push_back(lookup(tab.pair, fpair, syms[i], syms[i + 1]));
          i += 2;
        } else {
          nsyms.push_back(syms[i++]);
        }
      }
    }
    nstarts.push_back(m);
    syms.swap(nsyms);
    starts.swap(nstarts);
    if (nc >= nd) {
      if (nc == nd) add(nc);
      vanished = true;
      break;
    }
    lo = size_t(std::lower_bound(starts.begin(), starts.end(), nc) - starts.begin());
    hi = size_t(std::lower_bound(starts.begin(), starts.end(), nd) - starts.begin());
    COOC_CHECK(starts[lo] == nc && starts[hi] == nd && lo < hi);
    for (size_t i = lo; i < hi; ++i)
      if (syms[i] >= kForeign) {
        res.absent = true;
        res.certificate_level = int(lv) + 1;
        return res;
      }
    note_region();
  }
  if (!vanished && hi - lo >= 2) {
    // a certain internal boundary survives the top level
    res.absent = true;
    res.certificate_level = int(scheme.levels.size());
    return res;
  }
  res.splits.assign(cand.begin(), cand.end());
  return res;
}

inline SplitResult compute_splits(const Grammar& g, const LevelScheme& scheme, std::string_view p, SplitMode mode) {
  return compute_splits(SymbolTables(g), scheme, p, mode);
}

}  // namespace cooc
