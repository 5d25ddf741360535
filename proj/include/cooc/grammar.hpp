#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cooc/error.hpp"

namespace cooc {

using Sym = uint32_t;
inline constexpr Sym kNone = UINT32_MAX;
using CoOcc = std::pair<int64_t, int64_t>;  // (q1, q2)

enum class RuleKind : uint8_t { Leaf, Pair, Power };
enum class GrammarKind : uint8_t { SLP, RLSLP };
enum class Side : uint8_t { Prefix, Suffix };

struct Rule {
  RuleKind kind = RuleKind::Leaf;
  uint8_t ch = 0;
  Sym left = kNone;   // Pair left, Power base
  Sym right = kNone;  // Pair right
  int64_t exp = 0;    // Power exponent

  static Rule leaf(uint8_t c) { return Rule{RuleKind::Leaf, c, kNone, kNone, 0}; }
  static Rule pair(Sym b, Sym c) { return Rule{RuleKind::Pair, 0, b, c, 0}; }
  static Rule power(Sym b, int64_t k) { return Rule{RuleKind::Power, 0, b, kNone, k}; }
  bool operator==(const Rule&) const = default;
};

struct Grammar {
  GrammarKind kind = GrammarKind::SLP;
  std::vector<Rule> rules;
  Sym start = kNone;
  // filled by validate_and_index
  std::vector<int64_t> len;
  std::vector<uint32_t> hgt;  // leaf rules have height 1
  std::vector<Sym> order;     // children before parents

  size_t size() const { return rules.size(); }
  int64_t N() const { return len[start]; }
  int64_t exp_len(Sym a) const { return len[a]; }
  const Rule& rule(Sym a) const { return rules[a]; }
  bool is_leaf(Sym a) const { return rules[a].kind == RuleKind::Leaf; }
  uint32_t height() const { return hgt[start]; }
  Sym head(Sym a) const { return is_leaf(a) ? kNone : rules[a].left; }
  int64_t head_len(Sym a) const { return is_leaf(a) ? 1 : len[rules[a].left]; }
  int64_t tail_len(Sym a) const { return len[a] - head_len(a); }
};

inline Grammar validate_and_index(Grammar g) {
  const size_t n = g.rules.size();
  if (n == 0 || g.start >= n) throw Error(Errc::MissingProduction, "start symbol has no production");
  for (size_t a = 0; a < n; ++a) {
    const Rule& r = g.rules[a];
    if (r.kind == RuleKind::Leaf) continue;
    if (r.left >= n || (r.kind == RuleKind::Pair && r.right >= n))
      throw Error(Errc::MissingProduction, "symbol " + std::to_string(a) + " references an undefined symbol");
    if (r.kind == RuleKind::Power) {
      if (r.exp < 2) throw Error(Errc::BadExponent, "exponent " + std::to_string(r.exp) + " at symbol " + std::to_string(a));
      if (g.kind == GrammarKind::SLP) throw Error(Errc::BadExponent, "power rule in an SLP");
    }
  }
  // iterative DFS, 0 = new, 1 = open, 2 = done
  std::vector<uint8_t> color(n, 0);
  g.order.clear();
  g.order.reserve(n);
  std::vector<std::pair<Sym, int>> st;
  for (Sym root = 0; root < n; ++root) {
    if (color[root]) continue;
    st.push_back({root, 0});
    color[root] = 1;
    while (!st.empty()) {
      auto& [a, step] = st.back();
      const Rule& r = g.rules[a];
      Sym next = kNone;
      if (r.kind == RuleKind::Pair) {
        if (step == 0) next = r.left;
        else if (step == 1) next = r.right;
      } else if (r.kind == RuleKind::Power && step == 0) {
        next = r.left;
      }
      if (next == kNone) {
        color[a] = 2;
        g.order.push_back(a);
        st.pop_back();
        continue;
      }
      ++step;
      if (color[next] == 1) throw Error(Errc::CyclicGrammar, "cycle through symbol " + std::to_string(next));
      if (color[next] == 0) {
        color[next] = 1;
        st.push_back({next, 0});
      }
    }
  }
  g.len.assign(n, 0);
  g.hgt.assign(n, 0);
  constexpr __int128 kMax = (__int128(1) << 63) - 1;
  for (Sym a : g.order) {
    const Rule& r = g.rules[a];
    __int128 l = 1;
    uint32_t h = 1;
    if (r.kind == RuleKind::Pair) {
      l = __int128(g.len[r.left]) + g.len[r.right];
      h = 1 + std::max(g.hgt[r.left], g.hgt[r.right]);
    } else if (r.kind == RuleKind::Power) {
      l = __int128(g.len[r.left]) * r.exp;
      h = 1 + g.hgt[r.left];
    }
    if (l > kMax) throw Error(Errc::LengthOverflow, "expansion of symbol " + std::to_string(a) + " exceeds 2^63-1");
    g.len[a] = int64_t(l);
    g.hgt[a] = h;
  }
  return g;
}

// Productions given as (id, rule) pairs; ids must cover 0..max exactly once.
inline Grammar make_grammar(GrammarKind kind, Sym start, const std::vector<std::pair<Sym, Rule>>& prods) {
  Sym maxid = 0;
  for (auto& [id, r] : prods) maxid = std::max(maxid, id);
  Grammar g;
  g.kind = kind;
  g.start = start;
  g.rules.assign(prods.empty() ? 0 : size_t(maxid) + 1, Rule{});
  std::vector<uint8_t> seen(g.rules.size(), 0);
  for (auto& [id, r] : prods) {
    if (seen[id]) throw Error(Errc::DuplicateProduction, "symbol " + std::to_string(id) + " has several productions");
    seen[id] = 1;
    g.rules[id] = r;
  }
  for (size_t a = 0; a < seen.size(); ++a)
    if (!seen[a]) throw Error(Errc::MissingProduction, "symbol " + std::to_string(a) + " has no production");
  return validate_and_index(std::move(g));
}

inline int64_t expand_cap() {
  if (const char* e = std::getenv("COOC_EXPAND_CAP")) {
    char* end = nullptr;
    long long v = std::strtoll(e, &end, 10);
    if (end != e && v > 0) return v;
  }
  return int64_t(1) << 26;
}

// Appends <a>[from, to) to out.
inline void append_range(const Grammar& g, Sym a, int64_t from, int64_t to, std::string& out) {
  struct F { Sym s; int64_t lo, hi; };
  std::vector<F> st{{a, from, to}};
  while (!st.empty()) {
    F f = st.back();
    st.pop_back();
    if (f.lo >= f.hi) continue;
    const Rule& r = g.rules[f.s];
    switch (r.kind) {
      case RuleKind::Leaf:
        out.push_back(char(r.ch));
        break;
      case RuleKind::Pair: {
        int64_t L = g.len[r.left];
        if (f.hi > L) st.push_back({r.right, std::max<int64_t>(f.lo - L, 0), f.hi - L});
        if (f.lo < L) st.push_back({r.left, f.lo, std::min(f.hi, L)});
        break;
      }
      case RuleKind::Power: {
        int64_t L = g.len[r.left];
        int64_t c0 = f.lo / L, c1 = (f.hi - 1) / L;
        for (int64_t c = c1; c >= c0; --c)
          st.push_back({r.left, std::max<int64_t>(f.lo - c * L, 0), std::min(f.hi - c * L, L)});
        break;
      }
    }
  }
}

inline std::string expand(const Grammar& g, Sym a, int64_t cap = expand_cap()) {
  if (g.len[a] > cap)
    throw Error(Errc::ExpansionTooLarge, "expansion of length " + std::to_string(g.len[a]) + " exceeds cap " + std::to_string(cap));
  std::string out;
  out.reserve(size_t(g.len[a]));
  append_range(g, a, 0, g.len[a], out);
  return out;
}

inline std::string expand(const Grammar& g) { return expand(g, g.start); }

inline uint8_t char_at(const Grammar& g, Sym a, int64_t i) {
  if (i < 0 || i >= g.len[a]) throw Error(Errc::OutOfBounds, "position " + std::to_string(i));
  for (;;) {
    const Rule& r = g.rules[a];
    if (r.kind == RuleKind::Leaf) return r.ch;
    int64_t L = g.len[r.left];
    if (r.kind == RuleKind::Power) {
      i %= L;
      a = r.left;
    } else if (i < L) {
      a = r.left;
    } else {
      i -= L;
      a = r.right;
    }
  }
}

inline uint8_t random_access(const Grammar& g, int64_t i) { return char_at(g, g.start, i); }

inline std::string extract_affix(const Grammar& g, Sym a, Side side, int64_t l) {
  if (l < 0 || l > g.len[a]) throw Error(Errc::OutOfBounds, "affix length " + std::to_string(l));
  std::string out;
  out.reserve(size_t(l));
  if (side == Side::Prefix) append_range(g, a, 0, l, out);
  else append_range(g, a, g.len[a] - l, g.len[a], out);
  return out;
}

// ---- text format ----

struct GrammarFile {
  Grammar g;
  std::vector<std::string> meta;  // "#!" lines without the marker
};

namespace detail {

inline std::string quote_char(uint8_t c) {
  if (c == '\\') return "'\\\\'";
  if (c == '\'') return "'\\''";
  if (c >= 0x21 && c < 0x7f) return std::string("'") + char(c) + "'";
  static const char* hex = "0123456789abcdef";
  return std::string("'\\x") + hex[c >> 4] + hex[c & 15] + "'";
}

inline uint8_t unquote_char(const std::string& tok, size_t lineno) {
  auto bad = [&] { return Error(Errc::Parse, "line " + std::to_string(lineno) + ": bad character literal " + tok); };
  if (tok.size() < 3 || tok.front() != '\'' || tok.back() != '\'') throw bad();
  std::string body = tok.substr(1, tok.size() - 2);
  if (body.size() == 1 && body[0] != '\\') return uint8_t(body[0]);
  if (body.size() == 2 && body[0] == '\\') {
    switch (body[1]) {
      case '\\': return '\\';
      case '\'': return '\'';
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case 's': return ' ';
      case '0': return 0;
    }
  }
  if (body.size() == 4 && body[0] == '\\' && body[1] == 'x') {
    auto hv = [&](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      throw bad();
    };
    return uint8_t(hv(body[2]) * 16 + hv(body[3]));
  }
  throw bad();
}

}  // namespace detail

inline GrammarFile read_grammar(std::istream& in) {
  GrammarFile out;
  std::string line;
  size_t lineno = 0;
  bool have_header = false;
  GrammarKind kind = GrammarKind::SLP;
  size_t declared = 0;
  Sym start = kNone;
  std::vector<std::pair<Sym, Rule>> prods;
  auto parse_id = [&](const std::string& t) -> Sym {
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
      throw Error(Errc::Parse, "line " + std::to_string(lineno) + ": bad id '" + t + "'");
    unsigned long long v = std::stoull(t);
    if (v >= kNone) throw Error(Errc::Parse, "line " + std::to_string(lineno) + ": id too large");
    return Sym(v);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("#!", 0) == 0) {
      out.meta.push_back(line.substr(2));
      continue;
    }
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (!have_header) {
      if (tok.size() != 3 || (tok[0] != "SLPX" && tok[0] != "SLP" && tok[0] != "RLSLP"))
        throw Error(Errc::Parse, "line " + std::to_string(lineno) + ": expected header 'SLPX <g> <start>' or 'RLSLP <g> <start>'");
      kind = tok[0] == "RLSLP" ? GrammarKind::RLSLP : GrammarKind::SLP;
      declared = parse_id(tok[1]);
      start = parse_id(tok[2]);
      have_header = true;
      continue;
    }
    if (tok.size() < 3 || tok[1] != "=")
      throw Error(Errc::Parse, "line " + std::to_string(lineno) + ": expected 'id = ...'");
    Sym id = parse_id(tok[0]);
    if (tok.size() == 3) {
      prods.push_back({id, Rule::leaf(detail::unquote_char(tok[2], lineno))});
    } else if (tok.size() == 4) {
      prods.push_back({id, Rule::pair(parse_id(tok[2]), parse_id(tok[3]))});
    } else if (tok.size() == 5 && tok[3] == "^") {
      if (tok[4].find_first_not_of("-0123456789") != std::string::npos)
        throw Error(Errc::Parse, "line " + std::to_string(lineno) + ": bad exponent");
      prods.push_back({id, Rule::power(parse_id(tok[2]), std::stoll(tok[4]))});
    } else {
      throw Error(Errc::Parse, "line " + std::to_string(lineno) + ": unrecognised production");
    }
  }
  if (!have_header) throw Error(Errc::Parse, "missing header");
  if (prods.size() != declared)
    throw Error(Errc::Parse, "header declares " + std::to_string(declared) + " productions, found " + std::to_string(prods.size()));
  out.g = make_grammar(kind, start, prods);
  return out;
}

inline void write_grammar(std::ostream& os, const Grammar& g, const std::vector<std::string>& meta = {}) {
  os << (g.kind == GrammarKind::RLSLP ? "RLSLP " : "SLPX ") << g.size() << ' ' << g.start << '\n';
  for (auto& m : meta) os << "#!" << m << '\n';
  for (Sym a = 0; a < g.size(); ++a) {
    const Rule& r = g.rules[a];
    os << a << " = ";
    if (r.kind == RuleKind::Leaf) os << detail::quote_char(r.ch);
    else if (r.kind == RuleKind::Pair) os << r.left << ' ' << r.right;
    else os << r.left << " ^ " << r.exp;
    os << '\n';
  }
}

}  // namespace cooc

namespace cooc {

// <sym>^reps, or its reverse.
struct ImplicitString {
  Sym sym = kNone;
  int64_t reps = 1;
  bool reversed = false;
  bool operator==(const ImplicitString&) const = default;
};

inline int64_t length_of(const Grammar& g, const ImplicitString& s) { return g.len[s.sym] * s.reps; }

inline uint8_t char_at(const Grammar& g, const ImplicitString& s, int64_t i) {
  int64_t L = g.len[s.sym];
  int64_t j = i % L;
  return char_at(g, s.sym, s.reversed ? L - 1 - j : j);
}

// Substring [from, to) of the implicit string.
inline std::string materialize(const Grammar& g, const ImplicitString& s, int64_t from, int64_t to) {
  std::string out;
  if (from >= to) return out;
  int64_t L = g.len[s.sym], n = L * s.reps;
  if (!s.reversed) {
    for (int64_t c = from / L; c * L < to; ++c)
      append_range(g, s.sym, std::max<int64_t>(from - c * L, 0), std::min(to - c * L, L), out);
    return out;
  }
  int64_t a = n - to, b = n - from;
  for (int64_t c = a / L; c * L < b; ++c)
    append_range(g, s.sym, std::max<int64_t>(a - c * L, 0), std::min(b - c * L, L), out);
  std::reverse(out.begin(), out.end());
  return out;
}

inline std::string materialize(const Grammar& g, const ImplicitString& s) {
  return materialize(g, s, 0, length_of(g, s));
}

}  // namespace cooc
