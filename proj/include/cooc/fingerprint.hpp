#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cooc/grammar.hpp"

namespace cooc {

inline constexpr uint64_t kMersenne61 = (uint64_t(1) << 61) - 1;

struct FingerprintParams {
  uint64_t p = kMersenne61;
  uint64_t r = 0;
  bool operator==(const FingerprintParams&) const = default;
};

struct Fingerprint {
  uint64_t pow = 0;   // r^(len-1)
  uint64_t ipow = 0;  // r^-(len-1)
  uint64_t phi = 0;
  int64_t len = 0;
  bool operator==(const Fingerprint&) const = default;
};

class Field {
 public:
  Field() = default;
  explicit Field(FingerprintParams fp) : prm_(fp) {
    if (fp.p < 2 || fp.r % fp.p == 0) throw Error(Errc::ParamSearchExhausted, "r must be a unit mod p");
    rinv_ = power(fp.r % fp.p, fp.p - 2);
  }

  const FingerprintParams& params() const { return prm_; }
  uint64_t p() const { return prm_.p; }
  uint64_t r() const { return prm_.r; }
  uint64_t rinv() const { return rinv_; }

  uint64_t mul(uint64_t a, uint64_t b) const {
    unsigned __int128 z = (unsigned __int128)a * b;
    if (prm_.p == kMersenne61) {
      uint64_t lo = uint64_t(z) & kMersenne61, hi = uint64_t(z >> 61);
      uint64_t s = lo + hi;
      return s >= kMersenne61 ? s - kMersenne61 : s;
    }
    return uint64_t(z % prm_.p);
  }
  uint64_t add(uint64_t a, uint64_t b) const {
    uint64_t s = a + b;
    return s >= prm_.p ? s - prm_.p : s;
  }
  uint64_t sub(uint64_t a, uint64_t b) const { return a >= b ? a - b : a + prm_.p - b; }
  uint64_t power(uint64_t b, uint64_t e) const {
    uint64_t res = 1 % prm_.p;
    b %= prm_.p;
    while (e) {
      if (e & 1) res = mul(res, b);
      b = mul(b, b);
      e >>= 1;
    }
    return res;
  }

  Fingerprint empty() const { return Fingerprint{rinv_, prm_.r % prm_.p, 0, 0}; }
  // fingerprint of a single symbol with numeric value v
  Fingerprint symbol(uint64_t v) const { return Fingerprint{1 % prm_.p, 1 % prm_.p, v % prm_.p, 1}; }
  Fingerprint of_char(uint8_t c) const { return symbol(uint64_t(c) + 1); }

  Fingerprint combine(const Fingerprint& x, const Fingerprint& y) const {
    uint64_t rx = mul(x.pow, prm_.r);  // r^|X|
    return Fingerprint{mul(mul(x.pow, y.pow), prm_.r), mul(mul(x.ipow, y.ipow), rinv_),
                       add(x.phi, mul(rx, y.phi)), x.len + y.len};
  }

  // z = x y, x given: returns y.
  Fingerprint subtract_prefix(const Fingerprint& z, const Fingerprint& x) const {
    if (x.len > z.len) throw Error(Errc::LengthMismatch, "prefix longer than string");
    uint64_t rinv_x = mul(x.ipow, rinv_);  // r^-|X|
    return Fingerprint{mul(z.pow, rinv_x), mul(mul(z.ipow, x.pow), prm_.r), mul(sub(z.phi, x.phi), rinv_x),
                       z.len - x.len};
  }

  // z = x y, y given: returns x.
  Fingerprint subtract_suffix(const Fingerprint& z, const Fingerprint& y) const {
    if (y.len > z.len) throw Error(Errc::LengthMismatch, "suffix longer than string");
    uint64_t rx = mul(z.pow, y.ipow);  // r^|X|
    return Fingerprint{mul(rx, rinv_), mul(mul(z.ipow, y.pow), prm_.r), sub(z.phi, mul(rx, y.phi)), z.len - y.len};
  }

  Fingerprint subtract(const Fingerprint& z, const Fingerprint& part, Side which) const {
    return which == Side::Prefix ? subtract_prefix(z, part) : subtract_suffix(z, part);
  }

  Fingerprint repeat(Fingerprint f, int64_t k) const {
    Fingerprint acc = empty();
    while (k > 0) {
      if (k & 1) acc = combine(acc, f);
      k >>= 1;
      if (k) f = combine(f, f);
    }
    return acc;
  }

  Fingerprint of_string(std::string_view s) const {
    Fingerprint f = empty();
    uint64_t rk = 1 % prm_.p;
    for (unsigned char c : s) {
      f.phi = add(f.phi, mul(uint64_t(c) + 1, rk));
      rk = mul(rk, prm_.r);
    }
    f.len = int64_t(s.size());
    if (f.len > 0) {
      f.pow = power(prm_.r, uint64_t(f.len - 1));
      f.ipow = power(rinv_, uint64_t(f.len - 1));
    }
    return f;
  }

 private:
  FingerprintParams prm_{kMersenne61, 2};
  uint64_t rinv_ = 0;
};

// Prefix fingerprints of an explicit string, for O(1) substring fingerprints.
class StringFingerprints {
 public:
  StringFingerprints() = default;
  StringFingerprints(const Field& f, std::string_view s) : f_(&f), pre_(s.size() + 1) {
    pre_[0] = f.empty();
    for (size_t i = 0; i < s.size(); ++i) pre_[i + 1] = f.combine(pre_[i], f.of_char(uint8_t(s[i])));
  }
  // fingerprint of s[i, i+l)
  Fingerprint sub(int64_t i, int64_t l) const { return f_->subtract_prefix(pre_[size_t(i + l)], pre_[size_t(i)]); }
  int64_t size() const { return int64_t(pre_.size()) - 1; }

 private:
  const Field* f_ = nullptr;
  std::vector<Fingerprint> pre_;
};

// Affix fingerprints over a grammar. Full fingerprints of every symbol and of its
// reverse are computed at construction.
class GrammarFingerprints {
 public:
  GrammarFingerprints() = default;
  GrammarFingerprints(const Grammar& g, FingerprintParams prm) : g_(&g), f_(prm) {
    full_.resize(g.size());
    rev_.resize(g.size());
    for (Sym a : g.order) {
      const Rule& r = g.rules[a];
      switch (r.kind) {
        case RuleKind::Leaf:
          full_[a] = rev_[a] = f_.of_char(r.ch);
          break;
        case RuleKind::Pair:
          full_[a] = f_.combine(full_[r.left], full_[r.right]);
          rev_[a] = f_.combine(rev_[r.right], rev_[r.left]);
          break;
        case RuleKind::Power:
          full_[a] = f_.repeat(full_[r.left], r.exp);
          rev_[a] = f_.repeat(rev_[r.left], r.exp);
          break;
      }
    }
  }

  const Field& field() const { return f_; }
  const Grammar& grammar() const { return *g_; }
  const Fingerprint& full(Sym a, bool reversed) const { return reversed ? rev_[a] : full_[a]; }

  // Prefix of <a> (or of rev<a>) of length l.
  Fingerprint prefix(Sym a, int64_t l, bool reversed) const {
    const Grammar& g = *g_;
    Fingerprint acc = f_.empty();
    while (l > 0) {
      if (l == g.len[a]) return f_.combine(acc, full(a, reversed));
      const Rule& r = g.rules[a];
      if (r.kind == RuleKind::Pair) {
        Sym x = reversed ? r.right : r.left, y = reversed ? r.left : r.right;
        if (l <= g.len[x]) {
          a = x;
        } else {
          acc = f_.combine(acc, full(x, reversed));
          l -= g.len[x];
          a = y;
        }
      } else {  // Power; a leaf always hits the full case
        int64_t L = g.len[r.left];
        int64_t c = l / L;
        if (c) acc = f_.combine(acc, f_.repeat(full(r.left, reversed), c));
        l -= c * L;
        a = r.left;
      }
    }
    return acc;
  }

  Fingerprint suffix(Sym a, int64_t l, bool reversed) const {
    const Grammar& g = *g_;
    Fingerprint acc = f_.empty();
    while (l > 0) {
      if (l == g.len[a]) return f_.combine(full(a, reversed), acc);
      const Rule& r = g.rules[a];
      if (r.kind == RuleKind::Pair) {
        Sym x = reversed ? r.right : r.left, y = reversed ? r.left : r.right;
        if (l <= g.len[y]) {
          a = y;
        } else {
          acc = f_.combine(full(y, reversed), acc);
          l -= g.len[y];
          a = x;
        }
      } else {
        int64_t L = g.len[r.left];
        int64_t c = l / L;
        if (c) acc = f_.combine(f_.repeat(full(r.left, reversed), c), acc);
        l -= c * L;
        a = r.left;
      }
    }
    return acc;
  }

  // Affix of <a>, or of rev<a> when reversed.
  Fingerprint affix(Sym a, Side side, bool reversed, int64_t l) const {
    if (l < 0 || l > g_->len[a]) throw Error(Errc::OutOfBounds, "affix length " + std::to_string(l));
    return side == Side::Prefix ? prefix(a, l, reversed) : suffix(a, l, reversed);
  }

  // Prefix of length l of an implicit string <sym>^reps (or its reverse).
  Fingerprint prefix(const ImplicitString& s, int64_t l) const {
    int64_t L = g_->len[s.sym];
    int64_t c = l / L;
    Fingerprint acc = c ? f_.repeat(full(s.sym, s.reversed), c) : f_.empty();
    if (l - c * L) acc = f_.combine(acc, prefix(s.sym, l - c * L, s.reversed));
    return acc;
  }

 private:
  const Grammar* g_ = nullptr;
  Field f_;
  std::vector<Fingerprint> full_, rev_;
};

// The affix of <a> itself, reversed when asked: a prefix of <a> read backwards is a suffix of rev<a>.
inline Fingerprint fp_affix(const GrammarFingerprints& gf, Sym a, Side side, bool reversed, int64_t l) {
  if (reversed) side = side == Side::Prefix ? Side::Suffix : Side::Prefix;
  return gf.affix(a, side, reversed, l);
}

// Direct polynomial evaluation, independent of the combine arithmetic.
inline uint64_t fp_direct_phi(const Field& f, std::string_view s) {
  unsigned __int128 acc = 0;
  for (size_t i = s.size(); i-- > 0;) acc = (acc * f.r() + (unsigned char)s[i] + 1) % f.p();
  return uint64_t(acc);
}

struct ParamChoice {
  FingerprintParams params;
  int attempts = 0;
  bool verified = false;  // false when the indexed set exceeded the verification cap
  int64_t prefixes_checked = 0;
};

// True when no two distinct equal-length prefixes of the given strings share a fingerprint.
inline bool prefixes_collision_free(const Field& f, std::vector<std::string> strs, int64_t* checked = nullptr) {
  std::sort(strs.begin(), strs.end());
  std::vector<std::pair<int64_t, uint64_t>> keys;
  for (size_t i = 0; i < strs.size(); ++i) {
    size_t lcp = 0;
    if (i > 0) {
      const std::string &a = strs[i - 1], &b = strs[i];
      while (lcp < a.size() && lcp < b.size() && a[lcp] == b[lcp]) ++lcp;
    }
    uint64_t phi = 0, rk = 1 % f.p();
    for (size_t d = 0; d < strs[i].size(); ++d) {
      phi = f.add(phi, f.mul(uint64_t((unsigned char)strs[i][d]) + 1, rk));
      rk = f.mul(rk, f.r());
      if (d + 1 > lcp) keys.push_back({int64_t(d + 1), phi});
    }
  }
  if (checked) *checked = int64_t(keys.size());
  std::sort(keys.begin(), keys.end());
  return std::adjacent_find(keys.begin(), keys.end()) == keys.end();
}

inline constexpr int64_t kVerifyCap = int64_t(1) << 23;

// Picks r for the prime p such that the indexed strings have no unequal-string collisions
// among equal-length prefixes. draw() supplies candidate r values. Verification is skipped
// above verify_cap total characters.
template <class Draw>
ParamChoice choose_params_with(const Grammar& g, const std::vector<ImplicitString>& entries, Draw&& draw,
                               uint64_t p = kMersenne61, int max_attempts = 16, int64_t verify_cap = kVerifyCap) {
  int64_t total = 0;
  for (auto& e : entries) {
    total += length_of(g, e);
    if (total > verify_cap) break;
  }
  bool verify = total <= verify_cap;
  std::vector<std::string> strs;
  if (verify)
    for (auto& e : entries) strs.push_back(materialize(g, e));
  ParamChoice out;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    FingerprintParams prm{p, draw()};
    if (prm.r % p == 0) continue;
    Field f(prm);
    out.params = prm;
    out.attempts = attempt;
    if (!verify) return out;
    if (prefixes_collision_free(f, strs, &out.prefixes_checked)) {
      out.verified = true;
      return out;
    }
  }
  throw Error(Errc::ParamSearchExhausted, "no collision-free r after " + std::to_string(max_attempts) + " attempts");
}

inline ParamChoice choose_params(const Grammar& g, const std::vector<ImplicitString>& entries, uint64_t seed,
                                 uint64_t p = kMersenne61, int max_attempts = 16, int64_t verify_cap = kVerifyCap) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<uint64_t> dist(2, std::max<uint64_t>(2, p > 4 ? p - 2 : 2));
  return choose_params_with(g, entries, [&] { return dist(rng); }, p, max_attempts, verify_cap);
}

}  // namespace cooc
