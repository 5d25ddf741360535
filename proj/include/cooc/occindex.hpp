#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cooc/compress.hpp"
#include "cooc/fingerprint.hpp"
#include "cooc/grammar.hpp"
#include "cooc/range.hpp"
#include "cooc/strings.hpp"
#include "cooc/trie.hpp"

namespace cooc {

using Pos = std::optional<int64_t>;

inline Pos min_pos(Pos a, Pos b) { return !a ? b : !b ? a : Pos(std::min(*a, *b)); }
inline Pos max_pos(Pos a, Pos b) { return !a ? b : !b ? a : Pos(std::max(*a, *b)); }

// Head/tail strings of every non-leaf rule, as stored in the tries.
inline ImplicitString head_entry(const Grammar& g, Sym a) { return {g.rules[a].left, 1, true}; }
inline ImplicitString tail_entry(const Grammar& g, Sym a) {
  const Rule& r = g.rules[a];
  if (r.kind == RuleKind::Pair) return {r.right, 1, false};
  return {r.left, r.exp - 1, false};
}

// Anchor-trie strings of a power rule A -> B^k: B^j for j in {1, 2, k-2, k-1}.
inline std::vector<int64_t> power_anchor_reps(int64_t k) {
  std::vector<int64_t> js{1, 2, k - 2, k - 1};
  std::vector<int64_t> out;
  for (int64_t j : js)
    if (j >= 1 && j <= k - 1 && std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
  return out;
}

// Grammar with everything the indexes share: scheme, hash-consing tables, fingerprints.
struct GrammarContext {
  Grammar g;
  bool has_scheme = false;
  LevelScheme scheme;
  SymbolTables tables;
  ParamChoice params;
  GrammarFingerprints fp;
  SplitMode mode = SplitMode::Fast;

  SplitMode effective_mode() const { return has_scheme ? mode : SplitMode::Broad; }
};

// All strings any trie of the index will hold (occurrence tries and anchor tries).
inline std::vector<ImplicitString> indexed_strings(const Grammar& g) {
  std::vector<ImplicitString> out;
  for (Sym a = 0; a < g.size(); ++a) {
    const Rule& r = g.rules[a];
    if (r.kind == RuleKind::Leaf) continue;
    out.push_back(head_entry(g, a));
    out.push_back(tail_entry(g, a));
    if (r.kind == RuleKind::Power)
      for (int64_t j : power_anchor_reps(r.exp)) {
        out.push_back({r.left, j, false});
        out.push_back({r.left, j, true});
      }
  }
  return out;
}

inline std::shared_ptr<GrammarContext> make_context(Grammar g, const LevelScheme* scheme, FingerprintParams prm,
                                                    ParamChoice choice = {}) {
  auto ctx = std::make_shared<GrammarContext>();
  ctx->g = std::move(g);
  if (scheme) {
    ctx->has_scheme = true;
    ctx->scheme = *scheme;
  }
  ctx->tables = SymbolTables(ctx->g);
  choice.params = prm;
  ctx->params = choice;
  ctx->fp = GrammarFingerprints(ctx->g, prm);
  return ctx;
}

inline std::shared_ptr<GrammarContext> make_context(Grammar g, const LevelScheme* scheme, uint64_t seed = 7) {
  ParamChoice choice = choose_params(g, indexed_strings(g), seed);
  FingerprintParams prm = choice.params;
  return make_context(std::move(g), scheme, prm, choice);
}

struct SplitLoci {
  int64_t s = 0;
  Locus pre, suf;
  bool usable() const { return pre.found && suf.found; }
};

struct PatternHandle {
  std::string p;
  bool absent = false;
  SplitResult split;
  std::vector<SplitLoci> loci;  // ascending s
  uint8_t ch = 0;               // m == 1
  int64_t m() const { return int64_t(p.size()); }
};

struct PointStats {
  int64_t total = 0;         // raw multiset size
  int64_t frontier = 0;      // stored staircase points
  int64_t max_created = 0;   // max points contributed by one non-terminal
  int64_t max_owned = 0;     // max points in P(A, ., .) over A
  size_t keys = 0;
};

class OccIndex {
 public:
  OccIndex() = default;

  explicit OccIndex(std::shared_ptr<const GrammarContext> ctx) : ctx_(std::move(ctx)) {
    const Grammar& g = ctx_->g;
    std::vector<ImplicitString> pre, suf;
    pre_id_.assign(g.size(), kNone);
    suf_id_.assign(g.size(), kNone);
    for (Sym a = 0; a < g.size(); ++a) {
      if (g.is_leaf(a)) continue;
      pre_id_[a] = Sym(pre.size());
      pre.push_back(head_entry(g, a));
      suf_id_[a] = Sym(suf.size());
      suf.push_back(tail_entry(g, a));
    }
    tpre_ = build_trie(ctx_->fp, pre);
    tsuf_ = build_trie(ctx_->fp, suf);
    build_tables();
  }

  struct Tables {
    std::vector<uint64_t> reach;
    std::vector<std::array<uint64_t, 4>> alpha;
    std::vector<uint64_t> keys;
    std::vector<uint32_t> key_off;
    std::vector<Point> frontier;
    PointStats stats;
  };

  // Restores a serialized index.
  OccIndex(std::shared_ptr<const GrammarContext> ctx, CompactTrie tpre, CompactTrie tsuf, Tables t)
      : ctx_(std::move(ctx)), tpre_(std::move(tpre)), tsuf_(std::move(tsuf)) {
    const Grammar& g = ctx_->g;
    pre_id_.assign(g.size(), kNone);
    suf_id_.assign(g.size(), kNone);
    Sym n = 0;
    for (Sym a = 0; a < g.size(); ++a)
      if (!g.is_leaf(a)) pre_id_[a] = suf_id_[a] = n++;
    words_ = (g.size() + 63) / 64;
    reach_ = std::move(t.reach);
    alpha_ = std::move(t.alpha);
    keys_ = std::move(t.keys);
    key_off_ = std::move(t.key_off);
    frontier_ = std::move(t.frontier);
    stats_ = t.stats;
    tpre_.rebind(ctx_->fp);
    tsuf_.rebind(ctx_->fp);
  }

  Tables tables() const { return {reach_, alpha_, keys_, key_off_, frontier_, stats_}; }

  const GrammarContext& context() const { return *ctx_; }
  std::shared_ptr<const GrammarContext> context_ptr() const { return ctx_; }
  const Grammar& grammar() const { return ctx_->g; }
  const CompactTrie& tpre() const { return tpre_; }
  const CompactTrie& tsuf() const { return tsuf_; }
  const PointStats& point_stats() const { return stats_; }
  uint32_t pre_rank(Sym a) const { return tpre_.rank_of(pre_id_[a]); }
  uint32_t suf_rank(Sym a) const { return tsuf_.rank_of(suf_id_[a]); }
  bool reaches(Sym a, Sym b) const { return (reach_[size_t(a) * words_ + b / 64] >> (b % 64)) & 1; }

  // Point set P(A, hp_pre, hp_suf) as a staircase slice (empty if absent).
  std::span<const Point> points(Sym a, uint32_t hp_pre, uint32_t hp_suf) const {
    uint64_t k = pack(a, hp_pre, hp_suf);
    auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
    if (it == keys_.end() || *it != k) return {};
    size_t i = size_t(it - keys_.begin());
    return {frontier_.data() + key_off_[i], frontier_.data() + key_off_[i + 1]};
  }

  PatternHandle preprocess_pattern(std::string_view p) const {
    if (p.empty()) throw Error(Errc::EmptyPattern, "empty pattern");
    PatternHandle h;
    h.p = std::string(p);
    const int64_t m = h.m();
    h.split = compute_splits(ctx_->tables, ctx_->scheme, p, ctx_->effective_mode());
    if (h.split.absent) {
      h.absent = true;
      return h;
    }
    if (m == 1) {
      h.ch = uint8_t(p[0]);
      return h;
    }
    std::string rp(p.rbegin(), p.rend());
    std::vector<int64_t> pre_off, suf_off;
    for (int64_t s : h.split.splits) {
      pre_off.push_back(m - s);
      suf_off.push_back(s);
    }
    auto pl = tpre_.batch_locus(rp, pre_off);
    auto sl = tsuf_.batch_locus(p, suf_off);
    for (size_t i = 0; i < h.split.splits.size(); ++i) h.loci.push_back({h.split.splits[i], pl[i], sl[i]});
    return h;
  }

  // ---- per non-terminal primitives ----

  std::vector<int64_t> relevant_occurrences(const PatternHandle& h, Sym a) const {
    std::vector<int64_t> out;
    const Grammar& g = ctx_->g;
    if (h.absent || g.is_leaf(a) || h.m() < 2 || g.len[a] < h.m()) return out;
    uint32_t pr = pre_rank(a), sr = suf_rank(a);
    int64_t hl = g.head_len(a);
    for (auto it = h.loci.rbegin(); it != h.loci.rend(); ++it)
      if (it->pre.contains(pr) && it->suf.contains(sr)) out.push_back(hl - it->s);
    return out;
  }

  bool occurs_in(const PatternHandle& h, Sym a) const {
    const Grammar& g = ctx_->g;
    if (h.absent || g.len[a] < h.m()) return false;
    if (h.m() == 1) return (alpha_[a][h.ch / 64] >> (h.ch % 64)) & 1;
    if (g.is_leaf(a)) return false;
    for (auto& sl : h.loci) {
      if (!sl.usable()) continue;
      auto pts = points(a, tpre_.hp_of(sl.pre.node), tsuf_.hp_of(sl.suf.node));
      if (!pts.empty() && dominant_exists(pts.data(), pts.data() + pts.size(), tpre_.depth(sl.pre.node),
                                          tsuf_.depth(sl.suf.node)))
        return true;
    }
    return false;
  }

  Pos leftmost(const PatternHandle& h, Sym a) const {
    const Grammar& g = ctx_->g;
    int64_t off = 0;
    for (;;) {
      if (!occurs_in(h, a)) return {};
      const Rule& r = g.rules[a];
      if (r.kind == RuleKind::Leaf) return off;
      if (occurs_in(h, r.left)) {
        a = r.left;
        continue;
      }
      auto rel = relevant_occurrences(h, a);
      if (!rel.empty()) return off + rel.front();
      if (r.kind == RuleKind::Power) return {};
      off += g.len[r.left];
      a = r.right;
    }
  }

  Pos rightmost(const PatternHandle& h, Sym a) const {
    const Grammar& g = ctx_->g;
    if (!occurs_in(h, a)) return {};
    const Rule& r = g.rules[a];
    if (r.kind == RuleKind::Leaf) return 0;
    int64_t L = g.len[r.left];
    if (r.kind == RuleKind::Pair) {
      if (occurs_in(h, r.right)) return L + *rightmost(h, r.right);
      auto rel = relevant_occurrences(h, a);
      if (!rel.empty()) return rel.back();
      return rightmost(h, r.left);
    }
    return power_rightmost(h, a, r.exp);
  }

  enum class Which { Leftmost, Rightmost };
  enum class Part { Whole, Head, Tail };

  // Positions are in the coordinates of <a>.
  Pos extremal(const PatternHandle& h, Sym a, Which which, Part part) const {
    const Grammar& g = ctx_->g;
    const Rule& r = g.rules[a];
    if (part == Part::Whole) return which == Which::Leftmost ? leftmost(h, a) : rightmost(h, a);
    if (r.kind == RuleKind::Leaf) return {};
    if (part == Part::Head) return which == Which::Leftmost ? leftmost(h, r.left) : rightmost(h, r.left);
    int64_t L = g.len[r.left];
    if (r.kind == RuleKind::Pair) {
      Pos t = which == Which::Leftmost ? leftmost(h, r.right) : rightmost(h, r.right);
      return t ? Pos(L + *t) : Pos{};
    }
    // tail = B^(k-1)
    if (which == Which::Rightmost) {
      Pos t = power_rightmost(h, a, r.exp - 1);
      return t ? Pos(L + *t) : Pos{};
    }
    if (occurs_in(h, r.left)) return L + *leftmost(h, r.left);
    for (int64_t q : relevant_occurrences(h, a))
      if (q + h.m() <= (r.exp - 1) * L) return L + q;
    return {};
  }

  // Rightmost occurrence q <= p in <a>.
  Pos pred(const PatternHandle& h, Sym a, int64_t p) const {
    const Grammar& g = ctx_->g;
    const int64_t m = h.m();
    if (p < 0 || g.len[a] < m) return {};
    if (p >= g.len[a] - m) return rightmost(h, a);
    if (!occurs_in(h, a)) return {};
    const Rule& r = g.rules[a];
    if (r.kind == RuleKind::Leaf) return 0;
    int64_t L = g.len[r.left];
    auto rel = relevant_occurrences(h, a);
    if (r.kind == RuleKind::Pair) {
      if (p >= L) {
        if (Pos t = pred(h, r.right, p - L)) return L + *t;
        if (!rel.empty()) return rel.back();
        return rightmost(h, r.left);
      }
      Pos best = pred(h, r.left, p);
      for (int64_t q : rel)
        if (q <= p) best = max_pos(best, q);
      return best;
    }
    const int64_t k = r.exp, j = p / L;
    Pos best;
    for (int64_t q : rel) {
      if (q > p) continue;
      int64_t sh = std::min((p - q) / L, (k * L - m - q) / L);
      if (sh >= 0) best = max_pos(best, q + sh * L);
    }
    if (Pos t = pred(h, r.left, p - j * L)) best = max_pos(best, j * L + *t);
    if (j >= 1)
      if (Pos t = rightmost(h, r.left)) best = max_pos(best, (j - 1) * L + *t);
    return best;
  }

  // Leftmost occurrence q >= p in <a>.
  Pos succ(const PatternHandle& h, Sym a, int64_t p) const {
    const Grammar& g = ctx_->g;
    const int64_t m = h.m();
    if (g.len[a] < m || p > g.len[a] - m) return {};
    if (p <= 0) return leftmost(h, a);
    if (!occurs_in(h, a)) return {};
    const Rule& r = g.rules[a];
    if (r.kind == RuleKind::Leaf) return {};
    int64_t L = g.len[r.left];
    if (r.kind == RuleKind::Pair) {
      if (p >= L) {
        Pos t = succ(h, r.right, p - L);
        return t ? Pos(L + *t) : Pos{};
      }
      if (Pos t = succ(h, r.left, p)) return t;
      for (int64_t q : relevant_occurrences(h, a))
        if (q >= p) return q;
      Pos t = leftmost(h, r.right);
      return t ? Pos(L + *t) : Pos{};
    }
    const int64_t k = r.exp, j = p / L;
    Pos best;
    for (int64_t q : relevant_occurrences(h, a)) {
      int64_t sh = q >= p ? 0 : (p - q + L - 1) / L;
      if (q + sh * L + m <= k * L) best = min_pos(best, q + sh * L);
    }
    if (Pos t = succ(h, r.left, p - j * L)) best = min_pos(best, j * L + *t);
    if (j + 1 < k)
      if (Pos t = leftmost(h, r.left)) best = min_pos(best, (j + 1) * L + *t);
    return best;
  }

  enum class Dir { Pred, Succ };

  Pos pred_succ(const PatternHandle& h, Sym a, int64_t p, Dir dir) const {
    if (p < 0 || p >= ctx_->g.len[a]) throw Error(Errc::OutOfBounds, "position " + std::to_string(p));
    return dir == Dir::Pred ? pred(h, a, p) : succ(h, a, p);
  }

  std::vector<CoOcc> report_co_occurrences(const PatternHandle& h1, const PatternHandle& h2) const {
    std::vector<CoOcc> out;
    if (h1.absent || h2.absent) return out;
    const Sym s = ctx_->g.start;
    for (int64_t i = 0;;) {
      Pos a = succ(h1, s, i);
      if (!a) break;
      Pos q2 = succ(h2, s, *a);
      if (!q2) break;
      Pos q1 = pred(h1, s, *q2);
      COOC_CHECK(q1 && *q1 >= *a);
      out.push_back({*q1, *q2});
      i = *q2 + 1;
    }
    return out;
  }

 private:
  static uint64_t pack(Sym a, uint32_t hp, uint32_t hs) { return (uint64_t(a) << 40) | (uint64_t(hp) << 20) | hs; }

  // Rightmost occurrence within B^j where a -> B^k and 1 <= j <= k.
  Pos power_rightmost(const PatternHandle& h, Sym a, int64_t j) const {
    const Grammar& g = ctx_->g;
    Sym b = g.rules[a].left;
    int64_t L = g.len[b];
    Pos best;
    if (Pos t = rightmost(h, b)) best = (j - 1) * L + *t;
    for (int64_t q : relevant_occurrences(h, a)) {
      int64_t sh = (j * L - h.m() - q);
      if (sh < 0) continue;
      best = max_pos(best, q + (sh / L) * L);
    }
    return best;
  }

  void build_tables() {
    const Grammar& g = ctx_->g;
    const size_t n = g.size();
    words_ = (n + 63) / 64;
    reach_.assign(n * words_, 0);
    alpha_.assign(n, {0, 0, 0, 0});
    for (Sym a : g.order) {
      uint64_t* row = &reach_[size_t(a) * words_];
      row[a / 64] |= uint64_t(1) << (a % 64);
      const Rule& r = g.rules[a];
      if (r.kind == RuleKind::Leaf) {
        alpha_[a][r.ch / 64] |= uint64_t(1) << (r.ch % 64);
        continue;
      }
      auto merge = [&](Sym c) {
        const uint64_t* cr = &reach_[size_t(c) * words_];
        for (size_t w = 0; w < words_; ++w) row[w] |= cr[w];
        for (int w = 0; w < 4; ++w) alpha_[a][size_t(w)] |= alpha_[c][size_t(w)];
      };
      merge(r.left);
      if (r.kind == RuleKind::Pair) merge(r.right);
    }
    if (n >= (size_t(1) << 24) || tpre_.hp_count() >= (1u << 20) || tsuf_.hp_count() >= (1u << 20))
      throw Error(Errc::LengthOverflow, "grammar too large for the point-store key layout");
    struct Rec {
      uint64_t key;
      int64_t x, y;
      bool operator<(const Rec& o) const {
        return key != o.key ? key < o.key : (x != o.x ? x < o.x : y < o.y);
      }
    };
    std::vector<Rec> recs;
    std::vector<int64_t> created(n, 0);
    stats_ = PointStats{};
    keys_.clear();
    key_off_.clear();
    frontier_.clear();
    std::vector<Point> tmp;
    for (Sym a = 0; a < n; ++a) {
      if (g.is_leaf(a)) continue;
      recs.clear();
      const uint64_t* row = &reach_[size_t(a) * words_];
      for (size_t w = 0; w < words_; ++w) {
        for (uint64_t bits = row[w]; bits; bits &= bits - 1) {
          Sym d = Sym(w * 64 + size_t(std::countr_zero(bits)));
          if (g.is_leaf(d)) continue;
          auto sp = tpre_.path_stops(pre_rank(d));
          auto ss = tsuf_.path_stops(suf_rank(d));
          for (auto& x : sp)
            for (auto& y : ss) recs.push_back({pack(a, x.hp, y.hp), tpre_.depth(x.node), tsuf_.depth(y.node)});
          created[d] += int64_t(sp.size() * ss.size());
        }
      }
      stats_.total += int64_t(recs.size());
      stats_.max_owned = std::max(stats_.max_owned, int64_t(recs.size()));
      std::sort(recs.begin(), recs.end());
      for (size_t i = 0; i < recs.size();) {
        size_t j = i;
        tmp.clear();
        while (j < recs.size() && recs[j].key == recs[i].key) {
          tmp.push_back({recs[j].x, recs[j].y});
          ++j;
        }
        keys_.push_back(recs[i].key);
        key_off_.push_back(uint32_t(frontier_.size()));
        append_frontier(tmp.begin(), tmp.end(), frontier_);
        i = j;
      }
    }
    key_off_.push_back(uint32_t(frontier_.size()));
    for (int64_t c : created) stats_.max_created = std::max(stats_.max_created, c);
    stats_.frontier = int64_t(frontier_.size());
    stats_.keys = keys_.size();
  }

  std::shared_ptr<const GrammarContext> ctx_;
  CompactTrie tpre_, tsuf_;
  std::vector<Sym> pre_id_, suf_id_;
  size_t words_ = 0;
  std::vector<uint64_t> reach_;
  std::vector<std::array<uint64_t, 4>> alpha_;
  std::vector<uint64_t> keys_;
  std::vector<uint32_t> key_off_;
  std::vector<Point> frontier_;
  PointStats stats_;
};

inline OccIndex build_occ_index(std::shared_ptr<const GrammarContext> ctx) { return OccIndex(std::move(ctx)); }

}  // namespace cooc
