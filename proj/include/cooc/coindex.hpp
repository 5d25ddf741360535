#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cooc/occindex.hpp"
#include "cooc/strings.hpp"

namespace cooc {

inline int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}
inline int64_t ceil_div(int64_t a, int64_t b) { return -floor_div(-a, b); }

inline int ceil_log2(int64_t x) { return x <= 1 ? 0 : int(std::bit_width(uint64_t(x - 1))); }

// ---- pruned parse tree ----

struct PrunedNode {
  Sym label = kNone;
  int64_t reps = 1;   // > 1 only for the collapsed B^(k-1) leaf
  bool rest = false;  // the collapsed leaf of a power node
  bool internal = false;
  int32_t parent = -1;
  int32_t next = -1;  // next node with the same label in preorder
  int32_t anc = -1;
  int64_t off = 0;
};

class PrunedParseTree {
 public:
  PrunedParseTree() = default;

  explicit PrunedParseTree(const Grammar& g) {
    first_.assign(g.size(), -1);
    mult_.assign(g.size(), 0);
    mult_[g.start] = 1;
    for (auto it = g.order.rbegin(); it != g.order.rend(); ++it) {
      Sym a = *it;
      const Rule& r = g.rules[a];
      if (!mult_[a] || r.kind == RuleKind::Leaf) continue;
      auto bump = [&](Sym c, int64_t times) { mult_[c] = uint8_t(std::min<int64_t>(2, mult_[c] + times * mult_[a])); };
      if (r.kind == RuleKind::Pair) {
        bump(r.left, 1);
        bump(r.right, 1);
      } else {
        bump(r.left, 2);
      }
    }
    struct Item {
      Sym label;
      int64_t reps;
      bool rest;
      int32_t parent;
      int64_t off;
    };
    std::vector<Item> st{{g.start, 1, false, -1, 0}};
    std::vector<int32_t> last(g.size(), -1);
    while (!st.empty()) {
      Item it = st.back();
      st.pop_back();
      int32_t v = int32_t(nodes_.size());
      PrunedNode n;
      n.label = it.label;
      n.reps = it.reps;
      n.rest = it.rest;
      n.parent = it.parent;
      n.off = it.off;
      if (it.parent >= 0) {
        const PrunedNode& p = nodes_[size_t(it.parent)];
        n.anc = (p.parent < 0 || mult_[p.label] >= 2) ? it.parent : p.anc;
      }
      if (!it.rest) {
        if (last[it.label] >= 0) nodes_[size_t(last[it.label])].next = v;
        last[it.label] = v;
      }
      const bool expand = !it.rest && first_[it.label] < 0;
      n.internal = expand;
      nodes_.push_back(n);
      if (!expand) continue;
      first_[it.label] = v;
      const Rule& r = g.rules[it.label];
      if (r.kind == RuleKind::Pair) {
        st.push_back({r.right, 1, false, v, it.off + g.len[r.left]});
        st.push_back({r.left, 1, false, v, it.off});
      } else if (r.kind == RuleKind::Power) {
        st.push_back({r.left, r.exp - 1, true, v, it.off + g.len[r.left]});
        st.push_back({r.left, 1, false, v, it.off});
      }
    }
  }

  static PrunedParseTree from_parts(std::vector<PrunedNode> nodes, std::vector<int32_t> first,
                                    std::vector<uint8_t> mult) {
    PrunedParseTree t;
    t.nodes_ = std::move(nodes);
    t.first_ = std::move(first);
    t.mult_ = std::move(mult);
    return t;
  }

  size_t size() const { return nodes_.size(); }
  const PrunedNode& node(int32_t v) const { return nodes_[size_t(v)]; }
  const std::vector<int32_t>& firsts() const { return first_; }
  const std::vector<uint8_t>& multiplicities() const { return mult_; }
  const std::vector<PrunedNode>& nodes() const { return nodes_; }
  int32_t first(Sym a) const { return first_[a]; }
  int multiplicity(Sym a) const { return mult_[a]; }

 private:
  std::vector<PrunedNode> nodes_;
  std::vector<int32_t> first_;
  std::vector<uint8_t> mult_;
};

// ---- quadruple records ----

struct QuadKey {
  int32_t u1, u2, v1, v2;
  auto operator<=>(const QuadKey&) const = default;
};

struct AnchorString {
  std::string s;
  int64_t l = 0;  // |U|
  PatternHandle h;
};

// S1 occurrences in S2 around c = l2 - 2^k.
struct AnchorTriple {
  int64_t c = 0;
  int64_t before = -1;                // rightmost ending before c
  int64_t cover_lo = -1, lo_end = -1;  // leftmost covering c, end of its pi1-run
  int64_t cover_hi = -1, hi_beg = -1;  // rightmost covering c, start of its pi1-run
};

struct T2Entry {
  int64_t q;
  Sym a;
  int64_t ov;
  bool operator<(const T2Entry& o) const { return std::tie(q, a) < std::tie(o.q, o.a); }
};

struct QuadrupleRecord {
  QuadKey key{};
  std::shared_ptr<const AnchorString> s1, s2;
  int64_t l1 = 0, l2 = 0;
  std::vector<std::pair<int64_t, Sym>> t1;  // (d = p2 - p1, A), sorted
  std::vector<Sym> L;
  std::vector<AnchorTriple> triples;  // indexed by k
  int64_t pi1 = 0;                    // 0 when S1 is not periodic
  std::vector<T2Entry> t2;            // sorted by q
  std::optional<int64_t> ov;
  bool ov_consistent = true;
  int64_t t2_misaligned = 0;  // T2 candidates whose span was not a multiple of pi1
};

struct CoHandle {
  PatternHandle ph;
  std::vector<SplitLoci> aloci;  // loci in the anchor tries, ascending s
  int64_t m() const { return ph.m(); }
  bool absent() const { return ph.absent; }
};

struct Candidate {
  Sym a;
  int64_t s1, s2;
  char tag;  // 'T' first tree, 'L' list, 'P' periodic tree, 'F' fallback
};

struct CoStats {
  std::atomic<int64_t> quadruples{0};
  std::atomic<int64_t> duplicates{0};
  std::atomic<int64_t> candidates{0};
};

class CoIndex {
 public:
  CoIndex() = default;

  explicit CoIndex(std::shared_ptr<const GrammarContext> ctx) : occ_(ctx), ctx_(std::move(ctx)) {
    build_anchor_tries();
    tree_ = PrunedParseTree(ctx_->g);
  }

  // Restores a serialized skeleton.
  CoIndex(OccIndex occ, CompactTrie apre, CompactTrie asuf, PrunedParseTree tree)
      : occ_(std::move(occ)), ctx_(occ_.context_ptr()), apre_(std::move(apre)), asuf_(std::move(asuf)),
        tree_(std::move(tree)) {
    apre_.rebind(ctx_->fp);
    asuf_.rebind(ctx_->fp);
    index_anchor_ranks();
  }

  const OccIndex& occ() const { return occ_; }
  const GrammarContext& context() const { return *ctx_; }
  const Grammar& grammar() const { return ctx_->g; }
  const CompactTrie& anchor_pre() const { return apre_; }
  const CompactTrie& anchor_suf() const { return asuf_; }
  const PrunedParseTree& tree() const { return tree_; }
  const CoStats& stats() const { return *stats_; }
  size_t memo_size() const {
    std::lock_guard lk(memo_->mu);
    return memo_->quads.size();
  }

  // Anchor entries of rule a as ranks; head and tail.
  uint32_t apre_rank(Sym a) const { return apre_rank_[a]; }
  uint32_t asuf_rank(Sym a) const { return asuf_rank_[a]; }

  CoHandle preprocess(std::string_view p) const {
    CoHandle h;
    h.ph = occ_.preprocess_pattern(p);
    if (h.ph.absent || h.ph.m() < 2) return h;
    const int64_t m = h.m();
    std::string rp(p.rbegin(), p.rend());
    std::vector<int64_t> pre_off, suf_off;
    for (int64_t s : h.ph.split.splits) {
      pre_off.push_back(m - s);
      suf_off.push_back(s);
    }
    auto pl = apre_.batch_locus(rp, pre_off);
    auto sl = asuf_.batch_locus(p, suf_off);
    for (size_t i = 0; i < pre_off.size(); ++i) h.aloci.push_back({h.ph.split.splits[i], pl[i], sl[i]});
    return h;
  }

  std::shared_ptr<const AnchorString> anchor_string(int32_t u, int32_t v) const {
    std::shared_ptr<Slot<AnchorString>> slot;
    {
      std::lock_guard lk(memo_->mu);
      auto& e = memo_->anchors[{u, v}];
      if (!e) e = std::make_shared<Slot<AnchorString>>();
      slot = e;
    }
    std::call_once(slot->once, [&] {
      auto as = std::make_shared<AnchorString>();
      std::string U = apre_.label(u);
      as->l = int64_t(U.size());
      as->s.assign(U.rbegin(), U.rend());
      as->s += asuf_.label(v);
      as->h = occ_.preprocess_pattern(as->s);
      slot->value = as;
    });
    return slot->value;
  }

  const QuadrupleRecord& materialize_quadruple(const QuadKey& key) const {
    std::shared_ptr<Slot<QuadrupleRecord>> slot;
    {
      std::lock_guard lk(memo_->mu);
      auto& e = memo_->quads[key];
      if (!e) e = std::make_shared<Slot<QuadrupleRecord>>();
      slot = e;
    }
    std::call_once(slot->once, [&] {
      slot->value = std::make_shared<QuadrupleRecord>(build_quadruple(key));
      ++stats_->quadruples;
    });
    return *slot->value;
  }

  // Materializes every quadruple of anchor-trie nodes.
  void materialize_all(int64_t cap) const {
    int64_t np = int64_t(apre_.node_count()), ns = int64_t(asuf_.node_count());
    __int128 total = __int128(np) * np * ns * ns;
    if (total > cap)
      throw Error(Errc::EagerTooLarge, std::to_string(int64_t(std::min<__int128>(total, INT64_MAX))) +
                                           " quadruples exceed the cap " + std::to_string(cap));
    for (int32_t u1 = 0; u1 < np; ++u1)
      for (int32_t u2 = 0; u2 < np; ++u2)
        for (int32_t v1 = 0; v1 < ns; ++v1)
          for (int32_t v2 = 0; v2 < ns; ++v2) materialize_quadruple({u1, u2, v1, v2});
  }

  std::vector<Candidate> candidate_nonterminals(const CoHandle& h1, const CoHandle& h2, int64_t b) const {
    std::vector<Candidate> out;
    if (h1.absent() || h2.absent()) return out;
    for (auto& x1 : h1.aloci) {
      if (!x1.usable()) continue;
      for (auto& x2 : h2.aloci) {
        if (!x2.usable()) continue;
        const QuadrupleRecord& q = materialize_quadruple({x1.pre.node, x2.pre.node, x1.suf.node, x2.suf.node});
        query_record(q, h1, h2, x1.s, x2.s, b, out);
      }
    }
    std::sort(out.begin(), out.end(), [](const Candidate& x, const Candidate& y) { return x.a < y.a; });
    stats_->candidates += int64_t(out.size());
    return out;
  }

  // All relevant co-occurrences in <a> with q2 - q1 <= b, local coordinates, sorted by q1.
  std::vector<CoOcc> relevant_close_co_occurrences(const CoHandle& h1, const CoHandle& h2, Sym a, int64_t b) const {
    std::vector<CoOcc> out;
    const Grammar& g = ctx_->g;
    if (h1.absent() || h2.absent() || g.is_leaf(a)) return out;
    const PatternHandle &p1 = h1.ph, &p2 = h2.ph;
    const int64_t H = g.head_len(a);
    // q2 relevant, or q2 the leftmost occurrence entirely in the tail
    std::vector<int64_t> q2s = p2.m() >= 2 ? occ_.relevant_occurrences(p2, a) : std::vector<int64_t>{};
    if (Pos t = occ_.extremal(p2, a, OccIndex::Which::Leftmost, OccIndex::Part::Tail)) q2s.push_back(*t);
    for (int64_t q2 : q2s) {
      Pos q1 = occ_.pred(p1, a, q2);
      if (!q1 || *q1 >= H || q2 - *q1 > b) continue;
      if (occ_.succ(p2, a, *q1) != q2) continue;
      out.push_back({*q1, q2});
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Translates relevant co-occurrences of each anchor non-terminal to every occurrence of it in S.
  std::vector<CoOcc> report_from_anchors(const std::vector<std::pair<Sym, std::vector<CoOcc>>>& anchors, int64_t m1,
                                         int64_t m2) const {
    const Grammar& g = ctx_->g;
    std::vector<CoOcc> out;
    std::vector<std::pair<int32_t, std::vector<CoOcc>>> work;
    for (auto& [a, local] : anchors) {
      int32_t v = tree_.first(a);
      if (v < 0 || local.empty()) continue;
      std::vector<CoOcc> w;
      const Rule& r = g.rules[a];
      const int64_t off = tree_.node(v).off;
      for (auto [q1, q2] : local) {
        int64_t top = 0;
        if (r.kind == RuleKind::Power) {
          int64_t L = g.len[r.left];
          top = (g.len[a] - std::max(q1 + m1, q2 + m2)) / L;
          for (int64_t i = 0; i <= top; ++i) w.push_back({off + q1 + i * L, off + q2 + i * L});
        } else {
          w.push_back({off + q1, off + q2});
        }
      }
      work.push_back({v, std::move(w)});
    }
    while (!work.empty()) {
      auto [v, w] = std::move(work.back());
      work.pop_back();
      const PrunedNode& n = tree_.node(v);
      if (n.parent < 0) {
        out.insert(out.end(), w.begin(), w.end());
        continue;
      }
      if (n.next >= 0) {
        int64_t d = tree_.node(n.next).off - n.off;
        std::vector<CoOcc> w2;
        w2.reserve(w.size());
        for (auto [x, y] : w) w2.push_back({x + d, y + d});
        work.push_back({n.next, std::move(w2)});
      }
      const PrunedNode& p = tree_.node(n.parent);
      const Rule& pr = g.rules[p.label];
      if (pr.kind == RuleKind::Power && n.off == p.off) {
        const int64_t L = g.len[pr.left], end = p.off + g.len[p.label];
        std::vector<CoOcc> w2;
        for (auto [x, y] : w)
          for (int64_t i = 0; i < pr.exp; ++i) {
            if (std::max(x + m1, y + m2) + i * L > end) break;
            w2.push_back({x + i * L, y + i * L});
          }
        w = std::move(w2);
      }
      work.push_back({n.anc, std::move(w)});
    }
    std::sort(out.begin(), out.end());
    size_t before = out.size();
    out.erase(std::unique(out.begin(), out.end()), out.end());
    stats_->duplicates += int64_t(before - out.size());
    return out;
  }

  std::vector<CoOcc> query_close(std::string_view p1, std::string_view p2, int64_t b) const {
    if (p1.empty() || p2.empty()) throw Error(Errc::EmptyPattern, "empty pattern");
    if (b < 0) throw Error(Errc::NegativeBound, "negative bound " + std::to_string(b));
    const Grammar& g = ctx_->g;
    b = std::min(b, g.N() - 1);
    const int64_t inner = Matcher(p2).find_first(p1);
    if (inner >= 0) {
      if (inner > b) return {};
      PatternHandle h = occ_.preprocess_pattern(p1);
      std::vector<std::pair<Sym, std::vector<CoOcc>>> anchors;
      for (Sym a : nonterminals_containing(h, nullptr)) {
        std::vector<CoOcc> local;
        if (g.is_leaf(a)) {
          if (h.m() == 1) local.push_back({0, inner});
        } else {
          for (int64_t q : occ_.relevant_occurrences(h, a)) local.push_back({q, q + inner});
        }
        if (!local.empty()) anchors.push_back({a, std::move(local)});
      }
      return report_from_anchors(anchors, h.m(), int64_t(p2.size()));
    }
    CoHandle h1 = preprocess(p1), h2 = preprocess(p2);
    if (h1.absent() || h2.absent()) return {};
    std::vector<Sym> cands;
    if (h1.m() == 1 || h2.m() == 1) {
      cands = nonterminals_containing(h1.ph, &h2.ph);
      stats_->candidates += int64_t(cands.size());
    } else {
      for (auto& c : candidate_nonterminals(h1, h2, b))
        if (cands.empty() || cands.back() != c.a) cands.push_back(c.a);
    }
    std::vector<std::pair<Sym, std::vector<CoOcc>>> anchors;
    for (Sym a : cands) {
      auto local = relevant_close_co_occurrences(h1, h2, a, b);
      if (!local.empty()) anchors.push_back({a, std::move(local)});
    }
    return report_from_anchors(anchors, h1.m(), h2.m());
  }

  // Memo state for serialization.
  std::vector<std::shared_ptr<const QuadrupleRecord>> memoized() const {
    std::vector<std::shared_ptr<const QuadrupleRecord>> out;
    std::lock_guard lk(memo_->mu);
    for (auto& [k, slot] : memo_->quads)
      if (slot->value) out.push_back(slot->value);
    return out;
  }

 private:
  template <class T>
  struct Slot {
    std::once_flag once;
    std::shared_ptr<const T> value;
  };
  struct Memo {
    mutable std::mutex mu;
    std::map<std::pair<int32_t, int32_t>, std::shared_ptr<Slot<AnchorString>>> anchors;
    std::map<QuadKey, std::shared_ptr<Slot<QuadrupleRecord>>> quads;
  };

  void build_anchor_tries() {
    const Grammar& g = ctx_->g;
    std::vector<ImplicitString> pre, suf;
    for (Sym a = 0; a < g.size(); ++a) {
      const Rule& r = g.rules[a];
      if (r.kind == RuleKind::Pair) {
        pre.push_back({r.left, 1, true});
        suf.push_back({r.right, 1, false});
      } else if (r.kind == RuleKind::Power) {
        for (int64_t j : power_anchor_reps(r.exp)) {
          pre.push_back({r.left, j, true});
          suf.push_back({r.left, j, false});
        }
      }
    }
    apre_ = build_trie(ctx_->fp, pre);
    asuf_ = build_trie(ctx_->fp, suf);
    index_anchor_ranks();
  }

  // Entry ids follow the construction order above.
  void index_anchor_ranks() {
    const Grammar& g = ctx_->g;
    apre_rank_.assign(g.size(), UINT32_MAX);
    asuf_rank_.assign(g.size(), UINT32_MAX);
    uint32_t id = 0;
    for (Sym a = 0; a < g.size(); ++a) {
      const Rule& r = g.rules[a];
      if (r.kind == RuleKind::Pair) {
        apre_rank_[a] = apre_.rank_of(id);
        asuf_rank_[a] = asuf_.rank_of(id);
        ++id;
      } else if (r.kind == RuleKind::Power) {
        auto reps = power_anchor_reps(r.exp);
        for (size_t i = 0; i < reps.size(); ++i) {
          if (reps[i] == 1) apre_rank_[a] = apre_.rank_of(id + uint32_t(i));
          if (reps[i] == r.exp - 1) asuf_rank_[a] = asuf_.rank_of(id + uint32_t(i));
        }
        id += uint32_t(reps.size());
      }
    }
  }

  bool anchored(Sym a, int32_t u, int32_t v) const {
    const TrieNode &nu = apre_.node(u), &nv = asuf_.node(v);
    uint32_t r1 = apre_rank_[a], r2 = asuf_rank_[a];
    return r1 >= nu.lo && r1 < nu.hi && r2 >= nv.lo && r2 < nv.hi;
  }

  QuadrupleRecord build_quadruple(const QuadKey& key) const {
    const Grammar& g = ctx_->g;
    QuadrupleRecord q;
    q.key = key;
    q.s1 = anchor_string(key.u1, key.v1);
    q.s2 = anchor_string(key.u2, key.v2);
    q.l1 = q.s1->l;
    q.l2 = q.s2->l;
    const std::string &S1 = q.s1->s, &S2 = q.s2->s;
    const int64_t n1 = int64_t(S1.size()), n2 = int64_t(S2.size());
    const PatternHandle &h1 = q.s1->h, &h2 = q.s2->h;
    if (is_periodic(S1)) q.pi1 = period(S1);

    for (Sym a = 0; a < g.size(); ++a) {
      if (g.is_leaf(a)) continue;
      const bool rel1 = anchored(a, key.u1, key.v1), rel2 = anchored(a, key.u2, key.v2);
      if (rel2) q.L.push_back(a);
      if (!occ_.occurs_in(h1, a) || !occ_.occurs_in(h2, a)) continue;
      const int64_t H = g.head_len(a);
      Pos lt2 = occ_.extremal(h2, a, OccIndex::Which::Leftmost, OccIndex::Part::Tail);
      Pos rh1 = occ_.extremal(h1, a, OccIndex::Which::Rightmost, OccIndex::Part::Head);
      if (rh1 && lt2) q.t1.push_back({*lt2 - *rh1, a});
      if (rel1 && lt2) q.t1.push_back({*lt2 - (H - q.l1), a});
      if (rel1 && rel2) q.t1.push_back({q.l1 - q.l2, a});
      if (!rel2) continue;
      const int64_t p2 = H - q.l2;
      if (p2 - n1 >= 0)
        if (Pos p = occ_.pred(h1, a, p2 - n1)) q.t1.push_back({p2 - *p, a});
      const int64_t lo = std::max<int64_t>(0, p2 - n1 + 1);
      {
        const int64_t hi = std::min(p2 - 1, p2 + n2 - n1);
        Pos f = lo <= hi ? occ_.succ(h1, a, lo) : Pos{};
        if (f && *f <= hi) {
          q.t1.push_back({p2 - *f, a});
          Pos s = occ_.succ(h1, a, *f + 1);
          if (s && *s <= hi) q.t1.push_back({p2 - *s, a});
        }
      }
      if (q.pi1) {
        const int64_t hi = std::min(p2, p2 + n2 - n1);
        Pos f = lo <= hi ? occ_.succ(h1, a, lo) : Pos{};
        if (f && *f <= hi) {
          Pos l = occ_.pred(h1, a, hi);
          if (*l + n1 - 1 >= p2 + q.pi1 - 1) {
            if ((*l - *f) % q.pi1 != 0) {
              ++q.t2_misaligned;
            } else {
              int64_t ov = p2 - *l;
              if (q.ov && *q.ov != ov) q.ov_consistent = false;
              if (!q.ov) q.ov = ov;
              q.t2.push_back({(*l - *f) / q.pi1, a, ov});
            }
          }
        }
      }
    }
    std::sort(q.t1.begin(), q.t1.end());
    std::sort(q.t2.begin(), q.t2.end());

    // S1 occurrences inside S2 around l2 - 2^k
    auto occs = Matcher(S1).find_all(S2);
    const int K = ceil_log2(std::max<int64_t>(g.N(), 2)) + 1;
    for (int k = 0; k <= K; ++k) {
      AnchorTriple t;
      t.c = q.l2 - (int64_t(1) << k);
      if (t.c >= 0) {
        // occurrences are sorted; ends are sorted too
        auto it = std::lower_bound(occs.begin(), occs.end(), t.c - n1 + 1);
        if (it != occs.begin()) t.before = *std::prev(it);
        auto jt = std::upper_bound(occs.begin(), occs.end(), t.c);
        if (it != jt) {
          t.cover_lo = *it;
          t.cover_hi = *std::prev(jt);
          t.lo_end = t.cover_lo;
          t.hi_beg = t.cover_hi;
          if (q.pi1) {
            for (auto x = it + 1; x != jt && *x == t.lo_end + q.pi1; ++x) t.lo_end = *x;
            for (auto x = std::prev(jt); x != it && *std::prev(x) == t.hi_beg - q.pi1; --x) t.hi_beg = *std::prev(x);
          }
        }
      }
      q.triples.push_back(t);
    }
    return q;
  }

  // Does an induced P1 occurrence inside S2 end up within [lo, hi]? AP x + j*step, 0 <= j <= J.
  static bool ap_hits(int64_t x, int64_t step, int64_t J, int64_t lo, int64_t hi) {
    if (J < 0 || x > hi) return false;
    int64_t j = step > 0 ? std::min(J, (hi - x) / step) : 0;
    return x + j * step >= lo;
  }

  bool included_case(const QuadrupleRecord& q, const CoHandle& h1, int64_t s1, int64_t s2, int64_t b) const {
    const std::string &S1 = q.s1->s, &S2 = q.s2->s;
    const int64_t n1 = int64_t(S1.size()), m1 = h1.m();
    const int64_t d1 = q.l1 - s1, d2 = q.l2 - s2;
    const int64_t lo = d2 - b, hi = d2;
    const int k = ceil_log2(s2);
    const int64_t c = q.l2 - (int64_t(1) << k);
    // window [max(c,0), d2]
    {
      int64_t from = std::max<int64_t>(c, 0);
      int64_t to = std::min<int64_t>(int64_t(S2.size()), d2 + m1);
      COOC_CHECK(to - from <= 2 * s2 + m1);
      if (from < to) {
        std::string_view win(S2.data() + from, size_t(to - from));
        bool hit = false;
        Matcher(h1.ph.p).scan(win, [&](int64_t x) {
          int64_t pos = from + x;
          if (pos > hi) return false;
          if (pos >= lo) hit = true;
          return !hit;
        });
        if (hit) return true;
      }
    }
    if (c < 0 || size_t(k) >= q.triples.size()) return false;
    const AnchorTriple& t = q.triples[size_t(k)];
    const int64_t pi = q.pi1;
    auto span = [&](int64_t first, int64_t last) {  // P1 occurrences induced by S1 at first..last (step pi)
      return pi ? floor_div(last + n1 - m1 - first - d1, pi) : 0;
    };
    if (t.before >= 0 && ap_hits(t.before + d1, pi, span(t.before, t.before), lo, hi)) return true;
    if (t.cover_lo >= 0) {
      if (ap_hits(t.cover_lo + d1, pi, span(t.cover_lo, t.lo_end), lo, hi)) return true;
      if (ap_hits(t.hi_beg + d1, pi, span(t.hi_beg, t.cover_hi), lo, hi)) return true;
    }
    return false;
  }

  void query_record(const QuadrupleRecord& q, const CoHandle& h1, [[maybe_unused]] const CoHandle& h2, int64_t s1, int64_t s2,
                    int64_t b, std::vector<Candidate>& out) const {
#ifndef NDEBUG
    COOC_CHECK(q.s1->s.compare(size_t(q.l1 - s1), size_t(h1.m()), h1.ph.p) == 0);
    COOC_CHECK(q.s2->s.compare(size_t(q.l2 - s2), size_t(h2.m()), h2.ph.p) == 0);
#endif
    const int64_t d1 = q.l1 - s1, d2 = q.l2 - s2, delta = d1 - d2;
    // S1 and S2 separated or overlapping at a fixed offset: T1 lookup
    auto it = std::lower_bound(q.t1.begin(), q.t1.end(), std::pair<int64_t, Sym>{delta, 0});
    for (; it != q.t1.end() && it->first <= delta + b; ++it) out.push_back({it->second, s1, s2, 'T'});
    // S1 inside S2
    if (!q.L.empty() && included_case(q, h1, s1, s2, b))
      for (Sym a : q.L) out.push_back({a, s1, s2, 'L'});
    // S1 overlapping the start of S2, periodic
    if (q.pi1 && !q.t2.empty()) {
      const int64_t n1 = int64_t(q.s1->s.size()), pi = q.pi1;
      const int64_t ell = -floor_div(n1 - h1.m() - d1, pi);
      if (q.ov_consistent) {
        const int64_t ov = *q.ov;
        const int64_t lo = std::max(ell, ceil_div(delta - ov, pi)), hi = floor_div(delta - ov + b, pi);
        if (lo <= hi) {
          auto jt = std::lower_bound(q.t2.begin(), q.t2.end(), T2Entry{lo, 0, 0});
          for (; jt != q.t2.end(); ++jt) out.push_back({jt->a, s1, s2, 'P'});
        }
      } else {
        for (auto& e : q.t2) {
          const int64_t lo = std::max(ell, ceil_div(delta - e.ov, pi)), hi = floor_div(delta - e.ov + b, pi);
          if (lo <= std::min(e.q, hi)) out.push_back({e.a, s1, s2, 'P'});
        }
      }
    }
  }

  // Non-terminals whose expansion contains h1 (and h2 if given); DFS pruned by emptiness queries.
  std::vector<Sym> nonterminals_containing(const PatternHandle& h1, const PatternHandle* h2) const {
    const Grammar& g = ctx_->g;
    std::vector<Sym> out;
    std::vector<uint8_t> seen(g.size(), 0);
    std::vector<Sym> st{g.start};
    seen[g.start] = 1;
    while (!st.empty()) {
      Sym a = st.back();
      st.pop_back();
      if (!occ_.occurs_in(h1, a) || (h2 && !occ_.occurs_in(*h2, a))) continue;
      out.push_back(a);
      const Rule& r = g.rules[a];
      if (r.kind == RuleKind::Leaf) continue;
      for (Sym c : {r.left, r.right}) {
        if (c == kNone || r.kind == RuleKind::Power) c = r.left;
        if (!seen[c]) {
          seen[c] = 1;
          st.push_back(c);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  OccIndex occ_;
  std::shared_ptr<const GrammarContext> ctx_;
  CompactTrie apre_, asuf_;
  std::vector<uint32_t> apre_rank_, asuf_rank_;
  PrunedParseTree tree_;
  std::shared_ptr<Memo> memo_ = std::make_shared<Memo>();
  std::shared_ptr<CoStats> stats_ = std::make_shared<CoStats>();
};

inline CoIndex build_co_index(std::shared_ptr<const GrammarContext> ctx) { return CoIndex(std::move(ctx)); }

}  // namespace cooc
