#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cooc/fingerprint.hpp"
#include "cooc/grammar.hpp"

namespace cooc {

struct TrieEntry {
  ImplicitString str;
  int64_t len = 0;
  uint32_t id = 0;  // position in the caller's entry list
  bool operator==(const TrieEntry&) const = default;
};

struct TrieNode {
  uint32_t lo = 0, hi = 0;  // I(u) over entry ranks
  int64_t depth = 0;        // |label|
  int32_t parent = -1;
  uint32_t hp = 0;
};

struct Locus {
  uint32_t lo = 0, hi = 0;
  bool found = false;
  int32_t node = -1;
  bool contains(uint32_t rank) const { return found && rank >= lo && rank < hi; }
};

struct PathStop {
  uint32_t hp;
  int32_t node;  // lowest node on that heavy path containing the leaf
};

class CompactTrie {
 public:
  static constexpr int64_t kDirect = 64;

  CompactTrie() = default;

  static CompactTrie build(const GrammarFingerprints& gf, const std::vector<ImplicitString>& strs) {
    CompactTrie t;
    t.gf_ = &gf;
    std::vector<TrieEntry> es;
    es.reserve(strs.size());
    for (size_t i = 0; i < strs.size(); ++i) es.push_back({strs[i], length_of(gf.grammar(), strs[i]), uint32_t(i)});
    std::vector<uint64_t> key(es.size());
    for (size_t i = 0; i < es.size(); ++i) key[es[i].id] = t.key8(es[i]);
    std::sort(es.begin(), es.end(), [&](const TrieEntry& a, const TrieEntry& b) {
      if (a.len >= 8 && b.len >= 8 && key[a.id] != key[b.id]) return key[a.id] < key[b.id];
      int c = t.compare_entries(a, b);
      return c != 0 ? c < 0 : a.id < b.id;
    });
    std::vector<int64_t> lcp(es.size(), 0);
    for (size_t i = 1; i < es.size(); ++i) lcp[i] = t.lcp_entries(es[i - 1], es[i]);
    t.assemble(std::move(es), std::move(lcp));
    return t;
  }

  // Rebuilds nodes from a sorted entry table and its adjacent-LCP array.
  static CompactTrie from_sorted(const GrammarFingerprints& gf, std::vector<TrieEntry> es, std::vector<int64_t> lcp) {
    CompactTrie t;
    t.gf_ = &gf;
    t.assemble(std::move(es), std::move(lcp));
    return t;
  }

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<TrieEntry>& entries() const { return entries_; }
  const std::vector<int64_t>& lcp() const { return lcp_; }
  const TrieEntry& entry(uint32_t rank) const { return entries_[rank]; }
  uint32_t rank_of(uint32_t id) const { return rank_of_id_[id]; }
  size_t node_count() const { return nodes_.size(); }
  const TrieNode& node(int32_t u) const { return nodes_[size_t(u)]; }
  int32_t root() const { return root_; }
  int32_t leaf_node(uint32_t rank) const { return leaf_[rank]; }
  uint32_t hp_of(int32_t u) const { return nodes_[size_t(u)].hp; }
  int64_t depth(int32_t u) const { return nodes_[size_t(u)].depth; }
  uint32_t hp_count() const { return hp_count_; }

  std::span<const PathStop> path_stops(uint32_t rank) const {
    return {stops_.data() + stop_off_[rank], stops_.data() + stop_off_[rank + 1]};
  }

  int32_t node_of_interval(uint32_t lo, uint32_t hi) const {
    auto it = by_interval_.find((uint64_t(lo) << 32) | hi);
    return it == by_interval_.end() ? -1 : it->second;
  }

  // label of node u
  std::string label(int32_t u) const {
    const TrieNode& n = node(u);
    return materialize(gf_->grammar(), entries_[n.lo].str, 0, n.depth);
  }

  // Locus of P[off..] (pf holds the prefix fingerprints of P).
  Locus locus(std::string_view p, const StringFingerprints& pf, int64_t off) const {
    Locus L;
    if (entries_.empty()) return L;
    const int64_t ql = int64_t(p.size()) - off;
    if (ql == 0) {
      L.lo = 0;
      L.hi = uint32_t(entries_.size());
      L.found = true;
      L.node = root_;
      return L;
    }
    std::string_view q = p.substr(size_t(off));
    // -1: entry sorts before every string prefixed by q, 0: prefixed by q, +1: after
    auto side = [&](const TrieEntry& e) {
      int64_t l = lcp_query(e, q, pf, off);
      if (l == ql) return 0;
      if (l == e.len) return -1;
      uint8_t ec = char_at(gf_->grammar(), e.str, l);
      return ec < uint8_t(q[size_t(l)]) ? -1 : 1;
    };
    size_t lo = 0, hi = entries_.size();
    while (lo < hi) {  // first entry with side >= 0
      size_t mid = (lo + hi) / 2;
      if (side(entries_[mid]) < 0) lo = mid + 1;
      else hi = mid;
    }
    size_t first = lo;
    hi = entries_.size();
    while (lo < hi) {  // first entry with side > 0
      size_t mid = (lo + hi) / 2;
      if (side(entries_[mid]) <= 0) lo = mid + 1;
      else hi = mid;
    }
    if (first < lo) {
      L.lo = uint32_t(first);
      L.hi = uint32_t(lo);
      L.found = true;
      L.node = node_of_interval(L.lo, L.hi);
    }
    return L;
  }

  std::vector<Locus> batch_locus(std::string_view p, const StringFingerprints& pf,
                                 const std::vector<int64_t>& offsets) const {
    std::vector<Locus> out;
    out.reserve(offsets.size());
    for (int64_t off : offsets) out.push_back(locus(p, pf, off));
    return out;
  }

  std::vector<Locus> batch_locus(std::string_view p, const std::vector<int64_t>& offsets) const {
    StringFingerprints pf(gf_->field(), p);
    return batch_locus(p, pf, offsets);
  }

  // ---- comparisons ----

  int64_t lcp_entries(const TrieEntry& a, const TrieEntry& b) const {
    int64_t lim = std::min(a.len, b.len);
    int64_t d = std::min(lim, kDirect);
    const Grammar& g = gf_->grammar();
    std::string x = materialize(g, a.str, 0, d), y = materialize(g, b.str, 0, d);
    for (int64_t i = 0; i < d; ++i)
      if (x[size_t(i)] != y[size_t(i)]) return i;
    if (d == lim) return lim;
    auto eq = [&](int64_t l) { return gf_->prefix(a.str, l).phi == gf_->prefix(b.str, l).phi; };
    if (eq(lim)) return lim;
    int64_t lo = d, hi = lim - 1;  // eq(lo) holds, eq(hi+1) fails
    while (lo < hi) {
      int64_t mid = lo + (hi - lo + 1) / 2;
      if (eq(mid)) lo = mid;
      else hi = mid - 1;
    }
    return lo;
  }

  int compare_entries(const TrieEntry& a, const TrieEntry& b) const {
    int64_t l = lcp_entries(a, b);
    if (l == a.len || l == b.len) return a.len < b.len ? -1 : (a.len > b.len ? 1 : 0);
    const Grammar& g = gf_->grammar();
    uint8_t x = char_at(g, a.str, l), y = char_at(g, b.str, l);
    return x < y ? -1 : 1;
  }

  int64_t lcp_query(const TrieEntry& e, std::string_view q, const StringFingerprints& pf, int64_t off) const {
    int64_t lim = std::min(e.len, int64_t(q.size()));
    int64_t d = std::min(lim, kDirect);
    std::string x = materialize(gf_->grammar(), e.str, 0, d);
    for (int64_t i = 0; i < d; ++i)
      if (x[size_t(i)] != q[size_t(i)]) return i;
    if (d == lim) return lim;
    auto eq = [&](int64_t l) { return gf_->prefix(e.str, l).phi == pf.sub(off, l).phi; };
    if (eq(lim)) return lim;
    int64_t lo = d, hi = lim - 1;
    while (lo < hi) {
      int64_t mid = lo + (hi - lo + 1) / 2;
      if (eq(mid)) lo = mid;
      else hi = mid - 1;
    }
    return lo;
  }

  const GrammarFingerprints& fingerprints() const { return *gf_; }
  void rebind(const GrammarFingerprints& gf) { gf_ = &gf; }

 private:
  uint64_t key8(const TrieEntry& e) const {
    std::string s = materialize(gf_->grammar(), e.str, 0, std::min<int64_t>(e.len, 8));
    uint64_t k = 0;
    for (size_t i = 0; i < 8; ++i) k = (k << 8) | (i < s.size() ? uint8_t(s[i]) : 0);
    return k;
  }

  void assemble(std::vector<TrieEntry> es, std::vector<int64_t> lcp) {
    entries_ = std::move(es);
    lcp_ = std::move(lcp);
    const size_t n = entries_.size();
    rank_of_id_.assign(n, 0);
    for (size_t r = 0; r < n; ++r) rank_of_id_[entries_[r].id] = uint32_t(r);
    nodes_.clear();
    leaf_.assign(n, -1);
    by_interval_.clear();
    root_ = -1;
    if (n == 0) {
      stop_off_.assign(1, 0);
      return;
    }
    std::vector<std::vector<int32_t>> kids;
    auto make = [&](uint32_t lo, uint32_t hi, int64_t depth, std::vector<int32_t> ch) {
      int32_t id = int32_t(nodes_.size());
      nodes_.push_back({lo, hi, depth, -1, 0});
      for (int32_t c : ch) nodes_[size_t(c)].parent = id;
      kids.push_back(std::move(ch));
      return id;
    };
    struct Frame {
      int64_t depth;
      uint32_t lo;
      std::vector<int32_t> kids;
    };
    std::vector<Frame> st;
    for (size_t i = 0; i < n; ++i) {
      int32_t child = make(uint32_t(i), uint32_t(i + 1), entries_[i].len, {});
      leaf_[i] = child;
      uint32_t child_lo = uint32_t(i);
      bool last = i + 1 == n;
      int64_t dn = last ? -1 : lcp_[i + 1];
      while (!st.empty() && st.back().depth > dn) {
        Frame f = std::move(st.back());
        st.pop_back();
        f.kids.push_back(child);
        child = make(f.lo, uint32_t(i + 1), f.depth, std::move(f.kids));
        child_lo = f.lo;
      }
      if (last) {
        root_ = child;
        break;
      }
      if (st.empty() || st.back().depth < dn) st.push_back({dn, child_lo, {child}});
      else st.back().kids.push_back(child);
    }
    for (size_t u = 0; u < nodes_.size(); ++u)
      by_interval_.emplace((uint64_t(nodes_[u].lo) << 32) | nodes_[u].hi, int32_t(u));
    // heavy paths: child with most leaves, ties to the smaller interval start
    hp_count_ = 1;
    std::vector<int32_t> dfs{root_};
    nodes_[size_t(root_)].hp = 0;
    while (!dfs.empty()) {
      int32_t u = dfs.back();
      dfs.pop_back();
      auto& ch = kids[size_t(u)];
      int32_t heavy = -1;
      uint32_t best = 0;
      for (int32_t c : ch) {
        uint32_t w = nodes_[size_t(c)].hi - nodes_[size_t(c)].lo;
        if (w > best) best = w, heavy = c;
      }
      for (auto it = ch.rbegin(); it != ch.rend(); ++it) dfs.push_back(*it);
      for (int32_t c : ch) nodes_[size_t(c)].hp = c == heavy ? nodes_[size_t(u)].hp : 0;
      for (int32_t c : ch)
        if (c != heavy) nodes_[size_t(c)].hp = hp_count_++;
    }
    stop_off_.assign(n + 1, 0);
    stops_.clear();
    for (size_t r = 0; r < n; ++r) {
      stop_off_[r] = uint32_t(stops_.size());
      int32_t u = leaf_[r];
      stops_.push_back({nodes_[size_t(u)].hp, u});
      for (int32_t p = nodes_[size_t(u)].parent; p >= 0; u = p, p = nodes_[size_t(p)].parent)
        if (nodes_[size_t(p)].hp != nodes_[size_t(u)].hp) stops_.push_back({nodes_[size_t(p)].hp, p});
    }
    stop_off_[n] = uint32_t(stops_.size());
  }

  const GrammarFingerprints* gf_ = nullptr;
  std::vector<TrieEntry> entries_;
  std::vector<int64_t> lcp_;
  std::vector<uint32_t> rank_of_id_;
  std::vector<TrieNode> nodes_;
  std::vector<int32_t> leaf_;
  int32_t root_ = -1;
  uint32_t hp_count_ = 0;
  std::unordered_map<uint64_t, int32_t> by_interval_;
  std::vector<uint32_t> stop_off_;
  std::vector<PathStop> stops_;
};

inline CompactTrie build_trie(const GrammarFingerprints& gf, const std::vector<ImplicitString>& strs) {
  return CompactTrie::build(gf, strs);
}

}  // namespace cooc
