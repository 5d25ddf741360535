#pragma once

// Brute-force reference answers. Deliberately literal.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cooc/grammar.hpp"
#include "cooc/strings.hpp"

namespace cooc {


namespace oracle {

inline std::vector<int64_t> naive_occurrences(std::string_view t, std::string_view p) {
  if (p.empty()) throw Error(Errc::EmptyPattern, "empty pattern");
  std::vector<int64_t> out;
  if (p.size() > t.size()) return out;
  for (size_t i = 0; i + p.size() <= t.size(); ++i)
    if (t.compare(i, p.size(), p) == 0) out.push_back(int64_t(i));
  return out;
}

inline std::vector<CoOcc> naive_co_occurrences(std::string_view t, std::string_view p1, std::string_view p2) {
  auto o1 = naive_occurrences(t, p1);
  auto o2 = naive_occurrences(t, p2);
  std::vector<CoOcc> out;
  // for each q2, q1 is the last P1 occurrence <= q2; then check no P2 occurrence in [q1, q2)
  size_t i = 0;
  for (size_t j = 0; j < o2.size(); ++j) {
    int64_t q2 = o2[j];
    while (i < o1.size() && o1[i] <= q2) ++i;
    if (i == 0) continue;
    int64_t q1 = o1[i - 1];
    if (j > 0 && o2[j - 1] >= q1) continue;
    out.push_back({q1, q2});
  }
  return out;
}

inline std::vector<CoOcc> naive_b_close(std::string_view t, std::string_view p1, std::string_view p2, int64_t b) {
  if (b < 0) throw Error(Errc::NegativeBound, "negative bound");
  std::vector<CoOcc> out;
  for (auto& c : naive_co_occurrences(t, p1, p2))
    if (c.second - c.first <= b) out.push_back(c);
  return out;
}

struct RelevantOcc {
  int64_t q;
  int64_t s;
  bool operator==(const RelevantOcc&) const = default;
};

// Relevant occurrences of p in <a>: q < |head| <= q+|p|-1, split s = |head| - q.
inline std::vector<RelevantOcc> naive_relevant(const Grammar& g, Sym a, std::string_view p) {
  std::vector<RelevantOcc> out;
  if (g.is_leaf(a) || int64_t(p.size()) > g.len[a]) return out;
  std::string x = expand(g, a);
  int64_t h = g.head_len(a), m = int64_t(p.size());
  for (int64_t q : naive_occurrences(x, p))
    if (q < h && h <= q + m - 1) out.push_back({q, h - q});
  return out;
}

// Relevant occurrences of a co-occurrence pair: q1 < |head| <= q2+|p2|-1.
inline std::vector<CoOcc> naive_relevant_co(const Grammar& g, Sym a, std::string_view p1, std::string_view p2) {
  std::vector<CoOcc> out;
  if (g.is_leaf(a)) return out;
  std::string x = expand(g, a);
  int64_t h = g.head_len(a), m2 = int64_t(p2.size());
  for (auto& c : naive_co_occurrences(x, p1, p2))
    if (c.first < h && h <= c.second + m2 - 1) out.push_back(c);
  return out;
}

// Splits'(G,P), including the reversed clause for power rules.
inline std::set<int64_t> naive_splits(const Grammar& g, std::string_view p) {
  std::set<int64_t> out;
  int64_t m = int64_t(p.size());
  for (Sym a = 0; a < g.size(); ++a) {
    if (g.is_leaf(a) || m > g.len[a]) continue;
    for (auto& r : naive_relevant(g, a, p)) out.insert(r.s);
    const Rule& r = g.rules[a];
    if (r.kind == RuleKind::Power) {
      int64_t last = (r.exp - 1) * g.len[r.left];
      std::string x = expand(g, a);
      for (int64_t q : naive_occurrences(x, p))
        if (q < last && last <= q + m - 1) out.insert(last - q);
    }
  }
  return out;
}

// Occurrences of p in <a> restricted to [lo, hi) windows of <a>.
inline std::vector<int64_t> naive_occurrences_in(const Grammar& g, Sym a, std::string_view p) {
  return naive_occurrences(expand(g, a), p);
}

inline std::optional<int64_t> naive_pred(const std::vector<int64_t>& occ, int64_t pos) {
  auto it = std::upper_bound(occ.begin(), occ.end(), pos);
  if (it == occ.begin()) return std::nullopt;
  return *std::prev(it);
}

inline std::optional<int64_t> naive_succ(const std::vector<int64_t>& occ, int64_t pos) {
  auto it = std::lower_bound(occ.begin(), occ.end(), pos);
  if (it == occ.end()) return std::nullopt;
  return *it;
}

}  // namespace oracle
}  // namespace cooc
