#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace cooc {

using Point = std::pair<int64_t, int64_t>;

// Pareto maxima: x strictly increasing, y strictly decreasing.
struct Staircase {
  std::vector<Point> frontier;
  bool empty() const { return frontier.empty(); }
};

// Frontier of a sorted range [first, last) of points (sorted by x, then y).
template <class It>
void append_frontier(It first, It last, std::vector<Point>& out) {
  size_t base = out.size();
  for (It it = last; it != first;) {
    --it;
    if (out.size() == base || it->second > out.back().second) {
      if (out.size() > base && out.back().first == it->first) continue;
      out.push_back(*it);
    }
  }
  std::reverse(out.begin() + std::ptrdiff_t(base), out.end());
}

inline Staircase build_staircase(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  Staircase s;
  append_frontier(pts.begin(), pts.end(), s.frontier);
  return s;
}

// Is there a point with x >= alpha and y >= beta in the frontier slice [first, last)?
inline bool dominant_exists(const Point* first, const Point* last, int64_t alpha, int64_t beta) {
  const Point* it = std::lower_bound(first, last, alpha, [](const Point& p, int64_t a) { return p.first < a; });
  return it != last && it->second >= beta;
}

inline bool dominant_exists(const Staircase& s, int64_t alpha, int64_t beta) {
  return dominant_exists(s.frontier.data(), s.frontier.data() + s.frontier.size(), alpha, beta);
}

}  // namespace cooc
