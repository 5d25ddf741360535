#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace cooc {

// KMP failure function: f[i] = length of the longest proper border of x[0..i].
inline std::vector<int64_t> failure_function(std::string_view x) {
  std::vector<int64_t> f(x.size(), 0);
  int64_t k = 0;
  for (size_t i = 1; i < x.size(); ++i) {
    while (k > 0 && x[i] != x[size_t(k)]) k = f[size_t(k) - 1];
    if (x[i] == x[size_t(k)]) ++k;
    f[i] = k;
  }
  return f;
}

// Smallest period of a non-empty string.
inline int64_t period(std::string_view x) {
  if (x.empty()) return 0;
  return int64_t(x.size()) - failure_function(x).back();
}

inline bool is_periodic(std::string_view x) { return !x.empty() && 2 * period(x) <= int64_t(x.size()); }

class Matcher {
 public:
  explicit Matcher(std::string_view p) : p_(p), f_(failure_function(p)) {}

  // Calls on_match(q) for each occurrence in increasing order; stops when it returns false.
  template <class Fn>
  void scan(std::string_view t, Fn&& on_match) const {
    if (p_.empty() || t.size() < p_.size()) return;
    int64_t k = 0;
    const int64_t m = int64_t(p_.size());
    for (size_t i = 0; i < t.size(); ++i) {
      while (k > 0 && t[i] != p_[size_t(k)]) k = f_[size_t(k) - 1];
      if (t[i] == p_[size_t(k)]) ++k;
      if (k == m) {
        if (!on_match(int64_t(i) + 1 - m)) return;
        k = f_[size_t(k) - 1];
      }
    }
  }

  std::vector<int64_t> find_all(std::string_view t) const {
    std::vector<int64_t> out;
    scan(t, [&](int64_t q) { out.push_back(q); return true; });
    return out;
  }

  int64_t find_first(std::string_view t) const {
    int64_t r = -1;
    scan(t, [&](int64_t q) { r = q; return false; });
    return r;
  }

  int64_t find_last(std::string_view t) const {
    int64_t r = -1;
    scan(t, [&](int64_t q) { r = q; return true; });
    return r;
  }

 private:
  std::string_view p_;
  std::vector<int64_t> f_;
};

}  // namespace cooc
