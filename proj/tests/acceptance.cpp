// One line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <unordered_map>

#include "common.hpp"

using namespace cooc;
using namespace testutil;

namespace {

// pinned tolerances
constexpr double kCh = 2.0;  // height <= kCh * log2(N) + kC0
constexpr double kC0 = 4.0;
constexpr double kCp = 1.0;  // points created by one non-terminal <= kCp * g' * (log2 g' + 1)^2
constexpr double kBuildLimit = 60.0, kQueryLimit = 10.0, kCorpusLimit = 300.0;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;
};
Verdict verdict[11];
int failures = 0;

void report(int k, const std::string& name) {
  Verdict& v = verdict[k];
  std::printf("criterion %2d %s  %s: %s\n", k, v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

// shared shape checks (criteria 5 and 6)
int64_t height_violations = 0, expansion_mismatches = 0, grammars_seen = 0;
double worst_height_slack = 1e9;
double worst_point_ratio = 0, worst_creator_ratio = 0;

void shape(const Grammar& g, const std::string* text, const OccIndex& occ) {
  ++grammars_seen;
  if (text && expand(g) != *text) ++expansion_mismatches;
  const double lg = std::log2(double(g.N()));
  const double slack = kCh * lg + kC0 - double(g.height());
  worst_height_slack = std::min(worst_height_slack, slack);
  if (slack < 0) ++height_violations;
  const double gs = double(g.size()), l2 = std::pow(std::log2(gs) + 1, 2);
  worst_point_ratio = std::max(worst_point_ratio, double(occ.point_stats().total) / (gs * l2));
  worst_creator_ratio = std::max(worst_creator_ratio, double(occ.point_stats().max_created) / (gs * l2));
}

std::string pick_pattern(std::mt19937_64& rng, const std::string& t, int sigma) {
  int l = 1 + int(rng() % 12);
  if (l <= int(t.size()) && rng() % 5 != 0) return t.substr(rng() % (t.size() - size_t(l) + 1), size_t(l));
  return random_text(rng, l, sigma + 1);
}

// ---- criteria 1, 2, 10 (and shape data) ----
void corpus_queries() {
  std::mt19937_64 rng(20241);
  const int kTexts = 520, kPairs = 12;
  int64_t checks = 0, bad1 = 0, bad2 = 0, inner = 0, dups = 0;
  auto t0 = Clock::now();
  for (int i = 0; i < kTexts; ++i) {
    int len = i < 20 ? 1 + i : 1 + int(rng() % 2000);
    int sigma = 1 + int(rng() % 4);
    std::string t = random_text(rng, len, sigma);
    Built b = index_text(t, rng());
    shape(b.ctx->g, &t, b.co->occ());
    const OccIndex& occ = b.co->occ();
    for (int k = 0; k < kPairs; ++k) {
      std::string p1 = pick_pattern(rng, t, sigma), p2;
      if (k < 3) {
        size_t a = rng() % p1.size();
        p2 = p1.substr(a, 1 + rng() % (p1.size() - a));
      } else {
        p2 = pick_pattern(rng, t, sigma);
      }
      inner += p1.find(p2) != std::string::npos;
      for (int64_t bb : {int64_t(0), int64_t(1), int64_t(2), int64_t(5), int64_t(len)}) {
        ++checks;
        if (b.co->query_close(p1, p2, bb) != oracle::naive_b_close(t, p1, p2, bb)) {
          if (bad1++ < 3) std::printf("  mismatch: len=%d p1=%s p2=%s b=%lld\n", len, p1.c_str(), p2.c_str(), (long long)bb);
        }
      }
      if (occ.report_co_occurrences(occ.preprocess_pattern(p1), occ.preprocess_pattern(p2)) !=
          oracle::naive_co_occurrences(t, p1, p2))
        ++bad2;
    }
    dups += b.co->stats().duplicates;
  }
  double secs = since(t0);
  verdict[1].pass = bad1 == 0 && secs < kCorpusLimit && inner >= kTexts * 3;
  verdict[1].detail = fmt("%d texts, %lld checks (%lld inner pairs), %lld mismatches, %.1f s (limit %.0f s)", kTexts,
                          (long long)checks, (long long)inner, (long long)bad1, secs, kCorpusLimit);
  verdict[2].pass = bad2 == 0;
  verdict[2].detail = fmt("%lld pattern pairs, %lld mismatches", (long long)(kTexts * kPairs), (long long)bad2);
  verdict[10].pass = dups == 0;
  verdict[10].detail = fmt("%lld duplicates suppressed over criterion 1", (long long)dups);
}

// ---- criteria 3, 4 ----
void small_grammars() {
  std::mt19937_64 rng(777);
  const int kGrammars = 120;
  int64_t prim = 0, bad3 = 0, split_checks = 0, bad4 = 0, mode_checks = 0, bad_mode = 0;
  for (int i = 0; i < kGrammars; ++i) {
    std::string t = random_text(rng, 1 + int(rng() % 300), 1 + int(rng() % 4));
    const uint64_t seed = rng();
    auto rc = recompress(t, seed);
    auto ctx = make_context(rc.g, &rc.scheme, seed);
    CoIndex ci(ctx);
    auto bctx = make_context(rc.g, &rc.scheme, seed);
    bctx->mode = SplitMode::Broad;
    CoIndex broad(bctx);
    const OccIndex& occ = ci.occ();
    const Grammar& g = ci.grammar();
    shape(g, &t, occ);
    std::vector<std::string> pats;
    for (int k = 0; k < 8; ++k) pats.push_back(pick_pattern(rng, t, 4));
    for (auto& p : pats) {
      auto fast = compute_splits(ctx->tables, ctx->scheme, p, SplitMode::Fast);
      auto nat = oracle::naive_splits(g, p);
      for (int64_t s : nat) {
        ++split_checks;
        if (fast.absent || !std::binary_search(fast.splits.begin(), fast.splits.end(), s)) ++bad4;
      }
      PatternHandle h = occ.preprocess_pattern(p);
      for (Sym a = 0; a < g.size(); ++a) {
        auto all = oracle::naive_occurrences_in(g, a, p);
        prim += 2;
        bad3 += occ.occurs_in(h, a) != !all.empty();
        std::vector<int64_t> rel;
        for (auto& r : oracle::naive_relevant(g, a, p)) rel.push_back(r.q);
        bad3 += occ.relevant_occurrences(h, a) != rel;
        using W = OccIndex::Which;
        using P = OccIndex::Part;
        Pos w[2], hd[2], tl[2];
        const int64_t H = g.is_leaf(a) ? 0 : g.head_len(a);
        for (int64_t q : all) {
          if (!w[0]) w[0] = q;
          w[1] = q;
          if (q + h.m() <= H) {
            if (!hd[0]) hd[0] = q;
            hd[1] = q;
          }
          if (!g.is_leaf(a) && q >= H) {
            if (!tl[0]) tl[0] = q;
            tl[1] = q;
          }
        }
        for (int j = 0; j < 2; ++j) {
          W which = j ? W::Rightmost : W::Leftmost;
          prim += 1;
          bad3 += occ.extremal(h, a, which, P::Whole) != w[j];
          if (!g.is_leaf(a)) {
            prim += 2;
            bad3 += occ.extremal(h, a, which, P::Head) != hd[j];
            bad3 += occ.extremal(h, a, which, P::Tail) != tl[j];
          }
        }
        for (int64_t q = 0; q < g.len[a]; ++q) {
          prim += 2;
          bad3 += occ.pred_succ(h, a, q, OccIndex::Dir::Pred) != oracle::naive_pred(all, q);
          bad3 += occ.pred_succ(h, a, q, OccIndex::Dir::Succ) != oracle::naive_succ(all, q);
        }
      }
    }
    for (size_t x = 0; x < pats.size(); ++x)
      for (int64_t bb : {int64_t(0), int64_t(2), int64_t(5), int64_t(t.size())}) {
        const std::string& p1 = pats[x];
        const std::string& p2 = pats[(x + 1) % pats.size()];
        ++mode_checks;
        bad_mode += ci.query_close(p1, p2, bb) != broad.query_close(p1, p2, bb);
      }
  }
  verdict[3].pass = bad3 == 0;
  verdict[3].detail = fmt("%d grammars, %lld primitive answers, %lld mismatches", kGrammars, (long long)prim, (long long)bad3);
  verdict[4].pass = bad4 == 0 && bad_mode == 0;
  verdict[4].detail = fmt("%lld oracle splits, %lld missing from fast mode; %lld fast/broad query pairs, %lld differ",
                          (long long)split_checks, (long long)bad4, (long long)mode_checks, (long long)bad_mode);
}

// ---- criteria 5, 6, 7 ----
void scaling() {
  std::vector<std::string> rows;
  for (int64_t n : {int64_t(10), int64_t(100), int64_t(1000), int64_t(10000), int64_t(100000), int64_t(1000000)}) {
    for (int kind = 0; kind < 2; ++kind) {
      std::string t = kind ? thue_morse(n) : fibonacci_word(n);
      auto t0 = Clock::now();
      Built b = index_text(t, 1);
      double build = since(t0);
      shape(b.ctx->g, &t, b.co->occ());
      if (n == 1000000)
        rows.push_back(fmt("%s h=%u g'=%zu build %.2fs", kind ? "thue-morse" : "fibonacci", b.ctx->g.height(),
                           b.ctx->g.size(), build));
      if (kind == 0 && n == 1000000) {
        std::mt19937_64 rng(99);
        double qs = 0;
        int64_t bad = 0, out = 0;
        const std::string text = expand(b.ctx->g);
        for (int i = 0; i < 100; ++i) {
          auto sub = [&] {
            int64_t l = 1 + int64_t(rng() % 12);
            return t.substr(rng() % uint64_t(n - l + 1), size_t(l));
          };
          std::string p1 = sub(), p2 = i % 10 == 0 ? random_text(rng, 3, 3) : sub();
          int64_t bb = int64_t(rng() % 64);
          auto q0 = Clock::now();
          auto got = b.co->query_close(p1, p2, bb);
          qs += since(q0);
          out += int64_t(got.size());
          bad += got != oracle::naive_b_close(text, p1, p2, bb);
        }
        verdict[7].pass = build < kBuildLimit && qs < kQueryLimit && bad == 0;
        verdict[7].detail = fmt("N=1e6 build %.2f s (limit %.0f), 100 queries %.2f s (limit %.0f), %lld pairs reported, %lld mismatches",
                                build, kBuildLimit, qs, kQueryLimit, (long long)out, (long long)bad);
      }
    }
  }
  verdict[5].pass = height_violations == 0 && expansion_mismatches == 0;
  verdict[5].detail = fmt("C_h=%.1f C0=%.1f over %lld grammars: %lld height violations (min slack %.2f), %lld expansion mismatches; %s; %s",
                          kCh, kC0, (long long)grammars_seen, (long long)height_violations, worst_height_slack,
                          (long long)expansion_mismatches, rows[0].c_str(), rows[1].c_str());
  verdict[6].pass = worst_creator_ratio <= kCp;
  verdict[6].detail = fmt("C_p=%.2f; max points created by one non-terminal/(g'(log2 g'+1)^2) = %.3f over %lld grammars (all points of the index/(g'(log2 g'+1)^2) peaks at %.3f)",
                          kCp, worst_creator_ratio, (long long)grammars_seen, worst_point_ratio);
}

// ---- criterion 8 ----
void fingerprints() {
  std::mt19937_64 rng(8080);
  int64_t probes = 0, bad = 0, sets = 0, collisions = 0, prefixes = 0;
  while (probes < 10000) {
    std::string t = random_text(rng, 1 + int(rng() % 1500), 1 + int(rng() % 4));
    auto rc = recompress(t, rng());
    auto ctx = make_context(rc.g, &rc.scheme, rng());
    const Grammar& g = ctx->g;
    for (int k = 0; k < 500; ++k, ++probes) {
      Sym a = Sym(rng() % g.size());
      Side side = rng() % 2 ? Side::Prefix : Side::Suffix;
      bool rev = rng() % 2;
      int64_t l = int64_t(rng() % uint64_t(g.len[a] + 1));
      std::string x = extract_affix(g, a, side, l);
      if (rev) std::reverse(x.begin(), x.end());
      Fingerprint f = fp_affix(ctx->fp, a, side, rev, l);
      bad += f.phi != fp_direct_phi(ctx->fp.field(), x) || f.len != l;
    }
    // every prefix of every indexed string: equal (length, phi) must mean equal strings
    const Field& fd = ctx->fp.field();
    std::unordered_map<uint64_t, std::string> seen;
    for (auto& e : indexed_strings(g)) {
      std::string s = materialize(g, e);
      uint64_t phi = 0, rk = 1;
      for (size_t d = 0; d < s.size(); ++d) {
        phi = fd.add(phi, fd.mul(uint64_t((unsigned char)s[d]) + 1, rk));
        rk = fd.mul(rk, fd.r());
        uint64_t key = phi * 1000003u ^ d;
        auto [it, fresh] = seen.try_emplace(key, s.substr(0, d + 1));
        ++prefixes;
        if (!fresh && it->second != std::string_view(s).substr(0, d + 1)) ++collisions;
      }
    }
    ++sets;
    if (!ctx->params.verified) ++collisions;
  }
  verdict[8].pass = bad == 0 && collisions == 0;
  verdict[8].detail = fmt("%lld affix probes, %lld mismatches; %lld verified parameter sets, %lld prefixes, %lld collisions",
                          (long long)probes, (long long)bad, (long long)sets, (long long)prefixes, (long long)collisions);
}

// ---- criterion 9 ----
void fine_wilf() {
  std::mt19937_64 rng(909);
  int64_t inst = 0, bad = 0, tries = 0;
  while (inst < 10000 && tries < 5000000) {
    ++tries;
    std::string y = random_text(rng, 1 + int(rng() % 10), 1 + int(rng() % 3));
    // X built around a period of Y so that dense occurrences are common
    int64_t pi = period(y);
    std::string x;
    size_t target = y.size() + rng() % (y.size() + 1);
    size_t start = rng() % size_t(pi);
    while (x.size() < target) x += y[(start + x.size()) % size_t(pi)];
    if (rng() % 4 == 0) x[rng() % x.size()] = char('a' + rng() % 3);
    if (x.size() > 2 * y.size()) continue;
    auto occ = oracle::naive_occurrences(x, y);
    if (occ.size() < 3) continue;
    ++inst;
    for (size_t i = 1; i < occ.size(); ++i) bad += occ[i] - occ[i - 1] != pi;
  }
  verdict[9].pass = inst >= 10000 && bad == 0;
  verdict[9].detail = fmt("%lld instances with >= 3 occurrences, %lld gaps differ from period(Y)", (long long)inst, (long long)bad);
}

}  // namespace

int main() {
  fine_wilf();
  report(9, "fine-wilf progressions");
  fingerprints();
  report(8, "fingerprint integrity");
  small_grammars();
  report(3, "occurrence primitives");
  report(4, "split soundness");
  corpus_queries();
  report(1, "differential query_close");
  report(2, "all co-occurrences");
  report(10, "reporting uniqueness");
  scaling();
  report(5, "grammar height");
  report(6, "point count");
  report(7, "fibonacci 1e6");
  std::printf("%d of 10 criteria failed\n", failures);
  return failures ? 1 : 0;
}
