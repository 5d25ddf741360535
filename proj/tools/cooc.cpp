#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "cooc/cooc.hpp"

using namespace cooc;

namespace {

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IO, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Grammar file -> context over an RLSLP. SLP inputs are recompressed.
std::shared_ptr<GrammarContext> context_from_grammar(const std::string& path, uint64_t seed, bool broad) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IO, "cannot open " + path);
  GrammarFile gf = read_grammar(in);
  LevelScheme scheme;
  std::shared_ptr<GrammarContext> ctx;
  if (gf.g.kind == GrammarKind::SLP) {
    auto rc = to_rlslp(gf.g, seed);
    ctx = make_context(std::move(rc.g), &rc.scheme, seed);
  } else {
    bool has = LevelScheme::from_meta(gf.meta, scheme);
    ctx = make_context(std::move(gf.g), has ? &scheme : nullptr, seed);
  }
  if (broad) ctx->mode = SplitMode::Broad;
  return ctx;
}

int cmd_build(const std::string& input, const std::string& out, bool rlslp, uint64_t seed) {
  std::string text = read_file(input);
  Grammar slp = build_slp(text);
  std::ofstream os(out);
  if (!os) throw Error(Errc::IO, "cannot open " + out);
  if (rlslp) {
    auto rc = recompress(text, seed);
    write_grammar(os, rc.g, rc.scheme.to_meta());
    std::cerr << "g=" << slp.size() << " g'=" << rc.g.size() << " N=" << rc.g.N() << " height=" << rc.g.height()
              << " log2N=" << std::log2(double(rc.g.N())) << "\n";
  } else {
    write_grammar(os, slp);
    std::cerr << "g=" << slp.size() << " N=" << slp.N() << " height=" << slp.height() << "\n";
  }
  if (!os) throw Error(Errc::IO, "write failed: " + out);
  return 0;
}

int cmd_index(const std::string& input, const std::string& out, std::optional<int64_t> eager, uint64_t seed,
              bool broad) {
  auto t0 = Clock::now();
  auto ctx = context_from_grammar(input, seed, broad);
  CoIndex ci(ctx);
  if (eager) ci.materialize_all(*eager);
  save_index(out, ci, true);
  const auto& ps = ci.occ().point_stats();
  std::cerr << "g'=" << ctx->g.size() << " N=" << ctx->g.N() << " height=" << ctx->g.height()
            << " points=" << ps.total << " frontier=" << ps.frontier << " r=" << ctx->params.params.r
            << " attempts=" << ctx->params.attempts << " verified=" << ctx->params.verified
            << " quadruples=" << ci.memo_size() << " seconds=" << seconds_since(t0) << "\n";
  return 0;
}

int cmd_query(const std::string& index, std::string p1, std::string p2, const std::string& p1_file,
              const std::string& p2_file, std::optional<int64_t> b, bool all) {
  if (!p1_file.empty()) p1 = read_file(p1_file);
  if (!p2_file.empty()) p2 = read_file(p2_file);
  if (b.has_value() == all) throw CLI::ValidationError("exactly one of --b and --all is required");
  LoadedIndex li = load_index(index);
  std::vector<CoOcc> res;
  if (all) {
    if (p1.empty() || p2.empty()) throw Error(Errc::EmptyPattern, "empty pattern");
    const OccIndex& occ = li.co->occ();
    res = occ.report_co_occurrences(occ.preprocess_pattern(p1), occ.preprocess_pattern(p2));
  } else {
    res = li.co->query_close(p1, p2, *b);
  }
  std::string buf;
  for (auto [q1, q2] : res) {
    buf += std::to_string(q1);
    buf += '\t';
    buf += std::to_string(q2);
    buf += '\n';
  }
  std::cout << buf;
  return 0;
}

// ---- selftest ----

struct Case {
  std::string text, p1, p2;
  int64_t b;
};

std::ostream& operator<<(std::ostream& os, const Case& c) {
  auto q = [](const std::string& s) {
    std::string o = "\"";
    for (unsigned char ch : s) o += (ch >= 32 && ch < 127 && ch != '"' && ch != '\\') ? std::string(1, char(ch)) : "\\x" + std::to_string(ch);
    return o + "\"";
  };
  return os << "text=" << q(c.text) << " p1=" << q(c.p1) << " p2=" << q(c.p2) << " b=" << c.b;
}

// First disagreement with the oracle, or empty.
std::string check_case(const Case& c, uint64_t seed, bool fault) {
  std::ostringstream why;
  auto rc = recompress(c.text, seed);
  if (expand(rc.g) != c.text) return "expansion differs";
  auto ctx = make_context(rc.g, &rc.scheme, seed);
  CoIndex ci(ctx);
  const Grammar& g = ci.grammar();
  const OccIndex& occ = ci.occ();
  for (const std::string* p : {&c.p1, &c.p2}) {
    auto fast = compute_splits(ctx->tables, ctx->scheme, *p, SplitMode::Fast);
    auto nat = oracle::naive_splits(g, *p);
    if (!fast.absent)
      for (int64_t s : nat)
        if (!std::binary_search(fast.splits.begin(), fast.splits.end(), s)) return "split " + std::to_string(s) + " missing";
    if (fast.absent && !nat.empty()) return "absence certificate with relevant splits";
    PatternHandle h = occ.preprocess_pattern(*p);
    for (Sym a = 0; a < g.size(); ++a) {
      auto on = oracle::naive_occurrences_in(g, a, *p);
      if (occ.occurs_in(h, a) != !on.empty()) return "occurs_in differs at symbol " + std::to_string(a);
      if (p->size() >= 2) {
        std::vector<int64_t> rel;
        for (auto& r : oracle::naive_relevant(g, a, *p)) rel.push_back(r.q);
        if (occ.relevant_occurrences(h, a) != rel) return "relevant occurrences differ at symbol " + std::to_string(a);
      }
      Pos lm = on.empty() ? Pos{} : Pos(on.front()), rm = on.empty() ? Pos{} : Pos(on.back());
      if (occ.leftmost(h, a) != lm || occ.rightmost(h, a) != rm) return "extremal differs at symbol " + std::to_string(a);
    }
    auto all = oracle::naive_occurrences(c.text, *p);
    if (c.text.size() <= 300)
      for (int64_t q = 0; q < int64_t(c.text.size()); ++q)
        if (occ.pred(h, g.start, q) != oracle::naive_pred(all, q) || occ.succ(h, g.start, q) != oracle::naive_succ(all, q))
          return "pred/succ differs at " + std::to_string(q);
  }
  auto h1 = occ.preprocess_pattern(c.p1), h2 = occ.preprocess_pattern(c.p2);
  if (occ.report_co_occurrences(h1, h2) != oracle::naive_co_occurrences(c.text, c.p1, c.p2))
    return "report_co_occurrences differs";
  auto got = ci.query_close(c.p1, c.p2, c.b);
  if (fault && !got.empty()) got.pop_back();
  if (got != oracle::naive_b_close(c.text, c.p1, c.p2, c.b)) return "query_close differs";
  auto broad_ctx = make_context(rc.g, &rc.scheme, seed);
  broad_ctx->mode = SplitMode::Broad;
  if (CoIndex(broad_ctx).query_close(c.p1, c.p2, c.b) != ci.query_close(c.p1, c.p2, c.b))
    return "fast and broad modes differ";
  if (ci.stats().duplicates != 0) return "duplicate co-occurrences suppressed";
  std::ostringstream ss;
  write_index(ss, ci);
  std::istringstream in(ss.str());
  LoadedIndex li = read_index(in);
  if (li.co->query_close(c.p1, c.p2, c.b) != ci.query_close(c.p1, c.p2, c.b)) return "round trip changes the answer";
  return {};
}

// Greedy single-character deletions while the case still fails.
Case minimize(Case c, uint64_t seed, bool fault) {
  auto fails = [&](const Case& x) {
    if (x.text.empty() || x.p1.empty() || x.p2.empty()) return false;
    try {
      return !check_case(x, seed, fault).empty();
    } catch (const std::exception&) {
      return true;
    }
  };
  for (bool progress = true; progress;) {
    progress = false;
    for (std::string Case::*f : {&Case::text, &Case::p1, &Case::p2})
      for (size_t i = 0; i < (c.*f).size();) {
        Case y = c;
        (y.*f).erase(i, 1);
        if (fails(y)) {
          c = y;
          progress = true;
        } else {
          ++i;
        }
      }
    for (int64_t nb : {int64_t(0), c.b / 2})
      if (nb < c.b) {
        Case y = c;
        y.b = nb;
        if (fails(y)) {
          c = y;
          progress = true;
        }
      }
  }
  return c;
}

int cmd_selftest(int n, int maxlen, uint64_t seed, bool fault) {
  std::mt19937_64 rng(seed);
  auto t0 = Clock::now();
  for (int i = 0; i < n; ++i) {
    Case c;
    const int len = 1 + int(rng() % uint64_t(std::max(1, maxlen)));
    const int sigma = 1 + int(rng() % 4);
    for (int j = 0; j < len; ++j) c.text += char('a' + rng() % uint64_t(sigma));
    auto pick = [&] {
      std::string p;
      int l = 1 + int(rng() % 12);
      if (rng() % 4 != 0) {
        l = std::min(l, len);
        p = c.text.substr(rng() % uint64_t(len - l + 1), size_t(l));
      } else {
        for (int j = 0; j < l; ++j) p += char('a' + rng() % uint64_t(sigma + 1));
      }
      return p;
    };
    c.p1 = pick();
    if (rng() % 5 == 0) {
      size_t a = rng() % c.p1.size();
      c.p2 = c.p1.substr(a, 1 + rng() % (c.p1.size() - a));
    } else {
      c.p2 = pick();
    }
    const int64_t bs[] = {0, 1, 2, 5, int64_t(len)};
    c.b = bs[rng() % 5];
    std::string err;
    try {
      err = check_case(c, seed + uint64_t(i), fault);
    } catch (const std::exception& e) {
      err = std::string("exception: ") + e.what();
    }
    if (!err.empty()) {
      std::cout << "FAIL case " << i << ": " << err << "\n  " << c << "\n";
      Case m = minimize(c, seed + uint64_t(i), fault);
      std::cout << "minimized: " << m << "\n";
      return 1;
    }
  }
  std::cout << "selftest ok: " << n << " cases in " << seconds_since(t0) << " s\n";
  return 0;
}

// ---- bench ----

std::string make_text(const std::string& kind, int64_t n, uint64_t seed) {
  std::string t;
  if (kind == "fib") {
    std::string a = "a", b = "ab";
    while (int64_t(b.size()) < n) {
      std::string c = b + a;
      a = std::move(b);
      b = std::move(c);
    }
    t = b.substr(0, size_t(n));
  } else if (kind == "thue") {
    for (int64_t i = 0; i < n; ++i) t += (std::popcount(uint64_t(i)) & 1) ? 'b' : 'a';
  } else if (kind == "random") {
    std::mt19937_64 rng(seed);
    for (int64_t i = 0; i < n; ++i) t += char('a' + rng() % 4);
  } else {
    throw CLI::ValidationError("unknown text kind " + kind);
  }
  return t;
}

int cmd_bench(const std::string& kind, int64_t n, int queries, uint64_t seed, bool verify) {
  std::string text = make_text(kind, n, seed);
  auto t0 = Clock::now();
  auto rc = recompress(text, seed);
  auto ctx = make_context(rc.g, &rc.scheme, seed);
  CoIndex ci(ctx);
  double build = seconds_since(t0);
  const auto& ps = ci.occ().point_stats();
  std::cout << "kind=" << kind << " N=" << n << " g'=" << rc.g.size() << " height=" << rc.g.height()
            << " points=" << ps.total << " frontier=" << ps.frontier << " build_s=" << build << "\n";
  std::mt19937_64 rng(seed + 1);
  double qs = 0;
  int64_t out = 0, bad = 0;
  for (int i = 0; i < queries; ++i) {
    auto pick = [&] {
      int64_t l = 1 + int64_t(rng() % 12);
      l = std::min(l, n);
      return text.substr(rng() % uint64_t(n - l + 1), size_t(l));
    };
    std::string p1 = pick(), p2 = pick();
    int64_t b = int64_t(rng() % 32);
    auto t1 = Clock::now();
    auto r = ci.query_close(p1, p2, b);
    qs += seconds_since(t1);
    out += int64_t(r.size());
    if (verify && r != oracle::naive_b_close(text, p1, p2, b)) ++bad;
  }
  std::cout << "queries=" << queries << " query_s=" << qs << " reported=" << out << " mismatches=" << bad << "\n";
  return bad ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"co-occurrence queries over grammar-compressed text"};
  app.require_subcommand(1);

  std::string in, out, p1, p2, p1_file, p2_file, kind = "fib";
  bool rlslp = false, all = false, broad = false, fault = false, verify = false;
  uint64_t seed = 1;
  int64_t b = 0, n = 100000;
  int cases = 200, maxlen = 200, queries = 100;
  std::optional<int64_t> eager;

  auto* build = app.add_subcommand("build", "compress a text file into a grammar");
  build->add_option("input", in, "text file")->required();
  build->add_option("output", out, "grammar file")->required();
  build->add_flag("--rlslp", rlslp, "write a run-length grammar with its level scheme");
  build->add_option("--seed", seed);

  auto* index = app.add_subcommand("index", "build and serialize the index of a grammar");
  index->add_option("grammar", in)->required();
  index->add_option("output", out)->required();
  auto* eager_opt = index->add_option("--eager", eager, "materialize all quadruples, up to this many")
                        ->expected(0, 1)
                        ->default_str("4096");
  index->add_option("--seed", seed);
  index->add_flag("--broad", broad, "use every split instead of the replayed split set");

  auto* query = app.add_subcommand("query", "report co-occurrences");
  query->add_option("index", in)->required();
  query->add_option("p1", p1);
  query->add_option("p2", p2);
  query->add_option("--p1-file", p1_file);
  query->add_option("--p2-file", p2_file);
  auto* b_opt = query->add_option("--b", b, "distance bound");
  query->add_flag("--all", all, "all co-occurrences, no distance bound");

  auto* selftest = app.add_subcommand("selftest", "differential test against brute force");
  selftest->add_option("--n", cases);
  selftest->add_option("--maxlen", maxlen);
  selftest->add_option("--seed", seed);
  selftest->add_flag("--inject-fault", fault, "drop one reported pair (harness check)");

  auto* bench = app.add_subcommand("bench", "build and query timings");
  bench->add_option("--kind", kind, "fib | thue | random");
  bench->add_option("--n", n);
  bench->add_option("--queries", queries);
  bench->add_option("--seed", seed);
  bench->add_flag("--verify", verify, "compare every answer with brute force");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*build) return cmd_build(in, out, rlslp, seed);
    if (*index) {
      if (eager_opt->count() > 0 && !eager) eager = 4096;
      return cmd_index(in, out, eager_opt->count() ? eager : std::nullopt, seed, broad);
    }
    if (*query) return cmd_query(in, p1, p2, p1_file, p2_file, b_opt->count() ? std::optional(b) : std::nullopt, all);
    if (*selftest) return cmd_selftest(cases, maxlen, seed, fault);
    if (*bench) return cmd_bench(kind, n, queries, seed, verify);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    switch (e.code) {
      case Errc::IO:
      case Errc::Parse:
      case Errc::BadIndexFile:
      case Errc::EmptyPattern:
      case Errc::NegativeBound:
      case Errc::EmptyText:
        return 2;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
