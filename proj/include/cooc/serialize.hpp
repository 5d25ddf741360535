#pragma once

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "cooc/coindex.hpp"

namespace cooc {

inline constexpr char kIndexMagic[8] = {'C', 'O', 'O', 'C', 'I', 'D', 'X', '1'};
inline constexpr uint32_t kIndexVersion = 1;

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

class ByteWriter {
 public:
  template <class T>
    requires std::is_trivially_copyable_v<T>
  void put(const T& v) {
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  template <class T>
  void put_vec(const std::vector<T>& v) {
    put<uint64_t>(v.size());
    if constexpr (std::is_trivially_copyable_v<T>) {
      buf_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
    } else {
      for (auto& x : v) put(x);
    }
  }
  void put_str(std::string_view s) {
    put<uint64_t>(s.size());
    buf_.append(s);
  }
  std::string& data() { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view s) : s_(s) {}

  template <class T>
    requires std::is_trivially_copyable_v<T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  template <class T>
  std::vector<T> get_vec() {
    uint64_t n = get<uint64_t>();
    if (n > s_.size()) fail("vector length");
    std::vector<T> v(n);
    if constexpr (std::is_trivially_copyable_v<T>) {
      need(n * sizeof(T));
      std::memcpy(v.data(), s_.data() + pos_, n * sizeof(T));
      pos_ += n * sizeof(T);
    }
    return v;
  }
  std::string get_str() {
    uint64_t n = get<uint64_t>();
    need(n);
    std::string out(s_.substr(pos_, n));
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  [[noreturn]] static void fail(const char* what) { throw Error(Errc::BadIndexFile, std::string("truncated ") + what); }
  void need(uint64_t n) {
    if (n > s_.size() - pos_) fail("section");
  }
  std::string_view s_;
  size_t pos_ = 0;
};

namespace detail {

// field by field, so padding never reaches the file
inline void put_trie(ByteWriter& w, const CompactTrie& t) {
  w.put<uint64_t>(t.entries().size());
  for (auto& e : t.entries()) {
    w.put(e.str.sym);
    w.put(e.str.reps);
    w.put<uint8_t>(e.str.reversed);
    w.put(e.len);
    w.put(e.id);
  }
  w.put_vec(t.lcp());
}

inline CompactTrie get_trie(ByteReader& r, const GrammarFingerprints& gf) {
  uint64_t n = r.get<uint64_t>();
  std::vector<TrieEntry> out;
  for (uint64_t i = 0; i < n; ++i) {
    TrieEntry e;
    e.str.sym = r.get<Sym>();
    e.str.reps = r.get<int64_t>();
    e.str.reversed = r.get<uint8_t>() != 0;
    e.len = r.get<int64_t>();
    e.id = r.get<uint32_t>();
    if (e.str.sym >= gf.grammar().size() || e.id >= n) throw Error(Errc::BadIndexFile, "trie entry out of range");
    out.push_back(e);
  }
  auto lcp = r.get_vec<int64_t>();
  if (lcp.size() != n) throw Error(Errc::BadIndexFile, "trie arrays disagree");
  return CompactTrie::from_sorted(gf, std::move(out), std::move(lcp));
}

inline void put_nodes(ByteWriter& w, const std::vector<PrunedNode>& ns) {
  w.put<uint64_t>(ns.size());
  for (auto& n : ns) {
    w.put(n.label);
    w.put(n.reps);
    w.put<uint8_t>(uint8_t(n.rest) | uint8_t(n.internal << 1));
    w.put(n.parent);
    w.put(n.next);
    w.put(n.anc);
    w.put(n.off);
  }
}

inline std::vector<PrunedNode> get_nodes(ByteReader& r) {
  uint64_t n = r.get<uint64_t>();
  std::vector<PrunedNode> out;
  for (uint64_t i = 0; i < n; ++i) {
    PrunedNode x;
    x.label = r.get<Sym>();
    x.reps = r.get<int64_t>();
    uint8_t f = r.get<uint8_t>();
    x.rest = f & 1;
    x.internal = f & 2;
    x.parent = r.get<int32_t>();
    x.next = r.get<int32_t>();
    x.anc = r.get<int32_t>();
    x.off = r.get<int64_t>();
    auto bad = [&](int32_t v) { return v < -1 || v >= int64_t(n); };
    if (bad(x.parent) || bad(x.next) || bad(x.anc)) throw Error(Errc::BadIndexFile, "pruned tree link out of range");
    out.push_back(x);
  }
  return out;
}

}  // namespace detail

struct LoadedIndex {
  std::shared_ptr<GrammarContext> ctx;
  std::unique_ptr<CoIndex> co;
};

enum Section : uint32_t { kGrammar = 1, kParams = 2, kOcc = 3, kCo = 4, kQuads = 5 };

inline void write_index(std::ostream& os, const CoIndex& ci, bool with_quads = true) {
  const GrammarContext& ctx = ci.context();
  auto section = [&](uint32_t tag, std::string& payload) {
    os.write(reinterpret_cast<const char*>(&tag), 4);
    uint64_t n = payload.size(), h = fnv1a64(payload);
    os.write(reinterpret_cast<const char*>(&n), 8);
    os.write(payload.data(), std::streamsize(n));
    os.write(reinterpret_cast<const char*>(&h), 8);
  };
  os.write(kIndexMagic, 8);
  os.write(reinterpret_cast<const char*>(&kIndexVersion), 4);
  {
    std::ostringstream gs;
    std::vector<std::string> meta;
    if (ctx.has_scheme) meta = ctx.scheme.to_meta();
    write_grammar(gs, ctx.g, meta);
    ByteWriter w;
    w.put_str(gs.str());
    section(kGrammar, w.data());
  }
  {
    ByteWriter w;
    w.put(ctx.params.params.p);
    w.put(ctx.params.params.r);
    w.put<int32_t>(ctx.params.attempts);
    w.put<uint8_t>(ctx.params.verified);
    w.put<int64_t>(ctx.params.prefixes_checked);
    w.put<uint8_t>(uint8_t(ctx.mode));
    section(kParams, w.data());
  }
  {
    ByteWriter w;
    const OccIndex& occ = ci.occ();
    detail::put_trie(w, occ.tpre());
    detail::put_trie(w, occ.tsuf());
    auto t = occ.tables();
    w.put_vec(t.reach);
    w.put_vec(t.alpha);
    w.put_vec(t.keys);
    w.put_vec(t.key_off);
    std::vector<int64_t> flat;
    for (auto [x, y] : t.frontier) {
      flat.push_back(x);
      flat.push_back(y);
    }
    w.put_vec(flat);
    w.put(t.stats);
    section(kOcc, w.data());
  }
  {
    ByteWriter w;
    detail::put_trie(w, ci.anchor_pre());
    detail::put_trie(w, ci.anchor_suf());
    detail::put_nodes(w, ci.tree().nodes());
    w.put_vec(ci.tree().firsts());
    w.put_vec(ci.tree().multiplicities());
    section(kCo, w.data());
  }
  if (with_quads) {
    ByteWriter w;
    std::vector<QuadKey> keys;
    for (auto& q : ci.memoized()) keys.push_back(q->key);
    std::sort(keys.begin(), keys.end());
    w.put_vec(keys);
    section(kQuads, w.data());
  }
  if (!os) throw Error(Errc::IO, "write failed");
}

inline LoadedIndex read_index(std::istream& is) {
  std::string all((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  ByteReader top(all);
  char magic[8];
  for (char& c : magic) c = top.get<char>();
  if (std::memcmp(magic, kIndexMagic, 8) != 0) throw Error(Errc::BadIndexFile, "bad magic");
  uint32_t ver = top.get<uint32_t>();
  if (ver != kIndexVersion) throw Error(Errc::BadIndexFile, "unsupported version " + std::to_string(ver));
  std::map<uint32_t, std::string> secs;
  while (!top.done()) {
    uint32_t tag = top.get<uint32_t>();
    uint64_t n = top.get<uint64_t>();
    if (n > all.size()) throw Error(Errc::BadIndexFile, "section length exceeds file size");
    std::string payload;
    payload.resize(n);
    for (auto& c : payload) c = top.get<char>();
    if (top.get<uint64_t>() != fnv1a64(payload))
      throw Error(Errc::BadIndexFile, "checksum mismatch in section " + std::to_string(tag));
    secs[tag] = std::move(payload);
  }
  for (uint32_t tag : {kGrammar, kParams, kOcc, kCo})
    if (!secs.count(tag)) throw Error(Errc::BadIndexFile, "missing section " + std::to_string(tag));

  LoadedIndex out;
  GrammarFile gf;
  {
    ByteReader r(secs[kGrammar]);
    std::istringstream gs(r.get_str());
    gf = read_grammar(gs);
  }
  LevelScheme scheme;
  bool has = LevelScheme::from_meta(gf.meta, scheme);
  ParamChoice pc;
  SplitMode mode;
  {
    ByteReader r(secs[kParams]);
    pc.params.p = r.get<uint64_t>();
    pc.params.r = r.get<uint64_t>();
    pc.attempts = r.get<int32_t>();
    pc.verified = r.get<uint8_t>() != 0;
    pc.prefixes_checked = r.get<int64_t>();
    mode = SplitMode(r.get<uint8_t>());
  }
  out.ctx = make_context(std::move(gf.g), has ? &scheme : nullptr, pc.params, pc);
  out.ctx->mode = mode;
  std::shared_ptr<const GrammarContext> cctx = out.ctx;
  OccIndex occ;
  {
    ByteReader r(secs[kOcc]);
    CompactTrie tp = detail::get_trie(r, cctx->fp), ts = detail::get_trie(r, cctx->fp);
    OccIndex::Tables t;
    t.reach = r.get_vec<uint64_t>();
    t.alpha = r.get_vec<std::array<uint64_t, 4>>();
    t.keys = r.get_vec<uint64_t>();
    t.key_off = r.get_vec<uint32_t>();
    auto flat = r.get_vec<int64_t>();
    if (flat.size() % 2) throw Error(Errc::BadIndexFile, "odd frontier array");
    for (size_t i = 0; i < flat.size(); i += 2) t.frontier.push_back({flat[i], flat[i + 1]});
    t.stats = r.get<PointStats>();
    const size_t n = cctx->g.size();
    if (t.reach.size() != n * ((n + 63) / 64) || t.alpha.size() != n || t.key_off.size() != t.keys.size() + 1 ||
        (t.key_off.back() != t.frontier.size()))
      throw Error(Errc::BadIndexFile, "occurrence tables disagree with the grammar");
    occ = OccIndex(cctx, std::move(tp), std::move(ts), std::move(t));
  }
  {
    ByteReader r(secs[kCo]);
    CompactTrie ap = detail::get_trie(r, cctx->fp), as = detail::get_trie(r, cctx->fp);
    auto nodes = detail::get_nodes(r);
    auto first = r.get_vec<int32_t>();
    auto mult = r.get_vec<uint8_t>();
    out.co = std::make_unique<CoIndex>(std::move(occ), std::move(ap), std::move(as),
                                       PrunedParseTree::from_parts(std::move(nodes), std::move(first), std::move(mult)));
  }
  if (secs.count(kQuads)) {
    ByteReader r(secs[kQuads]);
    for (auto& k : r.get_vec<QuadKey>()) {
      if (k.u1 < 0 || k.u2 < 0 || size_t(std::max(k.u1, k.u2)) >= out.co->anchor_pre().node_count() || k.v1 < 0 ||
          k.v2 < 0 || size_t(std::max(k.v1, k.v2)) >= out.co->anchor_suf().node_count())
        throw Error(Errc::BadIndexFile, "quadruple key out of range");
      out.co->materialize_quadruple(k);
    }
  }
  return out;
}

inline void save_index(const std::string& path, const CoIndex& ci, bool with_quads = true) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::IO, "cannot open " + path);
  write_index(os, ci, with_quads);
}

inline LoadedIndex load_index(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::IO, "cannot open " + path);
  return read_index(is);
}

}  // namespace cooc
