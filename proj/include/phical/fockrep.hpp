#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ratexpr.hpp"
#include "report.hpp"
#include "vec.hpp"

namespace phical {

enum class Gen { Beta = 0, Gamma = 1 };

inline const char* gen_name(Gen g) { return g == Gen::Beta ? "beta" : "gamma"; }

struct SystemKind {
  enum class Tag { Trig, Rat };
  Tag tag = Tag::Rat;
  QValue q;

  std::string tag_name() const { return tag == Tag::Trig ? "trig" : "rat"; }
  static Tag parse_tag(const std::string& s) {
    if (s == "trig") return Tag::Trig;
    if (s == "rat") return Tag::Rat;
    throw PolicyError("unknown system '" + s + "'");
  }
};

struct ExpansionCoeffs {
  std::vector<Scalar> lambda, lambda_prime;  // (t-q)/(qt-1) and its reciprocal in t
  std::vector<Scalar> mu, mu_prime;          // (e^u-q)/(qe^u-1) and its reciprocal in u
  int order = 0;
};

namespace detail {

// q as a scalar: the symbol, or the specialization folded in before any expansion.
inline Scalar qscalar(const QValue& q) {
  if (!q.symbolic && q.value == 0) throw PolicyError("q must be nonzero");
  return q.scalar();
}

inline std::vector<Scalar> series_coeffs(const LaurentSeries& s, int order) {
  std::vector<Scalar> out;
  for (int k = 0; k < order; ++k) out.push_back(s.coeff(k));
  return out;
}

// a e^u + b, known below u^hi.
inline LaurentSeries exp_affine(const Scalar& a, const Scalar& b, int hi) {
  LaurentSeries s("u", 0, hi);
  for (int k = 0; k < hi; ++k) s.set(k, a * Scalar(1 / factorial(k)) + (k == 0 ? b : Scalar()));
  return s;
}

}  // namespace detail

enum class CoeffFamily { Both, Lambda, Mu };

// iota_{z,x} of (x-qz)/(qx-z) and (qx-z)/(x-qz), and the Taylor series of (e^u-q)/(qe^u-1) and its reciprocal.
// A rational q is substituted before expanding.
inline ExpansionCoeffs expansion_coeffs(const SystemKind& kind, int order, CoeffFamily fam = CoeffFamily::Both) {
  const Scalar q = detail::qscalar(kind.q);
  ExpansionCoeffs c;
  c.order = order;
  if (fam != CoeffFamily::Mu) {
    const int ix = var_index("x"), iz = var_index("z");
    const MPoly x = MPoly::variable(ix), z = MPoly::variable(iz);
    const MPoly a = x - z.scaled(q), b = x.scaled(q) - z;
    const WindowTable<Scalar> L = iota_expand(RationalExpr(a, b), "z", "x", order);
    const WindowTable<Scalar> Lp = iota_expand(RationalExpr(b, a), "z", "x", order);
    for (int k = 0; k < order; ++k) {
      c.lambda.push_back(L.get({-k, k}));
      c.lambda_prime.push_back(Lp.get({-k, k}));
    }
  }
  if (fam == CoeffFamily::Lambda) return c;
  const int hi = order + 4;
  const LaurentSeries n = detail::exp_affine(Scalar(1), -q, hi), d = detail::exp_affine(q, Scalar(-1), hi);
  const LaurentSeries m = series_quotient(n, d, order), mp = series_quotient(d, n, order);
  c.mu = detail::series_coeffs(m, order);
  c.mu_prime = detail::series_coeffs(mp, order);
  return c;
}

// Evaluate symbolic coefficients at q0; poles are reported, not repaired.
inline ExpansionCoeffs evaluate_coeffs(const ExpansionCoeffs& c, const Rational& q0) {
  ExpansionCoeffs r;
  r.order = c.order;
  auto ev = [&](const std::vector<Scalar>& v) {
    std::vector<Scalar> out;
    for (const auto& s : v) out.push_back(Scalar(s.eval(q0)));
    return out;
  };
  r.lambda = ev(c.lambda);
  r.lambda_prime = ev(c.lambda_prime);
  r.mu = ev(c.mu);
  r.mu_prime = ev(c.mu_prime);
  return r;
}

struct TruncPolicy {
  int depth_bound = 2;
  int mode_floor = -4;
  int correction_order = 8;

  static TruncPolicy make(int depth, int floor) { return {depth, floor, depth * -floor}; }
  Json to_json() const { return Json{{"depth", depth_bound}, {"floor", mode_floor}, {"K", correction_order}}; }
};

// Normal-ordered monomial: beta block then gamma block, applied right to left to the vacuum.
using Letter = std::pair<int, int>;  // (generator, mode)
using Word = std::vector<Letter>;
using ModuleState = Vec<Word>;

inline std::string word_str(const Word& m) {
  if (m.empty()) return "1";
  std::string s;
  for (const auto& [g, n] : m) {
    if (!s.empty()) s += " ";
    s += (g == 0 ? "b" : "g") + std::to_string(n);
  }
  return s;
}

inline Word parse_word(const std::string& s) {
  Word m;
  if (s == "1") return m;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    if (tok.size() < 2 || (tok[0] != 'b' && tok[0] != 'g')) throw ParseError("bad monomial letter '" + tok + "'", 0);
    m.emplace_back(tok[0] == 'b' ? 0 : 1, std::stoi(tok.substr(1)));
  }
  return m;
}

inline std::string state_str(const ModuleState& s) {
  if (s.is_zero()) return "0";
  std::string out;
  for (const auto& [m, c] : s.terms) {
    if (!out.empty()) out += " + ";
    out += "(" + c.str() + ")*[" + word_str(m) + "]";
  }
  return out;
}
inline std::string value_str(const ModuleState& s) { return state_str(s); }

inline Json state_to_json(const ModuleState& s) {
  Json j = Json::array();
  for (const auto& [m, c] : s.terms) j.push_back(Json::array({word_str(m), c.str()}));
  return j;
}
inline ModuleState state_from_json(const Json& j) {
  ModuleState s;
  for (const auto& t : j) s.add(parse_word(t.at(0).get<std::string>()), Scalar::parse(t.at(1).get<std::string>()));
  return s;
}

// Vacuum module of one of the two quantum beta-gamma systems, realized as a memoized normal-ordering engine.
// The rewrite is exact on vacuum-generated states; the policy bounds which monomials form the desk basis.
class BgModule {
 public:
  BgModule(SystemKind kind, TruncPolicy policy) : kind_(std::move(kind)), policy_(policy), memo_(std::make_shared<Memo>()) {
    if (policy.depth_bound < 0) throw PolicyError("depth bound must be nonnegative");
    if (policy.mode_floor > -1) throw PolicyError("mode floor must be at most -1");
    if (policy.correction_order < policy.depth_bound * -policy.mode_floor)
      throw PolicyError("correction order " + std::to_string(policy.correction_order) + " is below depth*|floor| = " +
                        std::to_string(policy.depth_bound * -policy.mode_floor));
    detail::qscalar(kind_.q);
    ensure(2);
    const bool trig = kind_.tag == SystemKind::Tag::Trig;
    const std::vector<Scalar>& c = trig ? co_.lambda : co_.mu;
    const Scalar one_minus = Scalar(1) - c[0];
    if (one_minus.is_zero()) {
      gap_ = 0;
    } else if (trig && (Scalar(1) - c[1] - c[0] * c[0]).is_zero()) {
      gap_ = 1;
    } else {
      gap_ = trig ? 2 : 1;
    }
  }

  const SystemKind& kind() const { return kind_; }
  const TruncPolicy& policy() const { return policy_; }
  bool trig() const { return kind_.tag == SystemKind::Tag::Trig; }
  // Minimal spacing of modes inside a generator block of a canonical monomial.
  int gap() const { return gap_; }
  // Delta offset: beta_m gamma_n relations carry delta_{m+n+shift,0}.
  int delta_shift() const { return trig() ? 2 : 1; }

  ModuleState vacuum() const { return ModuleState(Word{}); }

  // Modes at or above this bound annihilate every monomial of the state.
  int annihilation_bound(const Word& m) const {
    if (trig()) {
      int d = 0;
      for (const auto& [g, n] : m) d += n + 1;
      return -d;
    }
    int lo = 0;
    for (const auto& [g, n] : m) lo = std::min(lo, n);
    return -lo;
  }
  int annihilation_bound(const ModuleState& s) const {
    int b = 0;
    for (const auto& [m, c] : s.terms) b = std::max(b, annihilation_bound(m));
    return b;
  }

  bool canonical(const Word& m) const {
    for (size_t i = 0; i + 1 < m.size(); ++i) {
      if (m[i].first > m[i + 1].first) return false;
      if (m[i].first == m[i + 1].first && m[i + 1].second - m[i].second < gap_) return false;
    }
    return true;
  }
  bool in_bounds(const Word& m) const {
    if (static_cast<int>(m.size()) > policy_.depth_bound) return false;
    for (const auto& [g, n] : m)
      if (n < policy_.mode_floor || n > -1) return false;
    return true;
  }

  // Canonical monomials within the policy, ordered by depth then lexicographically.
  std::vector<Word> basis() const {
    std::vector<Word> out{Word{}};
    std::vector<Word> layer{Word{}};
    for (int d = 1; d <= policy_.depth_bound; ++d) {
      std::vector<Word> next;
      for (const auto& m : layer)
        for (int g = 0; g < 2; ++g)
          for (int n = policy_.mode_floor; n <= -1; ++n) {
            Word e = m;
            e.emplace_back(g, n);
            if (canonical(e)) next.push_back(e);
          }
      std::sort(next.begin(), next.end());
      out.insert(out.end(), next.begin(), next.end());
      layer = std::move(next);
    }
    return out;
  }

  // Unchecked action of a mode on a monomial.
  ModuleState act(int g, int n, const Word& m) const {
    const Key key{g, n, m};
    {
      std::lock_guard<std::mutex> lk(memo_->mu);
      auto it = memo_->table.find(key);
      if (it != memo_->table.end()) return it->second;
    }
    ModuleState r = trig() ? act_trig(g, n, m) : act_rat(g, n, m);
    std::lock_guard<std::mutex> lk(memo_->mu);
    return memo_->table.emplace(key, std::move(r)).first->second;
  }
  ModuleState act(int g, int n, const ModuleState& s) const {
    ModuleState out;
    for (const auto& [m, c] : s.terms) out.add(act(g, n, m), c);
    return out;
  }

  // Expansion coefficient sequences, extended on demand.
  Scalar lam(int k) const { return coeff(&ExpansionCoeffs::lambda, k); }
  Scalar lamp(int k) const { return coeff(&ExpansionCoeffs::lambda_prime, k); }
  Scalar mu(int k) const { return coeff(&ExpansionCoeffs::mu, k); }
  Scalar mup(int k) const { return coeff(&ExpansionCoeffs::mu_prime, k); }

  size_t memo_size() const {
    std::lock_guard<std::mutex> lk(memo_->mu);
    return memo_->table.size();
  }

  Json to_cache_json() const {
    Json j;
    j["format"] = "phical-qbg";
    j["kind"] = kind_.tag_name();
    j["q"] = kind_.q.str();
    j["policy"] = policy_.to_json();
    Json b = Json::array();
    for (const auto& m : basis()) b.push_back(word_str(m));
    j["basis"] = b;
    Json a = Json::array();
    std::lock_guard<std::mutex> lk(memo_->mu);
    for (const auto& [k, v] : memo_->table)
      a.push_back(Json::array({std::get<0>(k), std::get<1>(k), word_str(std::get<2>(k)), state_to_json(v)}));
    j["action"] = a;
    return j;
  }

  void preload(int g, int n, const Word& m, ModuleState s) const {
    std::lock_guard<std::mutex> lk(memo_->mu);
    memo_->table[Key{g, n, m}] = std::move(s);
  }

  std::vector<std::tuple<int, int, Word, ModuleState>> memo_entries() const {
    std::lock_guard<std::mutex> lk(memo_->mu);
    std::vector<std::tuple<int, int, Word, ModuleState>> out;
    for (const auto& [k, v] : memo_->table) out.emplace_back(std::get<0>(k), std::get<1>(k), std::get<2>(k), v);
    return out;
  }

 private:
  using Key = std::tuple<int, int, Word>;
  struct Memo {
    mutable std::mutex mu;
    std::map<Key, ModuleState> table;
    std::mutex co_mu;
  };

  SystemKind kind_;
  TruncPolicy policy_;
  std::shared_ptr<Memo> memo_;
  mutable ExpansionCoeffs co_;
  int gap_ = 1;

  void ensure(int k) const {
    if (k < co_.order) return;
    co_ = expansion_coeffs(kind_, std::max(2 * k, 16), trig() ? CoeffFamily::Lambda : CoeffFamily::Mu);
  }
  Scalar coeff(std::vector<Scalar> ExpansionCoeffs::*field, int k) const {
    std::lock_guard<std::mutex> lk(memo_->co_mu);
    ensure(k + 1);
    return (co_.*field)[k];
  }

  static ModuleState prepend(int g, int n, const Word& m) {
    Word e;
    e.reserve(m.size() + 1);
    e.emplace_back(g, n);
    e.insert(e.end(), m.begin(), m.end());
    return ModuleState(e);
  }

  // binom(k,i) (-1)^i c_k
  Scalar pair_coeff(int k, int i, bool prime) const {
    Scalar c = prime ? mup(k) : mu(k);
    if (c.is_zero()) return c;
    Rational b = binom(k, i);
    if (i % 2) b = -b;
    return c * Scalar(b);
  }

  // sum_{k,i} binom(k,i)(-1)^i c_k X_gl(ml+i) X_gr(nr+k-i) rest, over the terms that can survive on rest.
  ModuleState pairsum(int gl, int gr, int ml, int nr, const Word& rest, bool prime, bool skip00, const Scalar& scale) const {
    ModuleState out;
    const int Nr = annihilation_bound(rest);
    const int K = std::max({2 * Nr - ml - nr, -ml - nr, 0}) + 2;
    for (int k = skip00 ? 1 : 0; k < K; ++k)
      for (int i = 0; i <= k; ++i) {
        const Scalar c = pair_coeff(k, i, prime);
        if (c.is_zero()) continue;
        ModuleState r = act(gr, nr + k - i, rest);
        if (!r.is_zero()) out.add(act(gl, ml + i, r), scale * c);
      }
    return out;
  }

  ModuleState act_rat(int g, int n, const Word& m) const {
    if (m.empty()) return n < 0 ? ModuleState(Word{{g, n}}) : ModuleState();
    if (n >= annihilation_bound(m)) return {};
    const auto [fg, fm] = m.front();
    const Word rest(m.begin() + 1, m.end());
    if (g == 0 && fg == 1) {
      if (n < 0) return prepend(g, n, m);
      ModuleState out = pairsum(1, 0, fm, n, rest, true, false, Scalar(1));
      if (n + fm + 1 == 0) out.add(rest, Scalar(1));
      return out;
    }
    if (g == 1 && fg == 0) {
      const Scalar c0 = mup(0).inv();
      ModuleState out;
      out.add(act(0, fm, act(1, n, rest)), c0);
      if (fm + n + 1 == 0) out.add(rest, -c0);
      out.add(pairsum(1, 0, n, fm, rest, true, true, -c0));
      return out;
    }
    if (fm - n >= gap_) return prepend(g, n, m);
    if (n > fm) return pairsum(g, g, fm, n, rest, false, false, Scalar(1));
    return pairsum(g, g, n, n, rest, false, true, (Scalar(1) - mu(0)).inv());
  }

  ModuleState act_trig(int g, int n, const Word& m) const {
    if (m.empty()) return n < 0 ? ModuleState(Word{{g, n}}) : ModuleState();
    if (n >= annihilation_bound(m)) return {};
    const auto [fg, fm] = m.front();
    const Word rest(m.begin() + 1, m.end());
    const int Nr = annihilation_bound(rest);
    ModuleState out;
    if (g == 0 && fg == 1) {
      if (n < 0) return prepend(g, n, m);
      for (int k = 0; n + k < Nr; ++k) {
        ModuleState r = act(0, n + k, rest);
        if (!r.is_zero()) out.add(act(1, fm - k, r), lamp(k));
      }
      if (n + fm + 2 == 0) out.add(rest, Scalar(1));
      return out;
    }
    if (g == 1 && fg == 0) {
      const Scalar c0 = lamp(0).inv();
      out.add(act(0, fm, act(1, n, rest)), c0);
      if (fm + n + 2 == 0) out.add(rest, -c0);
      for (int k = 1; fm + k < Nr; ++k) {
        ModuleState r = act(0, fm + k, rest);
        if (!r.is_zero()) out.add(act(1, n - k, r), -c0 * lamp(k));
      }
      return out;
    }
    if (fm - n >= gap_) return prepend(g, n, m);
    if (n > fm) {
      for (int k = 0; n + k < Nr; ++k) {
        ModuleState r = act(g, n + k, rest);
        if (!r.is_zero()) out.add(act(g, fm - k, r), lam(k));
      }
      return out;
    }
    if (n == fm) {
      const Scalar c = (Scalar(1) - lam(0)).inv();
      for (int k = 1; n + k < Nr; ++k) {
        ModuleState r = act(g, n + k, rest);
        if (!r.is_zero()) out.add(act(g, n - k, r), c * lam(k));
      }
      return out;
    }
    // n = fm - 1 with gap 2
    const Scalar c = (Scalar(1) - lam(1) - lam(0) * lam(0)).inv();
    for (int j = 1; n + 1 + j < Nr; ++j) {
      ModuleState r = act(g, n + 1 + j, rest);
      if (!r.is_zero()) out.add(act(g, n - j, r), c * lam(0) * lam(j));
    }
    for (int k = 2; n + k < Nr; ++k) {
      ModuleState r = act(g, n + k, rest);
      if (!r.is_zero()) out.add(act(g, n + 1 - k, r), c * lam(k));
    }
    return out;
  }
};

inline BgModule build_module(const SystemKind& kind, const TruncPolicy& policy) { return BgModule(kind, policy); }

// Action of a mode, with every output monomial required to lie in the policy window.
inline ModuleState apply_mode(const BgModule& M, Gen g, int n, const ModuleState& s) {
  for (const auto& [m, c] : s.terms)
    if (!M.in_bounds(m)) throw WindowEscape("input monomial [" + word_str(m) + "] is outside the policy");
  ModuleState r = M.act(static_cast<int>(g), n, s);
  for (const auto& [m, c] : r.terms)
    if (!M.in_bounds(m))
      throw WindowEscape(std::string(gen_name(g)) + "_" + std::to_string(n) + " produces [" + word_str(m) + "]");
  return r;
}

// The three defining relations of the system, as mode identities applied to sampled states.
inline CheckReport verify_relations(const BgModule& M, const std::vector<Word>& sample, int window) {
  CheckReport rep(M.kind().tag_name() + "_relations");
  rep.meta["q"] = M.kind().q.str();
  rep.meta["window"] = window;
  rep.meta["sample"] = sample.size();
  rep.meta["gap"] = M.gap();
  const char* names[3] = {"beta-beta", "gamma-gamma", "beta-gamma"};
  const int pairs[3][2] = {{0, 0}, {1, 1}, {0, 1}};
  for (const auto& w : sample) {
    const ModuleState st(w);
    const int Nw = M.annihilation_bound(w);
    for (int m = -window; m <= window; ++m)
      for (int n = -window; n <= window; ++n)
        for (int r = 0; r < 3; ++r) {
          const int X = pairs[r][0], Y = pairs[r][1];
          const bool bg = r == 2;
          ModuleState lhs = M.act(X, m, M.act(Y, n, st));
          ModuleState rhs;
          if (M.trig()) {
            // X_m Y_n = sum_k c_k Y_{n-k} X_{m+k}
            for (int k = 0; m + k < Nw; ++k) {
              ModuleState in = M.act(X, m + k, st);
              if (!in.is_zero()) rhs.add(M.act(Y, n - k, in), bg ? M.lamp(k) : M.lam(k));
            }
          } else {
            // X_m Y_n = sum_{k,i} binom(k,i)(-1)^i c_k Y_{n+i} X_{m+k-i}
            const int K = std::max({2 * Nw - m - n, -m - n, 0}) + 2;
            for (int k = 0; k < K; ++k) {
              const Scalar ck = bg ? M.mup(k) : M.mu(k);
              if (ck.is_zero()) continue;
              for (int i = 0; i <= k; ++i) {
                ModuleState in = M.act(X, m + k - i, st);
                if (in.is_zero()) continue;
                Rational b = binom(k, i);
                if (i % 2) b = -b;
                rhs.add(M.act(Y, n + i, in), ck * Scalar(b));
              }
            }
          }
          if (bg && m + n + M.delta_shift() == 0) rhs.add(st, Scalar(1));
          ++rep.checked;
          if (lhs != rhs)
            rep.fail(Json{{"relation", names[r]}, {"m", m}, {"n", n}, {"state", word_str(w)}}, state_str(lhs), state_str(rhs));
        }
  }
  return rep;
}

// Number of basis monomials of each degree -sum(modes), for degrees 0..max_degree.
inline std::vector<size_t> graded_dims(const BgModule& M, int max_degree) {
  std::vector<size_t> d(max_degree + 1, 0);
  for (const auto& m : M.basis()) {
    int deg = 0;
    for (const auto& [g, n] : m) deg -= n;
    if (deg <= max_degree) ++d[deg];
  }
  return d;
}

// Cache file: magic "PHICAL\0", version byte, then a JSON body.
inline constexpr char kCacheMagic[7] = {'P', 'H', 'I', 'C', 'A', 'L', '\0'};
inline constexpr std::uint8_t kCacheVersion = 1;

inline void save_cache(const BgModule& M, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PolicyError("cannot write cache file " + path);
  out.write(kCacheMagic, sizeof kCacheMagic);
  out.put(static_cast<char>(kCacheVersion));
  out << M.to_cache_json().dump();
}

inline Json read_cache_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open cache file " + path, 0);
  char magic[sizeof kCacheMagic];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + sizeof magic, kCacheMagic)) throw ParseError("bad cache magic", 0);
  const int v = in.get();
  if (v != kCacheVersion) throw ParseError("unsupported cache version " + std::to_string(v), sizeof kCacheMagic);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("cache body: ") + e.what(), sizeof kCacheMagic + 1 + e.byte);
  }
}

inline BgModule load_cache(const std::string& path) {
  const Json j = read_cache_json(path);
  if (j.at("format") != "phical-qbg") throw ParseError("not a module cache", 0);
  SystemKind kind{SystemKind::parse_tag(j.at("kind").get<std::string>()), QValue::parse(j.at("q").get<std::string>())};
  const Json& p = j.at("policy");
  BgModule M(kind, TruncPolicy{p.at("depth").get<int>(), p.at("floor").get<int>(), p.at("K").get<int>()});
  for (const auto& e : j.at("action"))
    M.preload(e.at(0).get<int>(), e.at(1).get<int>(), parse_word(e.at(2).get<std::string>()), state_from_json(e.at(3)));
  return M;
}

}  // namespace phical
