#pragma once

#include <map>
#include <string>
#include <utility>

#include "scalar.hpp"

namespace phical {

// Finite linear combination of basis keys with Scalar coefficients; no stored zeros.
template <class K>
class Vec {
 public:
  std::map<K, Scalar> terms;

  Vec() = default;
  explicit Vec(const K& k, const Scalar& c = 1) {
    if (!c.is_zero()) terms.emplace(k, c);
  }

  bool is_zero() const { return terms.empty(); }
  size_t size() const { return terms.size(); }
  Scalar coeff(const K& k) const {
    auto it = terms.find(k);
    return it == terms.end() ? Scalar() : it->second;
  }

  void add(const K& k, const Scalar& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = terms.emplace(k, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }
  void add(const Vec& v, const Scalar& c = 1) {
    if (c.is_zero()) return;
    for (const auto& [k, a] : v.terms) add(k, c.is_one() ? a : a * c);
  }
  Vec scaled(const Scalar& c) const {
    Vec r;
    if (c.is_zero()) return r;
    for (const auto& [k, a] : terms) r.terms.emplace(k, a * c);
    return r;
  }

  friend bool operator==(const Vec& a, const Vec& b) { return a.terms == b.terms; }
  friend bool operator!=(const Vec& a, const Vec& b) { return !(a == b); }
  friend Vec operator+(Vec a, const Vec& b) {
    a.add(b);
    return a;
  }
  friend Vec operator-(Vec a, const Vec& b) {
    a.add(b, Scalar(-1));
    return a;
  }
};

inline bool value_is_zero(const Scalar& s) { return s.is_zero(); }
inline Scalar value_scale(const Scalar& v, const Scalar& c) { return v * c; }
inline std::string value_str(const Scalar& s) { return s.str(); }

template <class K>
bool value_is_zero(const Vec<K>& v) {
  return v.is_zero();
}
template <class K>
Vec<K> value_scale(const Vec<K>& v, const Scalar& c) {
  return v.scaled(c);
}

}  // namespace phical
