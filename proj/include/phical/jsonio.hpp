#pragma once

#include <string>

#include "report.hpp"
#include "window.hpp"

namespace phical {

inline Json to_json(const LaurentSeries& s) {
  Json j;
  j["var"] = s.var;
  j["lo"] = s.lo;
  j["hi"] = s.exact() ? Json(nullptr) : Json(s.hi);
  Json t = Json::array();
  for (const auto& [e, c] : s.terms) t.push_back(Json::array({e, c.str()}));
  j["terms"] = t;
  return j;
}

inline LaurentSeries laurent_from_json(const Json& j) {
  LaurentSeries s(j.at("var").get<std::string>(), j.at("lo").get<int>(),
                  j.at("hi").is_null() ? kExact : j.at("hi").get<long long>());
  for (const auto& t : j.at("terms")) {
    int e = t.at(0).get<int>();
    if (e < s.lo || e >= s.hi) throw ParseError("term outside [lo, hi)", 0);
    s.terms[e] = Scalar::parse(t.at(1).get<std::string>());
    if (s.terms[e].is_zero()) throw ParseError("stored zero coefficient", 0);
  }
  return s;
}

inline Json to_json(const SeriesXZ& s) {
  Json j;
  j["zlo"] = s.zlo;
  j["zhi"] = s.zhi;
  Json rows = Json::array();
  for (int e = s.zlo; e < s.zhi; ++e) rows.push_back(to_json(s.row(e)));
  j["rows"] = rows;
  return j;
}

inline SeriesXZ seriesxz_from_json(const Json& j) {
  SeriesXZ s(j.at("zlo").get<int>(), j.at("zhi").get<int>());
  int e = s.zlo;
  for (const auto& r : j.at("rows")) {
    s.row_mut(e) = laurent_from_json(r);
    s.xvar = s.row(e).var;
    ++e;
  }
  return s;
}

template <class V, class F>
Json table_to_json(const WindowTable<V>& t, F&& value_json) {
  Json j;
  j["vars"] = t.vars;
  Json w = Json::array(), v = Json::array(), lo = Json::array();
  for (size_t i = 0; i < t.nvars(); ++i) {
    w.push_back(Json::array({t.window[i].first, t.window[i].second}));
    v.push_back(Json::array({t.valid[i].first, t.valid[i].second}));
    lo.push_back(t.lower[i] ? Json(*t.lower[i]) : Json(nullptr));
  }
  j["window"] = w;
  j["valid"] = v;
  j["shape"] = shape_name(t.shape.kind);
  if (t.shape.kind == ShapeKind::IterLower) j["shape_order"] = Json::array({t.vars[t.shape.first], t.vars[t.shape.second]});
  j["lower"] = lo;
  Json e = Json::array();
  for (const auto& [x, val] : t.coeffs) e.push_back(Json::array({x, value_json(val)}));
  j["entries"] = e;
  return j;
}

inline Json to_json(const WindowTable<Scalar>& t) {
  return table_to_json(t, [](const Scalar& s) { return s.str(); });
}

inline WindowTable<Scalar> scalar_table_from_json(const Json& j) {
  WindowTable<Scalar> t;
  t.vars = j.at("vars").get<std::vector<std::string>>();
  for (const auto& w : j.at("window")) t.window.emplace_back(w.at(0).get<int>(), w.at(1).get<int>());
  for (const auto& w : j.at("valid")) t.valid.emplace_back(w.at(0).get<int>(), w.at(1).get<int>());
  const std::string sh = j.at("shape").get<std::string>();
  if (sh == "IterLower") {
    auto ord = j.at("shape_order").get<std::vector<std::string>>();
    auto idx = [&](const std::string& v) {
      for (size_t i = 0; i < t.vars.size(); ++i)
        if (t.vars[i] == v) return static_cast<int>(i);
      throw ParseError("unknown shape variable " + v, 0);
    };
    t.shape = Shape::iter(idx(ord.at(0)), idx(ord.at(1)));
  } else if (sh == "JointLower") {
    t.shape = Shape::joint();
  } else {
    t.shape = Shape::distribution();
  }
  for (const auto& l : j.at("lower")) t.lower.push_back(l.is_null() ? std::optional<int>() : std::optional<int>(l.get<int>()));
  for (const auto& e : j.at("entries")) t.set(e.at(0).get<Exps>(), Scalar::parse(e.at(1).get<std::string>()));
  return t;
}

}  // namespace phical
