#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace phical {

using Json = nlohmann::ordered_json;

enum class Status { Pass, Fail, Inconclusive };

inline std::string status_name(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    default: return "inconclusive";
  }
}

struct Violation {
  Json where = Json::object();
  std::string lhs, rhs;
  std::string note;
};

// Outcome of an identity check; failures are data.
struct CheckReport {
  std::string name;
  Status status = Status::Pass;
  size_t checked = 0;
  size_t violation_count = 0;
  std::vector<Violation> violations;
  Json meta = Json::object();
  size_t keep = 25;

  explicit CheckReport(std::string n = "") : name(std::move(n)) {}

  bool pass() const { return status == Status::Pass; }

  void fail(Json where, std::string lhs, std::string rhs, std::string note = "") {
    status = Status::Fail;
    ++violation_count;
    if (violations.size() < keep) violations.push_back({std::move(where), std::move(lhs), std::move(rhs), std::move(note)});
  }

  template <class T>
  void expect_equal(const T& lhs, const T& rhs, const Json& where) {
    ++checked;
    if (!(lhs == rhs)) fail(where, to_text(lhs), to_text(rhs));
  }

  void merge(const CheckReport& o) {
    checked += o.checked;
    violation_count += o.violation_count;
    for (const auto& v : o.violations)
      if (violations.size() < keep) violations.push_back(v);
    if (o.status == Status::Fail) status = Status::Fail;
    if (o.status == Status::Inconclusive && status == Status::Pass) status = Status::Inconclusive;
  }

  Json to_json() const {
    Json j;
    j["schema"] = "phical/1";
    j["check"] = name;
    j["pass"] = pass();
    j["status"] = status_name(status);
    j["checked"] = checked;
    j["violation_count"] = violation_count;
    Json vs = Json::array();
    for (const auto& v : violations) {
      Json e;
      e["where"] = v.where;
      e["lhs"] = v.lhs;
      e["rhs"] = v.rhs;
      if (!v.note.empty()) e["note"] = v.note;
      vs.push_back(e);
    }
    j["violations"] = vs;
    if (!meta.empty()) j["meta"] = meta;
    return j;
  }

 private:
  template <class T>
  static std::string to_text(const T& v) {
    if constexpr (requires { v.str(); }) {
      return v.str();
    } else {
      return std::to_string(v);
    }
  }
};

}  // namespace phical
