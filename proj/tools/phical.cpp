// phical command-line front end.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "phical/phical.hpp"

using namespace phical;

namespace {

struct Out {
  bool json = false;
  int emit(const Json& j, bool pass, const std::string& text) const {
    if (json)
      std::cout << j.dump(2) << "\n";
    else
      std::cout << text << "\n";
    return pass ? 0 : 1;
  }
};

std::string report_line(const CheckReport& r) {
  std::string s = r.name + ": " + (r.status == Status::Pass ? "PASS" : r.status == Status::Fail ? "FAIL" : "INCONCLUSIVE") +
                  " (checked " + std::to_string(r.checked) + ", violations " + std::to_string(r.violation_count) + ")";
  if (!r.violations.empty())
    s += "\n  first: " + r.violations.front().where.dump() + " lhs=" + r.violations.front().lhs +
         " rhs=" + r.violations.front().rhs;
  return s;
}

std::string cache_path(const std::string& p) {
  namespace fs = std::filesystem;
  const char* dir = std::getenv("PHICAL_CACHE_DIR");
  if (dir && *dir && fs::path(p).is_relative() && !fs::path(p).has_parent_path()) return (fs::path(dir) / p).string();
  return p;
}

LaurentSeries parse_p(const std::string& s) { return to_laurent(parse_rational_expr(s), "x"); }

FieldPtr<Word> pick_field(TrigDesk& d, const std::string& name) {
  if (name == "beta") return d.beta;
  if (name == "gamma") return d.gamma;
  if (name == "1") return d.space->identity();
  throw PolicyError("unknown field '" + name + "' (beta, gamma, 1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phical: phi-coordinated module calculus"};
  app.require_subcommand(1);
  Out out;
  app.add_flag("--json", out.json, "machine-readable JSON on stdout");

  std::string p, phi_expr, expr, outer, inner, sys = "trig", qstr = "symbolic", cache, name = "all", fa = "beta", fb = "gamma",
                             ratio, expect = "none";
  int order = 8, depth = 2, floor = -4, window = 4, nlo = -2, nhi = 1, n = 0, kmax = 6;
  std::optional<int> xhi, outer_hi, kpow;

  auto json_flag = [&](CLI::App* s) { s->add_flag("--json", out.json, "machine-readable JSON on stdout"); };

  auto* c_assoc = app.add_subcommand("associate", "rows f_n = (p d/dx)^n x / n! of phi(x,z) = e^{z p d/dx} x");
  c_assoc->add_option("--p", p, "generator p(x)")->required();
  c_assoc->add_option("--order", order, "z-order")->check(CLI::NonNegativeNumber);
  json_flag(c_assoc);

  auto* c_verify = app.add_subcommand("verify", "associate axioms and inverse flow");
  auto* o_p = c_verify->add_option("--p", p, "generator p(x)");
  auto* o_phi = c_verify->add_option("--phi", phi_expr, "phi(x,z) as a rational expression");
  o_p->excludes(o_phi);
  c_verify->add_option("--order", order, "total z-order")->check(CLI::NonNegativeNumber);
  c_verify->add_option("--xhi", xhi, "x-order for non-monomial denominators of --phi");
  json_flag(c_verify);

  auto* c_iota = app.add_subcommand("iota", "expansion of a rational expression in nonnegative powers of the inner variable");
  c_iota->add_option("--expr", expr)->required();
  c_iota->add_option("--outer", outer)->required();
  c_iota->add_option("--inner", inner)->required();
  c_iota->add_option("--order", order)->check(CLI::PositiveNumber);
  c_iota->add_option("--outer-hi", outer_hi);
  json_flag(c_iota);

  auto* c_coeffs = app.add_subcommand("coeffs", "lambda, lambda', mu, mu' expansion coefficients");
  c_coeffs->add_option("--system", sys)->check(CLI::IsMember({"trig", "rat"}));
  c_coeffs->add_option("--q", qstr, "symbolic or a rational");
  c_coeffs->add_option("--order", order)->check(CLI::PositiveNumber);
  json_flag(c_coeffs);

  auto* c_build = app.add_subcommand("qbg-build", "build a truncated module, verify its relations and write the cache");
  c_build->add_option("--system", sys)->check(CLI::IsMember({"trig", "rat"}));
  c_build->add_option("--q", qstr, "symbolic or a rational");
  c_build->add_option("--depth", depth);
  c_build->add_option("--floor", floor);
  c_build->add_option("--window", window)->check(CLI::NonNegativeNumber);
  c_build->add_option("--cache", cache)->required();
  json_flag(c_build);

  auto* c_qverify = app.add_subcommand("qbg-verify", "reload a cache and verify relations and stored actions");
  c_qverify->add_option("--cache", cache)->required();
  c_qverify->add_option("--window", window)->check(CLI::NonNegativeNumber);
  json_flag(c_qverify);

  auto* c_info = app.add_subcommand("cache-info", "header of a module cache");
  c_info->add_option("--cache", cache)->required();
  json_flag(c_info);

  auto desk_opts = [&](CLI::App* s) {
    s->add_option("--q", qstr, "q for the trigonometric module (a rational)");
    s->add_option("--depth", depth);
    s->add_option("--floor", floor);
    s->add_option("--a", fa)->check(CLI::IsMember({"beta", "gamma", "1"}));
    s->add_option("--b", fb)->check(CLI::IsMember({"beta", "gamma", "1"}));
    s->add_option("--k", kpow, "use the multiplier (x1-x2)^k");
    s->add_option("--ratio", ratio, "use the multiplier given by a polynomial in t = x1/x2");
    s->add_option("--k-max", kmax, "largest power tried by the multiplier search");
    s->add_option("--window", window, "x-exponent window")->check(CLI::NonNegativeNumber);
    json_flag(s);
  };
  auto* c_yphi = app.add_subcommand("yphi", "modes of Y_E^e(a,z)b on the trigonometric module, phi = x e^z");
  desk_opts(c_yphi);
  c_yphi->add_option("--nlo", nlo);
  c_yphi->add_option("--nhi", nhi);

  auto* c_modes = app.add_subcommand("modes", "one mode a_n^e b, optionally compared with 1_W or 0");
  desk_opts(c_modes);
  c_modes->add_option("--n", n);
  c_modes->add_option("--expect", expect)->check(CLI::IsMember({"none", "identity", "zero"}));

  auto* c_suite = app.add_subcommand("check-suite", "named identity checks");
  c_suite->add_option("--name", name, "item name or all");
  c_suite->add_option("--order", order, "series order or window (0 = item default)")->check(CLI::NonNegativeNumber);
  json_flag(c_suite);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_assoc) {
      Associate A = associate_from_p(parse_p(p), order);
      CheckReport rep = verify_associate(A, order);
      Json j{{"schema", "phical/1"}, {"command", "associate"}, {"associate", to_json(A)}, {"verify", rep.to_json()}};
      std::string text;
      for (int r = 0; r <= order; ++r) text += "f_" + std::to_string(r) + " = " + A.phi.row(r).str() + "\n";
      return out.emit(j, rep.status == Status::Pass, text + report_line(rep));
    }
    if (*c_verify) {
      if (p.empty() == phi_expr.empty()) throw PolicyError("give exactly one of --p and --phi");
      Associate A = p.empty() ? phi_from_expr(parse_rational_expr(phi_expr), order, xhi) : associate_from_p(parse_p(p), order);
      CheckReport rep = verify_associate(A, order);
      rep.merge(inverse_flow_check(A, order));
      Json j = rep.to_json();
      return out.emit(j, rep.status == Status::Pass, report_line(rep));
    }
    if (*c_iota) {
      auto t = iota_expand(parse_rational_expr(expr), outer, inner, order, outer_hi);
      Json j{{"schema", "phical/1"}, {"command", "iota"}, {"table", to_json(t)}};
      std::string text;
      for (const auto& [e, c] : t.coeffs)
        text += outer + "^" + std::to_string(e[0]) + " " + inner + "^" + std::to_string(e[1]) + " : " + c.str() + "\n";
      return out.emit(j, true, text + std::to_string(t.coeffs.size()) + " nonzero coefficients");
    }
    if (*c_coeffs) {
      SystemKind kind{SystemKind::parse_tag(sys), QValue::parse(qstr)};
      ExpansionCoeffs c = expansion_coeffs(kind, order);
      auto arr = [](const std::vector<Scalar>& v) {
        Json a = Json::array();
        for (const auto& s : v) a.push_back(s.str());
        return a;
      };
      CheckReport rep = check_coeffs_suite(kind, order);
      Json j{{"schema", "phical/1"}, {"command", "coeffs"}, {"q", kind.q.str()},     {"order", order},
             {"lambda", arr(c.lambda)},  {"lambda_prime", arr(c.lambda_prime)},    {"mu", arr(c.mu)},
             {"mu_prime", arr(c.mu_prime)}, {"check", rep.to_json()}};
      std::string text;
      for (int k = 0; k < order; ++k)
        text += "k=" + std::to_string(k) + " lambda=" + c.lambda[k].str() + " lambda'=" + c.lambda_prime[k].str() +
                " mu=" + c.mu[k].str() + " mu'=" + c.mu_prime[k].str() + "\n";
      return out.emit(j, rep.status == Status::Pass, text + report_line(rep));
    }
    if (*c_build) {
      SystemKind kind{SystemKind::parse_tag(sys), QValue::parse(qstr)};
      BgModule M = build_module(kind, TruncPolicy::make(depth, floor));
      CheckReport rep = verify_relations(M, M.basis(), window);
      const std::string path = cache_path(cache);
      save_cache(M, path);
      Json j{{"schema", "phical/1"},        {"command", "qbg-build"},     {"cache", path},
             {"system", kind.tag_name()}, {"q", kind.q.str()},          {"policy", M.policy().to_json()},
             {"basis", M.basis().size()}, {"actions", M.memo_size()},   {"relations", rep.to_json()}};
      return out.emit(j, rep.status == Status::Pass,
                      "wrote " + path + " (" + std::to_string(M.memo_size()) + " actions)\n" + report_line(rep));
    }
    if (*c_qverify) {
      const std::string path = cache_path(cache);
      BgModule M = load_cache(path);
      BgModule fresh = build_module(M.kind(), M.policy());
      CheckReport integrity("cache_integrity");
      for (const auto& [g, nn, w, s] : M.memo_entries()) {
        ++integrity.checked;
        ModuleState f = fresh.act(g, nn, w);
        if (f != s) integrity.fail(Json{{"gen", gen_name(static_cast<Gen>(g))}, {"n", nn}, {"state", word_str(w)}}, state_str(s), state_str(f));
      }
      CheckReport rep = verify_relations(M, M.basis(), window);
      const bool pass = rep.status == Status::Pass && integrity.status == Status::Pass;
      Json j{{"schema", "phical/1"}, {"command", "qbg-verify"}, {"cache", path}, {"pass", pass},
             {"relations", rep.to_json()}, {"integrity", integrity.to_json()}};
      return out.emit(j, pass, report_line(integrity) + "\n" + report_line(rep));
    }
    if (*c_info) {
      const std::string path = cache_path(cache);
      Json c = read_cache_json(path);
      Json j{{"schema", "phical/1"}, {"command", "cache-info"}, {"cache", path}, {"magic", "PHICAL"},
             {"version", kCacheVersion}};
      j["format"] = c.value("format", "");
      for (const char* k : {"kind", "q", "policy"})
        if (c.contains(k)) j[k] = c[k];
      j["basis"] = c.contains("basis") ? c["basis"].size() : 0;
      j["actions"] = c.contains("action") ? c["action"].size() : 0;
      std::string text = path + ": phical cache v" + std::to_string(kCacheVersion);
      for (const char* k : {"format", "kind", "q", "policy", "basis", "actions"})
        if (j.contains(k)) text += "\n  " + std::string(k) + ": " + j[k].dump();
      return out.emit(j, true, text);
    }
    if (*c_yphi || *c_modes) {
      QValue q = QValue::parse(qstr == "symbolic" ? "-1" : qstr);
      TrigDesk d = make_trig_desk(q, depth, floor, kmax);
      FieldPtr<Word> a = pick_field(d, fa), b = pick_field(d, fb);
      std::shared_ptr<const YPhiProduct<Word>> prod;
      Json search;
      if (kpow) {
        prod = y_phi(a, b, Multiplier::power(*kpow), d.space->sample(), d.space->window());
      } else if (!ratio.empty()) {
        prod = y_phi(a, b, Multiplier::from_expr(parse_rational_expr(ratio)), d.space->sample(), d.space->window());
      } else {
        MultiplierSearch s = find_multiplier(a, b, d.space->sample(), trig_candidates(q.scalar(), kmax),
                                             d.space->window());
        search = s.report.to_json();
        if (!s.found) throw NoMultiplierFound(a->label + " , " + b->label);
        prod = y_phi(a, b, *s.found, d.space->sample(), d.space->window());
      }
      if (*c_yphi) {
        Json j{{"schema", "phical/1"}, {"command", "yphi"}, {"q", q.str()}, {"a", a->label}, {"b", b->label},
               {"result", y_phi_json(*prod, d.space->sample(), nlo, nhi, window)}};
        if (!search.is_null()) j["search"] = search;
        return out.emit(j, true, "multiplier " + prod->multiplier().str() + ", modes >= " + std::to_string(prod->ord()) + " vanish");
      }
      CheckReport rep("mode");
      rep.meta["mode"] = n;
      if (expect != "none")
        compare_fields(rep, *mode_field<Word>(prod, n), expect == "identity" ? *d.space->identity() : *zero_field(),
                       d.space->sample(), window, Json{{"mode", n}});
      Json j{{"schema", "phical/1"}, {"command", "modes"}, {"q", q.str()}, {"a", a->label}, {"b", b->label},
             {"result", y_phi_json(*prod, d.space->sample(), n, n, window)}, {"check", rep.to_json()}};
      return out.emit(j, rep.status == Status::Pass, report_line(rep));
    }
    if (*c_suite) {
      std::vector<std::string> names = name == "all" ? suite_names() : std::vector<std::string>{name};
      Json items = Json::array();
      bool pass = true;
      std::string text;
      for (const auto& nm : names) {
        CheckReport r = run_suite(nm, order);
        pass = pass && r.status == Status::Pass;
        Json rj = r.to_json();
        rj["item"] = nm;
        items.push_back(rj);
        text += nm + " -> " + report_line(r) + "\n";
      }
      Json j{{"schema", "phical/1"}, {"command", "check-suite"}, {"pass", pass}, {"items", items}};
      return out.emit(j, pass, text + (pass ? "all passed" : "failures present"));
    }
  } catch (const WindowEscape& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const PrecisionExhausted& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const PolicyError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const VariableMismatch& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ExpansionDirectionError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const DivisionByZero& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const PoleAtSpecialization& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const NotAnAssociateBase& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const CompositionError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
