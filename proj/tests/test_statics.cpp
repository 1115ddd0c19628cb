#include <doctest.h>

#include <set>

#include "generators.hpp"
#include "kmelia/statics.hpp"
#include "support.hpp"

using namespace kmelia;

namespace {

std::vector<Diagnostic> statics_of(const std::string& variant) {
  auto l = support::load_variant(variant);
  REQUIRE_FALSE(has_errors(l.diagnostics));
  return run_statics(l.model);
}

std::string join(const std::vector<std::string>& xs) {
  std::string out = "{";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + xs[i];
  return out + "}";
}

// Provider P.s needs `calreq` (required services c0..c2); requirer Q.r
// offers `subprov` (provided services d0..d2). `pairs` are sublinks c_i -> d_j.
support::Loaded structure_model(const std::vector<int>& calreq, const std::vector<int>& subprov,
                                const std::vector<std::pair<int, int>>& pairs) {
  std::vector<std::string> cs, ds;
  for (int i : calreq) cs.push_back("c" + std::to_string(i));
  for (int j : subprov) ds.push_back("d" + std::to_string(j));
  std::string p = "COMPONENT P\nINTERFACE provides : {s} requires : {c0, c1, c2}\n"
                  "provided s ()\nInterface\n  calrequires : " + join(cs) + "\nEnd\n";
  for (int i = 0; i < 3; ++i) p += "required c" + std::to_string(i) + " ()\nEnd\n";
  std::string q = "COMPONENT Q\nINTERFACE provides : {d0, d1, d2} requires : {r}\n"
                  "required r ()\nInterface\n  subprovides : " + join(ds) + "\nEnd\n";
  for (int j = 0; j < 3; ++j) q += "provided d" + std::to_string(j) + " ()\nEnd\n";
  std::string a = "Assembly A\nComponents p : P; q : Q\nLinks\n  @main p-r p.s q.r\n";
  std::vector<std::string> subs;
  for (std::size_t k = 0; k < pairs.size(); ++k) subs.push_back("sub" + std::to_string(k));
  if (!subs.empty()) a += "  sublinks : " + join(subs) + "\n";
  for (std::size_t k = 0; k < pairs.size(); ++k)
    a += "  @sub" + std::to_string(k) + " r-p p.c" + std::to_string(pairs[k].first) + " q.d" +
         std::to_string(pairs[k].second) + "\n";
  a += "End\n";
  return support::load({support::unit("p.kmelia", p), support::unit("q.kmelia", q), support::unit("a.kmelia", a)});
}

}  // namespace

TEST_CASE("pristine corpus has no static errors and one unused subprovide") {
  auto ds = statics_of("pristine");
  CHECK_FALSE(has_errors(ds));
  auto unused = support::with_code(ds, "unused-subprovide");
  REQUIRE(unused.size() == 1);
  CHECK(unused[0]->severity == Severity::Info);
  CHECK(unused[0]->message.find("get_ident") != std::string::npos);
}

TEST_CASE("typing mutant: parameter type mismatch on lwith") {
  auto ds = statics_of("mut-typing");
  auto hits = support::with_code(ds, "param-type-mismatch");
  REQUIRE(hits.size() == 1);
  CHECK(hits[0]->severity == Severity::Error);
  CHECK(hits[0]->message.find("lwith") != std::string::npos);
  CHECK(count_severity(ds, Severity::Error) == 1);
}

TEST_CASE("observability mutant: mapping reads a hidden variable") {
  auto ds = statics_of("mut-observability");
  auto hits = support::with_code(ds, "non-observable-reference");
  REQUIRE(hits.size() == 1);
  CHECK(hits[0]->message.find("ident") != std::string::npos);
  CHECK(count_severity(ds, Severity::Error) == 1);
}

TEST_CASE("mapping mutant: virtual variable left unmapped") {
  auto ds = statics_of("mut-mapping");
  auto hits = support::with_code(ds, "incomplete-context-mapping");
  REQUIRE(hits.size() == 1);
  CHECK(hits[0]->message.find("dispensable") != std::string::npos);
}

TEST_CASE("signature matching is up to parameter renaming") {
  const char* prov = "COMPONENT P\nINTERFACE provides : {s} requires : {}\nprovided s (card : Integer) : Boolean\nEnd\n";
  const char* req = "COMPONENT R\nINTERFACE provides : {} requires : {t}\nrequired t (theCard : Integer) : Boolean\nEnd\n";
  const char* bad = "COMPONENT R\nINTERFACE provides : {} requires : {t}\nrequired t (x : Integer, y : Integer)\nEnd\n";
  const char* asm_text = "Assembly A\nComponents p : P; r : R\nLinks\n  @l p-r p.s r.t\nEnd\n";
  auto ok = support::load({support::unit("p", prov), support::unit("r", req), support::unit("a", asm_text)});
  const Assembly& a = ok.model.assemblies().at("A");
  CHECK(check_signatures(ok.model, a).empty());

  auto ko = support::load({support::unit("p", prov), support::unit("r", bad), support::unit("a", asm_text)});
  auto ds = check_signatures(ko.model, ko.model.assemblies().at("A"));
  CHECK(support::with_code(ds, "arity-mismatch").size() == 1);
  CHECK(support::with_code(ds, "return-type-mismatch").size() == 1);
}

TEST_CASE("sub-service structure agrees with a matching oracle on all shapes up to three services") {
  int shapes = 0;
  for (int cm = 0; cm < 8; ++cm) {
    for (int dm = 0; dm < 8; ++dm) {
      std::vector<int> calreq, subprov;
      for (int i = 0; i < 3; ++i) {
        if (cm >> i & 1) calreq.push_back(i);
        if (dm >> i & 1) subprov.push_back(i);
      }
      // Every partial injective assignment calreq -> subprov.
      std::vector<std::vector<std::pair<int, int>>> assignments{{}};
      for (int c : calreq) {
        std::vector<std::vector<std::pair<int, int>>> next;
        for (const auto& a : assignments) {
          next.push_back(a);
          for (int d : subprov) {
            bool taken = false;
            for (const auto& [x, y] : a) taken = taken || y == d;
            if (taken) continue;
            auto b = a;
            b.emplace_back(c, d);
            next.push_back(b);
          }
        }
        assignments = std::move(next);
      }
      for (const auto& pairs : assignments) {
        auto l = structure_model(calreq, subprov, pairs);
        REQUIRE_FALSE(has_errors(l.diagnostics));
        auto ds = check_structure(l.model, l.model.assemblies().at("A"));
        std::size_t missing = calreq.size() - pairs.size();
        std::size_t unused = subprov.size() - pairs.size();
        CAPTURE(cm);
        CAPTURE(dm);
        CHECK(support::with_code(ds, "missing-sublink").size() == missing);
        CHECK(support::with_code(ds, "unused-subprovide").size() == unused);
        CHECK(count_severity(ds, Severity::Error) == missing);
        ++shapes;
      }
    }
  }
  CHECK(shapes > 100);
}

TEST_CASE("a sublink to a service that is not subprovided dangles") {
  auto l = structure_model({0}, {1}, {{0, 2}});
  auto ds = check_structure(l.model, l.model.assemblies().at("A"));
  CHECK(support::with_code(ds, "dangling-sublink").size() == 1);
  CHECK(support::with_code(ds, "missing-sublink").size() == 1);
}

TEST_CASE("accessibility agrees with a reference count on random components") {
  gen::Rng rng(31);
  for (int iter = 0; iter < 200; ++iter) {
    ComponentDef c;
    c.name = "K";
    int n = rng.uniform(1, 4);
    std::vector<std::string> pool{"s0", "s1", "s2", "s3", "s4", "x"};
    for (int i = 0; i < n; ++i) {
      ServiceDef s;
      s.name = "s" + std::to_string(i);
      s.kind = rng.coin(0.7) ? ServiceKind::Provided : ServiceKind::Required;
      c.services.push_back(s);
    }
    c.required = {"s0", "x"};
    for (auto& s : c.services) {
      for (int k = rng.uniform(0, 2); k > 0; --k) s.intrequires.push_back(rng.pick(pool));
      for (int k = rng.uniform(0, 1); k > 0; --k) s.extrequires.push_back(rng.pick(pool));
      for (int k = rng.uniform(0, 1); k > 0; --k) s.subprovides.push_back(rng.pick(pool));
      for (int k = rng.uniform(0, 1); k > 0; --k) s.calrequires.push_back(rng.pick(pool));
    }

    auto kind_of = [&](const std::string& name) -> std::optional<ServiceKind> {
      for (const auto& s : c.services)
        if (s.name == name) return s.kind;
      return std::nullopt;
    };
    std::size_t internal = 0, external = 0, sub = 0;
    for (const auto& s : c.services) {
      for (const auto& t : s.intrequires) internal += !kind_of(t);
      for (const auto& t : s.extrequires) external += t != "s0" && t != "x";
      for (const auto& t : s.subprovides) sub += kind_of(t) != ServiceKind::Provided;
      for (const auto& t : s.calrequires) sub += kind_of(t) != ServiceKind::Required;
    }
    // Cycles: groups of mutually reachable services through defined intrequires.
    const std::size_t m = c.services.size();
    std::vector<std::vector<bool>> reach(m, std::vector<bool>(m, false));
    for (std::size_t i = 0; i < m; ++i)
      for (const auto& t : c.services[i].intrequires)
        for (std::size_t j = 0; j < m; ++j)
          if (c.services[j].name == t) reach[i][j] = true;
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    std::set<std::set<std::size_t>> groups;
    for (std::size_t i = 0; i < m; ++i) {
      if (!reach[i][i]) continue;
      std::set<std::size_t> g;
      for (std::size_t j = 0; j < m; ++j)
        if (reach[i][j] && reach[j][i]) g.insert(j);
      groups.insert(g);
    }

    auto ds = check_accessibility(c);
    CHECK(support::with_code(ds, "unavailable-internal-service").size() == internal);
    CHECK(support::with_code(ds, "undeclared-external-requirement").size() == external);
    CHECK(support::with_code(ds, "undefined-subservice").size() == sub);
    CHECK(support::with_code(ds, "dependency-cycle").size() == groups.size());
  }
}

TEST_CASE("ATM_CORE accessibility and dependency graph") {
  auto l = support::load_variant("pristine");
  const ComponentDef* c = l.model.component("ATM_CORE");
  REQUIRE(c);
  CHECK(check_accessibility(*c).empty());
  auto g = dependency_graph(*c);
  CHECK(g.nodes.front() == "withdrawal");
  std::size_t needs = 0;
  for (const auto& e : g.edges) {
    if (e.from != "withdrawal") continue;
    needs += e.kind == DependencyKind::Needs;
    if (e.kind == DependencyKind::Needs) CHECK(e.to == "swallow_card");
  }
  CHECK(needs == 1);
}

TEST_CASE("observable constants may be mapped") {
  auto l = support::load_variant("pristine");
  std::string a = "Assembly B\nComponents atm : ATM_CORE; ui : USER_INTERFACE\nLinks\n"
                  "  @lwith p-r atm.withdrawal ui.ask_for_money\n  context mapping\n"
                  "    ui.dispensable = atm.available_cash >= 0\n  sublinks : {lcode, lamount}\n"
                  "  @lcode: r-p atm.ask_code ui.code\n  @lamount: r-p atm.ask_amount ui.amount\nEnd\n";
  auto units = load_sources({support::corpus("pristine")});
  units.erase(std::remove_if(units.begin(), units.end(), [](const SourceUnit& u) { return u.kind == UnitKind::Assembly; }),
              units.end());
  units.push_back(support::unit("b.kmelia", a));
  auto m = support::load(units);
  REQUIRE_FALSE(has_errors(m.diagnostics));
  CHECK(check_observability(m.model, m.model.assemblies().at("B")).empty());
  CHECK(check_mappings(m.model, m.model.assemblies().at("B")).empty());
}

TEST_CASE("type errors in services") {
  auto r = support::load({support::unit("k", "COMPONENT K\nINTERFACE provides : {s} requires : {}\n"
                                             "VARIABLES n : Integer; b : Boolean\n"
                                             "provided s ()\nPre n && b\nEnd\n")});
  auto ds = check_types(r.model.components().at("K"));
  CHECK(support::with_code(ds, "type-error").size() == 1);
}
