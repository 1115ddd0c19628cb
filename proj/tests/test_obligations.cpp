#include <doctest.h>

#include "kmelia/obligations.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace kmelia;

namespace {

const ProofObligation& find_po(const std::vector<ProofObligation>& pos, const std::string& service) {
  for (const auto& p : pos)
    if (p.service == service) return p;
  FAIL("no obligation for " << service);
  return pos.front();
}

std::vector<ProofObligation> compliance(const support::Loaded& l, const std::string& link) {
  const Assembly& a = l.model.assemblies().at("ATM_SYSTEM");
  return gen_compliance_pos(l.model, a, *a.find_link(link));
}

Bounds defaults() { return Bounds{}; }

}  // namespace

TEST_CASE("ATM_CORE initialization establishes the invariant") {
  auto l = support::load_variant("pristine");
  const ComponentDef& c = *l.model.component("ATM_CORE");
  ProofObligation po = gen_init_po(c);
  std::string hyp = pretty_print(po.hypothesis);
  CHECK(hyp.find("available_notes = 10000") != std::string::npos);
  CHECK(hyp.find("swallowed_cards = emptySet") != std::string::npos);
  CHECK(hyp.find("ident = readInt#0") != std::string::npos);
  CHECK(pretty_print(po.goal) == "available_notes >= 0 && size(swallowed_cards) <= 100");
  CHECK(check_implication(po.hypothesis, po.goal, po.scope, defaults()).holds());
}

TEST_CASE("empty invariant gives a trivial goal") {
  auto l = support::load({support::unit("k", "COMPONENT K\nINTERFACE provides : {} requires : {}\n"
                                             "VARIABLES n : Integer\nINITIALIZATION n := 1;\n")});
  ProofObligation po = gen_init_po(l.model.components().at("K"));
  CHECK(po.goal == ex::bool_lit(true));
}

TEST_CASE("a negative initial value breaks @cash_disp, matching brute force") {
  auto units = load_sources({support::corpus("pristine")});
  for (auto& u : units)
    if (u.path.ends_with("atm_core.kmelia")) {
      auto at = u.text.find("available_notes := 10000");
      REQUIRE(at != std::string::npos);
      u.text.replace(at, std::string("available_notes := 10000").size(), "available_notes := -1");
    }
  auto l = support::load(units);
  ProofObligation po = gen_init_po(*l.model.component("ATM_CORE"));
  auto ds = check_obligations({po}, defaults());
  REQUIRE(count_severity(ds, Severity::Error) == 1);
  CHECK(ds[0].message.find("cash_disp") != std::string::npos);
  Verdict v = check_implication(po.hypothesis, po.goal, po.scope, defaults());
  REQUIRE_FALSE(v.holds());
  CHECK(v.counterexample.at({"available_notes", Frame::Current}) == Value::integer(-1));
  auto expected = oracle::first_counterexample(po.hypothesis, po.goal, po.scope, Bounds{2, 2});
  REQUIRE(expected);
  CHECK(expected->at({"available_notes", Frame::Current}) == Value::integer(-1));
}

TEST_CASE("withdrawal preserves the invariant; the weakened post does not") {
  auto good = support::load_variant("pristine");
  auto pos = gen_service_pos(*good.model.component("ATM_CORE"));
  CHECK(check_implication(find_po(pos, "withdrawal").hypothesis, find_po(pos, "withdrawal").goal,
                          find_po(pos, "withdrawal").scope, defaults())
            .holds());

  auto bad = support::load_variant("mut-post-leq");
  auto bpos = gen_service_pos(*bad.model.component("ATM_CORE"));
  const ProofObligation& po = find_po(bpos, "withdrawal");
  Verdict v = check_implication(po.hypothesis, po.goal, po.scope, defaults());
  REQUIRE_FALSE(v.holds());
  CHECK(v.counterexample.at({"available_notes", Frame::Current}).number < 0);
  CHECK(evaluate_bool(po.hypothesis, v.counterexample));
  CHECK_FALSE(evaluate_bool(po.goal, v.counterexample));
}

TEST_CASE("frame rule: only written variables may change") {
  auto l = support::load_variant("pristine");
  const ComponentDef& c = *l.model.component("ATM_CORE");
  auto w = written_variables(c, *c.find_service("withdrawal"));
  CHECK(w == std::set<std::string>{"available_notes"});
  CHECK(written_variables(c, *c.find_service("get_ident")) == std::set<std::string>{"ident"});
  auto pos = gen_service_pos(c);
  std::string hyp = pretty_print(find_po(pos, "get_ident").hypothesis);
  CHECK(hyp.find("available_notes = old(available_notes)") != std::string::npos);
}

TEST_CASE("compliance of lwith: erroneous and corrected requirer posts") {
  auto bad = support::load_variant("mut-compliance-post");
  auto pos = compliance(bad, "lwith");
  REQUIRE(pos.size() == 2);
  CHECK(pos[0].origin == PoOrigin::ComplianceFwd);
  CHECK(pos[1].origin == PoOrigin::ComplianceBwd);
  CHECK(check_implication(pos[0].hypothesis, pos[0].goal, pos[0].scope, defaults()).holds());
  Verdict v = check_implication(pos[1].hypothesis, pos[1].goal, pos[1].scope, defaults());
  REQUIRE_FALSE(v.holds());
  const Valuation& cex = v.counterexample;
  CHECK(cex.result() == Value::boolean(false));
  auto now = cex.at({"available_notes", Frame::Current}).number;
  CHECK(now >= 0);
  CHECK(now == cex.at({"available_notes", Frame::Old}).number);

  auto good = support::load_variant("pristine");
  for (const auto& po : compliance(good, "lwith"))
    CHECK(check_implication(po.hypothesis, po.goal, po.scope, defaults()).holds());
}

TEST_CASE("mapping is substituted before checking") {
  auto l = support::load_variant("pristine");
  auto pos = compliance(l, "lwith");
  std::string fwd = pretty_print(pos[0].hypothesis);
  CHECK(fwd.find("dispensable") == std::string::npos);
  CHECK(fwd.find("available_notes >= 0") != std::string::npos);
  CHECK(pretty_print(pos[0].goal) == "available_notes >= 0");
}

TEST_CASE("an unmapped virtual variable yields no compliance obligations") {
  auto l = support::load_variant("mut-mapping");
  std::vector<Diagnostic> errors;
  const Assembly& a = l.model.assemblies().at("ATM_SYSTEM");
  auto pos = gen_compliance_pos(l.model, a, *a.find_link("lwith"), &errors);
  CHECK(pos.empty());
  CHECK(support::with_code(errors, "incomplete-context-mapping").size() == 1);
}

TEST_CASE("all pristine obligations hold within the default bound") {
  auto l = support::load_variant("pristine");
  std::vector<ProofObligation> pos;
  for (const auto& [name, c] : l.model.components()) {
    pos.push_back(gen_init_po(c));
    for (auto& p : gen_service_pos(c)) pos.push_back(std::move(p));
  }
  const Assembly& a = l.model.assemblies().at("ATM_SYSTEM");
  for (const auto& link : a.links)
    for (auto& p : gen_compliance_pos(l.model, a, link)) pos.push_back(std::move(p));
  CHECK(pos.size() > 15);
  auto ds = check_obligations(pos, defaults());
  CHECK_FALSE(has_errors(ds));
  CHECK(support::with_code(ds, "obligation-holds-within-bound").size() == pos.size());
}

TEST_CASE("the weakened post yields exactly one error with a valuation") {
  auto l = support::load_variant("mut-post-leq");
  auto ds = check_obligations(gen_service_pos(*l.model.component("ATM_CORE")), defaults());
  REQUIRE(count_severity(ds, Severity::Error) == 1);
  for (const auto& d : ds)
    if (d.severity == Severity::Error) {
      REQUIRE(d.counterexample);
      CHECK(std::holds_alternative<Valuation>(*d.counterexample));
    }
}

TEST_CASE("SMT scripts for the init and weakened-post obligations") {
  auto l = support::load_variant("mut-post-leq");
  const ComponentDef& c = *l.model.component("ATM_CORE");
  std::string init = export_smtlib(gen_init_po(c));
  CHECK(init.find("(declare-const available_notes Int)") != std::string::npos);
  CHECK(init.find("(check-sat)") != std::string::npos);
  std::string svc = export_smtlib(find_po(gen_service_pos(c), "withdrawal"));
  CHECK(svc.find("available_notes__old") != std::string::npos);
}
