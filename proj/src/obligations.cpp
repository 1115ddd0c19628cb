#include "kmelia/obligations.hpp"

#include <algorithm>

#include "kmelia/parser.hpp"
#include "kmelia/statics.hpp"

namespace kmelia {

namespace {

// Moves unqualified references to `names` into the given frame.
Expr set_frame(const Expr& e, const std::set<std::string>& names, Frame frame) {
  Expr r = e;
  if (r.kind == ExprKind::Var && r.qualifier.empty() && names.contains(r.name)) r.frame = frame;
  for (auto& op : r.operands) op = set_frame(op, names, frame);
  return r;
}

Expr strip_qualifier(const Expr& e, const std::string& instance) {
  Expr r = e;
  if (r.kind == ExprKind::Var && r.qualifier == instance) r.qualifier.clear();
  for (auto& op : r.operands) op = strip_qualifier(op, instance);
  return r;
}

std::set<std::string> variable_names(const ComponentDef& c) {
  std::set<std::string> out;
  for (const auto& v : c.variables) out.insert(v.name);
  return out;
}

// Constants without a definition stay symbolic and frame-independent.
std::set<std::string> frozen_names(const ComponentDef& c, const ServiceDef* s) {
  std::set<std::string> out;
  for (const auto& k : c.constants) out.insert(k.name);
  if (s)
    for (const auto& p : s->params) out.insert(p.name);
  return out;
}

void add_state_scope(const ComponentDef& c, bool both_frames, Scope& scope) {
  for (const auto& k : c.constants)
    if (!k.init) scope.push_back(ScopeVar{VarKey{k.name, Frame::Current}, k.type});
  for (const auto& v : c.variables) {
    scope.push_back(ScopeVar{VarKey{v.name, Frame::Current}, v.type});
    if (both_frames) scope.push_back(ScopeVar{VarKey{v.name, Frame::Old}, v.type});
  }
}

void abstract_into(ProofObligation& po) {
  auto abs = abstract_calls({po.hypothesis, po.goal}, po.scope);
  if (abs.fresh.empty()) return;
  po.hypothesis = abs.exprs[0];
  po.goal = abs.exprs[1];
  po.scope.insert(po.scope.end(), abs.fresh.begin(), abs.fresh.end());
}

Diagnostic po_diag(const ProofObligation& po, Severity s, std::string code, std::string msg) {
  Phase phase = (po.origin == PoOrigin::Init || po.origin == PoOrigin::ServicePreserves) ? Phase::Consistency
                                                                                          : Phase::Compliance;
  return make_diag(s, phase, std::move(code), po.unit, po.loc, std::move(msg));
}

std::string describe(const ProofObligation& po) {
  switch (po.origin) {
    case PoOrigin::Init: return "initialization of " + po.component;
    case PoOrigin::ServicePreserves: return "service " + po.component + "." + po.service;
    case PoOrigin::ComplianceFwd: return "link @" + po.link + " (pre-condition direction)";
    case PoOrigin::ComplianceBwd: return "link @" + po.link + " (post-condition direction)";
  }
  return po.id;
}

}  // namespace

std::string_view to_string(PoOrigin o) {
  switch (o) {
    case PoOrigin::Init: return "init";
    case PoOrigin::ServicePreserves: return "service";
    case PoOrigin::ComplianceFwd: return "compliance-fwd";
    case PoOrigin::ComplianceBwd: return "compliance-bwd";
  }
  return "?";
}

std::map<std::string, Expr> constant_definitions(const ComponentDef& c) {
  std::map<std::string, Expr> out;
  for (const auto& k : c.constants)
    if (k.init) out.emplace(k.name, *k.init);
  return out;
}

std::set<std::string> written_variables(const ComponentDef& c, const ServiceDef& s) {
  std::set<std::string> vars = variable_names(c);
  std::set<std::string> out;
  for (const auto& p : s.post)
    for (const auto& k : free_vars(p.body))
      if (k.frame == Frame::Current && vars.contains(k.name)) out.insert(k.name);
  if (s.behavior) {
    for (const auto& t : s.behavior->transitions) {
      const Action& a = t.action;
      if ((a.kind == ActionKind::Assign || a.kind == ActionKind::CallRet) && vars.contains(a.target))
        out.insert(a.target);
      for (const auto& v : a.vars)
        if (vars.contains(v)) out.insert(v);
    }
  }
  // Locals shadow nothing: a local with a state name is reported by resolve.
  for (const auto& l : s.locals) out.erase(l.name);
  return out;
}

ProofObligation gen_init_po(const ComponentDef& c, std::vector<Diagnostic>* warnings) {
  ProofObligation po;
  po.id = "consistency_" + c.name + "_init_0";
  po.origin = PoOrigin::Init;
  po.component = c.name;
  po.unit = c.unit;
  po.loc = c.loc;
  auto consts = constant_definitions(c);

  std::vector<Expr> hyp;
  for (const auto& v : c.variables) {
    auto it = std::find_if(c.initialization.rbegin(), c.initialization.rend(),
                           [&](const Assignment& a) { return a.variable == v.name; });
    if (it == c.initialization.rend()) {
      if (warnings) {
        warnings->push_back(make_diag(Severity::Warning, Phase::Consistency, "possibly-uninitialized", c.unit, v.loc,
                                      "variable " + v.name + " of " + c.name +
                                          " has no INITIALIZATION entry; any value is assumed"));
      }
      continue;
    }
    hyp.push_back(ex::eq(ex::var(v.name), fold_constants(it->value, consts)));
  }
  std::vector<Expr> goal;
  for (const auto& p : c.invariant) {
    Expr body = fold_constants(p.body, consts);
    po.goal_parts.emplace_back(p.label, body);
    goal.push_back(std::move(body));
  }
  po.hypothesis = ex::conj(hyp);
  po.goal = ex::conj(goal);
  add_state_scope(c, false, po.scope);
  abstract_into(po);
  return po;
}

std::vector<ProofObligation> gen_service_pos(const ComponentDef& c) {
  std::vector<ProofObligation> out;
  auto consts = constant_definitions(c);
  const std::set<std::string> vars = variable_names(c);
  for (const auto& s : c.services) {
    if (s.kind != ServiceKind::Provided) continue;
    const std::set<std::string> frozen = frozen_names(c, &s);
    auto prep = [&](const Expr& e) { return set_frame(fold_constants(e, consts), frozen, Frame::Current); };

    ProofObligation po;
    po.id = "consistency_" + c.name + "_" + s.name + "_0";
    po.origin = PoOrigin::ServicePreserves;
    po.component = c.name;
    po.service = s.name;
    po.unit = c.unit;
    po.loc = s.loc;

    std::vector<Expr> hyp;
    for (const auto& p : c.invariant) hyp.push_back(set_frame(prep(p.body), vars, Frame::Old));
    for (const auto& p : s.pre) hyp.push_back(set_frame(prep(p.body), vars, Frame::Old));
    for (const auto& p : s.post) hyp.push_back(prep(p.body));
    const auto written = written_variables(c, s);
    for (const auto& v : c.variables) {
      if (!written.contains(v.name)) hyp.push_back(ex::eq(ex::var(v.name), ex::var(v.name, Frame::Old)));
    }
    std::vector<Expr> goal;
    for (const auto& p : c.invariant) {
      Expr body = prep(p.body);
      po.goal_parts.emplace_back(p.label, body);
      goal.push_back(std::move(body));
    }
    po.hypothesis = ex::conj(hyp);
    po.goal = ex::conj(goal);
    add_state_scope(c, true, po.scope);
    for (const auto& p : s.params) po.scope.push_back(ScopeVar{VarKey{p.name, Frame::Current}, p.type});
    if (s.return_type) po.scope.push_back(ScopeVar{VarKey{kResultName, Frame::Current}, *s.return_type});
    abstract_into(po);
    out.push_back(std::move(po));
  }
  return out;
}

std::vector<ProofObligation> gen_compliance_pos(const ResolvedModel& m, const Assembly& a, const AssemblyLink& l,
                                                std::vector<Diagnostic>* errors) {
  const Endpoint& pe = l.provided_end();
  const Endpoint& re = l.required_end();
  const ComponentDef* pc = m.instance_component(a, pe.instance);
  const ComponentDef* rc = m.instance_component(a, re.instance);
  const ServiceDef* prov = m.endpoint_service(a, pe);
  const ServiceDef* req = m.endpoint_service(a, re);
  if (!pc || !rc || !prov || !req) return {};

  auto pconsts = constant_definitions(*pc);
  auto rconsts = constant_definitions(*rc);
  std::map<std::string, Expr> sigma;
  for (const auto& map : l.context_mapping) {
    if (map.instance != re.instance) continue;
    sigma.emplace(map.variable, fold_constants(strip_qualifier(map.value, pe.instance), pconsts));
  }
  bool complete = true;
  for (const auto& v : used_virtual_variables(*req)) {
    if (sigma.contains(v)) continue;
    complete = false;
    if (errors) {
      errors->push_back(make_diag(Severity::Error, Phase::Compliance, "incomplete-context-mapping", a.unit, l.loc,
                                  "link @" + l.label + " does not map virtual variable " + v + " of " + re.instance +
                                      "." + req->name));
    }
  }
  if (!complete) return {};
  for (std::size_t i = 0; i < req->params.size() && i < prov->params.size(); ++i) {
    if (req->params[i].name != prov->params[i].name) sigma.emplace(req->params[i].name, ex::var(prov->params[i].name));
  }

  const std::set<std::string> pvars = variable_names(*pc);
  const std::set<std::string> pfrozen = frozen_names(*pc, prov);
  auto prov_side = [&](const Expr& e) { return set_frame(fold_constants(e, pconsts), pfrozen, Frame::Current); };
  auto req_side = [&](const Expr& e) {
    return set_frame(substitute(fold_constants(e, rconsts), sigma), pfrozen, Frame::Current);
  };

  Expr vinv = req_side(conjunction(req->virtual_invariant));
  // provider consistency is checked separately, so its invariant is assumed here
  Expr pinv = prov_side(conjunction(pc->invariant));
  Scope scope;
  add_state_scope(*pc, true, scope);
  for (const auto& p : prov->params) scope.push_back(ScopeVar{VarKey{p.name, Frame::Current}, p.type});
  if (prov->return_type) scope.push_back(ScopeVar{VarKey{kResultName, Frame::Current}, *prov->return_type});

  std::vector<ProofObligation> out;
  const std::string base = "compliance_" + pc->name + "_" + prov->name + "_";
  {
    ProofObligation po;
    po.id = base + "0";
    po.origin = PoOrigin::ComplianceFwd;
    po.component = pc->name;
    po.service = prov->name;
    po.link = l.label;
    po.unit = a.unit;
    po.loc = l.loc;
    po.hypothesis = ex::conj({pinv, vinv, req_side(conjunction(req->pre))});
    for (const auto& p : prov->pre) po.goal_parts.emplace_back(p.label, prov_side(p.body));
    po.goal = prov_side(conjunction(prov->pre));
    po.scope = scope;
    abstract_into(po);
    out.push_back(std::move(po));
  }
  {
    ProofObligation po;
    po.id = base + "1";
    po.origin = PoOrigin::ComplianceBwd;
    po.component = pc->name;
    po.service = prov->name;
    po.link = l.label;
    po.unit = a.unit;
    po.loc = l.loc;
    po.hypothesis = ex::conj({set_frame(pinv, pvars, Frame::Old), set_frame(vinv, pvars, Frame::Old), pinv, vinv,
                              prov_side(conjunction(prov->post))});
    for (const auto& p : req->post) po.goal_parts.emplace_back(p.label, req_side(p.body));
    po.goal = req_side(conjunction(req->post));
    po.scope = scope;
    abstract_into(po);
    out.push_back(std::move(po));
  }
  return out;
}

std::vector<Diagnostic> check_obligations(const std::vector<ProofObligation>& pos, const Bounds& b) {
  std::vector<Diagnostic> out;
  for (const auto& po : pos) {
    Verdict v;
    try {
      v = check_implication(po.hypothesis, po.goal, po.scope, b);
    } catch (const SearchLimitError& e) {
      out.push_back(po_diag(po, Severity::Warning, "search-limit",
                            describe(po) + ": obligation " + po.id + " not decided (" + e.what() + ")"));
      continue;
    }
    if (v.holds()) {
      out.push_back(po_diag(po, Severity::Info, "obligation-holds-within-bound",
                            describe(po) + ": obligation " + po.id + " has no counterexample within bound " +
                                std::to_string(b.int_bound)));
      continue;
    }
    std::string broken;
    for (const auto& [label, body] : po.goal_parts) {
      bool ok = true;
      try {
        ok = evaluate_bool(body, v.counterexample);
      } catch (const EvalError&) {
        continue;
      }
      if (!ok) broken += (broken.empty() ? "" : ", ") + (label.empty() ? pretty_print(body) : "@" + label);
    }
    std::string code;
    std::string what;
    switch (po.origin) {
      case PoOrigin::Init:
        code = "invariant-not-established";
        what = "does not establish the invariant";
        break;
      case PoOrigin::ServicePreserves:
        code = "invariant-not-preserved";
        what = "does not preserve the invariant";
        break;
      case PoOrigin::ComplianceFwd:
        code = "compliance-pre-not-implied";
        what = "the required pre-condition does not imply the provided pre-condition";
        break;
      case PoOrigin::ComplianceBwd:
        code = "compliance-post-not-implied";
        what = "the provided post-condition does not imply the required post-condition";
        break;
    }
    std::string msg = describe(po) + ": " + what;
    if (!broken.empty()) msg += " (" + broken + ")";
    msg += "; counterexample " + to_string(v.counterexample);
    Diagnostic d = po_diag(po, Severity::Error, std::move(code), std::move(msg));
    d.counterexample = v.counterexample;
    out.push_back(std::move(d));
  }
  return out;
}

std::string export_smtlib(const ProofObligation& po) {
  return export_smtlib(SmtInput{po.id, po.hypothesis, po.goal, po.scope});
}

}  // namespace kmelia
