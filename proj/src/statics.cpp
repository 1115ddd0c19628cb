#include "kmelia/statics.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "kmelia/assertions.hpp"
#include "kmelia/parser.hpp"

namespace kmelia {

namespace {

Diagnostic diag(Severity s, std::string code, const std::string& unit, SourceLoc loc, std::string msg) {
  return make_diag(s, Phase::Static, std::move(code), unit, loc, std::move(msg));
}

std::string params_text(const ServiceDef& s) {
  std::string out = s.name + "(";
  for (std::size_t i = 0; i < s.params.size(); ++i) {
    if (i) out += ", ";
    out += to_string(s.params[i].type);
  }
  out += ")";
  if (s.return_type) out += " : " + to_string(*s.return_type);
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

DependencyGraph dependency_graph(const ComponentDef& c) {
  DependencyGraph g;
  g.component = c.name;
  for (const auto& s : c.services) g.nodes.push_back(s.name);
  for (const auto& s : c.services) {
    for (const auto& [list, kind] : {std::pair{&s.intrequires, DependencyKind::Needs},
                                     std::pair{&s.extrequires, DependencyKind::External},
                                     std::pair{&s.subprovides, DependencyKind::Sub},
                                     std::pair{&s.calrequires, DependencyKind::CallerProvided}}) {
      for (const auto& t : *list) g.edges.push_back(DependencyEdge{s.name, t, kind});
    }
  }
  return g;
}

std::vector<Diagnostic> check_signatures(const ResolvedModel& m, const Assembly& a) {
  std::vector<Diagnostic> out;
  for (const auto& l : a.links) {
    const ServiceDef* prov = m.endpoint_service(a, l.provided_end());
    const ServiceDef* req = m.endpoint_service(a, l.required_end());
    if (!prov || !req) continue;
    const std::string where = "link @" + l.label + ": ";
    if (prov->params.size() != req->params.size()) {
      out.push_back(diag(Severity::Error, "arity-mismatch", a.unit, l.loc,
                         where + params_text(*prov) + " takes " + std::to_string(prov->params.size()) +
                             " parameter(s) but " + params_text(*req) + " takes " +
                             std::to_string(req->params.size())));
    } else {
      for (std::size_t i = 0; i < prov->params.size(); ++i) {
        if (!(prov->params[i].type == req->params[i].type)) {
          out.push_back(diag(Severity::Error, "param-type-mismatch", a.unit, l.loc,
                             where + "parameter " + std::to_string(i + 1) + " is " +
                                 to_string(prov->params[i].type) + " in " + prov->name + " but " +
                                 to_string(req->params[i].type) + " in " + req->name));
        }
      }
    }
    bool same_return = prov->return_type.has_value() == req->return_type.has_value() &&
                       (!prov->return_type || *prov->return_type == *req->return_type);
    if (!same_return) {
      auto rt = [](const ServiceDef& s) { return s.return_type ? to_string(*s.return_type) : std::string("none"); };
      out.push_back(diag(Severity::Error, "return-type-mismatch", a.unit, l.loc,
                         where + prov->name + " returns " + rt(*prov) + " but " + req->name + " expects " +
                             rt(*req)));
    }
  }
  return out;
}

std::vector<Diagnostic> check_structure(const ResolvedModel& m, const Assembly& a) {
  std::vector<Diagnostic> out;
  for (const auto& l : a.links) {
    const Endpoint& pe = l.provided_end();
    const Endpoint& re = l.required_end();
    const ServiceDef* prov = m.endpoint_service(a, pe);
    const ServiceDef* req = m.endpoint_service(a, re);
    if (!prov || !req) continue;
    struct Side {
      const Endpoint* end;
      const ServiceDef* svc;
    };
    const Side sides[2] = {{&pe, prov}, {&re, req}};

    // (instance, calrequires name) -> covered ; (instance, subprovides name) -> used
    std::set<std::pair<std::string, std::string>> covered, used;
    for (const auto& label : l.sublinks) {
      const AssemblyLink* sub = a.find_link(label);
      if (!sub) continue;
      const Endpoint* ends[2] = {&sub->end_a, &sub->end_b};
      bool instances_ok = false;
      bool matched = false;
      for (int k = 0; k < 2 && !matched; ++k) {
        const Endpoint& caller_end = *ends[k];
        const Endpoint& callee_end = *ends[1 - k];
        for (int s = 0; s < 2 && !matched; ++s) {
          const Side& need = sides[s];
          const Side& give = sides[1 - s];
          if (caller_end.instance != need.end->instance || callee_end.instance != give.end->instance) continue;
          instances_ok = true;
          if (contains(need.svc->calrequires, caller_end.service) &&
              contains(give.svc->subprovides, callee_end.service)) {
            covered.emplace(need.end->instance + "/" + need.svc->name, caller_end.service);
            used.emplace(give.end->instance + "/" + give.svc->name, callee_end.service);
            matched = true;
          }
        }
      }
      if (matched) continue;
      if (!instances_ok) {
        out.push_back(diag(Severity::Error, "structure-mismatch", a.unit, sub->loc,
                           "sublink @" + sub->label + " of @" + l.label + " must connect instances " +
                               pe.instance + " and " + re.instance));
      } else {
        out.push_back(diag(Severity::Error, "dangling-sublink", a.unit, sub->loc,
                           "sublink @" + sub->label + " does not connect a calrequires service of @" + l.label +
                               " to a subprovides service of the opposite endpoint"));
      }
    }
    for (const Side& s : sides) {
      for (const auto& need : s.svc->calrequires) {
        if (!covered.contains({s.end->instance + "/" + s.svc->name, need})) {
          out.push_back(diag(Severity::Error, "missing-sublink", a.unit, l.loc,
                             "link @" + l.label + ": calrequires " + need + " of " + s.end->instance + "." +
                                 s.svc->name + " is not served by any sublink"));
        }
      }
      for (const auto& give : s.svc->subprovides) {
        if (!used.contains({s.end->instance + "/" + s.svc->name, give})) {
          out.push_back(diag(Severity::Info, "unused-subprovide", a.unit, l.loc,
                             "link @" + l.label + ": subprovided " + give + " of " + s.end->instance + "." +
                                 s.svc->name + " is not used by the opposite endpoint"));
        }
      }
    }
  }
  return out;
}

std::vector<Diagnostic> check_accessibility(const ComponentDef& c) {
  std::vector<Diagnostic> out;
  for (const auto& s : c.services) {
    for (const auto& t : s.intrequires) {
      if (!c.find_service(t)) {
        out.push_back(diag(Severity::Error, "unavailable-internal-service", c.unit, s.loc,
                           s.name + " intrequires " + t + ", which " + c.name + " does not define"));
      }
    }
    for (const auto& t : s.extrequires) {
      if (!contains(c.required, t)) {
        out.push_back(diag(Severity::Error, "undeclared-external-requirement", c.unit, s.loc,
                           s.name + " extrequires " + t + ", which is not in the requires interface of " +
                               c.name));
      }
    }
    for (const auto& t : s.subprovides) {
      const ServiceDef* d = c.find_service(t);
      if (!d || d->kind != ServiceKind::Provided) {
        out.push_back(diag(Severity::Error, "undefined-subservice", c.unit, s.loc,
                           s.name + " subprovides " + t + ", which has no provided definition in " + c.name));
      }
    }
    for (const auto& t : s.calrequires) {
      const ServiceDef* d = c.find_service(t);
      if (!d || d->kind != ServiceKind::Required) {
        out.push_back(diag(Severity::Error, "undefined-subservice", c.unit, s.loc,
                           s.name + " calrequires " + t + ", which has no required definition in " + c.name));
      }
    }
  }

  // Cycles through intrequires: one Warning per strongly connected component.
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& s : c.services)
    for (const auto& t : s.intrequires)
      if (c.find_service(t)) adj[s.name].push_back(t);
  std::map<std::string, int> index, low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  int counter = 0;
  std::function<void(const std::string&)> strong = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& w : adj[v]) {
      if (!index.contains(w)) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.contains(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] != index[v]) return;
    std::vector<std::string> scc;
    std::string w;
    do {
      w = stack.back();
      stack.pop_back();
      on_stack.erase(w);
      scc.push_back(w);
    } while (w != v);
    bool self_loop = contains(adj[v], v);
    if (scc.size() < 2 && !self_loop) return;
    // Report at the first member in declaration order.
    const ServiceDef* first = nullptr;
    for (const auto& s : c.services)
      if (contains(scc, s.name)) {
        first = &s;
        break;
      }
    std::sort(scc.begin(), scc.end());
    std::string names;
    for (const auto& n : scc) names += (names.empty() ? "" : ", ") + n;
    out.push_back(diag(Severity::Warning, "dependency-cycle", c.unit, first->loc,
                       "services {" + names + "} depend on each other through intrequires"));
  };
  for (const auto& s : c.services)
    if (!index.contains(s.name)) strong(s.name);
  return out;
}

std::vector<Diagnostic> check_observability(const ResolvedModel& m, const Assembly& a) {
  std::vector<Diagnostic> out;
  for (const auto& l : a.links) {
    for (const auto& map : l.context_mapping) {
      std::function<void(const Expr&)> walk = [&](const Expr& e) {
        if (e.kind == ExprKind::Var) {
          std::string inst = e.qualifier.empty() ? l.provided_end().instance : e.qualifier;
          if (const ComponentDef* c = m.instance_component(a, inst)) {
            const StateVar* v = c->find_state(e.name);
            if (v && !v->observable) {
              out.push_back(diag(Severity::Error, "non-observable-reference", a.unit, e.loc,
                                 "context mapping of @" + l.label + " reads " + inst + "." + e.name +
                                     ", which " + c->name + " does not declare obs"));
            }
          }
        }
        for (const auto& op : e.operands) walk(op);
      };
      walk(map.value);
    }
  }
  return out;
}

std::vector<std::string> used_virtual_variables(const ServiceDef& req) {
  std::set<std::string> names;
  for (const auto& v : req.virtual_vars) names.insert(v.name);
  std::set<std::string> used;
  for (const auto* preds : {&req.virtual_invariant, &req.pre, &req.post})
    for (const auto& p : *preds)
      for (const auto& k : free_vars(p.body))
        if (names.contains(k.name)) used.insert(k.name);
  std::vector<std::string> out;
  for (const auto& v : req.virtual_vars)
    if (used.contains(v.name)) out.push_back(v.name);
  return out;
}

std::vector<Diagnostic> check_mappings(const ResolvedModel& m, const Assembly& a) {
  std::vector<Diagnostic> out;
  for (const auto& l : a.links) {
    const ServiceDef* req = m.endpoint_service(a, l.required_end());
    const ServiceDef* prov = m.endpoint_service(a, l.provided_end());
    if (!req || !prov) continue;
    std::set<std::string> mapped;
    for (const auto& map : l.context_mapping) {
      if (map.instance != l.required_end().instance) continue;
      if (!mapped.insert(map.variable).second) {
        out.push_back(diag(Severity::Error, "duplicate-mapping", a.unit, map.loc,
                           "virtual variable " + map.variable + " is mapped more than once in @" + l.label));
      }
      auto vv = std::find_if(req->virtual_vars.begin(), req->virtual_vars.end(),
                             [&](const StateVar& v) { return v.name == map.variable; });
      if (vv == req->virtual_vars.end()) continue;
      TypeLookup lookup;
      for (const auto& inst : a.instances) {
        const ComponentDef* c = m.component(inst.component);
        if (!c) continue;
        for (const auto* list : {&c->constants, &c->variables}) {
          for (const auto& v : *list) {
            lookup.emplace(inst.name + "." + v.name, v.type);
            if (inst.name == l.provided_end().instance) lookup.emplace(v.name, v.type);
          }
        }
      }
      TypeCheck tc = type_of(map.value, lookup, std::nullopt, vv->type);
      if (!tc.type) {
        std::string msg = "mapping of " + map.variable + " in @" + l.label + " must have type " +
                          to_string(vv->type);
        if (!tc.errors.empty()) msg += ": " + tc.errors.front();
        out.push_back(diag(Severity::Error, "mapping-type-mismatch", a.unit, map.loc, std::move(msg)));
      }
    }
    for (const auto& v : used_virtual_variables(*req)) {
      if (!mapped.contains(v)) {
        out.push_back(diag(Severity::Error, "incomplete-context-mapping", a.unit, l.loc,
                           "link @" + l.label + " does not map virtual variable " + v + " of " +
                               l.required_end().instance + "." + req->name));
      }
    }
  }
  return out;
}

std::vector<Diagnostic> check_types(const ComponentDef& c) {
  std::vector<Diagnostic> out;
  TypeLookup state;
  for (const auto* list : {&c.constants, &c.variables})
    for (const auto& v : *list) state.emplace(v.name, v.type);
  auto report = [&](const TypeCheck& tc, SourceLoc loc, const std::string& where) {
    if (tc.type) return;
    std::string msg = where;
    if (!tc.errors.empty()) msg += ": " + tc.errors.front();
    out.push_back(diag(Severity::Error, "type-error", c.unit, loc, std::move(msg)));
  };
  for (const auto& k : c.constants)
    if (k.init) report(type_of(*k.init, state, std::nullopt, k.type), k.loc, "initializer of constant " + k.name);
  for (const auto& p : c.invariant)
    report(type_of(p.body, state, std::nullopt, DataType::boolean()), p.loc, "invariant @" + p.label);
  for (const auto& a : c.initialization) {
    const StateVar* v = c.find_state(a.variable);
    if (!v) continue;
    report(type_of(a.value, state, std::nullopt, v->type), a.loc, "initialization of " + a.variable);
  }
  for (const auto& s : c.services) {
    ServiceScope sc = service_scope(c, s);
    TypeLookup assertion_scope = state;
    for (const auto* m : {&sc.virtuals, &sc.params})
      for (const auto& [n, t] : *m) assertion_scope[n] = t;
    TypeLookup body_scope = assertion_scope;
    for (const auto& [n, t] : sc.locals) body_scope[n] = t;

    for (const auto& p : s.virtual_invariant)
      report(type_of(p.body, assertion_scope, std::nullopt, DataType::boolean()), p.loc,
             "virtual invariant of " + s.name);
    for (const auto& p : s.pre)
      report(type_of(p.body, assertion_scope, std::nullopt, DataType::boolean()), p.loc, "pre-condition of " + s.name);
    for (const auto& p : s.post)
      report(type_of(p.body, assertion_scope, s.return_type, DataType::boolean()), p.loc,
             "post-condition of " + s.name);
    if (!s.behavior) continue;
    auto target_type = [&](const std::string& name) -> std::optional<DataType> {
      if (name == kResultName || name == "Result") return s.return_type;
      auto it = body_scope.find(name);
      if (it == body_scope.end()) return std::nullopt;
      return it->second;
    };
    for (const auto& t : s.behavior->transitions) {
      const std::string where = "transition " + t.source + " -> " + t.target + " of " + s.name;
      if (t.guard) report(type_of(*t.guard, body_scope, s.return_type, DataType::boolean()), t.loc, where + " guard");
      const Action& act = t.action;
      const ServiceDef* callee =
          (act.kind == ActionKind::Call || act.kind == ActionKind::CallRet) ? c.find_service(act.service) : nullptr;
      for (std::size_t i = 0; i < act.args.size(); ++i) {
        std::optional<DataType> want;
        if (callee && i < callee->params.size()) want = callee->params[i].type;
        report(type_of(act.args[i], body_scope, s.return_type, want), t.loc, where + " argument " + std::to_string(i + 1));
      }
      if (callee && act.args.size() != callee->params.size()) {
        out.push_back(diag(Severity::Error, "type-error", c.unit, t.loc,
                           where + ": " + callee->name + " expects " + std::to_string(callee->params.size()) +
                               " argument(s), got " + std::to_string(act.args.size())));
      }
      if (act.kind == ActionKind::Assign && act.value) {
        if (auto tt = target_type(act.target))
          report(type_of(*act.value, body_scope, s.return_type, *tt), t.loc, where + " assignment to " + act.target);
      }
      if (act.kind == ActionKind::CallRet && callee) {
        auto tt = target_type(act.target);
        if (tt && (!callee->return_type || !(*callee->return_type == *tt))) {
          out.push_back(diag(Severity::Error, "type-error", c.unit, t.loc,
                             where + ": " + act.target + " has type " + to_string(*tt) + " but " + callee->name +
                                 " returns " +
                                 (callee->return_type ? to_string(*callee->return_type) : std::string("nothing"))));
        }
      }
    }
  }
  return out;
}

std::vector<Diagnostic> run_statics(const ResolvedModel& m) {
  std::vector<Diagnostic> out;
  auto append = [&out](std::vector<Diagnostic> d) { out.insert(out.end(), d.begin(), d.end()); };
  for (const auto& [_, c] : m.components()) {
    append(check_accessibility(c));
    append(check_types(c));
  }
  for (const auto& [_, a] : m.assemblies()) {
    append(check_signatures(m, a));
    append(check_structure(m, a));
    append(check_observability(m, a));
    append(check_mappings(m, a));
  }
  sort_diagnostics(out);
  return out;
}

}  // namespace kmelia
