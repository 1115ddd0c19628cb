#include "kmelia/model.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace kmelia {

Expr conjunction(const std::vector<Predicate>& preds) {
  std::vector<Expr> parts;
  parts.reserve(preds.size());
  for (const auto& p : preds) parts.push_back(p.body);
  return ex::conj(parts);
}

int Elts::state_index(const std::string& s) const {
  auto it = std::find(states.begin(), states.end(), s);
  return it == states.end() ? -1 : static_cast<int>(it - states.begin());
}

bool Elts::is_final(const std::string& s) const {
  return std::find(finals.begin(), finals.end(), s) != finals.end();
}

const ServiceDef* ComponentDef::find_service(const std::string& n) const {
  for (const auto& s : services)
    if (s.name == n) return &s;
  return nullptr;
}

const StateVar* ComponentDef::find_state(const std::string& n) const {
  for (const auto* list : {&constants, &variables})
    for (const auto& v : *list)
      if (v.name == n) return &v;
  return nullptr;
}

const Instance* Assembly::find_instance(const std::string& n) const {
  for (const auto& i : instances)
    if (i.name == n) return &i;
  return nullptr;
}

const AssemblyLink* Assembly::find_link(const std::string& label) const {
  for (const auto& l : links)
    if (l.label == label) return &l;
  return nullptr;
}

ResolvedModel::ResolvedModel(std::map<std::string, ComponentDef> components,
                             std::map<std::string, Assembly> assemblies, std::vector<SymbolBinding> symbols)
    : components_(std::move(components)), assemblies_(std::move(assemblies)), symbols_(std::move(symbols)) {}

const ComponentDef* ResolvedModel::component(const std::string& name) const {
  auto it = components_.find(name);
  return it == components_.end() ? nullptr : &it->second;
}

const ComponentDef* ResolvedModel::instance_component(const Assembly& a, const std::string& instance) const {
  const Instance* inst = a.find_instance(instance);
  return inst ? component(inst->component) : nullptr;
}

const ServiceDef* ResolvedModel::endpoint_service(const Assembly& a, const Endpoint& e) const {
  const ComponentDef* c = instance_component(a, e.instance);
  return c ? c->find_service(e.service) : nullptr;
}

std::optional<DataType> ServiceScope::lookup(const std::string& name) const {
  for (const auto* m : {&locals, &params, &virtuals, &state}) {
    auto it = m->find(name);
    if (it != m->end()) return it->second;
  }
  return std::nullopt;
}

ServiceScope service_scope(const ComponentDef& c, const ServiceDef& s) {
  ServiceScope sc;
  for (const auto* list : {&c.constants, &c.variables})
    for (const auto& v : *list) sc.state.emplace(v.name, v.type);
  for (const auto& p : s.params) sc.params.emplace(p.name, p.type);
  for (const auto& p : s.locals) sc.locals.emplace(p.name, p.type);
  for (const auto& v : s.virtual_vars) sc.virtuals.emplace(v.name, v.type);
  sc.result = s.return_type;
  return sc;
}

namespace {

// Walks one model and binds identifier occurrences.
class Resolver {
 public:
  Resolver(std::vector<Diagnostic>& diags, std::vector<SymbolBinding>& symbols)
      : diags_(diags), symbols_(symbols) {}

  void component(const ComponentDef& c) {
    unit_ = c.unit;
    const std::string base = c.name;

    for (const auto& [names, kind] : {std::pair{&c.provided, ServiceKind::Provided},
                                      std::pair{&c.required, ServiceKind::Required}}) {
      for (const auto& n : *names) {
        const ServiceDef* s = c.find_service(n);
        if (!s) {
          error("missing-service-definition", c.loc,
                "interface service " + n + " of " + c.name + " has no definition");
        } else if (s->kind != kind) {
          error("service-kind-mismatch", s->loc,
                "service " + n + " is listed as " + (kind == ServiceKind::Provided ? "provided" : "required") +
                    " but defined as " + (s->kind == ServiceKind::Provided ? "provided" : "required"));
        }
      }
    }
    for (const auto& s : c.services) {
      if (const StateVar* v = c.find_state(s.name)) {
        error("name-collision", s.loc, "service " + s.name + " collides with state item declared at line " +
                                           std::to_string(v->loc.line));
      }
    }
    auto check_type = [&](const DataType& t, SourceLoc loc) {
      const DataType* cur = &t;
      while (cur->kind == TypeKind::Set && cur->elem) cur = cur->elem.get();
      if (cur->kind == TypeKind::Named && c.uses.empty()) {
        error("undeclared-library-type", loc,
              "type " + cur->name + " requires a USES library declaration in " + c.name);
      }
    };
    for (const auto* list : {&c.constants, &c.variables})
      for (const auto& v : *list) check_type(v.type, v.loc);
    for (const auto& s : c.services) {
      for (const auto* ps : {&s.params, &s.locals})
        for (const auto& p : *ps) check_type(p.type, p.loc);
      for (const auto& v : s.virtual_vars) check_type(v.type, v.loc);
      if (s.return_type) check_type(*s.return_type, s.loc);
    }

    Names state;
    for (const auto& v : c.constants) state.emplace(v.name, base + ".const." + v.name);
    for (const auto& v : c.variables) state.emplace(v.name, base + ".var." + v.name);

    for (std::size_t i = 0; i < c.constants.size(); ++i) {
      if (!c.constants[i].init) continue;
      Names consts;
      for (const auto& k : c.constants) consts.emplace(k.name, base + ".const." + k.name);
      bind(*c.constants[i].init, base + "/const/" + c.constants[i].name, {&consts}, Ctx{});
    }
    for (std::size_t i = 0; i < c.invariant.size(); ++i) {
      bind(c.invariant[i].body, base + "/invariant/" + c.invariant[i].label, {&state}, Ctx{});
    }
    std::set<std::string> vars;
    for (const auto& v : c.variables) vars.insert(v.name);
    for (std::size_t i = 0; i < c.initialization.size(); ++i) {
      const auto& a = c.initialization[i];
      if (!vars.contains(a.variable)) {
        bool is_const = c.find_state(a.variable) != nullptr;
        error("unknown-initialized-variable", a.loc,
              is_const ? "constant " + a.variable + " cannot be assigned in INITIALIZATION"
                       : "initialized variable " + a.variable + " is not declared in VARIABLES");
      } else {
        record(base + "/init/" + std::to_string(i) + "/target", a.variable, base + ".var." + a.variable);
      }
      bind(a.value, base + "/init/" + std::to_string(i), {&state}, Ctx{});
    }
    for (const auto& s : c.services) service(c, s, state);
  }

  void assembly(const Assembly& a, const std::map<std::string, ComponentDef>& components) {
    unit_ = a.unit;
    const std::string base = a.name;
    for (const auto& inst : a.instances) {
      if (!components.contains(inst.component)) {
        error("unresolved-component", inst.loc,
              "instance " + inst.name + " refers to unknown component type " + inst.component);
      } else {
        record(base + "/instance/" + inst.name, inst.component, "component." + inst.component);
      }
    }
    auto component_of = [&](const std::string& inst) -> const ComponentDef* {
      const Instance* i = a.find_instance(inst);
      if (!i) return nullptr;
      auto it = components.find(i->component);
      return it == components.end() ? nullptr : &it->second;
    };
    for (const auto& l : a.links) {
      const std::string lpath = base + "/link/" + l.label;
      const ServiceDef* ends[2] = {nullptr, nullptr};
      int k = 0;
      for (const Endpoint* e : {&l.end_a, &l.end_b}) {
        const Instance* inst = a.find_instance(e->instance);
        if (!inst) {
          error("unknown-instance", e->loc, "link @" + l.label + " names undeclared instance " + e->instance);
        } else if (const ComponentDef* c = component_of(e->instance)) {
          ends[k] = c->find_service(e->service);
          if (!ends[k]) {
            error("unknown-service", e->loc,
                  "component " + c->name + " (instance " + e->instance + ") declares no service " + e->service);
          } else {
            record(lpath + "/end" + std::to_string(k), e->service, c->name + ".service." + e->service);
          }
        }
        ++k;
      }
      if (ends[0] && ends[1]) {
        const ServiceDef* prov = l.kind == LinkKind::ProvidedToRequired ? ends[0] : ends[1];
        const ServiceDef* req = l.kind == LinkKind::ProvidedToRequired ? ends[1] : ends[0];
        if (prov->kind != ServiceKind::Provided || req->kind != ServiceKind::Required) {
          error("link-kind-mismatch", l.loc,
                "link @" + l.label + " must connect exactly one provided and one required service in " +
                    (l.kind == LinkKind::ProvidedToRequired ? "p-r" : "r-p") + " order");
        }
      }
      for (const auto& s : l.sublinks) {
        if (a.find_link(s)) record(lpath + "/sublink/" + s, s, base + ".link." + s);
      }
      for (std::size_t i = 0; i < l.context_mapping.size(); ++i) {
        const auto& m = l.context_mapping[i];
        const std::string mpath = lpath + "/mapping/" + std::to_string(i);
        if (const ComponentDef* rc = component_of(m.instance)) {
          // lhs: a virtual variable of the required endpoint's service
          const ServiceDef* req = nullptr;
          const Endpoint& re = l.required_end();
          if (re.instance == m.instance) req = rc->find_service(re.service);
          bool found = false;
          if (req) {
            for (const auto& v : req->virtual_vars) {
              if (v.name == m.variable) {
                record(mpath + "/lhs", m.variable, rc->name + "." + req->name + ".virtual." + m.variable);
                found = true;
              }
            }
          }
          if (!found) {
            error("unresolved-identifier", m.loc,
                  "mapped name " + m.instance + "." + m.variable +
                      " is not a virtual variable of the required service of @" + l.label);
          }
        } else {
          error("unknown-instance", m.loc, "mapping names undeclared instance " + m.instance);
        }
        bind_mapping(m.value, mpath, a, components, l);
      }
    }
    check_sublink_cycles(a);
  }

 private:
  using Names = std::map<std::string, std::string>;

  struct Ctx {
    bool allow_old = false;
    bool allow_result = false;
  };

  void error(std::string code, SourceLoc loc, std::string msg) {
    diags_.push_back(make_diag(Severity::Error, Phase::Parse, std::move(code), unit_, loc, std::move(msg)));
  }
  void record(std::string site, std::string name, std::string decl) {
    symbols_.push_back(SymbolBinding{std::move(site), std::move(name), std::move(decl)});
  }

  void bind(const Expr& e, const std::string& path, const std::vector<const Names*>& scopes, Ctx ctx) {
    int counter = 0;
    bind_rec(e, path, scopes, ctx, counter);
  }

  void bind_rec(const Expr& e, const std::string& path, const std::vector<const Names*>& scopes, Ctx ctx,
                int& counter) {
    switch (e.kind) {
      case ExprKind::Var: {
        std::string site = path + "#" + std::to_string(counter++);
        if (!e.qualifier.empty()) {
          error("unresolved-identifier", e.loc,
                "qualified reference " + e.qualifier + "." + e.name + " is only allowed in context mappings");
          break;
        }
        if (e.frame == Frame::Old && !ctx.allow_old) {
          error("old-misuse", e.loc, "old(" + e.name + ") is only allowed in post-conditions");
        }
        bool found = false;
        for (const Names* s : scopes) {
          auto it = s->find(e.name);
          if (it != s->end()) {
            record(site, e.name, it->second);
            found = true;
            break;
          }
        }
        if (!found) error("unresolved-identifier", e.loc, "unknown identifier " + e.name);
        break;
      }
      case ExprKind::Result:
        if (!ctx.allow_result) {
          error("result-misuse", e.loc,
                "result is only allowed in the post-condition or behavior of a service with a return type");
        } else {
          record(path + "#" + std::to_string(counter++), "result", "result");
        }
        break;
      case ExprKind::Call:
        record(path + "#" + std::to_string(counter++), e.name, "function." + e.name);
        break;
      default:
        break;
    }
    for (const auto& op : e.operands) bind_rec(op, path, scopes, ctx, counter);
  }

  void service(const ComponentDef& c, const ServiceDef& s, const Names& state) {
    const std::string base = c.name + "/" + s.name;
    const std::string decl = c.name + "." + s.name;
    Names params, locals, virtuals;
    for (const auto& p : s.params) params.emplace(p.name, decl + ".param." + p.name);
    for (const auto& p : s.locals) locals.emplace(p.name, decl + ".local." + p.name);
    for (const auto& v : s.virtual_vars) virtuals.emplace(v.name, decl + ".virtual." + v.name);
    const bool has_result = s.return_type.has_value();

    for (const auto& p : s.locals) {
      if (params.contains(p.name)) continue;  // duplicate reported by the parser
      if (state.contains(p.name)) {
        error("name-collision", p.loc, "local " + p.name + " of " + s.name + " shadows a state item");
      }
    }

    std::vector<const Names*> assertion_scope{&params, &virtuals, &state};
    for (std::size_t i = 0; i < s.virtual_invariant.size(); ++i)
      bind(s.virtual_invariant[i].body, base + "/vinv/" + std::to_string(i), assertion_scope, Ctx{});
    for (std::size_t i = 0; i < s.pre.size(); ++i)
      bind(s.pre[i].body, base + "/pre/" + std::to_string(i), assertion_scope, Ctx{});
    for (std::size_t i = 0; i < s.post.size(); ++i)
      bind(s.post[i].body, base + "/post/" + std::to_string(i), assertion_scope, Ctx{true, has_result});

    if (!s.behavior) return;
    const Elts& b = *s.behavior;
    std::vector<const Names*> body_scope{&locals, &params, &virtuals, &state};
    auto writable = [&](const std::string& name, SourceLoc loc, const std::string& site) {
      if (name == "result" || name == "Result") {
        if (!has_result) error("result-misuse", loc, "service " + s.name + " has no return type");
        else record(site, name, "result");
        return;
      }
      if (auto it = locals.find(name); it != locals.end()) {
        record(site, name, it->second);
        return;
      }
      if (params.contains(name)) {
        error("assign-to-parameter", loc, "parameter " + name + " is read-only");
        return;
      }
      const StateVar* v = c.find_state(name);
      if (v && v->is_constant) {
        error("assign-to-constant", loc, "constant " + name + " is read-only");
      } else if (v) {
        record(site, name, state.at(name));
      } else {
        error("unresolved-identifier", loc, "unknown assignment target " + name);
      }
    };
    if (b.initial.empty() || b.state_index(b.initial) < 0) {
      error("syntax-error", b.loc, "behavior of " + s.name + " has no initial state");
    }
    for (std::size_t i = 0; i < b.transitions.size(); ++i) {
      const auto& t = b.transitions[i];
      const std::string tp = base + "/behavior/" + std::to_string(i);
      if (t.guard) bind(*t.guard, tp + "/guard", body_scope, Ctx{false, has_result});
      const Action& a = t.action;
      for (std::size_t k = 0; k < a.args.size(); ++k)
        bind(a.args[k], tp + "/arg" + std::to_string(k), body_scope, Ctx{false, has_result});
      if (a.value) bind(*a.value, tp + "/value", body_scope, Ctx{false, has_result});
      if (a.kind == ActionKind::Assign || a.kind == ActionKind::CallRet) writable(a.target, t.loc, tp + "/target");
      for (std::size_t k = 0; k < a.vars.size(); ++k) writable(a.vars[k], t.loc, tp + "/recv" + std::to_string(k));
      if (a.kind == ActionKind::Call || a.kind == ActionKind::CallRet) {
        if (c.find_service(a.service)) {
          record(tp + "/service", a.service, c.name + ".service." + a.service);
        } else {
          record(tp + "/service", a.service, "function." + a.service);
        }
      }
      if (a.kind == ActionKind::Emit || a.kind == ActionKind::Receive) {
        if (c.find_service(a.channel)) {
          record(tp + "/channel", a.channel, c.name + ".service." + a.channel);
        } else {
          record(tp + "/channel", a.channel, "channel." + a.channel);
        }
      }
    }
  }

  void bind_mapping(const Expr& e, const std::string& path, const Assembly& a,
                    const std::map<std::string, ComponentDef>& components, const AssemblyLink& l) {
    int counter = 0;
    std::function<void(const Expr&)> walk = [&](const Expr& x) {
      if (x.kind == ExprKind::Var) {
        std::string site = path + "#" + std::to_string(counter++);
        std::string inst = x.qualifier.empty() ? l.provided_end().instance : x.qualifier;
        const Instance* i = a.find_instance(inst);
        auto it = i ? components.find(i->component) : components.end();
        if (it == components.end()) {
          error("unresolved-identifier", x.loc, "unknown instance in reference " + inst + "." + x.name);
        } else if (const StateVar* v = it->second.find_state(x.name)) {
          record(site, x.name, it->second.name + (v->is_constant ? ".const." : ".var.") + x.name);
        } else {
          error("unresolved-identifier", x.loc,
                "component " + it->second.name + " has no state item " + x.name);
        }
      } else if (x.kind == ExprKind::Result) {
        error("result-misuse", x.loc, "result cannot appear in a context mapping");
      }
      for (const auto& op : x.operands) walk(op);
    };
    walk(e);
  }

  void check_sublink_cycles(const Assembly& a) {
    std::map<std::string, int> color;  // 0 white, 1 grey, 2 black
    std::function<bool(const AssemblyLink&)> dfs = [&](const AssemblyLink& l) {
      color[l.label] = 1;
      for (const auto& s : l.sublinks) {
        const AssemblyLink* child = a.find_link(s);
        if (!child) continue;
        if (color[s] == 1) return true;
        if (color[s] == 0 && dfs(*child)) return true;
      }
      color[l.label] = 2;
      return false;
    };
    for (const auto& l : a.links) {
      if (color[l.label] == 0 && dfs(l)) {
        error("sublink-cycle", l.loc, "sublinks of @" + l.label + " form a cycle");
        return;
      }
    }
  }

  std::vector<Diagnostic>& diags_;
  std::vector<SymbolBinding>& symbols_;
  std::string unit_;
};

}  // namespace

ResolveResult resolve(const ParsedUnits& units) {
  std::vector<Diagnostic> diags;
  std::vector<SymbolBinding> symbols;
  std::map<std::string, ComponentDef> components;
  std::map<std::string, Assembly> assemblies;
  std::set<std::string> names;
  for (const auto& c : units.components) {
    if (!names.insert(c.name).second) {
      diags.push_back(make_diag(Severity::Error, Phase::Parse, "duplicate-unit", c.unit, c.loc,
                                "unit name " + c.name + " is declared more than once"));
      continue;
    }
    components.emplace(c.name, c);
  }
  for (const auto& a : units.assemblies) {
    if (!names.insert(a.name).second) {
      diags.push_back(make_diag(Severity::Error, Phase::Parse, "duplicate-unit", a.unit, a.loc,
                                "unit name " + a.name + " is declared more than once"));
      continue;
    }
    assemblies.emplace(a.name, a);
  }
  Resolver r(diags, symbols);
  for (const auto& [_, c] : components) r.component(c);
  for (const auto& [_, a] : assemblies) r.assembly(a, components);
  sort_diagnostics(diags);
  return {ResolvedModel(std::move(components), std::move(assemblies), std::move(symbols)), std::move(diags)};
}

}  // namespace kmelia
