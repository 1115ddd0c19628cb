#pragma once

// Domain types of the component model: components, services, behaviors,
// assemblies, and the resolved model every analysis consumes.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kmelia/diagnostic.hpp"
#include "kmelia/expr.hpp"

namespace kmelia {

struct StateVar {
  std::string name;
  DataType type;
  bool observable = false;
  bool is_constant = false;
  std::optional<Expr> init;  // constants only
  SourceLoc loc;

  bool operator==(const StateVar&) const = default;
};

/// A predicate with an optional `@label` (and optional `obs` marker, as in
/// post-condition clauses). Invariant predicates always carry a label.
struct Predicate {
  std::string label;
  bool observable = false;
  Expr body;
  SourceLoc loc;

  bool operator==(const Predicate&) const = default;
};

/// Conjunction of all predicate bodies; `true` when empty.
Expr conjunction(const std::vector<Predicate>& preds);

struct Param {
  std::string name;
  DataType type;
  SourceLoc loc;

  bool operator==(const Param&) const = default;
};

struct Assignment {
  std::string variable;
  Expr value;
  SourceLoc loc;

  bool operator==(const Assignment&) const = default;
};

enum class ActionKind : std::uint8_t { Emit, Receive, Assign, Call, CallRet, Tau };

/// One eLTS action label.
///   Emit     channel!message(args)
///   Receive  channel?message(vars)
///   Assign   target := value
///   Call     call service(args)
///   CallRet  callret target := service(args)
///   Tau      tau
struct Action {
  ActionKind kind = ActionKind::Tau;
  std::string channel;
  std::string message;
  std::string service;
  std::string target;
  std::vector<Expr> args;
  std::vector<std::string> vars;
  std::optional<Expr> value;

  bool operator==(const Action&) const = default;
};

struct Transition {
  std::string source;
  std::optional<Expr> guard;
  Action action;
  std::string target;
  SourceLoc loc;

  bool operator==(const Transition&) const = default;
};

/// Extended labelled transition system of one service.
struct Elts {
  std::vector<std::string> states;  // declaration order
  std::string initial;
  std::vector<std::string> finals;
  std::vector<Transition> transitions;
  SourceLoc loc;

  int state_index(const std::string& s) const;
  bool is_final(const std::string& s) const;
  bool operator==(const Elts&) const = default;
};

enum class ServiceKind : std::uint8_t { Provided, Required };

struct ServiceDef {
  ServiceKind kind = ServiceKind::Provided;
  std::string name;
  std::vector<Param> params;
  std::optional<DataType> return_type;
  std::vector<std::string> subprovides;
  std::vector<std::string> calrequires;
  std::vector<std::string> extrequires;
  std::vector<std::string> intrequires;
  std::vector<StateVar> virtual_vars;
  std::vector<Predicate> virtual_invariant;
  std::vector<Predicate> pre;
  std::vector<Param> locals;
  std::optional<Elts> behavior;
  std::vector<Predicate> post;
  SourceLoc loc;

  bool operator==(const ServiceDef&) const = default;
};

struct ComponentDef {
  std::string name;
  std::string unit;  // source path the component was parsed from
  std::vector<std::string> provided;
  std::vector<std::string> required;
  std::vector<std::string> uses;
  std::vector<StateVar> constants;
  std::vector<StateVar> variables;
  std::vector<Predicate> invariant;
  std::vector<Assignment> initialization;
  std::vector<ServiceDef> services;  // declaration order
  SourceLoc loc;

  const ServiceDef* find_service(const std::string& name) const;
  const StateVar* find_state(const std::string& name) const;  // constants and variables
  bool operator==(const ComponentDef&) const = default;
};

struct Instance {
  std::string name;
  std::string component;
  SourceLoc loc;

  bool operator==(const Instance&) const = default;
};

struct Endpoint {
  std::string instance;
  std::string service;
  SourceLoc loc;

  bool operator==(const Endpoint&) const = default;
};

/// `inst.virtual_var = expression over the provider's observable state`
struct Mapping {
  std::string instance;
  std::string variable;
  Expr value;
  SourceLoc loc;

  bool operator==(const Mapping&) const = default;
};

enum class LinkKind : std::uint8_t { ProvidedToRequired, RequiredToProvided };

struct AssemblyLink {
  std::string label;
  LinkKind kind = LinkKind::ProvidedToRequired;
  Endpoint end_a;
  Endpoint end_b;
  std::vector<Mapping> context_mapping;
  std::vector<std::string> sublinks;
  SourceLoc loc;

  const Endpoint& provided_end() const {
    return kind == LinkKind::ProvidedToRequired ? end_a : end_b;
  }
  const Endpoint& required_end() const {
    return kind == LinkKind::ProvidedToRequired ? end_b : end_a;
  }
  bool operator==(const AssemblyLink&) const = default;
};

struct Assembly {
  std::string name;
  std::string unit;
  std::vector<Instance> instances;
  std::vector<AssemblyLink> links;
  SourceLoc loc;

  const Instance* find_instance(const std::string& name) const;
  const AssemblyLink* find_link(const std::string& label) const;
  bool operator==(const Assembly&) const = default;
};

/// One identifier occurrence and the declaration it is bound to. Both sides
/// are model paths, so the table is independent of source layout.
struct SymbolBinding {
  std::string use_site;
  std::string name;
  std::string declaration;

  bool operator==(const SymbolBinding&) const = default;
};

/// Immutable result of resolving a set of parsed units.
class ResolvedModel {
 public:
  ResolvedModel() = default;
  ResolvedModel(std::map<std::string, ComponentDef> components,
                std::map<std::string, Assembly> assemblies, std::vector<SymbolBinding> symbols);

  const std::map<std::string, ComponentDef>& components() const { return components_; }
  const std::map<std::string, Assembly>& assemblies() const { return assemblies_; }
  const std::vector<SymbolBinding>& symbols() const { return symbols_; }

  const ComponentDef* component(const std::string& name) const;
  /// Component type of an assembly instance.
  const ComponentDef* instance_component(const Assembly& a, const std::string& instance) const;
  /// Service definition at a link endpoint, or nullptr.
  const ServiceDef* endpoint_service(const Assembly& a, const Endpoint& e) const;

 private:
  std::map<std::string, ComponentDef> components_;
  std::map<std::string, Assembly> assemblies_;
  std::vector<SymbolBinding> symbols_;
};

struct ParsedUnits {
  std::vector<ComponentDef> components;
  std::vector<Assembly> assemblies;
};

struct ResolveResult {
  ResolvedModel model;
  std::vector<Diagnostic> diagnostics;
};

/// Binds every identifier of the given units; unresolved names become
/// Diagnostics (phase Parse), never silent bindings.
ResolveResult resolve(const ParsedUnits& units);

/// Names a service may read in its assertions and behavior, with types:
/// state (constants + variables), parameters, locals, virtual variables.
struct ServiceScope {
  std::map<std::string, DataType> state;
  std::map<std::string, DataType> params;
  std::map<std::string, DataType> locals;
  std::map<std::string, DataType> virtuals;
  std::optional<DataType> result;

  std::optional<DataType> lookup(const std::string& name) const;
};

ServiceScope service_scope(const ComponentDef& c, const ServiceDef& s);

}  // namespace kmelia
