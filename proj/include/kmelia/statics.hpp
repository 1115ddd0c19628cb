#pragma once

// Static interoperability (signatures, sub-service structure, observability,
// context mappings), service accessibility, and typing.

#include <string>
#include <vector>

#include "kmelia/model.hpp"

namespace kmelia {

enum class DependencyKind : std::uint8_t { Needs, External, Sub, CallerProvided };

struct DependencyEdge {
  std::string from;  // service name
  std::string to;    // referenced service name
  DependencyKind kind = DependencyKind::Needs;

  bool operator==(const DependencyEdge&) const = default;
};

/// Intra-component service dependencies: intrequires (Needs), extrequires
/// (External), subprovides (Sub), calrequires (CallerProvided).
struct DependencyGraph {
  std::string component;
  std::vector<std::string> nodes;  // defined services, declaration order
  std::vector<DependencyEdge> edges;
};

DependencyGraph dependency_graph(const ComponentDef& c);

std::vector<Diagnostic> check_signatures(const ResolvedModel& m, const Assembly& a);
std::vector<Diagnostic> check_structure(const ResolvedModel& m, const Assembly& a);
std::vector<Diagnostic> check_accessibility(const ComponentDef& c);
std::vector<Diagnostic> check_observability(const ResolvedModel& m, const Assembly& a);

/// Mapping completeness (`incomplete-context-mapping`), duplicate left-hand
/// sides, and mapping types.
std::vector<Diagnostic> check_mappings(const ResolvedModel& m, const Assembly& a);

/// `type-error` for ill-typed assertions, initializers, and behavior labels.
std::vector<Diagnostic> check_types(const ComponentDef& c);

/// Every static check over the whole model, sorted.
std::vector<Diagnostic> run_statics(const ResolvedModel& m);

/// Virtual variables of a required service that occur in its assertions.
std::vector<std::string> used_virtual_variables(const ServiceDef& req);

}  // namespace kmelia
