#pragma once

// Proof obligations for component consistency (initialization establishes
// the invariant, provided services preserve it) and for link compliance.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kmelia/assertions.hpp"
#include "kmelia/model.hpp"

namespace kmelia {

enum class PoOrigin : std::uint8_t { Init, ServicePreserves, ComplianceFwd, ComplianceBwd };

std::string_view to_string(PoOrigin o);

struct ProofObligation {
  std::string id;  // `<phase>_<component>_<service>_<n>`, also the SMT file stem
  PoOrigin origin = PoOrigin::Init;
  std::string component;
  std::string service;  // empty for Init
  std::string link;     // compliance only
  Expr hypothesis;
  Expr goal;
  Scope scope;
  /// Labelled goal conjuncts, used to name what a counterexample breaks.
  std::vector<std::pair<std::string, Expr>> goal_parts;
  std::string unit;
  SourceLoc loc;
};

/// Variables a service may change: state variables occurring outside old()
/// in its post-condition, plus state variables assigned, received, or
/// bound by callret in its behavior.
std::set<std::string> written_variables(const ComponentDef& c, const ServiceDef& s);

/// Constant name -> defining expression.
std::map<std::string, Expr> constant_definitions(const ComponentDef& c);

/// `possibly-uninitialized` Warnings go to `warnings` when given.
ProofObligation gen_init_po(const ComponentDef& c, std::vector<Diagnostic>* warnings = nullptr);

/// One obligation per provided service.
std::vector<ProofObligation> gen_service_pos(const ComponentDef& c);

/// PO-fwd and PO-bwd of one link. An unmapped virtual variable yields an
/// `incomplete-context-mapping` Error in `errors` and no obligations.
std::vector<ProofObligation> gen_compliance_pos(const ResolvedModel& m, const Assembly& a, const AssemblyLink& l,
                                                std::vector<Diagnostic>* errors = nullptr);

/// One Error (with counterexample) per failing obligation, one Info per
/// obligation holding within the bound, a Warning when the search limit
/// is hit.
std::vector<Diagnostic> check_obligations(const std::vector<ProofObligation>& pos, const Bounds& b);

std::string export_smtlib(const ProofObligation& po);

}  // namespace kmelia
