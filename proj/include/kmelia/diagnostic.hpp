#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kmelia/expr.hpp"

namespace kmelia {

enum class Severity : std::uint8_t { Error, Warning, Info };

enum class Phase : std::uint8_t {
  Parse,
  Static,
  Consistency,
  Compliance,
  Behavior,
  Functional,
  Extract,
};

std::string_view to_string(Severity s);
std::string_view to_string(Phase p);
std::optional<Severity> parse_severity(std::string_view s);
std::optional<Phase> parse_phase(std::string_view s);

/// Rendered deadlock witness: joint states visited and the labels of the
/// joint transitions between them (states.size() == labels.size() + 1).
struct TraceWitness {
  std::vector<std::string> states;
  std::vector<std::string> labels;

  bool operator==(const TraceWitness&) const = default;
};

using Witness = std::variant<Valuation, TraceWitness>;

struct DiagLocation {
  std::string file;
  int line = 0;
  int col = 0;

  bool operator==(const DiagLocation&) const = default;
};

struct Diagnostic {
  Severity severity = Severity::Error;
  Phase phase = Phase::Parse;
  std::string code;
  DiagLocation location;
  std::string message;
  std::optional<Witness> counterexample;

  bool operator==(const Diagnostic&) const = default;
};

Diagnostic make_diag(Severity sev, Phase phase, std::string code, const std::string& file,
                     SourceLoc loc, std::string message);

/// Sorts by (file, line, column, code); stable for equal keys.
void sort_diagnostics(std::vector<Diagnostic>& diags);

std::size_t count_severity(const std::vector<Diagnostic>& diags, Severity s);

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  return count_severity(diags, Severity::Error) > 0;
}

}  // namespace kmelia
