#pragma once

// Phase orchestration: parse and resolve, then the selected analyses in
// fixed order, with static gating and report serialization.

#include <stdexcept>
#include <string>
#include <vector>

#include "kmelia/diagnostic.hpp"
#include "kmelia/parser.hpp"

namespace kmelia {

inline constexpr const char* kVersion = "0.1.0";

/// Selectable phases, in execution order.
enum class Stage : std::uint8_t { Static, Consistency, Compliance, Behavior, Functional, Extract };

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);
const std::vector<Stage>& all_stages();

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Comma-separated phase names; throws UsageError on unknown or empty lists.
std::vector<Stage> parse_stage_list(std::string_view csv);

struct RunConfig {
  std::vector<std::string> inputs;   // files, or directories scanned for *.kmelia
  std::vector<SourceUnit> sources;   // in-memory units, parsed after the files
  std::vector<Stage> phases = all_stages();
  int int_bound = 32;
  int set_bound = 8;
  int depth = 40;
  std::string emit_smt_dir;
  std::string emit_dot_dir;
  std::string extract_dir;
};

struct PhaseReport {
  std::string name;  // "parse" or a stage name
  std::vector<Diagnostic> diagnostics;

  bool operator==(const PhaseReport&) const = default;
};

struct Report {
  std::string version = kVersion;
  std::vector<PhaseReport> phases;
  int exit_code = 0;

  const PhaseReport* phase(std::string_view name) const;
  std::size_t count(Severity s) const;
  bool operator==(const Report&) const = default;
};

/// Throws UsageError for invalid configurations and unreadable inputs.
Report run(const RunConfig& cfg);

std::string to_json(const Report& r);
/// Throws std::runtime_error on malformed input.
Report report_from_json(const std::string& text);
std::string to_text(const Report& r, bool color);

/// Loads one file, or every *.kmelia below a directory (sorted by path).
std::vector<SourceUnit> load_sources(const std::vector<std::string>& paths);

}  // namespace kmelia
