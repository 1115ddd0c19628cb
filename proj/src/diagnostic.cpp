#include "kmelia/diagnostic.hpp"

#include <algorithm>
#include <array>
#include <tuple>

namespace kmelia {

namespace {
constexpr std::array<std::string_view, 3> kSeverityNames{"error", "warning", "info"};
constexpr std::array<std::string_view, 7> kPhaseNames{"parse",    "static",     "consistency",
                                                      "compliance", "behavior", "functional",
                                                      "extract"};
}  // namespace

std::string_view to_string(Severity s) { return kSeverityNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(Phase p) { return kPhaseNames[static_cast<std::size_t>(p)]; }

std::optional<Severity> parse_severity(std::string_view s) {
  for (std::size_t i = 0; i < kSeverityNames.size(); ++i)
    if (kSeverityNames[i] == s) return static_cast<Severity>(i);
  return std::nullopt;
}

std::optional<Phase> parse_phase(std::string_view s) {
  for (std::size_t i = 0; i < kPhaseNames.size(); ++i)
    if (kPhaseNames[i] == s) return static_cast<Phase>(i);
  return std::nullopt;
}

Diagnostic make_diag(Severity sev, Phase phase, std::string code, const std::string& file,
                     SourceLoc loc, std::string message) {
  Diagnostic d;
  d.severity = sev;
  d.phase = phase;
  d.code = std::move(code);
  d.location = DiagLocation{file, loc.line, loc.col};
  d.message = std::move(message);
  return d;
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.location.file, a.location.line, a.location.col, a.code) <
           std::tie(b.location.file, b.location.line, b.location.col, b.code);
  });
}

std::size_t count_severity(const std::vector<Diagnostic>& diags, Severity s) {
  return static_cast<std::size_t>(
      std::count_if(diags.begin(), diags.end(), [s](const Diagnostic& d) { return d.severity == s; }));
}

}  // namespace kmelia
