#pragma once

// Lexer/parser for the textual component language and the canonical
// pretty-printer. See docs/grammar.ebnf for the normative syntax.

#include <string>
#include <string_view>
#include <vector>

#include "kmelia/model.hpp"

namespace kmelia {

enum class UnitKind : std::uint8_t { Component, Assembly };

struct SourceUnit {
  std::string path;
  UnitKind kind = UnitKind::Component;
  std::string text;
};

/// Determines the unit kind from the first keyword of the text.
UnitKind classify_unit(std::string_view text);

template <typename T>
struct ParseResult {
  T value;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return !has_errors(diagnostics); }
};

ParseResult<ComponentDef> parse_component(std::string_view text, const std::string& unit = {});
ParseResult<Assembly> parse_assembly(std::string_view text, const std::string& unit = {});
ParseResult<Expr> parse_assertion(std::string_view text, const std::string& unit = {});
ParseResult<Elts> parse_behavior(std::string_view text, const std::string& unit = {});

/// Parses every unit, dispatching on its kind.
ParsedUnits parse_units(const std::vector<SourceUnit>& units, std::vector<Diagnostic>& diags);

std::string pretty_print(const Expr& e);
std::string pretty_print(const DataType& t);
std::string pretty_print(const Action& a);
std::string pretty_print(const Elts& b, int indent = 0);
std::string pretty_print(const ServiceDef& s);
std::string pretty_print(const ComponentDef& c);
std::string pretty_print(const Assembly& a);

/// `[guard] action`, or just the action when unguarded.
std::string label_text(const std::optional<Expr>& guard, const Action& a);

}  // namespace kmelia
