#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kmelia/diagnostic.hpp"

namespace kmelia::detail {

enum class TokKind : std::uint8_t { Ident, Int, String, Punct, Eof };

struct Token {
  TokKind kind = TokKind::Eof;
  std::string text;  // identifier / punctuation spelling / decoded string
  std::int64_t value = 0;
  SourceLoc loc;
};

/// Splits source text into tokens. `#` and `//` start comments running to
/// end of line. Unknown characters and malformed literals are reported as
/// `lexical-error` and skipped.
std::vector<Token> lex(std::string_view text, const std::string& unit, std::vector<Diagnostic>& diags);

}  // namespace kmelia::detail
