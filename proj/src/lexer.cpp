#include "lexer.hpp"

#include <array>
#include <cctype>
#include <limits>

namespace kmelia::detail {

namespace {

// Longest spellings first.
constexpr std::array<std::string_view, 11> kMultiPunct{"-->", ":=", "--", "<=", ">=", "<>",
                                                       "!=",  "&&", "||", "==", "/="};
constexpr std::string_view kSinglePunct = "{}()[],;:.@=<>+-*!?";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::vector<Token> lex(std::string_view text, const std::string& unit, std::vector<Diagnostic>& diags) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto error = [&](SourceLoc loc, std::string msg) {
    diags.push_back(make_diag(Severity::Error, Phase::Parse, "lexical-error", unit, loc, std::move(msg)));
  };

  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < text.size() && text[i + 1] == '/')) {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    SourceLoc loc{line, col};
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      out.push_back(Token{TokKind::Ident, std::string(text.substr(i, j - i)), 0, loc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      std::string digits(text.substr(i, j - i));
      std::int64_t v = 0;
      bool overflow = false;
      for (char d : digits) {
        if (v > (std::numeric_limits<std::int64_t>::max() - (d - '0')) / 10) {
          overflow = true;
          break;
        }
        v = v * 10 + (d - '0');
      }
      if (overflow) error(loc, "integer literal out of range: " + digits);
      out.push_back(Token{TokKind::Int, digits, v, loc});
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::string s;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < text.size() && text[j] != '\n') {
        if (text[j] == '\\' && j + 1 < text.size()) {
          s.push_back(text[j + 1]);
          j += 2;
          continue;
        }
        if (text[j] == '"') {
          closed = true;
          ++j;
          break;
        }
        s.push_back(text[j++]);
      }
      if (!closed) error(loc, "unterminated string literal");
      out.push_back(Token{TokKind::String, std::move(s), 0, loc});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (auto p : kMultiPunct) {
      if (text.substr(i, p.size()) == p) {
        out.push_back(Token{TokKind::Punct, std::string(p), 0, loc});
        advance(p.size());
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (kSinglePunct.find(c) != std::string_view::npos) {
      out.push_back(Token{TokKind::Punct, std::string(1, c), 0, loc});
      advance(1);
      continue;
    }
    error(loc, std::string("unexpected character '") + c + "'");
    advance(1);
  }
  out.push_back(Token{TokKind::Eof, {}, 0, SourceLoc{line, col}});
  return out;
}

}  // namespace kmelia::detail
