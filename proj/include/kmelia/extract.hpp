#pragma once

// Behavior extraction: eLTS -> regular-expression syntax tree by state
// elimination, then syntax tree -> structured pseudocode with requires /
// ensures annotations.

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmelia/model.hpp"

namespace kmelia {

enum class TreeKind : std::uint8_t { Epsilon, Empty, Leaf, Seq, Alt, Star };

struct SyntaxTree {
  TreeKind kind = TreeKind::Epsilon;
  std::optional<Expr> guard;  // Leaf
  Action action;              // Leaf
  std::vector<SyntaxTree> children;

  static SyntaxTree epsilon();
  static SyntaxTree empty();
  static SyntaxTree leaf(std::optional<Expr> guard, Action action);
  static SyntaxTree seq(std::vector<SyntaxTree> parts);
  static SyntaxTree alt(std::vector<SyntaxTree> parts);
  static SyntaxTree star(SyntaxTree body);

  bool operator==(const SyntaxTree&) const = default;
};

/// `a . (b | c)*` style rendering; leaves print as their label text.
std::string to_string(const SyntaxTree& t);

/// Flattens nested Seq/Alt, drops Epsilon from Seq and Empty from Alt,
/// collapses Seq containing Empty, Star(Empty) and Star(Epsilon) to Epsilon.
SyntaxTree simplify(const SyntaxTree& t);

/// State elimination in ascending declaration order (initial and final
/// state kept). Several finals are first joined into a synthetic final.
/// No final state: Empty, and a `no-final-state` Warning when requested.
SyntaxTree lts_to_regex(const Elts& b, std::vector<Diagnostic>* warnings = nullptr);

/// Same, eliminating states in the given order (unknown and kept states are
/// skipped; states missing from the order are eliminated last).
SyntaxTree lts_to_regex(const Elts& b, const std::vector<std::string>& order);

/// A word is the sequence of transition labels (`[guard] action`).
using Word = std::vector<std::string>;

class LanguageCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All words of length <= k; throws LanguageCapError beyond `cap` words.
std::set<Word> language_sample(const Elts& b, std::size_t k, std::size_t cap = 500'000);
std::set<Word> language_sample(const SyntaxTree& t, std::size_t k, std::size_t cap = 500'000);

enum class BlockKind : std::uint8_t { Action, Sequence, Conditional, Recursive, Skip };

/// Branch condition of a Conditional: a guard, an oracle-choice flag, or
/// the trailing else.
struct BranchCondition {
  std::optional<Expr> guard;
  std::string flag;
  bool otherwise = false;

  bool operator==(const BranchCondition&) const = default;
};

struct StructuredBlock {
  BlockKind kind = BlockKind::Skip;
  Action action;                          // Action
  std::optional<Expr> guard;              // Action: guard not absorbed by an enclosing condition
  std::vector<StructuredBlock> children;  // Sequence items, Conditional branches, Recursive body (one)
  std::vector<BranchCondition> conditions;  // Conditional (one per branch); Recursive: continue condition
  std::string name;                       // Recursive

  bool operator==(const StructuredBlock&) const = default;
};

class ExtractError : public std::runtime_error {
 public:
  ExtractError(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Seq -> Sequence, Alt -> Conditional, Star -> Recursive, Epsilon -> Skip.
/// Throws ExtractError(`no-terminating-behavior`) on Empty.
StructuredBlock tree_to_structured(const SyntaxTree& t);

/// Indented pseudocode under `requires:` / `ensures:` lines. Calls to the
/// service's required collaborators render as `vc.<service>(...)`.
std::string render_structured(const StructuredBlock& b, const ServiceDef& svc);

}  // namespace kmelia
