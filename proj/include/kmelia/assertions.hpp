#pragma once

// Evaluation, substitution, typing, and bounded validity checking of
// assertions, plus SMT-LIB export of proof obligations.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmelia/expr.hpp"

namespace kmelia {

/// Evaluates under a total valuation. Calls must have been abstracted
/// (see abstract_calls); a missing binding throws EvalError.
Value evaluate(const Expr& e, const Valuation& v);
bool evaluate_bool(const Expr& e, const Valuation& v);

/// Capture-free substitution of Current/Old variable references by name.
/// Replacing an Old reference rewrites the replacement into the Old frame.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& mapping);

/// Replaces every constant reference by its defining expression.
Expr fold_constants(const Expr& e, const std::map<std::string, Expr>& constants);

struct ScopeVar {
  VarKey key;
  DataType type;

  bool operator==(const ScopeVar&) const = default;
};

using Scope = std::vector<ScopeVar>;

const ScopeVar* find_scope_var(const Scope& scope, const VarKey& key);

/// Type lookup for named variables (qualified names as `inst.var`).
using TypeLookup = std::map<std::string, DataType>;

struct TypeCheck {
  std::optional<DataType> type;  // nullopt: ill-typed
  std::vector<std::string> errors;
};

/// Static typing: arithmetic over Integer, connectives over Boolean,
/// comparisons between same-type operands, `size` over sets. Calls are
/// uninterpreted and adopt the type their context expects.
TypeCheck type_of(const Expr& e, const TypeLookup& vars, const std::optional<DataType>& result,
                  const std::optional<DataType>& expected = std::nullopt);

/// Infers a scope from usage when no declarations are available (unknown
/// variables default to Integer).
Scope infer_scope(const std::vector<const Expr*>& exprs);

/// Replaces each call site by a fresh variable `name#k` (k counts call
/// sites in traversal order across all given expressions). Returns the new
/// variables with their inferred types.
struct AbstractedCalls {
  std::vector<Expr> exprs;
  Scope fresh;
};
AbstractedCalls abstract_calls(const std::vector<Expr>& exprs, const Scope& scope);

struct Bounds {
  int int_bound = 32;
  int set_bound = 8;
  std::size_t max_variables = 24;
  std::uint64_t max_steps = 400'000'000;  // search nodes before SearchLimitError
};

/// Finite search domain of one type. Integers: [-bound, bound] extended by
/// every literal c of the obligation and c +/- 1, ascending. Strings: the
/// empty string plus every string literal. Named types: two opaque tokens.
std::vector<Value> search_domain(const DataType& t, const Bounds& b,
                                 const std::vector<std::int64_t>& int_literals,
                                 const std::vector<std::string>& str_literals);

struct Verdict {
  enum class Kind : std::uint8_t { NoCounterexampleWithinBound, Counterexample };
  Kind kind = Kind::NoCounterexampleWithinBound;
  int bound = 0;
  Valuation counterexample;

  bool holds() const { return kind == Kind::NoCounterexampleWithinBound; }
};

class SearchLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bounded exhaustive search for a valuation making `hyp` true and `goal`
/// false. Variables are enumerated in ascending VarKey order (first key most
/// significant), values in ascending domain order; the first counterexample
/// in that order is returned.
Verdict check_implication(const Expr& hyp, const Expr& goal, const Scope& scope, const Bounds& b);
Verdict check_implication(const Expr& hyp, const Expr& goal, const Bounds& b);

/// Visits every call site with the type its context expects (Integer when
/// the context does not constrain it).
void visit_calls(const Expr& e, const TypeLookup& vars, const std::optional<DataType>& result,
                 const std::optional<DataType>& expected,
                 const std::function<void(const Expr& call, const DataType& type)>& fn);

/// Collects integer and string literals (used to seed search domains).
void collect_literals(const Expr& e, std::vector<std::int64_t>& ints, std::vector<std::string>& strs);

struct SmtInput {
  std::string id;
  Expr hypothesis;
  Expr goal;
  Scope scope;
};

/// SMT-LIB v2 script asserting hyp and (not goal). `unsat` means the
/// obligation holds.
std::string export_smtlib(const SmtInput& po);

}  // namespace kmelia
