#pragma once

// Expression trees for the assertion language, data types, and concrete
// values. Every contract in a model (invariant, pre, post, guard, mapping)
// is an Expr.

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kmelia {

/// 1-based line/column of a token. Locations never participate in
/// structural equality of model values.
struct SourceLoc {
  int line = 0;
  int col = 0;

  friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

enum class TypeKind : std::uint8_t { Integer, Boolean, String, Set, Named };

struct DataType {
  TypeKind kind = TypeKind::Integer;
  std::string name;                      // Named: the library type identifier
  std::shared_ptr<const DataType> elem;  // Set: element type

  static DataType integer() { return {TypeKind::Integer, {}, nullptr}; }
  static DataType boolean() { return {TypeKind::Boolean, {}, nullptr}; }
  static DataType string() { return {TypeKind::String, {}, nullptr}; }
  static DataType named(std::string n) { return {TypeKind::Named, std::move(n), nullptr}; }
  static DataType set_of(DataType e) {
    return {TypeKind::Set, {}, std::make_shared<const DataType>(std::move(e))};
  }

  friend bool operator==(const DataType& a, const DataType& b);
};

std::string to_string(const DataType& t);

enum class ExprKind : std::uint8_t {
  IntLit,
  BoolLit,
  StrLit,
  Var,
  Result,
  Unary,
  Binary,
  Implies,
  Call,
  Size,
  EmptySet,
};

enum class Frame : std::uint8_t { Current, Old };
enum class UnaryOp : std::uint8_t { Not, Neg };
enum class BinaryOp : std::uint8_t { Mul, Add, Sub, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

/// Assertion / expression node. `old(e)` is normalized at construction
/// time: the Old frame lives on Var leaves only.
struct Expr {
  ExprKind kind = ExprKind::BoolLit;
  std::int64_t int_value = 0;
  bool bool_value = true;
  std::string name;       // StrLit text, Var name, Call function name
  std::string qualifier;  // instance prefix of `inst.var` references
  Frame frame = Frame::Current;
  UnaryOp unary = UnaryOp::Not;
  BinaryOp binary = BinaryOp::And;
  std::vector<Expr> operands;
  SourceLoc loc;

  bool operator==(const Expr&) const = default;
};

namespace ex {
Expr int_lit(std::int64_t v);
Expr bool_lit(bool v);
Expr str_lit(std::string s);
Expr var(std::string name, Frame frame = Frame::Current);
Expr qualified(std::string qualifier, std::string name);
Expr result();
Expr unary(UnaryOp op, Expr e);
Expr binary(BinaryOp op, Expr a, Expr b);
Expr implies(Expr a, Expr b);
Expr call(std::string fn, std::vector<Expr> args);
Expr size(Expr set);
Expr empty_set();
Expr logical_not(Expr e);
/// Left-nested And chain; `true` for an empty list.
Expr conj(const std::vector<Expr>& parts);
Expr eq(Expr a, Expr b);
}  // namespace ex

/// Splits nested And nodes into a flat conjunct list.
std::vector<Expr> conjuncts(const Expr& e);

/// Rewrites every Current-frame variable to the Old frame.
Expr to_old(const Expr& e);

struct VarKey {
  std::string name;
  Frame frame = Frame::Current;

  auto operator<=>(const VarKey&) const = default;
};

std::string to_string(const VarKey& k);

/// Free variables of an expression (qualifiers folded into the name as
/// `inst.var`). `result` appears as the key {"result", Current}.
std::vector<VarKey> free_vars(const Expr& e);

inline const char* const kResultName = "result";

/// A concrete value. Sets are represented by their cardinality and opaque
/// library values by a token index.
struct Value {
  TypeKind type = TypeKind::Integer;
  std::int64_t number = 0;
  std::string text;
  std::string type_name;  // Named values: the library type

  static Value integer(std::int64_t v) { return {TypeKind::Integer, v, {}, {}}; }
  static Value boolean(bool v) { return {TypeKind::Boolean, v ? 1 : 0, {}, {}}; }
  static Value string(std::string s) { return {TypeKind::String, 0, std::move(s), {}}; }
  static Value set(std::int64_t cardinality) { return {TypeKind::Set, cardinality, {}, {}}; }
  static Value opaque(std::string type, std::int64_t token) {
    return {TypeKind::Named, token, {}, std::move(type)};
  }

  bool as_bool() const { return number != 0; }
  bool operator==(const Value&) const = default;
};

std::string to_string(const Value& v);

/// Assignment of values to (variable, frame) pairs. `result` is stored
/// under the key {"result", Current}.
class Valuation {
 public:
  void set(const VarKey& key, Value v) { values_[key] = std::move(v); }
  void set(const std::string& name, Value v) { values_[VarKey{name, Frame::Current}] = std::move(v); }
  const Value* find(const VarKey& key) const;
  bool contains(const VarKey& key) const { return find(key) != nullptr; }
  const Value& at(const VarKey& key) const;
  std::optional<Value> result() const;

  const std::map<VarKey, Value>& values() const { return values_; }
  bool empty() const { return values_.empty(); }
  bool operator==(const Valuation&) const = default;

 private:
  std::map<VarKey, Value> values_;
};

std::string to_string(const Valuation& v);

/// Raised for internal evaluation failures (missing binding, dynamic type
/// mismatch). Never a user-facing error.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kmelia
