#include "kmelia/expr.hpp"

#include <algorithm>
#include <set>

namespace kmelia {

bool operator==(const DataType& a, const DataType& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case TypeKind::Named:
      return a.name == b.name;
    case TypeKind::Set:
      if (!a.elem || !b.elem) return a.elem == b.elem;
      return *a.elem == *b.elem;
    default:
      return true;
  }
}

std::string to_string(const DataType& t) {
  switch (t.kind) {
    case TypeKind::Integer: return "Integer";
    case TypeKind::Boolean: return "Boolean";
    case TypeKind::String: return "String";
    case TypeKind::Named: return t.name;
    case TypeKind::Set: return "setOf " + (t.elem ? to_string(*t.elem) : std::string("?"));
  }
  return "?";
}

namespace ex {

Expr int_lit(std::int64_t v) {
  Expr e;
  e.kind = ExprKind::IntLit;
  e.int_value = v;
  return e;
}

Expr bool_lit(bool v) {
  Expr e;
  e.kind = ExprKind::BoolLit;
  e.bool_value = v;
  return e;
}

Expr str_lit(std::string s) {
  Expr e;
  e.kind = ExprKind::StrLit;
  e.name = std::move(s);
  return e;
}

Expr var(std::string name, Frame frame) {
  Expr e;
  e.kind = ExprKind::Var;
  e.name = std::move(name);
  e.frame = frame;
  return e;
}

Expr qualified(std::string qualifier, std::string name) {
  Expr e = var(std::move(name));
  e.qualifier = std::move(qualifier);
  return e;
}

Expr result() {
  Expr e;
  e.kind = ExprKind::Result;
  return e;
}

Expr unary(UnaryOp op, Expr a) {
  Expr e;
  e.kind = ExprKind::Unary;
  e.unary = op;
  e.operands.push_back(std::move(a));
  return e;
}

Expr binary(BinaryOp op, Expr a, Expr b) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.binary = op;
  e.operands.push_back(std::move(a));
  e.operands.push_back(std::move(b));
  return e;
}

Expr implies(Expr a, Expr b) {
  Expr e;
  e.kind = ExprKind::Implies;
  e.operands.push_back(std::move(a));
  e.operands.push_back(std::move(b));
  return e;
}

Expr call(std::string fn, std::vector<Expr> args) {
  Expr e;
  e.kind = ExprKind::Call;
  e.name = std::move(fn);
  e.operands = std::move(args);
  return e;
}

Expr size(Expr set) {
  Expr e;
  e.kind = ExprKind::Size;
  e.operands.push_back(std::move(set));
  return e;
}

Expr empty_set() {
  Expr e;
  e.kind = ExprKind::EmptySet;
  return e;
}

Expr logical_not(Expr a) { return unary(UnaryOp::Not, std::move(a)); }

Expr conj(const std::vector<Expr>& parts) {
  if (parts.empty()) return bool_lit(true);
  Expr acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = binary(BinaryOp::And, std::move(acc), parts[i]);
  return acc;
}

Expr eq(Expr a, Expr b) { return binary(BinaryOp::Eq, std::move(a), std::move(b)); }

}  // namespace ex

namespace {

void flatten_and(const Expr& e, std::vector<Expr>& out) {
  if (e.kind == ExprKind::Binary && e.binary == BinaryOp::And) {
    flatten_and(e.operands[0], out);
    flatten_and(e.operands[1], out);
    return;
  }
  out.push_back(e);
}

void collect_free(const Expr& e, std::set<VarKey>& out) {
  if (e.kind == ExprKind::Var) {
    std::string n = e.qualifier.empty() ? e.name : e.qualifier + "." + e.name;
    out.insert(VarKey{std::move(n), e.frame});
  } else if (e.kind == ExprKind::Result) {
    out.insert(VarKey{kResultName, Frame::Current});
  }
  for (const auto& op : e.operands) collect_free(op, out);
}

}  // namespace

std::vector<Expr> conjuncts(const Expr& e) {
  std::vector<Expr> out;
  flatten_and(e, out);
  return out;
}

Expr to_old(const Expr& e) {
  Expr r = e;
  if (r.kind == ExprKind::Var) r.frame = Frame::Old;
  for (auto& op : r.operands) op = to_old(op);
  return r;
}

std::string to_string(const VarKey& k) {
  return k.frame == Frame::Old ? "old(" + k.name + ")" : k.name;
}

std::vector<VarKey> free_vars(const Expr& e) {
  std::set<VarKey> s;
  collect_free(e, s);
  return {s.begin(), s.end()};
}

std::string to_string(const Value& v) {
  switch (v.type) {
    case TypeKind::Integer: return std::to_string(v.number);
    case TypeKind::Boolean: return v.number ? "true" : "false";
    case TypeKind::String: return "\"" + v.text + "\"";
    case TypeKind::Set: return "set[" + std::to_string(v.number) + "]";
    case TypeKind::Named: return v.type_name + "#" + std::to_string(v.number);
  }
  return "?";
}

const Value* Valuation::find(const VarKey& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

const Value& Valuation::at(const VarKey& key) const {
  const Value* v = find(key);
  if (!v) throw EvalError("no binding for " + to_string(key));
  return *v;
}

std::optional<Value> Valuation::result() const {
  if (const Value* v = find(VarKey{kResultName, Frame::Current})) return *v;
  return std::nullopt;
}

std::string to_string(const Valuation& v) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, val] : v.values()) {
    if (!first) out += ", ";
    first = false;
    out += to_string(k) + ": " + to_string(val);
  }
  return out + "}";
}

}  // namespace kmelia
