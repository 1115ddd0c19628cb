#include "kmelia/assertions.hpp"

#include "compiled.hpp"

#include <algorithm>
#include <numeric>
#include <cctype>
#include <set>
#include <sstream>

namespace kmelia {

using namespace detail;

namespace {


bool compare(BinaryOp op, const Value& a, const Value& b) {
  switch (op) {
    case BinaryOp::Eq: return a.number == b.number && a.text == b.text;
    case BinaryOp::Ne: return !(a.number == b.number && a.text == b.text);
    case BinaryOp::Lt: return a.number < b.number;
    case BinaryOp::Le: return a.number <= b.number;
    case BinaryOp::Gt: return a.number > b.number;
    case BinaryOp::Ge: return a.number >= b.number;
    default: throw EvalError("not a comparison");
  }
}

// Bottom-up typing with an expected type pushed down from the context.
// In inference mode unknown variables adopt the expected type.
class Typer {
 public:
  using CallFn = std::function<void(const Expr&, const DataType&)>;

  Typer(const TypeLookup& vars, std::optional<DataType> result, bool inference)
      : vars_(vars), result_(std::move(result)), inference_(inference) {}

  CallFn on_call;
  std::vector<std::string> errors;
  std::map<std::string, DataType> inferred;

  std::optional<DataType> infer(const Expr& e, const std::optional<DataType>& expected) {
    switch (e.kind) {
      case ExprKind::IntLit: return DataType::integer();
      case ExprKind::BoolLit: return DataType::boolean();
      case ExprKind::StrLit: return DataType::string();
      case ExprKind::EmptySet:
        if (expected && expected->kind == TypeKind::Set) return expected;
        return DataType::set_of(DataType::integer());
      case ExprKind::Var: return variable(full_name(e), expected);
      case ExprKind::Result:
        if (result_) return result_;
        if (inference_) return variable(kResultName, expected);
        errors.push_back("result used in a service without return type");
        return std::nullopt;
      case ExprKind::Call: {
        DataType t = expected.value_or(DataType::integer());
        for (const auto& a : e.operands) infer(a, std::nullopt);
        if (on_call) on_call(e, t);
        return t;
      }
      case ExprKind::Size: {
        auto t = infer(e.operands[0], std::nullopt);
        if (t && t->kind != TypeKind::Set) errors.push_back("size() applied to non-set " + to_string(*t));
        return DataType::integer();
      }
      case ExprKind::Unary:
        if (e.unary == UnaryOp::Not) {
          expect(e.operands[0], DataType::boolean(), "not");
          return DataType::boolean();
        }
        expect(e.operands[0], DataType::integer(), "-");
        return DataType::integer();
      case ExprKind::Implies:
        expect(e.operands[0], DataType::boolean(), "implies");
        expect(e.operands[1], DataType::boolean(), "implies");
        return DataType::boolean();
      case ExprKind::Binary:
        return binary(e);
    }
    return std::nullopt;
  }

 private:
  std::optional<DataType> variable(const std::string& name, const std::optional<DataType>& expected) {
    if (auto it = vars_.find(name); it != vars_.end()) return it->second;
    if (!inference_) {
      errors.push_back("unknown variable " + name);
      return std::nullopt;
    }
    auto it = inferred.find(name);
    if (it != inferred.end()) return it->second;
    DataType t = expected.value_or(DataType::integer());
    inferred.emplace(name, t);
    return t;
  }

  bool flexible(const Expr& e) const {
    if (e.kind == ExprKind::Call || e.kind == ExprKind::EmptySet) return true;
    if (!inference_) return false;
    if (e.kind == ExprKind::Var) {
      std::string n = full_name(e);
      return !vars_.contains(n) && !inferred.contains(n);
    }
    if (e.kind == ExprKind::Result) return !result_ && !inferred.contains(kResultName);
    return false;
  }

  void expect(const Expr& e, const DataType& want, const char* op) {
    auto t = infer(e, want);
    if (t && !(*t == want)) {
      errors.push_back(std::string("operator ") + op + " expects " + to_string(want) + ", found " +
                       to_string(*t));
    }
  }

  std::optional<DataType> binary(const Expr& e) {
    switch (e.binary) {
      case BinaryOp::Add:
      case BinaryOp::Sub:
      case BinaryOp::Mul:
        expect(e.operands[0], DataType::integer(), "arithmetic");
        expect(e.operands[1], DataType::integer(), "arithmetic");
        return DataType::integer();
      case BinaryOp::And:
      case BinaryOp::Or:
        expect(e.operands[0], DataType::boolean(), e.binary == BinaryOp::And ? "&&" : "||");
        expect(e.operands[1], DataType::boolean(), e.binary == BinaryOp::And ? "&&" : "||");
        return DataType::boolean();
      case BinaryOp::Lt:
      case BinaryOp::Le:
      case BinaryOp::Gt:
      case BinaryOp::Ge:
        expect(e.operands[0], DataType::integer(), "comparison");
        expect(e.operands[1], DataType::integer(), "comparison");
        return DataType::boolean();
      case BinaryOp::Eq:
      case BinaryOp::Ne: {
        const Expr& l = e.operands[0];
        const Expr& r = e.operands[1];
        std::optional<DataType> tl, tr;
        if (flexible(l) && !flexible(r)) {
          tr = infer(r, std::nullopt);
          tl = infer(l, tr);
        } else {
          tl = infer(l, std::nullopt);
          tr = infer(r, tl);
        }
        if (tl && tr && !(*tl == *tr)) {
          errors.push_back("cannot compare " + to_string(*tl) + " with " + to_string(*tr));
        }
        return DataType::boolean();
      }
    }
    return std::nullopt;
  }

  const TypeLookup& vars_;
  std::optional<DataType> result_;
  bool inference_;
};

TypeLookup lookup_from_scope(const Scope& scope, std::optional<DataType>& result) {
  TypeLookup out;
  for (const auto& v : scope) {
    if (v.key.name == kResultName) {
      result = v.type;
      continue;
    }
    out.emplace(v.key.name, v.type);
  }
  return out;
}

bool has_call(const Expr& e) {
  if (e.kind == ExprKind::Call) return true;
  return std::any_of(e.operands.begin(), e.operands.end(), has_call);
}

}  // namespace

Value evaluate(const Expr& e, const Valuation& v) {
  switch (e.kind) {
    case ExprKind::IntLit: return Value::integer(e.int_value);
    case ExprKind::BoolLit: return Value::boolean(e.bool_value);
    case ExprKind::StrLit: return Value::string(e.name);
    case ExprKind::EmptySet: return Value::set(0);
    case ExprKind::Var: return v.at(VarKey{full_name(e), e.frame});
    case ExprKind::Result: return v.at(VarKey{kResultName, Frame::Current});
    case ExprKind::Call: throw EvalError("uninterpreted call " + e.name + " must be abstracted before evaluation");
    case ExprKind::Size: return Value::integer(evaluate(e.operands[0], v).number);
    case ExprKind::Unary: {
      Value a = evaluate(e.operands[0], v);
      if (e.unary == UnaryOp::Not) return Value::boolean(!a.as_bool());
      return Value::integer(wrap_sub(0, a.number));
    }
    case ExprKind::Implies:
      return Value::boolean(!evaluate_bool(e.operands[0], v) || evaluate_bool(e.operands[1], v));
    case ExprKind::Binary: {
      if (e.binary == BinaryOp::And) {
        return Value::boolean(evaluate_bool(e.operands[0], v) && evaluate_bool(e.operands[1], v));
      }
      if (e.binary == BinaryOp::Or) {
        return Value::boolean(evaluate_bool(e.operands[0], v) || evaluate_bool(e.operands[1], v));
      }
      Value a = evaluate(e.operands[0], v);
      Value b = evaluate(e.operands[1], v);
      switch (e.binary) {
        case BinaryOp::Add: return Value::integer(wrap_add(a.number, b.number));
        case BinaryOp::Sub: return Value::integer(wrap_sub(a.number, b.number));
        case BinaryOp::Mul: return Value::integer(wrap_mul(a.number, b.number));
        default: return Value::boolean(compare(e.binary, a, b));
      }
    }
  }
  throw EvalError("malformed expression");
}

bool evaluate_bool(const Expr& e, const Valuation& v) { return evaluate(e, v).as_bool(); }

Expr substitute(const Expr& e, const std::map<std::string, Expr>& mapping) {
  if (e.kind == ExprKind::Var) {
    auto it = mapping.find(full_name(e));
    if (it == mapping.end()) return e;
    return e.frame == Frame::Old ? to_old(it->second) : it->second;
  }
  if (e.kind == ExprKind::Result) {
    auto it = mapping.find(kResultName);
    return it == mapping.end() ? e : it->second;
  }
  Expr r = e;
  for (auto& op : r.operands) op = substitute(op, mapping);
  return r;
}

Expr fold_constants(const Expr& e, const std::map<std::string, Expr>& constants) {
  Expr cur = e;
  // Constants may refer to earlier constants; cycles stop at the depth cap.
  for (std::size_t i = 0; i <= constants.size(); ++i) {
    Expr next = substitute(cur, constants);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

const ScopeVar* find_scope_var(const Scope& scope, const VarKey& key) {
  for (const auto& v : scope)
    if (v.key == key) return &v;
  return nullptr;
}

TypeCheck type_of(const Expr& e, const TypeLookup& vars, const std::optional<DataType>& result,
                  const std::optional<DataType>& expected) {
  Typer t(vars, result, false);
  TypeCheck out;
  auto ty = t.infer(e, expected);
  if (ty && expected && !(*ty == *expected)) {
    t.errors.push_back("expected " + to_string(*expected) + ", found " + to_string(*ty));
  }
  out.errors = std::move(t.errors);
  if (out.errors.empty()) out.type = ty;
  return out;
}

void visit_calls(const Expr& e, const TypeLookup& vars, const std::optional<DataType>& result,
                 const std::optional<DataType>& expected,
                 const std::function<void(const Expr& call, const DataType& type)>& fn) {
  Typer t(vars, result, true);
  t.on_call = fn;
  t.infer(e, expected);
}

Scope infer_scope(const std::vector<const Expr*>& exprs) {
  TypeLookup none;
  Typer t(none, std::nullopt, true);
  for (const Expr* e : exprs) t.infer(*e, DataType::boolean());
  std::set<VarKey> keys;
  for (const Expr* e : exprs)
    for (auto& k : free_vars(*e)) keys.insert(k);
  Scope out;
  for (const auto& k : keys) {
    auto it = t.inferred.find(k.name);
    out.push_back(ScopeVar{k, it == t.inferred.end() ? DataType::integer() : it->second});
  }
  return out;
}

AbstractedCalls abstract_calls(const std::vector<Expr>& exprs, const Scope& scope) {
  std::optional<DataType> result;
  TypeLookup lookup = lookup_from_scope(scope, result);
  std::map<const Expr*, DataType> call_types;
  Typer t(lookup, result, true);
  t.on_call = [&](const Expr& c, const DataType& ty) { call_types.emplace(&c, ty); };
  for (const auto& e : exprs) t.infer(e, DataType::boolean());

  AbstractedCalls out;
  int counter = 0;
  std::function<Expr(const Expr&)> rewrite = [&](const Expr& e) -> Expr {
    if (e.kind == ExprKind::Call) {
      std::string n = e.name + "#" + std::to_string(counter++);
      auto it = call_types.find(&e);
      out.fresh.push_back(ScopeVar{VarKey{n, Frame::Current}, it == call_types.end() ? DataType::integer() : it->second});
      Expr v = ex::var(n);
      v.loc = e.loc;
      return v;
    }
    Expr r = e;
    r.operands.clear();
    for (const auto& op : e.operands) r.operands.push_back(rewrite(op));
    return r;
  };
  for (const auto& e : exprs) out.exprs.push_back(rewrite(e));
  return out;
}

void collect_literals(const Expr& e, std::vector<std::int64_t>& ints, std::vector<std::string>& strs) {
  if (e.kind == ExprKind::IntLit) ints.push_back(e.int_value);
  if (e.kind == ExprKind::StrLit) strs.push_back(e.name);
  for (const auto& op : e.operands) collect_literals(op, ints, strs);
}

namespace {

std::vector<std::int64_t> numeric_domain(const DataType& t, const Bounds& b,
                                         const std::vector<std::int64_t>& ints) {
  std::set<std::int64_t> d;
  switch (t.kind) {
    case TypeKind::Integer:
      for (std::int64_t i = -b.int_bound; i <= b.int_bound; ++i) d.insert(i);
      for (auto c : ints)
        for (std::int64_t k : {c - 1, c, c + 1}) d.insert(k);
      break;
    case TypeKind::Set:
      for (std::int64_t i = 0; i <= b.set_bound; ++i) d.insert(i);
      for (auto c : ints)
        for (std::int64_t k : {c - 1, c, c + 1})
          if (k >= 0) d.insert(k);
      break;
    case TypeKind::Boolean:
    case TypeKind::Named:
      d = {0, 1};
      break;
    case TypeKind::String:
      break;
  }
  return {d.begin(), d.end()};
}

std::vector<std::string> string_domain(const std::vector<std::string>& strs) {
  std::set<std::string> s(strs.begin(), strs.end());
  s.insert("");
  return {s.begin(), s.end()};
}

}  // namespace

std::vector<Value> search_domain(const DataType& t, const Bounds& b, const std::vector<std::int64_t>& int_literals,
                                 const std::vector<std::string>& str_literals) {
  std::vector<Value> out;
  switch (t.kind) {
    case TypeKind::String:
      for (auto& s : string_domain(str_literals)) out.push_back(Value::string(s));
      break;
    case TypeKind::Integer:
      for (auto n : numeric_domain(t, b, int_literals)) out.push_back(Value::integer(n));
      break;
    case TypeKind::Boolean:
      out = {Value::boolean(false), Value::boolean(true)};
      break;
    case TypeKind::Set:
      for (auto n : numeric_domain(t, b, int_literals)) out.push_back(Value::set(n));
      break;
    case TypeKind::Named:
      out = {Value::opaque(t.name, 0), Value::opaque(t.name, 1)};
      break;
  }
  return out;
}

namespace {

struct Constraint {
  Program prog;
  int last = -1;         // position (within the component order) after which it is decidable
  int defines = -1;      // position of a variable fixed by `v = e`, or -1
  int definer_root = -1; // node index of e
};

class Search {
 public:
  Search(std::vector<std::vector<std::int64_t>> domains, const Bounds& b)
      : domains_(std::move(domains)), bounds_(b) {}

  // Lexicographically first assignment over all slots satisfying every
  // constraint, or nullopt. Unconstrained slots take their first value.
  std::optional<std::vector<std::int64_t>> solve(const std::vector<const Program*>& constraints) {
    const std::size_t n = domains_.size();
    std::vector<std::int64_t> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (domains_[i].empty()) return std::nullopt;
      values[i] = domains_[i].front();
    }
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      return x;
    };
    for (const Program* p : constraints) {
      if (p->slots.empty()) {
        if (!p->eval(values.data())) return std::nullopt;
        continue;
      }
      for (int s : p->slots) parent[static_cast<std::size_t>(find(s))] = find(p->slots.front());
    }
    std::map<int, std::vector<const Program*>> by_root;
    for (const Program* p : constraints)
      if (!p->slots.empty()) by_root[find(p->slots.front())].push_back(p);
    for (auto& [root, progs] : by_root) {
      std::vector<int> order;
      for (std::size_t i = 0; i < n; ++i)
        if (find(static_cast<int>(i)) == root) order.push_back(static_cast<int>(i));
      if (order.size() > bounds_.max_variables) {
        throw SearchLimitError("search scope of " + std::to_string(order.size()) +
                               " linked variables exceeds the limit of " +
                               std::to_string(bounds_.max_variables));
      }
      if (!solve_component(order, progs, values)) return std::nullopt;
    }
    return values;
  }

 private:
  bool solve_component(const std::vector<int>& order, const std::vector<const Program*>& progs,
                       std::vector<std::int64_t>& values) {
    std::map<int, int> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
    std::vector<std::vector<const Program*>> check_at(order.size());
    std::vector<std::vector<std::pair<const Program*, int>>> definers(order.size());
    for (const Program* p : progs) {
      int last = 0;
      for (int s : p->slots) last = std::max(last, pos.at(s));
      check_at[static_cast<std::size_t>(last)].push_back(p);
      // `v = e` with every variable of e ordered before v fixes v.
      const Node& root = p->nodes[static_cast<std::size_t>(p->root)];
      if (root.kind == ExprKind::Binary && root.bop == BinaryOp::Eq) {
        for (auto [side, other] : {std::pair{root.a, root.b}, std::pair{root.b, root.a}}) {
          const Node& v = p->nodes[static_cast<std::size_t>(side)];
          if (v.kind != ExprKind::Var && v.kind != ExprKind::Result) continue;
          if (pos.at(v.slot) != last) continue;
          if (uses_slot(*p, other, v.slot)) continue;
          definers[static_cast<std::size_t>(last)].emplace_back(p, other);
          break;
        }
      }
    }
    return dfs(0, order, check_at, definers, values);
  }

  static bool uses_slot(const Program& p, int node, int slot) {
    const Node& n = p.nodes[static_cast<std::size_t>(node)];
    if (n.slot == slot) return true;
    if (n.a >= 0 && uses_slot(p, n.a, slot)) return true;
    return n.b >= 0 && uses_slot(p, n.b, slot);
  }

  bool dfs(std::size_t level, const std::vector<int>& order,
           const std::vector<std::vector<const Program*>>& check_at,
           const std::vector<std::vector<std::pair<const Program*, int>>>& definers,
           std::vector<std::int64_t>& values) {
    if (level == order.size()) return true;
    const int slot = order[level];
    const auto& dom = domains_[static_cast<std::size_t>(slot)];
    auto try_value = [&](std::int64_t v) {
      if (++steps_ > bounds_.max_steps) throw SearchLimitError("search step budget exhausted");
      values[static_cast<std::size_t>(slot)] = v;
      for (const Program* p : check_at[level])
        if (!p->eval(values.data())) return false;
      return dfs(level + 1, order, check_at, definers, values);
    };
    if (!definers[level].empty()) {
      const auto& [p, node] = definers[level].front();
      std::int64_t forced = p->run(node, values.data());
      if (!std::binary_search(dom.begin(), dom.end(), forced)) return false;
      return try_value(forced);
    }
    for (std::int64_t v : dom)
      if (try_value(v)) return true;
    return false;
  }

  std::vector<std::vector<std::int64_t>> domains_;
  Bounds bounds_;
  std::uint64_t steps_ = 0;
};

}  // namespace

Verdict check_implication(const Expr& hyp_in, const Expr& goal_in, const Scope& scope_in, const Bounds& b) {
  Expr hyp = hyp_in;
  Expr goal = goal_in;
  Scope scope = scope_in;
  if (has_call(hyp) || has_call(goal)) {
    auto abs = abstract_calls({hyp, goal}, scope);
    hyp = abs.exprs[0];
    goal = abs.exprs[1];
    scope.insert(scope.end(), abs.fresh.begin(), abs.fresh.end());
  }

  std::set<VarKey> keyset;
  for (auto& k : free_vars(hyp)) keyset.insert(k);
  for (auto& k : free_vars(goal)) keyset.insert(k);
  std::vector<VarKey> keys(keyset.begin(), keyset.end());

  Scope inferred = infer_scope({&hyp, &goal});
  auto type_for = [&](const VarKey& k) {
    if (const ScopeVar* v = find_scope_var(scope, k)) return v->type;
    if (const ScopeVar* v = find_scope_var(scope, VarKey{k.name, Frame::Current})) return v->type;
    if (const ScopeVar* v = find_scope_var(scope, VarKey{k.name, Frame::Old})) return v->type;
    if (const ScopeVar* v = find_scope_var(inferred, k)) return v->type;
    return DataType::integer();
  };

  std::vector<std::int64_t> ints;
  std::vector<std::string> strs;
  collect_literals(hyp, ints, strs);
  collect_literals(goal, ints, strs);

  std::map<std::string, std::int64_t> strings;
  std::vector<std::string> sdom = string_domain(strs);
  for (const auto& s : sdom) strings.emplace(s, static_cast<std::int64_t>(strings.size()));

  std::map<VarKey, int> slots;
  std::vector<DataType> types;
  std::vector<std::vector<std::int64_t>> domains;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    slots.emplace(keys[i], static_cast<int>(i));
    DataType t = type_for(keys[i]);
    if (t.kind == TypeKind::String) {
      std::vector<std::int64_t> d;
      for (const auto& s : sdom) d.push_back(strings.at(s));
      domains.push_back(d);  // ids were assigned in ascending text order
    } else {
      domains.push_back(numeric_domain(t, b, ints));
    }
    types.push_back(std::move(t));
  }

  Compiler comp(slots, strings);
  std::vector<Program> hyp_progs;
  for (const auto& c : conjuncts(hyp)) hyp_progs.push_back(comp.compile(c));
  std::vector<Program> neg_goals;
  for (const auto& g : conjuncts(goal)) neg_goals.push_back(comp.compile(ex::logical_not(g)));

  Search search(domains, b);
  std::optional<std::vector<std::int64_t>> best;
  for (const auto& ng : neg_goals) {
    std::vector<const Program*> cs;
    cs.push_back(&ng);
    for (const auto& h : hyp_progs) cs.push_back(&h);
    auto sol = search.solve(cs);
    if (sol && (!best || *sol < *best)) best = std::move(sol);
  }

  Verdict v;
  v.bound = b.int_bound;
  if (!best) return v;
  v.kind = Verdict::Kind::Counterexample;
  std::map<std::int64_t, std::string> texts;
  for (const auto& [s, id] : strings) texts.emplace(id, s);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    std::int64_t n = (*best)[i];
    Value val;
    switch (types[i].kind) {
      case TypeKind::Integer: val = Value::integer(n); break;
      case TypeKind::Boolean: val = Value::boolean(n != 0); break;
      case TypeKind::String: val = Value::string(texts.at(n)); break;
      case TypeKind::Set: val = Value::set(n); break;
      case TypeKind::Named: val = Value::opaque(types[i].name, n); break;
    }
    v.counterexample.set(keys[i], val);
  }
  return v;
}

Verdict check_implication(const Expr& hyp, const Expr& goal, const Bounds& b) {
  return check_implication(hyp, goal, Scope{}, b);
}

namespace {

std::string smt_symbol(const std::string& raw) {
  bool simple = !raw.empty() && !std::isdigit(static_cast<unsigned char>(raw[0]));
  for (char c : raw)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') simple = false;
  return simple ? raw : "|" + raw + "|";
}

std::string smt_var(const VarKey& k) { return smt_symbol(k.frame == Frame::Old ? k.name + "__old" : k.name); }

std::string smt_sort(const DataType& t) {
  switch (t.kind) {
    case TypeKind::Integer:
    case TypeKind::Set: return "Int";
    case TypeKind::Boolean: return "Bool";
    case TypeKind::String: return "String";
    case TypeKind::Named: return smt_symbol(t.name);
  }
  return "Int";
}

std::string smt_int(std::int64_t v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

std::string smt_expr(const Expr& e) {
  auto bin = [](const char* op, const Expr& a, const Expr& b) {
    return std::string("(") + op + " " + smt_expr(a) + " " + smt_expr(b) + ")";
  };
  switch (e.kind) {
    case ExprKind::IntLit: return smt_int(e.int_value);
    case ExprKind::BoolLit: return e.bool_value ? "true" : "false";
    case ExprKind::StrLit: {
      std::string out = "\"";
      for (char c : e.name) {
        if (c == '"') out += '"';
        out += c;
      }
      return out + "\"";
    }
    case ExprKind::EmptySet: return "0";
    case ExprKind::Var: return smt_var(VarKey{full_name(e), e.frame});
    case ExprKind::Result: return kResultName;
    case ExprKind::Size: return smt_expr(e.operands[0]);
    case ExprKind::Call: {
      if (e.operands.empty()) return smt_symbol(e.name);
      std::string out = "(" + smt_symbol(e.name);
      for (const auto& a : e.operands) out += " " + smt_expr(a);
      return out + ")";
    }
    case ExprKind::Unary:
      return e.unary == UnaryOp::Not ? "(not " + smt_expr(e.operands[0]) + ")"
                                     : "(- " + smt_expr(e.operands[0]) + ")";
    case ExprKind::Implies: return bin("=>", e.operands[0], e.operands[1]);
    case ExprKind::Binary:
      switch (e.binary) {
        case BinaryOp::Mul: return bin("*", e.operands[0], e.operands[1]);
        case BinaryOp::Add: return bin("+", e.operands[0], e.operands[1]);
        case BinaryOp::Sub: return bin("-", e.operands[0], e.operands[1]);
        case BinaryOp::Eq: return bin("=", e.operands[0], e.operands[1]);
        case BinaryOp::Ne: return bin("distinct", e.operands[0], e.operands[1]);
        case BinaryOp::Lt: return bin("<", e.operands[0], e.operands[1]);
        case BinaryOp::Le: return bin("<=", e.operands[0], e.operands[1]);
        case BinaryOp::Gt: return bin(">", e.operands[0], e.operands[1]);
        case BinaryOp::Ge: return bin(">=", e.operands[0], e.operands[1]);
        case BinaryOp::And: return bin("and", e.operands[0], e.operands[1]);
        case BinaryOp::Or: return bin("or", e.operands[0], e.operands[1]);
      }
  }
  return "true";
}

}  // namespace

std::string export_smtlib(const SmtInput& po) {
  std::set<VarKey> keyset;
  for (auto& k : free_vars(po.hypothesis)) keyset.insert(k);
  for (auto& k : free_vars(po.goal)) keyset.insert(k);
  Scope inferred = infer_scope({&po.hypothesis, &po.goal});
  auto type_for = [&](const VarKey& k) {
    if (const ScopeVar* v = find_scope_var(po.scope, k)) return v->type;
    if (const ScopeVar* v = find_scope_var(po.scope, VarKey{k.name, Frame::Current})) return v->type;
    if (const ScopeVar* v = find_scope_var(inferred, k)) return v->type;
    return DataType::integer();
  };

  std::optional<DataType> result;
  TypeLookup lookup = lookup_from_scope(po.scope, result);
  for (const auto& v : inferred)
    if (!lookup.contains(v.key.name) && v.key.name != kResultName) lookup.emplace(v.key.name, v.type);
  if (!result)
    if (const ScopeVar* r = find_scope_var(inferred, VarKey{kResultName, Frame::Current})) result = r->type;

  struct FnSig {
    std::vector<DataType> args;
    DataType ret;
  };
  std::map<std::string, FnSig> functions;
  auto on_call = [&](const Expr& c, const DataType& ret) {
    if (functions.contains(c.name)) return;
    FnSig sig{{}, ret};
    for (const auto& a : c.operands) {
      auto t = type_of(a, lookup, result);
      sig.args.push_back(t.type.value_or(DataType::integer()));
    }
    functions.emplace(c.name, std::move(sig));
  };
  visit_calls(po.hypothesis, lookup, result, DataType::boolean(), on_call);
  visit_calls(po.goal, lookup, result, DataType::boolean(), on_call);

  std::set<std::string> sorts;
  auto note_sort = [&](const DataType& t) {
    if (t.kind == TypeKind::Named) sorts.insert(t.name);
  };
  for (const auto& k : keyset) note_sort(type_for(k));
  for (const auto& [_, sig] : functions) {
    note_sort(sig.ret);
    for (const auto& a : sig.args) note_sort(a);
  }

  std::ostringstream os;
  os << "; obligation " << po.id << "\n";
  os << "(set-logic ALL)\n";
  for (const auto& s : sorts) os << "(declare-sort " << smt_symbol(s) << " 0)\n";
  for (const auto& k : keyset) {
    DataType t = type_for(k);
    os << "(declare-const " << smt_var(k) << " " << smt_sort(t) << ")\n";
    if (t.kind == TypeKind::Set) os << "(assert (>= " << smt_var(k) << " 0))\n";
  }
  for (const auto& [name, sig] : functions) {
    os << "(declare-fun " << smt_symbol(name) << " (";
    for (std::size_t i = 0; i < sig.args.size(); ++i) os << (i ? " " : "") << smt_sort(sig.args[i]);
    os << ") " << smt_sort(sig.ret) << ")\n";
    if (sig.ret.kind == TypeKind::Set) {
      os << "; " << name << " yields a set cardinality\n";
    }
  }
  os << "(assert " << smt_expr(po.hypothesis) << ")\n";
  os << "(assert (not " << smt_expr(po.goal) << "))\n";
  os << "(check-sat)\n";
  return os.str();
}

}  // namespace kmelia
