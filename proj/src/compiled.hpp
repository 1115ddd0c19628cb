#pragma once

// Slot-indexed int64 evaluation shared by the bounded checkers.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kmelia/assertions.hpp"

namespace kmelia::detail {

inline std::string full_name(const Expr& e) { return e.qualifier.empty() ? e.name : e.qualifier + "." + e.name; }

inline std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
inline std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
inline std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

// Flat, slot-indexed form of an expression over int64 values.
struct Node {
  ExprKind kind = ExprKind::IntLit;
  BinaryOp bop = BinaryOp::And;
  UnaryOp uop = UnaryOp::Not;
  std::int64_t value = 0;
  int slot = -1;
  int a = -1;
  int b = -1;
};

class Program {
 public:
  int root = -1;
  std::vector<Node> nodes;
  std::vector<int> slots;  // distinct variable slots, ascending

  std::int64_t eval(const std::int64_t* vals) const { return run(root, vals); }

  std::int64_t run(int i, const std::int64_t* v) const {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    switch (n.kind) {
      case ExprKind::IntLit:
      case ExprKind::BoolLit:
      case ExprKind::StrLit:
      case ExprKind::EmptySet: return n.value;
      case ExprKind::Var:
      case ExprKind::Result: return v[n.slot];
      case ExprKind::Size: return run(n.a, v);
      case ExprKind::Unary: return n.uop == UnaryOp::Not ? !run(n.a, v) : wrap_sub(0, run(n.a, v));
      case ExprKind::Implies: return !run(n.a, v) || run(n.b, v);
      case ExprKind::Binary:
        switch (n.bop) {
          case BinaryOp::And: return run(n.a, v) && run(n.b, v);
          case BinaryOp::Or: return run(n.a, v) || run(n.b, v);
          case BinaryOp::Add: return wrap_add(run(n.a, v), run(n.b, v));
          case BinaryOp::Sub: return wrap_sub(run(n.a, v), run(n.b, v));
          case BinaryOp::Mul: return wrap_mul(run(n.a, v), run(n.b, v));
          case BinaryOp::Eq: return run(n.a, v) == run(n.b, v);
          case BinaryOp::Ne: return run(n.a, v) != run(n.b, v);
          case BinaryOp::Lt: return run(n.a, v) < run(n.b, v);
          case BinaryOp::Le: return run(n.a, v) <= run(n.b, v);
          case BinaryOp::Gt: return run(n.a, v) > run(n.b, v);
          case BinaryOp::Ge: return run(n.a, v) >= run(n.b, v);
        }
        break;
      case ExprKind::Call: break;
    }
    throw EvalError("malformed compiled expression");
  }
};

class Compiler {
 public:
  Compiler(const std::map<VarKey, int>& slots, std::map<std::string, std::int64_t>& strings)
      : slots_(slots), strings_(strings) {}

  Program compile(const Expr& e) {
    Program p;
    std::set<int> used;
    p.root = emit(e, p, used);
    p.slots.assign(used.begin(), used.end());
    return p;
  }

 private:
  int emit(const Expr& e, Program& p, std::set<int>& used) {
    Node n;
    n.kind = e.kind;
    switch (e.kind) {
      case ExprKind::IntLit: n.value = e.int_value; break;
      case ExprKind::BoolLit: n.value = e.bool_value ? 1 : 0; break;
      case ExprKind::EmptySet: n.value = 0; break;
      case ExprKind::StrLit: n.value = intern(e.name); break;
      case ExprKind::Var:
      case ExprKind::Result: {
        VarKey k = e.kind == ExprKind::Result ? VarKey{kResultName, Frame::Current} : VarKey{full_name(e), e.frame};
        n.slot = slots_.at(k);
        used.insert(n.slot);
        break;
      }
      case ExprKind::Call: throw EvalError("uninterpreted call " + e.name + " reached the checker");
      default:
        n.uop = e.unary;
        n.bop = e.binary;
        n.a = emit(e.operands[0], p, used);
        if (e.operands.size() > 1) n.b = emit(e.operands[1], p, used);
        break;
    }
    p.nodes.push_back(n);
    return static_cast<int>(p.nodes.size()) - 1;
  }

  std::int64_t intern(const std::string& s) {
    auto it = strings_.find(s);
    if (it != strings_.end()) return it->second;
    auto id = static_cast<std::int64_t>(strings_.size());
    strings_.emplace(s, id);
    return id;
  }

  const std::map<VarKey, int>& slots_;
  std::map<std::string, std::int64_t>& strings_;
};

}  // namespace kmelia::detail
