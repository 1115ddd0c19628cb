#include <sstream>

#include "kmelia/parser.hpp"

namespace kmelia {

namespace {

// Binding strength, loosest first.
enum Prec : int {
  kImplies = 1,
  kOr = 2,
  kAnd = 3,
  kCmp = 4,
  kAdd = 5,
  kMul = 6,
  kPrefix = 7,
  kAtom = 8,
};

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Implies: return kImplies;
    case ExprKind::Unary: return kPrefix;
    case ExprKind::Binary:
      switch (e.binary) {
        case BinaryOp::Or: return kOr;
        case BinaryOp::And: return kAnd;
        case BinaryOp::Add:
        case BinaryOp::Sub: return kAdd;
        case BinaryOp::Mul: return kMul;
        default: return kCmp;
      }
    case ExprKind::IntLit: return e.int_value < 0 ? kPrefix : kAtom;
    default: return kAtom;
  }
}

const char* op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::Mul: return "*";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "<>";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
  }
  return "?";
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

void print(const Expr& e, int min_prec, std::string& out);

void print_operand(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(e, kImplies, out);
    out += ')';
  } else {
    print(e, min_prec, out);
  }
}

void print_args(const std::vector<Expr>& args, std::string& out) {
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    print(args[i], kImplies, out);
  }
  out += ')';
}

void print(const Expr& e, int min_prec, std::string& out) {
  switch (e.kind) {
    case ExprKind::IntLit: out += std::to_string(e.int_value); return;
    case ExprKind::BoolLit: out += e.bool_value ? "true" : "false"; return;
    case ExprKind::StrLit: out += quote(e.name); return;
    case ExprKind::Result: out += "result"; return;
    case ExprKind::EmptySet: out += "emptySet"; return;
    case ExprKind::Var: {
      std::string n = e.qualifier.empty() ? e.name : e.qualifier + "." + e.name;
      out += e.frame == Frame::Old ? "old(" + n + ")" : n;
      return;
    }
    case ExprKind::Call:
      out += e.name;
      print_args(e.operands, out);
      return;
    case ExprKind::Size:
      out += "size(";
      print(e.operands[0], kImplies, out);
      out += ')';
      return;
    case ExprKind::Unary: {
      const Expr& x = e.operands[0];
      if (e.unary == UnaryOp::Not) {
        out += "not ";
        print_operand(x, kPrefix, out);
      } else {
        out += '-';
        // `-5` and `--x` would re-lex differently.
        bool wrap = x.kind == ExprKind::IntLit || (x.kind == ExprKind::Unary && x.unary == UnaryOp::Neg);
        if (wrap) {
          out += '(';
          print(x, kImplies, out);
          out += ')';
        } else {
          print_operand(x, kPrefix, out);
        }
      }
      return;
    }
    case ExprKind::Implies:
      print_operand(e.operands[0], kOr, out);
      out += " implies ";
      print_operand(e.operands[1], kImplies, out);
      return;
    case ExprKind::Binary: {
      int p = precedence(e);
      int left = p;
      int right = p + 1;
      if (p == kCmp) left = kAdd;
      print_operand(e.operands[0], left, out);
      out += ' ';
      out += op_text(e.binary);
      out += ' ';
      print_operand(e.operands[1], right, out);
      return;
    }
  }
  (void)min_prec;
}

std::string join(const std::vector<std::string>& names) {
  std::string out = "{";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out + "}";
}

std::string predicate_text(const Predicate& p) {
  std::string out;
  if (p.observable) out += "obs ";
  if (!p.label.empty()) out += "@" + p.label + " : ";
  return out + pretty_print(p.body);
}

void print_predicates(std::ostringstream& os, const std::vector<Predicate>& preds, const char* indent) {
  for (std::size_t i = 0; i < preds.size(); ++i) {
    os << indent << predicate_text(preds[i]) << (i + 1 < preds.size() ? " ," : "") << "\n";
  }
}

void print_state(std::ostringstream& os, const std::vector<StateVar>& vars, const char* indent) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const auto& v = vars[i];
    os << indent << (v.observable ? "obs " : "") << v.name << " : " << pretty_print(v.type);
    if (v.init) os << " := " << pretty_print(*v.init);
    os << (i + 1 < vars.size() ? ";" : "") << "\n";
  }
}

void print_params(std::ostringstream& os, const std::vector<Param>& ps, const char* sep) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) os << sep;
    os << ps[i].name << " : " << pretty_print(ps[i].type);
  }
}

}  // namespace

std::string pretty_print(const Expr& e) {
  std::string out;
  print(e, kImplies, out);
  return out;
}

std::string pretty_print(const DataType& t) {
  switch (t.kind) {
    case TypeKind::Integer: return "Integer";
    case TypeKind::Boolean: return "Boolean";
    case TypeKind::String: return "String";
    case TypeKind::Named: return t.name;
    case TypeKind::Set: return "setOf " + (t.elem ? pretty_print(*t.elem) : std::string("Integer"));
  }
  return "?";
}

std::string pretty_print(const Action& a) {
  std::string out;
  auto args = [&out](const std::vector<Expr>& xs) { print_args(xs, out); };
  switch (a.kind) {
    case ActionKind::Tau: return "tau";
    case ActionKind::Emit:
      out = a.channel + "!" + a.message;
      args(a.args);
      return out;
    case ActionKind::Receive: {
      out = a.channel + "?" + a.message + "(";
      for (std::size_t i = 0; i < a.vars.size(); ++i) out += (i ? ", " : "") + a.vars[i];
      return out + ")";
    }
    case ActionKind::Assign: return a.target + " := " + (a.value ? pretty_print(*a.value) : "?");
    case ActionKind::Call:
      out = "call " + a.service;
      args(a.args);
      return out;
    case ActionKind::CallRet:
      out = "callret " + a.target + " := " + a.service;
      args(a.args);
      return out;
  }
  return out;
}

std::string label_text(const std::optional<Expr>& guard, const Action& a) {
  if (!guard) return pretty_print(a);
  return "[" + pretty_print(*guard) + "] " + pretty_print(a);
}

std::string pretty_print(const Elts& b, int indent) {
  std::string pad(static_cast<std::size_t>(indent), ' ');
  std::ostringstream os;
  os << pad << "init " << b.initial << "\n";
  os << pad << "final " << join(b.finals) << "\n";
  os << pad << "states " << join(b.states) << "\n";
  os << pad << "trans {\n";
  for (std::size_t i = 0; i < b.transitions.size(); ++i) {
    const auto& t = b.transitions[i];
    os << pad << "  " << t.source << " -- " << label_text(t.guard, t.action) << " --> " << t.target
       << (i + 1 < b.transitions.size() ? " ;" : "") << "\n";
  }
  os << pad << "}\n";
  return os.str();
}

std::string pretty_print(const ServiceDef& s) {
  std::ostringstream os;
  os << (s.kind == ServiceKind::Provided ? "provided " : "required ") << s.name << " (";
  print_params(os, s.params, ", ");
  os << ")";
  if (s.return_type) os << " : " << pretty_print(*s.return_type);
  os << "\n";
  if (!s.subprovides.empty() || !s.calrequires.empty() || !s.extrequires.empty() ||
      !s.intrequires.empty()) {
    os << "Interface\n";
    if (!s.subprovides.empty()) os << "  subprovides : " << join(s.subprovides) << "\n";
    if (!s.calrequires.empty()) os << "  calrequires : " << join(s.calrequires) << "\n";
    if (!s.extrequires.empty()) os << "  extrequires : " << join(s.extrequires) << "\n";
    if (!s.intrequires.empty()) os << "  intrequires : " << join(s.intrequires) << "\n";
  }
  if (!s.virtual_vars.empty()) {
    os << "Virtual Variables\n";
    print_state(os, s.virtual_vars, "  ");
  }
  if (!s.virtual_invariant.empty()) {
    os << "Virtual Invariant\n";
    print_predicates(os, s.virtual_invariant, "  ");
  }
  if (!s.pre.empty()) {
    os << "Pre\n";
    print_predicates(os, s.pre, "  ");
  }
  if (!s.locals.empty()) {
    os << "Variables\n  ";
    print_params(os, s.locals, ";\n  ");
    os << "\n";
  }
  if (s.behavior) {
    os << "Behavior\n" << pretty_print(*s.behavior, 2);
  }
  if (!s.post.empty()) {
    os << "Post\n";
    print_predicates(os, s.post, "  ");
  }
  os << "End\n";
  return os.str();
}

std::string pretty_print(const ComponentDef& c) {
  std::ostringstream os;
  os << "COMPONENT " << c.name << "\n";
  os << "INTERFACE provides : " << join(c.provided) << " requires : " << join(c.required) << "\n";
  if (!c.uses.empty()) os << "USES " << join(c.uses) << "\n";
  if (!c.constants.empty()) {
    os << "CONSTANTS\n";
    print_state(os, c.constants, "  ");
  }
  if (!c.variables.empty()) {
    os << "VARIABLES\n";
    print_state(os, c.variables, "  ");
  }
  if (!c.invariant.empty()) {
    os << "INVARIANT\n";
    print_predicates(os, c.invariant, "  ");
  }
  if (!c.initialization.empty()) {
    os << "INITIALIZATION\n";
    for (const auto& a : c.initialization) os << "  " << a.variable << " := " << pretty_print(a.value) << ";\n";
  }
  for (const auto& s : c.services) os << "\n" << pretty_print(s);
  return os.str();
}

std::string pretty_print(const Assembly& a) {
  std::ostringstream os;
  os << "Assembly " << a.name << "\n";
  os << "Components";
  for (std::size_t i = 0; i < a.instances.size(); ++i) {
    os << (i ? "; " : " ") << a.instances[i].name << " : " << a.instances[i].component;
  }
  os << "\n";
  if (!a.links.empty()) {
    os << "Links\n";
    for (const auto& l : a.links) {
      os << "  @" << l.label << " " << (l.kind == LinkKind::ProvidedToRequired ? "p-r" : "r-p") << " "
         << l.end_a.instance << "." << l.end_a.service << " " << l.end_b.instance << "." << l.end_b.service
         << "\n";
      if (!l.context_mapping.empty()) {
        os << "    context mapping\n";
        for (const auto& m : l.context_mapping) {
          os << "      " << m.instance << "." << m.variable << " = " << pretty_print(m.value) << "\n";
        }
      }
      if (!l.sublinks.empty()) os << "    sublinks : " << join(l.sublinks) << "\n";
    }
  }
  os << "End\n";
  return os.str();
}

}  // namespace kmelia
