#include "kmelia/parser.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "lexer.hpp"

namespace kmelia {

namespace {

using detail::Token;
using detail::TokKind;

struct ParseError {
  SourceLoc loc;
  std::string message;
};

const std::set<std::string, std::less<>> kExprReserved{
    "true", "false", "result", "Result", "emptySet", "old", "size", "not", "and", "or", "implies"};

// Keywords that begin a component-level section.
const std::set<std::string, std::less<>> kComponentSections{
    "INTERFACE", "USES",     "CONSTANTS", "VARIABLES",    "INVARIANT",
    "INITIALIZATION", "SERVICES", "END_SERVICES", "provided", "required"};

// Keywords that begin a service-level section.
const std::set<std::string, std::less<>> kServiceSections{
    "Interface", "Virtual", "Pre", "Variables", "Behavior", "Post", "End", "provided", "required",
    "END_SERVICES"};

class Parser {
 public:
  Parser(std::string_view text, std::string unit) : unit_(std::move(unit)) {
    toks_ = detail::lex(text, unit_, diags_);
  }

  std::vector<Diagnostic> take_diagnostics() {
    if (saw_lower_result_ && saw_upper_result_) {
      warn("mixed-result-spelling", first_upper_result_,
           "both `result` and `Result` are used in this unit; they denote the same value");
    }
    return std::move(diags_);
  }

  // ---------------------------------------------------------------- units

  ComponentDef component() {
    ComponentDef c;
    c.unit = unit_;
    try {
      c.loc = peek().loc;
      expect_kw("COMPONENT");
      c.name = ident("component name");
    } catch (const ParseError& e) {
      report(e);
      return c;
    }
    std::set<std::string> seen_sections;
    while (!at_eof()) {
      if (accept(";")) continue;
      const Token& t = peek();
      if (t.kind != TokKind::Ident || !kComponentSections.contains(t.text)) {
        report(ParseError{t.loc, "expected a component section, found '" + t.text + "'"});
        sync_to(kComponentSections);
        continue;
      }
      if (t.text == "provided" || t.text == "required") {
        services(c);
        continue;
      }
      std::string section = next().text;
      if (section == "SERVICES") {
        services(c);
        continue;
      }
      if (section == "END_SERVICES") continue;
      if (!seen_sections.insert(section).second) {
        error("duplicate-declaration", t.loc, "section " + section + " declared twice");
      }
      try {
        if (section == "INTERFACE") {
          interface(c);
        } else if (section == "USES") {
          c.uses = id_set();
        } else if (section == "CONSTANTS") {
          declarations(c.constants, true, true);
        } else if (section == "VARIABLES") {
          declarations(c.variables, true, false);
        } else if (section == "INVARIANT") {
          c.invariant = predicates(true);
        } else if (section == "INITIALIZATION") {
          initialization(c);
        }
      } catch (const ParseError& e) {
        report(e);
        sync_to(kComponentSections);
      }
    }
    check_component_duplicates(c);
    return c;
  }

  Assembly assembly(const std::string& default_name) {
    Assembly a;
    a.unit = unit_;
    a.loc = peek().loc;
    try {
      if (!(is_kw("Assembly") || is_kw("ASSEMBLY"))) throw ParseError{peek().loc, "expected 'Assembly'"};
      next();
      if (peek().kind == TokKind::Ident && !is_kw("Components")) {
        a.name = next().text;
      } else {
        a.name = default_name;
      }
      expect_kw("Components");
      do {
        Instance inst;
        inst.loc = peek().loc;
        inst.name = ident("instance name");
        expect(":");
        inst.component = ident("component type");
        a.instances.push_back(std::move(inst));
      } while (accept(";") || accept(","));
      if (accept_kw("Links")) {
        while (is_punct("@")) {
          try {
            a.links.push_back(link());
          } catch (const ParseError& e) {
            report(e);
            while (!at_eof() && !is_punct("@") && !is_kw("End")) next();
          }
        }
      }
      accept_kw("End");
      if (!at_eof()) throw ParseError{peek().loc, "unexpected '" + peek().text + "' after assembly"};
    } catch (const ParseError& e) {
      report(e);
    }
    check_assembly(a);
    return a;
  }

  Expr standalone_expr() {
    Expr e = ex::bool_lit(true);
    try {
      e = expr();
      if (!at_eof()) throw ParseError{peek().loc, "unexpected '" + peek().text + "' after expression"};
    } catch (const ParseError& err) {
      report(err);
    }
    return e;
  }

  Elts standalone_behavior() {
    Elts b;
    try {
      b = behavior();
      if (!at_eof()) throw ParseError{peek().loc, "unexpected '" + peek().text + "' after behavior"};
    } catch (const ParseError& err) {
      report(err);
    }
    return b;
  }

 private:
  // --------------------------------------------------------- token helpers

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t k = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[k];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_eof() const { return peek().kind == TokKind::Eof; }
  bool is_kw(std::string_view kw, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokKind::Ident && t.text == kw;
  }
  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokKind::Punct && t.text == p;
  }
  bool accept(std::string_view p) {
    if (!is_punct(p)) return false;
    next();
    return true;
  }
  bool accept_kw(std::string_view kw) {
    if (!is_kw(kw)) return false;
    next();
    return true;
  }
  void expect(std::string_view p) {
    if (!accept(p)) {
      throw ParseError{peek().loc, "expected '" + std::string(p) + "', found " + describe(peek())};
    }
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) {
      throw ParseError{peek().loc, "expected '" + std::string(kw) + "', found " + describe(peek())};
    }
  }
  std::string ident(std::string_view what) {
    if (peek().kind != TokKind::Ident) {
      throw ParseError{peek().loc, "expected " + std::string(what) + ", found " + describe(peek())};
    }
    return next().text;
  }
  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokKind::Eof: return "end of input";
      case TokKind::String: return "string literal";
      default: return "'" + t.text + "'";
    }
  }
  void sync_to(const std::set<std::string, std::less<>>& keywords) {
    while (!at_eof()) {
      const Token& t = peek();
      if (t.kind == TokKind::Ident && keywords.contains(t.text)) return;
      next();
    }
  }

  void report(const ParseError& e) { error("syntax-error", e.loc, e.message); }
  void error(std::string code, SourceLoc loc, std::string msg) {
    diags_.push_back(make_diag(Severity::Error, Phase::Parse, std::move(code), unit_, loc, std::move(msg)));
  }
  void warn(std::string code, SourceLoc loc, std::string msg) {
    diags_.push_back(make_diag(Severity::Warning, Phase::Parse, std::move(code), unit_, loc, std::move(msg)));
  }

  // ------------------------------------------------------------ sections

  std::vector<std::string> id_set() {
    std::vector<std::string> out;
    expect("{");
    if (accept("}")) return out;
    do {
      out.push_back(ident("identifier"));
    } while (accept(","));
    expect("}");
    return out;
  }

  void interface(ComponentDef& c) {
    bool progressed = true;
    while (progressed) {
      progressed = false;
      if (is_kw("provides")) {
        next();
        expect(":");
        c.provided = id_set();
        progressed = true;
      } else if (is_kw("requires")) {
        next();
        expect(":");
        c.required = id_set();
        progressed = true;
      }
    }
  }

  DataType type() {
    const Token& t = peek();
    std::string name = ident("type");
    if (name == "Integer") return DataType::integer();
    if (name == "Boolean") return DataType::boolean();
    if (name == "String") return DataType::string();
    if (name == "setOf") return DataType::set_of(type());
    if (kExprReserved.contains(name)) throw ParseError{t.loc, "'" + name + "' is not a type"};
    return DataType::named(name);
  }

  bool at_declaration() const {
    if (is_kw("obs")) return true;
    return peek().kind == TokKind::Ident && (is_punct(":", 1) || is_punct(",", 1));
  }

  // decl := ['obs'] IDENT {',' IDENT} ':' type [':=' expr]
  void declarations(std::vector<StateVar>& out, bool allow_obs, bool constants) {
    while (at_declaration()) {
      bool obs = false;
      SourceLoc obs_loc = peek().loc;
      if (accept_kw("obs")) {
        obs = true;
        if (!allow_obs) throw ParseError{obs_loc, "'obs' is not allowed here"};
      }
      std::vector<std::pair<std::string, SourceLoc>> names;
      do {
        SourceLoc loc = peek().loc;
        names.emplace_back(ident("variable name"), loc);
      } while (accept(","));
      expect(":");
      DataType t = type();
      std::optional<Expr> init;
      if (accept(":=")) {
        if (!constants) throw ParseError{peek().loc, "only constants take an initial value here"};
        init = expr();
      }
      for (auto& [n, loc] : names) {
        StateVar v;
        v.name = n;
        v.type = t;
        v.observable = obs;
        v.is_constant = constants;
        v.init = init;
        v.loc = loc;
        out.push_back(std::move(v));
      }
      if (!accept(";")) break;
    }
  }

  void params(std::vector<Param>& out) {
    while (peek().kind == TokKind::Ident && (is_punct(":", 1) || is_punct(",", 1))) {
      std::vector<std::pair<std::string, SourceLoc>> names;
      do {
        SourceLoc loc = peek().loc;
        names.emplace_back(ident("name"), loc);
      } while (accept(","));
      expect(":");
      DataType t = type();
      for (auto& [n, loc] : names) out.push_back(Param{n, t, loc});
      if (!accept(";") && !accept(",")) break;
    }
  }

  // pred := ['obs'] ['@' IDENT ':'] expr ; labels mandatory when `labelled`
  std::vector<Predicate> predicates(bool labelled) {
    std::vector<Predicate> out;
    std::set<std::string> labels;
    do {
      Predicate p;
      p.loc = peek().loc;
      if (accept_kw("obs")) p.observable = true;
      if (is_punct("@")) {
        next();
        SourceLoc lloc = peek().loc;
        p.label = ident("predicate label");
        expect(":");
        if (!labels.insert(p.label).second) {
          error("duplicate-predicate-label", lloc, "predicate label @" + p.label + " declared twice");
        }
      } else if (labelled) {
        throw ParseError{peek().loc, "expected '@label :' before predicate"};
      }
      try {
        p.body = expr();
      } catch (const ParseError& e) {
        report(e);
        p.body = ex::bool_lit(true);
        while (!at_eof() && !is_punct(",") &&
               !(peek().kind == TokKind::Ident &&
                 (kComponentSections.contains(peek().text) || kServiceSections.contains(peek().text)))) {
          next();
        }
      }
      out.push_back(std::move(p));
    } while (accept(","));
    return out;
  }

  void initialization(ComponentDef& c) {
    while (peek().kind == TokKind::Ident && is_punct(":=", 1)) {
      Assignment a;
      a.loc = peek().loc;
      a.variable = next().text;
      expect(":=");
      a.value = expr();
      c.initialization.push_back(std::move(a));
      accept(";");
    }
  }

  void services(ComponentDef& c) {
    while (is_kw("provided") || is_kw("required")) {
      try {
        c.services.push_back(service());
      } catch (const ParseError& e) {
        report(e);
        // Resynchronize after the failing service's End.
        while (!at_eof() && !is_kw("End") && !is_kw("provided") && !is_kw("required") &&
               !is_kw("END_SERVICES")) {
          next();
        }
        accept_kw("End");
      }
    }
    accept_kw("END_SERVICES");
  }

  ServiceDef service() {
    ServiceDef s;
    s.loc = peek().loc;
    s.kind = next().text == "provided" ? ServiceKind::Provided : ServiceKind::Required;
    s.name = ident("service name");
    expect("(");
    params(s.params);
    expect(")");
    if (accept(":")) s.return_type = type();
    std::set<std::string> seen;
    while (!is_kw("End")) {
      if (accept(";")) continue;
      const Token& t = peek();
      if (t.kind != TokKind::Ident || !kServiceSections.contains(t.text) || is_kw("provided") ||
          is_kw("required") || is_kw("END_SERVICES")) {
        throw ParseError{t.loc, "expected a service section or 'End', found " + describe(t)};
      }
      std::string section = next().text;
      if (section == "Virtual") {
        if (accept_kw("Variables")) {
          section = "Virtual Variables";
        } else {
          expect_kw("Invariant");
          section = "Virtual Invariant";
        }
      }
      if (!seen.insert(section).second) {
        error("duplicate-declaration", t.loc, "section " + section + " declared twice in " + s.name);
      }
      if (section == "Interface") {
        service_interface(s);
      } else if (section == "Virtual Variables") {
        declarations(s.virtual_vars, true, false);
      } else if (section == "Virtual Invariant") {
        s.virtual_invariant = predicates(false);
      } else if (section == "Pre") {
        s.pre = predicates(false);
      } else if (section == "Post") {
        s.post = predicates(false);
      } else if (section == "Variables") {
        params(s.locals);
      } else if (section == "Behavior") {
        if (is_kw("init")) s.behavior = behavior();
      }
    }
    expect_kw("End");
    check_service_duplicates(s);
    return s;
  }

  void service_interface(ServiceDef& s) {
    for (;;) {
      std::vector<std::string>* target = nullptr;
      if (is_kw("subprovides")) target = &s.subprovides;
      else if (is_kw("calrequires")) target = &s.calrequires;
      else if (is_kw("extrequires")) target = &s.extrequires;
      else if (is_kw("intrequires")) target = &s.intrequires;
      if (!target) return;
      next();
      expect(":");
      *target = id_set();
    }
  }

  // behavior := 'init' IDENT 'final' idset ['states' idset] 'trans' '{' {transition [';']} '}'
  Elts behavior() {
    Elts b;
    b.loc = peek().loc;
    expect_kw("init");
    b.initial = ident("initial state");
    expect_kw("final");
    b.finals = id_set();
    bool explicit_states = false;
    if (accept_kw("states")) {
      b.states = id_set();
      explicit_states = true;
    }
    expect_kw("trans");
    expect("{");
    while (!is_punct("}")) {
      b.transitions.push_back(transition());
      accept(";");
    }
    expect("}");

    std::set<std::string> declared(b.states.begin(), b.states.end());
    auto declare = [&](const std::string& st, SourceLoc loc) {
      if (declared.contains(st)) return;
      if (explicit_states) {
        error("undeclared-state", loc, "state " + st + " is not declared in the states list");
        return;
      }
      declared.insert(st);
      b.states.push_back(st);
    };
    declare(b.initial, b.loc);
    for (const auto& f : b.finals) declare(f, b.loc);
    for (const auto& t : b.transitions) {
      declare(t.source, t.loc);
      declare(t.target, t.loc);
    }
    if (explicit_states && b.states.size() != declared.size()) {
      error("duplicate-declaration", b.loc, "state declared twice in states list");
    }
    return b;
  }

  Transition transition() {
    Transition t;
    t.loc = peek().loc;
    t.source = ident("source state");
    expect("--");
    if (accept("[")) {
      t.guard = expr();
      expect("]");
    }
    t.action = action();
    expect("-->");
    t.target = ident("target state");
    return t;
  }

  std::vector<Expr> call_args() {
    std::vector<Expr> args;
    expect("(");
    if (accept(")")) return args;
    do {
      args.push_back(expr());
    } while (accept(","));
    expect(")");
    return args;
  }

  Action action() {
    Action a;
    if (is_kw("tau") && is_punct("-->", 1)) {
      next();
      a.kind = ActionKind::Tau;
      return a;
    }
    if (is_kw("call") && peek(1).kind == TokKind::Ident && is_punct("(", 2)) {
      next();
      a.kind = ActionKind::Call;
      a.service = next().text;
      a.args = call_args();
      return a;
    }
    if (is_kw("callret") && peek(1).kind == TokKind::Ident && is_punct(":=", 2)) {
      next();
      a.kind = ActionKind::CallRet;
      a.target = next().text;
      expect(":=");
      a.service = ident("service name");
      a.args = call_args();
      return a;
    }
    std::string head = ident("action");
    if (accept("!")) {
      a.kind = ActionKind::Emit;
      a.channel = head;
      a.message = ident("message name");
      a.args = call_args();
      return a;
    }
    if (accept("?")) {
      a.kind = ActionKind::Receive;
      a.channel = head;
      a.message = ident("message name");
      expect("(");
      if (!accept(")")) {
        do {
          a.vars.push_back(ident("variable"));
        } while (accept(","));
        expect(")");
      }
      return a;
    }
    if (accept(":=")) {
      a.kind = ActionKind::Assign;
      a.target = head;
      a.value = expr();
      return a;
    }
    throw ParseError{peek().loc, "expected '!', '?' or ':=' after '" + head + "'"};
  }

  Endpoint endpoint() {
    Endpoint e;
    e.loc = peek().loc;
    e.instance = ident("instance name");
    expect(".");
    e.service = ident("service name");
    return e;
  }

  // link := '@' IDENT [':'] ('p-r' | 'r-p') endpoint endpoint
  //         ['context' 'mapping' {mapping}] ['sublinks' ':' idset]
  AssemblyLink link() {
    AssemblyLink l;
    l.loc = peek().loc;
    expect("@");
    l.label = ident("link label");
    accept(":");
    SourceLoc kloc = peek().loc;
    std::string first = ident("'p-r' or 'r-p'");
    expect("-");
    std::string second = ident("'p-r' or 'r-p'");
    if (first == "p" && second == "r") {
      l.kind = LinkKind::ProvidedToRequired;
    } else if (first == "r" && second == "p") {
      l.kind = LinkKind::RequiredToProvided;
    } else {
      throw ParseError{kloc, "link kind must be 'p-r' or 'r-p'"};
    }
    l.end_a = endpoint();
    l.end_b = endpoint();
    if (accept_kw("context")) {
      expect_kw("mapping");
      while (peek().kind == TokKind::Ident && is_punct(".", 1)) {
        Mapping m;
        m.loc = peek().loc;
        m.instance = next().text;
        expect(".");
        m.variable = ident("virtual variable");
        expect("=");
        m.value = expr();
        l.context_mapping.push_back(std::move(m));
        if (!accept(",")) accept(";");
      }
    }
    if (accept_kw("sublinks")) {
      expect(":");
      l.sublinks = id_set();
    }
    return l;
  }

  // ---------------------------------------------------------- expressions

  Expr expr() { return implication(); }

  Expr implication() {
    Expr lhs = disjunction();
    if (is_kw("implies")) {
      SourceLoc loc = next().loc;
      Expr e = ex::implies(std::move(lhs), implication());
      e.loc = loc;
      return e;
    }
    return lhs;
  }

  Expr disjunction() {
    Expr lhs = conjunction();
    while (is_kw("or") || is_punct("||")) {
      SourceLoc loc = next().loc;
      lhs = ex::binary(BinaryOp::Or, std::move(lhs), conjunction());
      lhs.loc = loc;
    }
    return lhs;
  }

  Expr conjunction() {
    Expr lhs = comparison();
    while (is_kw("and") || is_punct("&&")) {
      SourceLoc loc = next().loc;
      lhs = ex::binary(BinaryOp::And, std::move(lhs), comparison());
      lhs.loc = loc;
    }
    return lhs;
  }

  std::optional<BinaryOp> comparison_op() const {
    const Token& t = peek();
    if (t.kind != TokKind::Punct) return std::nullopt;
    if (t.text == "=" || t.text == "==") return BinaryOp::Eq;
    if (t.text == "<>" || t.text == "!=" || t.text == "/=") return BinaryOp::Ne;
    if (t.text == "<") return BinaryOp::Lt;
    if (t.text == "<=") return BinaryOp::Le;
    if (t.text == ">") return BinaryOp::Gt;
    if (t.text == ">=") return BinaryOp::Ge;
    return std::nullopt;
  }

  Expr comparison() {
    Expr lhs = additive();
    if (auto op = comparison_op()) {
      SourceLoc loc = next().loc;
      lhs = ex::binary(*op, std::move(lhs), additive());
      lhs.loc = loc;
      if (comparison_op()) throw ParseError{peek().loc, "comparisons do not chain; add parentheses"};
    }
    return lhs;
  }

  Expr additive() {
    Expr lhs = multiplicative();
    while (is_punct("+") || is_punct("-")) {
      const Token& t = next();
      lhs = ex::binary(t.text == "+" ? BinaryOp::Add : BinaryOp::Sub, std::move(lhs), multiplicative());
      lhs.loc = t.loc;
    }
    return lhs;
  }

  Expr multiplicative() {
    Expr lhs = prefix();
    while (is_punct("*")) {
      SourceLoc loc = next().loc;
      lhs = ex::binary(BinaryOp::Mul, std::move(lhs), prefix());
      lhs.loc = loc;
    }
    return lhs;
  }

  Expr prefix() {
    SourceLoc loc = peek().loc;
    if (accept_kw("not")) {
      Expr e = ex::unary(UnaryOp::Not, prefix());
      e.loc = loc;
      return e;
    }
    if (accept("-")) {
      if (peek().kind == TokKind::Int) {
        Expr e = ex::int_lit(-next().value);
        e.loc = loc;
        return e;
      }
      Expr e = ex::unary(UnaryOp::Neg, prefix());
      e.loc = loc;
      return e;
    }
    return primary();
  }

  Expr primary() {
    const Token t = peek();
    if (t.kind == TokKind::Int) {
      next();
      Expr e = ex::int_lit(t.value);
      e.loc = t.loc;
      return e;
    }
    if (t.kind == TokKind::String) {
      next();
      Expr e = ex::str_lit(t.text);
      e.loc = t.loc;
      return e;
    }
    if (accept("(")) {
      Expr e = expr();
      expect(")");
      return e;
    }
    if (t.kind != TokKind::Ident) throw ParseError{t.loc, "expected an expression, found " + describe(t)};
    next();
    Expr e;
    if (t.text == "true" || t.text == "false") {
      e = ex::bool_lit(t.text == "true");
    } else if (t.text == "result" || t.text == "Result") {
      e = ex::result();
      if (t.text == "result") {
        saw_lower_result_ = true;
      } else if (!saw_upper_result_) {
        saw_upper_result_ = true;
        first_upper_result_ = t.loc;
      }
    } else if (t.text == "emptySet") {
      e = ex::empty_set();
    } else if (t.text == "old") {
      expect("(");
      Expr inner = expr();
      expect(")");
      if (contains_result(inner)) throw ParseError{t.loc, "old() cannot be applied to result"};
      e = to_old(inner);
    } else if (t.text == "size") {
      expect("(");
      Expr inner = expr();
      expect(")");
      e = ex::size(std::move(inner));
    } else if (kExprReserved.contains(t.text)) {
      throw ParseError{t.loc, "unexpected operator '" + t.text + "'"};
    } else if (is_punct("(")) {
      e = ex::call(t.text, call_args());
    } else if (is_punct(".") && peek(1).kind == TokKind::Ident) {
      next();
      e = ex::qualified(t.text, next().text);
    } else {
      e = ex::var(t.text);
    }
    if (e.loc.line == 0) e.loc = t.loc;
    return e;
  }

  static bool contains_result(const Expr& e) {
    if (e.kind == ExprKind::Result) return true;
    return std::any_of(e.operands.begin(), e.operands.end(), contains_result);
  }

  // ------------------------------------------------------ duplicate checks

  void check_component_duplicates(const ComponentDef& c) {
    std::set<std::string> names;
    for (const auto* list : {&c.constants, &c.variables}) {
      for (const auto& v : *list) {
        if (!names.insert(v.name).second) {
          error("duplicate-declaration", v.loc, "state item " + v.name + " declared twice");
        }
      }
    }
    std::set<std::string> services;
    for (const auto& s : c.services) {
      if (!services.insert(s.name).second) {
        error("duplicate-declaration", s.loc, "service " + s.name + " declared twice");
      }
    }
  }

  void check_service_duplicates(const ServiceDef& s) {
    std::set<std::string> names;
    for (const auto* list : {&s.params, &s.locals}) {
      for (const auto& p : *list) {
        if (!names.insert(p.name).second) {
          error("duplicate-declaration", p.loc, "name " + p.name + " declared twice in " + s.name);
        }
      }
    }
    for (const auto& v : s.virtual_vars) {
      if (!names.insert(v.name).second) {
        error("duplicate-declaration", v.loc, "name " + v.name + " declared twice in " + s.name);
      }
    }
  }

  void check_assembly(const Assembly& a) {
    std::set<std::string> inst;
    for (const auto& i : a.instances) {
      if (!inst.insert(i.name).second) {
        error("duplicate-declaration", i.loc, "instance " + i.name + " declared twice");
      }
    }
    std::set<std::string> labels;
    for (const auto& l : a.links) {
      if (!labels.insert(l.label).second) {
        error("duplicate-declaration", l.loc, "link @" + l.label + " declared twice");
      }
    }
    for (const auto& l : a.links) {
      for (const auto& s : l.sublinks) {
        if (!labels.contains(s)) {
          error("unknown-sublink", l.loc, "sublink " + s + " of @" + l.label + " is not declared");
        }
      }
    }
  }

  std::string unit_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic> diags_;
  bool saw_lower_result_ = false;
  bool saw_upper_result_ = false;
  SourceLoc first_upper_result_;
};

}  // namespace

UnitKind classify_unit(std::string_view text) {
  std::vector<Diagnostic> ignored;
  auto toks = detail::lex(text, {}, ignored);
  if (!toks.empty() && toks.front().kind == TokKind::Ident &&
      (toks.front().text == "Assembly" || toks.front().text == "ASSEMBLY")) {
    return UnitKind::Assembly;
  }
  return UnitKind::Component;
}

ParseResult<ComponentDef> parse_component(std::string_view text, const std::string& unit) {
  Parser p(text, unit);
  ComponentDef c = p.component();
  return {std::move(c), p.take_diagnostics()};
}

ParseResult<Assembly> parse_assembly(std::string_view text, const std::string& unit) {
  Parser p(text, unit);
  std::string default_name = unit.empty() ? "assembly" : std::filesystem::path(unit).stem().string();
  Assembly a = p.assembly(default_name);
  return {std::move(a), p.take_diagnostics()};
}

ParseResult<Expr> parse_assertion(std::string_view text, const std::string& unit) {
  Parser p(text, unit);
  Expr e = p.standalone_expr();
  return {std::move(e), p.take_diagnostics()};
}

ParseResult<Elts> parse_behavior(std::string_view text, const std::string& unit) {
  Parser p(text, unit);
  Elts b = p.standalone_behavior();
  return {std::move(b), p.take_diagnostics()};
}

ParsedUnits parse_units(const std::vector<SourceUnit>& units, std::vector<Diagnostic>& diags) {
  ParsedUnits out;
  for (const auto& u : units) {
    if (u.kind == UnitKind::Assembly) {
      auto r = parse_assembly(u.text, u.path);
      diags.insert(diags.end(), r.diagnostics.begin(), r.diagnostics.end());
      out.assemblies.push_back(std::move(r.value));
    } else {
      auto r = parse_component(u.text, u.path);
      diags.insert(diags.end(), r.diagnostics.begin(), r.diagnostics.end());
      out.components.push_back(std::move(r.value));
    }
  }
  return out;
}

}  // namespace kmelia
