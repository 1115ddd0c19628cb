#include "kmelia/behavior.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "compiled.hpp"
#include "kmelia/obligations.hpp"
#include "kmelia/parser.hpp"

namespace kmelia {

using namespace detail;

namespace {

struct Comm {
  int pair = -1;
  bool emit = false;
  const std::string* message = nullptr;
  std::size_t arity = 0;
};

std::optional<Comm> comm_of(const Action& a, const std::vector<ChannelPair>& channels, bool left) {
  if (a.kind != ActionKind::Emit && a.kind != ActionKind::Receive) return std::nullopt;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if ((left ? channels[i].left : channels[i].right) != a.channel) continue;
    Comm c;
    c.pair = static_cast<int>(i);
    c.emit = a.kind == ActionKind::Emit;
    c.message = &a.message;
    c.arity = c.emit ? a.args.size() : a.vars.size();
    return c;
  }
  return std::nullopt;
}

std::vector<std::vector<int>> outgoing(const Elts& b) {
  std::vector<std::vector<int>> out(b.states.size());
  for (std::size_t i = 0; i < b.transitions.size(); ++i) {
    int s = b.state_index(b.transitions[i].source);
    if (s >= 0) out[static_cast<std::size_t>(s)].push_back(static_cast<int>(i));
  }
  return out;
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out;
}

}  // namespace

std::vector<ChannelPair> link_channels(const ResolvedModel& m, const Assembly& a, const AssemblyLink& l) {
  std::vector<ChannelPair> out;
  const std::string& left_inst = l.provided_end().instance;
  const std::string& right_inst = l.required_end().instance;
  out.push_back({l.provided_end().service, l.required_end().service, l.label});
  std::set<std::string> seen{l.label};
  std::vector<std::string> todo(l.sublinks.begin(), l.sublinks.end());
  while (!todo.empty()) {
    std::string label = todo.back();
    todo.pop_back();
    if (!seen.insert(label).second) continue;
    const AssemblyLink* sl = a.find_link(label);
    if (!sl) continue;
    if (sl->end_a.instance == left_inst && sl->end_b.instance == right_inst) {
      out.push_back({sl->end_a.service, sl->end_b.service, sl->label});
    } else if (sl->end_b.instance == left_inst && sl->end_a.instance == right_inst) {
      out.push_back({sl->end_b.service, sl->end_a.service, sl->label});
    }
    todo.insert(todo.end(), sl->sublinks.begin(), sl->sublinks.end());
  }
  (void)m;
  std::sort(out.begin() + 1, out.end(), [](const ChannelPair& x, const ChannelPair& y) { return x.label < y.label; });
  return out;
}

int ProductLts::find(JointState s) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == s) return static_cast<int>(i);
  return -1;
}

std::string ProductLts::state_name(int i) const {
  const JointState& s = states[static_cast<std::size_t>(i)];
  return "(" + left.states[static_cast<std::size_t>(s.left)] + "," + right.states[static_cast<std::size_t>(s.right)] +
         ")";
}

ProductLts product_of(const Elts& left, const Elts& right, const std::vector<ChannelPair>& channels,
                      std::string left_name, std::string right_name) {
  ProductLts p;
  p.left = left;
  p.right = right;
  p.channels = channels;
  p.left_name = std::move(left_name);
  p.right_name = std::move(right_name);
  const int l0 = left.state_index(left.initial);
  const int r0 = right.state_index(right.initial);
  if (l0 < 0 || r0 < 0) return p;

  const auto lout = outgoing(left);
  const auto rout = outgoing(right);
  std::vector<std::optional<Comm>> lcomm;
  std::vector<std::optional<Comm>> rcomm;
  for (const auto& t : left.transitions) lcomm.push_back(comm_of(t.action, channels, true));
  for (const auto& t : right.transitions) rcomm.push_back(comm_of(t.action, channels, false));

  const std::size_t nr = right.states.size();
  std::vector<int> index(left.states.size() * nr, -1);
  auto intern = [&](int l, int r) {
    int& slot = index[static_cast<std::size_t>(l) * nr + static_cast<std::size_t>(r)];
    if (slot < 0) {
      slot = static_cast<int>(p.states.size());
      p.states.push_back({l, r});
    }
    return slot;
  };
  std::set<std::pair<int, int>> mismatched;
  intern(l0, r0);
  for (std::size_t cur = 0; cur < p.states.size(); ++cur) {
    const JointState s = p.states[cur];
    const int from = static_cast<int>(cur);
    bool any = false;
    for (int ti : lout[static_cast<std::size_t>(s.left)]) {
      const Transition& t = left.transitions[static_cast<std::size_t>(ti)];
      const auto& lc = lcomm[static_cast<std::size_t>(ti)];
      if (!lc) {
        int to = intern(left.state_index(t.target), s.right);
        p.transitions.push_back({from, to, StepKind::Left, ti, -1, p.left_name + ": " + label_text(t.guard, t.action)});
        any = true;
        continue;
      }
      for (int ui : rout[static_cast<std::size_t>(s.right)]) {
        const auto& rc = rcomm[static_cast<std::size_t>(ui)];
        if (!rc || rc->pair != lc->pair || rc->emit == lc->emit || *rc->message != *lc->message) continue;
        if (rc->arity != lc->arity && mismatched.insert({ti, ui}).second) p.arity_mismatches.push_back({ti, ui});
        const Transition& u = right.transitions[static_cast<std::size_t>(ui)];
        int to = intern(left.state_index(t.target), right.state_index(u.target));
        p.transitions.push_back(
            {from, to, StepKind::Sync, ti, ui, channels[static_cast<std::size_t>(lc->pair)].label + "." + *lc->message});
        any = true;
      }
    }
    for (int ui : rout[static_cast<std::size_t>(s.right)]) {
      if (rcomm[static_cast<std::size_t>(ui)]) continue;
      const Transition& u = right.transitions[static_cast<std::size_t>(ui)];
      int to = intern(s.left, right.state_index(u.target));
      p.transitions.push_back({from, to, StepKind::Right, -1, ui, p.right_name + ": " + label_text(u.guard, u.action)});
      any = true;
    }
    const bool final = left.is_final(left.states[static_cast<std::size_t>(s.left)]) &&
                       right.is_final(right.states[static_cast<std::size_t>(s.right)]);
    if (final) p.finals.push_back(from);
    if (!any && !final) p.deadlocks.push_back(from);
  }
  return p;
}

ProductBuild build_product(const ResolvedModel& m, const Assembly& a, const AssemblyLink& l) {
  ProductBuild out;
  const ServiceDef* prov = m.endpoint_service(a, l.provided_end());
  const ServiceDef* req = m.endpoint_service(a, l.required_end());
  if (!prov || !req) return out;
  const std::string pname = l.provided_end().instance + "." + prov->name;
  const std::string rname = l.required_end().instance + "." + req->name;
  if (!req->behavior) {
    out.diagnostics.push_back(make_diag(Severity::Warning, Phase::Behavior, "no-behavior", a.unit, l.loc,
                                        "link @" + l.label + ": required service " + rname +
                                            " has no behavior; compatibility not checked"));
    return out;
  }
  if (!prov->behavior) {
    out.diagnostics.push_back(make_diag(Severity::Info, Phase::Behavior, "no-behavior", a.unit, l.loc,
                                        "link @" + l.label + ": provided service " + pname +
                                            " has no behavior; compatibility not checked"));
    return out;
  }
  out.product = product_of(*prov->behavior, *req->behavior, link_channels(m, a, l), l.provided_end().instance,
                           l.required_end().instance);
  out.product->link = l.label;
  return out;
}

std::vector<int> shortest_trace(const ProductLts& p, int target) {
  if (p.states.empty() || target < 0) return {};
  std::vector<std::vector<int>> out(p.states.size());
  for (std::size_t i = 0; i < p.transitions.size(); ++i)
    out[static_cast<std::size_t>(p.transitions[i].from)].push_back(static_cast<int>(i));
  std::vector<int> via(p.states.size(), -2);
  via[0] = -1;
  std::deque<int> q{0};
  while (!q.empty() && via[static_cast<std::size_t>(target)] == -2) {
    int s = q.front();
    q.pop_front();
    for (int ti : out[static_cast<std::size_t>(s)]) {
      int to = p.transitions[static_cast<std::size_t>(ti)].to;
      if (via[static_cast<std::size_t>(to)] != -2) continue;
      via[static_cast<std::size_t>(to)] = ti;
      q.push_back(to);
    }
  }
  std::vector<int> trace;
  if (via[static_cast<std::size_t>(target)] == -2) return trace;
  for (int s = target; via[static_cast<std::size_t>(s)] >= 0;) {
    int ti = via[static_cast<std::size_t>(s)];
    trace.push_back(ti);
    s = p.transitions[static_cast<std::size_t>(ti)].from;
  }
  std::reverse(trace.begin(), trace.end());
  return trace;
}

TraceWitness render_trace(const ProductLts& p, const std::vector<int>& trace) {
  TraceWitness w;
  if (p.states.empty()) return w;
  w.states.push_back(p.state_name(0));
  for (int ti : trace) {
    const auto& t = p.transitions[static_cast<std::size_t>(ti)];
    w.labels.push_back(t.label);
    w.states.push_back(p.state_name(t.to));
  }
  return w;
}

std::vector<Diagnostic> compatibility_diagnostics(const ProductLts& p, const std::string& unit, SourceLoc loc) {
  std::vector<Diagnostic> out;
  const std::string where = p.link.empty() ? std::string("product") : "link @" + p.link;
  for (const auto& mm : p.arity_mismatches) {
    const auto& t = p.left.transitions[static_cast<std::size_t>(mm.left_transition)];
    const auto& u = p.right.transitions[static_cast<std::size_t>(mm.right_transition)];
    out.push_back(make_diag(Severity::Error, Phase::Behavior, "message-arity-mismatch", unit, loc,
                            where + ": " + pretty_print(t.action) + " and " + pretty_print(u.action) +
                                " carry different numbers of values"));
  }
  for (int d : p.deadlocks) {
    auto trace = shortest_trace(p, d);
    auto d_diag = make_diag(Severity::Error, Phase::Behavior, "deadlock", unit, loc,
                            where + ": deadlock in joint state " + p.state_name(d) + " after " +
                                std::to_string(trace.size()) + " step(s)");
    d_diag.counterexample = render_trace(p, trace);
    out.push_back(std::move(d_diag));
  }

  // communication labels that never take part in a synchronization
  std::set<std::pair<int, int>> synced;  // (side, transition)
  std::set<std::tuple<int, int, bool, std::string>> synced_labels;
  for (const auto& t : p.transitions) {
    if (t.kind != StepKind::Sync) continue;
    synced.insert({0, t.left_transition});
    synced.insert({1, t.right_transition});
  }
  auto label_key = [&](int side, int ti) {
    const auto& a = (side == 0 ? p.left : p.right).transitions[static_cast<std::size_t>(ti)].action;
    auto c = comm_of(a, p.channels, side == 0);
    return std::make_tuple(side, c->pair, c->emit, a.message);
  };
  for (const auto& [side, ti] : synced) synced_labels.insert(label_key(side, ti));
  std::set<std::tuple<int, int, bool, std::string>> reported;
  for (int side = 0; side < 2; ++side) {
    const Elts& b = side == 0 ? p.left : p.right;
    const std::string& name = side == 0 ? p.left_name : p.right_name;
    for (std::size_t i = 0; i < b.transitions.size(); ++i) {
      const Action& a = b.transitions[i].action;
      if (!comm_of(a, p.channels, side == 0)) continue;
      auto key = label_key(side, static_cast<int>(i));
      if (synced_labels.contains(key) || !reported.insert(key).second) continue;
      bool emit = a.kind == ActionKind::Emit;
      out.push_back(make_diag(Severity::Warning, Phase::Behavior, emit ? "unmatched-emission" : "unmatched-reception",
                              unit, loc,
                              where + ": " + name + " " + pretty_print(a) + " never synchronizes with the other side"));
    }
  }
  if (!p.states.empty() && p.finals.empty()) {
    out.push_back(make_diag(Severity::Warning, Phase::Behavior, "unreachable-final", unit, loc,
                            where + ": no jointly final state is reachable"));
  }
  return out;
}

std::vector<Diagnostic> check_compatibility(const ResolvedModel& m, const Assembly& a, const AssemblyLink& l) {
  auto built = build_product(m, a, l);
  auto out = std::move(built.diagnostics);
  if (built.product) {
    auto more = compatibility_diagnostics(*built.product, a.unit, l.loc);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

std::vector<Diagnostic> check_assembly_behavior(const ResolvedModel& m, const Assembly& a,
                                                std::vector<ProductLts>* products) {
  std::set<std::string> nested;
  for (const auto& l : a.links) nested.insert(l.sublinks.begin(), l.sublinks.end());
  std::vector<Diagnostic> out;
  for (const auto& l : a.links) {
    if (nested.contains(l.label)) continue;
    auto built = build_product(m, a, l);
    out.insert(out.end(), built.diagnostics.begin(), built.diagnostics.end());
    if (!built.product) continue;
    auto more = compatibility_diagnostics(*built.product, a.unit, l.loc);
    out.insert(out.end(), more.begin(), more.end());
    if (products) products->push_back(std::move(*built.product));
  }
  sort_diagnostics(out);
  return out;
}

std::string to_dot(const Elts& b, const std::string& name) {
  std::ostringstream os;
  os << "digraph \"" << dot_escape(name) << "\" {\n  rankdir=LR;\n  node [shape=circle];\n";
  os << "  __start [shape=point];\n";
  for (const auto& s : b.states) {
    os << "  \"" << dot_escape(s) << "\"";
    if (b.is_final(s)) os << " [shape=doublecircle]";
    os << ";\n";
  }
  os << "  __start -> \"" << dot_escape(b.initial) << "\";\n";
  for (const auto& t : b.transitions) {
    os << "  \"" << dot_escape(t.source) << "\" -> \"" << dot_escape(t.target) << "\" [label=\""
       << dot_escape(label_text(t.guard, t.action)) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string to_dot(const ProductLts& p) {
  std::ostringstream os;
  os << "digraph \"" << dot_escape(p.link.empty() ? "product" : p.link) << "\" {\n  rankdir=LR;\n";
  os << "  node [shape=ellipse];\n  __start [shape=point];\n";
  std::set<int> finals(p.finals.begin(), p.finals.end());
  std::set<int> dead(p.deadlocks.begin(), p.deadlocks.end());
  for (std::size_t i = 0; i < p.states.size(); ++i) {
    int s = static_cast<int>(i);
    os << "  n" << i << " [label=\"" << dot_escape(p.state_name(s)) << "\"";
    if (dead.contains(s)) os << ", shape=octagon, style=filled, fillcolor=\"#f4cccc\"";
    else if (finals.contains(s)) os << ", shape=doublecircle";
    os << "];\n";
  }
  if (!p.states.empty()) os << "  __start -> n0;\n";
  for (const auto& t : p.transitions) {
    os << "  n" << t.from << " -> n" << t.to << " [label=\"" << dot_escape(t.label) << "\"";
    if (t.kind != StepKind::Sync) os << ", style=dashed";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// functional checking

namespace {

struct Slot {
  std::string name;
  DataType type;
};

struct CalleeEffect {
  const ServiceDef* callee = nullptr;
  std::vector<int> written;              // frame slots havocked by the call
  int target = -1;                       // callret target slot
  std::vector<std::optional<Program>> args;  // per callee parameter; nullopt when not evaluable
  std::vector<Program> constraints;      // callee post conjuncts over the call layout
  std::size_t layout_size = 0;
};

struct Step {
  std::optional<Program> guard;  // nullopt: havoc (may be either)
  bool guarded = false;
  std::vector<int> havoc;        // receive vars, opaque assignments, library callrets
  int assign = -1;
  std::optional<Program> value;
  std::optional<CalleeEffect> call;
  int target = -1;
};

class Explorer {
 public:
  Explorer(const ComponentDef& c, const ServiceDef& s, const FunctionalOptions& o) : c_(c), s_(s), o_(o) {}

  FunctionalResult run();

 private:
  std::vector<std::int64_t> domain(const DataType& t) const {
    std::vector<std::int64_t> d;
    switch (t.kind) {
      case TypeKind::Integer:
        for (std::int64_t v = -o_.in_bound; v <= o_.in_bound; ++v) d.push_back(v);
        break;
      case TypeKind::Set:
        for (std::int64_t v = 0; v <= o_.set_bound; ++v) d.push_back(v);
        break;
      case TypeKind::Boolean:
      case TypeKind::Named: d = {0, 1}; break;
      case TypeKind::String:
        for (const auto& [text, id] : strings_) d.push_back(id);
        break;
    }
    return d;
  }

  std::int64_t default_value(const DataType& t) {
    if (t.kind == TypeKind::String) return intern("");
    return 0;
  }

  std::int64_t intern(const std::string& s) {
    auto it = strings_.find(s);
    if (it != strings_.end()) return it->second;
    auto id = static_cast<std::int64_t>(strings_.size());
    strings_.emplace(s, id);
    return id;
  }

  Value to_value(const DataType& t, std::int64_t v) const {
    switch (t.kind) {
      case TypeKind::Integer: return Value::integer(v);
      case TypeKind::Boolean: return Value::boolean(v != 0);
      case TypeKind::Set: return Value::set(v);
      case TypeKind::Named: return Value::opaque(t.name, v);
      case TypeKind::String:
        for (const auto& [text, id] : strings_)
          if (id == v) return Value::string(text);
        return Value::string("");
    }
    return Value::integer(v);
  }

  Expr prep(const Expr& e) const { return fold_constants(e, consts_); }

  std::optional<Program> try_compile(const Expr& e, const std::map<VarKey, int>& slots) {
    try {
      Compiler comp(slots, strings_);
      return comp.compile(prep(e));
    } catch (const std::out_of_range&) {
      return std::nullopt;
    } catch (const EvalError&) {
      return std::nullopt;
    }
  }

  int slot_of(const std::string& name) const {
    std::string n = name == "Result" ? kResultName : name;
    auto it = current_.find(VarKey{n, Frame::Current});
    return it == current_.end() ? -1 : it->second;
  }

  void setup();
  std::optional<CalleeEffect> callee_effect(const Action& a);
  void compute_liveness();
  void explore(int state, std::vector<std::int64_t>& frame, int depth);
  void apply(const Step& st, const std::vector<std::int64_t>& frame, std::vector<std::vector<std::int64_t>>& out);
  void finish_path(PathOutcome outcome, const std::vector<std::int64_t>& frame);
  Valuation frame_valuation(const std::vector<std::int64_t>& frame, bool with_old) const;

  const ComponentDef& c_;
  const ServiceDef& s_;
  FunctionalOptions o_;
  FunctionalResult res_;
  std::map<std::string, Expr> consts_;
  std::map<std::string, std::int64_t> strings_;

  std::vector<Slot> slots_;          // frame layout: state, params, locals, result
  std::size_t n_state_ = 0;          // slots [0, n_state_) are state variables
  std::map<VarKey, int> current_;    // frame keys
  std::map<VarKey, int> post_keys_;  // frame keys plus old state at n + i
  std::vector<std::size_t> local_slots_;
  std::vector<std::int64_t> defaults_;

  std::vector<Step> steps_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> dead_;  // per state: local slots to reset
  std::optional<Program> post_;
  std::vector<Program> admissible_;     // invariant conjuncts and pre

  // per input
  std::vector<std::int64_t> input_;
  std::map<std::vector<std::int64_t>, int> memo_;
  std::vector<int> path_;
  bool reached_final_ = false;
  std::size_t exhausted_ = 0;
  std::vector<std::int64_t> eval_buf_;
};

std::optional<CalleeEffect> Explorer::callee_effect(const Action& a) {
  const ServiceDef* callee = c_.find_service(a.service);
  if (!callee) return std::nullopt;
  CalleeEffect eff;
  eff.callee = callee;
  for (const auto& w : written_variables(c_, *callee)) {
    int sl = slot_of(w);
    if (sl >= 0 && static_cast<std::size_t>(sl) < n_state_) eff.written.push_back(sl);
  }
  if (a.kind == ActionKind::CallRet) eff.target = slot_of(a.target);

  // layout: frame (after the call), old state (before), callee params, result
  const auto n = static_cast<int>(slots_.size());
  std::map<VarKey, int> keys;
  for (const auto& [k, v] : current_)
    if (k.name != kResultName) keys[k] = v;
  for (std::size_t i = 0; i < n_state_; ++i) keys[VarKey{slots_[i].name, Frame::Old}] = n + static_cast<int>(i);
  int base = n + static_cast<int>(n_state_);
  for (std::size_t j = 0; j < callee->params.size(); ++j) {
    std::optional<Program> arg;
    if (j < a.args.size()) arg = try_compile(a.args[j], current_);
    eff.args.push_back(arg);
    keys.erase(VarKey{callee->params[j].name, Frame::Current});
    keys.erase(VarKey{callee->params[j].name, Frame::Old});
    if (arg) {
      keys[VarKey{callee->params[j].name, Frame::Current}] = base + static_cast<int>(j);
      keys[VarKey{callee->params[j].name, Frame::Old}] = base + static_cast<int>(j);
    }
  }
  int rslot = base + static_cast<int>(callee->params.size());
  keys[VarKey{kResultName, Frame::Current}] = rslot;
  eff.layout_size = static_cast<std::size_t>(rslot) + 1;
  for (const auto& part : conjuncts(conjunction(callee->post))) {
    if (auto p = try_compile(part, keys)) eff.constraints.push_back(std::move(*p));
  }
  return eff;
}

void Explorer::setup() {
  consts_ = constant_definitions(c_);
  intern("");
  const Elts& b = *s_.behavior;

  // state variables relevant to this service
  std::set<std::string> state_names;
  for (const auto& v : c_.variables) state_names.insert(v.name);
  std::set<std::string> rel;
  auto note = [&](const Expr& e) {
    for (const auto& k : free_vars(prep(e)))
      if (state_names.contains(k.name)) rel.insert(k.name);
  };
  auto note_name = [&](const std::string& n) {
    if (state_names.contains(n)) rel.insert(n);
  };
  for (const auto& p : s_.pre) note(p.body);
  for (const auto& p : s_.post) note(p.body);
  for (const auto& t : b.transitions) {
    if (t.guard) note(*t.guard);
    for (const auto& a : t.action.args) note(a);
    if (t.action.value) note(*t.action.value);
    for (const auto& v : t.action.vars) note_name(v);
    note_name(t.action.target);
    if (const ServiceDef* callee = c_.find_service(t.action.service)) {
      for (const auto& w : written_variables(c_, *callee)) note_name(w);
      for (const auto& p : callee->post) note(p.body);
    }
  }
  std::vector<Expr> inv;
  for (const auto& p : c_.invariant)
    for (const auto& part : conjuncts(prep(p.body))) inv.push_back(part);
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& e : inv) {
      auto fv = free_vars(e);
      bool touches = std::any_of(fv.begin(), fv.end(), [&](const VarKey& k) { return rel.contains(k.name); });
      if (!touches) continue;
      for (const auto& k : fv)
        if (state_names.contains(k.name) && rel.insert(k.name).second) grew = true;
    }
  }

  for (const auto& v : c_.variables)
    if (rel.contains(v.name)) slots_.push_back({v.name, v.type});
  n_state_ = slots_.size();
  for (const auto& p : s_.params) slots_.push_back({p.name, p.type});
  for (const auto& l : s_.locals) {
    local_slots_.push_back(slots_.size());
    slots_.push_back({l.name, l.type});
  }
  slots_.push_back({kResultName, s_.return_type.value_or(DataType::boolean())});

  for (std::size_t i = 0; i < slots_.size(); ++i) current_[VarKey{slots_[i].name, Frame::Current}] = static_cast<int>(i);
  post_keys_ = current_;
  const auto n = static_cast<int>(slots_.size());
  for (std::size_t i = 0; i < n_state_; ++i) post_keys_[VarKey{slots_[i].name, Frame::Old}] = n + static_cast<int>(i);
  for (std::size_t i = n_state_; i < n_state_ + s_.params.size(); ++i)
    post_keys_[VarKey{slots_[i].name, Frame::Old}] = static_cast<int>(i);

  // literals seed the string domain
  {
    std::vector<std::int64_t> ints;
    std::vector<std::string> strs;
    for (const auto& p : s_.pre) collect_literals(prep(p.body), ints, strs);
    for (const auto& p : s_.post) collect_literals(prep(p.body), ints, strs);
    for (const auto& t : b.transitions) {
      if (t.guard) collect_literals(prep(*t.guard), ints, strs);
      if (t.action.value) collect_literals(prep(*t.action.value), ints, strs);
    }
    std::sort(strs.begin(), strs.end());
    for (const auto& s : strs) intern(s);
  }
  for (const auto& sl : slots_) defaults_.push_back(default_value(sl.type));

  for (const auto& e : inv) {
    auto fv = free_vars(e);
    bool inside = std::all_of(fv.begin(), fv.end(), [&](const VarKey& k) { return current_.contains(k); });
    if (!inside) continue;
    if (auto p = try_compile(e, current_)) admissible_.push_back(std::move(*p));
  }
  for (const auto& p : s_.pre) {
    if (auto prog = try_compile(p.body, current_)) admissible_.push_back(std::move(*prog));
  }
  post_ = try_compile(conjunction(s_.post), post_keys_);

  out_ = outgoing(b);
  for (const auto& t : b.transitions) {
    Step st;
    st.target = b.state_index(t.target);
    if (t.guard) {
      st.guarded = true;
      st.guard = try_compile(*t.guard, current_);
    }
    const Action& a = t.action;
    switch (a.kind) {
      case ActionKind::Emit:
      case ActionKind::Tau: break;
      case ActionKind::Receive:
        for (const auto& v : a.vars)
          if (int sl = slot_of(v); sl >= 0) st.havoc.push_back(sl);
        break;
      case ActionKind::Assign: {
        int sl = slot_of(a.target);
        if (sl < 0 || !a.value) break;
        st.value = try_compile(*a.value, current_);
        if (st.value) st.assign = sl;
        else st.havoc.push_back(sl);
        break;
      }
      case ActionKind::Call:
      case ActionKind::CallRet:
        st.call = callee_effect(a);
        if (!st.call && a.kind == ActionKind::CallRet)
          if (int sl = slot_of(a.target); sl >= 0) st.havoc.push_back(sl);
        break;
    }
    steps_.push_back(std::move(st));
  }
  compute_liveness();
}

void Explorer::compute_liveness() {
  const Elts& b = *s_.behavior;
  std::set<std::string> local_names;
  for (const auto& l : s_.locals) local_names.insert(l.name);
  std::vector<std::set<std::string>> use(b.transitions.size());
  std::vector<std::set<std::string>> def(b.transitions.size());
  auto add = [&](std::set<std::string>& into, const Expr& e) {
    for (const auto& k : free_vars(e))
      if (local_names.contains(k.name)) into.insert(k.name);
  };
  for (std::size_t i = 0; i < b.transitions.size(); ++i) {
    const auto& t = b.transitions[i];
    if (t.guard) add(use[i], *t.guard);
    for (const auto& a : t.action.args) add(use[i], a);
    if (t.action.value) add(use[i], *t.action.value);
    for (const auto& v : t.action.vars)
      if (local_names.contains(v)) def[i].insert(v);
    if (local_names.contains(t.action.target)) def[i].insert(t.action.target);
  }
  std::vector<std::set<std::string>> live(b.states.size());
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < b.transitions.size(); ++i) {
      int src = b.state_index(b.transitions[i].source);
      int dst = b.state_index(b.transitions[i].target);
      if (src < 0 || dst < 0) continue;
      std::set<std::string> in = use[i];
      for (const auto& v : live[static_cast<std::size_t>(dst)])
        if (!def[i].contains(v)) in.insert(v);
      for (const auto& v : in)
        if (live[static_cast<std::size_t>(src)].insert(v).second) changed = true;
    }
  }
  dead_.assign(b.states.size(), {});
  for (std::size_t q = 0; q < b.states.size(); ++q)
    for (std::size_t sl : local_slots_)
      if (!live[q].contains(slots_[sl].name)) dead_[q].push_back(static_cast<int>(sl));
}

Valuation Explorer::frame_valuation(const std::vector<std::int64_t>& frame, bool with_old) const {
  Valuation v;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (i >= n_state_ + s_.params.size() && i + 1 < slots_.size()) continue;  // locals
    if (i + 1 == slots_.size() && !s_.return_type) continue;
    v.set(VarKey{slots_[i].name, Frame::Current}, to_value(slots_[i].type, frame[i]));
  }
  if (with_old) {
    for (std::size_t i = 0; i < n_state_; ++i)
      v.set(VarKey{slots_[i].name, Frame::Old}, to_value(slots_[i].type, input_[i]));
    // parameters are never assigned, so old(p) is p
    for (std::size_t i = n_state_; i < n_state_ + s_.params.size(); ++i)
      v.set(VarKey{slots_[i].name, Frame::Old}, to_value(slots_[i].type, frame[i]));
  }
  return v;
}

void Explorer::finish_path(PathOutcome outcome, const std::vector<std::int64_t>& frame) {
  bool record = res_.paths.size() < o_.max_recorded_paths;
  if (outcome == PathOutcome::PostViolated) {
    ++res_.violations;
    record = record || res_.violations == 1;
  }
  if (!record) return;
  PathResult pr;
  pr.input = frame_valuation(input_, false);
  pr.path = path_;
  pr.terminal = frame_valuation(frame, false);
  pr.post_frame = frame_valuation(frame, true);
  pr.outcome = outcome;
  res_.paths.push_back(std::move(pr));
}

void Explorer::apply(const Step& st, const std::vector<std::int64_t>& frame,
                     std::vector<std::vector<std::int64_t>>& out) {
  std::vector<std::int64_t> base = frame;
  if (st.assign >= 0) base[static_cast<std::size_t>(st.assign)] = st.value->eval(frame.data());

  // havoc plain slots
  std::vector<std::vector<std::int64_t>> frames{base};
  for (int sl : st.havoc) {
    std::vector<std::vector<std::int64_t>> next;
    for (const auto& f : frames)
      for (auto v : domain(slots_[static_cast<std::size_t>(sl)].type)) {
        next.push_back(f);
        next.back()[static_cast<std::size_t>(sl)] = v;
      }
    frames = std::move(next);
  }
  if (!st.call) {
    out.insert(out.end(), frames.begin(), frames.end());
    return;
  }

  const CalleeEffect& eff = *st.call;
  const std::size_t n = slots_.size();
  std::vector<std::int64_t> layout(eff.layout_size, 0);
  for (const auto& f : frames) {
    std::copy(f.begin(), f.end(), layout.begin());
    for (std::size_t i = 0; i < n_state_; ++i) layout[n + i] = f[i];
    for (std::size_t j = 0; j < eff.args.size(); ++j)
      if (eff.args[j]) layout[n + n_state_ + j] = eff.args[j]->eval(f.data());
    std::vector<int> vars = eff.written;
    const std::size_t rslot = eff.layout_size - 1;
    const bool has_result = eff.callee->return_type.has_value();
    std::vector<std::vector<std::int64_t>> doms;
    for (int sl : vars) doms.push_back(domain(slots_[static_cast<std::size_t>(sl)].type));
    if (has_result) doms.push_back(domain(*eff.callee->return_type));
    std::vector<std::size_t> idx(doms.size(), 0);
    if (std::any_of(doms.begin(), doms.end(), [](const auto& d) { return d.empty(); })) continue;
    while (true) {
      for (std::size_t k = 0; k < vars.size(); ++k) layout[static_cast<std::size_t>(vars[k])] = doms[k][idx[k]];
      if (has_result) layout[rslot] = doms.back()[idx.back()];
      bool ok = std::all_of(eff.constraints.begin(), eff.constraints.end(),
                            [&](const Program& p) { return p.eval(layout.data()) != 0; });
      if (ok) {
        std::vector<std::int64_t> g(layout.begin(), layout.begin() + static_cast<std::ptrdiff_t>(n));
        if (eff.target >= 0) g[static_cast<std::size_t>(eff.target)] = has_result ? layout[rslot] : 0;
        out.push_back(std::move(g));
      }
      bool done = true;
      for (std::size_t k = doms.size(); k > 0; --k) {
        if (++idx[k - 1] < doms[k - 1].size()) {
          done = false;
          break;
        }
        idx[k - 1] = 0;
      }
      if (done) break;
    }
  }
}

void Explorer::explore(int state, std::vector<std::int64_t>& frame, int depth) {
  for (int sl : dead_[static_cast<std::size_t>(state)])
    frame[static_cast<std::size_t>(sl)] = defaults_[static_cast<std::size_t>(sl)];
  std::vector<std::int64_t> key = frame;
  key.push_back(state);
  auto [it, fresh] = memo_.emplace(std::move(key), depth);
  if (!fresh) {
    if (it->second >= depth) return;
    it->second = depth;
  }
  const Elts& b = *s_.behavior;
  const auto& outs = out_[static_cast<std::size_t>(state)];
  if (b.is_final(b.states[static_cast<std::size_t>(state)])) {
    reached_final_ = true;
    std::copy(frame.begin(), frame.end(), eval_buf_.begin());
    std::copy(input_.begin(), input_.begin() + static_cast<std::ptrdiff_t>(n_state_),
              eval_buf_.begin() + static_cast<std::ptrdiff_t>(frame.size()));
    bool ok = !post_ || post_->eval(eval_buf_.data()) != 0;
    finish_path(ok ? PathOutcome::PostHolds : PathOutcome::PostViolated, frame);
  }
  if (outs.empty()) return;
  if (depth == 0) {
    ++exhausted_;
    finish_path(PathOutcome::DepthExhausted, frame);
    return;
  }
  for (int ti : outs) {
    const Step& st = steps_[static_cast<std::size_t>(ti)];
    if (st.target < 0) continue;
    if (st.guard && st.guard->eval(frame.data()) == 0) continue;
    std::vector<std::vector<std::int64_t>> next;
    apply(st, frame, next);
    path_.push_back(ti);
    for (auto& f : next) explore(st.target, f, depth - 1);
    path_.pop_back();
  }
}

FunctionalResult Explorer::run() {
  if (!s_.behavior) return res_;
  setup();
  const Elts& b = *s_.behavior;
  const int init = b.state_index(b.initial);
  const std::string what = "service " + c_.name + "." + s_.name;
  if (init < 0) return res_;
  if (!post_) {
    res_.diagnostics.push_back(make_diag(Severity::Warning, Phase::Functional, "post-not-checkable", c_.unit, s_.loc,
                                         what + ": the post-condition refers to names outside the service frame"));
    return res_;
  }

  // inputs: relevant state variables and parameters
  const std::size_t n_in = n_state_ + s_.params.size();
  std::vector<std::vector<std::int64_t>> doms;
  double total = 1;
  for (std::size_t i = 0; i < n_in; ++i) {
    doms.push_back(domain(slots_[i].type));
    total *= static_cast<double>(doms.back().size());
  }
  if (total > static_cast<double>(o_.max_inputs)) {
    res_.diagnostics.push_back(make_diag(Severity::Warning, Phase::Functional, "search-limit", c_.unit, s_.loc,
                                         what + ": " + std::to_string(static_cast<long long>(total)) +
                                             " input valuations exceed the limit; not checked"));
    return res_;
  }
  eval_buf_.assign(slots_.size() + n_state_, 0);
  std::vector<std::size_t> idx(n_in, 0);
  bool any_final = false;
  std::size_t exhausted_total = 0;
  while (true) {
    std::vector<std::int64_t> frame = defaults_;
    for (std::size_t i = 0; i < n_in; ++i) frame[i] = doms[i][idx[i]];
    bool admissible = std::all_of(admissible_.begin(), admissible_.end(),
                                  [&](const Program& p) { return p.eval(frame.data()) != 0; });
    if (admissible) {
      ++res_.inputs;
      input_ = frame;
      memo_.clear();
      path_.clear();
      reached_final_ = false;
      exhausted_ = 0;
      explore(init, frame, o_.depth);
      any_final = any_final || reached_final_;
      exhausted_total += exhausted_;
    }
    bool done = true;
    for (std::size_t k = n_in; k > 0; --k) {
      if (++idx[k - 1] < doms[k - 1].size()) {
        done = false;
        break;
      }
      idx[k - 1] = 0;
    }
    if (done) break;
  }

  if (res_.inputs == 0) {
    res_.diagnostics.push_back(make_diag(Severity::Warning, Phase::Functional, "no-admissible-input", c_.unit, s_.loc,
                                         what + ": no input within bound " + std::to_string(o_.in_bound) +
                                             " satisfies the pre-condition and invariant"));
    return res_;
  }
  if (res_.violations > 0) {
    const PathResult* first = nullptr;
    for (const auto& p : res_.paths)
      if (p.outcome == PathOutcome::PostViolated) {
        first = &p;
        break;
      }
    std::string trail = b.initial;
    for (int ti : first->path) trail += " -> " + b.transitions[static_cast<std::size_t>(ti)].target;
    auto d = make_diag(Severity::Error, Phase::Functional, "post-violation", c_.unit, s_.loc,
                       what + ": post-condition violated on " + std::to_string(res_.violations) +
                           " path(s); first along " + trail);
    d.counterexample = first->post_frame;
    res_.diagnostics.push_back(std::move(d));
  }
  if (exhausted_total > 0) {
    res_.diagnostics.push_back(make_diag(Severity::Warning, Phase::Functional, "depth-exhausted", c_.unit, s_.loc,
                                         what + ": " + std::to_string(exhausted_total) + " path(s) cut at depth " +
                                             std::to_string(o_.depth)));
  }
  if (!any_final) {
    res_.diagnostics.push_back(make_diag(Severity::Warning, Phase::Functional, "no-terminating-path", c_.unit, s_.loc,
                                         what + ": no final state is reachable within depth " +
                                             std::to_string(o_.depth)));
  }
  return res_;
}

}  // namespace

FunctionalResult check_functional(const ComponentDef& c, const ServiceDef& s, const FunctionalOptions& o) {
  Explorer e(c, s, o);
  return e.run();
}

}  // namespace kmelia
