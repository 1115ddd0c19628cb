#include <doctest.h>

#include <deque>
#include <map>

#include "generators.hpp"
#include "kmelia/behavior.hpp"
#include "kmelia/obligations.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace kmelia;

namespace {

Elts behavior(const std::string& text) {
  auto r = parse_behavior(text);
  REQUIRE_MESSAGE(r.ok(), text);
  return r.value;
}

const std::vector<ChannelPair> kPaired{{"c0", "c0", "c0"}, {"c1", "c1", "c1"}};

std::set<std::pair<int, int>> deadlock_set(const ProductLts& p) {
  std::set<std::pair<int, int>> out;
  for (int d : p.deadlocks) out.insert({p.states[static_cast<std::size_t>(d)].left, p.states[static_cast<std::size_t>(d)].right});
  return out;
}

// BFS distances over joint states, independent of shortest_trace.
std::vector<int> distances(const ProductLts& p) {
  std::vector<int> dist(p.states.size(), -1);
  dist[0] = 0;
  std::deque<int> q{0};
  while (!q.empty()) {
    int s = q.front();
    q.pop_front();
    for (const auto& t : p.transitions)
      if (t.from == s && dist[static_cast<std::size_t>(t.to)] < 0) {
        dist[static_cast<std::size_t>(t.to)] = dist[static_cast<std::size_t>(s)] + 1;
        q.push_back(t.to);
      }
  }
  return dist;
}

void check_projection(const ProductLts& p) {
  for (const auto& t : p.transitions) {
    const JointState& a = p.states[static_cast<std::size_t>(t.from)];
    const JointState& b = p.states[static_cast<std::size_t>(t.to)];
    if (t.left_transition < 0) {
      CHECK(a.left == b.left);
    } else {
      const Transition& lt = p.left.transitions[static_cast<std::size_t>(t.left_transition)];
      CHECK(p.left.state_index(lt.source) == a.left);
      CHECK(p.left.state_index(lt.target) == b.left);
    }
    if (t.right_transition < 0) {
      CHECK(a.right == b.right);
    } else {
      const Transition& rt = p.right.transitions[static_cast<std::size_t>(t.right_transition)];
      CHECK(p.right.state_index(rt.source) == a.right);
      CHECK(p.right.state_index(rt.target) == b.right);
    }
    CHECK((t.kind == StepKind::Sync) == (t.left_transition >= 0 && t.right_transition >= 0));
  }
}

void check_trace_replay(const ProductLts& p) {
  auto dist = distances(p);
  for (int d : p.deadlocks) {
    auto trace = shortest_trace(p, d);
    int at = 0;
    for (int ti : trace) {
      const JointTransition& t = p.transitions[static_cast<std::size_t>(ti)];
      REQUIRE(t.from == at);
      at = t.to;
    }
    CHECK(at == d);
    CHECK(static_cast<int>(trace.size()) == dist[static_cast<std::size_t>(d)]);
    TraceWitness w = render_trace(p, trace);
    CHECK(w.states.size() == trace.size() + 1);
    CHECK(w.states.back() == p.state_name(d));
  }
}

int count_label(const TraceWitness& w, const std::string& needle) {
  int n = 0;
  for (const auto& l : w.labels) n += l.find(needle) != std::string::npos;
  return n;
}

const Diagnostic* first(const std::vector<Diagnostic>& ds, const std::string& code) {
  for (const auto& d : ds)
    if (d.code == code) return &d;
  return nullptr;
}

FunctionalResult functional(const std::string& variant, const std::string& svc, int in_bound = 16) {
  auto l = support::load_variant(variant);
  const ComponentDef& c = *l.model.component("ATM_CORE");
  FunctionalOptions o;
  o.in_bound = in_bound;
  return check_functional(c, *c.find_service(svc), o);
}

}  // namespace

TEST_CASE("two single-tau services interleave without deadlock") {
  Elts t = behavior("init a\nfinal {b}\ntrans { a -- tau --> b }");
  ProductLts p = product_of(t, t, {});
  CHECK(p.states.size() == 4);
  CHECK(p.finals.size() == 1);
  CHECK(p.deadlocks.empty());
  check_projection(p);
}

TEST_CASE("receiver loop against a single emission deadlocks on the second pass") {
  Elts recv = behavior("init r0\nfinal {r1}\ntrans { r0 -- c?m() --> r1 ; r1 -- c?m() --> r1 }");
  Elts once = behavior("init e0\nfinal {e1}\ntrans { e0 -- c!m() --> e1 }");
  Elts loop = behavior("init e0\nfinal {e0}\ntrans { e0 -- c!m() --> e0 }");
  Elts loop2 = behavior("init x0\nfinal {x2}\ntrans { x0 -- c?m() --> x1 ; x1 -- c?m() --> x2 }");
  std::vector<ChannelPair> ch{{"c", "c", "c"}};

  // Receiver requires two messages, sender sends one and stops.
  ProductLts p = product_of(loop2, once, ch);
  REQUIRE(p.deadlocks.size() == 1);
  auto w = render_trace(p, shortest_trace(p, p.deadlocks[0]));
  CHECK(w.labels == std::vector<std::string>{"c.m"});
  CHECK(w.states.back() == "(x1,e1)");

  // Jointly final after one exchange: no deadlock.
  CHECK(product_of(recv, once, ch).deadlocks.empty());
  // Corrected sender loops its emission.
  CHECK(product_of(loop2, loop, ch).deadlocks.empty());
}

TEST_CASE("non-communicating services reach their finals") {
  Elts a = behavior("init a0\nfinal {a2}\ntrans { a0 -- tau --> a1 ; a1 -- x := 1 --> a2 }");
  Elts b = behavior("init b0\nfinal {b1}\ntrans { b0 -- call log(2) --> b1 }");
  ProductLts p = product_of(a, b, kPaired);
  CHECK(p.deadlocks.empty());
  CHECK(p.finals.size() == 1);
  CHECK(compatibility_diagnostics(p, "u", {}).empty());
}

TEST_CASE("unmatched communications and arity mismatches") {
  Elts a = behavior("init a0\nfinal {a1}\ntrans { a0 -- c0!m0(1, 2) --> a1 ; a0 -- c1!m1() --> a1 }");
  Elts b = behavior("init b0\nfinal {b1}\ntrans { b0 -- c0?m0(v) --> b1 }");
  ProductLts p = product_of(a, b, kPaired);
  auto ds = compatibility_diagnostics(p, "u", {});
  CHECK(first(ds, "unmatched-emission"));
  CHECK(first(ds, "message-arity-mismatch"));
  CHECK(first(ds, "message-arity-mismatch")->severity == Severity::Error);
  CHECK(p.arity_mismatches.size() == 1);
  CHECK(p.deadlocks.empty());
}

TEST_CASE("no reachable joint final") {
  Elts a = behavior("init a0\nfinal {a1}\ntrans { a0 -- c0!m0() --> a0 }");
  Elts b = behavior("init b0\nfinal {b1}\ntrans { b0 -- c0?m0() --> b0 }");
  auto ds = compatibility_diagnostics(product_of(a, b, kPaired), "u", {});
  CHECK(first(ds, "unreachable-final"));
  CHECK_FALSE(first(ds, "deadlock"));
}

TEST_CASE("deadlock verdicts agree with the explicit full product on random pairs") {
  gen::Rng rng(4242);
  int with_deadlock = 0;
  for (int i = 0; i < 300; ++i) {
    Elts l = gen::random_peer(rng, 5, 8);
    Elts r = gen::random_peer(rng, 5, 8);
    ProductLts p = product_of(l, r, kPaired);
    auto fp = oracle::full_product(l, r, {"c0", "c1"});
    CHECK(p.states.size() == fp.reachable.size());
    CHECK(deadlock_set(p) == fp.deadlocks);
    with_deadlock += !fp.deadlocks.empty();
    check_projection(p);
    check_trace_replay(p);
  }
  CHECK(with_deadlock > 20);
}

TEST_CASE("ATM lwith product") {
  auto l = support::load_variant("pristine");
  const Assembly& a = l.model.assemblies().at("ATM_SYSTEM");
  auto build = build_product(l.model, a, *a.find_link("lwith"));
  REQUIRE(build.product);
  const ProductLts& p = *build.product;
  CHECK(p.states.size() < 200);
  CHECK(p.deadlocks.empty());
  CHECK(p.channels.size() == 3);

  // Rename the requirer's channels to the provider's names and compare
  // with the explicit product.
  Elts right = p.right;
  std::set<std::string> paired;
  for (auto& t : right.transitions)
    for (const auto& c : p.channels)
      if (t.action.channel == c.right && (t.action.kind == ActionKind::Emit || t.action.kind == ActionKind::Receive)) {
        t.action.channel = c.left;
        break;
      }
  for (const auto& c : p.channels) paired.insert(c.left);
  auto fp = oracle::full_product(p.left, right, paired);
  CHECK(p.states.size() == fp.reachable.size());
  CHECK(fp.deadlocks.empty());
  check_projection(p);
}

TEST_CASE("loop mutant deadlocks with the blocked second request") {
  auto l = support::load_variant("mut-loop-recv");
  const Assembly& a = l.model.assemblies().at("ATM_SYSTEM");
  auto ds = check_compatibility(l.model, a, *a.find_link("lwith"));
  const Diagnostic* d = first(ds, "deadlock");
  REQUIRE(d);
  REQUIRE(d->counterexample);
  const auto& w = std::get<TraceWitness>(*d->counterexample);
  CHECK(count_label(w, "lamount.") >= 2);
  CHECK(w.states.back() == "(s4,u4)");

  auto clean = support::load_variant("pristine");
  const Assembly& ca = clean.model.assemblies().at("ATM_SYSTEM");
  CHECK_FALSE(first(check_compatibility(clean.model, ca, *ca.find_link("lwith")), "deadlock"));
}

TEST_CASE("links without a requirer behavior are skipped with a warning") {
  auto l = support::load_variant("pristine");
  const Assembly& a = l.model.assemblies().at("ATM_SYSTEM");
  std::vector<ProductLts> products;
  auto ds = check_assembly_behavior(l.model, a, &products);
  CHECK(products.size() == 1);
  CHECK(support::with_code(ds, "no-behavior").size() == 2);
  CHECK_FALSE(has_errors(ds));
}

TEST_CASE("DOT rendering") {
  Elts a = behavior("init a0\nfinal {a1}\ntrans { a0 -- c0!m0() --> a1 }");
  Elts b = behavior("init b0\nfinal {b2}\ntrans { b0 -- c0?m0() --> b1 }");
  ProductLts p = product_of(a, b, kPaired);
  std::string dot = to_dot(p);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("(a1,b1)") != std::string::npos);
  CHECK(dot.find("c0.m0") != std::string::npos);
  CHECK(dot.find("octagon") != std::string::npos);
  CHECK(to_dot(a, "A").find("c0!m0()") != std::string::npos);
}

TEST_CASE("functional: addition instead of subtraction violates the post") {
  auto r = functional("mut-add-amount", "withdrawal");
  CHECK(r.violations >= 1);
  const Diagnostic* d = first(r.diagnostics, "post-violation");
  REQUIRE(d);
  CHECK(d->severity == Severity::Error);
  REQUIRE(d->counterexample);
  const auto& v = std::get<Valuation>(*d->counterexample);
  CHECK(v.at({"available_notes", Frame::Current}).number > v.at({"available_notes", Frame::Old}).number);
}

TEST_CASE("functional: corpus services hold at bound 16, depth 40") {
  for (const char* svc : {"withdrawal", "deposit", "account_query"}) {
    auto r = functional("pristine", svc);
    CAPTURE(svc);
    CHECK(r.violations == 0);
    CHECK(r.inputs > 0);
    CHECK_FALSE(has_errors(r.diagnostics));
  }
}

TEST_CASE("functional: reported violations re-evaluate to false") {
  auto l = support::load_variant("mut-add-amount");
  const ComponentDef& c = *l.model.component("ATM_CORE");
  const ServiceDef& s = *c.find_service("withdrawal");
  auto r = check_functional(c, s, FunctionalOptions{});
  Expr post = fold_constants(conjunction(s.post), constant_definitions(c));
  int seen = 0;
  for (const auto& p : r.paths) {
    if (p.outcome != PathOutcome::PostViolated) continue;
    ++seen;
    CHECK_FALSE(evaluate_bool(post, p.post_frame));
    CHECK(s.behavior->is_final(s.behavior->transitions[static_cast<std::size_t>(p.path.back())].target));
  }
  CHECK(seen > 0);
}

TEST_CASE("functional: random services, violations are genuine") {
  gen::Rng rng(77);
  int violations = 0;
  for (int i = 0; i < 60; ++i) {
    ComponentDef c;
    c.name = "F";
    c.variables = {{"x", DataType::integer(), false, false, std::nullopt, {}}};
    ServiceDef s;
    s.name = "f";
    s.params = {{"a", DataType::integer(), {}}};
    gen::ExprVars v{{"x", "a"}, {}, {}, false, false, false};
    Elts b = gen::random_lts(rng, 4, 6, 3);
    for (auto& t : b.transitions) {
      t.action.value = gen::int_expr(rng, v, 1);
      if (rng.coin(0.3)) t.guard = gen::bool_expr(rng, v, 1);
    }
    s.behavior = b;
    gen::ExprVars post{{"x", "a"}, {}, {}, true, false, false};
    s.post = {{"", false, gen::bool_expr(rng, post, 2), {}}};
    c.provided = {"f"};
    c.services = {s};
    FunctionalOptions o;
    o.in_bound = 3;
    o.depth = 8;
    auto r = check_functional(c, s, o);
    for (const auto& p : r.paths) {
      if (p.outcome != PathOutcome::PostViolated) continue;
      ++violations;
      CHECK_FALSE(evaluate_bool(s.post[0].body, p.post_frame));
      CHECK(p.input.at({"x", Frame::Current}) == p.post_frame.at({"x", Frame::Old}));
    }
  }
  CHECK(violations > 0);
}

TEST_CASE("functional: every unguarded branch is explored") {
  ComponentDef c;
  c.name = "B";
  c.variables = {{"x", DataType::integer(), false, false, std::nullopt, {}}};
  ServiceDef s;
  s.name = "choose";
  s.behavior = behavior("init q0\nfinal {qf}\ntrans { q0 -- x := 1 --> qf ; q0 -- x := 2 --> qf }");
  s.post = {{"", false, ex::binary(BinaryOp::Eq, ex::var("x"), ex::int_lit(1)), {}}};
  c.provided = {"choose"};
  c.services = {s};
  FunctionalOptions o;
  o.in_bound = 1;
  auto r = check_functional(c, s, o);
  std::set<int> first_steps;
  for (const auto& p : r.paths) first_steps.insert(p.path.front());
  CHECK(first_steps == std::set<int>{0, 1});
  CHECK(r.violations == r.inputs);
}

TEST_CASE("functional: trivial behavior and depth exhaustion") {
  ComponentDef c;
  c.name = "T";
  ServiceDef s;
  s.name = "t";
  s.behavior = behavior("init a\nfinal {b}\ntrans { a -- tau --> b }");
  c.provided = {"t"};
  c.services = {s};
  auto r = check_functional(c, s, FunctionalOptions{});
  CHECK(r.violations == 0);
  CHECK(r.diagnostics.empty());

  s.behavior = behavior("init a\nfinal {b}\ntrans { a -- tau --> a }");
  c.services = {s};
  auto loop = check_functional(c, s, FunctionalOptions{});
  CHECK(first(loop.diagnostics, "no-terminating-path"));
}
