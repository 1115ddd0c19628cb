#include <doctest.h>

#include <algorithm>

#include "generators.hpp"
#include "kmelia/extract.hpp"
#include "support.hpp"

using namespace kmelia;

namespace {

Action assign(const std::string& target, int v) {
  Action a;
  a.kind = ActionKind::Assign;
  a.target = target;
  a.value = ex::int_lit(v);
  return a;
}

Action named(const std::string& n) {
  Action a;
  a.kind = ActionKind::Call;
  a.service = n;
  return a;
}

SyntaxTree leaf(const std::string& n) { return SyntaxTree::leaf(std::nullopt, named(n)); }

Elts behavior(const std::string& text) {
  auto r = parse_behavior(text);
  REQUIRE_MESSAGE(r.ok(), text);
  return r.value;
}

std::string w(std::initializer_list<const char*> xs) {
  std::string out;
  for (const char* x : xs) out += std::string(out.empty() ? "" : " ") + x;
  return out;
}

std::set<std::string> flatten(const std::set<Word>& words) {
  std::set<std::string> out;
  for (const auto& word : words) {
    std::string s;
    for (const auto& l : word) s += (s.empty() ? "" : " ") + l;
    out.insert(s);
  }
  return out;
}

SyntaxTree random_tree(gen::Rng& r, int depth) {
  if (depth <= 0 || r.coin(0.3)) {
    int k = r.uniform(0, 5);
    if (k == 0) return SyntaxTree::epsilon();
    if (k == 1) return SyntaxTree::empty();
    return SyntaxTree::leaf(std::nullopt, assign("x", r.uniform(0, 2)));
  }
  SyntaxTree t;
  switch (r.uniform(0, 2)) {
    case 0: t.kind = TreeKind::Seq; break;
    case 1: t.kind = TreeKind::Alt; break;
    default:
      t.kind = TreeKind::Star;
      t.children.push_back(random_tree(r, depth - 1));
      return t;
  }
  for (int i = r.uniform(2, 3); i > 0; --i) t.children.push_back(random_tree(r, depth - 1));
  return t;
}

void leaf_labels(const SyntaxTree& t, std::vector<std::string>& out) {
  if (t.kind == TreeKind::Leaf) out.push_back(pretty_print(t.action));
  for (const auto& c : t.children) leaf_labels(c, out);
}

void action_labels(const StructuredBlock& b, std::vector<std::string>& out) {
  if (b.kind == BlockKind::Action) out.push_back(pretty_print(b.action));
  for (const auto& c : b.children) action_labels(c, out);
}

void recursive_names(const StructuredBlock& b, std::vector<std::string>& out) {
  if (b.kind == BlockKind::Recursive) out.push_back(b.name);
  for (const auto& c : b.children) recursive_names(c, out);
}

bool well_shaped(const SyntaxTree& t) {
  if (t.kind == TreeKind::Seq || t.kind == TreeKind::Alt) {
    if (t.children.size() < 2) return false;
    for (const auto& c : t.children)
      if (c.kind == t.kind) return false;
  }
  return std::all_of(t.children.begin(), t.children.end(), well_shaped);
}

}  // namespace

TEST_CASE("single transition") {
  Elts b = behavior("init s0\nfinal {sf}\ntrans { s0 -- call a() --> sf }");
  CHECK(lts_to_regex(b) == leaf("a"));
}

TEST_CASE("loop back to the initial state") {
  Elts b = behavior("init s0\nfinal {s1}\ntrans { s0 -- call a() --> s1 ; s1 -- call b() --> s0 }");
  SyntaxTree t = lts_to_regex(b);
  CHECK(t == SyntaxTree::seq({leaf("a"), SyntaxTree::star(SyntaxTree::seq({leaf("b"), leaf("a")}))}));
  CHECK(to_string(t) == "'call a()' . ('call b()' . 'call a()')*");
  CHECK(flatten(language_sample(t, 5)) ==
        std::set<std::string>{w({"call a()"}), w({"call a()", "call b()", "call a()"}),
                              w({"call a()", "call b()", "call a()", "call b()", "call a()"})});
  CHECK(language_sample(b, 10) == language_sample(t, 10));
}

TEST_CASE("states that cannot reach a final disappear") {
  Elts b = behavior("init s0\nfinal {s1}\ntrans { s0 -- call a() --> s1 ; s0 -- call b() --> s2 ; s2 -- call c() --> s2 }");
  CHECK(lts_to_regex(b) == leaf("a"));
}

TEST_CASE("no final state") {
  Elts b = behavior("init s0\nfinal {}\ntrans { s0 -- call a() --> s0 }");
  std::vector<Diagnostic> warnings;
  CHECK(lts_to_regex(b, &warnings).kind == TreeKind::Empty);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].code == "no-final-state");
}

TEST_CASE("language samples") {
  CHECK(flatten(language_sample(leaf("a"), 3)) == std::set<std::string>{"call a()"});
  CHECK(flatten(language_sample(SyntaxTree::star(leaf("a")), 2)) ==
        std::set<std::string>{"", "call a()", "call a() call a()"});
  CHECK(language_sample(SyntaxTree::empty(), 4).empty());
  CHECK_THROWS_AS(language_sample(SyntaxTree::star(SyntaxTree::alt({leaf("a"), leaf("b")})), 20, 1000),
                  LanguageCapError);
}

TEST_CASE("simplification rules") {
  CHECK(simplify(SyntaxTree::seq({leaf("a"), SyntaxTree::epsilon()})) == leaf("a"));
  CHECK(simplify(SyntaxTree::alt({leaf("a"), SyntaxTree::empty()})) == leaf("a"));
  CHECK(simplify(SyntaxTree::star(SyntaxTree::empty())) == SyntaxTree::epsilon());
  CHECK(simplify(SyntaxTree::star(SyntaxTree::epsilon())) == SyntaxTree::epsilon());
  CHECK(simplify(SyntaxTree::seq({leaf("a"), SyntaxTree::empty()})) == SyntaxTree::empty());
}

TEST_CASE("simplification preserves bounded languages on random trees") {
  gen::Rng rng(8);
  for (int i = 0; i < 300; ++i) {
    SyntaxTree t = random_tree(rng, 4);
    SyntaxTree s = simplify(t);
    CAPTURE(to_string(t));
    CHECK(language_sample(t, 6) == language_sample(s, 6));
    CHECK(well_shaped(s));
  }
}

TEST_CASE("state elimination preserves bounded languages on random behaviors") {
  gen::Rng rng(2026);
  for (int i = 0; i < 150; ++i) {
    Elts b = gen::random_lts(rng, 8, 12, 3);
    SyntaxTree t = lts_to_regex(b);
    CAPTURE(pretty_print(b));
    CHECK(language_sample(b, 10) == language_sample(t, 10));
    CHECK(well_shaped(t));
  }
}

TEST_CASE("elimination order does not change the language") {
  gen::Rng rng(55);
  for (int i = 0; i < 100; ++i) {
    Elts b = gen::random_lts(rng, 6, 10, 3);
    std::vector<std::string> order = b.states;
    std::reverse(order.begin(), order.end());
    CHECK(language_sample(lts_to_regex(b), 8) == language_sample(lts_to_regex(b, order), 8));
  }
}

TEST_CASE("structured translation") {
  StructuredBlock seq = tree_to_structured(SyntaxTree::seq({leaf("a"), leaf("b")}));
  REQUIRE(seq.kind == BlockKind::Sequence);
  REQUIRE(seq.children.size() == 2);
  CHECK(seq.children[0].action == named("a"));

  Expr g = ex::var("g");
  StructuredBlock cond = tree_to_structured(SyntaxTree::alt({SyntaxTree::leaf(g, named("a")), leaf("b")}));
  REQUIRE(cond.kind == BlockKind::Conditional);
  REQUIRE(cond.conditions.size() == 2);
  CHECK(cond.conditions[0].guard == g);
  CHECK(cond.conditions[1].otherwise);
  CHECK_FALSE(cond.children[0].guard);

  StructuredBlock choice = tree_to_structured(SyntaxTree::alt({leaf("a"), leaf("b"), leaf("c")}));
  CHECK(choice.conditions[0].flag == "choice_1");
  CHECK(choice.conditions[1].flag == "choice_2");
  CHECK(choice.conditions[2].otherwise);

  StructuredBlock rec = tree_to_structured(SyntaxTree::star(leaf("a")));
  REQUIRE(rec.kind == BlockKind::Recursive);
  CHECK(rec.name == "loop_1");
  CHECK(rec.children.size() == 1);

  CHECK(tree_to_structured(SyntaxTree::epsilon()).kind == BlockKind::Skip);
  try {
    tree_to_structured(SyntaxTree::empty());
    FAIL("expected ExtractError");
  } catch (const ExtractError& e) {
    CHECK(e.code() == "no-terminating-behavior");
  }
}

TEST_CASE("structured translation keeps every action and names recursions uniquely") {
  gen::Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    SyntaxTree t = simplify(random_tree(rng, 5));
    if (t.kind == TreeKind::Empty) continue;
    StructuredBlock b = tree_to_structured(t);
    std::vector<std::string> a, c;
    leaf_labels(t, a);
    action_labels(b, c);
    std::sort(a.begin(), a.end());
    std::sort(c.begin(), c.end());
    CHECK(a == c);
    std::vector<std::string> names;
    recursive_names(b, names);
    std::set<std::string> unique(names.begin(), names.end());
    CHECK(unique.size() == names.size());
  }
}

TEST_CASE("withdrawal extraction") {
  auto l = support::load_variant("pristine");
  const ComponentDef& c = *l.model.component("ATM_CORE");
  const ServiceDef& s = *c.find_service("withdrawal");
  SyntaxTree t = lts_to_regex(*s.behavior);
  CHECK(language_sample(*s.behavior, 14) == language_sample(t, 14));
  StructuredBlock b = tree_to_structured(t);
  std::vector<std::string> names;
  recursive_names(b, names);
  CHECK(names == std::vector<std::string>{"loop_1"});
  std::string text = render_structured(b, s);
  CHECK(text.starts_with("requires: available_notes >= available_cash\nensures: "));
  CHECK(text.find("def loop_1():") != std::string::npos);
  CHECK(text.find("vc.ask_authorization(card, c)") != std::string::npos);
  CHECK(text == render_structured(tree_to_structured(lts_to_regex(*s.behavior)), s));
}

TEST_CASE("skip rendering") {
  ServiceDef s;
  s.name = "nothing";
  std::string text = render_structured(tree_to_structured(SyntaxTree::epsilon()), s);
  CHECK(text == "requires: true\nensures: true\nskip\n");
}
