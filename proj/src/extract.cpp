#include "kmelia/extract.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>

#include "kmelia/parser.hpp"

namespace kmelia {

SyntaxTree SyntaxTree::epsilon() { return {}; }

SyntaxTree SyntaxTree::empty() {
  SyntaxTree t;
  t.kind = TreeKind::Empty;
  return t;
}

SyntaxTree SyntaxTree::leaf(std::optional<Expr> guard, Action action) {
  SyntaxTree t;
  t.kind = TreeKind::Leaf;
  t.guard = std::move(guard);
  t.action = std::move(action);
  return t;
}

SyntaxTree SyntaxTree::seq(std::vector<SyntaxTree> parts) {
  SyntaxTree t;
  t.kind = TreeKind::Seq;
  t.children = std::move(parts);
  return t;
}

SyntaxTree SyntaxTree::alt(std::vector<SyntaxTree> parts) {
  SyntaxTree t;
  t.kind = TreeKind::Alt;
  t.children = std::move(parts);
  return t;
}

SyntaxTree SyntaxTree::star(SyntaxTree body) {
  SyntaxTree t;
  t.kind = TreeKind::Star;
  t.children.push_back(std::move(body));
  return t;
}

namespace {

void print_tree(std::ostream& os, const SyntaxTree& t, int ctx) {
  // ctx: 0 top / alt member, 1 seq member, 2 star operand
  switch (t.kind) {
    case TreeKind::Epsilon: os << "eps"; return;
    case TreeKind::Empty: os << "empty"; return;
    case TreeKind::Leaf: os << "'" << label_text(t.guard, t.action) << "'"; return;
    case TreeKind::Star:
      print_tree(os, t.children[0], 2);
      os << "*";
      return;
    case TreeKind::Seq:
    case TreeKind::Alt: {
      const bool is_seq = t.kind == TreeKind::Seq;
      const bool paren = ctx == 2 || (!is_seq && ctx == 1);
      if (paren) os << "(";
      for (std::size_t i = 0; i < t.children.size(); ++i) {
        if (i) os << (is_seq ? " . " : " | ");
        print_tree(os, t.children[i], is_seq ? 1 : 0);
      }
      if (paren) os << ")";
      return;
    }
  }
}

std::vector<SyntaxTree> items(const SyntaxTree& t) {
  if (t.kind == TreeKind::Seq) return t.children;
  if (t.kind == TreeKind::Epsilon) return {};
  return {t};
}

SyntaxTree factor(std::vector<SyntaxTree> parts);

}  // namespace

std::string to_string(const SyntaxTree& t) {
  std::ostringstream os;
  print_tree(os, t, 0);
  return os.str();
}

SyntaxTree simplify(const SyntaxTree& t) {
  switch (t.kind) {
    case TreeKind::Epsilon:
    case TreeKind::Empty:
    case TreeKind::Leaf: return t;
    case TreeKind::Star: {
      SyntaxTree body = simplify(t.children[0]);
      if (body.kind == TreeKind::Empty || body.kind == TreeKind::Epsilon) return SyntaxTree::epsilon();
      if (body.kind == TreeKind::Star) return body;
      return SyntaxTree::star(std::move(body));
    }
    case TreeKind::Seq: {
      std::vector<SyntaxTree> parts;
      for (const auto& c : t.children) {
        SyntaxTree s = simplify(c);
        if (s.kind == TreeKind::Empty) return SyntaxTree::empty();
        if (s.kind == TreeKind::Epsilon) continue;
        if (s.kind == TreeKind::Seq) {
          for (auto& g : s.children) parts.push_back(std::move(g));
        } else {
          parts.push_back(std::move(s));
        }
      }
      if (parts.empty()) return SyntaxTree::epsilon();
      if (parts.size() == 1) return std::move(parts[0]);
      return SyntaxTree::seq(std::move(parts));
    }
    case TreeKind::Alt: {
      std::vector<SyntaxTree> parts;
      auto add = [&](SyntaxTree s) {
        if (std::find(parts.begin(), parts.end(), s) == parts.end()) parts.push_back(std::move(s));
      };
      for (const auto& c : t.children) {
        SyntaxTree s = simplify(c);
        if (s.kind == TreeKind::Empty) continue;
        if (s.kind == TreeKind::Alt) {
          for (auto& g : s.children) add(std::move(g));
        } else {
          add(std::move(s));
        }
      }
      if (parts.empty()) return SyntaxTree::empty();
      if (parts.size() == 1) return std::move(parts[0]);
      return factor(std::move(parts));
    }
  }
  return t;
}

namespace {

// Pulls the prefix and suffix shared by every branch out of an alternative:
// a.x | a.y -> a.(x | y).
SyntaxTree factor(std::vector<SyntaxTree> parts) {
  std::vector<std::vector<SyntaxTree>> seqs;
  std::size_t shortest = SIZE_MAX;
  for (const auto& p : parts) {
    seqs.push_back(items(p));
    shortest = std::min(shortest, seqs.back().size());
  }
  std::size_t pre = 0;
  while (pre < shortest && std::all_of(seqs.begin(), seqs.end(), [&](const auto& s) { return s[pre] == seqs[0][pre]; }))
    ++pre;
  std::size_t suf = 0;
  while (pre + suf < shortest && std::all_of(seqs.begin(), seqs.end(), [&](const auto& s) {
           return s[s.size() - 1 - suf] == seqs[0][seqs[0].size() - 1 - suf];
         }))
    ++suf;
  if (pre == 0 && suf == 0) return SyntaxTree::alt(std::move(parts));
  std::vector<SyntaxTree> middle;
  for (const auto& s : seqs)
    middle.push_back(SyntaxTree::seq(std::vector<SyntaxTree>(s.begin() + static_cast<std::ptrdiff_t>(pre),
                                                             s.end() - static_cast<std::ptrdiff_t>(suf))));
  std::vector<SyntaxTree> out(seqs[0].begin(), seqs[0].begin() + static_cast<std::ptrdiff_t>(pre));
  out.push_back(SyntaxTree::alt(std::move(middle)));
  out.insert(out.end(), seqs[0].end() - static_cast<std::ptrdiff_t>(suf), seqs[0].end());
  return simplify(SyntaxTree::seq(std::move(out)));
}

}  // namespace

SyntaxTree lts_to_regex(const Elts& b, const std::vector<std::string>& order) {
  const int n = static_cast<int>(b.states.size());
  const int init = b.state_index(b.initial);
  std::vector<int> finals;
  for (const auto& f : b.finals)
    if (int i = b.state_index(f); i >= 0) finals.push_back(i);
  if (init < 0 || finals.empty()) return SyntaxTree::empty();

  std::map<std::pair<int, int>, SyntaxTree> r;
  auto add = [&](int p, int q, SyntaxTree t) {
    auto it = r.find({p, q});
    if (it == r.end()) r.emplace(std::make_pair(p, q), std::move(t));
    else it->second = simplify(SyntaxTree::alt({it->second, std::move(t)}));
  };
  for (const auto& t : b.transitions) {
    int p = b.state_index(t.source);
    int q = b.state_index(t.target);
    if (p >= 0 && q >= 0) add(p, q, SyntaxTree::leaf(t.guard, t.action));
  }
  int final = finals[0];
  if (finals.size() > 1) {
    final = n;
    for (int f : finals) add(f, final, SyntaxTree::epsilon());
  }
  auto get = [&](int p, int q) {
    auto it = r.find({p, q});
    return it == r.end() ? SyntaxTree::empty() : it->second;
  };

  std::vector<int> seq;
  std::vector<bool> queued(static_cast<std::size_t>(n), false);
  for (const auto& name : order) {
    int k = b.state_index(name);
    if (k < 0 || queued[static_cast<std::size_t>(k)]) continue;
    queued[static_cast<std::size_t>(k)] = true;
    seq.push_back(k);
  }
  for (int k = 0; k < n; ++k)
    if (!queued[static_cast<std::size_t>(k)]) seq.push_back(k);

  for (int k : seq) {
    if (k == init || k == final) continue;
    SyntaxTree loop = SyntaxTree::star(get(k, k));
    std::vector<std::pair<int, SyntaxTree>> ins;
    std::vector<std::pair<int, SyntaxTree>> outs;
    for (const auto& [key, t] : r) {
      if (key.second == k && key.first != k) ins.emplace_back(key.first, t);
      if (key.first == k && key.second != k) outs.emplace_back(key.second, t);
    }
    for (const auto& [p, tin] : ins)
      for (const auto& [q, tout] : outs) add(p, q, simplify(SyntaxTree::seq({tin, loop, tout})));
    for (auto it = r.begin(); it != r.end();) {
      if (it->first.first == k || it->first.second == k) it = r.erase(it);
      else ++it;
    }
  }

  if (init == final) return simplify(SyntaxTree::star(get(init, init)));
  SyntaxTree rii = SyntaxTree::star(get(init, init));
  SyntaxTree rif = get(init, final);
  SyntaxTree tail = SyntaxTree::star(
      SyntaxTree::alt({get(final, final), SyntaxTree::seq({get(final, init), rii, rif})}));
  return simplify(SyntaxTree::seq({rii, rif, tail}));
}

SyntaxTree lts_to_regex(const Elts& b, std::vector<Diagnostic>* warnings) {
  if (b.finals.empty() && warnings) {
    warnings->push_back(make_diag(Severity::Warning, Phase::Extract, "no-final-state", {}, b.loc,
                                  "behavior has no final state; its language is empty"));
  }
  return lts_to_regex(b, b.states);
}

namespace {

using IdWord = std::vector<int>;

class Alphabet {
 public:
  int id(const std::string& label) {
    auto [it, fresh] = ids_.emplace(label, static_cast<int>(names_.size()));
    if (fresh) names_.push_back(label);
    return it->second;
  }

  std::set<Word> words(const std::set<IdWord>& in) const {
    std::set<Word> out;
    for (const auto& w : in) {
      Word x;
      for (int i : w) x.push_back(names_[static_cast<std::size_t>(i)]);
      out.insert(std::move(x));
    }
    return out;
  }

 private:
  std::map<std::string, int> ids_;
  std::vector<std::string> names_;
};

void check_cap(std::size_t size, std::size_t cap) {
  if (size > cap) throw LanguageCapError("language sample exceeds " + std::to_string(cap) + " words");
}

std::set<IdWord> concat(const std::set<IdWord>& a, const std::set<IdWord>& b, std::size_t k, std::size_t cap) {
  std::vector<std::vector<const IdWord*>> by_len(k + 1);
  for (const auto& v : b)
    if (v.size() <= k) by_len[v.size()].push_back(&v);
  std::set<IdWord> out;
  for (const auto& u : a) {
    if (u.size() > k) continue;
    for (std::size_t len = 0; len + u.size() <= k; ++len)
      for (const IdWord* v : by_len[len]) {
        IdWord w = u;
        w.insert(w.end(), v->begin(), v->end());
        out.insert(std::move(w));
        check_cap(out.size(), cap);
      }
  }
  return out;
}

std::set<IdWord> tree_words(const SyntaxTree& t, std::size_t k, std::size_t cap, Alphabet& abc) {
  switch (t.kind) {
    case TreeKind::Epsilon: return {IdWord{}};
    case TreeKind::Empty: return {};
    case TreeKind::Leaf: {
      int id = abc.id(label_text(t.guard, t.action));
      if (k == 0) return {};
      return {IdWord{id}};
    }
    case TreeKind::Seq: {
      std::set<IdWord> acc{IdWord{}};
      for (const auto& c : t.children) {
        acc = concat(acc, tree_words(c, k, cap, abc), k, cap);
        if (acc.empty()) break;
      }
      return acc;
    }
    case TreeKind::Alt: {
      std::set<IdWord> acc;
      for (const auto& c : t.children) {
        auto w = tree_words(c, k, cap, abc);
        acc.insert(w.begin(), w.end());
        check_cap(acc.size(), cap);
      }
      return acc;
    }
    case TreeKind::Star: {
      auto body = tree_words(t.children[0], k, cap, abc);
      body.erase(IdWord{});
      std::set<IdWord> acc{IdWord{}};
      std::set<IdWord> frontier{IdWord{}};
      while (!frontier.empty()) {
        std::set<IdWord> next;
        for (auto& w : concat(frontier, body, k, cap))
          if (!acc.contains(w)) next.insert(w);
        acc.insert(next.begin(), next.end());
        check_cap(acc.size(), cap);
        frontier = std::move(next);
      }
      return acc;
    }
  }
  return {};
}

}  // namespace

std::set<Word> language_sample(const SyntaxTree& t, std::size_t k, std::size_t cap) {
  Alphabet abc;
  return abc.words(tree_words(t, k, cap, abc));
}

std::set<Word> language_sample(const Elts& b, std::size_t k, std::size_t cap) {
  Alphabet abc;
  std::vector<int> labels;
  for (const auto& t : b.transitions) labels.push_back(abc.id(label_text(t.guard, t.action)));
  std::vector<std::vector<int>> out(b.states.size());
  for (std::size_t i = 0; i < b.transitions.size(); ++i)
    if (int s = b.state_index(b.transitions[i].source); s >= 0) out[static_cast<std::size_t>(s)].push_back(static_cast<int>(i));

  std::set<IdWord> result;
  const int init = b.state_index(b.initial);
  if (init < 0) return {};
  std::set<std::pair<int, IdWord>> frontier{{init, IdWord{}}};
  for (std::size_t len = 0; !frontier.empty(); ++len) {
    std::set<std::pair<int, IdWord>> next;
    for (const auto& [s, w] : frontier) {
      if (b.is_final(b.states[static_cast<std::size_t>(s)])) {
        result.insert(w);
        check_cap(result.size(), cap);
      }
      if (len == k) continue;
      for (int ti : out[static_cast<std::size_t>(s)]) {
        const auto& t = b.transitions[static_cast<std::size_t>(ti)];
        int q = b.state_index(t.target);
        if (q < 0) continue;
        IdWord x = w;
        x.push_back(labels[static_cast<std::size_t>(ti)]);
        next.emplace(q, std::move(x));
      }
      check_cap(next.size(), cap * 4);
    }
    frontier = std::move(next);
  }
  return abc.words(result);
}

namespace {

class Structurer {
 public:
  StructuredBlock translate(const SyntaxTree& t) {
    StructuredBlock b;
    switch (t.kind) {
      case TreeKind::Epsilon: b.kind = BlockKind::Skip; return b;
      case TreeKind::Empty:
        throw ExtractError("no-terminating-behavior", "the behavior has no terminating path");
      case TreeKind::Leaf:
        b.kind = BlockKind::Action;
        b.action = t.action;
        b.guard = t.guard;
        return b;
      case TreeKind::Seq:
        b.kind = BlockKind::Sequence;
        for (const auto& c : t.children) b.children.push_back(translate(c));
        return b;
      case TreeKind::Alt:
        b.kind = BlockKind::Conditional;
        for (std::size_t i = 0; i < t.children.size(); ++i) {
          SyntaxTree branch = t.children[i];
          BranchCondition cond;
          cond.guard = take_leading_guard(branch);
          if (!cond.guard) {
            if (i + 1 == t.children.size()) cond.otherwise = true;
            else cond.flag = "choice_" + std::to_string(++choices_);
          }
          b.conditions.push_back(std::move(cond));
          b.children.push_back(translate(branch));
        }
        return b;
      case TreeKind::Star: {
        b.kind = BlockKind::Recursive;
        b.name = "loop_" + std::to_string(++loops_);
        SyntaxTree body = t.children[0];
        BranchCondition cond;
        cond.guard = take_leading_guard(body);
        if (!cond.guard) cond.flag = "more_" + std::to_string(++choices_);
        b.conditions.push_back(std::move(cond));
        b.children.push_back(translate(body));
        return b;
      }
    }
    return b;
  }

 private:
  // Removes and returns the guard of the first leaf when it leads the tree.
  static std::optional<Expr> take_leading_guard(SyntaxTree& t) {
    SyntaxTree* head = &t;
    if (head->kind == TreeKind::Seq) head = &head->children.front();
    if (head->kind != TreeKind::Leaf || !head->guard) return std::nullopt;
    auto g = std::move(head->guard);
    head->guard.reset();
    return g;
  }

  int choices_ = 0;
  int loops_ = 0;
};

std::string join_args(const std::vector<Expr>& args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) out += (i ? ", " : "") + pretty_print(args[i]);
  return out;
}

class Renderer {
 public:
  explicit Renderer(const ServiceDef& svc) {
    required_.insert(svc.calrequires.begin(), svc.calrequires.end());
    required_.insert(svc.extrequires.begin(), svc.extrequires.end());
  }

  void render(const StructuredBlock& b, int indent) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    switch (b.kind) {
      case BlockKind::Skip: os_ << pad << "skip\n"; return;
      case BlockKind::Action:
        os_ << pad;
        if (b.guard) os_ << "[" << pretty_print(*b.guard) << "] ";
        os_ << action(b.action) << "\n";
        return;
      case BlockKind::Sequence:
        for (const auto& c : b.children) render(c, indent);
        return;
      case BlockKind::Conditional:
        for (std::size_t i = 0; i < b.children.size(); ++i) {
          const auto& cond = b.conditions[i];
          if (cond.otherwise) os_ << pad << "else:\n";
          else os_ << pad << (i == 0 ? "if " : "elif ") << condition(cond) << ":\n";
          render(b.children[i], indent + 2);
        }
        return;
      case BlockKind::Recursive:
        os_ << pad << "def " << b.name << "():\n";
        os_ << pad << "  if " << condition(b.conditions.front()) << ":\n";
        render(b.children.front(), indent + 4);
        os_ << pad << "    " << b.name << "()\n";
        os_ << pad << b.name << "()\n";
        return;
    }
  }

  std::string str() const { return os_.str(); }

 private:
  static std::string condition(const BranchCondition& c) { return c.guard ? pretty_print(*c.guard) : c.flag; }

  std::string action(const Action& a) const {
    if (a.kind != ActionKind::Call && a.kind != ActionKind::CallRet) return pretty_print(a);
    std::string callee = (required_.contains(a.service) ? "vc." : "") + a.service + "(" + join_args(a.args) + ")";
    return a.kind == ActionKind::Call ? "call " + callee : a.target + " := " + callee;
  }

  std::set<std::string> required_;
  std::ostringstream os_;
};

}  // namespace

StructuredBlock tree_to_structured(const SyntaxTree& t) {
  Structurer s;
  return s.translate(t);
}

std::string render_structured(const StructuredBlock& b, const ServiceDef& svc) {
  Renderer r(svc);
  r.render(b, 0);
  std::string out = "requires: " + pretty_print(conjunction(svc.pre)) + "\n";
  out += "ensures: " + pretty_print(conjunction(svc.post)) + "\n";
  return out + r.str();
}

}  // namespace kmelia
