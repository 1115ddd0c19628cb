#pragma once

// Independent reference implementations the checkers are compared against.

#include <algorithm>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kmelia/assertions.hpp"
#include "kmelia/model.hpp"

namespace oracle {

using namespace kmelia;

/// Explicit product over all |L| x |R| joint states; reachability by BFS
/// afterwards. Channels named in `paired` are shared under the same name on
/// both sides.
struct FullProduct {
  std::set<std::pair<int, int>> reachable;
  std::set<std::pair<int, int>> deadlocks;
};

inline bool is_comm(const Action& a, const std::set<std::string>& paired) {
  return (a.kind == ActionKind::Emit || a.kind == ActionKind::Receive) && paired.contains(a.channel);
}

inline FullProduct full_product(const Elts& l, const Elts& r, const std::set<std::string>& paired) {
  const int nl = static_cast<int>(l.states.size());
  const int nr = static_cast<int>(r.states.size());
  std::vector<std::vector<std::pair<int, int>>> succ(static_cast<std::size_t>(nl * nr));
  auto id = [&](int a, int b) { return static_cast<std::size_t>(a * nr + b); };
  for (int a = 0; a < nl; ++a) {
    for (int b = 0; b < nr; ++b) {
      auto& out = succ[id(a, b)];
      for (const auto& t : l.transitions) {
        if (t.source != l.states[static_cast<std::size_t>(a)]) continue;
        if (!is_comm(t.action, paired)) {
          out.emplace_back(l.state_index(t.target), b);
          continue;
        }
        for (const auto& u : r.transitions) {
          if (u.source != r.states[static_cast<std::size_t>(b)] || !is_comm(u.action, paired)) continue;
          if (u.action.channel == t.action.channel && u.action.message == t.action.message &&
              u.action.kind != t.action.kind)
            out.emplace_back(l.state_index(t.target), r.state_index(u.target));
        }
      }
      for (const auto& u : r.transitions)
        if (u.source == r.states[static_cast<std::size_t>(b)] && !is_comm(u.action, paired))
          out.emplace_back(a, r.state_index(u.target));
    }
  }
  FullProduct fp;
  std::deque<std::pair<int, int>> queue{{l.state_index(l.initial), r.state_index(r.initial)}};
  fp.reachable.insert(queue.front());
  while (!queue.empty()) {
    auto [a, b] = queue.front();
    queue.pop_front();
    for (const auto& n : succ[id(a, b)])
      if (fp.reachable.insert(n).second) queue.push_back(n);
  }
  for (const auto& [a, b] : fp.reachable) {
    bool final = l.is_final(l.states[static_cast<std::size_t>(a)]) && r.is_final(r.states[static_cast<std::size_t>(b)]);
    if (!final && succ[id(a, b)].empty()) fp.deadlocks.insert({a, b});
  }
  return fp;
}

/// First valuation (ascending VarKey order, first key most significant)
/// making `hyp` true and `goal` false, by plain nested enumeration.
inline std::optional<Valuation> first_counterexample(const Expr& hyp, const Expr& goal, Scope scope,
                                                     const Bounds& b) {
  std::sort(scope.begin(), scope.end(), [](const ScopeVar& x, const ScopeVar& y) { return x.key < y.key; });
  std::vector<std::int64_t> ints;
  std::vector<std::string> strs;
  collect_literals(hyp, ints, strs);
  collect_literals(goal, ints, strs);
  std::vector<std::vector<Value>> dom;
  for (const auto& v : scope) dom.push_back(search_domain(v.type, b, ints, strs));
  std::vector<std::size_t> idx(scope.size(), 0);
  for (const auto& d : dom)
    if (d.empty()) return std::nullopt;
  while (true) {
    Valuation val;
    for (std::size_t i = 0; i < scope.size(); ++i) val.set(scope[i].key, dom[i][idx[i]]);
    if (evaluate_bool(hyp, val) && !evaluate_bool(goal, val)) return val;
    std::size_t i = scope.size();
    while (i > 0) {
      --i;
      if (++idx[i] < dom[i].size()) break;
      idx[i] = 0;
      if (i == 0) return std::nullopt;
    }
    if (scope.empty()) return std::nullopt;
  }
}

}  // namespace oracle
