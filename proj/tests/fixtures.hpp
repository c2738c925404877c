#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parplan/core.hpp"
#include "parplan/prompts.hpp"
#include "parplan/harness.hpp"

namespace parplan::testing {

inline NodeId N(int i) { return NodeId::from_number(static_cast<std::uint64_t>(i)); }

inline std::vector<NodeId> Ns(std::initializer_list<int> ids) {
  std::vector<NodeId> out;
  for (int i : ids) out.push_back(N(i));
  return out;
}

// Five-rule worked example: two ways to N5, the fast one through N4.
inline TaskGraph example_graph() {
  return TaskGraph({Rule(0, Ns({1}), N(2), 3, 1), Rule(1, Ns({6}), N(3), 4, 1), Rule(2, Ns({2, 3}), N(4), 2, 1),
                    Rule(3, Ns({4}), N(5), 1, 1), Rule(4, Ns({2}), N(5), 5, 1)},
                   Ns({1, 6}), N(5));
}

// Nine-rule construction-site example, written out by hand.
inline TaskGraph query_graph() {
  return TaskGraph({Rule(0, Ns({1}), N(2), 3, 1), Rule(1, Ns({3}), N(4), 3, 1), Rule(2, Ns({2}), N(5), 4, 1),
                    Rule(3, Ns({4, 5}), N(6), 2, 1), Rule(4, Ns({2}), N(6), 8, 1), Rule(5, Ns({7}), N(8), 5, 1),
                    Rule(6, Ns({4}), N(8), 1, 1), Rule(7, Ns({6, 8}), N(9), 2, 1), Rule(8, Ns({1}), N(9), 15, 1)},
                   Ns({1, 3, 7}), N(9));
}

inline SubPlan sub(std::string name, std::vector<NodeId> sources, NodeId target, std::vector<std::string> deps) {
  return SubPlan{std::move(name), std::move(sources), std::move(target), std::move(deps)};
}

// The four-step plan printed with the worked example.
inline Plan example_expected_plan() {
  return Plan{{sub("Subtask1", Ns({1}), N(2), {}), sub("Subtask2", Ns({6}), N(3), {}),
               sub("Subtask3", Ns({2, 3}), N(4), {"Subtask1", "Subtask2"}), sub("Subtask4", Ns({4}), N(5), {"Subtask3"})}};
}

// Independent optimum: try every way of picking one producing rule per
// node, evaluate the finish time of the target by recursion and the cost of
// the rules the target actually needs. Minimal plans use one rule per
// node, so this covers every optimum. Rule ids are reported sorted.
struct OracleResult {
  std::int64_t makespan = 0;
  std::int64_t cost = 0;
};

inline std::optional<OracleResult> selection_oracle(const TaskGraph& g) {
  const auto& nodes = g.nodes();
  const auto n = nodes.size();
  std::vector<std::vector<std::size_t>> producers(n);
  for (std::size_t r = 0; r < g.rules().size(); ++r) {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), g.rules()[r].target());
    producers[static_cast<std::size_t>(it - nodes.begin())].push_back(r);
  }
  std::vector<char> initial(n, 0);
  for (const auto& s : g.initial_sources()) {
    initial[static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), s) - nodes.begin())] = 1;
  }
  std::vector<std::size_t> free_nodes;
  for (std::size_t v = 0; v < n; ++v) {
    if (!initial[v] && !producers[v].empty()) free_nodes.push_back(v);
  }
  const auto index = [&](const NodeId& x) {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), x) - nodes.begin());
  };
  const std::size_t target = index(g.target());
  std::vector<std::size_t> choice(n, 0);
  std::optional<OracleResult> best;
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

  while (true) {
    // Evaluate this selection.
    std::vector<std::int64_t> ft(n, -1);  // -1 unknown, kInf unreachable/cyclic
    std::vector<char> visiting(n, 0);
    std::vector<char> used_rule(g.rules().size(), 0);
    auto finish = [&](auto&& self, std::size_t v) -> std::int64_t {
      if (initial[v]) return 0;
      if (producers[v].empty()) return kInf;
      if (ft[v] >= 0) return ft[v];
      if (visiting[v]) return kInf;
      visiting[v] = 1;
      const auto& rule = g.rules()[producers[v][choice[v]]];
      std::int64_t start = 0;
      for (const auto& s : rule.sources()) start = std::max(start, self(self, index(s)));
      visiting[v] = 0;
      ft[v] = start >= kInf ? kInf : start + rule.time();
      return ft[v];
    };
    const auto t = finish(finish, target);
    if (t < kInf) {
      std::vector<std::size_t> stack{target};
      std::vector<char> seen(n, 0);
      std::int64_t cost = 0;
      while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        if (seen[v] || initial[v]) continue;
        seen[v] = 1;
        const auto& rule = g.rules()[producers[v][choice[v]]];
        cost += rule.cost();
        for (const auto& s : rule.sources()) stack.push_back(index(s));
      }
      if (!best || std::pair(t, cost) < std::pair(best->makespan, best->cost)) best = OracleResult{t, cost};
    }
    // Next selection (mixed-radix counter).
    std::size_t k = 0;
    for (; k < free_nodes.size(); ++k) {
      auto v = free_nodes[k];
      if (++choice[v] < producers[v].size()) break;
      choice[v] = 0;
    }
    if (k == free_nodes.size()) break;
  }
  return best;
}

// Scripted endpoint: answers by looking at the prompt.
class FnClient : public ChatClient {
 public:
  using Fn = std::function<std::string(const std::vector<ChatMessage>&)>;
  explicit FnClient(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const std::vector<ChatMessage>& messages) override {
    ++calls;
    return fn_(messages);
  }
  std::atomic<int> calls{0};

 private:
  Fn fn_;
};

}  // namespace parplan::testing
