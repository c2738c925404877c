#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "parplan/core.hpp"

namespace parplan {
namespace {

using testing::N;
using testing::Ns;
using testing::sub;

TEST(NodeIdTest, ParsesAndOrdersNumerically) {
  NodeId a("N2"), b("N10");
  EXPECT_LT(a, b);
  EXPECT_EQ(b.number(), 10u);
  EXPECT_EQ(NodeId::from_number(7).str(), "N7");
}

TEST(NodeIdTest, RejectsBadLabels) {
  for (const char* bad : {"", "N", "N0", "N01", "n1", "X3", "N-1", "N1a", "N123456789012345678901"}) {
    EXPECT_FALSE(NodeId::is_valid(bad)) << bad;
    EXPECT_THROW(NodeId{bad}, Error) << bad;
  }
}

TEST(RuleTest, SortsSourcesAndValidates) {
  Rule r(3, Ns({5, 2}), N(7), 4, 1);
  EXPECT_EQ(r.sources(), Ns({2, 5}));
  EXPECT_THROW(Rule(0, {}, N(1), 1, 1), Error);
  EXPECT_THROW(Rule(0, Ns({1, 1}), N(2), 1, 1), Error);
  EXPECT_THROW(Rule(0, Ns({1}), N(1), 1, 1), Error);
  EXPECT_THROW(Rule(0, Ns({1}), N(2), 0, 1), Error);
  EXPECT_THROW(Rule(0, Ns({1}), N(2), 1, 0), Error);
}

TEST(TaskGraphTest, ExampleIndexes) {
  auto g = testing::example_graph();
  EXPECT_EQ(g.node_count(), 6u);
  EXPECT_EQ(g.nodes().front(), N(1));
  EXPECT_EQ(g.matching_rules(Ns({3, 2}), N(4)), std::vector<std::uint32_t>{2});
  EXPECT_TRUE(g.matching_rules(Ns({1}), N(5)).empty());
  // Topological order places every rule source before its target.
  std::vector<std::size_t> pos(g.node_count());
  for (std::size_t i = 0; i < g.topological_order().size(); ++i) pos[g.topological_order()[i]] = i;
  for (const auto& r : g.indexed_rules()) {
    for (auto s : r.sources) EXPECT_LT(pos[s], pos[r.target]);
  }
}

TEST(TaskGraphTest, InvariantViolations) {
  auto expect_code = [](auto&& f, ErrorCode code) {
    try {
      f();
      ADD_FAILURE() << "no throw";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
  };
  // Cycle N2 -> N3 -> N2.
  expect_code([] { TaskGraph({Rule(0, Ns({2}), N(3), 1, 1), Rule(1, Ns({3}), N(2), 1, 1), Rule(2, Ns({1}), N(4), 1, 1)}, Ns({1}), N(4)); },
              ErrorCode::kInvariantViolation);
  // Target not achievable.
  expect_code([] { TaskGraph({Rule(0, Ns({1, 9}), N(2), 1, 1)}, Ns({1}), N(2)); }, ErrorCode::kInvariantViolation);
  // Target is initial.
  expect_code([] { TaskGraph({Rule(0, Ns({1}), N(2), 1, 1)}, Ns({1, 2}), N(2)); }, ErrorCode::kInvariantViolation);
  // Rule producing an initial source.
  expect_code([] { TaskGraph({Rule(0, Ns({1}), N(2), 1, 1), Rule(1, Ns({2}), N(1), 1, 1)}, Ns({1}), N(2)); },
              ErrorCode::kInvariantViolation);
  // Duplicate ids.
  expect_code([] { TaskGraph({Rule(0, Ns({1}), N(2), 1, 1), Rule(0, Ns({1}), N(3), 1, 1)}, Ns({1}), N(2)); },
              ErrorCode::kInvariantViolation);
  expect_code([] { TaskGraph({Rule(0, Ns({1}), N(2), 1, 1)}, {}, N(2)); }, ErrorCode::kInvariantViolation);
}

TEST(PlanStructureTest, ReportsIssues) {
  Plan ok = testing::example_expected_plan();
  EXPECT_TRUE(check_plan_structure(ok).ok());

  Plan dup = ok;
  dup.subtasks[1].name = "Subtask1";
  EXPECT_TRUE(check_plan_structure(dup).has(StructureIssue::kDuplicateName));

  Plan unknown = ok;
  unknown.subtasks[3].dependencies = {"Nope"};
  EXPECT_TRUE(check_plan_structure(unknown).has(StructureIssue::kUnknownDependency));

  Plan cyc = ok;
  cyc.subtasks[0].dependencies = {"Subtask4"};
  EXPECT_TRUE(check_plan_structure(cyc).has(StructureIssue::kCyclicDependencies));

  Plan self = ok;
  self.subtasks[0].dependencies = {"Subtask1"};
  EXPECT_TRUE(check_plan_structure(self).has(StructureIssue::kCyclicDependencies));

  Plan empty_src = ok;
  empty_src.subtasks[0].sources.clear();
  EXPECT_TRUE(check_plan_structure(empty_src).has(StructureIssue::kEmptySource));

  Plan twice = ok;
  twice.subtasks[2].dependencies = {"Subtask1", "Subtask1"};
  EXPECT_TRUE(check_plan_structure(twice).has(StructureIssue::kDuplicateDependency));
}

TEST(SimulateTest, WorkedExampleEndTimes) {
  auto r = simulate(testing::example_graph(), testing::example_expected_plan());
  // Hand schedule: 3, 4 in parallel; then max(3,4)+2; then +1.
  EXPECT_EQ(r.end_times.at("Subtask1"), 3);
  EXPECT_EQ(r.end_times.at("Subtask2"), 4);
  EXPECT_EQ(r.end_times.at("Subtask3"), 6);
  EXPECT_EQ(r.end_times.at("Subtask4"), 7);
  EXPECT_EQ(r.makespan, 7);
  EXPECT_EQ(r.total_cost, 4);
  EXPECT_EQ(r.duration_sum, 10);
}

TEST(SimulateTest, ParallelBranchesThenJoin) {
  // Two 5-unit branches in parallel, then a 2-unit join.
  TaskGraph g({Rule(0, Ns({1}), N(2), 5, 1), Rule(1, Ns({1}), N(3), 5, 1), Rule(2, Ns({2, 3}), N(4), 2, 1)}, Ns({1}),
              N(4));
  Plan p{{sub("A", Ns({1}), N(2), {}), sub("B", Ns({1}), N(3), {}), sub("C", Ns({2, 3}), N(4), {"A", "B"})}};
  auto r = simulate(g, p);
  EXPECT_EQ(r.makespan, 7);
  EXPECT_EQ(r.duration_sum, 12);
}

TEST(SimulateTest, StartsOnlyAfterListedDependencies) {
  // An extra dependency delays a sub-plan even if its sources are ready.
  auto g = testing::example_graph();
  Plan p{{sub("S1", Ns({1}), N(2), {}), sub("S2", Ns({6}), N(3), {}), sub("S3", Ns({2}), N(5), {"S1", "S2"})}};
  EXPECT_EQ(simulate(g, p).makespan, 9);
}

TEST(SimulateTest, Errors) {
  auto g = testing::example_graph();
  Plan bad_rule{{sub("S1", Ns({1}), N(5), {})}};
  try {
    simulate(g, bad_rule);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnmatchedRule);
  }
  Plan cyc{{sub("S1", Ns({1}), N(2), {"S1"})}};
  try {
    simulate(g, cyc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedPlan);
  }
}

TEST(PlanValueTest, Lexicographic) {
  EXPECT_LT((PlanValue{7, 9}), (PlanValue{8, 1}));
  EXPECT_LT((PlanValue{7, 3}), (PlanValue{7, 4}));
  EXPECT_EQ(compare_plans({7, 4}, {7, 4}), std::strong_ordering::equal);
}

}  // namespace
}  // namespace parplan
