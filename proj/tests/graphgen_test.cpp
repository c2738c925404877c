#include <gtest/gtest.h>

#include <map>
#include <set>

#include "parplan/graphgen.hpp"
#include "parplan/rng.hpp"

namespace parplan {
namespace {

GenConfig config(std::uint32_t n, Structure s, EdgeRelation e, std::uint64_t seed) {
  GenConfig c;
  c.node_count = n;
  c.structure = s;
  c.edge_relation = e;
  c.seed = seed;
  return c;
}

TEST(RngTest, DeterministicAndInRange) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    auto x = a.uniform(-3, 3);
    EXPECT_EQ(x, b.uniform(-3, 3));
    EXPECT_GE(x, -3);
    EXPECT_LE(x, 3);
  }
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

using Range = std::pair<std::size_t, std::size_t>;

TEST(GraphGenTest, EdgeRanges) {
  EXPECT_EQ(edge_count_range(config(10, Structure::kRandom, EdgeRelation::kLinear, 0)), Range(20, 30));
  EXPECT_EQ(edge_count_range(config(11, Structure::kTreeBased, EdgeRelation::kLinear, 0)), Range(11, 16));
  EXPECT_EQ(edge_count_range(config(10, Structure::kRandom, EdgeRelation::kUniform, 0)), Range(9, 45));
}

TEST(GraphGenTest, GroupSizeCap) {
  for (std::size_t k = 2; k <= 30; ++k) EXPECT_EQ(group_size_cap(k), (2 * k) / 3) << k;
  EXPECT_EQ(group_size_cap(1), 1u);
}

TEST(GraphGenTest, ValidateRejectsBadConfigs) {
  auto c = config(2, Structure::kRandom, EdgeRelation::kLinear, 0);
  EXPECT_THROW(c.validate(), Error);
  c = config(4, Structure::kRandom, EdgeRelation::kLinear, 0);
  EXPECT_THROW(c.validate(), Error);
  c = config(4, Structure::kRandom, EdgeRelation::kUniform, 0);
  EXPECT_NO_THROW(c.validate());
  c = config(10, Structure::kTreeBased, EdgeRelation::kUniform, 0);
  EXPECT_THROW(c.validate(), Error);
  c = config(10, Structure::kRandom, EdgeRelation::kLinear, 0);
  c.time_range = {5, 4};
  EXPECT_THROW(c.validate(), Error);
  EXPECT_THROW(parse_structure("grid"), Error);
  EXPECT_EQ(parse_edge_relation("uniform"), EdgeRelation::kUniform);
}

TEST(GraphGenTest, RandomDagShape) {
  Rng rng(7);
  for (std::uint32_t n : {3u, 5u, 10u, 30u}) {
    for (std::size_t m : {std::size_t{n - 1}, std::min<std::size_t>(n + 3, n * (n - 1) / 2), std::size_t{n * (n - 1) / 2}}) {
      auto dag = gen_random_dag(n, m, rng);
      EXPECT_EQ(dag.edges.size(), m);
      EXPECT_TRUE(dag.is_acyclic());
      EXPECT_TRUE(dag.is_weakly_connected());
      EXPECT_FALSE(dag.has_duplicate_edges());
      EXPECT_EQ(dag.tails().size(), 1u);
    }
  }
  EXPECT_THROW(gen_random_dag(5, 11, rng), Error);
  EXPECT_THROW(gen_random_dag(5, 3, rng), Error);
}

TEST(GraphGenTest, DepthLimitedTree) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    auto t = gen_depth_limited_tree(40, rng);
    ASSERT_EQ(t.parent.size(), 40u);
    EXPECT_EQ(t.depth[0], 0u);
    for (std::size_t v = 1; v < 40; ++v) {
      EXPECT_LE(t.depth[v], 4u);
      EXPECT_EQ(t.depth[v], t.depth[t.parent[v]] + 1);
    }
  }
}

TEST(GraphGenTest, OrientTreeKeepsRootAsOnlySink) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    auto dag = gen_tree_based_dag(20, 10, rng);
    EXPECT_EQ(dag.edges.size(), 29u);
    EXPECT_TRUE(dag.is_acyclic());
    EXPECT_FALSE(dag.has_duplicate_edges());
    EXPECT_EQ(dag.tails().size(), 1u);
    EXPECT_LE(dag.longest_path(), 4u);
  }
}

TEST(GraphGenTest, LongestPathOnChain) {
  PrecedenceDag d;
  for (int i = 1; i <= 4; ++i) d.nodes.push_back(NodeId::from_number(i));
  d.edges = {{0, 1}, {1, 2}, {2, 3}, {0, 3}};
  EXPECT_EQ(d.longest_path(), 3u);
  d.edges.push_back({3, 0});
  EXPECT_FALSE(d.is_acyclic());
}

TEST(GraphGenTest, PartitionProperties) {
  GenConfig cfg;
  Rng rng(5);
  for (std::size_t k = 1; k <= 12; ++k) {
    std::vector<NodeId> preds;
    for (std::size_t i = 1; i <= k; ++i) preds.push_back(NodeId::from_number(i));
    std::set<std::size_t> counts_seen;
    for (int rep = 0; rep < 200; ++rep) {
      auto groups = partition_predecessors(preds, cfg, rng);
      counts_seen.insert(groups.size());
      std::multiset<NodeId> all;
      std::size_t lo = k, hi = 0;
      for (const auto& g : groups) {
        ASSERT_FALSE(g.empty());
        all.insert(g.begin(), g.end());
        lo = std::min(lo, g.size());
        hi = std::max(hi, g.size());
        if (k >= 2) EXPECT_LE(3 * g.size(), 2 * k);
      }
      EXPECT_EQ(std::vector<NodeId>(all.begin(), all.end()), preds);
      EXPECT_LE(hi - lo, 1u);
      EXPECT_LE(groups.size(), std::max<std::size_t>(std::min<std::size_t>(k, 4), 2));
    }
    if (k == 1) EXPECT_EQ(counts_seen, std::set<std::size_t>{1});
    if (k == 2) EXPECT_EQ(counts_seen, std::set<std::size_t>{2});
    if (k == 6) EXPECT_EQ(counts_seen, (std::set<std::size_t>{2, 3, 4}));
  }
}

void check_instance(const GeneratedGraph& gg, const GenConfig& cfg) {
  const auto& dag = gg.dag;
  const auto& g = gg.graph;
  auto [lo, hi] = edge_count_range(cfg);
  EXPECT_GE(dag.edges.size(), lo);
  EXPECT_LE(dag.edges.size(), hi);
  EXPECT_TRUE(dag.is_acyclic());
  EXPECT_TRUE(dag.is_weakly_connected());
  EXPECT_EQ(gg.meta.edge_count, dag.edges.size());
  // Initial sources are exactly the heads; the target is a tail.
  std::set<NodeId> heads;
  for (auto h : dag.heads()) heads.insert(dag.nodes[h]);
  EXPECT_EQ(std::set<NodeId>(g.initial_sources().begin(), g.initial_sources().end()), heads);
  std::set<NodeId> tails;
  for (auto t : dag.tails()) tails.insert(dag.nodes[t]);
  EXPECT_TRUE(tails.count(g.target()));
  // Rules of each node partition its predecessors.
  auto preds = dag.predecessors();
  std::map<NodeId, std::multiset<NodeId>> covered;
  for (const auto& r : g.rules()) {
    EXPECT_EQ(r.cost(), cfg.fixed_cost);
    EXPECT_GE(r.time(), cfg.time_range.lo);
    EXPECT_LE(r.time(), cfg.time_range.hi);
    covered[r.target()].insert(r.sources().begin(), r.sources().end());
  }
  for (std::size_t v = 0; v < dag.size(); ++v) {
    if (preds[v].empty()) continue;
    std::multiset<NodeId> want;
    for (auto u : preds[v]) want.insert(dag.nodes[u]);
    EXPECT_EQ(covered[dag.nodes[v]], want);
  }
  for (std::size_t i = 0; i < g.rules().size(); ++i) EXPECT_EQ(g.rules()[i].id(), i);
}

TEST(GraphGenTest, InstancesSatisfyInvariants) {
  for (auto s : {Structure::kRandom, Structure::kTreeBased}) {
    for (auto e : {EdgeRelation::kLinear, EdgeRelation::kUniform}) {
      if (s == Structure::kTreeBased && e == EdgeRelation::kUniform) continue;
      for (std::uint32_t n : {3u, 4u, 6u, 10u, 25u}) {
        if (n < 5 && s == Structure::kRandom && e == EdgeRelation::kLinear) continue;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
          auto cfg = config(n, s, e, seed);
          auto gg = generate_graph(cfg);
          check_instance(gg, cfg);
          if (s == Structure::kTreeBased) EXPECT_LE(gg.dag.longest_path(), 4u);
        }
      }
    }
  }
}

TEST(GraphGenTest, SameSeedSameGraph) {
  auto cfg = config(20, Structure::kRandom, EdgeRelation::kUniform, 99);
  EXPECT_EQ(generate_graph(cfg).graph, generate_graph(cfg).graph);
  auto other = cfg;
  other.seed = 100;
  EXPECT_FALSE(generate_graph(cfg).graph == generate_graph(other).graph);
}

}  // namespace
}  // namespace parplan
