#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "parplan/core.hpp"
#include "parplan/rng.hpp"

namespace parplan {

enum class Structure { kRandom, kTreeBased };
enum class EdgeRelation { kLinear, kUniform };

std::string_view to_string(Structure s);
std::string_view to_string(EdgeRelation r);
Structure parse_structure(std::string_view s);     // "random" | "tree"
EdgeRelation parse_edge_relation(std::string_view s);  // "linear" | "uniform"

struct TimeRange {
  std::int64_t lo = 1;
  std::int64_t hi = 50;
};

struct GenConfig {
  std::uint32_t node_count = 10;
  Structure structure = Structure::kRandom;
  EdgeRelation edge_relation = EdgeRelation::kLinear;
  std::uint64_t seed = 0;
  std::uint32_t max_groups_per_node = 4;
  TimeRange time_range;
  std::int64_t fixed_cost = 1;

  // Throws kInvalidArgument: node_count >= 3 (>= 5 for random + linear,
  // whose 2n edges need that many nodes), uniform edges only on random
  // graphs, positive group cap, non-empty positive time range, cost >= 1.
  void validate() const;
};

// Precedence digraph over nodes[0..n); edges are (predecessor, successor)
// index pairs.
struct PrecedenceDag {
  std::vector<NodeId> nodes;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

  std::size_t size() const noexcept { return nodes.size(); }
  std::vector<std::vector<std::uint32_t>> predecessors() const;
  std::vector<std::uint32_t> heads() const;  // in-degree 0
  std::vector<std::uint32_t> tails() const;  // out-degree 0

  bool is_acyclic() const;
  bool is_weakly_connected() const;
  bool has_duplicate_edges() const;
  // Edges on the longest directed path; requires acyclicity.
  std::size_t longest_path() const;
};

// Random connected DAG with exactly m edges over a uniform random
// topological order: a spanning in-tree toward the last position (each node
// picks a level among the nodes after it, then a node on that level), topped
// up with uniformly chosen order-respecting edges. The last position is the
// only tail. Requires n-1 <= m <= n(n-1)/2.
PrecedenceDag gen_random_dag(std::uint32_t n, std::size_t m, Rng& rng);

// Rooted tree of depth at most `max_depth` (edges child -> parent, so the
// root is the only sink). Each new node picks a depth uniformly among the
// levels that still have headroom, then a uniform parent on that level. parent[0] is the root's own
// index.
struct RootedTree {
  std::vector<std::uint32_t> parent;
  std::vector<std::uint32_t> depth;
};
RootedTree gen_depth_limited_tree(std::uint32_t n, Rng& rng, std::uint32_t max_depth = 4);

// Adds `extra_edges` distinct edges u -> v with depth(v) < depth(u) and v not
// u's parent: ancestral edges when v is an ancestor, cross edges otherwise.
// Every edge points strictly shallower, so the result stays acyclic and the
// root remains the unique sink. Node labels are assigned by a random
// permutation.
PrecedenceDag orient_tree(const RootedTree& tree, std::size_t extra_edges, Rng& rng);

PrecedenceDag gen_tree_based_dag(std::uint32_t n, std::size_t extra_edges, Rng& rng);

// Total edge count for one instance:
//   random + linear  -> [2n, 3n]
//   tree   + linear  -> [n, floor(1.5n)]
//   random + uniform -> [n-1, n(n-1)/2]
std::size_t sample_edge_count(const GenConfig& cfg, Rng& rng);
std::pair<std::size_t, std::size_t> edge_count_range(const GenConfig& cfg);

// Largest admissible group for |preds| = k: floor(2k/3), at least 1.
std::size_t group_size_cap(std::size_t k) noexcept;

// Splits predecessors into near-equal groups (sizes differ by at most one).
// For two or more predecessors no group exceeds two-thirds of them; the
// group count is uniform over the admissible range capped by
// cfg.max_groups_per_node.
std::vector<std::vector<NodeId>> partition_predecessors(std::vector<NodeId> preds, const GenConfig& cfg, Rng& rng);

// Provenance carried alongside every generated or labeled instance.
struct InstanceMeta {
  std::uint32_t node_count = 0;
  std::size_t edge_count = 0;
  Structure structure = Structure::kRandom;
  EdgeRelation edge_relation = EdgeRelation::kLinear;
  std::uint64_t seed = 0;
};

struct GeneratedGraph {
  TaskGraph graph;
  PrecedenceDag dag;
  InstanceMeta meta;
};

// Full synthesis pipeline: DAG, rules from predecessor groups, every head as
// an initial source, a uniformly chosen tail (that is not a head) as target.
// Retries internally and throws kDegenerateGraph when no usable instance
// appears. The seed-only overloads draw from Rng(cfg.seed).
GeneratedGraph generate_graph(const GenConfig& cfg, Rng& rng);
GeneratedGraph generate_graph(const GenConfig& cfg);
TaskGraph build_task_graph(const GenConfig& cfg, Rng& rng);
TaskGraph build_task_graph(const GenConfig& cfg);

}  // namespace parplan
