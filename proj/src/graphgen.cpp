#include "parplan/graphgen.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace parplan {

std::string_view to_string(Structure s) { return s == Structure::kRandom ? "random" : "tree"; }
std::string_view to_string(EdgeRelation r) { return r == EdgeRelation::kLinear ? "linear" : "uniform"; }

Structure parse_structure(std::string_view s) {
  if (s == "random") return Structure::kRandom;
  if (s == "tree" || s == "tree-based" || s == "tree_based") return Structure::kTreeBased;
  throw Error(ErrorCode::kInvalidArgument, "unknown graph structure '" + std::string(s) + "'");
}

EdgeRelation parse_edge_relation(std::string_view s) {
  if (s == "linear") return EdgeRelation::kLinear;
  if (s == "uniform") return EdgeRelation::kUniform;
  throw Error(ErrorCode::kInvalidArgument, "unknown edge relation '" + std::string(s) + "'");
}

void GenConfig::validate() const {
  if (node_count < 3) throw Error(ErrorCode::kInvalidArgument, "node_count must be >= 3");
  if (structure == Structure::kRandom && edge_relation == EdgeRelation::kLinear && node_count < 5) {
    throw Error(ErrorCode::kInvalidArgument, "random graphs with linear edges need node_count >= 5");
  }
  if (edge_relation == EdgeRelation::kUniform && structure != Structure::kRandom) {
    throw Error(ErrorCode::kInvalidArgument, "uniform edge relation requires the random structure");
  }
  if (max_groups_per_node < 1) throw Error(ErrorCode::kInvalidArgument, "max_groups_per_node must be >= 1");
  if (time_range.lo < 1 || time_range.hi < time_range.lo) {
    throw Error(ErrorCode::kInvalidArgument, "time_range must be a non-empty range of positive integers");
  }
  if (fixed_cost < 1) throw Error(ErrorCode::kInvalidArgument, "fixed_cost must be >= 1");
}

// ---------------------------------------------------------------------------
// PrecedenceDag

std::vector<std::vector<std::uint32_t>> PrecedenceDag::predecessors() const {
  std::vector<std::vector<std::uint32_t>> preds(size());
  for (auto [u, v] : edges) preds[v].push_back(u);
  return preds;
}

std::vector<std::uint32_t> PrecedenceDag::heads() const {
  std::vector<char> has_in(size(), 0);
  for (auto e : edges) has_in[e.second] = 1;
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < size(); ++v) {
    if (!has_in[v]) out.push_back(v);
  }
  return out;
}

std::vector<std::uint32_t> PrecedenceDag::tails() const {
  std::vector<char> has_out(size(), 0);
  for (auto e : edges) has_out[e.first] = 1;
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < size(); ++v) {
    if (!has_out[v]) out.push_back(v);
  }
  return out;
}

namespace {

// Kahn order, or fewer than size() entries when a cycle exists.
std::vector<std::uint32_t> topo(const PrecedenceDag& dag) {
  std::vector<std::vector<std::uint32_t>> succ(dag.size());
  std::vector<std::uint32_t> indeg(dag.size(), 0);
  for (auto [u, v] : dag.edges) {
    succ[u].push_back(v);
    ++indeg[v];
  }
  std::vector<std::uint32_t> stack, order;
  for (std::uint32_t v = 0; v < dag.size(); ++v) {
    if (indeg[v] == 0) stack.push_back(v);
  }
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (auto w : succ[v]) {
      if (--indeg[w] == 0) stack.push_back(w);
    }
  }
  return order;
}

}  // namespace

bool PrecedenceDag::is_acyclic() const {
  for (auto [u, v] : edges) {
    if (u == v) return false;
  }
  return topo(*this).size() == size();
}

bool PrecedenceDag::is_weakly_connected() const {
  if (nodes.empty()) return true;
  std::vector<std::uint32_t> parent(size());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = size();
  for (auto [u, v] : edges) {
    auto a = find(u), b = find(v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

bool PrecedenceDag::has_duplicate_edges() const {
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (auto e : edges) {
    if (!seen.insert(e).second) return true;
  }
  return false;
}

std::size_t PrecedenceDag::longest_path() const {
  auto order = topo(*this);
  std::vector<std::vector<std::uint32_t>> succ(size());
  for (auto [u, v] : edges) succ[u].push_back(v);
  std::vector<std::size_t> len(size(), 0);
  std::size_t best = 0;
  for (auto v : order) {
    for (auto w : succ[v]) len[w] = std::max(len[w], len[v] + 1);
    best = std::max(best, len[v]);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Generators

namespace {

// Nodes get labels N1..Nn in a random permutation so labels carry no
// structural information.
std::vector<NodeId> random_labels(std::uint32_t n, Rng& rng) {
  std::vector<std::uint64_t> numbers(n);
  std::iota(numbers.begin(), numbers.end(), std::uint64_t{1});
  rng.shuffle(std::span<std::uint64_t>(numbers));
  std::vector<NodeId> out;
  out.reserve(n);
  for (auto k : numbers) out.push_back(NodeId::from_number(k));
  return out;
}

// Spanning in-tree over order positions, rooted at the last position: each
// earlier position (taken from the back) picks a level uniformly among the
// levels present behind it, then a uniform node on that level, and points
// an edge at it.
std::vector<std::pair<std::uint32_t, std::uint32_t>> level_first_in_tree(std::uint32_t n, Rng& rng) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<std::vector<std::uint32_t>> by_level{{n - 1}};
  for (std::uint32_t u = n - 1; u-- > 0;) {
    const auto l = rng.index(by_level.size());
    const auto v = by_level[l][rng.index(by_level[l].size())];
    edges.emplace_back(u, v);
    if (l + 1 == by_level.size()) by_level.emplace_back();
    by_level[l + 1].push_back(u);
  }
  return edges;
}

}  // namespace

PrecedenceDag gen_random_dag(std::uint32_t n, std::size_t m, Rng& rng) {
  const std::size_t max_edges = static_cast<std::size_t>(n) * (n - 1) / 2;
  if (n < 2 || m + 1 < n || m > max_edges) {
    throw Error(ErrorCode::kInfeasibleEdgeCount, "random DAG with " + std::to_string(n) + " nodes needs " +
                                                     std::to_string(n - 1) + ".." + std::to_string(max_edges) +
                                                     " edges, got " + std::to_string(m));
  }
  // Position p in the topological order is node p; labels are shuffled at the end.
  std::vector<std::vector<char>> used(n, std::vector<char>(n, 0));
  PrecedenceDag dag;
  for (auto [u, v] : level_first_in_tree(n, rng)) {
    used[u][v] = 1;
    dag.edges.emplace_back(u, v);
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> free;
  free.reserve(max_edges - dag.edges.size());
  for (std::uint32_t u = 0; u < n; ++u) {
    for (std::uint32_t v = u + 1; v < n; ++v) {
      if (!used[u][v]) free.emplace_back(u, v);
    }
  }
  const std::size_t need = m - dag.edges.size();
  for (std::size_t i = 0; i < need; ++i) {
    std::swap(free[i], free[i + rng.index(free.size() - i)]);
    dag.edges.push_back(free[i]);
  }
  dag.nodes = random_labels(n, rng);
  return dag;
}

RootedTree gen_depth_limited_tree(std::uint32_t n, Rng& rng, std::uint32_t max_depth) {
  if (n < 1 || max_depth < 1) throw Error(ErrorCode::kInvalidArgument, "tree needs n >= 1 and max_depth >= 1");
  RootedTree tree;
  tree.parent.assign(n, 0);
  tree.depth.assign(n, 0);
  // Level first, then a node on it: keeps shallow levels wide.
  std::vector<std::vector<std::uint32_t>> open{{0}};  // by depth, below max_depth
  for (std::uint32_t v = 1; v < n; ++v) {
    const auto d = rng.index(open.size());
    const auto p = open[d][rng.index(open[d].size())];
    tree.parent[v] = p;
    tree.depth[v] = tree.depth[p] + 1;
    if (tree.depth[v] < max_depth) {
      if (tree.depth[v] == open.size()) open.emplace_back();
      open[tree.depth[v]].push_back(v);
    }
  }
  return tree;
}

PrecedenceDag orient_tree(const RootedTree& tree, std::size_t extra_edges, Rng& rng) {
  const auto n = static_cast<std::uint32_t>(tree.parent.size());
  PrecedenceDag dag;
  for (std::uint32_t v = 1; v < n; ++v) dag.edges.emplace_back(v, tree.parent[v]);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates;
  for (std::uint32_t u = 1; u < n; ++u) {
    for (std::uint32_t v = 0; v < n; ++v) {
      if (tree.depth[v] < tree.depth[u] && v != tree.parent[u]) candidates.emplace_back(u, v);
    }
  }
  if (candidates.size() < extra_edges) {
    throw Error(ErrorCode::kInfeasibleEdgeCount, "tree admits only " + std::to_string(candidates.size()) +
                                                     " extra edges, asked for " + std::to_string(extra_edges));
  }
  for (std::size_t i = 0; i < extra_edges; ++i) {
    std::swap(candidates[i], candidates[i + rng.index(candidates.size() - i)]);
    dag.edges.push_back(candidates[i]);
  }
  dag.nodes = random_labels(n, rng);
  return dag;
}

PrecedenceDag gen_tree_based_dag(std::uint32_t n, std::size_t extra_edges, Rng& rng) {
  if (n < 3) throw Error(ErrorCode::kInfeasibleEdgeCount, "tree-based DAG needs at least 3 nodes");
  return orient_tree(gen_depth_limited_tree(n, rng), extra_edges, rng);
}

std::pair<std::size_t, std::size_t> edge_count_range(const GenConfig& cfg) {
  const std::size_t n = cfg.node_count;
  if (cfg.edge_relation == EdgeRelation::kUniform) return {n - 1, n * (n - 1) / 2};
  if (cfg.structure == Structure::kRandom) return {2 * n, 3 * n};
  return {n, n * 3 / 2};
}

std::size_t sample_edge_count(const GenConfig& cfg, Rng& rng) {
  auto [lo, hi] = edge_count_range(cfg);
  return static_cast<std::size_t>(rng.uniform(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
}

std::size_t group_size_cap(std::size_t k) noexcept { return std::max<std::size_t>(1, 2 * k / 3); }

namespace {

template <typename T>
std::vector<std::vector<T>> partition_items(std::vector<T> items, std::uint32_t max_groups, Rng& rng) {
  const std::size_t k = items.size();
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "cannot partition an empty predecessor set");
  std::size_t g_min = 1;
  if (k >= 2) {
    const std::size_t cap = group_size_cap(k);
    g_min = 2;
    while ((k + g_min - 1) / g_min > cap) ++g_min;
  }
  const std::size_t g_max = std::max(g_min, std::min<std::size_t>(k, max_groups));
  const auto g = static_cast<std::size_t>(
      rng.uniform(static_cast<std::int64_t>(g_min), static_cast<std::int64_t>(g_max)));
  rng.shuffle(std::span<T>(items));
  std::vector<std::vector<T>> groups(g);
  // Deal round-robin: sizes differ by at most one.
  for (std::size_t i = 0; i < k; ++i) groups[i % g].push_back(std::move(items[i]));
  return groups;
}

}  // namespace

std::vector<std::vector<NodeId>> partition_predecessors(std::vector<NodeId> preds, const GenConfig& cfg, Rng& rng) {
  return partition_items(std::move(preds), cfg.max_groups_per_node, rng);
}

GeneratedGraph generate_graph(const GenConfig& cfg, Rng& rng) {
  cfg.validate();
  constexpr int kMaxAttempts = 64;
  const std::uint32_t n = cfg.node_count;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const std::size_t m = sample_edge_count(cfg, rng);
    PrecedenceDag dag;
    try {
      dag = cfg.structure == Structure::kRandom ? gen_random_dag(n, m, rng) : gen_tree_based_dag(n, m - (n - 1), rng);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInfeasibleEdgeCount) continue;
      throw;
    }

    auto heads = dag.heads();
    std::vector<char> is_head(n, 0);
    for (auto h : heads) is_head[h] = 1;
    std::vector<std::uint32_t> tails;
    for (auto t : dag.tails()) {
      if (!is_head[t]) tails.push_back(t);
    }
    if (tails.empty()) continue;

    // Visit nodes in label order so rule ids follow labels.
    std::vector<std::uint32_t> by_label(n);
    std::iota(by_label.begin(), by_label.end(), 0u);
    std::sort(by_label.begin(), by_label.end(), [&](auto a, auto b) { return dag.nodes[a] < dag.nodes[b]; });
    std::sort(tails.begin(), tails.end(), [&](auto a, auto b) { return dag.nodes[a] < dag.nodes[b]; });

    auto preds = dag.predecessors();
    std::vector<Rule> rules;
    for (auto v : by_label) {
      if (is_head[v]) continue;
      std::vector<NodeId> p;
      for (auto u : preds[v]) p.push_back(dag.nodes[u]);
      std::sort(p.begin(), p.end());
      for (auto& group : partition_predecessors(std::move(p), cfg, rng)) {
        auto time = rng.uniform(cfg.time_range.lo, cfg.time_range.hi);
        rules.emplace_back(static_cast<std::uint32_t>(rules.size()), std::move(group), dag.nodes[v], time,
                           cfg.fixed_cost);
      }
    }
    std::vector<NodeId> initial;
    for (auto h : heads) initial.push_back(dag.nodes[h]);
    NodeId target = dag.nodes[tails[rng.index(tails.size())]];
    InstanceMeta meta{n, dag.edges.size(), cfg.structure, cfg.edge_relation, cfg.seed};
    return GeneratedGraph{TaskGraph(std::move(rules), std::move(initial), std::move(target)), std::move(dag), meta};
  }
  throw Error(ErrorCode::kDegenerateGraph, "no usable graph after " + std::to_string(kMaxAttempts) + " attempts");
}

GeneratedGraph generate_graph(const GenConfig& cfg) {
  Rng rng(cfg.seed);
  return generate_graph(cfg, rng);
}

TaskGraph build_task_graph(const GenConfig& cfg, Rng& rng) { return generate_graph(cfg, rng).graph; }
TaskGraph build_task_graph(const GenConfig& cfg) { return generate_graph(cfg).graph; }

}  // namespace parplan
