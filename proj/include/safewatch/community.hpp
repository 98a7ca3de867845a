#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "safewatch/netgraph.hpp"

namespace safewatch {

/// Community of every node (by node index), ids dense from 0.
struct Partition {
  std::vector<std::size_t> assignment;
  std::size_t communities = 0;
  double modularity = 0.0;
  /// Modularity after each Louvain aggregation level, nondecreasing.
  std::vector<double> level_modularity;
};

/// Newman-Girvan modularity of `assignment` on `g` viewed as an undirected
/// unit-weight multigraph: Q = sum_c [ e_c/m - (d_c/2m)^2 ]. Zero when the
/// graph has no edges. Throws Error{Coverage} if the assignment size differs
/// from the node count.
double modularity(const LabeledGraph& g, std::span<const std::size_t> assignment);

struct LouvainOptions {
  /// Minimum modularity gain for a node move.
  double tolerance = 1e-9;
  std::size_t max_levels = 64;
  /// Moves per Kernighan-Lin refinement pass; 0 disables the pass.
  std::size_t kl_depth = 32;
};

/// Two-phase Louvain: greedy local moves in seeded random order, then
/// aggregation, until a level makes no move. The flattened partition is then
/// refined on the original graph (local moves, then a bounded Kernighan-Lin
/// pass) and the coarse phase restarts from it while that improves Q.
/// Equal-gain moves go to the lowest community id. Throws Error{Internal} if
/// a level lowers modularity.
Partition louvain(const LabeledGraph& g, std::uint64_t seed, const LouvainOptions& options = {});

/// Renumbers labels densely in order of first appearance.
std::vector<std::size_t> normalize_assignment(std::span<const std::size_t> labels);

struct CommunityCensus {
  std::size_t id = 0;
  std::size_t n_safe = 0;
  std::size_t n_unsafe = 0;
  std::size_t size = 0;

  bool mixed() const noexcept { return n_safe > 0 && n_unsafe > 0; }
  friend bool operator==(const CommunityCensus&, const CommunityCensus&) = default;
};

/// Safe/unsafe node counts per community, ordered by community id.
std::vector<CommunityCensus> community_composition(const LabeledGraph& g, const Partition& p);

/// Hubert-Arabie adjusted Rand index of two labelings of the same items.
double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// `# modularity=Q communities=K` header, then `node_id\tcommunity_id` lines.
void write_partition(std::ostream& out, const LabeledGraph& g, const Partition& p);
void write_composition(std::ostream& out, std::span<const CommunityCensus> census);

}  // namespace safewatch
