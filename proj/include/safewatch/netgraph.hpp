#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "safewatch/corpus.hpp"
#include "safewatch/detect.hpp"

namespace safewatch {

enum class NodeKind : std::uint8_t { Video, Uploader, Commenter };
enum class Relation : std::uint8_t { Related, Comment, Like, Subscribe, Playlist };

const char* to_string(NodeKind k) noexcept;
const char* to_string(Relation r) noexcept;
std::optional<Relation> parse_relation(std::string_view text) noexcept;

struct GraphNode {
  std::string id;
  NodeKind kind = NodeKind::Video;
  Safety safety = Safety::Safe;
};

struct GraphEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  Relation relation = Relation::Related;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Nodes tagged with kind and safety; edges tagged with a relation.
///
/// Edges are stored with an orientation even in undirected graphs (there the
/// orientation is commenter -> uploader). Parallel edges collapse within a
/// relation; distinct relations between one pair stay distinct. Self-loops
/// are never stored.
class LabeledGraph {
 public:
  explicit LabeledGraph(bool undirected = false) : undirected_(undirected) {}

  /// Throws Error{Integrity} on a duplicate id.
  std::size_t add_node(std::string id, NodeKind kind, Safety safety);
  /// Returns false when the edge was a self-loop or already present.
  bool add_edge(std::size_t src, std::size_t dst, Relation relation);

  std::optional<std::size_t> find(std::string_view id) const;
  const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
  const std::vector<GraphEdge>& edges() const noexcept { return edges_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool undirected() const noexcept { return undirected_; }

  /// Undirected degree of every node.
  std::vector<std::size_t> degrees() const;
  /// Copy without zero-degree nodes; node order otherwise preserved.
  LabeledGraph without_isolated() const;

 private:
  bool undirected_;
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_set<std::uint64_t> edge_keys_;
};

/// Ground-truth labels of every corpus video. Throws Error{Labeling} when a
/// video is unlabeled.
std::map<std::string, Safety> corpus_labels(const Corpus& corpus);

inline constexpr std::size_t kDefaultRelatedTh = 10;
inline constexpr std::size_t kDefaultMinComments = 4;

/// Directed suggestion graph over the corpus videos: v -> r for each of the
/// first `th` related entries r of v that is itself a corpus video. Keeps
/// isolated nodes; see LabeledGraph::without_isolated.
LabeledGraph build_video_graph(const Corpus& corpus, const std::map<std::string, Safety>& labels,
                               std::size_t th = kDefaultRelatedTh);

/// Collapses video edges onto their uploaders, dropping self-loops. Node
/// safety comes from the verdict grade.
LabeledGraph build_uploader_graph(const LabeledGraph& video_graph, const Corpus& corpus,
                                  std::span<const UploaderVerdict> verdicts);

/// Undirected commenter-uploader graph. Nodes: every verdict uploader plus
/// commenters with at least `min_comments` comments. A user who is both keeps
/// one node (kind Uploader) and is unsafe if either role is unsafe.
LabeledGraph build_commenter_graph(const Corpus& corpus, std::span<const UploaderVerdict> verdicts,
                                   const std::set<std::string>& unsafe_commenters,
                                   std::size_t min_comments = kDefaultMinComments);

/// Reference counts for one relation from one source role.
struct RelationTally {
  std::size_t total = 0;
  std::size_t self = 0;
  std::size_t to_uploaders = 0;
  std::size_t to_commenters = 0;
  std::size_t external = 0;

  friend bool operator==(const RelationTally&, const RelationTally&) = default;
};

struct BehaviorGraph {
  LabeledGraph graph;
  std::size_t n_uploaders = 0;
  std::size_t n_commenters = 0;
  /// Indexed [relation][source is commenter].
  std::map<Relation, std::array<RelationTally, 2>> tallies;
};

/// Like/Subscribe/Playlist graph over seed uploaders and seed commenters.
/// Liked and playlisted videos are mapped to their uploader (reverse
/// lookup); references leaving the seed sets land in the external tally and
/// self references in the self tally, neither becomes an edge.
BehaviorGraph build_behavior_graph(const Corpus& corpus, std::span<const UploaderVerdict> verdicts,
                                   const std::set<std::string>& unsafe_commenters,
                                   const std::set<Relation>& relations);

struct TransitionMatrix {
  std::size_t safe_safe = 0;
  std::size_t safe_unsafe = 0;
  std::size_t unsafe_safe = 0;
  std::size_t unsafe_unsafe = 0;

  std::size_t total() const noexcept { return safe_safe + safe_unsafe + unsafe_safe + unsafe_unsafe; }
  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;
};

/// Census of edges by (source safety, destination safety).
TransitionMatrix transitions(const LabeledGraph& g);

/// One `src dst relation` line per edge.
void write_edge_list(std::ostream& out, const LabeledGraph& g);

/// GraphML with kind/safety node attributes, a relation edge attribute and
/// an optional community attribute (one entry per node).
void write_graphml(std::ostream& out, const LabeledGraph& g, std::span<const std::size_t> community = {});

/// Summary numbers for one graph in the transitions reports.
struct GraphSummary {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t communities = 0;
  double modularity = 0.0;
  TransitionMatrix transitions;
};

/// Two-column video/uploader report with rows "Number of Nodes" through
/// "Unsafe to Unsafe Transition".
void write_suggestion_report(std::ostream& out, const GraphSummary& video, const GraphSummary& uploader);
/// Commenter-uploader transition counts, rows "Safe Commenter to Safe
/// Uploader" and so on.
void write_commenter_report(std::ostream& out, const GraphSummary& summary);
/// Like/subscribe/playlist breakdowns.
void write_behavior_report(std::ostream& out, const BehaviorGraph& bg);

}  // namespace safewatch
