#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "safewatch/corpus.hpp"
#include "safewatch/detect.hpp"
#include "safewatch/netgraph.hpp"

namespace safewatch {

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

/// Mean-shift magnitudes between safe and unsafe items, per feature view.
/// 0 removes the signal from that view entirely.
struct SignalStrength {
  double video = 1.0;
  double user = 1.0;
  double comment = 1.0;
};

/// Planted-partition layout: `count` blocks of `size` nodes, edge probability
/// p_in inside a block and p_out across blocks.
struct CommunityPlant {
  std::size_t count = 0;
  std::size_t size = 0;
  double p_in = 0.0;
  double p_out = 0.0;
};

/// Exact bad-comment plant: `comments` bad comments spread over exactly
/// `authors` distinct commenters.
struct BadCommentPlan {
  std::size_t comments = 0;
  std::size_t authors = 0;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t n_uploaders = 10;
  std::size_t n_commenters = 30;
  std::size_t n_videos = 20;
  IntRange videos_per_uploader{1, 50};
  IntRange comments_per_video{2, 5};
  double unsafe_uploader_fraction = 0.3;
  /// Probability that a video of an unsafe uploader is unsafe (each unsafe
  /// uploader gets at least one unsafe video).
  double unsafe_video_rate = 0.75;
  /// Probability that a comment on a safe video carries a bad word; unsafe
  /// videos scale it up with the comment signal. Ignored with bad_comments.
  double unsafe_comment_rate = 0.05;
  std::optional<BadCommentPlan> bad_comments;
  SignalStrength signal;
  /// Unsafe uploaders get first-order stochastically smaller popularity.
  bool unsafe_less_popular = true;
  CommunityPlant plant;
  std::size_t related_per_video = 12;
  /// Fraction of videos whose suggestion list holds no corpus video.
  double isolated_video_fraction = 0.35;
  /// Videos considered per uploader when recording planted ratios.
  std::size_t video_cap = kDefaultVideoCap;

  /// Throws Error{Config} on out-of-range or infeasible settings.
  void validate() const;
};

/// Named presets: "tiny", "paper-scale", "stress".
SynthConfig preset(std::string_view name, std::uint64_t seed = 1);
const std::vector<std::string>& preset_names();

struct PlantedUploader {
  std::string user_id;
  bool unsafe = false;
  std::size_t n_scored = 0;
  std::size_t n_unsafe = 0;
  double ratio = 0.0;
  Grade grade = Grade::Safe;  // at default thresholds

  friend bool operator==(const PlantedUploader&, const PlantedUploader&) = default;
};

struct PlantedEdge {
  std::string src;
  std::string dst;
  Relation relation = Relation::Like;

  friend auto operator<=>(const PlantedEdge&, const PlantedEdge&) = default;
};

/// Everything the generator planted.
struct GroundTruth {
  std::map<std::string, Safety> video_labels;
  /// Sorted by user id.
  std::vector<PlantedUploader> uploaders;
  std::set<std::string> bad_comment_ids;
  std::set<std::string> unsafe_commenters;
  /// Planted block of each community-plant member.
  std::map<std::string, std::size_t> community;
  /// Behavioral edges between seed users, sorted.
  std::vector<PlantedEdge> behavior_edges;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct SynthOutput {
  Corpus corpus;
  GroundTruth truth;
};

/// Deterministic corpus with planted labels, ratios, bad comments and
/// behavioral communities.
SynthOutput generate(const SynthConfig& cfg);

/// JSON Lines sidecar with a `{"format":"safewatch-truth",...}` header.
void write_ground_truth(std::ostream& out, const GroundTruth& truth);
GroundTruth read_ground_truth(std::istream& in, std::string_view source_name = "<stream>");

/// Plain planted-partition graph (undirected, unit weights). Nodes in block
/// b are named "b<block>-n<index>"; the first `unsafe_per_block[b]` nodes of
/// block b are unsafe.
struct PlantedGraph {
  LabeledGraph graph{true};
  std::vector<std::size_t> membership;
  std::vector<std::size_t> unsafe_per_block;
};

PlantedGraph planted_partition_graph(const CommunityPlant& plant, std::uint64_t seed,
                                     double unsafe_fraction = 0.0);

}  // namespace safewatch
