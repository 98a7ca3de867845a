#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "safewatch/corpus.hpp"

namespace safewatch {

inline constexpr std::size_t kVideoFeatureCount = 19;
inline constexpr std::size_t kUserFeatureCount = 9;
inline constexpr std::size_t kCommentFeatureCount = 6;
inline constexpr std::size_t kFeatureCount = kVideoFeatureCount + kUserFeatureCount + kCommentFeatureCount;

/// Feature names in schema order: video-level, user-level, comment-level.
const std::array<std::string_view, kFeatureCount>& feature_names();

/// Index of a feature name, or nullopt.
std::optional<std::size_t> feature_index(std::string_view name);

struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  /// Throws std::out_of_range for unknown names.
  double at(std::string_view name) const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

enum class FeatureView { Video, User, Comment, All };

const char* to_string(FeatureView view) noexcept;
std::optional<FeatureView> parse_feature_view(std::string_view text) noexcept;

/// Sorted schema indices belonging to a view.
std::vector<std::size_t> view_indices(FeatureView view);

inline constexpr std::size_t kDefaultCommentCap = 50;

/// Computes the feature vector of `video` within `corpus`.
/// Throws Error{Extraction} when the uploader does not resolve.
FeatureVector extract(const VideoRecord& video, const Corpus& corpus, const Lexicon& lex,
                      std::size_t comment_cap = kDefaultCommentCap);

/// Order-preserving map of extract over video ids. Errors carry the index.
std::vector<std::pair<std::string, FeatureVector>> extract_batch(std::span<const std::string> video_ids,
                                                                 const Corpus& corpus, const Lexicon& lex,
                                                                 std::size_t comment_cap = kDefaultCommentCap);

/// Row of a feature matrix file.
struct FeatureRow {
  std::string video_id;
  FeatureVector features;
  std::optional<Safety> label;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

/// Rows for every corpus video, in corpus order, labels copied from the corpus.
std::vector<FeatureRow> extract_corpus(const Corpus& corpus, const Lexicon& lex,
                                       std::size_t comment_cap = kDefaultCommentCap);

/// CSV: header of the 34 feature names, then `video_id,label`. Values use the
/// shortest round-trip decimal form; an unknown label is an empty cell.
void write_feature_matrix(std::ostream& out, std::span<const FeatureRow> rows);
std::vector<FeatureRow> read_feature_matrix(std::istream& in, std::string_view source_name = "<stream>");

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

}  // namespace safewatch
