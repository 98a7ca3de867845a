#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace safewatch {

enum class Safety : std::uint8_t { Safe = 0, Unsafe = 1 };
enum class Sentiment : std::uint8_t { Positive, Neutral, Negative };

const char* to_string(Safety s) noexcept;
const char* to_string(Sentiment s) noexcept;
std::optional<Safety> parse_safety(std::string_view text) noexcept;
std::optional<Sentiment> parse_sentiment(std::string_view text) noexcept;

/// A reference to a video or user. References that point outside the corpus
/// (the wider platform) must carry `external = true`; untagged references
/// must resolve.
struct Ref {
  std::string id;
  bool external = false;

  friend bool operator==(const Ref&, const Ref&) = default;
};

struct VideoRecord {
  std::string video_id;
  std::string uploader_id;
  std::string title;
  std::string description;
  std::uint64_t duration_s = 0;
  std::uint64_t age_days = 0;
  std::uint64_t view_count = 0;
  std::uint64_t like_count = 0;
  std::uint64_t dislike_count = 0;
  std::uint64_t comment_count = 0;
  /// Categorical "type of video" code; 0 when the source did not provide one.
  std::int64_t video_type = 0;
  /// Suggested videos in suggestion order.
  std::vector<Ref> related;
  std::optional<Safety> label;

  friend bool operator==(const VideoRecord&, const VideoRecord&) = default;
};

struct UserRecord {
  std::string user_id;
  bool is_uploader = false;
  bool is_commenter = false;
  std::uint64_t total_videos = 0;
  std::uint64_t total_views = 0;
  std::uint64_t total_comments = 0;
  std::uint64_t subscriber_count = 0;
  std::string channel_title;
  std::string channel_description;
  std::uint64_t age_days = 0;
  // Absent when the channel has no linked social profile.
  std::optional<std::uint64_t> circled_by_count;
  std::optional<std::uint64_t> plus_one_count;
  std::vector<Ref> liked_videos;
  std::vector<Ref> playlist_videos;
  std::vector<Ref> subscribed_users;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

struct CommentRecord {
  std::string comment_id;
  std::string video_id;
  std::string author_id;
  std::string text;
  std::uint64_t like_count = 0;
  std::uint64_t reply_count = 0;
  /// Precomputed sentiment; overrides lexicon scoring when present.
  std::optional<Sentiment> sentiment;

  friend bool operator==(const CommentRecord&, const CommentRecord&) = default;
};

/// Immutable, validated collection of videos, users and comments.
///
/// Record order is preserved from the source. Per-uploader video order is
/// taken to be newest first, and per-video comment order is file order.
class Corpus {
 public:
  Corpus() = default;

  /// Validates every invariant and builds the lookup indexes.
  /// Throws Error{Integrity} naming the offending key.
  static Corpus build(std::vector<VideoRecord> videos, std::vector<UserRecord> users,
                      std::vector<CommentRecord> comments);

  const std::vector<VideoRecord>& videos() const noexcept { return videos_; }
  const std::vector<UserRecord>& users() const noexcept { return users_; }
  const std::vector<CommentRecord>& comments() const noexcept { return comments_; }

  const VideoRecord* find_video(std::string_view id) const;
  const UserRecord* find_user(std::string_view id) const;

  /// Indices into videos() uploaded by `user_id`, in corpus order.
  const std::vector<std::size_t>& videos_of(std::string_view user_id) const;
  /// Indices into comments() posted on `video_id`, in corpus order.
  const std::vector<std::size_t>& comments_on(std::string_view video_id) const;
  /// Indices into comments() authored by `user_id`, in corpus order.
  const std::vector<std::size_t>& comments_by(std::string_view user_id) const;

  /// User ids owning at least one video, sorted.
  std::vector<std::string> uploader_ids() const;
  /// User ids authoring at least one comment, sorted.
  std::vector<std::string> commenter_ids() const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.videos_ == b.videos_ && a.users_ == b.users_ && a.comments_ == b.comments_;
  }

 private:
  std::vector<VideoRecord> videos_;
  std::vector<UserRecord> users_;
  std::vector<CommentRecord> comments_;
  std::unordered_map<std::string, std::size_t> video_index_;
  std::unordered_map<std::string, std::size_t> user_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> videos_by_uploader_;
  std::unordered_map<std::string, std::vector<std::size_t>> comments_by_video_;
  std::unordered_map<std::string, std::vector<std::size_t>> comments_by_author_;
};

inline constexpr int kCorpusFormatVersion = 1;

/// Corpus files are JSON Lines: a header line
/// `{"format":"safewatch-corpus","format_version":1}` followed by one record
/// per line, each an object with exactly one of the keys "video", "user" or
/// "comment". See docs/corpus-format.md.
Corpus parse_corpus(std::istream& in, std::string_view source_name = "<stream>");
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

/// Word lists for profanity and polarity matching. All entries lowercase.
struct Lexicon {
  std::set<std::string> bad_words;
  std::set<std::string> positive_words;
  std::set<std::string> negative_words;

  friend bool operator==(const Lexicon&, const Lexicon&) = default;
};

/// Plain text, one token per line. `#bad`, `#positive` and `#negative` start
/// sections; lines before any header are bad words. Other `#` lines are
/// comments. Throws Error{Config} when the bad-word list ends up empty.
Lexicon parse_lexicon(std::istream& in, std::string_view source_name = "<stream>");
Lexicon load_lexicon(const std::filesystem::path& path);

/// The word list shipped in data/lexicon.txt, compiled in.
const Lexicon& default_lexicon();

}  // namespace safewatch
