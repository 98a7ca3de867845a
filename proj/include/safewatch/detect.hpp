#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "safewatch/corpus.hpp"
#include "safewatch/features.hpp"
#include "safewatch/learn.hpp"

namespace safewatch {

enum class Grade { Safe, Moderate, High, Extreme };

const char* to_string(Grade g) noexcept;

/// Lower-inclusive cut points on the indecent ratio.
struct GradeThresholds {
  double moderate = 1.0 / 3.0;
  double high = 2.0 / 3.0;
  double extreme = 0.9;
};

/// Throws Error{Parameter} unless 0 < moderate <= high <= extreme <= 1.
void validate(const GradeThresholds& t);

/// Safe below `moderate`, Moderate below `high`, High below `extreme`,
/// Extreme otherwise.
Grade grade(double ratio, const GradeThresholds& t = {});

struct UploaderVerdict {
  std::string user_id;
  std::size_t n_scored = 0;
  std::size_t n_unsafe = 0;
  double ratio = 0.0;
  Grade grade = Grade::Safe;

  /// Safe-graded uploaders are safe; every other grade is unsafe.
  Safety safety() const noexcept { return grade == Grade::Safe ? Safety::Safe : Safety::Unsafe; }
  friend bool operator==(const UploaderVerdict&, const UploaderVerdict&) = default;
};

/// Labels one video given its record and extracted features.
using VideoPredictor = std::function<Safety(const VideoRecord&, const FeatureVector&)>;

inline constexpr std::size_t kDefaultVideoCap = 50;

struct DetectOptions {
  std::size_t video_cap = kDefaultVideoCap;
  std::size_t comment_cap = kDefaultCommentCap;
  GradeThresholds thresholds;
};

/// For every uploader with at least one video (sorted by user id): classify
/// the first `video_cap` of their videos in corpus order and grade the
/// fraction predicted unsafe.
std::vector<UploaderVerdict> detect_unsafe_uploaders(const Corpus& corpus, const VideoPredictor& predictor,
                                                     const Lexicon& lex, const DetectOptions& options = {});

/// Same, with a trained model over the 34-feature schema. Throws
/// Error{Schema} when the model expects another dimension.
std::vector<UploaderVerdict> detect_unsafe_uploaders(const Corpus& corpus, const Model& model, const Lexicon& lex,
                                                     const DetectOptions& options = {});

/// Authors of at least one comment containing a bad word.
std::set<std::string> detect_unsafe_commenters(const Corpus& corpus, const Lexicon& lex);

/// Empirical CDF: F(x) = fraction of samples <= x.
class Ecdf {
 public:
  Ecdf() = default;
  explicit Ecdf(std::vector<double> samples);

  double operator()(double x) const;
  const std::vector<double>& samples() const noexcept { return samples_; }
  bool empty() const noexcept { return samples_.empty(); }
  /// (x, F(x)) at each distinct sample value.
  std::vector<std::pair<double, double>> steps() const;

 private:
  std::vector<double> samples_;  // sorted
};

struct EcdfPair {
  Ecdf safe;
  Ecdf unsafe;
};

/// Popularity and engagement curves split by uploader safety. Keys:
/// subscriber_count, total_views, circled_by_count, total_videos,
/// comments_per_video, likes_per_video, dislikes_per_video. Per-video metrics
/// average over the uploader's corpus videos. Uploaders without a social
/// profile are left out of circled_by_count.
std::map<std::string, EcdfPair> characterize(const Corpus& corpus, std::span<const UploaderVerdict> verdicts);

/// ECDF of indecent ratios over all verdicts.
Ecdf ratio_distribution(std::span<const UploaderVerdict> verdicts);

/// Tab-separated: user_id, n_scored, n_unsafe, ratio, grade.
void write_verdicts(std::ostream& out, std::span<const UploaderVerdict> verdicts);
/// Tab-separated `x\tF(x)` rows under a header naming the metric and group.
void write_ecdf(std::ostream& out, std::string_view metric, std::string_view group, const Ecdf& ecdf);

}  // namespace safewatch
