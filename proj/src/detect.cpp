#include "safewatch/detect.hpp"

#include <algorithm>
#include <ostream>

#include "safewatch/error.hpp"
#include "safewatch/lexical.hpp"

namespace safewatch {

const char* to_string(Grade g) noexcept {
  switch (g) {
    case Grade::Safe:
      return "safe";
    case Grade::Moderate:
      return "moderate";
    case Grade::High:
      return "high";
    case Grade::Extreme:
      return "extreme";
  }
  return "safe";
}

void validate(const GradeThresholds& t) {
  if (!(0.0 < t.moderate && t.moderate <= t.high && t.high <= t.extreme && t.extreme <= 1.0)) {
    throw Error(ErrorKind::Parameter, "detect",
                "grade thresholds must satisfy 0 < moderate <= high <= extreme <= 1");
  }
}

Grade grade(double ratio, const GradeThresholds& t) {
  validate(t);
  if (ratio < t.moderate) return Grade::Safe;
  if (ratio < t.high) return Grade::Moderate;
  if (ratio < t.extreme) return Grade::High;
  return Grade::Extreme;
}

std::vector<UploaderVerdict> detect_unsafe_uploaders(const Corpus& corpus, const VideoPredictor& predictor,
                                                     const Lexicon& lex, const DetectOptions& options) {
  validate(options.thresholds);
  if (options.video_cap == 0) throw Error(ErrorKind::Parameter, "detect", "video_cap must be positive");
  std::vector<UploaderVerdict> verdicts;
  for (const auto& uid : corpus.uploader_ids()) {
    const auto& vids = corpus.videos_of(uid);
    UploaderVerdict v;
    v.user_id = uid;
    v.n_scored = std::min(options.video_cap, vids.size());
    for (std::size_t k = 0; k < v.n_scored; ++k) {
      const VideoRecord& video = corpus.videos()[vids[k]];
      const FeatureVector f = extract(video, corpus, lex, options.comment_cap);
      v.n_unsafe += predictor(video, f) == Safety::Unsafe;
    }
    v.ratio = static_cast<double>(v.n_unsafe) / static_cast<double>(v.n_scored);
    v.grade = grade(v.ratio, options.thresholds);
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

std::vector<UploaderVerdict> detect_unsafe_uploaders(const Corpus& corpus, const Model& model, const Lexicon& lex,
                                                     const DetectOptions& options) {
  if (model_dim(model) != kFeatureCount) {
    throw Error(ErrorKind::Schema, "detect",
                "model expects " + std::to_string(model_dim(model)) + " features, schema has " +
                    std::to_string(kFeatureCount));
  }
  return detect_unsafe_uploaders(
      corpus, [&](const VideoRecord&, const FeatureVector& f) { return predict(model, f.values); }, lex, options);
}

std::set<std::string> detect_unsafe_commenters(const Corpus& corpus, const Lexicon& lex) {
  std::set<std::string> flagged;
  for (const auto& c : corpus.comments()) {
    if (!flagged.count(c.author_id) && bad_word_count(tokenize(c.text), lex) >= 1) flagged.insert(c.author_id);
  }
  return flagged;
}

Ecdf::Ecdf(std::vector<double> samples) : samples_(std::move(samples)) {
  std::sort(samples_.begin(), samples_.end());
}

double Ecdf::operator()(double x) const {
  if (samples_.empty()) return 0.0;
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
  return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

std::vector<std::pair<double, double>> Ecdf::steps() const {
  std::vector<std::pair<double, double>> out;
  const auto n = static_cast<double>(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (i + 1 < samples_.size() && samples_[i + 1] == samples_[i]) continue;
    out.emplace_back(samples_[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

std::map<std::string, EcdfPair> characterize(const Corpus& corpus, std::span<const UploaderVerdict> verdicts) {
  if (verdicts.empty()) throw Error(ErrorKind::Parameter, "detect", "characterize needs at least one verdict");
  struct Samples {
    std::vector<double> safe;
    std::vector<double> unsafe;
  };
  std::map<std::string, Samples> acc;
  for (const char* key : {"subscriber_count", "total_views", "circled_by_count", "total_videos",
                          "comments_per_video", "likes_per_video", "dislikes_per_video"}) {
    acc[key];
  }
  for (const auto& v : verdicts) {
    const UserRecord* user = corpus.find_user(v.user_id);
    if (!user) throw Error(ErrorKind::Integrity, "detect", "verdict for unknown user '" + v.user_id + "'");
    const bool unsafe = v.safety() == Safety::Unsafe;
    auto put = [&](const char* key, double value) {
      auto& s = acc[key];
      (unsafe ? s.unsafe : s.safe).push_back(value);
    };
    put("subscriber_count", static_cast<double>(user->subscriber_count));
    put("total_views", static_cast<double>(user->total_views));
    if (user->circled_by_count) put("circled_by_count", static_cast<double>(*user->circled_by_count));
    put("total_videos", static_cast<double>(user->total_videos));

    const auto& vids = corpus.videos_of(v.user_id);
    if (!vids.empty()) {
      double comments = 0;
      double likes = 0;
      double dislikes = 0;
      for (auto i : vids) {
        const auto& video = corpus.videos()[i];
        comments += static_cast<double>(video.comment_count);
        likes += static_cast<double>(video.like_count);
        dislikes += static_cast<double>(video.dislike_count);
      }
      const auto n = static_cast<double>(vids.size());
      put("comments_per_video", comments / n);
      put("likes_per_video", likes / n);
      put("dislikes_per_video", dislikes / n);
    }
  }
  std::map<std::string, EcdfPair> out;
  for (auto& [key, s] : acc) out[key] = EcdfPair{Ecdf(std::move(s.safe)), Ecdf(std::move(s.unsafe))};
  return out;
}

Ecdf ratio_distribution(std::span<const UploaderVerdict> verdicts) {
  std::vector<double> ratios;
  ratios.reserve(verdicts.size());
  for (const auto& v : verdicts) ratios.push_back(v.ratio);
  return Ecdf(std::move(ratios));
}

void write_verdicts(std::ostream& out, std::span<const UploaderVerdict> verdicts) {
  out << "user_id\tn_scored\tn_unsafe\tratio\tgrade\n";
  for (const auto& v : verdicts) {
    out << v.user_id << '\t' << v.n_scored << '\t' << v.n_unsafe << '\t' << format_double(v.ratio) << '\t'
        << to_string(v.grade) << '\n';
  }
}

void write_ecdf(std::ostream& out, std::string_view metric, std::string_view group, const Ecdf& ecdf) {
  out << "# metric=" << metric << " group=" << group << " n=" << ecdf.samples().size() << '\n';
  out << "x\tF(x)\n";
  for (const auto& [x, f] : ecdf.steps()) out << format_double(x) << '\t' << format_double(f) << '\n';
}

}  // namespace safewatch
