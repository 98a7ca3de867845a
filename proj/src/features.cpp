#include "safewatch/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "safewatch/error.hpp"
#include "safewatch/lexical.hpp"

namespace safewatch {

namespace {

// Schema order. The first 19 are video-level, the next 9 user-level, the last
// 6 comment-level.
constexpr std::array<std::string_view, kFeatureCount> kNames = {
    // video level
    "video_type",
    "view_count",
    "comment_count",
    "dislike_count",
    "like_count",
    "like_dislike_ratio",
    "title_length",
    "description_length",
    "description_title_ratio",
    "duration_s",
    "days_since_published",
    "title_description_jaccard",
    "title_bad_words",
    "description_bad_words",
    "description_question_marks",
    "description_hyperlinks",
    "description_emoticons",
    "title_has_18",
    "title_description_common_words",
    // user level
    "user_total_videos",
    "user_total_views",
    "user_total_comments",
    "user_subscribers",
    "user_title_length",
    "user_description_length",
    "user_days_since_registered",
    "user_circled_by_count",
    "user_plus_one_count",
    // comment level
    "comment_likes",
    "comment_replies",
    "comments_positive",
    "comments_negative",
    "comments_neutral",
    "comment_bad_words",
};

double d(std::uint64_t v) { return static_cast<double>(v); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

}  // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() { return kNames; }

std::optional<std::size_t> feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return i;
  }
  return std::nullopt;
}

double FeatureVector::at(std::string_view name) const {
  auto idx = feature_index(name);
  if (!idx) throw std::out_of_range("unknown feature '" + std::string(name) + "'");
  return values[*idx];
}

const char* to_string(FeatureView view) noexcept {
  switch (view) {
    case FeatureView::Video:
      return "video";
    case FeatureView::User:
      return "user";
    case FeatureView::Comment:
      return "comment";
    case FeatureView::All:
      return "all";
  }
  return "all";
}

std::optional<FeatureView> parse_feature_view(std::string_view text) noexcept {
  if (text == "video") return FeatureView::Video;
  if (text == "user") return FeatureView::User;
  if (text == "comment") return FeatureView::Comment;
  if (text == "all") return FeatureView::All;
  return std::nullopt;
}

std::vector<std::size_t> view_indices(FeatureView view) {
  std::size_t first = 0;
  std::size_t count = kFeatureCount;
  switch (view) {
    case FeatureView::Video:
      count = kVideoFeatureCount;
      break;
    case FeatureView::User:
      first = kVideoFeatureCount;
      count = kUserFeatureCount;
      break;
    case FeatureView::Comment:
      first = kVideoFeatureCount + kUserFeatureCount;
      count = kCommentFeatureCount;
      break;
    case FeatureView::All:
      break;
  }
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = first + i;
  return idx;
}

FeatureVector extract(const VideoRecord& video, const Corpus& corpus, const Lexicon& lex, std::size_t comment_cap) {
  const UserRecord* uploader = corpus.find_user(video.uploader_id);
  if (!uploader) {
    throw Error(ErrorKind::Extraction, "features",
                "video '" + video.video_id + "': uploader '" + video.uploader_id + "' does not resolve");
  }

  FeatureVector f;
  std::size_t i = 0;

  const TokenBag title = tokenize(video.title);
  const TokenBag desc = tokenize(video.description);
  const MarkCounts marks = count_marks(video.description);
  const double title_len = d(char_length(video.title));
  const double desc_len = d(char_length(video.description));

  f[i++] = static_cast<double>(video.video_type);
  f[i++] = d(video.view_count);
  f[i++] = d(video.comment_count);
  f[i++] = d(video.dislike_count);
  f[i++] = d(video.like_count);
  f[i++] = d(video.like_count) / std::max(d(video.dislike_count), 1.0);
  f[i++] = title_len;
  f[i++] = desc_len;
  f[i++] = desc_len / std::max(title_len, 1.0);
  f[i++] = d(video.duration_s);
  f[i++] = d(video.age_days);
  f[i++] = jaccard(title, desc);
  f[i++] = d(bad_word_count(title, lex));
  f[i++] = d(bad_word_count(desc, lex));
  f[i++] = d(marks.question_marks);
  f[i++] = d(marks.hyperlinks);
  f[i++] = d(marks.emoticons);
  f[i++] = video.title.find("18") != std::string::npos ? 1.0 : 0.0;
  f[i++] = d(common_word_count(title, desc));

  f[i++] = d(uploader->total_videos);
  f[i++] = d(uploader->total_views);
  f[i++] = d(uploader->total_comments);
  f[i++] = d(uploader->subscriber_count);
  f[i++] = d(char_length(uploader->channel_title));
  f[i++] = d(char_length(uploader->channel_description));
  f[i++] = d(uploader->age_days);
  f[i++] = d(uploader->circled_by_count.value_or(0));
  f[i++] = d(uploader->plus_one_count.value_or(0));

  std::uint64_t likes = 0;
  std::uint64_t replies = 0;
  std::uint64_t positive = 0;
  std::uint64_t negative = 0;
  std::uint64_t neutral = 0;
  std::uint64_t bad = 0;
  const auto& on_video = corpus.comments_on(video.video_id);
  const std::size_t n = std::min(comment_cap, on_video.size());
  for (std::size_t k = 0; k < n; ++k) {
    const CommentRecord& c = corpus.comments()[on_video[k]];
    likes += c.like_count;
    replies += c.reply_count;
    switch (comment_sentiment(c, lex)) {
      case Sentiment::Positive:
        ++positive;
        break;
      case Sentiment::Negative:
        ++negative;
        break;
      case Sentiment::Neutral:
        ++neutral;
        break;
    }
    bad += bad_word_count(tokenize(c.text), lex);
  }
  f[i++] = d(likes);
  f[i++] = d(replies);
  f[i++] = d(positive);
  f[i++] = d(negative);
  f[i++] = d(neutral);
  f[i++] = d(bad);
  return f;
}

std::vector<std::pair<std::string, FeatureVector>> extract_batch(std::span<const std::string> video_ids,
                                                                 const Corpus& corpus, const Lexicon& lex,
                                                                 std::size_t comment_cap) {
  std::vector<std::pair<std::string, FeatureVector>> out;
  out.reserve(video_ids.size());
  for (std::size_t k = 0; k < video_ids.size(); ++k) {
    const VideoRecord* v = corpus.find_video(video_ids[k]);
    try {
      if (!v) throw Error(ErrorKind::Extraction, "features", "unknown video '" + video_ids[k] + "'");
      out.emplace_back(video_ids[k], extract(*v, corpus, lex, comment_cap));
    } catch (const Error& e) {
      throw Error(e.kind(), "features", "at index " + std::to_string(k) + ": " + e.what());
    }
  }
  return out;
}

std::vector<FeatureRow> extract_corpus(const Corpus& corpus, const Lexicon& lex, std::size_t comment_cap) {
  std::vector<FeatureRow> rows;
  rows.reserve(corpus.videos().size());
  for (const auto& v : corpus.videos()) rows.push_back({v.video_id, extract(v, corpus, lex, comment_cap), v.label});
  return rows;
}

std::string format_double(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_feature_matrix(std::ostream& out, std::span<const FeatureRow> rows) {
  for (const auto& name : kNames) out << name << ',';
  out << "video_id,label\n";
  for (const auto& row : rows) {
    for (double v : row.features.values) out << format_double(v) << ',';
    out << row.video_id << ',' << (row.label ? to_string(*row.label) : "") << '\n';
  }
}

std::vector<FeatureRow> read_feature_matrix(std::istream& in, std::string_view source_name) {
  auto fail = [&](std::size_t line, const std::string& msg) -> Error {
    std::ostringstream os;
    os << source_name << ":" << line << ": " << msg;
    return Error(ErrorKind::Parse, "features", os.str());
  };
  std::string line;
  if (!std::getline(in, line)) throw fail(1, "empty feature matrix");
  const auto header = split_csv_line(line);
  if (header.size() != kFeatureCount + 2) throw fail(1, "expected " + std::to_string(kFeatureCount + 2) + " columns");
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (header[i] != kNames[i]) throw fail(1, "column " + std::to_string(i) + " should be '" + std::string(kNames[i]) + "'");
  }
  if (header[kFeatureCount] != "video_id" || header[kFeatureCount + 1] != "label")
    throw fail(1, "last columns must be video_id,label");

  std::vector<FeatureRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != kFeatureCount + 2) throw fail(line_no, "wrong column count");
    FeatureRow row;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const auto& c = cells[i];
      auto res = std::from_chars(c.data(), c.data() + c.size(), row.features[i]);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size() || !std::isfinite(row.features[i]))
        throw fail(line_no, "bad number '" + c + "' in column " + std::string(kNames[i]));
    }
    row.video_id = cells[kFeatureCount];
    const auto& label = cells[kFeatureCount + 1];
    if (!label.empty()) {
      row.label = parse_safety(label);
      if (!row.label) throw fail(line_no, "bad label '" + label + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace safewatch
