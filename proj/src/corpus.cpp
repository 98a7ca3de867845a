#include "safewatch/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "embedded_data.hpp"
#include "safewatch/error.hpp"

namespace safewatch {

namespace {

using json = nlohmann::ordered_json;

const std::vector<std::size_t> kNoIndices;

[[noreturn]] void integrity(const std::string& msg) {
  throw Error(ErrorKind::Integrity, "corpus", msg);
}

[[noreturn]] void parse_fail(std::string_view source, std::size_t line, const std::string& msg) {
  std::ostringstream os;
  os << source << ":" << line << ": " << msg;
  throw Error(ErrorKind::Parse, "corpus", os.str());
}

// Field readers throw FieldError; the line loop rewraps it with a locator.
struct FieldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string get_string(const json& obj, const char* key, bool required = true) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw FieldError(std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_string()) throw FieldError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::uint64_t get_count(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) return 0;
  if (!it->is_number_integer() || (!it->is_number_unsigned() && it->get<std::int64_t>() < 0))
    throw FieldError(std::string("field '") + key + "' must be a nonnegative integer");
  return it->get<std::uint64_t>();
}

std::optional<std::uint64_t> get_optional_count(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return get_count(obj, key);
}

std::vector<Ref> get_refs(const json& obj, const char* key) {
  std::vector<Ref> refs;
  auto it = obj.find(key);
  if (it == obj.end()) return refs;
  if (!it->is_array()) throw FieldError(std::string("field '") + key + "' must be an array");
  for (const auto& item : *it) {
    if (item.is_string()) {
      refs.push_back({item.get<std::string>(), false});
    } else if (item.is_object()) {
      Ref r;
      r.id = get_string(item, "id");
      auto ext = item.find("external");
      r.external = ext != item.end() && ext->is_boolean() && ext->get<bool>();
      refs.push_back(std::move(r));
    } else {
      throw FieldError(std::string("entries of '") + key + "' must be strings or {id, external}");
    }
  }
  return refs;
}

json refs_to_json(const std::vector<Ref>& refs) {
  json arr = json::array();
  for (const auto& r : refs) {
    if (r.external) {
      arr.push_back(json{{"id", r.id}, {"external", true}});
    } else {
      arr.push_back(r.id);
    }
  }
  return arr;
}

VideoRecord video_from_json(const json& j) {
  VideoRecord v;
  v.video_id = get_string(j, "video_id");
  v.uploader_id = get_string(j, "uploader_id");
  v.title = get_string(j, "title", false);
  v.description = get_string(j, "description", false);
  v.duration_s = get_count(j, "duration_s");
  v.age_days = get_count(j, "age_days");
  v.view_count = get_count(j, "view_count");
  v.like_count = get_count(j, "like_count");
  v.dislike_count = get_count(j, "dislike_count");
  v.comment_count = get_count(j, "comment_count");
  if (auto it = j.find("video_type"); it != j.end()) {
    if (!it->is_number_integer()) throw FieldError("field 'video_type' must be an integer");
    v.video_type = it->get<std::int64_t>();
  }
  v.related = get_refs(j, "related_ids");
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    auto s = it->is_string() ? parse_safety(it->get<std::string>()) : std::nullopt;
    if (!s) throw FieldError("field 'label' must be \"safe\" or \"unsafe\"");
    v.label = s;
  }
  return v;
}

json video_to_json(const VideoRecord& v) {
  json j;
  j["video_id"] = v.video_id;
  j["uploader_id"] = v.uploader_id;
  j["title"] = v.title;
  j["description"] = v.description;
  j["duration_s"] = v.duration_s;
  j["age_days"] = v.age_days;
  j["view_count"] = v.view_count;
  j["like_count"] = v.like_count;
  j["dislike_count"] = v.dislike_count;
  j["comment_count"] = v.comment_count;
  j["video_type"] = v.video_type;
  j["related_ids"] = refs_to_json(v.related);
  if (v.label) j["label"] = to_string(*v.label);
  return j;
}

UserRecord user_from_json(const json& j) {
  UserRecord u;
  u.user_id = get_string(j, "user_id");
  if (auto it = j.find("roles"); it != j.end()) {
    if (!it->is_array()) throw FieldError("field 'roles' must be an array");
    for (const auto& r : *it) {
      const std::string role = r.is_string() ? r.get<std::string>() : "";
      if (role == "uploader") {
        u.is_uploader = true;
      } else if (role == "commenter") {
        u.is_commenter = true;
      } else {
        throw FieldError("unknown role '" + role + "'");
      }
    }
  }
  u.total_videos = get_count(j, "total_videos");
  u.total_views = get_count(j, "total_views");
  u.total_comments = get_count(j, "total_comments");
  u.subscriber_count = get_count(j, "subscriber_count");
  u.channel_title = get_string(j, "channel_title", false);
  u.channel_description = get_string(j, "channel_description", false);
  u.age_days = get_count(j, "age_days");
  u.circled_by_count = get_optional_count(j, "circled_by_count");
  u.plus_one_count = get_optional_count(j, "plus_one_count");
  u.liked_videos = get_refs(j, "liked_video_ids");
  u.playlist_videos = get_refs(j, "playlist_video_ids");
  u.subscribed_users = get_refs(j, "subscribed_user_ids");
  return u;
}

json user_to_json(const UserRecord& u) {
  json j;
  j["user_id"] = u.user_id;
  json roles = json::array();
  if (u.is_uploader) roles.push_back("uploader");
  if (u.is_commenter) roles.push_back("commenter");
  j["roles"] = roles;
  j["total_videos"] = u.total_videos;
  j["total_views"] = u.total_views;
  j["total_comments"] = u.total_comments;
  j["subscriber_count"] = u.subscriber_count;
  j["channel_title"] = u.channel_title;
  j["channel_description"] = u.channel_description;
  j["age_days"] = u.age_days;
  if (u.circled_by_count) j["circled_by_count"] = *u.circled_by_count;
  if (u.plus_one_count) j["plus_one_count"] = *u.plus_one_count;
  j["liked_video_ids"] = refs_to_json(u.liked_videos);
  j["playlist_video_ids"] = refs_to_json(u.playlist_videos);
  j["subscribed_user_ids"] = refs_to_json(u.subscribed_users);
  return j;
}

CommentRecord comment_from_json(const json& j) {
  CommentRecord c;
  c.comment_id = get_string(j, "comment_id");
  c.video_id = get_string(j, "video_id");
  c.author_id = get_string(j, "author_id");
  c.text = get_string(j, "text", false);
  c.like_count = get_count(j, "like_count");
  c.reply_count = get_count(j, "reply_count");
  if (auto it = j.find("sentiment"); it != j.end() && !it->is_null()) {
    auto s = it->is_string() ? parse_sentiment(it->get<std::string>()) : std::nullopt;
    if (!s) throw FieldError("field 'sentiment' must be positive, neutral or negative");
    c.sentiment = s;
  }
  return c;
}

json comment_to_json(const CommentRecord& c) {
  json j;
  j["comment_id"] = c.comment_id;
  j["video_id"] = c.video_id;
  j["author_id"] = c.author_id;
  j["text"] = c.text;
  j["like_count"] = c.like_count;
  j["reply_count"] = c.reply_count;
  if (c.sentiment) j["sentiment"] = to_string(*c.sentiment);
  return j;
}

std::string trim(std::string_view s) {
  auto b = s.begin();
  auto e = s.end();
  while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
  return std::string(b, e);
}

}  // namespace

const char* to_string(Safety s) noexcept { return s == Safety::Safe ? "safe" : "unsafe"; }

const char* to_string(Sentiment s) noexcept {
  switch (s) {
    case Sentiment::Positive:
      return "positive";
    case Sentiment::Neutral:
      return "neutral";
    case Sentiment::Negative:
      return "negative";
  }
  return "neutral";
}

std::optional<Safety> parse_safety(std::string_view text) noexcept {
  if (text == "safe") return Safety::Safe;
  if (text == "unsafe") return Safety::Unsafe;
  return std::nullopt;
}

std::optional<Sentiment> parse_sentiment(std::string_view text) noexcept {
  if (text == "positive") return Sentiment::Positive;
  if (text == "neutral") return Sentiment::Neutral;
  if (text == "negative") return Sentiment::Negative;
  return std::nullopt;
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parse:
      return "parse";
    case ErrorKind::Integrity:
      return "integrity";
    case ErrorKind::Config:
      return "config";
    case ErrorKind::Parameter:
      return "parameter";
    case ErrorKind::Schema:
      return "schema";
    case ErrorKind::Labeling:
      return "labeling";
    case ErrorKind::Extraction:
      return "extraction";
    case ErrorKind::Coverage:
      return "coverage";
    case ErrorKind::Stratification:
      return "stratification";
    case ErrorKind::Internal:
      return "internal";
  }
  return "internal";
}

Corpus Corpus::build(std::vector<VideoRecord> videos, std::vector<UserRecord> users,
                     std::vector<CommentRecord> comments) {
  Corpus c;
  c.videos_ = std::move(videos);
  c.users_ = std::move(users);
  c.comments_ = std::move(comments);

  for (std::size_t i = 0; i < c.videos_.size(); ++i) {
    const auto& v = c.videos_[i];
    if (v.video_id.empty()) integrity("empty video_id at videos[" + std::to_string(i) + "]");
    if (!c.video_index_.emplace(v.video_id, i).second) integrity("duplicate video_id '" + v.video_id + "'");
  }
  for (std::size_t i = 0; i < c.users_.size(); ++i) {
    const auto& u = c.users_[i];
    if (u.user_id.empty()) integrity("empty user_id at users[" + std::to_string(i) + "]");
    if (!c.user_index_.emplace(u.user_id, i).second) integrity("duplicate user_id '" + u.user_id + "'");
  }

  auto check_video_ref = [&](const Ref& r, const std::string& owner) {
    if (r.id.empty()) integrity("empty video reference in '" + owner + "'");
    if (!r.external && !c.video_index_.count(r.id))
      integrity("'" + owner + "' references unknown video '" + r.id + "' (tag it external)");
  };
  auto check_user_ref = [&](const Ref& r, const std::string& owner) {
    if (r.id.empty()) integrity("empty user reference in '" + owner + "'");
    if (!r.external && !c.user_index_.count(r.id))
      integrity("'" + owner + "' references unknown user '" + r.id + "' (tag it external)");
  };

  for (std::size_t i = 0; i < c.videos_.size(); ++i) {
    const auto& v = c.videos_[i];
    if (!c.user_index_.count(v.uploader_id))
      integrity("video '" + v.video_id + "' has unknown uploader '" + v.uploader_id + "'");
    std::unordered_set<std::string_view> seen;
    for (const auto& r : v.related) {
      if (r.id == v.video_id) integrity("video '" + v.video_id + "' lists itself as related");
      if (!seen.insert(r.id).second)
        integrity("video '" + v.video_id + "' lists related video '" + r.id + "' twice");
      check_video_ref(r, v.video_id);
    }
    c.videos_by_uploader_[v.uploader_id].push_back(i);
  }
  for (const auto& u : c.users_) {
    for (const auto& r : u.liked_videos) check_video_ref(r, u.user_id);
    for (const auto& r : u.playlist_videos) check_video_ref(r, u.user_id);
    for (const auto& r : u.subscribed_users) {
      if (r.id == u.user_id) integrity("user '" + u.user_id + "' subscribes to itself");
      check_user_ref(r, u.user_id);
    }
  }
  std::unordered_set<std::string_view> comment_ids;
  for (std::size_t i = 0; i < c.comments_.size(); ++i) {
    const auto& cm = c.comments_[i];
    if (cm.comment_id.empty()) integrity("empty comment_id at comments[" + std::to_string(i) + "]");
    if (!comment_ids.insert(cm.comment_id).second) integrity("duplicate comment_id '" + cm.comment_id + "'");
    if (!c.video_index_.count(cm.video_id))
      integrity("comment '" + cm.comment_id + "' is on unknown video '" + cm.video_id + "'");
    if (!c.user_index_.count(cm.author_id))
      integrity("comment '" + cm.comment_id + "' has unknown author '" + cm.author_id + "'");
    c.comments_by_video_[cm.video_id].push_back(i);
    c.comments_by_author_[cm.author_id].push_back(i);
  }
  return c;
}

const VideoRecord* Corpus::find_video(std::string_view id) const {
  auto it = video_index_.find(std::string(id));
  return it == video_index_.end() ? nullptr : &videos_[it->second];
}

const UserRecord* Corpus::find_user(std::string_view id) const {
  auto it = user_index_.find(std::string(id));
  return it == user_index_.end() ? nullptr : &users_[it->second];
}

const std::vector<std::size_t>& Corpus::videos_of(std::string_view user_id) const {
  auto it = videos_by_uploader_.find(std::string(user_id));
  return it == videos_by_uploader_.end() ? kNoIndices : it->second;
}

const std::vector<std::size_t>& Corpus::comments_on(std::string_view video_id) const {
  auto it = comments_by_video_.find(std::string(video_id));
  return it == comments_by_video_.end() ? kNoIndices : it->second;
}

const std::vector<std::size_t>& Corpus::comments_by(std::string_view user_id) const {
  auto it = comments_by_author_.find(std::string(user_id));
  return it == comments_by_author_.end() ? kNoIndices : it->second;
}

std::vector<std::string> Corpus::uploader_ids() const {
  std::vector<std::string> ids;
  ids.reserve(videos_by_uploader_.size());
  for (const auto& [id, _] : videos_by_uploader_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::string> Corpus::commenter_ids() const {
  std::vector<std::string> ids;
  ids.reserve(comments_by_author_.size());
  for (const auto& [id, _] : comments_by_author_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

Corpus parse_corpus(std::istream& in, std::string_view source_name) {
  std::vector<VideoRecord> videos;
  std::vector<UserRecord> users;
  std::vector<CommentRecord> comments;

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      parse_fail(source_name, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) parse_fail(source_name, line_no, "record must be a JSON object");
    if (!header_seen) {
      auto fmt = j.find("format");
      auto ver = j.find("format_version");
      if (fmt == j.end() || *fmt != "safewatch-corpus" || ver == j.end() || !ver->is_number_integer())
        parse_fail(source_name, line_no, "missing corpus header {\"format\":\"safewatch-corpus\",\"format_version\":N}");
      if (ver->get<int>() != kCorpusFormatVersion)
        parse_fail(source_name, line_no, "unsupported format_version " + std::to_string(ver->get<int>()));
      header_seen = true;
      continue;
    }
    if (j.size() != 1) parse_fail(source_name, line_no, "record must have exactly one of video/user/comment");
    try {
      if (auto it = j.find("video"); it != j.end()) {
        videos.push_back(video_from_json(*it));
      } else if (auto it = j.find("user"); it != j.end()) {
        users.push_back(user_from_json(*it));
      } else if (auto it = j.find("comment"); it != j.end()) {
        comments.push_back(comment_from_json(*it));
      } else {
        parse_fail(source_name, line_no, "unknown record type '" + j.begin().key() + "'");
      }
    } catch (const FieldError& e) {
      parse_fail(source_name, line_no, e.what());
    } catch (const json::exception& e) {
      parse_fail(source_name, line_no, e.what());
    }
  }
  if (!header_seen) parse_fail(source_name, line_no, "empty corpus file (no header)");
  return Corpus::build(std::move(videos), std::move(users), std::move(comments));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "corpus", "cannot open corpus file '" + path.string() + "'");
  return parse_corpus(in, path.string());
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  out << json{{"format", "safewatch-corpus"}, {"format_version", kCorpusFormatVersion}}.dump() << '\n';
  for (const auto& u : corpus.users()) out << json{{"user", user_to_json(u)}}.dump() << '\n';
  for (const auto& v : corpus.videos()) out << json{{"video", video_to_json(v)}}.dump() << '\n';
  for (const auto& c : corpus.comments()) out << json{{"comment", comment_to_json(c)}}.dump() << '\n';
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Parse, "corpus", "cannot write corpus file '" + path.string() + "'");
  write_corpus(out, corpus);
}

Lexicon parse_lexicon(std::istream& in, std::string_view source_name) {
  Lexicon lex;
  std::set<std::string>* section = &lex.bad_words;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string token = trim(line);
    if (token.empty()) continue;
    if (token.front() == '#') {
      if (token == "#bad") {
        section = &lex.bad_words;
      } else if (token == "#positive") {
        section = &lex.positive_words;
      } else if (token == "#negative") {
        section = &lex.negative_words;
      }
      continue;
    }
    if (std::any_of(token.begin(), token.end(), [](unsigned char ch) { return std::isspace(ch); })) {
      std::ostringstream os;
      os << source_name << ":" << line_no << ": lexicon entry '" << token << "' contains whitespace";
      throw Error(ErrorKind::Config, "corpus", os.str());
    }
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    section->insert(std::move(token));
  }
  if (lex.bad_words.empty())
    throw Error(ErrorKind::Config, "corpus", std::string(source_name) + ": lexicon has no bad words");
  for (const auto& w : lex.positive_words) {
    if (lex.negative_words.count(w))
      throw Error(ErrorKind::Config, "corpus",
                  std::string(source_name) + ": '" + w + "' is listed as both positive and negative");
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "corpus", "cannot open lexicon file '" + path.string() + "'");
  return parse_lexicon(in, path.string());
}

const Lexicon& default_lexicon() {
  static const Lexicon lex = [] {
    std::istringstream in{std::string(embedded::kLexiconText)};
    return parse_lexicon(in, "data/lexicon.txt");
  }();
  return lex;
}

}  // namespace safewatch
