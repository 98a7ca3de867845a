#pragma once

#include <string>
#include <vector>

#include "safewatch/corpus.hpp"

namespace fixture {

// Small programmatic corpora for graph and detection tests.
struct Builder {
  std::vector<safewatch::VideoRecord> videos;
  std::vector<safewatch::UserRecord> users;
  std::vector<safewatch::CommentRecord> comments;

  safewatch::UserRecord& user(const std::string& id) {
    for (auto& u : users) {
      if (u.user_id == id) return u;
    }
    safewatch::UserRecord u;
    u.user_id = id;
    users.push_back(u);
    return users.back();
  }

  safewatch::VideoRecord& video(const std::string& id, const std::string& uploader,
                                safewatch::Safety label = safewatch::Safety::Safe) {
    user(uploader).is_uploader = true;
    safewatch::VideoRecord v;
    v.video_id = id;
    v.uploader_id = uploader;
    v.label = label;
    videos.push_back(v);
    return videos.back();
  }

  void related(const std::string& from, std::vector<safewatch::Ref> refs) {
    for (auto& v : videos) {
      if (v.video_id == from) v.related = std::move(refs);
    }
  }

  void comment(const std::string& video_id, const std::string& author, const std::string& text) {
    user(author).is_commenter = true;
    safewatch::CommentRecord c;
    c.comment_id = "c" + std::to_string(comments.size());
    c.video_id = video_id;
    c.author_id = author;
    c.text = text;
    comments.push_back(c);
  }

  safewatch::Corpus build() const { return safewatch::Corpus::build(videos, users, comments); }
};

inline safewatch::Ref ref(std::string id) { return {std::move(id), false}; }
inline safewatch::Ref ext(std::string id) { return {std::move(id), true}; }

}  // namespace fixture
