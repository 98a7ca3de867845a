#pragma once

#include <sstream>
#include <string>

#include "safewatch/corpus.hpp"

namespace fixture {

// Three videos by two uploaders, four comments on v1. Expected feature values
// are worked out by hand in the tests.
inline const char* kThreeVideos = R"jsonl({"format":"safewatch-corpus","format_version":1}
{"user":{"user_id":"alice","roles":["uploader"],"total_videos":12,"total_views":3400,"total_comments":5,"subscriber_count":77,"channel_title":"Alice TV","channel_description":"Cartoons daily","age_days":400,"circled_by_count":9,"liked_video_ids":["v3",{"id":"yt-9","external":true},"v1"],"subscribed_user_ids":["bob",{"id":"ext-user","external":true}]}}
{"user":{"user_id":"bob","roles":["uploader"],"total_videos":1,"total_views":10,"total_comments":0,"subscriber_count":2,"channel_title":"","channel_description":"","age_days":3,"playlist_video_ids":["v1"]}}
{"user":{"user_id":"carl","roles":["commenter"]}}
{"user":{"user_id":"dina","roles":["commenter"],"subscribed_user_ids":["alice"]}}
{"video":{"video_id":"v1","uploader_id":"alice","title":"Tom and Jerry Episode 18","description":"Tom and Jerry fun? Visit https://www.example.com :) :-) why??","duration_s":300,"age_days":10,"view_count":1000,"like_count":50,"dislike_count":0,"comment_count":4,"video_type":2,"related_ids":["v2",{"id":"yt-1","external":true},"v3"],"label":"safe"}}
{"video":{"video_id":"v2","uploader_id":"alice","title":"Stupid prank 😀 idiot!","description":"","duration_s":60,"age_days":20,"view_count":10,"like_count":5,"dislike_count":10,"comment_count":0,"video_type":1,"related_ids":["v1"],"label":"unsafe"}}
{"video":{"video_id":"v3","uploader_id":"bob","title":"","description":"WWW.kids.com and http://a.b www.c","duration_s":0,"age_days":0,"view_count":0,"like_count":7,"dislike_count":0,"comment_count":0,"related_ids":["v2"],"label":"unsafe"}}
{"comment":{"comment_id":"c1","video_id":"v1","author_id":"carl","text":"great video :)","like_count":3,"reply_count":1}}
{"comment":{"comment_id":"c2","video_id":"v1","author_id":"dina","text":"this is stupid and bad","like_count":0,"reply_count":2}}
{"comment":{"comment_id":"c3","video_id":"v1","author_id":"carl","text":"ok","like_count":4,"reply_count":0}}
{"comment":{"comment_id":"c4","video_id":"v1","author_id":"dina","text":"I hate it","like_count":1,"reply_count":0,"sentiment":"positive"}}
)jsonl";

inline safewatch::Corpus three_videos() {
  std::istringstream in(kThreeVideos);
  return safewatch::parse_corpus(in, "fixture");
}

}  // namespace fixture
