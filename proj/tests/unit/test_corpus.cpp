#include <doctest.h>

#include <sstream>
#include <string>

#include "safewatch/corpus.hpp"
#include "safewatch/error.hpp"
#include "safewatch/synth.hpp"
#include "support/fixtures.hpp"

using namespace safewatch;

namespace {

const std::string kHeader = "{\"format\":\"safewatch-corpus\",\"format_version\":1}\n";

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in, "t.jsonl");
}

template <typename F>
Error catch_error(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected safewatch::Error");
  return Error(ErrorKind::Internal, "", "");
}

Lexicon lexicon(const std::string& text) {
  std::istringstream in(text);
  return parse_lexicon(in, "lex.txt");
}

}  // namespace

TEST_CASE("minimal corpus: one video, its uploader, no comments") {
  const Corpus c = parse(kHeader + R"({"user":{"user_id":"u1","roles":["uploader"]}}
{"video":{"video_id":"v1","uploader_id":"u1"}}
)");
  CHECK(c.videos().size() == 1);
  CHECK(c.users().size() == 1);
  CHECK(c.comments().empty());
  CHECK(c.uploader_ids() == std::vector<std::string>{"u1"});
  CHECK(c.commenter_ids().empty());
}

TEST_CASE("duplicate video id is an integrity error naming the id") {
  const auto e = catch_error([] {
    parse(kHeader + R"({"user":{"user_id":"u1"}}
{"video":{"video_id":"v1","uploader_id":"u1"}}
{"video":{"video_id":"v1","uploader_id":"u1"}}
)");
  });
  CHECK(e.kind() == ErrorKind::Integrity);
  CHECK(std::string(e.what()).find("v1") != std::string::npos);
}

TEST_CASE("referential integrity") {
  SUBCASE("unknown uploader") {
    const auto e = catch_error([] { parse(kHeader + R"({"video":{"video_id":"v1","uploader_id":"ghost"}})" "\n"); });
    CHECK(e.kind() == ErrorKind::Integrity);
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
  SUBCASE("untagged dangling reference") {
    const auto e = catch_error([] {
      parse(kHeader + R"({"user":{"user_id":"u1","liked_video_ids":["nowhere"]}})" "\n");
    });
    CHECK(e.kind() == ErrorKind::Integrity);
    CHECK(std::string(e.what()).find("nowhere") != std::string::npos);
  }
  SUBCASE("external references are allowed") {
    const Corpus c = parse(kHeader + R"({"user":{"user_id":"u1","liked_video_ids":[{"id":"nowhere","external":true}]}})" "\n");
    REQUIRE(c.users().size() == 1);
    CHECK(c.users()[0].liked_videos[0].external);
  }
  SUBCASE("self subscription") {
    const auto e = catch_error([] { parse(kHeader + R"({"user":{"user_id":"u1","subscribed_user_ids":["u1"]}})" "\n"); });
    CHECK(e.kind() == ErrorKind::Integrity);
  }
  SUBCASE("video lists itself as related") {
    const auto e = catch_error([] {
      parse(kHeader + R"({"user":{"user_id":"u1"}}
{"video":{"video_id":"v1","uploader_id":"u1","related_ids":["v1"]}}
)");
    });
    CHECK(e.kind() == ErrorKind::Integrity);
  }
  SUBCASE("duplicate related entry") {
    const auto e = catch_error([] {
      parse(kHeader + R"({"user":{"user_id":"u1"}}
{"video":{"video_id":"v1","uploader_id":"u1","related_ids":[{"id":"x","external":true},{"id":"x","external":true}]}}
)");
    });
    CHECK(e.kind() == ErrorKind::Integrity);
  }
  SUBCASE("comment on unknown video") {
    const auto e = catch_error([] {
      parse(kHeader + R"({"user":{"user_id":"u1"}}
{"comment":{"comment_id":"c1","video_id":"v9","author_id":"u1","text":"hi"}}
)");
    });
    CHECK(e.kind() == ErrorKind::Integrity);
  }
}

TEST_CASE("parse errors carry a line locator") {
  SUBCASE("bad json") {
    const auto e = catch_error([] { parse(kHeader + "{\"user\":\n"); });
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("t.jsonl:2") != std::string::npos);
  }
  SUBCASE("negative count") {
    const auto e = catch_error([] { parse(kHeader + R"({"user":{"user_id":"u1","total_views":-3}})" "\n"); });
    CHECK(e.kind() == ErrorKind::Parse);
  }
  SUBCASE("missing header") {
    const auto e = catch_error([] { parse(R"({"user":{"user_id":"u1"}})" "\n"); });
    CHECK(e.kind() == ErrorKind::Parse);
  }
  SUBCASE("empty file") {
    const auto e = catch_error([] { parse(""); });
    CHECK(e.kind() == ErrorKind::Parse);
  }
  SUBCASE("two record keys") {
    const auto e = catch_error([] { parse(kHeader + R"({"user":{"user_id":"u1"},"video":{}})" "\n"); });
    CHECK(e.kind() == ErrorKind::Parse);
  }
}

TEST_CASE("fixture corpus indexes") {
  const Corpus c = fixture::three_videos();
  CHECK(c.videos().size() == 3);
  CHECK(c.comments().size() == 4);
  CHECK(c.videos_of("alice").size() == 2);
  CHECK(c.comments_on("v1").size() == 4);
  CHECK(c.comments_on("v2").empty());
  CHECK(c.comments_by("dina").size() == 2);
  CHECK(c.uploader_ids() == std::vector<std::string>{"alice", "bob"});
  CHECK(c.commenter_ids() == std::vector<std::string>{"carl", "dina"});
  REQUIRE(c.find_video("v2") != nullptr);
  CHECK(c.find_video("v2")->label == Safety::Unsafe);
  CHECK(c.find_user("alice")->circled_by_count == 9u);
  CHECK_FALSE(c.find_user("alice")->plus_one_count.has_value());
  CHECK(c.comments()[3].sentiment == Sentiment::Positive);
}

TEST_CASE("write then parse round-trips") {
  const Corpus c = fixture::three_videos();
  std::ostringstream out;
  write_corpus(out, c);
  const Corpus back = parse(out.str());
  CHECK(back == c);
  std::ostringstream again;
  write_corpus(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("synthetic corpus survives a save/load round trip") {
  const auto gen = generate(preset("tiny", 3));
  std::ostringstream out;
  write_corpus(out, gen.corpus);
  CHECK(parse(out.str()) == gen.corpus);
}

TEST_CASE("lexicon parsing") {
  SUBCASE("case folding") {
    const Lexicon lex = lexicon("Stupid\nIDIOT\n");
    CHECK(lex.bad_words == std::set<std::string>{"stupid", "idiot"});
  }
  SUBCASE("dedup") { CHECK(lexicon("idiot\nidiot\n").bad_words.size() == 1); }
  SUBCASE("empty file is a configuration error") {
    const auto e = catch_error([] { lexicon(""); });
    CHECK(e.kind() == ErrorKind::Config);
  }
  SUBCASE("sections") {
    const Lexicon lex = lexicon("# comment\nbad1\n#positive\nGood\n#negative\nugly\n#bad\nbad2\n");
    CHECK(lex.bad_words == std::set<std::string>{"bad1", "bad2"});
    CHECK(lex.positive_words == std::set<std::string>{"good"});
    CHECK(lex.negative_words == std::set<std::string>{"ugly"});
  }
  SUBCASE("word in both polarity lists") {
    const auto e = catch_error([] { lexicon("x\n#positive\nmeh\n#negative\nmeh\n"); });
    CHECK(e.kind() == ErrorKind::Config);
  }
  SUBCASE("entry with inner whitespace") {
    const auto e = catch_error([] { lexicon("two words\n"); });
    CHECK(e.kind() == ErrorKind::Config);
  }
  SUBCASE("default lexicon is usable") {
    const Lexicon& lex = default_lexicon();
    CHECK(lex.bad_words.count("stupid") == 1);
    CHECK(lex.positive_words.count("good") == 1);
    CHECK(lex.negative_words.count("bad") == 1);
  }
}
