#include <doctest.h>

#include <string>
#include <vector>

#include "safewatch/lexical.hpp"
#include "safewatch/rng.hpp"
#include "support/oracles.hpp"

using namespace safewatch;

namespace {

Lexicon lex_of(std::set<std::string> bad, std::set<std::string> pos = {}, std::set<std::string> neg = {}) {
  return Lexicon{std::move(bad), std::move(pos), std::move(neg)};
}

std::vector<std::string> sorted_tokens(std::string_view text) {
  auto t = tokenize(text).tokens;
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(sorted_tokens("Tom AND Jerry") == std::vector<std::string>{"and", "jerry", "tom"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t\n").empty());
  CHECK(tokenize("a  b\tb").tokens == std::vector<std::string>{"a", "b", "b"});
}

TEST_CASE("bad word count") {
  const Lexicon lex = lex_of({"stupid"});
  CHECK(bad_word_count(tokenize("you are stupid"), lex) == 1);
  CHECK(bad_word_count(tokenize("stupid stupid"), lex) == 2);
  CHECK(bad_word_count(tokenize("STUPID! so stupid."), lex) == 2);
  CHECK(bad_word_count(tokenize("stupidity"), lex) == 0);
  CHECK(bad_word_count(tokenize(""), lex) == 0);
}

TEST_CASE("bad word count agrees with a naive scanner on random text") {
  const Lexicon& lex = default_lexicon();
  const std::vector<std::string> pool = {"stupid", "Idiot!", "tom", "jerry", "HELL", "hello", "sexy.", "kids",
                                         "damn?",  "ok",     ":)",  "www.x", "crap,", "fine"};
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    for (int k = 0; k < 20; ++k) {
      text += pool[rng.below(pool.size())];
      text += rng.bernoulli(0.2) ? "\t" : (rng.bernoulli(0.1) ? "  " : " ");
    }
    CHECK(bad_word_count(tokenize(text), lex) == oracle::bad_words(text, lex.bad_words));
  }
}

TEST_CASE("jaccard and common words") {
  CHECK(jaccard(tokenize("a b c"), tokenize("b c d")) == 0.5);
  CHECK(jaccard(tokenize("x y"), tokenize("x y")) == 1.0);
  CHECK(jaccard(tokenize(""), tokenize("")) == 0.0);
  CHECK(jaccard(tokenize("a"), tokenize("")) == 0.0);
  CHECK(jaccard(tokenize("a a b"), tokenize("a")) == 0.5);
  CHECK(common_word_count(tokenize("a a b c"), tokenize("c a z")) == 2);
}

TEST_CASE("marks") {
  CHECK(count_marks("what? see http://x.com :)") == MarkCounts{1, 1, 1});
  CHECK(count_marks("") == MarkCounts{0, 0, 0});
  CHECK(count_marks("https://www.example.com").hyperlinks == 2);
  CHECK(count_marks("HTTP://A WWW.B").hyperlinks == 2);
  CHECK(count_marks(":-) :)").emoticons == 2);
  CHECK(count_marks(":-D").emoticons == 1);  // longest match, not ":-" then "D"
  CHECK(count_marks("xd").emoticons == 0);   // case-sensitive
  CHECK(count_marks("???").question_marks == 3);
}

TEST_CASE("marks agree with a naive counter on random concatenations") {
  const std::vector<std::string> parts = {"what?", " ", "http://", "HTTPS://", "www.", "x", ".com", "??", "kids",
                                          "ww",    "w.", "http:/", "/", "ok"};
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::string text;
    const auto n = rng.between(0, 12);
    for (std::int64_t k = 0; k < n; ++k) text += parts[rng.below(parts.size())];
    const MarkCounts m = count_marks(text);
    CHECK(m.question_marks == oracle::count_char(text, '?'));
    CHECK(m.hyperlinks == oracle::count_links(text));
  }
}

TEST_CASE("emoticon list is longest first") {
  const auto& e = emoticons();
  REQUIRE_FALSE(e.empty());
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i - 1].size() >= e[i].size());
}

TEST_CASE("sentiment") {
  const Lexicon lex = lex_of({"x"}, {"good"}, {"bad"});
  CHECK(sentiment("good good bad", lex) == Sentiment::Positive);
  CHECK(sentiment("", lex) == Sentiment::Neutral);
  CHECK(sentiment("bad", lex) == Sentiment::Negative);
  CHECK(sentiment("good bad", lex) == Sentiment::Neutral);
  CHECK(sentiment("GOOD!", lex) == Sentiment::Positive);

  CommentRecord c;
  c.text = "bad";
  CHECK(comment_sentiment(c, lex) == Sentiment::Negative);
  c.sentiment = Sentiment::Positive;
  CHECK(comment_sentiment(c, lex) == Sentiment::Positive);
}

TEST_CASE("char length counts code points") {
  CHECK(char_length("") == 0);
  CHECK(char_length("abc") == 3);
  CHECK(char_length("caf\xc3\xa9") == 4);
  CHECK(char_length("\xf0\x9f\x98\x80") == 1);
}
