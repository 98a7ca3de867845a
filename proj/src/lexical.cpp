#include "safewatch/lexical.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <sstream>

#include "embedded_data.hpp"

namespace safewatch {

namespace {

bool is_space(char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; }

char lower(char ch) { return static_cast<char>(std::tolower(static_cast<unsigned char>(ch))); }

std::set<std::string_view> distinct(const TokenBag& bag) {
  return {bag.tokens.begin(), bag.tokens.end()};
}

bool starts_with_nocase(std::string_view text, std::size_t pos, std::string_view pattern) {
  if (text.size() - pos < pattern.size()) return false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (lower(text[pos + i]) != pattern[i]) return false;
  }
  return true;
}

}  // namespace

TokenBag tokenize(std::string_view text) {
  TokenBag bag;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) {
      std::string tok(text.substr(start, i - start));
      std::transform(tok.begin(), tok.end(), tok.begin(), lower);
      bag.tokens.push_back(std::move(tok));
    }
  }
  return bag;
}

std::string_view lookup_form(std::string_view token) noexcept {
  constexpr std::string_view kTrailing = ".,!?;:";
  while (!token.empty() && kTrailing.find(token.back()) != std::string_view::npos) token.remove_suffix(1);
  return token;
}

std::size_t bad_word_count(const TokenBag& bag, const Lexicon& lex) {
  std::size_t n = 0;
  for (const auto& tok : bag.tokens) {
    if (lex.bad_words.count(std::string(lookup_form(tok)))) ++n;
  }
  return n;
}

double jaccard(const TokenBag& a, const TokenBag& b) {
  const auto sa = distinct(a);
  const auto sb = distinct(b);
  const std::size_t inter = common_word_count(a, b);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::size_t common_word_count(const TokenBag& a, const TokenBag& b) {
  const auto sa = distinct(a);
  const auto sb = distinct(b);
  std::size_t n = 0;
  for (const auto& tok : sa) n += sb.count(tok);
  return n;
}

const std::vector<std::string>& emoticons() {
  static const std::vector<std::string> list = [] {
    std::vector<std::string> out;
    std::istringstream in{std::string(embedded::kEmoticonsText)};
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && is_space(line.back())) line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      out.push_back(line);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    return out;
  }();
  return list;
}

MarkCounts count_marks(std::string_view text) {
  MarkCounts counts;
  counts.question_marks = static_cast<std::size_t>(std::count(text.begin(), text.end(), '?'));

  constexpr std::array<std::string_view, 3> kLinkMarkers = {"https://", "http://", "www."};
  for (std::size_t i = 0; i < text.size();) {
    std::size_t matched = 0;
    for (auto marker : kLinkMarkers) {
      if (starts_with_nocase(text, i, marker)) {
        matched = marker.size();
        break;
      }
    }
    if (matched) {
      ++counts.hyperlinks;
      i += matched;
    } else {
      ++i;
    }
  }

  const auto& list = emoticons();
  for (std::size_t i = 0; i < text.size();) {
    std::size_t matched = 0;
    for (const auto& e : list) {
      if (text.substr(i, e.size()) == e) {
        matched = e.size();
        break;
      }
    }
    if (matched) {
      ++counts.emoticons;
      i += matched;
    } else {
      ++i;
    }
  }
  return counts;
}

Sentiment sentiment(std::string_view text, const Lexicon& lex) {
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (const auto& tok : tokenize(text).tokens) {
    const std::string key(lookup_form(tok));
    pos += lex.positive_words.count(key);
    neg += lex.negative_words.count(key);
  }
  if (pos > neg) return Sentiment::Positive;
  if (neg > pos) return Sentiment::Negative;
  return Sentiment::Neutral;
}

Sentiment comment_sentiment(const CommentRecord& comment, const Lexicon& lex) {
  return comment.sentiment ? *comment.sentiment : sentiment(comment.text, lex);
}

std::size_t char_length(std::string_view utf8) noexcept {
  return static_cast<std::size_t>(std::count_if(utf8.begin(), utf8.end(), [](char ch) {
    return (static_cast<unsigned char>(ch) & 0xC0) != 0x80;
  }));
}

}  // namespace safewatch
