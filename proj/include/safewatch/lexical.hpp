#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "safewatch/corpus.hpp"

namespace safewatch {

/// Multiset of lowercase whitespace-delimited tokens.
struct TokenBag {
  std::vector<std::string> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  friend bool operator==(const TokenBag&, const TokenBag&) = default;
};

/// Splits on whitespace runs and lowercases (ASCII). No other normalization.
TokenBag tokenize(std::string_view text);

/// Form used for lexicon lookup: the token with trailing `.,!?;:` removed.
std::string_view lookup_form(std::string_view token) noexcept;

/// Tokens (with multiplicity) whose lookup form is a bad word.
std::size_t bad_word_count(const TokenBag& bag, const Lexicon& lex);

/// |A ∩ B| / |A ∪ B| over distinct tokens; 0 when both are empty.
double jaccard(const TokenBag& a, const TokenBag& b);

/// |A ∩ B| over distinct tokens.
std::size_t common_word_count(const TokenBag& a, const TokenBag& b);

struct MarkCounts {
  std::size_t question_marks = 0;
  std::size_t hyperlinks = 0;
  std::size_t emoticons = 0;

  friend bool operator==(const MarkCounts&, const MarkCounts&) = default;
};

/// Counts `?` characters, hyperlink markers and emoticons.
///
/// Hyperlinks: case-insensitive, non-overlapping left-to-right matches of
/// `http://`, `https://` or `www.`. A URL written as `https://www.x` therefore
/// counts twice. Emoticons: case-sensitive, longest match at each position,
/// from the list in data/emoticons.txt.
MarkCounts count_marks(std::string_view text);

/// The emoticon list (data/emoticons.txt), longest first.
const std::vector<std::string>& emoticons();

/// Positive if positive-word hits exceed negative hits, Negative if the
/// reverse, Neutral otherwise.
Sentiment sentiment(std::string_view text, const Lexicon& lex);

/// Precomputed sentiment when the comment carries one, lexicon score otherwise.
Sentiment comment_sentiment(const CommentRecord& comment, const Lexicon& lex);

/// Number of Unicode code points in a UTF-8 string.
std::size_t char_length(std::string_view utf8) noexcept;

}  // namespace safewatch
