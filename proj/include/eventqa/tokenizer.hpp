#ifndef EVENTQA_TOKENIZER_HPP
#define EVENTQA_TOKENIZER_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace eventqa {

struct Token {
  std::string text;
  int char_begin = 0;  // offsets into the source string
  int char_end = 0;
};

// Deterministic whitespace + punctuation tokenizer. ASCII punctuation splits
// into single-character tokens; everything else groups between whitespace.
// Multi-byte UTF-8 sequences are never punctuation, so they stay in words.
std::vector<Token> tokenize(const std::string& text);

std::vector<std::string> token_texts(const std::vector<Token>& tokens);

// Maps a character span [begin, end) onto token indices [first, last).
// Returns nullopt when the span does not align with token boundaries.
std::optional<std::pair<int, int>> char_span_to_tokens(const std::vector<Token>& tokens,
                                                       int begin, int end);

// Joins tokens [first, last) with single spaces.
std::string join_tokens(const std::vector<std::string>& tokens, int first, int last);

}  // namespace eventqa

#endif  // EVENTQA_TOKENIZER_HPP
