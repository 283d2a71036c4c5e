#include "eventqa/tokenizer.hpp"

#include <cctype>

namespace eventqa {

namespace {

bool is_space_byte(unsigned char c) { return std::isspace(c) != 0; }

bool is_punct_byte(unsigned char c) { return c < 128 && std::ispunct(c) != 0; }

}  // namespace

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int n = static_cast<int>(text.size());
  int i = 0;
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[static_cast<size_t>(i)]);
    if (is_space_byte(c)) {
      ++i;
      continue;
    }
    if (is_punct_byte(c)) {
      out.push_back(Token{std::string(1, static_cast<char>(c)), i, i + 1});
      ++i;
      continue;
    }
    int j = i;
    while (j < n) {
      unsigned char cj = static_cast<unsigned char>(text[static_cast<size_t>(j)]);
      if (is_space_byte(cj) || is_punct_byte(cj)) break;
      ++j;
    }
    out.push_back(Token{text.substr(static_cast<size_t>(i), static_cast<size_t>(j - i)), i, j});
    i = j;
  }
  return out;
}

std::vector<std::string> token_texts(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.text);
  return out;
}

std::optional<std::pair<int, int>> char_span_to_tokens(const std::vector<Token>& tokens,
                                                       int begin, int end) {
  if (begin >= end) return std::nullopt;
  int first = -1, last = -1;
  for (int k = 0; k < static_cast<int>(tokens.size()); ++k) {
    const Token& t = tokens[static_cast<size_t>(k)];
    if (t.char_begin == begin) first = k;
    if (t.char_end == end) last = k + 1;
  }
  if (first < 0 || last < 0 || first >= last) return std::nullopt;
  return std::make_pair(first, last);
}

std::string join_tokens(const std::vector<std::string>& tokens, int first, int last) {
  std::string out;
  for (int k = first; k < last; ++k) {
    if (k > first) out += ' ';
    out += tokens[static_cast<size_t>(k)];
  }
  return out;
}

}  // namespace eventqa
