#ifndef EVENTQA_VOCAB_HPP
#define EVENTQA_VOCAB_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "eventqa/corpus.hpp"

namespace eventqa {

// Token <-> dense id map. Ids are assigned in insertion order, specials first,
// so a vocabulary rebuilt from the same corpus is identical.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  Vocabulary();

  static Vocabulary build(const std::vector<const Dataset*>& sets);

  int add(const std::string& tok);
  int id(const std::string& tok) const;  // kUnk when absent
  bool contains(const std::string& tok) const;
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  int sep_id() const { return sep_id_; }        // "</s>"
  int answer_sep_id() const { return semi_id_; }  // ";"

  std::vector<int> encode(const std::vector<std::string>& toks) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  const std::vector<std::string>& tokens() const { return tokens_; }
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int sep_id_ = 0;
  int semi_id_ = 0;
};

}  // namespace eventqa

#endif  // EVENTQA_VOCAB_HPP
