#include "eventqa/vocab.hpp"

#include <cassert>

#include "eventqa/errors.hpp"

namespace eventqa {

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
  add("<bos>");
  add("<eos>");
  add("<s>");
  sep_id_ = add("</s>");
  semi_id_ = add(";");
  add("\n");
  add(":");
  for (RelationType t : {RelationType::Causal, RelationType::Conditional,
                         RelationType::Counterfactual, RelationType::Subevent,
                         RelationType::Coreference})
    add(relation_name(t));
}

Vocabulary Vocabulary::build(const std::vector<const Dataset*>& sets) {
  Vocabulary v;
  for (const Dataset* ds : sets) {
    for (const QAInstance& inst : ds->instances) {
      for (const std::string& t : inst.question) v.add(t);
      for (const std::string& t : inst.passage) v.add(t);
      for (const Answer& a : inst.answers)
        for (const Token& t : tokenize(a.text)) v.add(t.text);
    }
  }
  return v;
}

int Vocabulary::add(const std::string& tok) {
  auto it = index_.find(tok);
  if (it != index_.end()) return it->second;
  int id = static_cast<int>(tokens_.size());
  tokens_.push_back(tok);
  index_.emplace(tok, id);
  return id;
}

int Vocabulary::id(const std::string& tok) const {
  auto it = index_.find(tok);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& tok) const { return index_.count(tok) > 0; }

const std::string& Vocabulary::token(int id) const {
  assert(id >= 0 && id < size());
  return tokens_[static_cast<size_t>(id)];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& toks) const {
  std::vector<int> out;
  out.reserve(toks.size());
  for (const std::string& t : toks) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  if (tokens.size() < v.tokens_.size())
    throw ParseError("vocabulary token list is shorter than the special-token set");
  for (size_t i = 0; i < v.tokens_.size(); ++i) {
    if (tokens[i] != v.tokens_[i])
      throw ParseError("vocabulary special tokens do not match this build");
  }
  for (size_t i = v.tokens_.size(); i < tokens.size(); ++i) v.add(tokens[i]);
  return v;
}

}  // namespace eventqa
