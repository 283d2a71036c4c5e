#ifndef EVENTQA_BACKBONE_HPP
#define EVENTQA_BACKBONE_HPP

#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "eventqa/rng.hpp"
#include "eventqa/tape.hpp"
#include "eventqa/vocab.hpp"

namespace eventqa {

struct BackboneConfig {
  int hidden_dim = 64;  // d
  int encoder_blocks = 2;
  int encoder_heads = 4;
  int ffn_dim = 128;
  int max_seq_len = 192;
  int constraint_heads = 8;  // attention used by the sentence constraint
};

// Owns named parameters with stable addresses (leaves keep Param pointers).
class ParamStore {
 public:
  Param& add(const std::string& name, int rows, int cols, Rng& rng, double init_std,
             bool decay = true);
  Param& add_const(const std::string& name, int rows, int cols, double fill, bool decay);
  Param* find(const std::string& name);
  std::deque<Param>& all() { return params_; }
  const std::deque<Param>& all() const { return params_; }
  void zero_grads();

 private:
  std::deque<Param> params_;
};

// Per-token hidden states for one built input, plus where the passage lives.
struct EncoderOutput {
  Var hidden;  // N_x x d
};

// Teacher-forced per-step vocabulary distributions.
struct VocabDistribution {
  Var probs;  // T x V, rows on the simplex
};

// Two self-attention blocks over learned token + position embeddings.
class TransformerEncoder {
 public:
  TransformerEncoder(ParamStore& store, const std::string& prefix, int vocab_size,
                     const BackboneConfig& cfg, Rng& rng);

  // Unknown tokens should be mapped to the <unk> id by the caller's vocabulary.
  Var encode(Tape& t, const std::vector<int>& ids) const;

  const BackboneConfig& config() const { return cfg_; }

 private:
  struct Block {
    Param *wq, *wk, *wv, *wo;
    Param *ln1_g, *ln1_b;
    Param *ff_w1, *ff_b1, *ff_w2, *ff_b2;
    Param *ln2_g, *ln2_b;
  };
  Var self_attention(Tape& t, Var x, const Block& b) const;
  Var feed_forward(Tape& t, Var x, const Block& b) const;

  BackboneConfig cfg_;
  Param *tok_emb_, *pos_emb_;
  std::vector<Block> blocks_;
};

// Per-token {O, I} scores over the passage region of an encoded input.
class TokenIOHead {
 public:
  static constexpr int kO = 0;
  static constexpr int kI = 1;

  TokenIOHead(ParamStore& store, const std::string& prefix, const BackboneConfig& cfg, Rng& rng);
  // enc: N_x x d; returns P x 2 logits for passage rows [first, last).
  Var logits(Tape& t, Var enc, int passage_first, int passage_last) const;

 private:
  Param *w_, *b_;
};

// Single cross-attention block: queries from the previous target token and its
// position, keys/values from the encoder states. Rows are independent, so a
// teacher-forced pass and stepwise decoding agree exactly.
class CrossAttnDecoder {
 public:
  CrossAttnDecoder(ParamStore& store, const std::string& prefix, int vocab_size,
                   const BackboneConfig& cfg, int max_gen_len, Rng& rng);

  // Probability rows for target positions [0, T): row t is conditioned on
  // target_in[t] (= <bos> for t = 0, else gold token t-1) and the encoder.
  Var teacher_forced(Tape& t, Var enc, const std::vector<int>& target_in) const;

  // One probability row for the next position given the prefix decoded so far.
  Var step(Tape& t, Var enc, const std::vector<int>& prefix) const;

  int max_gen_len() const { return max_gen_len_; }

 private:
  Var forward_rows(Tape& t, Var enc, const std::vector<int>& in_ids, int pos_offset) const;

  BackboneConfig cfg_;
  int max_gen_len_;
  Param *tok_emb_, *pos_emb_;
  Param *wq_, *wk_, *wv_, *wo_;
  Param *ln1_g_, *ln1_b_;
  Param *ff_w1_, *ff_b1_, *ff_w2_, *ff_b2_;
  Param *ln2_g_, *ln2_b_;
  Param *out_w_, *out_b_;
};

}  // namespace eventqa

#endif  // EVENTQA_BACKBONE_HPP
