#include "eventqa/backbone.hpp"

#include <cmath>

#include "eventqa/errors.hpp"

namespace eventqa {

Param& ParamStore::add(const std::string& name, int rows, int cols, Rng& rng, double init_std,
                       bool decay) {
  Mat m(rows, cols);
  for (double& x : m.a) x = rng.normal(0.0, init_std);
  params_.emplace_back(name, std::move(m), decay);
  return params_.back();
}

Param& ParamStore::add_const(const std::string& name, int rows, int cols, double fill,
                             bool decay) {
  params_.emplace_back(name, Mat(rows, cols, fill), decay);
  return params_.back();
}

Param* ParamStore::find(const std::string& name) {
  for (Param& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

void ParamStore::zero_grads() {
  for (Param& p : params_) p.grad.zero();
}

namespace {
constexpr double kInitStd = 0.02;
}

TransformerEncoder::TransformerEncoder(ParamStore& store, const std::string& prefix,
                                       int vocab_size, const BackboneConfig& cfg, Rng& rng)
    : cfg_(cfg) {
  if (cfg.hidden_dim % cfg.encoder_heads != 0)
    throw InvalidArgument("hidden_dim must be divisible by encoder_heads");
  tok_emb_ = &store.add(prefix + ".tok_emb", vocab_size, cfg.hidden_dim, rng, kInitStd);
  pos_emb_ = &store.add(prefix + ".pos_emb", cfg.max_seq_len, cfg.hidden_dim, rng, kInitStd);
  blocks_.resize(static_cast<size_t>(cfg.encoder_blocks));
  for (int b = 0; b < cfg.encoder_blocks; ++b) {
    std::string bp = prefix + ".block" + std::to_string(b);
    Block& blk = blocks_[static_cast<size_t>(b)];
    int d = cfg.hidden_dim;
    blk.wq = &store.add(bp + ".wq", d, d, rng, kInitStd);
    blk.wk = &store.add(bp + ".wk", d, d, rng, kInitStd);
    blk.wv = &store.add(bp + ".wv", d, d, rng, kInitStd);
    blk.wo = &store.add(bp + ".wo", d, d, rng, kInitStd);
    blk.ln1_g = &store.add_const(bp + ".ln1_g", 1, d, 1.0, false);
    blk.ln1_b = &store.add_const(bp + ".ln1_b", 1, d, 0.0, false);
    blk.ff_w1 = &store.add(bp + ".ff_w1", d, cfg.ffn_dim, rng, kInitStd);
    blk.ff_b1 = &store.add_const(bp + ".ff_b1", 1, cfg.ffn_dim, 0.0, true);
    blk.ff_w2 = &store.add(bp + ".ff_w2", cfg.ffn_dim, d, rng, kInitStd);
    blk.ff_b2 = &store.add_const(bp + ".ff_b2", 1, d, 0.0, true);
    blk.ln2_g = &store.add_const(bp + ".ln2_g", 1, d, 1.0, false);
    blk.ln2_b = &store.add_const(bp + ".ln2_b", 1, d, 0.0, false);
  }
}

Var TransformerEncoder::self_attention(Tape& t, Var x, const Block& b) const {
  int heads = cfg_.encoder_heads;
  int dh = cfg_.hidden_dim / heads;
  Var q = t.matmul(x, t.leaf(*b.wq));
  Var k = t.matmul(x, t.leaf(*b.wk));
  Var v = t.matmul(x, t.leaf(*b.wv));
  std::vector<Var> outs;
  outs.reserve(static_cast<size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    Var qh = t.slice_cols(q, h * dh, (h + 1) * dh);
    Var kh = t.slice_cols(k, h * dh, (h + 1) * dh);
    Var vh = t.slice_cols(v, h * dh, (h + 1) * dh);
    Var scores = t.scale(t.matmul(qh, t.transpose(kh)), 1.0 / std::sqrt(static_cast<double>(dh)));
    Var attn = t.softmax_rows(scores);
    outs.push_back(t.matmul(attn, vh));
  }
  return t.matmul(t.concat_cols(outs), t.leaf(*b.wo));
}

Var TransformerEncoder::feed_forward(Tape& t, Var x, const Block& b) const {
  Var h = t.tanh_op(t.add_rowvec(t.matmul(x, t.leaf(*b.ff_w1)), t.leaf(*b.ff_b1)));
  return t.add_rowvec(t.matmul(h, t.leaf(*b.ff_w2)), t.leaf(*b.ff_b2));
}

Var TransformerEncoder::encode(Tape& t, const std::vector<int>& ids) const {
  if (ids.empty()) throw InvalidArgument("cannot encode an empty input");
  if (static_cast<int>(ids.size()) > cfg_.max_seq_len)
    throw InvalidArgument("input length " + std::to_string(ids.size()) +
                          " exceeds max_seq_len " + std::to_string(cfg_.max_seq_len));
  std::vector<int> positions(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i);
  Var x = t.add(t.gather_rows(t.leaf(*tok_emb_), ids),
                t.gather_rows(t.leaf(*pos_emb_), positions));
  for (const Block& b : blocks_) {
    x = t.layer_norm(t.add(x, self_attention(t, x, b)), t.leaf(*b.ln1_g), t.leaf(*b.ln1_b));
    x = t.layer_norm(t.add(x, feed_forward(t, x, b)), t.leaf(*b.ln2_g), t.leaf(*b.ln2_b));
  }
  return x;
}

TokenIOHead::TokenIOHead(ParamStore& store, const std::string& prefix, const BackboneConfig& cfg,
                         Rng& rng) {
  w_ = &store.add(prefix + ".w", cfg.hidden_dim, 2, rng, kInitStd);
  b_ = &store.add_const(prefix + ".b", 1, 2, 0.0, true);
}

Var TokenIOHead::logits(Tape& t, Var enc, int passage_first, int passage_last) const {
  Var rows = t.slice_rows(enc, passage_first, passage_last);
  return t.add_rowvec(t.matmul(rows, t.leaf(*w_)), t.leaf(*b_));
}

CrossAttnDecoder::CrossAttnDecoder(ParamStore& store, const std::string& prefix, int vocab_size,
                                   const BackboneConfig& cfg, int max_gen_len, Rng& rng)
    : cfg_(cfg), max_gen_len_(max_gen_len) {
  int d = cfg.hidden_dim;
  tok_emb_ = &store.add(prefix + ".tok_emb", vocab_size, d, rng, kInitStd);
  pos_emb_ = &store.add(prefix + ".pos_emb", max_gen_len, d, rng, kInitStd);
  wq_ = &store.add(prefix + ".wq", d, d, rng, kInitStd);
  wk_ = &store.add(prefix + ".wk", d, d, rng, kInitStd);
  wv_ = &store.add(prefix + ".wv", d, d, rng, kInitStd);
  wo_ = &store.add(prefix + ".wo", d, d, rng, kInitStd);
  ln1_g_ = &store.add_const(prefix + ".ln1_g", 1, d, 1.0, false);
  ln1_b_ = &store.add_const(prefix + ".ln1_b", 1, d, 0.0, false);
  ff_w1_ = &store.add(prefix + ".ff_w1", d, cfg.ffn_dim, rng, kInitStd);
  ff_b1_ = &store.add_const(prefix + ".ff_b1", 1, cfg.ffn_dim, 0.0, true);
  ff_w2_ = &store.add(prefix + ".ff_w2", cfg.ffn_dim, d, rng, kInitStd);
  ff_b2_ = &store.add_const(prefix + ".ff_b2", 1, d, 0.0, true);
  ln2_g_ = &store.add_const(prefix + ".ln2_g", 1, d, 1.0, false);
  ln2_b_ = &store.add_const(prefix + ".ln2_b", 1, d, 0.0, false);
  out_w_ = &store.add(prefix + ".out_w", d, vocab_size, rng, kInitStd);
  out_b_ = &store.add_const(prefix + ".out_b", 1, vocab_size, 0.0, true);
}

Var CrossAttnDecoder::forward_rows(Tape& t, Var enc, const std::vector<int>& in_ids,
                                   int pos_offset) const {
  if (pos_offset + static_cast<int>(in_ids.size()) > max_gen_len_)
    throw InvalidArgument("decoder prefix exceeds max generation length " +
                          std::to_string(max_gen_len_));
  std::vector<int> positions(in_ids.size());
  for (size_t i = 0; i < in_ids.size(); ++i) positions[i] = pos_offset + static_cast<int>(i);
  Var x = t.add(t.gather_rows(t.leaf(*tok_emb_), in_ids),
                t.gather_rows(t.leaf(*pos_emb_), positions));

  int heads = cfg_.encoder_heads;
  int dh = cfg_.hidden_dim / heads;
  Var q = t.matmul(x, t.leaf(*wq_));
  Var k = t.matmul(enc, t.leaf(*wk_));
  Var v = t.matmul(enc, t.leaf(*wv_));
  std::vector<Var> outs;
  outs.reserve(static_cast<size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    Var qh = t.slice_cols(q, h * dh, (h + 1) * dh);
    Var kh = t.slice_cols(k, h * dh, (h + 1) * dh);
    Var vh = t.slice_cols(v, h * dh, (h + 1) * dh);
    Var scores = t.scale(t.matmul(qh, t.transpose(kh)), 1.0 / std::sqrt(static_cast<double>(dh)));
    outs.push_back(t.matmul(t.softmax_rows(scores), vh));
  }
  Var attn = t.matmul(t.concat_cols(outs), t.leaf(*wo_));
  x = t.layer_norm(t.add(x, attn), t.leaf(*ln1_g_), t.leaf(*ln1_b_));
  Var ff = t.add_rowvec(
      t.matmul(t.tanh_op(t.add_rowvec(t.matmul(x, t.leaf(*ff_w1_)), t.leaf(*ff_b1_))),
               t.leaf(*ff_w2_)),
      t.leaf(*ff_b2_));
  x = t.layer_norm(t.add(x, ff), t.leaf(*ln2_g_), t.leaf(*ln2_b_));
  Var logits = t.add_rowvec(t.matmul(x, t.leaf(*out_w_)), t.leaf(*out_b_));
  return t.softmax_rows(logits);
}

Var CrossAttnDecoder::teacher_forced(Tape& t, Var enc, const std::vector<int>& target_in) const {
  if (target_in.empty()) throw InvalidArgument("teacher forcing needs at least one position");
  return forward_rows(t, enc, target_in, 0);
}

Var CrossAttnDecoder::step(Tape& t, Var enc, const std::vector<int>& prefix) const {
  int pos = static_cast<int>(prefix.size());
  std::vector<int> in{prefix.empty() ? Vocabulary::kBos : prefix.back()};
  return forward_rows(t, enc, in, pos);
}

}  // namespace eventqa
