#include "eventqa/extractive_pr.hpp"

#include <cmath>

#include "eventqa/errors.hpp"

namespace eventqa {

int SentenceSegmentation::sentence_of_token(int token) const {
  for (int s = 0; s < sentence_count(); ++s) {
    auto [first, last] = sentences[static_cast<size_t>(s)];
    if (token >= first && token < last) return s;
  }
  return -1;
}

SentenceSegmentation segment_sentences(const std::vector<std::string>& passage,
                                       const std::vector<EventTrigger>& candidates) {
  SentenceSegmentation seg;
  int n = static_cast<int>(passage.size());
  int start = 0;
  for (int i = 0; i < n; ++i) {
    const std::string& tok = passage[static_cast<size_t>(i)];
    bool final_punct = tok == "." || tok == "!" || tok == "?";
    if (final_punct || i == n - 1) {
      seg.sentences.emplace_back(start, i + 1);
      start = i + 1;
    }
  }
  seg.events_by_sentence.assign(seg.sentences.size(), {});
  for (size_t k = 0; k < candidates.size(); ++k) {
    int s = seg.sentence_of_token(candidates[k].token_start);
    if (s < 0)
      throw InvalidArgument("event trigger at token " +
                            std::to_string(candidates[k].token_start) +
                            " lies outside the passage");
    seg.events_by_sentence[static_cast<size_t>(s)].push_back(static_cast<int>(k));
  }
  return seg;
}

std::vector<EventTrigger> candidate_events(const QAInstance& instance, bool ablate_triggers) {
  if (!ablate_triggers) return instance.passage_events;
  std::vector<EventTrigger> out;
  out.reserve(instance.passage.size());
  for (int i = 0; i < static_cast<int>(instance.passage.size()); ++i)
    out.push_back(EventTrigger{i, i + 1, instance.passage[static_cast<size_t>(i)]});
  return out;
}

double ground_truth_event_constraint(const EventTrigger& event,
                                     const std::vector<EventTrigger>& answer_events) {
  for (const EventTrigger& a : answer_events)
    if (event.same_span(a)) return 1.0;
  return -1.0;
}

double candidate_event_truth(const EventTrigger& candidate,
                             const std::vector<EventTrigger>& answer_events, bool containment) {
  if (!containment) return ground_truth_event_constraint(candidate, answer_events);
  for (const EventTrigger& a : answer_events)
    if (a.token_start <= candidate.token_start && candidate.token_end <= a.token_end) return 1.0;
  return -1.0;
}

double sentence_constraint_truth(int first, int last,
                                 const std::vector<EventTrigger>& answer_events) {
  for (const EventTrigger& a : answer_events)
    if (a.token_start >= first && a.token_start < last) return 1.0;
  return -1.0;
}

const char* score_rescale_name(ScoreRescale r) {
  return r == ScoreRescale::Paper ? "paper" : "symmetric";
}

std::optional<ScoreRescale> parse_score_rescale(const std::string& s) {
  if (s == "paper") return ScoreRescale::Paper;
  if (s == "symmetric") return ScoreRescale::Symmetric;
  return std::nullopt;
}

ConstraintHead::ConstraintHead(ParamStore& store, const std::string& prefix,
                               const BackboneConfig& cfg, Rng& rng) {
  int d = cfg.hidden_dim;
  heads_ = cfg.constraint_heads;
  if (d % heads_ != 0) throw InvalidArgument("hidden_dim must be divisible by constraint_heads");
  head_dim_ = d / heads_;
  wg_ = &store.add(prefix + ".wg", d, 1, rng, 0.02);
  bg_ = &store.add_const(prefix + ".bg", 1, 1, 0.0, true);
  attn_wq_ = &store.add(prefix + ".attn_wq", d, d, rng, 0.02);
  attn_wk_ = &store.add(prefix + ".attn_wk", d, d, rng, 0.02);
}

Var ConstraintHead::event_scores(Tape& t, Var event_hiddens, ScoreRescale rescale) const {
  Var z = t.add_rowvec(t.matmul(event_hiddens, t.leaf(*wg_)), t.leaf(*bg_));
  Var s = t.sigmoid(z);
  if (rescale == ScoreRescale::Paper) return s;
  return t.add_scalar(t.scale(s, 2.0), -1.0);
}

Var ConstraintHead::attention_weights(Tape& t, Var event_hiddens, Var question_hiddens) const {
  if (event_hiddens.rows() == 0) throw InvalidArgument("attention needs at least one event");
  Var q = t.matmul(event_hiddens, t.leaf(*attn_wq_));
  Var k = t.matmul(question_hiddens, t.leaf(*attn_wk_));
  Var acc;
  for (int h = 0; h < heads_; ++h) {
    Var qh = t.slice_cols(q, h * head_dim_, (h + 1) * head_dim_);
    Var kh = t.slice_cols(k, h * head_dim_, (h + 1) * head_dim_);
    Var scores =
        t.scale(t.matmul(qh, t.transpose(kh)), 1.0 / std::sqrt(static_cast<double>(head_dim_)));
    acc = h == 0 ? scores : t.add(acc, scores);
  }
  Var mean_scores = t.scale(acc, 1.0 / heads_);           // K x N_q
  Var per_event = t.transpose(t.mean_cols(mean_scores));  // 1 x K
  return t.softmax_rows(per_event);
}

ExtractiveConstraints compute_extractive_constraints(
    Tape& t, const ConstraintHead& head, Var enc, const SegmentMap& segments,
    const std::vector<std::string>& passage, const std::vector<EventTrigger>& candidates,
    const std::vector<EventTrigger>& answer_events, ScoreRescale rescale,
    bool containment_truth) {
  ExtractiveConstraints out;
  out.seg = segment_sentences(passage, candidates);
  int S = out.seg.sentence_count();
  out.f_pred.resize(static_cast<size_t>(S));
  out.f_truth.resize(static_cast<size_t>(S));
  out.g_pred.resize(static_cast<size_t>(S));
  out.g_truth.resize(static_cast<size_t>(S));

  Var question = t.slice_rows(enc, segments.question_first, segments.question_last);

  std::vector<Var> broadcast_parts;
  broadcast_parts.reserve(static_cast<size_t>(S));
  for (int s = 0; s < S; ++s) {
    auto [first, last] = out.seg.sentences[static_cast<size_t>(s)];
    out.f_truth[static_cast<size_t>(s)] = sentence_constraint_truth(first, last, answer_events);
    const std::vector<int>& evs = out.seg.events_by_sentence[static_cast<size_t>(s)];
    int K = static_cast<int>(evs.size());
    if (K == 0) {
      // No candidates: neutral score, constant zero broadcast.
      broadcast_parts.push_back(t.input(Mat(last - first, 1)));
      continue;
    }
    std::vector<Var> pooled;
    pooled.reserve(static_cast<size_t>(K));
    for (int idx : evs) {
      const EventTrigger& ev = candidates[static_cast<size_t>(idx)];
      Var rows = t.slice_rows(enc, segments.input_pos_of_passage_token(ev.token_start),
                              segments.input_pos_of_passage_token(ev.token_end));
      pooled.push_back(t.mean_rows(rows));
    }
    Var event_mat = pooled.size() == 1 ? pooled[0] : t.concat_rows(pooled);
    Var g = head.event_scores(t, event_mat, rescale);             // K x 1
    Var alpha = head.attention_weights(t, event_mat, question);   // 1 x K
    Var f = t.scale(t.matmul(alpha, g), 1.0 / K);                 // 1 x 1
    out.f_pred[static_cast<size_t>(s)] = f;
    for (int k = 0; k < K; ++k) {
      out.g_pred[static_cast<size_t>(s)].push_back(t.slice_rows(g, k, k + 1));
      out.g_truth[static_cast<size_t>(s)].push_back(candidate_event_truth(
          candidates[static_cast<size_t>(evs[static_cast<size_t>(k)])], answer_events,
          containment_truth));
    }
    broadcast_parts.push_back(t.repeat_row(f, last - first));
  }
  out.f_broadcast = broadcast_parts.size() == 1 ? broadcast_parts[0]
                                                : t.concat_rows(broadcast_parts);
  return out;
}

Var regularized_io_probs(Tape& t, Var io_logits, Var f_broadcast) {
  return t.softmax_rows(t.add_to_column(io_logits, f_broadcast, TokenIOHead::kI));
}

double regularize_io_probability(double p_i, double f) {
  double odds = p_i / (1.0 - p_i) * std::exp(f);
  return odds / (1.0 + odds);
}

Var loss_f(Tape& t, const ExtractiveConstraints& c) {
  int S = c.seg.sentence_count();
  if (S == 0) throw InvalidArgument("loss_f needs at least one sentence");
  double const_part = 0.0;
  Var acc;
  for (int s = 0; s < S; ++s) {
    const auto& f = c.f_pred[static_cast<size_t>(s)];
    double truth = c.f_truth[static_cast<size_t>(s)];
    if (!f) {
      const_part += truth * truth;  // (0 - f)^2
      continue;
    }
    Var term = t.square(t.add_scalar(*f, -truth));
    acc = acc ? t.add(acc, term) : term;
  }
  Var total = acc ? t.add_scalar(acc, const_part) : t.input(Mat::scalar(const_part));
  return t.scale(total, 1.0 / S);
}

Var loss_g(Tape& t, const ExtractiveConstraints& c) {
  Var acc;
  int counted = 0;
  for (size_t s = 0; s < c.g_pred.size(); ++s) {
    int K = static_cast<int>(c.g_pred[s].size());
    if (K == 0) continue;  // excluded from the sentence count
    ++counted;
    Var inner;
    for (int k = 0; k < K; ++k) {
      Var term = t.square(t.add_scalar(c.g_pred[s][static_cast<size_t>(k)],
                                       -c.g_truth[s][static_cast<size_t>(k)]));
      inner = inner ? t.add(inner, term) : term;
    }
    inner = t.scale(inner, 1.0 / K);
    acc = acc ? t.add(acc, inner) : inner;
  }
  if (!acc) return t.input(Mat::scalar(0.0));
  return t.scale(acc, 1.0 / counted);
}

Var loss_extractive_qa(Tape& t, Var probs, const LabelSequence& labels, double w_bl) {
  int n = probs.rows();
  if (n == 0 || labels.labels.empty()) throw InvalidArgument("empty input to the tagging loss");
  if (n != static_cast<int>(labels.labels.size()))
    throw InvalidArgument("probability rows and labels disagree in length");
  Var lp = t.log_op(probs);
  std::vector<Tape::Entry> entries;
  entries.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    bool positive = labels.labels[static_cast<size_t>(i)] == IOLabel::I;
    entries.push_back(Tape::Entry{i, positive ? TokenIOHead::kI : TokenIOHead::kO,
                                  positive ? w_bl : 1.0});
  }
  return t.scale(t.weighted_entry_sum(lp, std::move(entries)), -1.0 / n);
}

Var loss_extractive_total(Tape& t, Var l_qa, Var l_f, Var l_g, double lambda1) {
  return t.add(l_qa, t.scale(t.add(l_f, l_g), lambda1));
}

double loss_f_value(const std::vector<double>& f_pred, const std::vector<double>& f_truth) {
  if (f_pred.empty() || f_pred.size() != f_truth.size())
    throw InvalidArgument("loss_f needs equal-length non-empty score lists");
  double acc = 0.0;
  for (size_t s = 0; s < f_pred.size(); ++s) {
    double d = f_pred[s] - f_truth[s];
    acc += d * d;
  }
  return acc / static_cast<double>(f_pred.size());
}

double loss_g_value(const std::vector<std::vector<double>>& g_pred,
                    const std::vector<std::vector<double>>& g_truth) {
  double acc = 0.0;
  int counted = 0;
  for (size_t s = 0; s < g_pred.size(); ++s) {
    if (g_pred[s].empty()) continue;
    ++counted;
    double inner = 0.0;
    for (size_t k = 0; k < g_pred[s].size(); ++k) {
      double d = g_pred[s][k] - g_truth[s][k];
      inner += d * d;
    }
    acc += inner / static_cast<double>(g_pred[s].size());
  }
  return counted == 0 ? 0.0 : acc / counted;
}

double loss_extractive_qa_value(const std::vector<double>& p_i, const LabelSequence& labels,
                                double w_bl) {
  if (p_i.empty() || p_i.size() != labels.labels.size())
    throw InvalidArgument("probabilities and labels disagree in length");
  double acc = 0.0;
  for (size_t i = 0; i < p_i.size(); ++i) {
    if (labels.labels[i] == IOLabel::I)
      acc += -w_bl * std::log(std::max(p_i[i], 1e-300));
    else
      acc += -std::log(std::max(1.0 - p_i[i], 1e-300));
  }
  return acc / static_cast<double>(p_i.size());
}

double sentence_score_value(const std::vector<double>& alpha, const std::vector<double>& g) {
  if (alpha.empty() || alpha.size() != g.size())
    throw InvalidArgument("attention weights and event scores disagree in length");
  double acc = 0.0;
  for (size_t k = 0; k < alpha.size(); ++k) acc += alpha[k] * g[k];
  return acc / static_cast<double>(alpha.size());
}

}  // namespace eventqa
