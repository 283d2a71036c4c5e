#ifndef EVENTQA_EXTRACTIVE_PR_HPP
#define EVENTQA_EXTRACTIVE_PR_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eventqa/backbone.hpp"
#include "eventqa/corpus.hpp"

namespace eventqa {

// Sentence partition of the passage plus each sentence's candidate events.
struct SentenceSegmentation {
  std::vector<std::pair<int, int>> sentences;        // [first, last) over passage tokens
  std::vector<std::vector<int>> events_by_sentence;  // indices into the candidate list

  int sentence_count() const { return static_cast<int>(sentences.size()); }
  int sentence_of_token(int token) const;
};

// Boundaries fall after sentence-final punctuation {. ! ?}; a trailing run
// without one forms the last sentence. Events are assigned by their start token.
SentenceSegmentation segment_sentences(const std::vector<std::string>& passage,
                                       const std::vector<EventTrigger>& candidates);

// Default mode scores the annotated triggers; the "-trig" ablation treats
// every passage token as a candidate event.
std::vector<EventTrigger> candidate_events(const QAInstance& instance, bool ablate_triggers);

// +1 iff the event span matches an answer event exactly, else -1.
double ground_truth_event_constraint(const EventTrigger& event,
                                     const std::vector<EventTrigger>& answer_events);

// Ablation candidates are single tokens, so their truth is containment in an
// answer-event span; default mode keeps the exact-match rule above.
double candidate_event_truth(const EventTrigger& candidate,
                             const std::vector<EventTrigger>& answer_events,
                             bool containment);

// +1 iff some answer event trigger starts inside [first, last), else -1.
double sentence_constraint_truth(int first, int last,
                                 const std::vector<EventTrigger>& answer_events);

// How the scalar event score is ranged: Paper keeps sigmoid in (0,1);
// Symmetric rescales to 2*sigmoid-1 in (-1,1) so the {1,-1} targets are reachable.
enum class ScoreRescale { Paper, Symmetric };
const char* score_rescale_name(ScoreRescale r);
std::optional<ScoreRescale> parse_score_rescale(const std::string& s);

// Trainable constraint parameters: the event scorer (W_g, b_g) and the
// event-vs-question attention.
class ConstraintHead {
 public:
  ConstraintHead(ParamStore& store, const std::string& prefix, const BackboneConfig& cfg,
                 Rng& rng);

  // K x d event hiddens -> K x 1 scores.
  Var event_scores(Tape& t, Var event_hiddens, ScoreRescale rescale) const;

  // 1 x K weights: per-head scaled dot-product scores of events (queries)
  // against question tokens (keys), averaged over heads and key positions,
  // then softmax-normalized over the sentence's events.
  Var attention_weights(Tape& t, Var event_hiddens, Var question_hiddens) const;

 private:
  int heads_;
  int head_dim_;
  Param *wg_, *bg_;
  Param *attn_wq_, *attn_wk_;
};

// Everything the extractive losses need, per sentence. Sentences without
// candidate events carry no f_pred node; their score is the neutral 0.
struct ExtractiveConstraints {
  SentenceSegmentation seg;
  std::vector<std::optional<Var>> f_pred;
  std::vector<double> f_truth;
  std::vector<std::vector<Var>> g_pred;
  std::vector<std::vector<double>> g_truth;
  Var f_broadcast;  // P x 1 over passage tokens; 0 outside event sentences

  double f_pred_value(int s) const { return f_pred[static_cast<size_t>(s)] ? (*f_pred[static_cast<size_t>(s)]).item() : 0.0; }
};

ExtractiveConstraints compute_extractive_constraints(
    Tape& t, const ConstraintHead& head, Var enc, const SegmentMap& segments,
    const std::vector<std::string>& passage, const std::vector<EventTrigger>& candidates,
    const std::vector<EventTrigger>& answer_events, ScoreRescale rescale,
    bool containment_truth);

// G_ext as an odds update: the I-class logit is shifted by f', which multiplies
// the I/O odds by exp{f'} and keeps each row a probability pair.
Var regularized_io_probs(Tape& t, Var io_logits, Var f_broadcast);

// Pure form of the same update for a single token.
double regularize_io_probability(double p_i, double f);

Var loss_f(Tape& t, const ExtractiveConstraints& c);
Var loss_g(Tape& t, const ExtractiveConstraints& c);

// probs: P x 2 rows (O, I); positive (I) terms are weighted by w_bl.
Var loss_extractive_qa(Tape& t, Var probs, const LabelSequence& labels, double w_bl);

Var loss_extractive_total(Tape& t, Var l_qa, Var l_f, Var l_g, double lambda1);

// Reference formulas on plain doubles; the tape path is checked against these.
double loss_f_value(const std::vector<double>& f_pred, const std::vector<double>& f_truth);
double loss_g_value(const std::vector<std::vector<double>>& g_pred,
                    const std::vector<std::vector<double>>& g_truth);
double loss_extractive_qa_value(const std::vector<double>& p_i, const LabelSequence& labels,
                                double w_bl);
double sentence_score_value(const std::vector<double>& alpha, const std::vector<double>& g);

}  // namespace eventqa

#endif  // EVENTQA_EXTRACTIVE_PR_HPP
