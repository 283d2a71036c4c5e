#ifndef EVENTQA_GENERATIVE_PR_HPP
#define EVENTQA_GENERATIVE_PR_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eventqa/backbone.hpp"
#include "eventqa/corpus.hpp"

namespace eventqa {

// Length-V constraint over the vocabulary: answer-event ids are cheap
// (tau1 * w), irrelevant-event ids expensive (tau2 * w), the rest get w.
// The base weight normalizes the vector to sum exactly 1.
struct TokenConstraintVector {
  std::vector<double> weights;
  double base_weight = 0.0;
  double tau1 = 0.5;
  double tau2 = 1.5;
  std::vector<int> passage_event_ids;  // E^p
  std::vector<int> answer_event_ids;   // E^a, subset of E^p
};

// w = 1 / (V + (tau1-1)*C_a + (tau2-1)*(C_p-C_a)) with C_a = |E^a|, C_p = |E^p|.
// Boundary temperatures (tau1 in [0,1], tau2 >= 1) are accepted for grid cells.
TokenConstraintVector token_constraint(int vocab_size, std::vector<int> passage_event_ids,
                                       std::vector<int> answer_event_ids, double tau1,
                                       double tau2);

// Unique token ids of the triggers' pieces; every piece of a trigger inherits
// the trigger's branch, and ids seen in both sets resolve to the answer branch.
std::vector<int> event_token_ids(const Vocabulary& vocab,
                                 const std::vector<EventTrigger>& triggers);

enum class RpMode { FullVocab, Argmax };
const char* rp_mode_name(RpMode m);
std::optional<RpMode> parse_rp_mode(const std::string& s);

// r_t = sum_j -f(v_j) * log(1 - p(v_j)) over the vocabulary (FullVocab) or the
// single most probable token (Argmax); p is clipped to 1 - 1e-7 inside the log.
Var reward_penalty_step(Tape& t, const TokenConstraintVector& c, Var prob_row, RpMode mode);
double reward_penalty_step_value(const TokenConstraintVector& c,
                                 const std::vector<double>& prob_row, RpMode mode);

// L_RP = (1/T) sum_t r_t over teacher-forced rows.
Var loss_rp(Tape& t, const TokenConstraintVector& c, Var dist, RpMode mode);

// Mean NLL of the target ids under the distribution rows.
Var loss_generative_qa(Tape& t, Var dist, const std::vector<int>& target_ids);
double loss_generative_qa_value(const std::vector<std::vector<double>>& dist,
                                const std::vector<int>& target_ids);

Var loss_generative_total(Tape& t, Var l_qa, Var l_rp, double lambda2);

struct GenerationResult {
  std::vector<int> token_ids;         // generated ids, <eos> excluded
  std::string text;                   // space-joined tokens
  std::vector<std::string> answers;   // text split on ';', empties dropped
};

// Probability row over V for the position following `prefix`.
using StepFn = std::function<std::vector<double>(const std::vector<int>& prefix)>;

// Greedy for beam_width 1, otherwise width-k beam search over joint
// probability with deterministic tie-breaking. Stops on <eos> or max_len.
GenerationResult generate_answers(const StepFn& step, const Vocabulary& vocab, int max_len,
                                  int beam_width);

std::vector<std::string> split_on_separator(const std::vector<std::string>& tokens);

}  // namespace eventqa

#endif  // EVENTQA_GENERATIVE_PR_HPP
