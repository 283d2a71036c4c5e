#ifndef EVENTQA_CORPUS_HPP
#define EVENTQA_CORPUS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eventqa/tokenizer.hpp"

namespace eventqa {

enum class RelationType { Causal, Conditional, Counterfactual, Subevent, Coreference };

const char* relation_name(RelationType t);
std::optional<RelationType> parse_relation(const std::string& name);

// Event trigger as a token span over the passage (or question) tokens.
struct EventTrigger {
  int token_start = 0;  // inclusive
  int token_end = 0;    // exclusive
  std::string surface;

  bool same_span(const EventTrigger& o) const {
    return token_start == o.token_start && token_end == o.token_end;
  }
};

struct Answer {
  std::string text;
  int token_start = -1;  // passage token span; -1 when the answer is text-only
  int token_end = -1;

  bool aligned() const { return token_start >= 0 && token_end > token_start; }
};

struct QAInstance {
  std::string id;
  std::vector<std::string> passage;   // tokens
  std::vector<std::string> question;  // tokens
  std::optional<RelationType> relation_type;
  std::vector<Answer> answers;
  std::vector<EventTrigger> passage_events;
  EventTrigger question_event;  // C_q = 1
  bool has_question_event = false;
  std::vector<EventTrigger> answer_events;  // subset of passage_events by span
  std::optional<std::string> contrast_group_id;
};

enum class DatasetSource { ESTER, TORQUE, Synthetic };
enum class DatasetSplit { Train, Dev, Test, Unspecified };

const char* source_name(DatasetSource s);
std::optional<DatasetSource> parse_source(const std::string& name);

struct Dataset {
  std::vector<QAInstance> instances;
  DatasetSplit split = DatasetSplit::Unspecified;
  DatasetSource source = DatasetSource::Synthetic;
};

struct LoadOptions {
  bool require_answers = true;
  bool require_events = true;  // off for inference-time inputs
};

// Loads JSON-lines records {passage, question, type?, answers:[{text,start,end}],
// events:[{start,end}], question_event:{start,end}, group_id?, id?}.
// Character spans are converted to token indices; misalignment is a hard error
// naming the record and field.
Dataset load_dataset(const std::string& path, DatasetSource source,
                     const LoadOptions& opts = LoadOptions{});

// Serializes instances back to the JSONL schema (used by the synthetic generator).
void save_dataset(const Dataset& ds, const std::string& path);

enum class IOLabel : uint8_t { O = 0, I = 1 };

struct LabelSequence {
  std::vector<IOLabel> labels;  // one per passage token
};

// I iff the token lies inside any gold answer span.
LabelSequence build_io_labels(const QAInstance& instance);

// Maximal runs of I as [first, last) token spans.
std::vector<std::pair<int, int>> decode_spans(const LabelSequence& labels);
std::vector<std::string> span_texts(const std::vector<std::pair<int, int>>& spans,
                                    const std::vector<std::string>& passage);

// Built model input plus the exact partition of its positions.
struct SegmentMap {
  int bos_pos = 0;
  int prompt_first = 1, prompt_last = 1;      // empty when no type prompt
  int question_first = 0, question_last = 0;  // half-open, question tokens only
  int sep_first = 0, sep_last = 0;
  int passage_first = 0, passage_last = 0;
  int total = 0;  // N_x

  int passage_len() const { return passage_last - passage_first; }
  int input_pos_of_passage_token(int i) const { return passage_first + i; }
};

struct ExtractiveInput {
  std::vector<std::string> tokens;
  SegmentMap segments;
};

// {<s> [t :] x^q </s> </s> x^p}
ExtractiveInput build_extractive_input(const QAInstance& instance, bool use_type_prompt);

struct GenerativeIO {
  std::vector<std::string> input_tokens;   // {t : x^q \n x^p}
  std::vector<std::string> target_tokens;  // answers joined by ';' (N_a + A - 1 tokens)
  int question_first = 0, question_last = 0;
  int passage_first = 0, passage_last = 0;
};

GenerativeIO build_generative_io(const QAInstance& instance);

// Prediction file records: JSONL {instance_id, answers:[string]}.
struct PredictionRecord {
  std::string instance_id;
  std::vector<std::string> answers;
};

void write_predictions(const std::vector<PredictionRecord>& preds, const std::string& path);
std::vector<PredictionRecord> read_predictions(const std::string& path);

}  // namespace eventqa

#endif  // EVENTQA_CORPUS_HPP
