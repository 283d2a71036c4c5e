#include "eventqa/corpus.hpp"

#include <fstream>
#include <sstream>

#include "eventqa/errors.hpp"
#include "json.hpp"

namespace eventqa {

using nlohmann::json;

const char* relation_name(RelationType t) {
  switch (t) {
    case RelationType::Causal: return "Causal";
    case RelationType::Conditional: return "Conditional";
    case RelationType::Counterfactual: return "Counterfactual";
    case RelationType::Subevent: return "Sub-event";
    case RelationType::Coreference: return "Co-reference";
  }
  return "?";
}

std::optional<RelationType> parse_relation(const std::string& name) {
  if (name == "Causal") return RelationType::Causal;
  if (name == "Conditional") return RelationType::Conditional;
  if (name == "Counterfactual") return RelationType::Counterfactual;
  if (name == "Sub-event" || name == "Subevent") return RelationType::Subevent;
  if (name == "Co-reference" || name == "Coreference") return RelationType::Coreference;
  return std::nullopt;
}

const char* source_name(DatasetSource s) {
  switch (s) {
    case DatasetSource::ESTER: return "ester";
    case DatasetSource::TORQUE: return "torque";
    case DatasetSource::Synthetic: return "synthetic";
  }
  return "?";
}

std::optional<DatasetSource> parse_source(const std::string& name) {
  if (name == "ester" || name == "ESTER") return DatasetSource::ESTER;
  if (name == "torque" || name == "TORQUE") return DatasetSource::TORQUE;
  if (name == "synthetic") return DatasetSource::Synthetic;
  return std::nullopt;
}

namespace {

[[noreturn]] void record_error(size_t index, const std::string& field, const std::string& what) {
  std::ostringstream os;
  os << "record " << index << ", field '" << field << "': " << what;
  throw ParseError(os.str());
}

EventTrigger span_to_trigger(const std::vector<Token>& tokens, int begin, int end,
                             size_t index, const std::string& field) {
  auto ts = char_span_to_tokens(tokens, begin, end);
  if (!ts) {
    std::ostringstream os;
    os << "character span [" << begin << ", " << end << ") does not align with token boundaries";
    record_error(index, field, os.str());
  }
  EventTrigger t;
  t.token_start = ts->first;
  t.token_end = ts->second;
  std::vector<std::string> texts = token_texts(tokens);
  t.surface = join_tokens(texts, t.token_start, t.token_end);
  return t;
}

}  // namespace

Dataset load_dataset(const std::string& path, DatasetSource source, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);

  Dataset ds;
  ds.source = source;
  if (path.find("train") != std::string::npos) ds.split = DatasetSplit::Train;
  else if (path.find("dev") != std::string::npos) ds.split = DatasetSplit::Dev;
  else if (path.find("test") != std::string::npos) ds.split = DatasetSplit::Test;

  std::string line;
  size_t index = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      record_error(index, "<json>", e.what());
    }

    QAInstance inst;
    inst.id = rec.contains("id") ? rec["id"].is_string() ? rec["id"].get<std::string>()
                                                         : rec["id"].dump()
                                 : std::to_string(index);

    if (!rec.contains("passage") || !rec["passage"].is_string())
      record_error(index, "passage", "missing or not a string");
    if (!rec.contains("question") || !rec["question"].is_string())
      record_error(index, "question", "missing or not a string");

    std::string passage_text = rec["passage"].get<std::string>();
    std::string question_text = rec["question"].get<std::string>();
    std::vector<Token> passage_toks = tokenize(passage_text);
    std::vector<Token> question_toks = tokenize(question_text);
    inst.passage = token_texts(passage_toks);
    inst.question = token_texts(question_toks);

    if (rec.contains("type") && !rec["type"].is_null()) {
      if (!rec["type"].is_string()) record_error(index, "type", "not a string");
      auto rel = parse_relation(rec["type"].get<std::string>());
      if (!rel) record_error(index, "type", "unknown relation type '" + rec["type"].get<std::string>() + "'");
      inst.relation_type = rel;
    }
    if (source != DatasetSource::TORQUE && !inst.relation_type)
      record_error(index, "type", "required for this dataset source");

    if (rec.contains("group_id") && !rec["group_id"].is_null()) {
      inst.contrast_group_id = rec["group_id"].is_string() ? rec["group_id"].get<std::string>()
                                                           : rec["group_id"].dump();
    }
    if (source == DatasetSource::TORQUE && !inst.contrast_group_id)
      record_error(index, "group_id", "required for torque records");

    if (rec.contains("events") && !rec["events"].is_null()) {
      if (!rec["events"].is_array()) record_error(index, "events", "not an array");
      for (const auto& ev : rec["events"]) {
        if (!ev.contains("start") || !ev.contains("end"))
          record_error(index, "events", "entry missing start/end");
        inst.passage_events.push_back(span_to_trigger(
            passage_toks, ev["start"].get<int>(), ev["end"].get<int>(), index, "events"));
      }
    } else if (opts.require_events) {
      record_error(index, "events", "missing");
    }

    if (rec.contains("question_event") && !rec["question_event"].is_null()) {
      const auto& qe = rec["question_event"];
      if (!qe.contains("start") || !qe.contains("end"))
        record_error(index, "question_event", "missing start/end");
      inst.question_event = span_to_trigger(question_toks, qe["start"].get<int>(),
                                            qe["end"].get<int>(), index, "question_event");
      inst.has_question_event = true;
    } else if (opts.require_events) {
      record_error(index, "question_event", "missing (each question carries one event trigger)");
    }

    if (rec.contains("answers") && !rec["answers"].is_null()) {
      if (!rec["answers"].is_array()) record_error(index, "answers", "not an array");
      for (const auto& an : rec["answers"]) {
        Answer a;
        if (!an.contains("text") || !an["text"].is_string())
          record_error(index, "answers", "entry missing text");
        a.text = an["text"].get<std::string>();
        if (an.contains("start") && an.contains("end") && !an["start"].is_null()) {
          auto ts = char_span_to_tokens(passage_toks, an["start"].get<int>(), an["end"].get<int>());
          if (!ts)
            record_error(index, "answers",
                         "answer '" + a.text + "' does not align with token boundaries");
          a.token_start = ts->first;
          a.token_end = ts->second;
        }
        inst.answers.push_back(std::move(a));
      }
    }
    if (opts.require_answers && inst.answers.empty())
      record_error(index, "answers", "missing (datasets contain answerable questions only)");

    // Answer events: the passage events lying inside some gold answer span.
    for (const EventTrigger& ev : inst.passage_events) {
      for (const Answer& a : inst.answers) {
        if (a.aligned() && a.token_start <= ev.token_start && ev.token_end <= a.token_end) {
          inst.answer_events.push_back(ev);
          break;
        }
      }
    }

    ds.instances.push_back(std::move(inst));
    ++index;
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file: " + path);
  for (const QAInstance& inst : ds.instances) {
    // Reconstruct character offsets from the space-joined token text.
    std::vector<int> tok_begin(inst.passage.size()), tok_end(inst.passage.size());
    std::string passage_text;
    for (size_t i = 0; i < inst.passage.size(); ++i) {
      if (i > 0) passage_text += ' ';
      tok_begin[i] = static_cast<int>(passage_text.size());
      passage_text += inst.passage[i];
      tok_end[i] = static_cast<int>(passage_text.size());
    }
    std::vector<int> qtok_begin(inst.question.size()), qtok_end(inst.question.size());
    std::string question_text;
    for (size_t i = 0; i < inst.question.size(); ++i) {
      if (i > 0) question_text += ' ';
      qtok_begin[i] = static_cast<int>(question_text.size());
      question_text += inst.question[i];
      qtok_end[i] = static_cast<int>(question_text.size());
    }

    json rec;
    rec["id"] = inst.id;
    rec["passage"] = passage_text;
    rec["question"] = question_text;
    if (inst.relation_type) rec["type"] = relation_name(*inst.relation_type);
    if (inst.contrast_group_id) rec["group_id"] = *inst.contrast_group_id;
    json evs = json::array();
    for (const EventTrigger& ev : inst.passage_events) {
      evs.push_back({{"start", tok_begin[static_cast<size_t>(ev.token_start)]},
                     {"end", tok_end[static_cast<size_t>(ev.token_end - 1)]}});
    }
    rec["events"] = evs;
    if (inst.has_question_event) {
      rec["question_event"] = {
          {"start", qtok_begin[static_cast<size_t>(inst.question_event.token_start)]},
          {"end", qtok_end[static_cast<size_t>(inst.question_event.token_end - 1)]}};
    }
    json ans = json::array();
    for (const Answer& a : inst.answers) {
      json ja;
      ja["text"] = a.text;
      if (a.aligned()) {
        ja["start"] = tok_begin[static_cast<size_t>(a.token_start)];
        ja["end"] = tok_end[static_cast<size_t>(a.token_end - 1)];
      }
      ans.push_back(ja);
    }
    rec["answers"] = ans;
    out << rec.dump() << "\n";
  }
}

LabelSequence build_io_labels(const QAInstance& instance) {
  LabelSequence seq;
  seq.labels.assign(instance.passage.size(), IOLabel::O);
  for (const Answer& a : instance.answers) {
    if (!a.aligned())
      throw InvalidArgument("answer '" + a.text + "' is not aligned to a passage token span");
    for (int i = a.token_start; i < a.token_end; ++i)
      seq.labels[static_cast<size_t>(i)] = IOLabel::I;
  }
  return seq;
}

std::vector<std::pair<int, int>> decode_spans(const LabelSequence& labels) {
  std::vector<std::pair<int, int>> spans;
  int n = static_cast<int>(labels.labels.size());
  int i = 0;
  while (i < n) {
    if (labels.labels[static_cast<size_t>(i)] == IOLabel::I) {
      int j = i;
      while (j < n && labels.labels[static_cast<size_t>(j)] == IOLabel::I) ++j;
      spans.emplace_back(i, j);
      i = j;
    } else {
      ++i;
    }
  }
  return spans;
}

std::vector<std::string> span_texts(const std::vector<std::pair<int, int>>& spans,
                                    const std::vector<std::string>& passage) {
  std::vector<std::string> out;
  out.reserve(spans.size());
  for (auto [first, last] : spans) out.push_back(join_tokens(passage, first, last));
  return out;
}

ExtractiveInput build_extractive_input(const QAInstance& instance, bool use_type_prompt) {
  if (instance.question.empty()) throw InvalidArgument("instance has an empty question");
  if (use_type_prompt && !instance.relation_type)
    throw InvalidArgument("type prompt requested but the instance has no relation type");

  ExtractiveInput in;
  SegmentMap& seg = in.segments;
  in.tokens.push_back("<s>");
  seg.bos_pos = 0;
  seg.prompt_first = static_cast<int>(in.tokens.size());
  if (use_type_prompt) {
    in.tokens.push_back(relation_name(*instance.relation_type));
    in.tokens.push_back(":");
  }
  seg.prompt_last = static_cast<int>(in.tokens.size());
  seg.question_first = static_cast<int>(in.tokens.size());
  for (const std::string& t : instance.question) in.tokens.push_back(t);
  seg.question_last = static_cast<int>(in.tokens.size());
  seg.sep_first = static_cast<int>(in.tokens.size());
  in.tokens.push_back("</s>");
  in.tokens.push_back("</s>");
  seg.sep_last = static_cast<int>(in.tokens.size());
  seg.passage_first = static_cast<int>(in.tokens.size());
  for (const std::string& t : instance.passage) in.tokens.push_back(t);
  seg.passage_last = static_cast<int>(in.tokens.size());
  seg.total = static_cast<int>(in.tokens.size());
  return in;
}

GenerativeIO build_generative_io(const QAInstance& instance) {
  if (instance.answers.empty())
    throw InvalidArgument("instance has no gold answers (questions are answerable)");
  if (instance.question.empty()) throw InvalidArgument("instance has an empty question");

  GenerativeIO io;
  if (instance.relation_type) {
    io.input_tokens.push_back(relation_name(*instance.relation_type));
    io.input_tokens.push_back(":");
  }
  io.question_first = static_cast<int>(io.input_tokens.size());
  for (const std::string& t : instance.question) io.input_tokens.push_back(t);
  io.question_last = static_cast<int>(io.input_tokens.size());
  io.input_tokens.push_back("\n");
  io.passage_first = static_cast<int>(io.input_tokens.size());
  for (const std::string& t : instance.passage) io.input_tokens.push_back(t);
  io.passage_last = static_cast<int>(io.input_tokens.size());

  for (size_t i = 0; i < instance.answers.size(); ++i) {
    if (i > 0) io.target_tokens.push_back(";");
    for (const Token& t : tokenize(instance.answers[i].text))
      io.target_tokens.push_back(t.text);
  }
  return io;
}

void write_predictions(const std::vector<PredictionRecord>& preds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write prediction file: " + path);
  for (const PredictionRecord& p : preds) {
    json rec;
    rec["instance_id"] = p.instance_id;
    rec["answers"] = p.answers;
    out << rec.dump() << "\n";
  }
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prediction file: " + path);
  std::vector<PredictionRecord> out;
  std::string line;
  size_t index = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      record_error(index, "<json>", e.what());
    }
    PredictionRecord p;
    p.instance_id = rec.at("instance_id").get<std::string>();
    for (const auto& a : rec.at("answers")) p.answers.push_back(a.get<std::string>());
    out.push_back(std::move(p));
    ++index;
  }
  return out;
}

}  // namespace eventqa
