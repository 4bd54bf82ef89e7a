#include "radcl/io/jsonl.hpp"

#include <fstream>
#include <set>

#include "radcl/errors.hpp"

namespace radcl::io {

using nlohmann::json;

CorpusRecord corpus_record_from_json(const json& j, std::size_t line_no) {
  auto context = [line_no] { return " (line " + std::to_string(line_no) + ")"; };
  if (!j.is_object()) throw SchemaError("corpus line is not a JSON object" + context());
  CorpusRecord rec;
  for (const char* field : {"report_id", "patient_id", "text"}) {
    if (!j.contains(field) || !j.at(field).is_string()) {
      throw SchemaError(std::string("missing or non-string field '") + field + "'" + context());
    }
  }
  rec.report_id = j.at("report_id").get<std::string>();
  rec.patient_id = j.at("patient_id").get<std::string>();
  rec.text = j.at("text").get<std::string>();
  if (rec.patient_id.empty()) throw SchemaError("empty patient_id" + context());
  if (j.contains("labels") && !j.at("labels").is_null()) {
    const auto& arr = j.at("labels");
    if (!arr.is_array()) throw SchemaError("'labels' must be an array" + context());
    std::vector<std::string> names;
    for (const auto& v : arr) {
      if (!v.is_string()) throw SchemaError("label entries must be strings" + context());
      names.push_back(v.get<std::string>());
    }
    rec.labels = LabelVector::from_strings(names);
  }
  return rec;
}

json to_json(const CorpusRecord& record) {
  json j{{"report_id", record.report_id},
         {"patient_id", record.patient_id},
         {"text", record.text}};
  if (record.labels) {
    j["labels"] = record.labels->to_strings();
  }
  return j;
}

std::vector<CorpusRecord> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  std::vector<CorpusRecord> records;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      throw SchemaError("invalid JSON on line " + std::to_string(line_no) + " of " + path);
    }
    CorpusRecord rec = corpus_record_from_json(j, line_no);
    if (!seen_ids.insert(rec.report_id).second) {
      throw DataError("duplicate report_id '" + rec.report_id + "' in " + path);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_corpus(const std::string& path, const std::vector<CorpusRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const CorpusRecord& rec : records) {
    out << to_json(rec).dump() << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

json ingested_json(const CorpusRecord& record, const text::Report& report) {
  json j = to_json(record);
  json sentences = json::array();
  for (const text::Sentence& s : report.sentences) {
    sentences.push_back(json{{"index", s.index}, {"section", s.section}, {"text", s.text}});
  }
  j["sentences"] = std::move(sentences);
  return j;
}

json to_json(const text::SentenceAnnotation& ann, const text::Sentence& sentence) {
  json concepts = json::array();
  for (const auto& m : ann.concept_mentions) {
    concepts.push_back(json{{"id", m.concept_id}, {"begin", m.begin}, {"end", m.end}});
  }
  json protected_indices = json::array();
  for (std::size_t i : ann.protected_token_indices) protected_indices.push_back(i);
  return json{{"sentence_id", ann.sentence_id},
              {"report_id", ann.report_id},
              {"index", ann.sentence_index},
              {"section", sentence.section},
              {"text", sentence.text},
              {"concepts", std::move(concepts)},
              {"factuality", text::to_string(ann.factuality)},
              {"rules", ann.matched_rule_ids},
              {"protected", std::move(protected_indices)}};
}

json to_json(const text::ContrastiveBatch& batch) {
  json elements = json::array();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    json negs = json::array();
    for (std::size_t j = 0; j < batch.negatives[i].size(); ++j) {
      json neg{{"text", batch.negatives[i][j].text()}};
      if (i < batch.negative_meta.size() && j < batch.negative_meta[i].size()) {
        const auto& m = batch.negative_meta[i][j];
        if (!m.concept_id.empty()) neg["concept"] = m.concept_id;
        if (!m.factuality.empty()) neg["factuality"] = m.factuality;
        if (!m.patient.empty()) neg["patient"] = m.patient;
        if (batch.granularity == text::ContrastiveBatch::Granularity::Sentence) {
          neg["hard"] = m.hard;
        }
      }
      negs.push_back(std::move(neg));
    }
    json meta{{"concept", batch.meta[i].concept_id},
              {"factuality", batch.meta[i].factuality},
              {"patient", batch.meta[i].patient}};
    elements.push_back(json{{"query", batch.queries[i].text()},
                            {"positive", batch.positives[i].text()},
                            {"negatives", std::move(negs)},
                            {"meta", std::move(meta)}});
  }
  return elements;
}

}  // namespace radcl::io
