#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radcl/labels.hpp"
#include "radcl/text/annotate.hpp"
#include "radcl/text/augment.hpp"
#include "radcl/text/corpus.hpp"

namespace radcl::io {

// One line of the corpus JSONL interchange format.
struct CorpusRecord {
  std::string report_id;
  std::string patient_id;
  std::string text;
  std::optional<LabelVector> labels;
};

std::vector<CorpusRecord> read_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<CorpusRecord>& records);

nlohmann::json to_json(const CorpusRecord& record);
CorpusRecord corpus_record_from_json(const nlohmann::json& j, std::size_t line_no);

// Ingestion output: the record plus its sentence segmentation.
nlohmann::json ingested_json(const CorpusRecord& record, const text::Report& report);

nlohmann::json to_json(const text::SentenceAnnotation& ann, const text::Sentence& sentence);
nlohmann::json to_json(const text::ContrastiveBatch& batch);

}  // namespace radcl::io
