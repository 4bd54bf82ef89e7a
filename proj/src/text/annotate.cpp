#include "radcl/text/annotate.hpp"

#include <algorithm>

#include "radcl/errors.hpp"

namespace radcl::text {

const char* to_string(Factuality f) {
  switch (f) {
    case Factuality::Affirmed: return "affirmed";
    case Factuality::Negated: return "negated";
    case Factuality::Uncertain: return "uncertain";
  }
  return "affirmed";
}

Factuality factuality_from_string(const std::string& s) {
  if (s == "affirmed") return Factuality::Affirmed;
  if (s == "negated") return Factuality::Negated;
  if (s == "uncertain") return Factuality::Uncertain;
  throw DataError("unknown factuality: " + s);
}

Annotator::Annotator(const ConceptLexicon& concepts, const FactualityLexicon& factuality,
                     std::vector<PatternRule> rules, const CategoryMap& categories)
    : concepts_(concepts),
      factuality_(factuality),
      rules_(std::move(rules)),
      categories_(categories) {}

SentenceAnnotation Annotator::annotate(const Sentence& sentence) const {
  SentenceAnnotation ann;
  ann.report_id = sentence.report_id;
  ann.sentence_index = sentence.index;
  ann.sentence_id = sentence.report_id + ":" + std::to_string(sentence.index);

  ann.concept_mentions = match_concepts(sentence, concepts_);
  auto keyword_matches = match_factuality_terms(sentence, factuality_);
  auto rule_matches = apply_rules(sentence, ann.concept_mentions, rules_, categories_);

  bool any_negation = false;
  bool any_uncertainty = false;
  for (const auto& m : keyword_matches) {
    (m.polarity == Polarity::Negation ? any_negation : any_uncertainty) = true;
  }
  for (const auto& m : rule_matches) {
    (m.polarity == Polarity::Negation ? any_negation : any_uncertainty) = true;
    if (std::find(ann.matched_rule_ids.begin(), ann.matched_rule_ids.end(), m.rule_id) ==
        ann.matched_rule_ids.end()) {
      ann.matched_rule_ids.push_back(m.rule_id);
    }
  }
  ann.factuality = any_negation    ? Factuality::Negated
                   : any_uncertainty ? Factuality::Uncertain
                                     : Factuality::Affirmed;

  for (const auto& m : ann.concept_mentions) {
    for (std::size_t i = m.begin; i < m.end; ++i) ann.protected_token_indices.insert(i);
    if (ann.primary_concept.empty() && categories_.is_disease(m.concept_id)) {
      ann.primary_concept = m.concept_id;
    }
  }
  for (const auto& m : keyword_matches) {
    for (std::size_t i = m.begin; i < m.end; ++i) ann.protected_token_indices.insert(i);
  }
  for (const auto& m : rule_matches) {
    for (const auto& [begin, end] : m.term_spans) {
      for (std::size_t i = begin; i < end; ++i) ann.protected_token_indices.insert(i);
    }
  }
  return ann;
}

std::map<std::string, std::vector<SentenceAnnotation>> Annotator::annotate_corpus(
    const std::vector<Report>& reports) const {
  std::map<std::string, std::vector<SentenceAnnotation>> out;
  for (const Report& report : reports) {
    std::vector<SentenceAnnotation> anns;
    anns.reserve(report.sentences.size());
    for (const Sentence& s : report.sentences) anns.push_back(annotate(s));
    out.emplace(report.report_id, std::move(anns));
  }
  return out;
}

LabelVector Annotator::weak_label(const std::vector<SentenceAnnotation>& annotations) const {
  // Per disease slot, record which factualities were seen across mentions.
  std::array<bool, kNumCategories> saw_positive{}, saw_negative{}, saw_uncertain{};
  for (const auto& ann : annotations) {
    for (const auto& m : ann.concept_mentions) {
      int slot = categories_.slot(m.concept_id);
      if (slot < 0) continue;
      switch (ann.factuality) {
        case Factuality::Affirmed: saw_positive[slot] = true; break;
        case Factuality::Negated: saw_negative[slot] = true; break;
        case Factuality::Uncertain: saw_uncertain[slot] = true; break;
      }
    }
  }
  LabelVector labels;
  bool all_clear = true;
  for (int s = 0; s < kNumFindingSlots; ++s) {
    if (saw_positive[s]) {
      labels[s] = ObsClass::Positive;
    } else if (saw_uncertain[s]) {
      labels[s] = ObsClass::Uncertain;
    } else if (saw_negative[s]) {
      labels[s] = ObsClass::Negative;
    } else {
      labels[s] = ObsClass::Blank;
    }
    if (labels[s] == ObsClass::Positive || labels[s] == ObsClass::Uncertain) {
      all_clear = false;
    }
  }
  labels[kNumFindingSlots] = all_clear ? ObsClass::Positive : ObsClass::Blank;
  labels.validate();
  return labels;
}

}  // namespace radcl::text
