#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "radcl/labels.hpp"
#include "radcl/text/corpus.hpp"
#include "radcl/text/lexicon.hpp"
#include "radcl/text/rules.hpp"

namespace radcl::text {

enum class Factuality { Affirmed = 0, Negated = 1, Uncertain = 2 };

const char* to_string(Factuality f);
Factuality factuality_from_string(const std::string& s);

// Binarized view used for pairing: negated and uncertain collapse together.
inline bool is_affirmed(Factuality f) { return f == Factuality::Affirmed; }

struct SentenceAnnotation {
  std::string sentence_id;  // "<report_id>:<sentence index>"
  std::string report_id;
  std::size_t sentence_index = 0;
  std::vector<ConceptMention> concept_mentions;
  Factuality factuality = Factuality::Affirmed;
  std::vector<std::string> matched_rule_ids;
  std::set<std::size_t> protected_token_indices;
  // First disease mention's concept, used to key sentence-level sampling
  // pools; empty when the sentence mentions no disease.
  std::string primary_concept;

  bool has_disease() const { return !primary_concept.empty(); }
  bool is_protected(std::size_t token_index) const {
    return protected_token_indices.count(token_index) > 0;
  }
};

class Annotator {
 public:
  Annotator(const ConceptLexicon& concepts, const FactualityLexicon& factuality,
            std::vector<PatternRule> rules, const CategoryMap& categories);

  SentenceAnnotation annotate(const Sentence& sentence) const;
  std::map<std::string, std::vector<SentenceAnnotation>> annotate_corpus(
      const std::vector<Report>& reports) const;

  // Report-level weak labels from sentence annotations: per disease slot,
  // any affirmed mention wins, then uncertain, then negated, else blank.
  // No Finding is positive exactly when all disease slots are blank or
  // negative.
  LabelVector weak_label(const std::vector<SentenceAnnotation>& annotations) const;

  const ConceptLexicon& concepts() const { return concepts_; }
  const FactualityLexicon& factuality() const { return factuality_; }
  const std::vector<PatternRule>& rules() const { return rules_; }
  const CategoryMap& categories() const { return categories_; }

 private:
  const ConceptLexicon& concepts_;
  const FactualityLexicon& factuality_;
  std::vector<PatternRule> rules_;
  const CategoryMap& categories_;
};

}  // namespace radcl::text
