#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "radcl/text/corpus.hpp"

namespace radcl::text {

enum class Polarity { Negation, Uncertainty };

struct ConceptMention {
  std::string concept_id;
  std::size_t begin = 0;  // token span [begin, end)
  std::size_t end = 0;
};

struct FactualityMatch {
  Polarity polarity = Polarity::Negation;
  std::string phrase;     // lemmatized phrase, space-joined
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Phrase dictionary with greedy longest-match lookup over lemma sequences.
// Phrases are stored lemmatized and lowercased.
class PhraseIndex {
 public:
  void add(std::vector<std::string> lemmas, std::string payload);
  bool empty() const { return by_first_.empty(); }

  // Longest phrase starting at tokens[pos]; returns matched length (0 = none)
  // and sets payload/phrase for the winner.
  std::size_t longest_match(const std::vector<Token>& tokens, std::size_t pos,
                            std::string* payload, std::string* phrase) const;

 private:
  struct Entry {
    std::vector<std::string> lemmas;
    std::string payload;
  };
  std::unordered_map<std::string, std::vector<Entry>> by_first_;  // sorted long-first
};

class ConceptLexicon {
 public:
  // TSV rows: concept_id<TAB>phrase. '#' comments and blank lines skipped.
  // Phrases are lemmatized on load.
  static ConceptLexicon load_tsv(const std::string& path, const Lemmatizer& lemmatizer);
  static ConceptLexicon from_phrases(const std::vector<std::pair<std::string, std::string>>& entries,
                                     const Lemmatizer& lemmatizer);

  void add_phrase(const std::string& concept_id, std::vector<std::string> lemmas);

  const std::set<std::string>& concept_ids() const { return concept_ids_; }
  const PhraseIndex& index() const { return index_; }

  std::string source_tag = "radlex-subset";

 private:
  PhraseIndex index_;
  std::set<std::string> concept_ids_;
};

class FactualityLexicon {
 public:
  // TSV rows: polarity<TAB>phrase[<TAB>source]; polarity is NEG or UNC,
  // source is "paper" or "extension".
  static FactualityLexicon load_tsv(const std::string& path, const Lemmatizer& lemmatizer);
  static FactualityLexicon from_phrases(
      const std::vector<std::pair<Polarity, std::string>>& entries, const Lemmatizer& lemmatizer);

  // Throws LexiconError if the polarity sets intersect or a phrase is empty
  // or longer than 4 tokens.
  void add_phrase(Polarity polarity, std::vector<std::string> lemmas);

  const PhraseIndex& index() const { return index_; }
  bool contains(Polarity polarity, const std::vector<std::string>& lemmas) const;

 private:
  PhraseIndex index_;
  std::set<std::string> negation_keys_;
  std::set<std::string> uncertainty_keys_;
};

// Greedy left-to-right longest-match concept scan; matched tokens are
// consumed, so mentions never overlap.
std::vector<ConceptMention> match_concepts(const Sentence& sentence, const ConceptLexicon& lexicon);

// Same mechanics over both polarity sets at once.
std::vector<FactualityMatch> match_factuality_terms(const Sentence& sentence,
                                                    const FactualityLexicon& lexicon);

// concept_id -> observation slot (0..12). Concepts absent from the map are
// anatomy: protected during augmentation but not diseases.
class CategoryMap {
 public:
  static CategoryMap load_tsv(const std::string& path);

  void set(const std::string& concept_id, int slot) { slots_[concept_id] = slot; }
  // -1 when the concept is not mapped to an observation.
  int slot(const std::string& concept_id) const;
  bool is_disease(const std::string& concept_id) const { return slot(concept_id) >= 0; }

 private:
  std::map<std::string, int> slots_;
};

}  // namespace radcl::text
