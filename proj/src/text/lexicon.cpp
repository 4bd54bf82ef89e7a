#include "radcl/text/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "radcl/errors.hpp"
#include "radcl/labels.hpp"

namespace radcl::text {

namespace {

std::string join_lemmas(const std::vector<std::string>& lemmas) {
  std::string out;
  for (const auto& l : lemmas) {
    if (!out.empty()) out += ' ';
    out += l;
  }
  return out;
}

std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

bool skip_line(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;  // blank
}

}  // namespace

void PhraseIndex::add(std::vector<std::string> lemmas, std::string payload) {
  if (lemmas.empty()) throw LexiconError("empty phrase in lexicon");
  auto& bucket = by_first_[lemmas.front()];
  bucket.push_back({std::move(lemmas), std::move(payload)});
  std::stable_sort(bucket.begin(), bucket.end(),
                   [](const Entry& a, const Entry& b) { return a.lemmas.size() > b.lemmas.size(); });
}

std::size_t PhraseIndex::longest_match(const std::vector<Token>& tokens, std::size_t pos,
                                       std::string* payload, std::string* phrase) const {
  auto it = by_first_.find(tokens[pos].lemma);
  if (it == by_first_.end()) return 0;
  for (const Entry& entry : it->second) {
    if (pos + entry.lemmas.size() > tokens.size()) continue;
    bool ok = true;
    for (std::size_t i = 1; i < entry.lemmas.size(); ++i) {
      if (tokens[pos + i].lemma != entry.lemmas[i]) {
        ok = false;
        break;
      }
    }
    if (ok) {
      if (payload != nullptr) *payload = entry.payload;
      if (phrase != nullptr) *phrase = join_lemmas(entry.lemmas);
      return entry.lemmas.size();
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// ConceptLexicon

void ConceptLexicon::add_phrase(const std::string& concept_id, std::vector<std::string> lemmas) {
  if (concept_id.empty()) throw LexiconError("empty concept id");
  index_.add(std::move(lemmas), concept_id);
  concept_ids_.insert(concept_id);
}

ConceptLexicon ConceptLexicon::load_tsv(const std::string& path, const Lemmatizer& lemmatizer) {
  std::ifstream in(path);
  if (!in) throw LexiconError("cannot open concept lexicon: " + path);
  ConceptLexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    if (skip_line(line)) continue;
    auto fields = split_tsv(line);
    if (fields.size() < 2) throw LexiconError("bad concept lexicon row: " + line);
    lex.add_phrase(fields[0], lemmatize_phrase(fields[1], lemmatizer));
  }
  return lex;
}

ConceptLexicon ConceptLexicon::from_phrases(
    const std::vector<std::pair<std::string, std::string>>& entries, const Lemmatizer& lemmatizer) {
  ConceptLexicon lex;
  for (const auto& [id, phrase] : entries) lex.add_phrase(id, lemmatize_phrase(phrase, lemmatizer));
  return lex;
}

// ---------------------------------------------------------------------------
// FactualityLexicon

void FactualityLexicon::add_phrase(Polarity polarity, std::vector<std::string> lemmas) {
  if (lemmas.empty() || lemmas.size() > 4) {
    throw LexiconError("factuality phrase must be 1-4 tokens: '" + join_lemmas(lemmas) + "'");
  }
  const std::string key = join_lemmas(lemmas);
  auto& own = polarity == Polarity::Negation ? negation_keys_ : uncertainty_keys_;
  auto& other = polarity == Polarity::Negation ? uncertainty_keys_ : negation_keys_;
  if (other.count(key) != 0) {
    throw LexiconError("phrase in both polarity sets: '" + key + "'");
  }
  if (own.insert(key).second) {
    index_.add(std::move(lemmas), polarity == Polarity::Negation ? "NEG" : "UNC");
  }
}

bool FactualityLexicon::contains(Polarity polarity, const std::vector<std::string>& lemmas) const {
  const std::string key = join_lemmas(lemmas);
  return polarity == Polarity::Negation ? negation_keys_.count(key) != 0
                                        : uncertainty_keys_.count(key) != 0;
}

FactualityLexicon FactualityLexicon::load_tsv(const std::string& path,
                                              const Lemmatizer& lemmatizer) {
  std::ifstream in(path);
  if (!in) throw LexiconError("cannot open factuality lexicon: " + path);
  FactualityLexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    if (skip_line(line)) continue;
    auto fields = split_tsv(line);
    if (fields.size() < 2) throw LexiconError("bad factuality lexicon row: " + line);
    Polarity polarity;
    if (fields[0] == "NEG") {
      polarity = Polarity::Negation;
    } else if (fields[0] == "UNC") {
      polarity = Polarity::Uncertainty;
    } else {
      throw LexiconError("unknown polarity '" + fields[0] + "' in " + path);
    }
    lex.add_phrase(polarity, lemmatize_phrase(fields[1], lemmatizer));
  }
  return lex;
}

FactualityLexicon FactualityLexicon::from_phrases(
    const std::vector<std::pair<Polarity, std::string>>& entries, const Lemmatizer& lemmatizer) {
  FactualityLexicon lex;
  for (const auto& [polarity, phrase] : entries) {
    lex.add_phrase(polarity, lemmatize_phrase(phrase, lemmatizer));
  }
  return lex;
}

// ---------------------------------------------------------------------------
// Matching

std::vector<ConceptMention> match_concepts(const Sentence& sentence, const ConceptLexicon& lexicon) {
  std::vector<ConceptMention> mentions;
  const auto& tokens = sentence.tokens;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::string concept_id;
    std::size_t len = lexicon.index().longest_match(tokens, i, &concept_id, nullptr);
    if (len > 0) {
      mentions.push_back({concept_id, i, i + len});
      i += len;
    } else {
      ++i;
    }
  }
  return mentions;
}

std::vector<FactualityMatch> match_factuality_terms(const Sentence& sentence,
                                                    const FactualityLexicon& lexicon) {
  std::vector<FactualityMatch> matches;
  const auto& tokens = sentence.tokens;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::string tag, phrase;
    std::size_t len = lexicon.index().longest_match(tokens, i, &tag, &phrase);
    if (len > 0) {
      matches.push_back({tag == "NEG" ? Polarity::Negation : Polarity::Uncertainty,
                         std::move(phrase), i, i + len});
      i += len;
    } else {
      ++i;
    }
  }
  return matches;
}

// ---------------------------------------------------------------------------
// CategoryMap

int CategoryMap::slot(const std::string& concept_id) const {
  auto it = slots_.find(concept_id);
  return it == slots_.end() ? -1 : it->second;
}

CategoryMap CategoryMap::load_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LexiconError("cannot open category map: " + path);
  CategoryMap map;
  std::string line;
  while (std::getline(in, line)) {
    if (skip_line(line)) continue;
    auto fields = split_tsv(line);
    if (fields.size() < 2) throw LexiconError("bad category map row: " + line);
    int slot = labels::category_index(fields[1]);
    if (slot < 0 || slot >= labels::kNumFindingSlots) {
      throw LexiconError("unknown observation category '" + fields[1] + "'");
    }
    map.set(fields[0], slot);
  }
  return map;
}

}  // namespace radcl::text
