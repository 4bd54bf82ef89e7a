#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace radcl::text {

// Reserved token that stands in for runs of de-identification underscores.
inline constexpr std::string_view kDeidToken = "__deid__";

struct Token {
  std::string surface;      // original casing, exactly as in the sentence text
  std::string lemma;        // lowercased + suffix-stripped
  std::size_t begin = 0;    // byte offsets into the owning sentence text
  std::size_t end = 0;
};

struct Sentence {
  std::string report_id;
  int index = 0;            // position within the report's sentence list
  std::string section;      // section the sentence came from (e.g. FINDINGS)
  std::string text;
  std::vector<Token> tokens;
};

struct Report {
  std::string report_id;
  std::string patient_id;
  // Ordered (name, normalized body). Unrecognized text lands in "BODY".
  std::vector<std::pair<std::string, std::string>> sections;
  std::vector<Sentence> sentences;

  const std::string* find_section(std::string_view name) const;
  // FINDINGS + IMPRESSION bodies concatenated; falls back to every section
  // when neither is present.
  std::string classification_text() const;
};

// Rule-based suffix stripper. The exception table is consulted first and
// wins; -ing/-ed/-d are stripped only when the remainder is a known verb.
class Lemmatizer {
 public:
  Lemmatizer();  // built-in clinical defaults
  Lemmatizer(std::set<std::string> verbs, std::map<std::string, std::string> exceptions);

  std::string lemma(std::string_view surface) const;

  void add_verb(std::string v) { verbs_.insert(std::move(v)); }
  void add_exception(std::string surface, std::string lemma) {
    exceptions_[std::move(surface)] = std::move(lemma);
  }

 private:
  std::set<std::string> verbs_;
  std::map<std::string, std::string> exceptions_;
};

struct PreprocessOptions {
  // Section headers recognized at line start (case-insensitive, before ':').
  std::set<std::string> known_headers = {
      "BACKGROUND", "FINDINGS",    "IMPRESSION", "IMPRESSIONS", "COMPARISON",
      "INDICATION", "TECHNIQUE",   "EXAMINATION", "HISTORY",    "CLINICAL HISTORY",
      "RECOMMENDATION"};
  // A trailing '.' on these words never ends a sentence.
  std::set<std::string> abbreviations = {"dr", "mr", "mrs", "a.m", "p.m", "e.g", "i.e"};
  // "no." is an abbreviation only when followed by a digit.
  bool numeric_no_guard = true;
};

// Collapses whitespace runs to single spaces, trims, and replaces runs of
// two or more underscores with __deid__.
std::string normalize_text(std::string_view raw);

// Splits raw text into sections and normalizes each body.
// Throws EmptyReport when raw has no alphabetic characters.
Report parse_report(std::string_view raw, std::string report_id, std::string patient_id,
                    const PreprocessOptions& opts = {});

// Sentence boundaries at . ! ? followed by whitespace/end, with abbreviation
// guards; sentences with fewer than 2 tokens are dropped. Covers every
// section of the report; each sentence carries its section name.
std::vector<Sentence> split_sentences(const Report& report, const Lemmatizer& lemmatizer,
                                      const PreprocessOptions& opts = {});

// Word/punctuation tokenization; __deid__ is atomic. Spans index into text.
std::vector<Token> tokenize(std::string_view text, const Lemmatizer& lemmatizer);

// parse_report + split_sentences, storing the sentences on the report.
Report preprocess_report(std::string_view raw, std::string report_id, std::string patient_id,
                         const Lemmatizer& lemmatizer, const PreprocessOptions& opts = {});

std::string to_lower(std::string_view s);

// Lemma sequence of a phrase (tokenizes then lemmatizes each word).
std::vector<std::string> lemmatize_phrase(std::string_view phrase, const Lemmatizer& lemmatizer);

}  // namespace radcl::text
