#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "radcl/rng.hpp"
#include "radcl/text/annotate.hpp"
#include "radcl/text/corpus.hpp"

namespace radcl::text {

struct AugmentationPolicy {
  double p_word_delete = 0.2;
  double p_span_delete = 0.2;
  double p_reorder = 0.2;
  double p_synonym = 0.2;
  std::size_t max_span_len = 3;
  std::map<std::string, std::vector<std::string>> synonym_table;  // lemma -> lemmas

  // Cap on same-disease opposite-factuality negatives per row in
  // disease+factuality sampling; 0 means no cap. Capping reserves the
  // remaining slots for different-disease sentences, which keeps disease
  // identity discriminative instead of letting the contrastive optimum
  // collapse onto a factuality-only code.
  std::size_t max_hard_negatives = 0;

  void validate() const;
};

// Loads "lemma<TAB>replacement" rows (comments/blanks skipped); both columns
// are lemmatized and must be single tokens.
std::map<std::string, std::vector<std::string>> load_synonyms_tsv(
    const std::string& path, const Lemmatizer& lemmatizer);

// A (possibly augmented) token sequence fed to the encoder or dumped for
// inspection.
struct TextView {
  std::string source_id;  // report_id or sentence_id of the source
  std::vector<Token> tokens;

  std::string text() const;
  std::vector<std::string> lemmas() const;
};

bool same_lemmas(const TextView& a, const TextView& b);

// Word/span deletion on one sentence; protected tokens always survive.
TextView augment_sentence(const Sentence& sentence, const SentenceAnnotation& annotation,
                          const AugmentationPolicy& policy, Rng& rng);

// Word/span deletion, sentence reordering, and synonym substitution on a
// whole report; each operation fires with its policy probability.
TextView augment_document(const Report& report,
                          const std::vector<SentenceAnnotation>& annotations,
                          const AugmentationPolicy& policy, Rng& rng);

struct ContrastiveBatch {
  enum class Granularity { Sentence, Document };

  struct Meta {
    std::string concept_id;  // anchor's disease concept (sentence-level)
    std::string factuality;  // anchor's factuality (sentence-level)
    std::string patient;     // anchor's patient (document-level)
  };

  // Provenance of one drawn negative, for contract checks and inspection.
  struct NegativeMeta {
    std::string concept_id;  // source sentence's disease concept
    std::string factuality;  // source sentence's factuality
    std::string patient;     // source report's patient (document-level)
    bool hard = false;       // same concept as the anchor, flipped factuality
  };

  Granularity granularity = Granularity::Sentence;
  std::size_t k = 0;
  std::vector<TextView> queries;
  std::vector<TextView> positives;
  std::vector<std::vector<TextView>> negatives;  // k per query
  std::vector<Meta> meta;
  std::vector<std::vector<NegativeMeta>> negative_meta;  // parallel to negatives

  std::size_t size() const { return queries.size(); }
};

// One sentence of the sampling pool: annotation alongside its sentence.
struct SentenceRef {
  const Sentence* sentence = nullptr;
  const SentenceAnnotation* annotation = nullptr;
};

// Sentences eligible for sentence-level sampling: at least one disease
// mention, not in BACKGROUND. With affirmed_only, factuality must be
// Affirmed (disease-based sampling discards negated/uncertain sentences).
std::vector<SentenceRef> build_sentence_pool(
    const std::vector<Report>& reports,
    const std::map<std::string, std::vector<SentenceAnnotation>>& annotations,
    bool affirmed_only);

// Document-level pairs: query/positive are two reports of one patient,
// negatives come from other patients.
ContrastiveBatch sample_patient_pairs(
    const std::vector<Report>& reports,
    const std::map<std::string, std::vector<SentenceAnnotation>>& annotations,
    std::size_t batch_size, std::size_t k, const AugmentationPolicy& policy, Rng& rng);

// Sentence-level pairs: positive shares the anchor's disease concept,
// negatives mention different diseases. Pool must be affirmed-only.
ContrastiveBatch sample_disease_pairs(const std::vector<SentenceRef>& pool,
                                      std::size_t batch_size, std::size_t k,
                                      const AugmentationPolicy& policy, Rng& rng);

// Sentence-level pairs keyed by (disease, binarized factuality): positive
// shares both; negatives are same-disease opposite-factuality sentences
// (hard), topped up with different-disease sentences when scarce or when
// policy.max_hard_negatives caps the hard share of a row.
ContrastiveBatch sample_disease_factuality_pairs(const std::vector<SentenceRef>& pool,
                                                 std::size_t batch_size, std::size_t k,
                                                 const AugmentationPolicy& policy, Rng& rng);

}  // namespace radcl::text
