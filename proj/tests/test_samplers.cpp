// Contrastive pair samplers: patient-level document pairs, disease-keyed
// sentence pairs, and (disease, factuality)-keyed sentence pairs. Contracts
// are checked on every draw over small pools.
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "radcl/errors.hpp"
#include "radcl/rng.hpp"
#include "radcl/text/annotate.hpp"
#include "radcl/text/augment.hpp"
#include "radcl/text/corpus.hpp"
#include "radcl/text/lexicon.hpp"
#include "radcl/text/rules.hpp"

using namespace radcl;
using namespace radcl::text;

namespace {

struct Stack {
  Lemmatizer lemmatizer;
  ConceptLexicon concepts;
  FactualityLexicon factuality;
  std::vector<PatternRule> rules;
  CategoryMap categories;
  Annotator annotator;

  Stack()
      : concepts(ConceptLexicon::load_tsv(RADCL_DATA_DIR "/concepts.tsv", lemmatizer)),
        factuality(FactualityLexicon::load_tsv(RADCL_DATA_DIR "/factuality.tsv", lemmatizer)),
        rules(load_rules(RADCL_DATA_DIR "/rules.txt", lemmatizer)),
        categories(CategoryMap::load_tsv(RADCL_DATA_DIR "/categories.tsv")),
        annotator(concepts, factuality, rules, categories) {}
};

const Stack& stack() {
  static const Stack s;
  return s;
}

// Owns sentences and annotations so SentenceRef pointers stay valid.
struct Pool {
  std::vector<Sentence> sentences;
  std::vector<SentenceAnnotation> annotations;

  explicit Pool(std::size_t capacity) {
    sentences.reserve(capacity);
    annotations.reserve(capacity);
  }

  void add(const std::string& text) {
    Sentence s;
    s.report_id = "r" + std::to_string(sentences.size());
    s.index = 0;
    s.section = "FINDINGS";
    s.text = text;
    s.tokens = tokenize(text, stack().lemmatizer);
    sentences.push_back(std::move(s));
    annotations.push_back(stack().annotator.annotate(sentences.back()));
  }

  std::vector<SentenceRef> refs() const {
    std::vector<SentenceRef> out;
    for (std::size_t i = 0; i < sentences.size(); ++i)
      out.push_back({&sentences[i], &annotations[i]});
    return out;
  }
};

// Re-annotates an augmented view; protected spans survive augmentation, so
// the view must carry the same concept and binarized factuality as its
// source.
SentenceAnnotation annotate_view(const TextView& view) {
  Sentence s;
  s.report_id = view.source_id;
  s.tokens = view.tokens;
  return stack().annotator.annotate(s);
}

// Six affirmed/non-affirmed pneumonia sentences plus two other concepts.
Pool make_mixed_pool() {
  Pool pool(12);
  pool.add("pneumonia is seen in the left lung base");
  pool.add("there is pneumonia in the right upper lobe");
  pool.add("definite pneumonia is observed");
  pool.add("no evidence of pneumonia");
  pool.add("pneumonia has been ruled out");
  pool.add("questionable pneumonia at the left base");
  pool.add("there is interstitial edema");
  pool.add("stable interstitial edema is seen");
  pool.add("no evidence of interstitial edema");
  pool.add("bibasilar atelectasis is seen");
  pool.add("stable bibasilar atelectasis");
  pool.add("bibasilar atelectasis has resolved");
  return pool;
}

AugmentationPolicy identity_policy() {
  AugmentationPolicy p;
  p.p_word_delete = 0;
  p.p_span_delete = 0;
  p.p_reorder = 0;
  p.p_synonym = 0;
  return p;
}

}  // namespace

TEST_CASE("patient-level pairs stay within a patient and negatives outside it") {
  const auto& st = stack();
  // p1 and p2 have multiple reports; p3..p6 are singletons (negative-only).
  struct Spec {
    const char* report_id;
    const char* patient_id;
    const char* text;
  };
  const std::vector<Spec> specs = {
      {"r1", "p1", "FINDINGS: There is a small left pleural effusion. Stable cardiomegaly."},
      {"r2", "p1", "FINDINGS: The left pleural effusion has resolved. Heart size is normal."},
      {"r3", "p1", "FINDINGS: No evidence of pleural effusion. Lungs are well expanded."},
      {"r4", "p2", "FINDINGS: Bibasilar atelectasis is seen. No pneumothorax is identified."},
      {"r5", "p2", "FINDINGS: Stable bibasilar atelectasis. Lungs are otherwise unchanged."},
      {"r6", "p3", "FINDINGS: There is pulmonary edema. Interval worsening of vascular congestion."},
      {"r7", "p4", "FINDINGS: No evidence of pneumonia. The lungs are well inflated."},
      {"r8", "p5", "FINDINGS: Questionable patchy opacity at the right base."},
      {"r9", "p6", "FINDINGS: There is a rib fracture. No pneumothorax is seen."},
  };
  std::vector<Report> reports;
  std::map<std::string, std::vector<SentenceAnnotation>> annotations;
  std::map<std::string, std::string> patient_of;
  for (const auto& s : specs) {
    reports.push_back(preprocess_report(s.text, s.report_id, s.patient_id, st.lemmatizer));
    annotations[s.report_id] = {};
    for (const auto& sent : reports.back().sentences)
      annotations[s.report_id].push_back(st.annotator.annotate(sent));
    patient_of[s.report_id] = s.patient_id;
  }

  AugmentationPolicy policy;  // default probabilities
  const std::size_t k = 3;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(seed);
    const auto batch = sample_patient_pairs(reports, annotations, 8, k, policy, rng);
    REQUIRE(batch.size() == 8);
    REQUIRE(batch.k == k);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      CAPTURE(seed);
      CAPTURE(i);
      const std::string& anchor_patient = batch.meta[i].patient;
      // Query and positive: two distinct reports of one patient.
      CHECK(patient_of.at(batch.queries[i].source_id) == anchor_patient);
      CHECK(patient_of.at(batch.positives[i].source_id) == anchor_patient);
      CHECK(batch.queries[i].source_id != batch.positives[i].source_id);
      REQUIRE(batch.negatives[i].size() == k);
      REQUIRE(batch.negative_meta[i].size() == k);
      std::set<std::string> sources;
      for (std::size_t j = 0; j < k; ++j) {
        const auto& view = batch.negatives[i][j];
        const auto& meta = batch.negative_meta[i][j];
        // Patient disjointness on every negative.
        CHECK(patient_of.at(view.source_id) != anchor_patient);
        CHECK(meta.patient == patient_of.at(view.source_id));
        CHECK_FALSE(same_lemmas(view, batch.positives[i]));
        sources.insert(view.source_id);
      }
      CHECK(sources.size() == k);  // without replacement within the row
    }
  }
}

TEST_CASE("patient-level sampling rejects pools it cannot serve") {
  const auto& st = stack();
  std::vector<Report> reports;
  std::map<std::string, std::vector<SentenceAnnotation>> annotations;
  auto add = [&](const std::string& rid, const std::string& pid) {
    reports.push_back(preprocess_report("FINDINGS: Heart size is normal. Lungs are clear.", rid,
                                        pid, st.lemmatizer));
    annotations[rid] = {};
    for (const auto& s : reports.back().sentences)
      annotations[rid].push_back(st.annotator.annotate(s));
  };

  AugmentationPolicy policy = identity_policy();
  Rng rng(1);

  SUBCASE("fewer than k+2 reports") {
    add("r1", "p1");
    add("r2", "p1");
    CHECK_THROWS_AS(sample_patient_pairs(reports, annotations, 1, 4, policy, rng),
                    InsufficientData);
  }

  SUBCASE("no patient with two reports") {
    add("r1", "p1");
    add("r2", "p2");
    add("r3", "p3");
    add("r4", "p4");
    CHECK_THROWS_AS(sample_patient_pairs(reports, annotations, 1, 2, policy, rng),
                    InsufficientData);
  }
}

TEST_CASE("disease-keyed pairs share the anchor concept and negatives never do") {
  Pool pool(8);
  pool.add("pneumonia is seen in the left lung base");
  pool.add("there is pneumonia in the right upper lobe");
  pool.add("definite pneumonia is observed");
  pool.add("there is interstitial edema");
  pool.add("stable interstitial edema is seen");
  pool.add("bibasilar atelectasis is seen");
  pool.add("stable bibasilar atelectasis");
  pool.add("there is a small left pleural effusion");
  const auto refs = pool.refs();

  AugmentationPolicy policy;  // default probabilities to exercise augmentation
  const std::size_t k = 3;
  std::set<std::string> anchors_seen;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto batch = sample_disease_pairs(refs, 8, k, policy, rng);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      CAPTURE(seed);
      CAPTURE(i);
      const std::string& concept_id = batch.meta[i].concept_id;
      anchors_seen.insert(concept_id);
      // The augmented views still carry their annotations.
      CHECK(annotate_view(batch.queries[i]).primary_concept == concept_id);
      CHECK(annotate_view(batch.positives[i]).primary_concept == concept_id);
      REQUIRE(batch.negatives[i].size() == k);
      for (std::size_t j = 0; j < k; ++j) {
        const auto& meta = batch.negative_meta[i][j];
        CHECK(meta.concept_id != concept_id);  // disease disjointness
        CHECK(annotate_view(batch.negatives[i][j]).primary_concept == meta.concept_id);
        CHECK_FALSE(same_lemmas(batch.negatives[i][j], batch.positives[i]));
      }
    }
  }
  // Every multi-sentence concept group is reachable as an anchor.
  CHECK(anchors_seen ==
        std::set<std::string>{"pneumonia", "edema", "atelectasis"});
}

TEST_CASE("sentence pool construction filters scope, polarity, and background") {
  const auto& st = stack();
  const std::string raw =
      "BACKGROUND: history of pneumonia.\n"
      "FINDINGS: There is a small pleural effusion. No evidence of pneumothorax. "
      "Heart size is normal.\n"
      "IMPRESSION: Possible interstitial edema.";
  std::vector<Report> reports{preprocess_report(raw, "r1", "p1", st.lemmatizer)};
  std::map<std::string, std::vector<SentenceAnnotation>> annotations;
  annotations["r1"] = {};
  for (const auto& s : reports[0].sentences)
    annotations["r1"].push_back(st.annotator.annotate(s));

  const auto all = build_sentence_pool(reports, annotations, /*affirmed_only=*/false);
  // BACKGROUND pneumonia and the no-disease sentence are excluded; the
  // effusion, pneumothorax, and edema sentences remain.
  REQUIRE(all.size() == 3);
  std::set<std::string> ids;
  for (const auto& r : all) ids.insert(r.annotation->primary_concept);
  CHECK(ids == std::set<std::string>{"pleural_effusion", "pneumothorax", "edema"});

  const auto affirmed = build_sentence_pool(reports, annotations, /*affirmed_only=*/true);
  REQUIRE(affirmed.size() == 1);
  CHECK(affirmed[0].annotation->primary_concept == "pleural_effusion");
}

TEST_CASE("strict factuality rows are hard negatives with flipped factuality") {
  // Only pneumonia has pairable (concept, factuality) groups, and both of its
  // sides hold three sentences, so every anchor sees >= k hard negatives.
  Pool pool(9);
  pool.add("pneumonia is seen in the left lung base");
  pool.add("there is pneumonia in the right upper lobe");
  pool.add("definite pneumonia is observed");
  pool.add("no evidence of pneumonia");
  pool.add("pneumonia has been ruled out");
  pool.add("questionable pneumonia at the left base");
  pool.add("there is interstitial edema");
  pool.add("no evidence of interstitial edema");
  pool.add("bibasilar atelectasis is seen");
  const auto refs = pool.refs();
  AugmentationPolicy policy = identity_policy();  // exact views: contracts are sharp
  const std::size_t k = 2;

  std::set<std::string> anchor_keys;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto batch = sample_disease_factuality_pairs(refs, 8, k, policy, rng);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      CAPTURE(seed);
      CAPTURE(i);
      const auto& meta = batch.meta[i];
      const auto q = annotate_view(batch.queries[i]);
      const auto p = annotate_view(batch.positives[i]);
      anchor_keys.insert(meta.concept_id + "/" + (is_affirmed(q.factuality) ? "aff" : "non"));
      // Positive shares (concept, binarized factuality) with the query.
      CHECK(q.primary_concept == meta.concept_id);
      CHECK(p.primary_concept == meta.concept_id);
      CHECK(is_affirmed(p.factuality) == is_affirmed(q.factuality));
      REQUIRE(batch.negatives[i].size() == k);
      for (std::size_t j = 0; j < k; ++j) {
        const auto& nm = batch.negative_meta[i][j];
        const auto n = annotate_view(batch.negatives[i][j]);
        // With k=2, no cap, and 3 flipped sentences available, every
        // negative must be hard.
        CHECK(nm.hard);
        CHECK(nm.concept_id == meta.concept_id);
        CHECK(n.primary_concept == meta.concept_id);
        CHECK(is_affirmed(n.factuality) != is_affirmed(q.factuality));
        CHECK_FALSE(same_lemmas(batch.negatives[i][j], batch.positives[i]));
      }
    }
  }
  // Both factuality sides of pneumonia anchor at some point; edema and
  // atelectasis groups are singletons per key and never anchor.
  CHECK(anchor_keys == std::set<std::string>{"pneumonia/aff", "pneumonia/non"});
}

TEST_CASE("capped factuality rows mix hard and different-concept negatives") {
  const Pool pool = make_mixed_pool();
  const auto refs = pool.refs();
  AugmentationPolicy policy = identity_policy();
  policy.max_hard_negatives = 1;
  const std::size_t k = 3;

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto batch = sample_disease_factuality_pairs(refs, 8, k, policy, rng);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      CAPTURE(seed);
      CAPTURE(i);
      const auto& meta = batch.meta[i];
      const auto q = annotate_view(batch.queries[i]);
      std::size_t hard_count = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const auto& nm = batch.negative_meta[i][j];
        if (nm.hard) {
          ++hard_count;
          CHECK(nm.concept_id == meta.concept_id);
          CHECK(is_affirmed(annotate_view(batch.negatives[i][j]).factuality) !=
                is_affirmed(q.factuality));
        } else {
          // Fallback negatives come from other concepts, any factuality.
          CHECK(nm.concept_id != meta.concept_id);
        }
      }
      // The fallback pool (6 non-pneumonia sentences) can always fill the
      // remaining slots, so exactly one hard negative per row.
      CHECK(hard_count == 1);
    }
  }
}

TEST_CASE("factuality pairing binarizes negated and uncertain together") {
  // Pneumonia: one negated, one uncertain, two affirmed. The non-affirmed
  // group has size two, so a negated anchor must take the uncertain sentence
  // as its positive. Extra concepts supply nothing hard here.
  Pool pool(8);
  pool.add("no evidence of pneumonia");                      // negated
  pool.add("questionable pneumonia at the left base");       // uncertain
  pool.add("pneumonia is seen in the left lung base");       // affirmed
  pool.add("there is pneumonia in the right upper lobe");    // affirmed
  pool.add("there is interstitial edema");
  pool.add("stable interstitial edema is seen");
  const auto refs = pool.refs();

  AugmentationPolicy policy = identity_policy();
  const std::size_t k = 2;
  bool saw_non_affirmed_anchor = false;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed);
    const auto batch = sample_disease_factuality_pairs(refs, 4, k, policy, rng);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto q = annotate_view(batch.queries[i]);
      const auto p = annotate_view(batch.positives[i]);
      CHECK(is_affirmed(p.factuality) == is_affirmed(q.factuality));
      if (!is_affirmed(q.factuality)) {
        saw_non_affirmed_anchor = true;
        // Negated anchor pairs with the uncertain sentence (or vice versa):
        // both are non-affirmed pneumonia.
        CHECK(p.primary_concept == "pneumonia");
        CHECK_FALSE(is_affirmed(p.factuality));
      }
    }
  }
  CHECK(saw_non_affirmed_anchor);
}

TEST_CASE("factuality contracts survive default augmentation probabilities") {
  const Pool pool = make_mixed_pool();
  const auto refs = pool.refs();
  AugmentationPolicy policy;  // default 0.2 deletion probabilities
  const std::size_t k = 2;

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto batch = sample_disease_factuality_pairs(refs, 8, k, policy, rng);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      CAPTURE(seed);
      CAPTURE(i);
      const auto q = annotate_view(batch.queries[i]);
      const auto p = annotate_view(batch.positives[i]);
      CHECK(q.primary_concept == batch.meta[i].concept_id);
      CHECK(p.primary_concept == batch.meta[i].concept_id);
      CHECK(is_affirmed(p.factuality) == is_affirmed(q.factuality));
      for (std::size_t j = 0; j < k; ++j) {
        if (batch.negative_meta[i][j].hard) {
          const auto n = annotate_view(batch.negatives[i][j]);
          CHECK(n.primary_concept == batch.meta[i].concept_id);
          CHECK(is_affirmed(n.factuality) != is_affirmed(q.factuality));
        }
      }
    }
  }
}

TEST_CASE("sentence samplers are reproducible for a fixed seed") {
  const Pool pool = make_mixed_pool();
  const auto refs = pool.refs();
  AugmentationPolicy policy;

  Rng a(7), b(7);
  const auto ba = sample_disease_factuality_pairs(refs, 8, 2, policy, a);
  const auto bb = sample_disease_factuality_pairs(refs, 8, 2, policy, b);
  REQUIRE(ba.size() == bb.size());
  for (std::size_t i = 0; i < ba.size(); ++i) {
    CHECK(same_lemmas(ba.queries[i], bb.queries[i]));
    CHECK(same_lemmas(ba.positives[i], bb.positives[i]));
    for (std::size_t j = 0; j < ba.negatives[i].size(); ++j) {
      CHECK(same_lemmas(ba.negatives[i][j], bb.negatives[i][j]));
      CHECK(ba.negative_meta[i][j].hard == bb.negative_meta[i][j].hard);
    }
  }
}

TEST_CASE("sentence samplers reject pools without a viable anchor") {
  AugmentationPolicy policy = identity_policy();
  Rng rng(3);

  SUBCASE("all groups are singletons") {
    Pool pool(3);
    pool.add("pneumonia is seen in the left lung base");
    pool.add("there is interstitial edema");
    pool.add("bibasilar atelectasis is seen");
    CHECK_THROWS_AS(sample_disease_pairs(pool.refs(), 2, 1, policy, rng), InsufficientData);
    CHECK_THROWS_AS(sample_disease_factuality_pairs(pool.refs(), 2, 1, policy, rng),
                    InsufficientData);
  }

  SUBCASE("groups pair up but negatives are too few for k") {
    Pool pool(2);
    pool.add("pneumonia is seen in the left lung base");
    pool.add("there is pneumonia in the right upper lobe");
    CHECK_THROWS_AS(sample_disease_pairs(pool.refs(), 2, 1, policy, rng), InsufficientData);
    CHECK_THROWS_AS(sample_disease_factuality_pairs(pool.refs(), 2, 1, policy, rng),
                    InsufficientData);
  }
}
