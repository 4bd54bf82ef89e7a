// Golden tests for the concept/factuality annotator: a fixed set of clinical
// sentences must receive exact polarity, concept, and rule-id annotations
// with the bundled lexicons and pattern rules.
#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "radcl/text/annotate.hpp"
#include "radcl/text/corpus.hpp"
#include "radcl/text/lexicon.hpp"
#include "radcl/text/rules.hpp"

using namespace radcl::text;

namespace {

struct Fixtures {
  Lemmatizer lemmatizer;
  ConceptLexicon concepts;
  FactualityLexicon factuality;
  std::vector<PatternRule> rules;
  CategoryMap categories;
  Annotator annotator;

  Fixtures()
      : concepts(ConceptLexicon::load_tsv(RADCL_DATA_DIR "/concepts.tsv", lemmatizer)),
        factuality(FactualityLexicon::load_tsv(RADCL_DATA_DIR "/factuality.tsv", lemmatizer)),
        rules(load_rules(RADCL_DATA_DIR "/rules.txt", lemmatizer)),
        categories(CategoryMap::load_tsv(RADCL_DATA_DIR "/categories.tsv")),
        annotator(concepts, factuality, rules, categories) {}

  Sentence sentence(const std::string& text) const {
    Sentence s;
    s.report_id = "t";
    s.index = 0;
    s.section = "FINDINGS";
    s.text = text;
    s.tokens = tokenize(text, lemmatizer);
    return s;
  }
};

const Fixtures& fixtures() {
  static const Fixtures f;
  return f;
}

bool has_rule(const SentenceAnnotation& ann, const std::string& rule_id) {
  return std::find(ann.matched_rule_ids.begin(), ann.matched_rule_ids.end(), rule_id) !=
         ann.matched_rule_ids.end();
}

}  // namespace

TEST_CASE("negation pattern rules match their published example sentences") {
  const auto& f = fixtures();
  struct Golden {
    const char* text;
    const char* rule_id;
  };
  // Rule R1: * + {clear,free,disappearance} + <of> + * + CONCEPT
  // Rule R2: * + {no,not} + {evidence,*} + <of|for> + * + CONCEPT
  const std::vector<Golden> goldens = {
      {"the left lung is free of consolidations or pneumothorax", "R1"},
      {"the lungs are clear of any focal consolidation", "R1"},
      {"pleural sinuses are free of any fluid accumulation", "R1"},
      {"within the remaining well-ventilated lung, there is no evidence of pneumonia", "R2"},
      {"there is not evidence for pulmonary edema", "R2"},
      {"there are no evidences of acute pneumothorax", "R2"},
  };
  for (const auto& g : goldens) {
    CAPTURE(g.text);
    const auto ann = f.annotator.annotate(f.sentence(g.text));
    CHECK(ann.factuality == Factuality::Negated);
    CHECK(has_rule(ann, g.rule_id));
  }
}

TEST_CASE("uncertainty pattern rules match their published example sentences") {
  const auto& f = fixtures();
  struct Golden {
    const char* text;
    const char* rule_id;
  };
  // Rule R3: * + {suggest,suspect,suggestive,suspicious} + * + CONCEPT
  // Rule R4: * + {could,may,might} + {be,represent,reflect} + * + CONCEPT
  const std::vector<Golden> goldens = {
      {"there are bibasilar opacities which could be due to atelectasis given low lung volumes",
       "R4"},
      {"perihilar opacity could be due to asymmetrical edema", "R4"},
      {"left base opacity may be due to atelectasis", "R4"},
      {"signs of parenchymal changes suggesting pneumonia", "R3"},
      {"the left heart border is silhouetted, with a suspected left basilar opacity", "R3"},
      {"prominence of the central pulmonary vasculature suggesting mild pulmonary edema", "R3"},
  };
  for (const auto& g : goldens) {
    CAPTURE(g.text);
    const auto ann = f.annotator.annotate(f.sentence(g.text));
    CHECK(ann.factuality == Factuality::Uncertain);
    CHECK(has_rule(ann, g.rule_id));
  }
}

TEST_CASE("anchor and key sentences receive the expected concept and factuality") {
  const auto& f = fixtures();
  struct Golden {
    const char* text;
    const char* concept_id;
    Factuality factuality;
  };
  const std::vector<Golden> goldens = {
      {"definite focal consolidation is seen in left side of lungs", "consolidation",
       Factuality::Affirmed},
      {"there is a focal consolidation at the left lung base adjacent to the lateral "
       "hemidiaphragm",
       "consolidation", Factuality::Affirmed},
      {"there are low lung volumes and mild bibasilar atelectasis", "atelectasis",
       Factuality::Affirmed},
      {"the lungs are clear of any focal consolidation", "consolidation", Factuality::Negated},
  };
  for (const auto& g : goldens) {
    CAPTURE(g.text);
    const auto ann = f.annotator.annotate(f.sentence(g.text));
    CHECK(ann.primary_concept == g.concept_id);
    CHECK(ann.factuality == g.factuality);
  }
}

TEST_CASE("concept matching is greedy longest-match and never overlaps") {
  Lemmatizer lem;
  const auto lexicon = ConceptLexicon::from_phrases(
      {{"consolidation", "consolidation"}, {"consolidation", "focal consolidation"}}, lem);

  Sentence s;
  s.text = "focal consolidation is seen";
  s.tokens = tokenize(s.text, lem);
  const auto mentions = match_concepts(s, lexicon);
  REQUIRE(mentions.size() == 1);
  CHECK(mentions[0].concept_id == "consolidation");
  CHECK(mentions[0].begin == 0);
  CHECK(mentions[0].end == 2);
}

TEST_CASE("adjacent same-prefix phrases resolve to distinct concepts") {
  const auto& f = fixtures();
  const auto s = f.sentence("pleural effusion and pleural edema");
  const auto mentions = match_concepts(s, f.concepts);
  REQUIRE(mentions.size() == 2);
  CHECK(mentions[0].concept_id == "pleural_effusion");
  CHECK(mentions[1].concept_id == "edema");
  // Spans are ordered and disjoint.
  CHECK(mentions[0].end <= mentions[1].begin);
}

TEST_CASE("sentences without lexicon concepts produce no mentions") {
  Lemmatizer lem;
  const auto diseases_only =
      ConceptLexicon::from_phrases({{"pneumonia", "pneumonia"}, {"edema", "edema"}}, lem);
  Sentence s;
  s.text = "heart size normal";
  s.tokens = tokenize(s.text, lem);
  CHECK(match_concepts(s, diseases_only).empty());
}

TEST_CASE("factuality keywords match as whole phrases") {
  const auto& f = fixtures();

  SUBCASE("multi-word negation phrase wins over its single-word prefix") {
    const auto s = f.sentence("no evidence of pneumonia");
    const auto matches = match_factuality_terms(s, f.factuality);
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].polarity == Polarity::Negation);
    CHECK(matches[0].phrase == "no evidence of");
    CHECK(matches[0].begin == 0);
    CHECK(matches[0].end == 3);
  }

  SUBCASE("uncertainty phrase") {
    const auto s = f.sentence("could be due to atelectasis");
    const auto matches = match_factuality_terms(s, f.factuality);
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].polarity == Polarity::Uncertainty);
    CHECK(matches[0].phrase == "could be");
  }

  SUBCASE("phrase boundaries are respected") {
    // "clear of" is in the lexicon; bare "clear" is not.
    Lemmatizer lem;
    const auto lexicon =
        FactualityLexicon::from_phrases({{Polarity::Negation, "clear of"}}, lem);
    Sentence s;
    s.text = "lungs are clear.";
    s.tokens = tokenize(s.text, lem);
    CHECK(match_factuality_terms(s, lexicon).empty());
  }
}

TEST_CASE("negation outranks uncertainty when both match") {
  const auto& f = fixtures();
  const auto ann =
      f.annotator.annotate(f.sentence("no evidence of pneumonia, possibly atelectasis"));
  CHECK(ann.factuality == Factuality::Negated);
}

TEST_CASE("uncertainty keyword alone marks the sentence uncertain") {
  const auto& f = fixtures();
  const auto ann =
      f.annotator.annotate(f.sentence("subtle opacity at the right base could represent infection"));
  CHECK(ann.primary_concept == "lung_opacity");
  CHECK(ann.factuality == Factuality::Uncertain);
}

TEST_CASE("affirmed sentences record no rules and no factuality spans") {
  const auto& f = fixtures();
  const auto ann = f.annotator.annotate(f.sentence("there is a small left pleural effusion"));
  CHECK(ann.factuality == Factuality::Affirmed);
  CHECK(ann.matched_rule_ids.empty());
  CHECK(ann.primary_concept == "pleural_effusion");
}

TEST_CASE("protected indices cover concept mentions and factuality spans") {
  const auto& f = fixtures();
  const auto s = f.sentence("the lungs are clear of any focal consolidation");
  const auto ann = f.annotator.annotate(s);
  // Tokens: the lungs are clear of any focal consolidation
  //          0    1    2    3   4   5    6        7
  for (std::size_t i : {std::size_t(3), std::size_t(4), std::size_t(6), std::size_t(7)}) {
    CAPTURE(i);
    CHECK(ann.is_protected(i));
  }
  CHECK_FALSE(ann.is_protected(0));
  CHECK_FALSE(ann.is_protected(5));
}

TEST_CASE("annotation is deterministic across repeated runs") {
  const auto& f = fixtures();
  const auto s = f.sentence("there is no evidence of pneumonia in the left lung");
  const auto a = f.annotator.annotate(s);
  const auto b = f.annotator.annotate(s);
  CHECK(a.factuality == b.factuality);
  CHECK(a.matched_rule_ids == b.matched_rule_ids);
  CHECK(a.protected_token_indices == b.protected_token_indices);
  CHECK(a.concept_mentions.size() == b.concept_mentions.size());
}

TEST_CASE("anatomy-only sentences carry no primary concept") {
  const auto& f = fixtures();
  const auto ann = f.annotator.annotate(f.sentence("the cardiac silhouette is within normal limits"));
  CHECK_FALSE(ann.has_disease());
  CHECK(ann.primary_concept.empty());
}
