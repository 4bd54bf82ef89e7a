#pragma once

#include <string>
#include <vector>

#include "radcl/text/corpus.hpp"
#include "radcl/text/lexicon.hpp"

namespace radcl::text {

// Pattern rule in the style of
//   NEG := * + {clear,free,disappearance} + <of> + * + CONCEPT
// One line per rule; '*' matches 0..kWildcardBound tokens, {..} matches one
// phrase from the set ('*' inside the braces admits a bounded token run),
// <a|b> matches one preposition, CONCEPT matches a disease concept mention.
struct PatternRule {
  struct Element {
    enum class Kind { Wildcard, TermClass, Prep, Concept };
    Kind kind = Kind::Wildcard;
    std::vector<std::vector<std::string>> phrases;  // TermClass alternatives, lemmatized
    bool term_wildcard = false;                     // '*' listed inside the braces
    std::vector<std::string> preps;
  };

  std::string rule_id;
  Polarity polarity = Polarity::Negation;
  std::vector<Element> elements;
};

inline constexpr std::size_t kWildcardBound = 10;

struct RuleMatch {
  std::string rule_id;
  Polarity polarity = Polarity::Negation;
  std::size_t mention_index = 0;                     // into the mentions list
  std::vector<std::pair<std::size_t, std::size_t>> term_spans;  // TermClass/Prep token spans
};

// Parses the rule DSL; rule ids are R1..Rn in file order.
// Throws MalformedRule on syntax errors or invariant violations
// (exactly one CONCEPT element, at least one term class).
std::vector<PatternRule> parse_rules(const std::string& text, const Lemmatizer& lemmatizer);
std::vector<PatternRule> load_rules(const std::string& path, const Lemmatizer& lemmatizer);

// Leftmost-first alignment of each rule against the token sequence, with the
// CONCEPT element pinned to each disease mention in turn. A rule may match
// several mentions. Tokens after the final element are ignored.
std::vector<RuleMatch> apply_rules(const Sentence& sentence,
                                   const std::vector<ConceptMention>& mentions,
                                   const std::vector<PatternRule>& rules,
                                   const CategoryMap& categories);

}  // namespace radcl::text
