#include "radcl/text/rules.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "radcl/errors.hpp"

namespace radcl::text {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])) != 0) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])) != 0) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

PatternRule::Element parse_element(const std::string& raw, const Lemmatizer& lemmatizer,
                                   const std::string& line) {
  PatternRule::Element el;
  if (raw == "*") {
    el.kind = PatternRule::Element::Kind::Wildcard;
    return el;
  }
  if (raw == "CONCEPT") {
    el.kind = PatternRule::Element::Kind::Concept;
    return el;
  }
  if (raw.size() >= 2 && raw.front() == '{' && raw.back() == '}') {
    el.kind = PatternRule::Element::Kind::TermClass;
    for (const std::string& alt : split_on(raw.substr(1, raw.size() - 2), ',')) {
      if (alt == "*") {
        el.term_wildcard = true;
        continue;
      }
      auto lemmas = lemmatize_phrase(alt, lemmatizer);
      if (lemmas.empty()) throw MalformedRule("empty term alternative in rule: " + line);
      el.phrases.push_back(std::move(lemmas));
    }
    if (el.phrases.empty() && !el.term_wildcard) {
      throw MalformedRule("empty term class in rule: " + line);
    }
    return el;
  }
  if (raw.size() >= 2 && raw.front() == '<' && raw.back() == '>') {
    el.kind = PatternRule::Element::Kind::Prep;
    for (const std::string& p : split_on(raw.substr(1, raw.size() - 2), '|')) {
      if (p.empty()) throw MalformedRule("empty preposition in rule: " + line);
      el.preps.push_back(to_lower(p));
    }
    return el;
  }
  throw MalformedRule("unrecognized element '" + raw + "' in rule: " + line);
}

}  // namespace

std::vector<PatternRule> parse_rules(const std::string& text, const Lemmatizer& lemmatizer) {
  std::vector<PatternRule> rules;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;

    std::size_t def = stripped.find(":=");
    if (def == std::string::npos) throw MalformedRule("missing ':=' in rule: " + line);
    std::string head = trim(stripped.substr(0, def));
    std::string body = trim(stripped.substr(def + 2));

    PatternRule rule;
    if (head == "NEG") {
      rule.polarity = Polarity::Negation;
    } else if (head == "UNC") {
      rule.polarity = Polarity::Uncertainty;
    } else {
      throw MalformedRule("rule head must be NEG or UNC: " + line);
    }
    rule.rule_id = "R" + std::to_string(rules.size() + 1);

    // '+' separates elements, but may appear inside {} or <>.
    std::vector<std::string> element_texts;
    std::string cur;
    int depth = 0;
    for (char c : body) {
      if (c == '{' || c == '<') ++depth;
      if (c == '}' || c == '>') --depth;
      if (c == '+' && depth == 0) {
        element_texts.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    element_texts.push_back(trim(cur));

    int n_concept = 0, n_term = 0;
    for (const std::string& raw : element_texts) {
      if (raw.empty()) throw MalformedRule("empty element in rule: " + line);
      auto el = parse_element(raw, lemmatizer, line);
      if (el.kind == PatternRule::Element::Kind::Concept) ++n_concept;
      if (el.kind == PatternRule::Element::Kind::TermClass) ++n_term;
      rule.elements.push_back(std::move(el));
    }
    if (n_concept != 1) throw MalformedRule("rule needs exactly one CONCEPT: " + line);
    if (n_term < 1) throw MalformedRule("rule needs at least one term class: " + line);
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<PatternRule> load_rules(const std::string& path, const Lemmatizer& lemmatizer) {
  std::ifstream in(path);
  if (!in) throw MalformedRule("cannot open rules file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rules(buf.str(), lemmatizer);
}

namespace {

struct Alignment {
  const std::vector<Token>* tokens;
  const std::vector<PatternRule::Element>* elements;
  const ConceptMention* mention;
  std::vector<std::pair<std::size_t, std::size_t>>* term_spans;

  bool phrase_at(const std::vector<std::string>& lemmas, std::size_t pos) const {
    if (pos + lemmas.size() > tokens->size()) return false;
    for (std::size_t i = 0; i < lemmas.size(); ++i) {
      if ((*tokens)[pos + i].lemma != lemmas[i]) return false;
    }
    return true;
  }

  // Matches elements[ei..] starting at token pos. Shorter consumptions are
  // tried first, which makes the first success the leftmost alignment.
  bool match_from(std::size_t ei, std::size_t pos) {
    if (ei == elements->size()) return true;  // trailing tokens permitted
    const auto& el = (*elements)[ei];
    using Kind = PatternRule::Element::Kind;
    switch (el.kind) {
      case Kind::Wildcard: {
        const std::size_t limit = std::min(kWildcardBound, tokens->size() - pos);
        for (std::size_t len = 0; len <= limit; ++len) {
          if (match_from(ei + 1, pos + len)) return true;
        }
        return false;
      }
      case Kind::TermClass: {
        for (const auto& phrase : el.phrases) {
          if (phrase_at(phrase, pos) && match_from(ei + 1, pos + phrase.size())) {
            term_spans->emplace_back(pos, pos + phrase.size());
            return true;
          }
        }
        if (el.term_wildcard) {
          const std::size_t limit = std::min(kWildcardBound, tokens->size() - pos);
          for (std::size_t len = 0; len <= limit; ++len) {
            if (match_from(ei + 1, pos + len)) return true;
          }
        }
        return false;
      }
      case Kind::Prep: {
        if (pos >= tokens->size()) return false;
        for (const auto& p : el.preps) {
          if ((*tokens)[pos].lemma == p) {
            if (match_from(ei + 1, pos + 1)) {
              term_spans->emplace_back(pos, pos + 1);
              return true;
            }
            return false;
          }
        }
        return false;
      }
      case Kind::Concept: {
        if (pos != mention->begin) return false;
        return match_from(ei + 1, mention->end);
      }
    }
    return false;
  }
};

}  // namespace

std::vector<RuleMatch> apply_rules(const Sentence& sentence,
                                   const std::vector<ConceptMention>& mentions,
                                   const std::vector<PatternRule>& rules,
                                   const CategoryMap& categories) {
  std::vector<RuleMatch> matches;
  for (const PatternRule& rule : rules) {
    for (std::size_t mi = 0; mi < mentions.size(); ++mi) {
      if (!categories.is_disease(mentions[mi].concept_id)) continue;
      std::vector<std::pair<std::size_t, std::size_t>> spans;
      Alignment a{&sentence.tokens, &rule.elements, &mentions[mi], &spans};
      if (a.match_from(0, 0)) {
        matches.push_back({rule.rule_id, rule.polarity, mi, std::move(spans)});
      }
    }
  }
  return matches;
}

}  // namespace radcl::text
