#include "radcl/text/corpus.hpp"

#include <algorithm>
#include <cctype>

#include "radcl/errors.hpp"

namespace radcl::text {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

const std::string* Report::find_section(std::string_view name) const {
  for (const auto& [sec, body] : sections) {
    if (sec == name) return &body;
  }
  return nullptr;
}

std::string Report::classification_text() const {
  std::string out;
  auto append = [&out](const std::string* body) {
    if (body == nullptr || body->empty()) return;
    if (!out.empty()) out += ' ';
    out += *body;
  };
  const std::string* findings = find_section("FINDINGS");
  const std::string* impression = find_section("IMPRESSION");
  if (findings != nullptr || impression != nullptr) {
    append(findings);
    append(impression);
    return out;
  }
  for (const auto& [sec, body] : sections) append(&body);
  return out;
}

// ---------------------------------------------------------------------------
// Lemmatizer

Lemmatizer::Lemmatizer() {
  verbs_ = {"suggest",  "suspect",  "observe",   "note",     "improve", "worsen",
            "enlarge",  "increase", "decrease",  "resolve",  "rule",    "miss",
            "remove",   "exclude",  "visualize", "compare",  "perform", "demonstrate",
            "represent", "reflect", "relate",    "ventilate", "develop", "confirm",
            "identify", "expand",   "widen",     "blunt",    "obscure", "deny"};
  exceptions_ = {
      {"seen", "see"},          {"saw", "see"},
      {"denied", "deny"},       {"masses", "mass"},
      {"gases", "gas"},         {"abscesses", "abscess"},
      {"processes", "process"}, {"sinuses", "sinus"},
      {"bases", "base"},        {"cases", "case"},
      {"increases", "increase"}, {"decreases", "decrease"},
      {"diseases", "disease"},  {"doses", "dose"},
      {"causes", "cause"},      {"collapses", "collapse"},
      {"pneumothoraces", "pneumothorax"},
  };
}

Lemmatizer::Lemmatizer(std::set<std::string> verbs, std::map<std::string, std::string> exceptions)
    : verbs_(std::move(verbs)), exceptions_(std::move(exceptions)) {}

std::string Lemmatizer::lemma(std::string_view surface) const {
  std::string s = to_lower(surface);
  if (auto it = exceptions_.find(s); it != exceptions_.end()) return it->second;

  const std::size_t n = s.size();
  auto ends_with = [&s](std::string_view suf) {
    return s.size() >= suf.size() && std::string_view(s).substr(s.size() - suf.size()) == suf;
  };

  if (n >= 5 && ends_with("ies")) return s.substr(0, n - 3) + "y";
  if (n >= 5 && ends_with("ses")) return s.substr(0, n - 3) + "sis";
  if (n > 3 && s.back() == 's' && !ends_with("ss") && !ends_with("is") && !ends_with("us")) {
    return s.substr(0, n - 1);
  }
  if (n > 4 && ends_with("ing")) {
    std::string base = s.substr(0, n - 3);
    if (verbs_.count(base) != 0) return base;
  }
  if (n > 3 && ends_with("ed")) {
    std::string base = s.substr(0, n - 2);
    if (verbs_.count(base) != 0) return base;
    base = s.substr(0, n - 1);  // e-final verbs: noted -> note
    if (verbs_.count(base) != 0) return base;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Normalization and section parsing

std::string normalize_text(std::string_view raw) {
  // Pass 1: replace runs of 2+ underscores with the reserved token.
  std::string replaced;
  replaced.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    if (raw[i] == '_') {
      std::size_t j = i;
      while (j < raw.size() && raw[j] == '_') ++j;
      if (j - i >= 2) {
        replaced += kDeidToken;
      } else {
        replaced += '_';
      }
      i = j;
    } else {
      replaced += raw[i++];
    }
  }
  // Pass 2: collapse whitespace runs, trim.
  std::string out;
  out.reserve(replaced.size());
  bool pending_space = false;
  for (char c : replaced) {
    if (is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

namespace {

// If the line opens with "<known header>:" returns (uppercased name, rest).
std::optional<std::pair<std::string, std::string>> match_header(
    const std::string& line, const std::set<std::string>& known) {
  std::size_t start = 0;
  while (start < line.size() && is_space(line[start])) ++start;
  std::size_t colon = line.find(':', start);
  if (colon == std::string::npos) return std::nullopt;
  std::string name = line.substr(start, colon - start);
  // Trim and uppercase the candidate name.
  while (!name.empty() && is_space(name.back())) name.pop_back();
  std::string upper = name;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (known.count(upper) == 0) return std::nullopt;
  return std::make_pair(upper, line.substr(colon + 1));
}

}  // namespace

Report parse_report(std::string_view raw, std::string report_id, std::string patient_id,
                    const PreprocessOptions& opts) {
  const bool has_alpha = std::any_of(raw.begin(), raw.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
  });
  if (!has_alpha) throw EmptyReport("report has no alphabetic characters: " + report_id);

  Report report;
  report.report_id = std::move(report_id);
  report.patient_id = std::move(patient_id);

  // Accumulate raw section bodies line by line, then normalize each.
  std::vector<std::pair<std::string, std::string>> bodies;
  auto append_line = [&bodies](const std::string& section, const std::string& content) {
    if (bodies.empty() || bodies.back().first != section) {
      bodies.emplace_back(section, content);
    } else {
      bodies.back().second += '\n';
      bodies.back().second += content;
    }
  };

  std::string current = "BODY";
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    std::string line(nl == std::string_view::npos ? raw.substr(pos)
                                                  : raw.substr(pos, nl - pos));
    if (auto header = match_header(line, opts.known_headers)) {
      current = header->first;
      append_line(current, header->second);
    } else {
      append_line(current, line);
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }

  for (auto& [section, body] : bodies) {
    std::string normalized = normalize_text(body);
    if (normalized.empty() && section == "BODY") continue;
    report.sections.emplace_back(section, std::move(normalized));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Tokenization

std::vector<Token> tokenize(std::string_view text, const Lemmatizer& lemmatizer) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    if (text.substr(i, kDeidToken.size()) == kDeidToken) {
      i += kDeidToken.size();
      tokens.push_back({std::string(kDeidToken), std::string(kDeidToken), begin, i});
      continue;
    }
    if (is_word_char(text[i])) {
      while (i < n && is_word_char(text[i])) ++i;
    } else {
      ++i;  // punctuation: one char per token
    }
    std::string surface(text.substr(begin, i - begin));
    std::string lemma = lemmatizer.lemma(surface);
    tokens.push_back({std::move(surface), std::move(lemma), begin, i});
  }
  return tokens;
}

std::vector<std::string> lemmatize_phrase(std::string_view phrase, const Lemmatizer& lemmatizer) {
  std::vector<std::string> out;
  for (const Token& t : tokenize(phrase, lemmatizer)) out.push_back(t.lemma);
  return out;
}

// ---------------------------------------------------------------------------
// Sentence splitting

namespace {

// Word immediately preceding position i (exclusive), including '.' so that
// multi-dot abbreviations like "e.g." are seen whole.
std::string preceding_word(const std::string& text, std::size_t i) {
  std::size_t end = i;
  std::size_t begin = end;
  while (begin > 0) {
    char c = text[begin - 1];
    if (is_word_char(c) || c == '.') {
      --begin;
    } else {
      break;
    }
  }
  return text.substr(begin, end - begin);
}

bool is_sentence_boundary(const std::string& text, std::size_t i, const PreprocessOptions& opts) {
  char c = text[i];
  if (c != '.' && c != '!' && c != '?') return false;
  if (i + 1 < text.size() && !is_space(text[i + 1])) return false;
  if (c != '.') return true;

  std::string prev = to_lower(preceding_word(text, i));
  // Strip leading dots left over from sequences like "e.g".
  while (!prev.empty() && prev.front() == '.') prev.erase(prev.begin());
  if (opts.abbreviations.count(prev) != 0) return false;
  if (opts.numeric_no_guard && prev == "no") {
    std::size_t j = i + 1;
    while (j < text.size() && is_space(text[j])) ++j;
    if (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])) != 0) return false;
  }
  return true;
}

}  // namespace

std::vector<Sentence> split_sentences(const Report& report, const Lemmatizer& lemmatizer,
                                      const PreprocessOptions& opts) {
  std::vector<Sentence> sentences;
  int index = 0;
  for (const auto& [section, body] : report.sections) {
    std::size_t start = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
      const bool at_end = (i + 1 == body.size());
      if (!is_sentence_boundary(body, i, opts) && !at_end) continue;
      std::size_t end = is_sentence_boundary(body, i, opts) ? i + 1 : body.size();
      // Trim surrounding spaces.
      std::size_t s = start;
      while (s < end && is_space(body[s])) ++s;
      std::size_t e = end;
      while (e > s && is_space(body[e - 1])) --e;
      if (e > s) {
        Sentence sent;
        sent.report_id = report.report_id;
        sent.section = section;
        sent.text = body.substr(s, e - s);
        sent.tokens = tokenize(sent.text, lemmatizer);
        if (sent.tokens.size() >= 2) {
          sent.index = index++;
          sentences.push_back(std::move(sent));
        }
      }
      start = end;
      if (at_end) break;
    }
  }
  return sentences;
}

Report preprocess_report(std::string_view raw, std::string report_id, std::string patient_id,
                         const Lemmatizer& lemmatizer, const PreprocessOptions& opts) {
  Report report = parse_report(raw, std::move(report_id), std::move(patient_id), opts);
  report.sentences = split_sentences(report, lemmatizer, opts);
  return report;
}

}  // namespace radcl::text
