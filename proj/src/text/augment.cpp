#include "radcl/text/augment.hpp"

#include <algorithm>
#include <fstream>
#include <utility>

#include "radcl/errors.hpp"

namespace radcl::text {

void AugmentationPolicy::validate() const {
  for (double p : {p_word_delete, p_span_delete, p_reorder, p_synonym}) {
    if (p < 0.0 || p > 1.0) throw UsageError("augmentation probability outside [0,1]");
  }
  if (max_span_len < 1) throw UsageError("max_span_len must be >= 1");
}

std::map<std::string, std::vector<std::string>> load_synonyms_tsv(
    const std::string& path, const Lemmatizer& lemmatizer) {
  std::ifstream in(path);
  if (!in) throw LexiconError("cannot open synonym table: " + path);
  std::map<std::string, std::vector<std::string>> table;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t tab = line.find('\t', first);
    if (tab == std::string::npos) throw LexiconError("bad synonym row: " + line);
    std::string rest = line.substr(tab + 1);
    while (!rest.empty() && (rest.back() == '\r' || rest.back() == ' ')) rest.pop_back();
    auto key = lemmatize_phrase(line.substr(first, tab - first), lemmatizer);
    auto value = lemmatize_phrase(rest, lemmatizer);
    if (key.size() != 1 || value.size() != 1) {
      throw LexiconError("synonym entries must be single tokens: " + line);
    }
    table[key[0]].push_back(value[0]);
  }
  return table;
}

std::string TextView::text() const {
  std::string out;
  for (const Token& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.surface;
  }
  return out;
}

std::vector<std::string> TextView::lemmas() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.lemma);
  return out;
}

bool same_lemmas(const TextView& a, const TextView& b) {
  if (a.tokens.size() != b.tokens.size()) return false;
  for (std::size_t i = 0; i < a.tokens.size(); ++i) {
    if (a.tokens[i].lemma != b.tokens[i].lemma) return false;
  }
  return true;
}

namespace {

// Word + span deletion over one token sequence; fills `keep`.
void delete_tokens(const std::vector<Token>& tokens, const SentenceAnnotation& annotation,
                   const AugmentationPolicy& policy, bool word_pass, bool span_pass, Rng& rng,
                   std::vector<bool>& keep) {
  keep.assign(tokens.size(), true);
  if (word_pass && policy.p_word_delete > 0.0) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (annotation.is_protected(i)) continue;
      if (rng.bernoulli(policy.p_word_delete)) keep[i] = false;
    }
  }
  if (span_pass && policy.p_span_delete > 0.0 && rng.bernoulli(policy.p_span_delete)) {
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!annotation.is_protected(i) && keep[i]) starts.push_back(i);
    }
    if (!starts.empty()) {
      std::size_t start = starts[rng.uniform_index(starts.size())];
      std::size_t len = 1 + rng.uniform_index(policy.max_span_len);
      for (std::size_t i = start; i < tokens.size() && i < start + len; ++i) {
        if (annotation.is_protected(i)) break;  // spans never cross protected tokens
        keep[i] = false;
      }
    }
  }
}

void substitute_synonyms(std::vector<Token>& tokens, const std::vector<bool>& is_protected,
                         const AugmentationPolicy& policy, Rng& rng) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_protected[i]) continue;
    auto it = policy.synonym_table.find(tokens[i].lemma);
    if (it == policy.synonym_table.end() || it->second.empty()) continue;
    if (!rng.bernoulli(policy.p_synonym)) continue;
    const std::string& repl = it->second[rng.uniform_index(it->second.size())];
    tokens[i].surface = repl;
    tokens[i].lemma = repl;
  }
}

}  // namespace

TextView augment_sentence(const Sentence& sentence, const SentenceAnnotation& annotation,
                          const AugmentationPolicy& policy, Rng& rng) {
  TextView view;
  view.source_id = annotation.sentence_id;
  std::vector<bool> keep;
  delete_tokens(sentence.tokens, annotation, policy, /*word_pass=*/true, /*span_pass=*/true,
                rng, keep);
  if (std::find(keep.begin(), keep.end(), true) == keep.end()) {
    view.tokens = sentence.tokens;  // never emit an empty view
    return view;
  }
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    if (keep[i]) view.tokens.push_back(sentence.tokens[i]);
  }
  return view;
}

TextView augment_document(const Report& report,
                          const std::vector<SentenceAnnotation>& annotations,
                          const AugmentationPolicy& policy, Rng& rng) {
  if (annotations.size() != report.sentences.size()) {
    throw LengthMismatch("annotation count does not match sentence count for report " +
                         report.report_id);
  }
  // Each operation is gated once per document, in a fixed draw order.
  const bool do_word = policy.p_word_delete > 0.0 && rng.bernoulli(policy.p_word_delete);
  const bool do_span = policy.p_span_delete > 0.0 && rng.bernoulli(policy.p_span_delete);
  const bool do_reorder = policy.p_reorder > 0.0 && rng.bernoulli(policy.p_reorder);
  const bool do_synonym = policy.p_synonym > 0.0 && !policy.synonym_table.empty() &&
                          rng.bernoulli(policy.p_synonym);

  std::vector<std::vector<Token>> kept(report.sentences.size());
  for (std::size_t s = 0; s < report.sentences.size(); ++s) {
    const Sentence& sent = report.sentences[s];
    const SentenceAnnotation& ann = annotations[s];
    std::vector<bool> keep;
    delete_tokens(sent.tokens, ann, policy, do_word, do_span, rng, keep);
    std::vector<bool> prot;
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      if (!keep[i]) continue;
      kept[s].push_back(sent.tokens[i]);
      prot.push_back(ann.is_protected(i));
    }
    if (do_synonym) substitute_synonyms(kept[s], prot, policy, rng);
  }

  std::vector<std::size_t> order(report.sentences.size());
  for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
  if (do_reorder) rng.shuffle(order);

  TextView view;
  view.source_id = report.report_id;
  for (std::size_t s : order) {
    view.tokens.insert(view.tokens.end(), kept[s].begin(), kept[s].end());
  }
  if (view.tokens.empty()) {
    for (const Sentence& sent : report.sentences) {
      view.tokens.insert(view.tokens.end(), sent.tokens.begin(), sent.tokens.end());
    }
  }
  return view;
}

namespace {

// Sentence-level sampling draws from finding-bearing sections only;
// BACKGROUND and other administrative sections are skipped. BODY covers
// header-less reports.
bool finding_section(const std::string& section) {
  return section == "FINDINGS" || section == "IMPRESSION" || section == "IMPRESSIONS" ||
         section == "BODY";
}

}  // namespace

std::vector<SentenceRef> build_sentence_pool(
    const std::vector<Report>& reports,
    const std::map<std::string, std::vector<SentenceAnnotation>>& annotations,
    bool affirmed_only) {
  std::vector<SentenceRef> pool;
  for (const Report& report : reports) {
    auto it = annotations.find(report.report_id);
    if (it == annotations.end()) continue;
    if (it->second.size() != report.sentences.size()) {
      throw LengthMismatch("annotation count does not match sentence count for report " +
                           report.report_id);
    }
    for (std::size_t s = 0; s < report.sentences.size(); ++s) {
      const Sentence& sent = report.sentences[s];
      const SentenceAnnotation& ann = it->second[s];
      if (!finding_section(sent.section)) continue;
      if (!ann.has_disease()) continue;
      if (affirmed_only && ann.factuality != Factuality::Affirmed) continue;
      pool.push_back({&sent, &ann});
    }
  }
  return pool;
}

namespace {

// Draws one negative view distinct from the positive. Candidates are source
// indices in priority order; each gets a few augmentation attempts before
// the next is tried. `used` enforces without-replacement within one row.
// Returns the view along with the source index that produced it.
template <typename MakeView>
std::pair<TextView, std::size_t> draw_distinct_negative(
    const std::vector<std::size_t>& candidates, std::vector<char>& used,
    const TextView& positive, MakeView make_view) {
  for (std::size_t src : candidates) {
    if (used[src]) continue;
    for (int attempt = 0; attempt < 8; ++attempt) {
      TextView v = make_view(src);
      if (!same_lemmas(v, positive)) {
        used[src] = 1;
        return {std::move(v), src};
      }
    }
  }
  throw InsufficientData("every candidate negative collapses onto the positive view");
}

}  // namespace

ContrastiveBatch sample_patient_pairs(
    const std::vector<Report>& reports,
    const std::map<std::string, std::vector<SentenceAnnotation>>& annotations,
    std::size_t batch_size, std::size_t k, const AugmentationPolicy& policy, Rng& rng) {
  if (reports.size() < k + 2) {
    throw InsufficientData("need at least k+2 reports for patient-level sampling");
  }
  std::map<std::string, std::vector<std::size_t>> by_patient;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    by_patient[reports[i].patient_id].push_back(i);
  }
  std::vector<const std::string*> eligible;
  for (const auto& [pid, idxs] : by_patient) {
    if (idxs.size() >= 2) eligible.push_back(&pid);
  }
  if (eligible.empty()) {
    throw InsufficientData("no patient has two or more reports");
  }

  auto anns_for = [&](std::size_t ri) -> const std::vector<SentenceAnnotation>& {
    auto it = annotations.find(reports[ri].report_id);
    if (it == annotations.end()) {
      throw DataError("missing annotations for report " + reports[ri].report_id);
    }
    return it->second;
  };

  ContrastiveBatch batch;
  batch.granularity = ContrastiveBatch::Granularity::Document;
  batch.k = k;
  for (std::size_t e = 0; e < batch_size; ++e) {
    const std::string& pid = *eligible[rng.uniform_index(eligible.size())];
    const auto& own = by_patient[pid];
    auto pick = rng.sample_without_replacement(own.size(), 2);
    std::size_t qi = own[pick[0]], pi = own[pick[1]];

    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (reports[i].patient_id != pid) others.push_back(i);
    }
    if (others.size() < k) {
      throw InsufficientData("fewer than k reports from other patients");
    }

    TextView query = augment_document(reports[qi], anns_for(qi), policy, rng);
    TextView positive = augment_document(reports[pi], anns_for(pi), policy, rng);

    std::vector<std::size_t> row;
    for (std::size_t j : rng.sample_without_replacement(others.size(), k)) {
      row.push_back(others[j]);
    }
    std::vector<char> used(reports.size(), 0);
    std::vector<TextView> negs;
    std::vector<ContrastiveBatch::NegativeMeta> negs_meta;
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<std::size_t> candidates{row[j]};
      candidates.insert(candidates.end(), others.begin(), others.end());
      auto [view, src] = draw_distinct_negative(candidates, used, positive, [&](std::size_t si) {
        return augment_document(reports[si], anns_for(si), policy, rng);
      });
      negs.push_back(std::move(view));
      negs_meta.push_back({"", "", reports[src].patient_id, false});
    }

    batch.queries.push_back(std::move(query));
    batch.positives.push_back(std::move(positive));
    batch.negatives.push_back(std::move(negs));
    batch.meta.push_back({"", "", pid});
    batch.negative_meta.push_back(std::move(negs_meta));
  }
  return batch;
}

namespace {

// Anchor selection shared by the two sentence-level samplers: uniform over
// pool entries whose group can supply a positive and k negatives.
std::vector<std::size_t> eligible_anchors(const std::vector<SentenceRef>& pool,
                                          const std::vector<std::size_t>& group_size,
                                          const std::vector<std::size_t>& negatives_avail,
                                          std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (group_size[i] >= 2 && negatives_avail[i] >= k) out.push_back(i);
  }
  return out;
}

}  // namespace

ContrastiveBatch sample_disease_pairs(const std::vector<SentenceRef>& pool,
                                      std::size_t batch_size, std::size_t k,
                                      const AugmentationPolicy& policy, Rng& rng) {
  std::map<std::string, std::vector<std::size_t>> by_concept;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    by_concept[pool[i].annotation->primary_concept].push_back(i);
  }
  std::vector<std::size_t> group_size(pool.size()), negs_avail(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& grp = by_concept[pool[i].annotation->primary_concept];
    group_size[i] = grp.size();
    negs_avail[i] = pool.size() - grp.size();
  }
  auto anchors = eligible_anchors(pool, group_size, negs_avail, k);
  if (anchors.empty()) {
    throw InsufficientData(
        "no disease concept has two or more affirmed sentences plus k sentences of other "
        "diseases");
  }

  ContrastiveBatch batch;
  batch.granularity = ContrastiveBatch::Granularity::Sentence;
  batch.k = k;
  for (std::size_t e = 0; e < batch_size; ++e) {
    std::size_t a = anchors[rng.uniform_index(anchors.size())];
    const std::string& concept_id = pool[a].annotation->primary_concept;

    const auto& grp = by_concept[concept_id];
    std::vector<std::size_t> positives;
    for (std::size_t i : grp) {
      if (i != a) positives.push_back(i);
    }
    std::size_t p = positives[rng.uniform_index(positives.size())];

    std::vector<std::size_t> neg_pool;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].annotation->primary_concept != concept_id) neg_pool.push_back(i);
    }

    TextView query = augment_sentence(*pool[a].sentence, *pool[a].annotation, policy, rng);
    TextView positive = augment_sentence(*pool[p].sentence, *pool[p].annotation, policy, rng);

    std::vector<std::size_t> row;
    for (std::size_t j : rng.sample_without_replacement(neg_pool.size(), k)) {
      row.push_back(neg_pool[j]);
    }
    std::vector<char> used(pool.size(), 0);
    std::vector<TextView> negs;
    std::vector<ContrastiveBatch::NegativeMeta> negs_meta;
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<std::size_t> candidates{row[j]};
      candidates.insert(candidates.end(), neg_pool.begin(), neg_pool.end());
      auto [view, src] = draw_distinct_negative(candidates, used, positive, [&](std::size_t si) {
        return augment_sentence(*pool[si].sentence, *pool[si].annotation, policy, rng);
      });
      negs.push_back(std::move(view));
      negs_meta.push_back({pool[src].annotation->primary_concept,
                           to_string(pool[src].annotation->factuality), "", false});
    }

    batch.queries.push_back(std::move(query));
    batch.positives.push_back(std::move(positive));
    batch.negatives.push_back(std::move(negs));
    batch.meta.push_back({concept_id, to_string(pool[a].annotation->factuality), ""});
    batch.negative_meta.push_back(std::move(negs_meta));
  }
  return batch;
}

ContrastiveBatch sample_disease_factuality_pairs(const std::vector<SentenceRef>& pool,
                                                 std::size_t batch_size, std::size_t k,
                                                 const AugmentationPolicy& policy, Rng& rng) {
  using Key = std::pair<std::string, bool>;  // (concept, affirmed?)
  auto key_of = [](const SentenceRef& r) {
    return Key{r.annotation->primary_concept, is_affirmed(r.annotation->factuality)};
  };
  std::map<Key, std::vector<std::size_t>> by_key;
  for (std::size_t i = 0; i < pool.size(); ++i) by_key[key_of(pool[i])].push_back(i);

  std::vector<std::size_t> group_size(pool.size()), negs_avail(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    Key key = key_of(pool[i]);
    group_size[i] = by_key[key].size();
    // hard negatives: same concept, flipped factuality
    auto hard_it = by_key.find({key.first, !key.second});
    std::size_t hard = hard_it == by_key.end() ? 0 : hard_it->second.size();
    std::size_t other_concept = 0;
    for (const auto& [kk, idxs] : by_key) {
      if (kk.first != key.first) other_concept += idxs.size();
    }
    negs_avail[i] = hard + other_concept;
  }
  auto anchors = eligible_anchors(pool, group_size, negs_avail, k);
  if (anchors.empty()) {
    throw InsufficientData(
        "no (disease, factuality) group has two or more sentences plus k usable negatives");
  }

  ContrastiveBatch batch;
  batch.granularity = ContrastiveBatch::Granularity::Sentence;
  batch.k = k;
  for (std::size_t e = 0; e < batch_size; ++e) {
    std::size_t a = anchors[rng.uniform_index(anchors.size())];
    Key key = key_of(pool[a]);

    const auto& grp = by_key[key];
    std::vector<std::size_t> positives;
    for (std::size_t i : grp) {
      if (i != a) positives.push_back(i);
    }
    std::size_t p = positives[rng.uniform_index(positives.size())];

    std::vector<std::size_t> hard, fallback;
    auto hard_it = by_key.find({key.first, !key.second});
    if (hard_it != by_key.end()) hard = hard_it->second;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].annotation->primary_concept != key.first) fallback.push_back(i);
    }

    TextView query = augment_sentence(*pool[a].sentence, *pool[a].annotation, policy, rng);
    TextView positive = augment_sentence(*pool[p].sentence, *pool[p].annotation, policy, rng);

    // Hard negatives first (capped when the policy asks for a mixed row),
    // topped up from other concepts; top back up from the hard pool when
    // other concepts cannot fill the row.
    const std::size_t hard_limit =
        policy.max_hard_negatives == 0 ? k : std::min(k, policy.max_hard_negatives);
    std::size_t n_hard = std::min(hard_limit, hard.size());
    const std::size_t n_fallback = std::min(k - n_hard, fallback.size());
    n_hard += std::min(hard.size() - n_hard, k - n_hard - n_fallback);
    std::vector<std::size_t> row;
    for (std::size_t j : rng.sample_without_replacement(hard.size(), n_hard)) {
      row.push_back(hard[j]);
    }
    for (std::size_t j : rng.sample_without_replacement(fallback.size(), k - n_hard)) {
      row.push_back(fallback[j]);
    }
    std::vector<std::size_t> retry_candidates = hard;
    retry_candidates.insert(retry_candidates.end(), fallback.begin(), fallback.end());

    std::vector<char> used(pool.size(), 0);
    std::vector<TextView> negs;
    std::vector<ContrastiveBatch::NegativeMeta> negs_meta;
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<std::size_t> candidates{row[j]};
      candidates.insert(candidates.end(), retry_candidates.begin(), retry_candidates.end());
      auto [view, src] = draw_distinct_negative(candidates, used, positive, [&](std::size_t si) {
        return augment_sentence(*pool[si].sentence, *pool[si].annotation, policy, rng);
      });
      const auto& ann = *pool[src].annotation;
      const bool is_hard =
          ann.primary_concept == key.first && is_affirmed(ann.factuality) != key.second;
      negs.push_back(std::move(view));
      negs_meta.push_back({ann.primary_concept, to_string(ann.factuality), "", is_hard});
    }

    batch.queries.push_back(std::move(query));
    batch.positives.push_back(std::move(positive));
    batch.negatives.push_back(std::move(negs));
    batch.meta.push_back({key.first, to_string(pool[a].annotation->factuality), ""});
    batch.negative_meta.push_back(std::move(negs_meta));
  }
  return batch;
}

}  // namespace radcl::text
