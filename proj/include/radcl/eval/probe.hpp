#pragma once

#include <string>
#include <vector>

#include "radcl/nn/params.hpp"
#include "radcl/nn/vocab.hpp"
#include "radcl/text/corpus.hpp"

namespace radcl::eval {

struct ProbePair {
  std::string a, b;
};

struct ProbeRow {
  std::string a, b;
  double similarity = 0.0;
};

// TSV rows `sentence_a<TAB>sentence_b`.
std::vector<ProbePair> load_pairs_tsv(const std::string& path);

// Cosine similarity of normalized CLS embeddings for each sentence pair.
std::vector<ProbeRow> similarity_probe(const nn::ModelParams<float>& params,
                                       const nn::Vocabulary& vocab,
                                       const text::Lemmatizer& lemmatizer,
                                       const std::vector<ProbePair>& pairs);

std::string probe_csv(const std::vector<ProbeRow>& rows);

}  // namespace radcl::eval
