#include "radcl/eval/probe.hpp"

#include <fstream>
#include <sstream>

#include "radcl/errors.hpp"
#include "radcl/nn/encoder.hpp"
#include "radcl/nn/loss.hpp"

namespace radcl::eval {

std::vector<ProbePair> load_pairs_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pairs file: " + path);
  std::vector<ProbePair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw SchemaError("pairs line " + std::to_string(line_no) +
                        " is not sentence<TAB>sentence");
    }
    pairs.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return pairs;
}

namespace {

nn::Vec<float> cls_embedding(const nn::ModelParams<float>& params, const nn::Vocabulary& vocab,
                             const text::Lemmatizer& lemmatizer, const std::string& sentence) {
  const auto tokens = text::tokenize(text::normalize_text(sentence), lemmatizer);
  std::vector<std::string> lemmas;
  lemmas.reserve(tokens.size());
  for (const auto& t : tokens) lemmas.push_back(t.lemma);
  nn::SeqCache<float> cache;
  const auto ids = vocab.encode(lemmas, params.config.max_seq_len);
  return nn::encode_forward(params, ids, cache).row(0).transpose();
}

}  // namespace

std::vector<ProbeRow> similarity_probe(const nn::ModelParams<float>& params,
                                       const nn::Vocabulary& vocab,
                                       const text::Lemmatizer& lemmatizer,
                                       const std::vector<ProbePair>& pairs) {
  std::vector<ProbeRow> rows;
  rows.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const auto ea = cls_embedding(params, vocab, lemmatizer, pair.a);
    const auto eb = cls_embedding(params, vocab, lemmatizer, pair.b);
    rows.push_back(
        {pair.a, pair.b, static_cast<double>(nn::cosine_sim<float>(ea, eb))});
  }
  return rows;
}

std::string probe_csv(const std::vector<ProbeRow>& rows) {
  std::ostringstream out;
  out << "sentence_a,sentence_b,cosine\n";
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    q += '"';
    return q;
  };
  for (const auto& r : rows) {
    out << quote(r.a) << ',' << quote(r.b) << ',' << r.similarity << '\n';
  }
  return out.str();
}

}  // namespace radcl::eval
