#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "radcl/nn/params.hpp"
#include "radcl/text/corpus.hpp"

namespace radcl::nn {

// Lemma-level vocabulary with fixed reserved ids. Lemmas are assigned ids
// in sorted order so a corpus maps to one vocabulary regardless of report
// order.
class Vocabulary {
 public:
  Vocabulary();

  static Vocabulary build(const std::vector<text::Report>& reports);
  static Vocabulary load_tsv(const std::string& path);
  void save_tsv(const std::string& path) const;

  int id(const std::string& lemma) const;  // kUnkId when unknown
  const std::string& lemma(int id) const;
  std::size_t size() const { return rev_.size(); }

  // CLS-prefixed ids, truncated to max_seq_len. keep_tail keeps the end of
  // long sequences (classification keeps the impression tail).
  std::vector<int> encode(const std::vector<std::string>& lemmas, std::size_t max_seq_len,
                          bool keep_tail = false) const;

 private:
  void add(const std::string& lemma);

  std::unordered_map<std::string, int> map_;
  std::vector<std::string> rev_;
};

}  // namespace radcl::nn
