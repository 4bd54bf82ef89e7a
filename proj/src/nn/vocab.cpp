#include "radcl/nn/vocab.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "radcl/errors.hpp"

namespace radcl::nn {

namespace {
const char* kReserved[] = {"<pad>", "<cls>", "<unk>", "__deid__"};
}

Vocabulary::Vocabulary() {
  for (const char* r : kReserved) add(r);
}

void Vocabulary::add(const std::string& lemma) {
  if (map_.count(lemma) > 0) return;
  map_.emplace(lemma, static_cast<int>(rev_.size()));
  rev_.push_back(lemma);
}

Vocabulary Vocabulary::build(const std::vector<text::Report>& reports) {
  std::set<std::string> lemmas;
  for (const auto& report : reports) {
    for (const auto& sentence : report.sentences) {
      for (const auto& token : sentence.tokens) lemmas.insert(token.lemma);
    }
  }
  Vocabulary v;
  for (const auto& l : lemmas) v.add(l);
  return v;
}

int Vocabulary::id(const std::string& lemma) const {
  auto it = map_.find(lemma);
  return it == map_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::lemma(int id) const {
  if (id < 0 || id >= static_cast<int>(rev_.size())) {
    throw DataError("token id out of vocabulary range");
  }
  return rev_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& lemmas,
                                    std::size_t max_seq_len, bool keep_tail) const {
  std::vector<int> ids{kClsId};
  const std::size_t budget = max_seq_len > 0 ? max_seq_len - 1 : 0;
  std::size_t begin = 0, count = lemmas.size();
  if (count > budget) {
    count = budget;
    if (keep_tail) begin = lemmas.size() - budget;
  }
  for (std::size_t i = 0; i < count; ++i) ids.push_back(id(lemmas[begin + i]));
  return ids;
}

void Vocabulary::save_tsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (std::size_t i = 0; i < rev_.size(); ++i) {
    out << rev_[i] << '\t' << i << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

Vocabulary Vocabulary::load_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary file: " + path);
  std::vector<std::string> rows;
  std::string line;
  std::size_t line_no = 0;
  Vocabulary v;
  v.map_.clear();
  v.rev_.clear();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw SchemaError("vocabulary line " + std::to_string(line_no) + " is not lemma<TAB>id");
    }
    const std::string lemma = line.substr(0, tab);
    int id = 0;
    try {
      id = std::stoi(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw SchemaError("bad id on vocabulary line " + std::to_string(line_no));
    }
    if (id != static_cast<int>(v.rev_.size())) {
      throw SchemaError("vocabulary ids must be dense and ascending from 0");
    }
    if (v.map_.count(lemma) > 0) throw SchemaError("duplicate lemma: " + lemma);
    v.map_.emplace(lemma, id);
    v.rev_.push_back(lemma);
  }
  for (int i = 0; i < 4; ++i) {
    if (static_cast<std::size_t>(i) >= v.rev_.size() || v.rev_[i] != kReserved[i]) {
      throw SchemaError("vocabulary is missing reserved tokens");
    }
  }
  return v;
}

}  // namespace radcl::nn
