#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radcl/io/jsonl.hpp"

namespace radcl::synth {

struct GeneratorSpec {
  std::size_t n_patients = 100;
  std::size_t min_reports_per_patient = 1;
  std::size_t max_reports_per_patient = 3;
  std::size_t min_sentences = 3;
  std::size_t max_sentences = 8;
  // Per-sentence polarity distribution.
  double p_affirmed = 0.5;
  double p_negated = 0.3;
  double p_uncertain = 0.2;
  // Category names to plant; defaults to the 13 findings.
  std::vector<std::string> diseases;
  std::uint64_t seed = 0;

  void validate() const;
};

// Deterministic template-based corpus with exact gold labels derived from
// the planted (disease, polarity) facts.
std::vector<io::CorpusRecord> generate(const GeneratorSpec& spec);

}  // namespace radcl::synth
