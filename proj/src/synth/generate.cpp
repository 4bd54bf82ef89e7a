#include "radcl/synth/generate.hpp"

#include <cctype>
#include <map>
#include <set>
#include <stdexcept>

#include "radcl/errors.hpp"
#include "radcl/labels.hpp"
#include "radcl/rng.hpp"

namespace radcl::synth {
namespace {

enum class Polarity { Affirmed, Negated, Uncertain };

// Surface phrases per category. Each phrase (or its longest suffix) is
// present in the bundled concept lexicon so annotation agrees with the
// planted fact.
const std::map<std::string, std::vector<std::string>>& disease_phrases() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"Enlarged Cardiomediastinum",
       {"enlarged cardiomediastinum", "mediastinal widening"}},
      {"Cardiomegaly", {"cardiomegaly", "enlarged heart"}},
      {"Lung Opacity", {"patchy opacity", "airspace opacity"}},
      {"Lung Lesion", {"pulmonary nodule", "lung lesion"}},
      {"Edema", {"pulmonary edema", "interstitial edema"}},
      {"Consolidation", {"focal consolidation", "consolidation"}},
      {"Pneumonia", {"pneumonia"}},
      {"Atelectasis", {"atelectasis", "bibasilar atelectasis"}},
      {"Pneumothorax", {"pneumothorax", "apical pneumothorax"}},
      {"Pleural Effusion", {"pleural effusion", "left pleural effusion"}},
      {"Pleural Other", {"pleural thickening", "pleural scarring"}},
      {"Fracture", {"rib fracture", "clavicle fracture"}},
      {"Support Devices", {"endotracheal tube", "chest tube", "pacemaker"}},
  };
  return table;
}

const std::vector<std::string>& locations() {
  static const std::vector<std::string> locs = {
      "left lung base",   "right lung base",        "left lower lobe",
      "right upper lobe", "right middle lobe",      "left upper lobe",
      "lingula",          "right hemithorax",       "left hemithorax",
      "left apex",        "right costophrenic angle",
  };
  return locs;
}

// Affirmed templates contain no negation/uncertainty vocabulary; the
// negated/uncertain ones each carry at least one keyword or pattern-rule
// trigger so the annotator reproduces the planted polarity.
const std::vector<std::string>& templates_for(Polarity p) {
  static const std::vector<std::string> affirmed = {
      "There is {d} in the {loc}.",
      "{D} is seen in the {loc}.",
      "Definite {d} is seen in the {loc}.",
      "{D} is observed.",
      "Stable {d} at the {loc}.",
      "Interval increase in {d} at the {loc}.",
      "There is {d} in the {loc} which appears more prominent when compared "
      "with the prior examination.",
      "{D} is again seen in the {loc} grossly stable in size and appearance "
      "since the previous study.",
      "Interval development of {d} in the {loc} with the remainder of the "
      "examination stable.",
  };
  static const std::vector<std::string> negated = {
      "No evidence of {d}.",
      "No {d} is seen.",
      "The lungs are clear of any {d}.",
      "There is no {d} in the {loc}.",
      "{D} has been ruled out.",
      "Without evidence of {d}.",
      "{D} is absent.",
      "Free of {d} at the {loc}.",
      "There is no evidence of {d} in the {loc} on the current examination.",
      "The previously noted {d} has resolved with normal appearance of the "
      "{loc} on the current study.",
      "No {d} is identified in the {loc} or elsewhere on the current "
      "examination.",
  };
  static const std::vector<std::string> uncertain = {
      "{D} could be present.",
      "Possible {d} in the {loc}.",
      "Findings suggesting {d}.",
      "{D} may be present.",
      "There may be {d} in the {loc}.",
      "{D} cannot be excluded.",
      "Questionable {d} at the {loc}.",
      "There may be a small {d} in the {loc} although this is difficult to "
      "evaluate on the current study.",
      "Findings in the {loc} are concerning for {d} and short term follow "
      "up imaging is recommended.",
      "{D} cannot be excluded given the appearance of the {loc} on the "
      "current examination.",
  };
  switch (p) {
    case Polarity::Affirmed: return affirmed;
    case Polarity::Negated: return negated;
    case Polarity::Uncertain: return uncertain;
  }
  throw std::logic_error("unreachable");
}

std::string replace_all(std::string text, const std::string& from,
                        const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(s[0]));
  return s;
}

std::string render(const std::string& tmpl, const std::string& disease,
                   const std::string& loc) {
  std::string out = replace_all(tmpl, "{D}", capitalized(disease));
  out = replace_all(out, "{d}", disease);
  out = replace_all(out, "{loc}", loc);
  return out;
}

Polarity draw_polarity(const GeneratorSpec& spec, Rng& rng) {
  const double u = rng.uniform();
  if (u < spec.p_affirmed) return Polarity::Affirmed;
  if (u < spec.p_affirmed + spec.p_negated) return Polarity::Negated;
  return Polarity::Uncertain;
}

std::size_t draw_in_range(std::size_t lo, std::size_t hi, Rng& rng) {
  return lo + rng.uniform_index(hi - lo + 1);
}

}  // namespace

void GeneratorSpec::validate() const {
  if (n_patients == 0) throw UsageError("n_patients must be positive");
  if (min_reports_per_patient == 0 ||
      max_reports_per_patient < min_reports_per_patient) {
    throw UsageError("invalid reports-per-patient range");
  }
  if (min_sentences == 0 || max_sentences < min_sentences) {
    throw UsageError("invalid sentences-per-report range");
  }
  if (p_affirmed < 0 || p_negated < 0 || p_uncertain < 0) {
    throw UsageError("polarity probabilities must be non-negative");
  }
  const double total = p_affirmed + p_negated + p_uncertain;
  if (total < 0.999 || total > 1.001) {
    throw UsageError("polarity probabilities must sum to 1");
  }
  for (const auto& d : diseases) {
    if (labels::category_index(d) < 0 ||
        labels::category_index(d) == kNoFindingSlot) {
      throw UsageError("unknown finding category: " + d);
    }
    if (disease_phrases().find(d) == disease_phrases().end()) {
      throw UsageError("no surface templates for category: " + d);
    }
  }
}

std::vector<io::CorpusRecord> generate(const GeneratorSpec& spec) {
  spec.validate();
  std::vector<std::string> diseases = spec.diseases;
  if (diseases.empty()) {
    for (int s = 0; s < kNumFindingSlots; ++s) {
      diseases.emplace_back(kCategoryNames[static_cast<std::size_t>(s)]);
    }
  }

  std::vector<io::CorpusRecord> records;
  std::size_t report_counter = 0;
  for (std::size_t p = 0; p < spec.n_patients; ++p) {
    Rng rng(split_seed(spec.seed, p));
    const std::string patient_id = "p" + std::to_string(p);
    const std::size_t n_reports = draw_in_range(
        spec.min_reports_per_patient, spec.max_reports_per_patient, rng);
    for (std::size_t r = 0; r < n_reports; ++r) {
      const std::size_t n_sentences =
          draw_in_range(spec.min_sentences, spec.max_sentences, rng);
      std::map<int, std::set<int>> planted;  // slot -> planted polarities
      std::vector<std::string> sentences;
      sentences.reserve(n_sentences);
      for (std::size_t s = 0; s < n_sentences; ++s) {
        const Polarity pol = draw_polarity(spec, rng);
        const std::string& disease =
            diseases[rng.uniform_index(diseases.size())];
        const auto& phrases = disease_phrases().at(disease);
        const std::string& phrase = phrases[rng.uniform_index(phrases.size())];
        const auto& tmpls = templates_for(pol);
        const std::string& tmpl = tmpls[rng.uniform_index(tmpls.size())];
        const std::string& loc = locations()[rng.uniform_index(locations().size())];
        sentences.push_back(render(tmpl, phrase, loc));
        planted[labels::category_index(disease)].insert(static_cast<int>(pol));
      }

      // Last sentence goes to IMPRESSION, the rest to FINDINGS.
      std::string text = "FINDINGS: ";
      for (std::size_t s = 0; s + 1 < sentences.size(); ++s) {
        if (s > 0) text += " ";
        text += sentences[s];
      }
      if (sentences.size() == 1) text += "Unchanged examination.";
      text += "\nIMPRESSION: " + sentences.back();

      LabelVector gold;
      bool all_clear = true;
      for (int slot = 0; slot < kNumFindingSlots; ++slot) {
        auto it = planted.find(slot);
        if (it == planted.end()) {
          gold[slot] = ObsClass::Blank;
          continue;
        }
        const auto& pols = it->second;
        if (pols.count(static_cast<int>(Polarity::Affirmed))) {
          gold[slot] = ObsClass::Positive;
          all_clear = false;
        } else if (pols.count(static_cast<int>(Polarity::Uncertain))) {
          gold[slot] = ObsClass::Uncertain;
          all_clear = false;
        } else {
          gold[slot] = ObsClass::Negative;
        }
      }
      gold[kNoFindingSlot] = all_clear ? ObsClass::Positive : ObsClass::Blank;
      gold.validate();

      io::CorpusRecord record;
      record.report_id = "r" + std::to_string(report_counter++);
      record.patient_id = patient_id;
      record.text = text;
      record.labels = gold;
      records.push_back(std::move(record));
    }
  }
  return records;
}

}  // namespace radcl::synth
