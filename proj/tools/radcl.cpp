// Command-line front end: corpus generation, preprocessing, annotation,
// augmentation preview, contrastive pre-training, fine-tuning, inference,
// evaluation, and the embedding similarity probe.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numeric error.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "radcl/errors.hpp"
#include "radcl/eval/metrics.hpp"
#include "radcl/eval/probe.hpp"
#include "radcl/hashing.hpp"
#include "radcl/io/jsonl.hpp"
#include "radcl/labels.hpp"
#include "radcl/nn/checkpoint.hpp"
#include "radcl/nn/config.hpp"
#include "radcl/nn/params.hpp"
#include "radcl/nn/vocab.hpp"
#include "radcl/rng.hpp"
#include "radcl/synth/generate.hpp"
#include "radcl/text/annotate.hpp"
#include "radcl/text/augment.hpp"
#include "radcl/text/corpus.hpp"
#include "radcl/text/lexicon.hpp"
#include "radcl/text/rules.hpp"
#include "radcl/train/finetune.hpp"
#include "radcl/train/pretrain.hpp"

#ifndef RADCL_DATA_DIR
#define RADCL_DATA_DIR "data"
#endif

namespace {

using nlohmann::json;
using namespace radcl;

std::string data_path(const char* name) {
  return std::string(RADCL_DATA_DIR) + "/" + name;
}

// ---------------------------------------------------------------------------
// Run manifest: command, resolved config, seed, input/artifact hashes.

class Manifest {
 public:
  Manifest(std::string command, std::uint64_t seed) {
    j_["command"] = std::move(command);
    j_["seed"] = seed;
    j_["config"] = json::object();
    j_["inputs"] = json::array();
    j_["artifacts"] = json::array();
  }

  template <typename T>
  void config(const std::string& key, const T& value) {
    j_["config"][key] = value;
  }

  void input(const std::string& path) {
    j_["inputs"].push_back({{"path", path}, {"fnv1a64", hash_file(path)}});
  }

  void artifact(const std::string& path) {
    j_["artifacts"].push_back({{"path", path}, {"fnv1a64", hash_file(path)}});
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write manifest: " + path);
    out << j_.dump(2) << "\n";
  }

 private:
  json j_;
};

std::string default_manifest_path(const std::string& primary_output) {
  return primary_output + ".manifest.json";
}

// ---------------------------------------------------------------------------
// Shared option bundles.

struct LexiconArgs {
  std::string concepts = data_path("concepts.tsv");
  std::string factuality = data_path("factuality.tsv");
  std::string rules = data_path("rules.txt");
  std::string categories = data_path("categories.tsv");

  void attach(CLI::App* cmd) {
    cmd->add_option("--concepts", concepts, "Concept lexicon TSV")->capture_default_str();
    cmd->add_option("--factuality", factuality, "Factuality keyword TSV")->capture_default_str();
    cmd->add_option("--rules", rules, "Pattern rule file")->capture_default_str();
    cmd->add_option("--categories", categories, "Concept-to-category TSV")->capture_default_str();
  }

  void record(Manifest& m) const {
    m.input(concepts);
    m.input(factuality);
    m.input(rules);
    m.input(categories);
  }
};

struct AugmentArgs {
  text::AugmentationPolicy policy;
  std::string synonyms = data_path("synonyms.tsv");

  void attach(CLI::App* cmd) {
    cmd->add_option("--p-word-delete", policy.p_word_delete, "Word deletion probability")
        ->capture_default_str();
    cmd->add_option("--p-span-delete", policy.p_span_delete, "Span deletion probability")
        ->capture_default_str();
    cmd->add_option("--p-reorder", policy.p_reorder, "Sentence reorder probability")
        ->capture_default_str();
    cmd->add_option("--p-synonym", policy.p_synonym, "Synonym substitution probability")
        ->capture_default_str();
    cmd->add_option("--max-span-len", policy.max_span_len, "Longest deletable span")
        ->capture_default_str();
    cmd->add_option("--synonyms", synonyms, "Synonym TSV ('' disables substitution)")
        ->capture_default_str();
    cmd->add_option("--max-hard-negatives", policy.max_hard_negatives,
                    "Cap on same-disease flipped-factuality negatives per row "
                    "(0 = fill every slot before other diseases)")
        ->capture_default_str();
  }

  text::AugmentationPolicy resolve(const text::Lemmatizer& lemmatizer, Manifest& m) const {
    text::AugmentationPolicy out = policy;
    if (!synonyms.empty()) {
      out.synonym_table = text::load_synonyms_tsv(synonyms, lemmatizer);
      m.input(synonyms);
    }
    out.validate();
    return out;
  }

  void record(Manifest& m) const {
    m.config("p_word_delete", policy.p_word_delete);
    m.config("p_span_delete", policy.p_span_delete);
    m.config("p_reorder", policy.p_reorder);
    m.config("p_synonym", policy.p_synonym);
    m.config("max_span_len", policy.max_span_len);
    m.config("synonyms", synonyms);
    m.config("max_hard_negatives", policy.max_hard_negatives);
  }
};

struct EncoderArgs {
  nn::EncoderConfig cfg;
  std::string proj_norm = "batch";

  void attach(CLI::App* cmd) {
    cmd->add_option("--max-seq-len", cfg.max_seq_len, "Token budget per sequence")
        ->capture_default_str();
    cmd->add_option("--d-model", cfg.d_model, "Embedding width")->capture_default_str();
    cmd->add_option("--n-layers", cfg.n_layers, "Transformer blocks")->capture_default_str();
    cmd->add_option("--n-heads", cfg.n_heads, "Attention heads")->capture_default_str();
    cmd->add_option("--d-ff", cfg.d_ff, "Feed-forward width")->capture_default_str();
    cmd->add_option("--proj-dim", cfg.proj_dim, "Projection head width")->capture_default_str();
    cmd->add_option("--proj-norm", proj_norm, "Projection normalization: batch|layer")
        ->capture_default_str();
  }

  nn::EncoderConfig resolve(std::size_t vocab_size) const {
    nn::EncoderConfig out = cfg;
    out.vocab_size = static_cast<std::uint32_t>(vocab_size);
    if (proj_norm == "batch") {
      out.proj_norm = nn::ProjNorm::BatchNorm;
    } else if (proj_norm == "layer") {
      out.proj_norm = nn::ProjNorm::LayerNorm;
    } else {
      throw UsageError("--proj-norm must be 'batch' or 'layer'");
    }
    out.validate();
    return out;
  }

  void record(Manifest& m) const {
    m.config("max_seq_len", cfg.max_seq_len);
    m.config("d_model", cfg.d_model);
    m.config("n_layers", cfg.n_layers);
    m.config("n_heads", cfg.n_heads);
    m.config("d_ff", cfg.d_ff);
    m.config("proj_dim", cfg.proj_dim);
    m.config("proj_norm", proj_norm);
  }
};

// ---------------------------------------------------------------------------
// Shared loading helpers.

struct AnnotationContext {
  text::Lemmatizer lemmatizer;
  text::ConceptLexicon concepts;
  text::FactualityLexicon factuality;
  std::vector<text::PatternRule> rules;
  text::CategoryMap categories;

  static AnnotationContext load(const LexiconArgs& args) {
    AnnotationContext ctx;
    ctx.concepts = text::ConceptLexicon::load_tsv(args.concepts, ctx.lemmatizer);
    ctx.factuality = text::FactualityLexicon::load_tsv(args.factuality, ctx.lemmatizer);
    ctx.rules = text::load_rules(args.rules, ctx.lemmatizer);
    ctx.categories = text::CategoryMap::load_tsv(args.categories);
    return ctx;
  }

  text::Annotator annotator() const {
    return text::Annotator(concepts, factuality, rules, categories);
  }
};

std::vector<text::Report> preprocess_all(const std::vector<io::CorpusRecord>& records,
                                         const text::Lemmatizer& lemmatizer) {
  text::PreprocessOptions opts;
  std::vector<text::Report> reports;
  reports.reserve(records.size());
  for (const auto& r : records) {
    reports.push_back(text::preprocess_report(r.text, r.report_id, r.patient_id, lemmatizer, opts));
  }
  return reports;
}

std::vector<std::uint32_t> standard_heads() {
  std::vector<std::uint32_t> heads;
  for (int slot = 0; slot < kNumCategories; ++slot) {
    heads.push_back(static_cast<std::uint32_t>(classes_for_slot(slot)));
  }
  return heads;
}

LabelVector require_labels(const io::CorpusRecord& record) {
  if (!record.labels.has_value()) {
    throw LabelDomainError("report " + record.report_id + " carries no labels");
  }
  return *record.labels;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write output: " + path);
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns the path of its manifest for logging.

struct GenCmd {
  synth::GeneratorSpec spec;
  std::string out;
  std::string manifest;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("gen", "Generate a synthetic labeled corpus (JSONL)");
    cmd->set_config("--config");
    cmd->add_option("--out", out, "Output corpus JSONL")->required();
    cmd->add_option("--patients", spec.n_patients, "Number of patients")->capture_default_str();
    cmd->add_option("--min-reports", spec.min_reports_per_patient, "Min reports per patient")
        ->capture_default_str();
    cmd->add_option("--max-reports", spec.max_reports_per_patient, "Max reports per patient")
        ->capture_default_str();
    cmd->add_option("--min-sentences", spec.min_sentences, "Min sentences per report")
        ->capture_default_str();
    cmd->add_option("--max-sentences", spec.max_sentences, "Max sentences per report")
        ->capture_default_str();
    cmd->add_option("--p-affirmed", spec.p_affirmed, "Affirmed sentence probability")
        ->capture_default_str();
    cmd->add_option("--p-negated", spec.p_negated, "Negated sentence probability")
        ->capture_default_str();
    cmd->add_option("--p-uncertain", spec.p_uncertain, "Uncertain sentence probability")
        ->capture_default_str();
    cmd->add_option("--seed", spec.seed, "Root RNG seed")->envname("RADCL_SEED");
    cmd->add_option("--manifest", manifest, "Manifest path (default: <out>.manifest.json)");
    cmd->callback([this] { run(); });
  }

  void run() {
    auto records = synth::generate(spec);
    io::write_corpus(out, records);

    Manifest m("gen", spec.seed);
    m.config("out", out);
    m.config("patients", spec.n_patients);
    m.config("min_reports", spec.min_reports_per_patient);
    m.config("max_reports", spec.max_reports_per_patient);
    m.config("min_sentences", spec.min_sentences);
    m.config("max_sentences", spec.max_sentences);
    m.config("p_affirmed", spec.p_affirmed);
    m.config("p_negated", spec.p_negated);
    m.config("p_uncertain", spec.p_uncertain);
    m.artifact(out);
    m.write(manifest.empty() ? default_manifest_path(out) : manifest);
    std::cout << "wrote " << records.size() << " reports to " << out << "\n";
  }
};

struct IngestCmd {
  std::string in, out, manifest;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("ingest", "Parse, segment, and tokenize a corpus");
    cmd->set_config("--config");
    cmd->add_option("--in", in, "Corpus JSONL")->required();
    cmd->add_option("--out", out, "Output JSONL with sentence segmentation")->required();
    cmd->add_option("--manifest", manifest, "Manifest path (default: <out>.manifest.json)");
    cmd->callback([this] { run(); });
  }

  void run() {
    auto records = io::read_corpus(in);
    text::Lemmatizer lemmatizer;
    auto reports = preprocess_all(records, lemmatizer);

    auto os = open_output(out);
    for (std::size_t i = 0; i < records.size(); ++i) {
      os << io::ingested_json(records[i], reports[i]).dump() << "\n";
    }
    os.close();

    Manifest m("ingest", 0);
    m.config("in", in);
    m.config("out", out);
    m.input(in);
    m.artifact(out);
    m.write(manifest.empty() ? default_manifest_path(out) : manifest);
    std::cout << "ingested " << records.size() << " reports\n";
  }
};

struct AnnotateCmd {
  std::string in, out, labels_out, manifest;
  LexiconArgs lexicons;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("annotate", "Concept + factuality annotation per sentence");
    cmd->set_config("--config");
    cmd->add_option("--in", in, "Corpus JSONL")->required();
    cmd->add_option("--out", out, "Sentence annotation JSONL")->required();
    cmd->add_option("--labels-out", labels_out, "Optional weak report labels JSONL");
    lexicons.attach(cmd);
    cmd->add_option("--manifest", manifest, "Manifest path (default: <out>.manifest.json)");
    cmd->callback([this] { run(); });
  }

  void run() {
    auto ctx = AnnotationContext::load(lexicons);
    auto records = io::read_corpus(in);
    auto reports = preprocess_all(records, ctx.lemmatizer);
    auto annotator = ctx.annotator();

    auto os = open_output(out);
    std::size_t n_sentences = 0;
    std::vector<json> label_rows;
    for (const auto& report : reports) {
      std::vector<text::SentenceAnnotation> anns;
      anns.reserve(report.sentences.size());
      for (const auto& sentence : report.sentences) {
        anns.push_back(annotator.annotate(sentence));
        os << io::to_json(anns.back(), sentence).dump() << "\n";
        ++n_sentences;
      }
      if (!labels_out.empty()) {
        LabelVector labels = annotator.weak_label(anns);
        label_rows.push_back(
            {{"report_id", report.report_id}, {"labels", labels.to_strings()}});
      }
    }
    os.close();
    if (!labels_out.empty()) {
      auto ls = open_output(labels_out);
      for (const auto& row : label_rows) ls << row.dump() << "\n";
    }

    Manifest m("annotate", 0);
    m.config("in", in);
    m.config("out", out);
    m.config("labels_out", labels_out);
    m.input(in);
    lexicons.record(m);
    m.artifact(out);
    if (!labels_out.empty()) m.artifact(labels_out);
    m.write(manifest.empty() ? default_manifest_path(out) : manifest);
    std::cout << "annotated " << n_sentences << " sentences\n";
  }
};

struct AugmentCmd {
  std::string in, out, manifest;
  std::string algorithm = "disease-factuality";
  std::size_t batches = 4, batch_size = 8, k = 4;
  std::uint64_t seed = 0;
  LexiconArgs lexicons;
  AugmentArgs aug;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("augment", "Sample contrastive batches as JSONL");
    cmd->set_config("--config");
    cmd->add_option("--in", in, "Corpus JSONL")->required();
    cmd->add_option("--out", out, "Batch JSONL (one batch per line)")->required();
    cmd->add_option("--algorithm", algorithm, "patient|disease|disease-factuality")
        ->capture_default_str();
    cmd->add_option("--batches", batches, "Number of batches")->capture_default_str();
    cmd->add_option("--batch-size", batch_size, "Pairs per batch")->capture_default_str();
    cmd->add_option("--k", k, "Negatives per pair")->capture_default_str();
    cmd->add_option("--seed", seed, "Root RNG seed")->envname("RADCL_SEED");
    lexicons.attach(cmd);
    aug.attach(cmd);
    cmd->add_option("--manifest", manifest, "Manifest path (default: <out>.manifest.json)");
    cmd->callback([this] { run(); });
  }

  void run() {
    using train::PretrainConfig;
    const PretrainConfig::Algorithm alg = train::algorithm_from_string(algorithm);

    auto ctx = AnnotationContext::load(lexicons);
    auto records = io::read_corpus(in);
    auto reports = preprocess_all(records, ctx.lemmatizer);
    auto annotator = ctx.annotator();
    auto annotations = annotator.annotate_corpus(reports);

    Manifest m("augment", seed);
    const text::AugmentationPolicy policy = aug.resolve(ctx.lemmatizer, m);

    std::vector<text::SentenceRef> pool;
    if (alg != PretrainConfig::Algorithm::PatientDoc) {
      pool = text::build_sentence_pool(reports, annotations,
                                       alg == PretrainConfig::Algorithm::DiseaseSentence);
    }

    auto os = open_output(out);
    for (std::size_t b = 0; b < batches; ++b) {
      Rng rng(split_seed(seed, b));
      text::ContrastiveBatch batch;
      switch (alg) {
        case PretrainConfig::Algorithm::PatientDoc:
          batch = text::sample_patient_pairs(reports, annotations, batch_size, k, policy, rng);
          break;
        case PretrainConfig::Algorithm::DiseaseSentence:
          batch = text::sample_disease_pairs(pool, batch_size, k, policy, rng);
          break;
        case PretrainConfig::Algorithm::DiseaseFactualitySentence:
          batch = text::sample_disease_factuality_pairs(pool, batch_size, k, policy, rng);
          break;
      }
      os << io::to_json(batch).dump() << "\n";
    }
    os.close();

    m.config("in", in);
    m.config("out", out);
    m.config("algorithm", algorithm);
    m.config("batches", batches);
    m.config("batch_size", batch_size);
    m.config("k", k);
    aug.record(m);
    m.input(in);
    lexicons.record(m);
    m.artifact(out);
    m.write(manifest.empty() ? default_manifest_path(out) : manifest);
    std::cout << "sampled " << batches << " batches\n";
  }
};

struct PretrainCmd {
  std::string in, model_out, vocab_out, telemetry, manifest;
  std::string algorithm = "disease-factuality";
  train::PretrainConfig pc;
  LexiconArgs lexicons;
  AugmentArgs aug;
  EncoderArgs enc;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("pretrain", "Contrastive pre-training of the encoder");
    cmd->set_config("--config");
    cmd->add_option("--in", in, "Corpus JSONL")->required();
    cmd->add_option("--model-out", model_out, "Checkpoint path")->required();
    cmd->add_option("--vocab-out", vocab_out, "Vocabulary TSV (default: <model-out>.vocab.tsv)");
    cmd->add_option("--telemetry", telemetry, "Optional per-step loss CSV");
    cmd->add_option("--algorithm", algorithm, "patient|disease|disease-factuality")
        ->capture_default_str();
    cmd->add_option("--tau", pc.tau, "Softmax temperature")->capture_default_str();
    cmd->add_option("--k", pc.k, "Negatives per pair")->capture_default_str();
    cmd->add_option("--batch-size", pc.batch_size, "Pairs per step")->capture_default_str();
    cmd->add_option("--epochs", pc.epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--steps-per-epoch", pc.steps_per_epoch,
                    "Steps per epoch (0 = one pass worth)")
        ->capture_default_str();
    cmd->add_option("--lr", pc.lr, "SGD learning rate")->capture_default_str();
    cmd->add_flag("--negatives-only-denominator",
                  [this](std::int64_t) { pc.positive_in_denominator = false; },
                  "Drop the positive pair from the softmax denominator");
    cmd->add_option("--seed", pc.seed, "Root RNG seed")->envname("RADCL_SEED");
    lexicons.attach(cmd);
    aug.attach(cmd);
    enc.attach(cmd);
    cmd->add_option("--manifest", manifest,
                    "Manifest path (default: <model-out>.manifest.json)");
    cmd->callback([this] { run(); });
  }

  void run() {
    pc.algorithm = train::algorithm_from_string(algorithm);
    pc.validate();

    auto ctx = AnnotationContext::load(lexicons);
    auto records = io::read_corpus(in);
    auto reports = preprocess_all(records, ctx.lemmatizer);
    auto annotator = ctx.annotator();
    auto annotations = annotator.annotate_corpus(reports);

    Manifest m("pretrain", pc.seed);
    const text::AugmentationPolicy policy = aug.resolve(ctx.lemmatizer, m);

    auto vocab = nn::Vocabulary::build(reports);
    const nn::EncoderConfig cfg = enc.resolve(vocab.size());
    Rng init_rng(split_seed(pc.seed, 0x1217));
    auto params = nn::ModelParams<float>::init(cfg, standard_heads(), init_rng);

    auto telemetry_rows = train::pretrain(params, vocab, reports, annotations, policy, pc);

    const std::string vocab_path = vocab_out.empty() ? model_out + ".vocab.tsv" : vocab_out;
    vocab.save_tsv(vocab_path);
    nn::save_checkpoint(model_out, params);
    if (!telemetry.empty()) train::write_telemetry_csv(telemetry, telemetry_rows);

    m.config("in", in);
    m.config("model_out", model_out);
    m.config("vocab_out", vocab_path);
    m.config("telemetry", telemetry);
    m.config("algorithm", algorithm);
    m.config("tau", pc.tau);
    m.config("k", pc.k);
    m.config("batch_size", pc.batch_size);
    m.config("epochs", pc.epochs);
    m.config("steps_per_epoch", pc.steps_per_epoch);
    m.config("lr", pc.lr);
    m.config("positive_in_denominator", pc.positive_in_denominator);
    aug.record(m);
    enc.record(m);
    m.input(in);
    lexicons.record(m);
    m.artifact(model_out);
    m.artifact(vocab_path);
    if (!telemetry.empty()) m.artifact(telemetry);
    m.write(manifest.empty() ? default_manifest_path(model_out) : manifest);
    if (!telemetry_rows.empty()) {
      std::cout << "final pretrain loss " << telemetry_rows.back().loss << "\n";
    }
  }
};

struct FinetuneCmd {
  std::string in, model_in, vocab_path, model_out, telemetry, manifest;
  std::string mode = "linear";
  bool random_init = false;
  train::FinetuneConfig fc;
  EncoderArgs enc;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("finetune", "Train classification heads on labeled reports");
    cmd->set_config("--config");
    cmd->add_option("--in", in, "Labeled corpus JSONL")->required();
    cmd->add_option("--model", model_in, "Input checkpoint (omit with --random-init)");
    cmd->add_flag("--random-init", random_init, "Start from random weights instead of a checkpoint");
    cmd->add_option("--vocab", vocab_path, "Vocabulary TSV")->required();
    cmd->add_option("--model-out", model_out, "Output checkpoint")->required();
    cmd->add_option("--mode", mode, "linear (frozen encoder) | full")->capture_default_str();
    cmd->add_option("--batch-size", fc.batch_size, "Reports per step")->capture_default_str();
    cmd->add_option("--epochs", fc.epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--lr", fc.lr, "Adam learning rate")->capture_default_str();
    cmd->add_option("--seed", fc.seed, "Root RNG seed")->envname("RADCL_SEED");
    cmd->add_option("--telemetry", telemetry, "Optional per-step loss CSV");
    enc.attach(cmd);
    cmd->add_option("--manifest", manifest,
                    "Manifest path (default: <model-out>.manifest.json)");
    cmd->callback([this] { run(); });
  }

  void run() {
    fc.mode = train::mode_from_string(mode);
    fc.validate();
    if (model_in.empty() == !random_init) {
      throw UsageError("pass exactly one of --model or --random-init");
    }

    auto vocab = nn::Vocabulary::load_tsv(vocab_path);
    nn::ModelParams<float> params = [&] {
      if (random_init) {
        Rng init_rng(split_seed(fc.seed, 0x1217));
        return nn::ModelParams<float>::init(enc.resolve(vocab.size()), standard_heads(),
                                            init_rng);
      }
      auto loaded = nn::load_checkpoint(model_in);
      if (loaded.config.vocab_size != static_cast<std::uint32_t>(vocab.size())) {
        throw SchemaError("vocabulary size does not match checkpoint");
      }
      if (loaded.head_classes != standard_heads()) {
        throw SchemaError("checkpoint head layout does not match the label schema");
      }
      return loaded;
    }();

    text::Lemmatizer lemmatizer;
    auto records = io::read_corpus(in);
    auto reports = preprocess_all(records, lemmatizer);
    std::vector<train::LabeledExample> examples;
    examples.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      examples.push_back({&reports[i], require_labels(records[i])});
    }

    auto telemetry_rows = train::finetune(params, vocab, examples, fc);
    nn::save_checkpoint(model_out, params);
    if (!telemetry.empty()) train::write_telemetry_csv(telemetry, telemetry_rows);

    Manifest m("finetune", fc.seed);
    m.config("in", in);
    m.config("model", model_in);
    m.config("random_init", random_init);
    m.config("vocab", vocab_path);
    m.config("model_out", model_out);
    m.config("mode", mode);
    m.config("batch_size", fc.batch_size);
    m.config("epochs", fc.epochs);
    m.config("lr", fc.lr);
    if (random_init) enc.record(m);
    m.input(in);
    if (!model_in.empty()) m.input(model_in);
    m.input(vocab_path);
    m.artifact(model_out);
    if (!telemetry.empty()) m.artifact(telemetry);
    m.write(manifest.empty() ? default_manifest_path(model_out) : manifest);
    if (!telemetry_rows.empty()) {
      std::cout << "final finetune loss " << telemetry_rows.back().loss << "\n";
    }
  }
};

struct ClassifyCmd {
  std::string in, model_in, vocab_path, out, manifest;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("classify", "Predict observation labels for a corpus");
    cmd->set_config("--config");
    cmd->add_option("--in", in, "Corpus JSONL")->required();
    cmd->add_option("--model", model_in, "Checkpoint")->required();
    cmd->add_option("--vocab", vocab_path, "Vocabulary TSV")->required();
    cmd->add_option("--out", out, "Prediction JSONL")->required();
    cmd->add_option("--manifest", manifest, "Manifest path (default: <out>.manifest.json)");
    cmd->callback([this] { run(); });
  }

  void run() {
    auto params = nn::load_checkpoint(model_in);
    auto vocab = nn::Vocabulary::load_tsv(vocab_path);
    if (params.config.vocab_size != static_cast<std::uint32_t>(vocab.size())) {
      throw SchemaError("vocabulary size does not match checkpoint");
    }
    text::Lemmatizer lemmatizer;
    auto records = io::read_corpus(in);
    auto reports = preprocess_all(records, lemmatizer);

    auto os = open_output(out);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      auto pred = train::classify(params, vocab, reports[i]);
      json probs = json::array();
      for (const auto& head : pred.probs) probs.push_back(head);
      os << json{{"report_id", records[i].report_id},
                 {"labels", pred.labels.to_strings()},
                 {"probs", probs}}
                .dump()
         << "\n";
    }
    os.close();

    Manifest m("classify", 0);
    m.config("in", in);
    m.config("model", model_in);
    m.config("vocab", vocab_path);
    m.config("out", out);
    m.input(in);
    m.input(model_in);
    m.input(vocab_path);
    m.artifact(out);
    m.write(manifest.empty() ? default_manifest_path(out) : manifest);
    std::cout << "classified " << reports.size() << " reports\n";
  }
};

struct EvaluateCmd {
  std::string pred, gold, out, manifest;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("evaluate", "Per-category F1 against gold labels");
    cmd->set_config("--config");
    cmd->add_option("--pred", pred, "Prediction JSONL (labels field)")->required();
    cmd->add_option("--gold", gold, "Gold corpus JSONL (labels field)")->required();
    cmd->add_option("--out", out, "Metrics CSV")->required();
    cmd->add_option("--manifest", manifest, "Manifest path (default: <out>.manifest.json)");
    cmd->callback([this] { run(); });
  }

  // Prediction files carry {report_id, labels}; corpus files additionally
  // carry text. Accept both.
  static std::vector<std::pair<std::string, LabelVector>> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    std::vector<std::pair<std::string, LabelVector>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("report_id") || !j.contains("labels")) {
        throw SchemaError(path + ":" + std::to_string(line_no) +
                          ": expected {report_id, labels}");
      }
      std::vector<std::string> labels = j["labels"].get<std::vector<std::string>>();
      rows.emplace_back(j["report_id"].get<std::string>(), LabelVector::from_strings(labels));
    }
    return rows;
  }

  void run() {
    auto pred_rows = read_labels(pred);
    auto gold_rows = read_labels(gold);
    std::map<std::string, LabelVector> gold_by_id;
    for (auto& [id, labels] : gold_rows) {
      if (!gold_by_id.emplace(id, labels).second) {
        throw SchemaError("duplicate report_id in gold file: " + id);
      }
    }
    std::vector<LabelVector> preds, golds;
    for (auto& [id, labels] : pred_rows) {
      auto it = gold_by_id.find(id);
      if (it == gold_by_id.end()) {
        throw SchemaError("prediction for unknown report_id: " + id);
      }
      preds.push_back(labels);
      golds.push_back(it->second);
    }
    if (preds.empty()) throw InsufficientData("no overlapping reports to evaluate");

    auto report = eval::evaluate_labels(preds, golds);
    auto os = open_output(out);
    os << report.to_csv();
    os.close();
    std::cout << report.to_table();

    Manifest m("evaluate", 0);
    m.config("pred", pred);
    m.config("gold", gold);
    m.config("out", out);
    m.input(pred);
    m.input(gold);
    m.artifact(out);
    m.write(manifest.empty() ? default_manifest_path(out) : manifest);
  }
};

struct ProbeCmd {
  std::string pairs, model_in, vocab_path, out, manifest;

  void attach(CLI::App& app) {
    auto* cmd = app.add_subcommand("probe-similarity",
                                   "Cosine similarity of sentence embeddings");
    cmd->set_config("--config");
    cmd->add_option("--pairs", pairs, "TSV of sentence pairs")->required();
    cmd->add_option("--model", model_in, "Checkpoint")->required();
    cmd->add_option("--vocab", vocab_path, "Vocabulary TSV")->required();
    cmd->add_option("--out", out, "Similarity CSV")->required();
    cmd->add_option("--manifest", manifest, "Manifest path (default: <out>.manifest.json)");
    cmd->callback([this] { run(); });
  }

  void run() {
    auto params = nn::load_checkpoint(model_in);
    auto vocab = nn::Vocabulary::load_tsv(vocab_path);
    if (params.config.vocab_size != static_cast<std::uint32_t>(vocab.size())) {
      throw SchemaError("vocabulary size does not match checkpoint");
    }
    text::Lemmatizer lemmatizer;
    auto pair_list = eval::load_pairs_tsv(pairs);
    auto rows = eval::similarity_probe(params, vocab, lemmatizer, pair_list);

    auto os = open_output(out);
    os << eval::probe_csv(rows);
    os.close();

    double mean = 0.0;
    for (const auto& r : rows) mean += r.similarity;
    if (!rows.empty()) mean /= static_cast<double>(rows.size());

    Manifest m("probe-similarity", 0);
    m.config("pairs", pairs);
    m.config("model", model_in);
    m.config("vocab", vocab_path);
    m.config("out", out);
    m.input(pairs);
    m.input(model_in);
    m.input(vocab_path);
    m.artifact(out);
    m.write(manifest.empty() ? default_manifest_path(out) : manifest);
    std::cout << rows.size() << " pairs, mean similarity " << mean << "\n";
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radiology report contrastive training toolkit"};
  app.require_subcommand(1);

  GenCmd gen;
  IngestCmd ingest;
  AnnotateCmd annotate;
  AugmentCmd augment;
  PretrainCmd pretrain;
  FinetuneCmd finetune;
  ClassifyCmd classify;
  EvaluateCmd evaluate;
  ProbeCmd probe;

  gen.attach(app);
  ingest.attach(app);
  annotate.attach(app);
  augment.attach(app);
  pretrain.attach(app);
  finetune.attach(app);
  classify.attach(app);
  evaluate.attach(app);
  probe.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const radcl::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const radcl::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const radcl::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
