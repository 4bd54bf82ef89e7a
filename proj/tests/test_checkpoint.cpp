// Checkpoint container and vocabulary: round-trips, corruption detection,
// and deterministic id assignment.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "radcl/errors.hpp"
#include "radcl/nn/checkpoint.hpp"
#include "radcl/nn/config.hpp"
#include "radcl/nn/params.hpp"
#include "radcl/nn/vocab.hpp"
#include "radcl/rng.hpp"
#include "radcl/text/corpus.hpp"

using namespace radcl;
using namespace radcl::nn;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("radcl_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

EncoderConfig small_config() {
  EncoderConfig cfg;
  cfg.vocab_size = 40;
  cfg.max_seq_len = 12;
  cfg.d_model = 8;
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.d_ff = 16;
  cfg.proj_dim = 8;
  return cfg;
}

// 14 classification heads: 13 four-class observations plus the 2-class slot.
std::vector<std::uint32_t> standard_heads() {
  std::vector<std::uint32_t> heads(13, 4);
  heads.push_back(2);
  return heads;
}

}  // namespace

TEST_CASE("checkpoints round-trip every tensor bit-exactly") {
  TempDir dir;
  Rng rng(31);
  auto params = ModelParams<float>::init(small_config(), standard_heads(), rng);
  // Perturb running stats so buffers are non-trivial.
  params.bn_mean.setConstant(0.25f);
  params.bn_var.setConstant(1.75f);

  const std::string path = dir.file("model.ckpt");
  save_checkpoint(path, params);
  auto loaded = load_checkpoint(path);

  CHECK(loaded.config == params.config);
  auto a = params.named_tensors();
  auto b = loaded.named_tensors();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CAPTURE(a[i].first);
    CHECK(a[i].first == b[i].first);
    REQUIRE(a[i].second->rows() == b[i].second->rows());
    REQUIRE(a[i].second->cols() == b[i].second->cols());
    CHECK((*a[i].second - *b[i].second).cwiseAbs().maxCoeff() == 0.0f);
  }
  CHECK((loaded.bn_mean - params.bn_mean).cwiseAbs().maxCoeff() == 0.0f);
  CHECK((loaded.bn_var - params.bn_var).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("saving twice produces byte-identical files") {
  TempDir dir;
  Rng rng(32);
  auto params = ModelParams<float>::init(small_config(), rng);
  save_checkpoint(dir.file("a.ckpt"), params);
  save_checkpoint(dir.file("b.ckpt"), params);

  std::ifstream fa(dir.file("a.ckpt"), std::ios::binary);
  std::ifstream fb(dir.file("b.ckpt"), std::ios::binary);
  std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  REQUIRE_FALSE(ca.empty());
  CHECK(ca == cb);
}

TEST_CASE("bit flips in the payload are detected") {
  TempDir dir;
  Rng rng(33);
  auto params = ModelParams<float>::init(small_config(), rng);
  const std::string path = dir.file("model.ckpt");
  save_checkpoint(path, params);

  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(0, std::ios::end);
  const std::streamoff size = f.tellg();
  REQUIRE(size > 128);
  f.seekp(size / 2);
  char byte = 0;
  f.seekg(size / 2);
  f.read(&byte, 1);
  byte = static_cast<char>(byte ^ 0x40);
  f.seekp(size / 2);
  f.write(&byte, 1);
  f.close();

  CHECK_THROWS_AS(load_checkpoint(path), ChecksumMismatch);
}

TEST_CASE("truncated and foreign files are rejected") {
  TempDir dir;

  SUBCASE("file too short for a header") {
    std::ofstream(dir.file("short.ckpt"), std::ios::binary) << "xx";
    CHECK_THROWS_AS(load_checkpoint(dir.file("short.ckpt")), SchemaError);
  }

  SUBCASE("wrong magic") {
    std::ofstream(dir.file("foreign.ckpt"), std::ios::binary)
        << std::string(256, '\x5a');
    CHECK_THROWS_AS(load_checkpoint(dir.file("foreign.ckpt")), SchemaError);
  }

  SUBCASE("truncated payload") {
    Rng rng(34);
    auto params = ModelParams<float>::init(small_config(), rng);
    const std::string path = dir.file("model.ckpt");
    save_checkpoint(path, params);
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() * 2 / 3));
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }

  SUBCASE("missing file") { CHECK_THROWS_AS(load_checkpoint(dir.file("nope.ckpt")), DataError); }
}

TEST_CASE("vocabulary ids are stable under report order") {
  text::Lemmatizer lem;
  auto r1 = text::preprocess_report("FINDINGS: Pneumonia is seen.", "r1", "p1", lem);
  auto r2 = text::preprocess_report("FINDINGS: No pleural effusion.", "r2", "p2", lem);

  const auto a = Vocabulary::build({r1, r2});
  const auto b = Vocabulary::build({r2, r1});
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < static_cast<int>(a.size()); ++i) CHECK(a.lemma(i) == b.lemma(i));
}

TEST_CASE("vocabulary TSV round-trips ids and lemmas") {
  TempDir dir;
  text::Lemmatizer lem;
  auto r = text::preprocess_report(
      "FINDINGS: There is a small left pleural effusion. No pneumothorax.", "r1", "p1", lem);
  const auto vocab = Vocabulary::build({r});
  const std::string path = dir.file("vocab.tsv");
  vocab.save_tsv(path);
  const auto loaded = Vocabulary::load_tsv(path);
  REQUIRE(loaded.size() == vocab.size());
  for (int i = 0; i < static_cast<int>(vocab.size()); ++i) CHECK(loaded.lemma(i) == vocab.lemma(i));
  CHECK(loaded.id("effusion") == vocab.id("effusion"));
  CHECK(loaded.id("zzz_never_seen") == kUnkId);
}

TEST_CASE("encoding prefixes CLS and truncates from the chosen end") {
  text::Lemmatizer lem;
  auto r = text::preprocess_report("FINDINGS: alpha beta gamma delta epsilon zeta.", "r1", "p1",
                                   lem);
  const auto vocab = Vocabulary::build({r});
  const std::vector<std::string> lemmas = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta"};

  const auto full = vocab.encode(lemmas, 16);
  REQUIRE(full.size() == lemmas.size() + 1);
  CHECK(full[0] == kClsId);

  const auto head = vocab.encode(lemmas, 4, /*keep_tail=*/false);
  REQUIRE(head.size() == 4);
  CHECK(head[0] == kClsId);
  CHECK(vocab.lemma(head[1]) == "alpha");
  CHECK(vocab.lemma(head[3]) == "gamma");

  const auto tail = vocab.encode(lemmas, 4, /*keep_tail=*/true);
  REQUIRE(tail.size() == 4);
  CHECK(tail[0] == kClsId);
  CHECK(vocab.lemma(tail[1]) == "delta");
  CHECK(vocab.lemma(tail[3]) == "zeta");

  const auto unk = vocab.encode({"quux"}, 8);
  REQUIRE(unk.size() == 2);
  CHECK(unk[1] == kUnkId);
}
