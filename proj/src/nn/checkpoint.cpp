#include "radcl/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <set>

#include "radcl/errors.hpp"
#include "radcl/hashing.hpp"
#include "radcl/rng.hpp"

namespace radcl::nn {

namespace {

constexpr char kMagic[8] = {'R', 'A', 'D', 'C', 'L', 'C', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  char bytes[4];
  std::memcpy(bytes, &v, 4);
  buf.append(bytes, 4);
}

void put_u64(std::string& buf, std::uint64_t v) {
  char bytes[8];
  std::memcpy(bytes, &v, 8);
  buf.append(bytes, 8);
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw SchemaError("checkpoint truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, buf.data() + pos, 4);
    pos += 4;
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

void save_checkpoint(const std::string& path, ModelParams<float>& params) {
  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  put_u32(buf, kVersion);
  const auto& c = params.config;
  for (std::uint32_t v : {c.vocab_size, c.max_seq_len, c.d_model, c.n_layers, c.n_heads, c.d_ff,
                          c.proj_dim, static_cast<std::uint32_t>(c.proj_norm)}) {
    put_u32(buf, v);
  }
  put_u32(buf, static_cast<std::uint32_t>(params.head_classes.size()));
  for (std::uint32_t h : params.head_classes) put_u32(buf, h);

  auto tensors = params.named_tensors();
  put_u32(buf, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    put_u32(buf, static_cast<std::uint32_t>(name.size()));
    buf.append(name);
    put_u32(buf, static_cast<std::uint32_t>(tensor->rows()));
    put_u32(buf, static_cast<std::uint32_t>(tensor->cols()));
    for (Index i = 0; i < tensor->rows(); ++i) {
      for (Index j = 0; j < tensor->cols(); ++j) {
        const float v = (*tensor)(i, j);
        char bytes[4];
        std::memcpy(bytes, &v, 4);
        buf.append(bytes, 4);
      }
    }
  }
  put_u64(buf, fnv1a64(buf));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("write failed: " + path);
}

ModelParams<float> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < sizeof(kMagic) + 8) throw SchemaError("checkpoint too small");
  const std::string body = buf.substr(0, buf.size() - 8);
  std::uint64_t stored;
  std::memcpy(&stored, buf.data() + buf.size() - 8, 8);
  if (fnv1a64(body) != stored) {
    throw ChecksumMismatch("checkpoint checksum mismatch: " + path);
  }

  Reader r{body};
  if (r.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw SchemaError("not a checkpoint file: " + path);
  }
  if (r.u32() != kVersion) throw SchemaError("unsupported checkpoint version");

  EncoderConfig cfg;
  cfg.vocab_size = r.u32();
  cfg.max_seq_len = r.u32();
  cfg.d_model = r.u32();
  cfg.n_layers = r.u32();
  cfg.n_heads = r.u32();
  cfg.d_ff = r.u32();
  cfg.proj_dim = r.u32();
  cfg.proj_norm = static_cast<ProjNorm>(r.u32());
  std::vector<std::uint32_t> heads(r.u32());
  for (auto& h : heads) h = r.u32();

  Rng dummy(0);
  ModelParams<float> params = ModelParams<float>::init(cfg, heads, dummy);

  std::map<std::string, Mat<float>*> by_name;
  for (auto& [name, tensor] : params.named_tensors()) by_name[name] = tensor;

  const std::uint32_t count = r.u32();
  if (count != by_name.size()) throw SchemaError("unexpected tensor count in checkpoint");
  std::set<std::string> seen;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::string name = r.bytes(r.u32());
    auto it = by_name.find(name);
    if (it == by_name.end()) throw SchemaError("unknown tensor in checkpoint: " + name);
    if (!seen.insert(name).second) throw SchemaError("duplicate tensor: " + name);
    Mat<float>& tensor = *it->second;
    const auto rows = static_cast<Index>(r.u32());
    const auto cols = static_cast<Index>(r.u32());
    if (rows != tensor.rows() || cols != tensor.cols()) {
      throw SchemaError("tensor shape mismatch for " + name);
    }
    const std::string data = r.bytes(static_cast<std::size_t>(rows) * cols * 4);
    std::size_t off = 0;
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        float v;
        std::memcpy(&v, data.data() + off, 4);
        off += 4;
        tensor(i, j) = v;
      }
    }
  }
  if (r.pos != body.size()) throw SchemaError("trailing bytes in checkpoint");
  return params;
}

}  // namespace radcl::nn
