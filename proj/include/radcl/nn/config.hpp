#pragma once

#include <cstdint>
#include <vector>

#include "radcl/errors.hpp"

namespace radcl::nn {

enum class ProjNorm : std::uint32_t { BatchNorm = 0, LayerNorm = 1 };

struct EncoderConfig {
  std::uint32_t vocab_size = 0;
  std::uint32_t max_seq_len = 128;
  std::uint32_t d_model = 64;
  std::uint32_t n_layers = 2;
  std::uint32_t n_heads = 4;
  std::uint32_t d_ff = 256;
  std::uint32_t proj_dim = 64;
  // BatchNorm follows the reference architecture; LayerNorm is steadier for
  // very small batches.
  ProjNorm proj_norm = ProjNorm::BatchNorm;

  void validate() const {
    if (vocab_size < 4) throw UsageError("vocab_size must cover the reserved tokens");
    for (std::uint32_t v : {max_seq_len, d_model, n_layers, n_heads, d_ff, proj_dim}) {
      if (v < 1) throw UsageError("encoder dimensions must be >= 1");
    }
    if (d_model % n_heads != 0) throw UsageError("d_model must be divisible by n_heads");
  }

  bool operator==(const EncoderConfig&) const = default;
};

}  // namespace radcl::nn
