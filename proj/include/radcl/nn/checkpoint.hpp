#pragma once

#include <string>

#include "radcl/nn/params.hpp"

namespace radcl::nn {

// Versioned binary container: magic + version + config + named f32 tensors
// (row-major), closed by a 64-bit FNV-1a checksum of everything before it.
void save_checkpoint(const std::string& path, ModelParams<float>& params);
ModelParams<float> load_checkpoint(const std::string& path);

}  // namespace radcl::nn
