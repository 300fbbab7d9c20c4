#pragma once

#include <string>

#include "galign/optim.hpp"

namespace galign {

// Flat binary checkpoint: magic "GALN1", then per tensor
//   u64 name length, UTF-8 name bytes, u64 rank, u64 extents..., f64 values...
// all little-endian. Round-trips bit-exactly.

void save_checkpoint(const std::string& path, const NamedParams& params);
NamedParams load_checkpoint(const std::string& path);

}  // namespace galign
