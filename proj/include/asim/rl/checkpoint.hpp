#pragma once

#include <cstdint>
#include <string>

#include "asim/rl/mlp.hpp"
#include "asim/rl/normalizer.hpp"

namespace asim::rl {

// Versioned little-endian binary snapshot of a trained policy. Layout:
//   magic "ASIMCKPT" | u32 version | u32 obs_dim | u32 act_dim | u32 hidden
//   | u32 layers | u64 step | u64 cfg_hash
//   | normalizer: f64 count, f64 mean[obs_dim], f64 m2[obs_dim]
//   | f64 log_std[act_dim]
//   | per layer (pi trunk then vf trunk): u32 rows, u32 cols,
//     f64 w[rows*cols] row-major, f64 b[rows]
struct Checkpoint {
    PolicyParams params;
    ObsNormalizer normalizer{1};
    uint64_t step = 0;
    uint64_t cfg_hash = 0;
};

// Round-trip is bit-exact. Throws asim::error on I/O failure, version
// mismatch, or a corrupt/truncated file.
void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace asim::rl
