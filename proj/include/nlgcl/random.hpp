#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nlgcl {

using Rng = std::mt19937_64;

/// Derives an independent generator for a named sub-stream of a master seed.
/// The same (seed, name, index) always yields the same generator, which lets
/// an interrupted run pick up epoch k's streams without replaying 0..k-1.
Rng substream(std::uint64_t master_seed, std::string_view name, std::uint64_t index = 0);

}  // namespace nlgcl
