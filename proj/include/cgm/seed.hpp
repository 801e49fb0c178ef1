#pragma once

#include <cstdint>
#include <string_view>

namespace cgm {

/// Derive an independent 64-bit seed from a master seed and a named stream.
/// Identical (master, stage, index) triples always produce the same value.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::uint64_t index = 0);

}  // namespace cgm
