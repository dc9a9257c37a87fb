#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace twd {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of a named substream ("covgen", "sampling-train", ...). Adding a new
/// stream never shifts the draws of an existing one.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream);

/// Seed of the index-th item of a stream, e.g. one per sample row.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

inline Engine make_engine(std::uint64_t seed) { return Engine(splitmix64(seed)); }

}  // namespace twd
