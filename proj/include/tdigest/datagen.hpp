#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tdigest {

enum class Distribution { Uniform, Normal, Sequential, Reversed, Clustered };

const char* to_string(Distribution dist);

// Throws std::invalid_argument for an unknown id.
Distribution parse_distribution(const std::string& id);

// Deterministic sample sequence. Uniform and normal values are produced
// directly from mt19937_64 draws so sequences are identical across
// standard libraries. Sequential is 1..n, reversed n..1, clustered is half
// near 0 and half near 1 with 1e-9 jitter.
std::vector<double> generate(Distribution dist, std::uint64_t n, std::uint64_t seed);

}  // namespace tdigest
