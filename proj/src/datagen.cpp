#include "tdigest/datagen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tdigest {

namespace {

double next_unit(std::mt19937_64& rng) {
    // 53 random bits -> [0, 1)
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double next_normal(std::mt19937_64& rng) {
    // Box-Muller, one value per pair of draws
    double u1 = next_unit(rng);
    while (u1 == 0.0) {
        u1 = next_unit(rng);
    }
    const double u2 = next_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

const char* to_string(Distribution dist) {
    switch (dist) {
        case Distribution::Uniform: return "uniform";
        case Distribution::Normal: return "normal";
        case Distribution::Sequential: return "sequential";
        case Distribution::Reversed: return "reversed";
        case Distribution::Clustered: return "clustered";
    }
    return "?";
}

Distribution parse_distribution(const std::string& id) {
    if (id == "uniform") return Distribution::Uniform;
    if (id == "normal") return Distribution::Normal;
    if (id == "sequential") return Distribution::Sequential;
    if (id == "reversed") return Distribution::Reversed;
    if (id == "clustered") return Distribution::Clustered;
    throw std::invalid_argument("unknown distribution: " + id);
}

std::vector<double> generate(Distribution dist, std::uint64_t n, std::uint64_t seed) {
    std::vector<double> out;
    out.reserve(n);
    std::mt19937_64 rng(seed);
    switch (dist) {
        case Distribution::Uniform:
            for (std::uint64_t i = 0; i < n; ++i) {
                double u = next_unit(rng);
                while (u == 0.0) {
                    u = next_unit(rng);
                }
                out.push_back(u);
            }
            break;
        case Distribution::Normal:
            for (std::uint64_t i = 0; i < n; ++i) {
                out.push_back(next_normal(rng));
            }
            break;
        case Distribution::Sequential:
            for (std::uint64_t i = 1; i <= n; ++i) {
                out.push_back(static_cast<double>(i));
            }
            break;
        case Distribution::Reversed:
            for (std::uint64_t i = n; i >= 1; --i) {
                out.push_back(static_cast<double>(i));
            }
            break;
        case Distribution::Clustered:
            for (std::uint64_t i = 0; i < n; ++i) {
                const double base = i % 2 == 0 ? 0.0 : 1.0;
                out.push_back(base + 1e-9 * (next_unit(rng) - 0.5));
            }
            break;
    }
    return out;
}

}  // namespace tdigest
