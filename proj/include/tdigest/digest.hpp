#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "tdigest/scale.hpp"

namespace tdigest {

struct Centroid {
    double mean = 0.0;
    double weight = 0.0;  // whole-valued count of samples

    bool operator==(const Centroid&) const = default;
};

class deserialize_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class bad_magic_error : public deserialize_error {
    using deserialize_error::deserialize_error;
};
class bad_version_error : public deserialize_error {
    using deserialize_error::deserialize_error;
};
class truncated_error : public deserialize_error {
    using deserialize_error::deserialize_error;
};
class invariant_error : public deserialize_error {
    using deserialize_error::deserialize_error;
};

// Streaming t-digest. Samples are buffered and folded into the sorted
// centroid list by compress(), which enforces a k-size <= 1 budget on every
// multi-sample centroid. Single-writer; concurrent reads only between
// mutations.
class TDigest {
public:
    explicit TDigest(ScaleSpec spec, std::size_t buffer_capacity);
    explicit TDigest(ScaleSpec spec);  // capacity defaults to 10*delta

    void insert(double x, double weight = 1.0);
    void compress();

    // Folds `other` into a fresh compression pass over both centroid sets.
    // Specs must match.
    static TDigest merge(const TDigest& a, const TDigest& b);

    // k(q_max) - k(q_min) for centroid `index` using weight-prefix quantile
    // estimates. Requires a compressed digest.
    double k_size(std::size_t index) const;

    // Both compress first, hence non-const.
    double quantile(double q);
    double cdf(double x);

    std::vector<std::uint8_t> serialize() const;
    static TDigest deserialize(std::span<const std::uint8_t> bytes);

    const ScaleSpec& spec() const { return spec_; }
    double total_weight() const { return total_weight_; }
    std::size_t buffer_capacity() const { return buffer_capacity_; }
    bool compressed() const { return buffer_.empty(); }
    std::span<const Centroid> centroids() const { return centroids_; }
    double min() const { return min_; }
    double max() const { return max_; }

private:
    void compress_pass(std::vector<Centroid>& points);

    ScaleSpec spec_;
    std::size_t buffer_capacity_;
    std::vector<Centroid> centroids_;
    std::vector<Centroid> buffer_;
    double total_weight_ = 0.0;
    double min_ = 0.0;
    double max_ = 0.0;
    bool reverse_next_ = false;  // alternate pass direction per compress
};

}  // namespace tdigest
