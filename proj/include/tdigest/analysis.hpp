#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tdigest/datagen.hpp"
#include "tdigest/digest.hpp"
#include "tdigest/scale.hpp"

namespace tdigest {

struct WeightViolation {
    std::size_t index;
    double weight;
    double bound;
    double q_worst;
};

struct KSizeViolation {
    std::size_t index;
    double k_size;
};

// Paper bounds vs. the measured state of one digest.
struct BoundReport {
    ScaleSpec spec;
    double n = 0.0;
    std::size_t centroid_count = 0;
    CountBounds count_bounds;
    bool count_ok = false;
    double max_weight = 0.0;
    std::vector<WeightViolation> max_weight_violations;
    std::vector<KSizeViolation> ksize_violations;
    bool all_ok = false;
};

struct SweepRow {
    ScaleSpec spec;
    std::uint64_t n = 0;
    Distribution dist = Distribution::Uniform;
    std::uint64_t seed = 0;
    std::size_t centroids = 0;
    double count_lower = 0.0;
    double count_upper = 0.0;
    bool count_ok = false;
    double max_weight = 0.0;
    std::size_t weight_violations = 0;
    std::size_t ksize_violations = 0;
    double elapsed_ms = 0.0;
};

struct AccuracyReport {
    std::vector<double> q_grid;
    std::vector<double> rank_errors;
    double max_tail_error = 0.0;  // q <= 0.001 or q >= 0.999
    double max_mid_error = 0.0;
};

// The quantile-span endpoint farther from 1/2, from weight-prefix
// estimates q_min = w_left/n and q_max = (w_left+w)/n.
double q_worst(double w_left, double w, double n);

// Checks centroid count against the closed-form bounds and each
// multi-sample centroid against the max-weight and k-size constraints.
// Weight-bound breaches are reported, not thrown. For k2/k3 the count
// check allows +2 over the paper formula. Requires a compressed digest.
BoundReport verify_digest(const TDigest& d);

// One trial per (spec, n, dist, seed) combination; trials run in parallel
// and rows come back in grid order. All input sets must be non-empty.
std::vector<SweepRow> sweep(const std::vector<ScaleSpec>& specs,
                            const std::vector<std::uint64_t>& ns,
                            const std::vector<Distribution>& dists,
                            const std::vector<std::uint64_t>& seeds);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// Rank errors of the digest against the true order statistics of the data
// it was built from. `data` must be sorted and hold exactly the inserted
// multiset.
AccuracyReport oracle_compare(TDigest& d, const std::vector<double>& data,
                              const std::vector<double>& q_grid);

}  // namespace tdigest
