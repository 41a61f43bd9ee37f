#pragma once

#include <stdexcept>
#include <string>

namespace tdigest {

enum class ScaleKind { K0, K1, K2, K3 };

enum class NormalizerPolicy {
    Constant,  // fixed Z, ignored for K0/K1
    PaperK2,   // Z(n) = 4*ln(max(n/delta,1)) + 24
    PaperK3,   // Z(n) = 4*ln(max(n/delta,1)) + 21
};

const char* to_string(ScaleKind kind);
const char* to_string(NormalizerPolicy policy);

// Which scale function to use, its compression parameter, and how the
// normalizer Z is chosen for K2/K3.
struct ScaleSpec {
    ScaleKind kind = ScaleKind::K1;
    double delta = 100.0;
    NormalizerPolicy policy = NormalizerPolicy::Constant;
    double z = 1.0;  // only meaningful under Constant policy

    static ScaleSpec k0(double delta);
    static ScaleSpec k1(double delta);
    static ScaleSpec k2(double delta, double z);
    static ScaleSpec k2_paper(double delta);
    static ScaleSpec k3(double delta, double z);
    static ScaleSpec k3_paper(double delta);

    bool operator==(const ScaleSpec&) const = default;
};

// Throws std::invalid_argument if delta < 2, z <= 0 under Constant policy,
// or a paper normalizer policy is paired with K0/K1.
void validate_spec(const ScaleSpec& spec);

// Symmetric pair of quantile cutoffs, q2 = 1 - q1.
struct QuantilePair {
    double q1 = 0.5;
    double q2 = 0.5;
};

struct CountBounds {
    double lower = 0.0;
    double upper = 0.0;
};

// Z for the given stream size. Natural log, argument clamped to
// max(n/delta, 1) so the value stays positive for small n.
double normalizer(const ScaleSpec& spec, double n);

// k(q). K2/K3 return signed infinity at q in {0,1}. Throws
// std::domain_error for q outside [0,1].
double evaluate(const ScaleSpec& spec, double q, double n);

// k^-1(kval), clamped to [0,1]. For K2/K3 signed infinities map to the
// endpoints. Throws std::domain_error when kval is outside the attainable
// range for K0/K1.
double invert(const ScaleSpec& spec, double kval, double n);

// dk/dq; +infinity at the endpoints for K1/K2/K3.
double slope(const ScaleSpec& spec, double q, double n);

// Boundaries of the region where slope <= n, i.e. where centroids may hold
// more than one sample. Returns (1/2, 1/2) in the all-unit regime and
// (0, 1) for K0 with n > delta/2.
QuantilePair unit_weight_cutoffs(const ScaleSpec& spec, double n);

// Closed-form lower/upper bounds on the number of centroids.
CountBounds centroid_count_bounds(const ScaleSpec& spec, double n);

// Upper bound on the weight of a centroid whose span's worst quantile
// endpoint is q_worst. Never below 1: a single sample is always allowed.
double max_weight_bound(const ScaleSpec& spec, double n, double q_worst);

// Maximum quantile span of a K1 centroid centered at quantile q:
// 2*sin(pi/delta)*sqrt(q(1-q)). Throws std::domain_error unless kind == K1.
double k1_delta_q(const ScaleSpec& spec, double q);

}  // namespace tdigest
