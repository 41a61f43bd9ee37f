#include "tdigest/scale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace tdigest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

void check_quantile(double q) {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw std::domain_error("quantile outside [0, 1]: " + std::to_string(q));
    }
}

}  // namespace

const char* to_string(ScaleKind kind) {
    switch (kind) {
        case ScaleKind::K0: return "k0";
        case ScaleKind::K1: return "k1";
        case ScaleKind::K2: return "k2";
        case ScaleKind::K3: return "k3";
    }
    return "?";
}

const char* to_string(NormalizerPolicy policy) {
    switch (policy) {
        case NormalizerPolicy::Constant: return "const";
        case NormalizerPolicy::PaperK2: return "paper-k2";
        case NormalizerPolicy::PaperK3: return "paper-k3";
    }
    return "?";
}

ScaleSpec ScaleSpec::k0(double delta) { return {ScaleKind::K0, delta, NormalizerPolicy::Constant, 1.0}; }
ScaleSpec ScaleSpec::k1(double delta) { return {ScaleKind::K1, delta, NormalizerPolicy::Constant, 1.0}; }
ScaleSpec ScaleSpec::k2(double delta, double z) { return {ScaleKind::K2, delta, NormalizerPolicy::Constant, z}; }
ScaleSpec ScaleSpec::k2_paper(double delta) { return {ScaleKind::K2, delta, NormalizerPolicy::PaperK2, 1.0}; }
ScaleSpec ScaleSpec::k3(double delta, double z) { return {ScaleKind::K3, delta, NormalizerPolicy::Constant, z}; }
ScaleSpec ScaleSpec::k3_paper(double delta) { return {ScaleKind::K3, delta, NormalizerPolicy::PaperK3, 1.0}; }

void validate_spec(const ScaleSpec& spec) {
    if (!(spec.delta >= 2.0) || !std::isfinite(spec.delta)) {
        throw std::invalid_argument("delta must be finite and >= 2");
    }
    const bool tail_kind = spec.kind == ScaleKind::K2 || spec.kind == ScaleKind::K3;
    if (!tail_kind && spec.policy != NormalizerPolicy::Constant) {
        throw std::invalid_argument("paper normalizer policies apply only to k2/k3");
    }
    if (spec.policy == NormalizerPolicy::Constant && !(spec.z > 0.0 && std::isfinite(spec.z))) {
        throw std::invalid_argument("constant normalizer must be a positive finite value");
    }
}

double normalizer(const ScaleSpec& spec, double n) {
    const double r = std::max(n / spec.delta, 1.0);
    switch (spec.policy) {
        case NormalizerPolicy::Constant: return spec.z;
        case NormalizerPolicy::PaperK2: return 4.0 * std::log(r) + 24.0;
        case NormalizerPolicy::PaperK3: return 4.0 * std::log(r) + 21.0;
    }
    throw std::logic_error("unreachable normalizer policy");
}

double evaluate(const ScaleSpec& spec, double q, double n) {
    check_quantile(q);
    switch (spec.kind) {
        case ScaleKind::K0:
            return 0.5 * spec.delta * q;
        case ScaleKind::K1:
            return spec.delta / (2.0 * kPi) * std::asin(2.0 * q - 1.0);
        case ScaleKind::K2: {
            if (q == 0.0) return -kInf;
            if (q == 1.0) return kInf;
            // log(q) - log(1-q): antisymmetric under q -> 1-q by exact negation
            return spec.delta / normalizer(spec, n) * (std::log(q) - std::log1p(-q));
        }
        case ScaleKind::K3: {
            if (q == 0.0) return -kInf;
            if (q == 1.0) return kInf;
            const double scale = spec.delta / normalizer(spec, n);
            return q <= 0.5 ? scale * std::log(2.0 * q) : -scale * std::log(2.0 * (1.0 - q));
        }
    }
    throw std::logic_error("unreachable scale kind");
}

double invert(const ScaleSpec& spec, double kval, double n) {
    switch (spec.kind) {
        case ScaleKind::K0: {
            const double hi = 0.5 * spec.delta;
            if (!(kval >= 0.0 && kval <= hi)) {
                throw std::domain_error("k value outside [0, delta/2] for k0");
            }
            return std::clamp(kval / hi, 0.0, 1.0);
        }
        case ScaleKind::K1: {
            const double hi = 0.25 * spec.delta;
            // a few ulps of slack so invert(evaluate(1)) is accepted
            const double tol = 8.0 * std::numeric_limits<double>::epsilon() * hi;
            if (!(kval >= -hi - tol && kval <= hi + tol)) {
                throw std::domain_error("k value outside [-delta/4, delta/4] for k1");
            }
            kval = std::clamp(kval, -hi, hi);
            return std::clamp(0.5 * (std::sin(2.0 * kPi * kval / spec.delta) + 1.0), 0.0, 1.0);
        }
        case ScaleKind::K2: {
            if (kval == -kInf) return 0.0;
            if (kval == kInf) return 1.0;
            const double t = kval * normalizer(spec, n) / spec.delta;
            // logistic inverse, stable for both signs
            return std::clamp(1.0 / (1.0 + std::exp(-t)), 0.0, 1.0);
        }
        case ScaleKind::K3: {
            if (kval == -kInf) return 0.0;
            if (kval == kInf) return 1.0;
            const double t = kval * normalizer(spec, n) / spec.delta;
            const double q = t <= 0.0 ? 0.5 * std::exp(t) : 1.0 - 0.5 * std::exp(-t);
            return std::clamp(q, 0.0, 1.0);
        }
    }
    throw std::logic_error("unreachable scale kind");
}

double slope(const ScaleSpec& spec, double q, double n) {
    check_quantile(q);
    switch (spec.kind) {
        case ScaleKind::K0:
            return 0.5 * spec.delta;
        case ScaleKind::K1: {
            const double s = q * (1.0 - q);
            if (s == 0.0) return kInf;
            return spec.delta / (2.0 * kPi * std::sqrt(s));
        }
        case ScaleKind::K2: {
            const double s = q * (1.0 - q);
            if (s == 0.0) return kInf;
            return spec.delta / normalizer(spec, n) / s;
        }
        case ScaleKind::K3: {
            const double near = std::min(q, 1.0 - q);
            if (near == 0.0) return kInf;
            return spec.delta / (near * normalizer(spec, n));
        }
    }
    throw std::logic_error("unreachable scale kind");
}

QuantilePair unit_weight_cutoffs(const ScaleSpec& spec, double n) {
    const auto all_unit = [] { return QuantilePair{0.5, 0.5}; };
    switch (spec.kind) {
        case ScaleKind::K0:
            if (n <= 0.5 * spec.delta) return all_unit();
            return {0.0, 1.0};  // constant slope never exceeds n
        case ScaleKind::K1: {
            const double a = spec.delta / (kPi * n);  // = 2 * delta/(2 pi n)
            const double disc = 1.0 - a * a;
            if (disc <= 0.0) return all_unit();
            const double q1 = 0.5 * (1.0 - std::sqrt(disc));
            return {q1, 1.0 - q1};
        }
        case ScaleKind::K2: {
            const double disc = 1.0 - 4.0 * spec.delta / normalizer(spec, n) / n;
            if (disc <= 0.0) return all_unit();
            const double q1 = 0.5 * (1.0 - std::sqrt(disc));
            return {q1, 1.0 - q1};
        }
        case ScaleKind::K3: {
            const double q1 = spec.delta / (n * normalizer(spec, n));
            if (q1 >= 0.5) return all_unit();
            return {q1, 1.0 - q1};
        }
    }
    throw std::logic_error("unreachable scale kind");
}

CountBounds centroid_count_bounds(const ScaleSpec& spec, double n) {
    const double z = normalizer(spec, n);
    switch (spec.kind) {
        case ScaleKind::K0:
        case ScaleKind::K1: {
            if (spec.kind == ScaleKind::K1 && n <= spec.delta / kPi) return {n, n};
            return {std::min(n, 0.5 * spec.delta), std::min(n, spec.delta)};
        }
        case ScaleKind::K2:
        case ScaleKind::K3: {
            const bool k2 = spec.kind == ScaleKind::K2;
            if (n <= (k2 ? 4.0 : 1.0) * spec.delta / z) return {n, n};
            const double lr = std::log(std::max(n / spec.delta, 1.0));
            const double upper = k2 ? 4.0 * spec.delta / z * (lr + std::log(z) + 0.5)
                                    : 4.0 * spec.delta / z *
                                          (0.5 - std::log(2.0) + lr + std::log(z));
            const double up = std::min(n, upper);
            // every centroid covers at most one k-unit of the range between
            // the unit-weight cutoffs, so that range is a valid lower bound
            const auto cut = unit_weight_cutoffs(spec, n);
            const double range = evaluate(spec, cut.q2, n) - evaluate(spec, cut.q1, n);
            return {std::min(std::min(n, std::max(1.0, range)), up), up};
        }
    }
    throw std::logic_error("unreachable scale kind");
}

double max_weight_bound(const ScaleSpec& spec, double n, double q_worst) {
    check_quantile(q_worst);
    double bound = 0.0;
    switch (spec.kind) {
        case ScaleKind::K0:
            bound = 2.0 * n / spec.delta;
            break;
        case ScaleKind::K1:
            bound = 2.0 * n * std::sin(kPi / spec.delta) *
                    std::sqrt(q_worst * (1.0 - q_worst));
            break;
        case ScaleKind::K2:
            bound = n * normalizer(spec, n) / spec.delta * q_worst * (1.0 - q_worst);
            break;
        case ScaleKind::K3:
            bound = n * normalizer(spec, n) / spec.delta * std::min(q_worst, 1.0 - q_worst);
            break;
    }
    return std::max(1.0, bound);
}

double k1_delta_q(const ScaleSpec& spec, double q) {
    if (spec.kind != ScaleKind::K1) {
        throw std::domain_error("k1_delta_q requires a k1 spec");
    }
    check_quantile(q);
    return 2.0 * std::sin(kPi / spec.delta) * std::sqrt(q * (1.0 - q));
}

}  // namespace tdigest
