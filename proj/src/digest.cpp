#include "tdigest/digest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

namespace tdigest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr char kMagic[4] = {'T', 'D', 'I', 'G'};
constexpr std::uint16_t kVersion = 1;

void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t len) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    // little-endian host assumed for the raw copy
    static_assert(std::endian::native == std::endian::little);
    out.insert(out.end(), b, b + len);
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
    put_bytes(out, &v, sizeof(T));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > bytes_.size()) {
            throw truncated_error("digest data truncated");
        }
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

TDigest::TDigest(ScaleSpec spec, std::size_t buffer_capacity)
    : spec_(spec), buffer_capacity_(buffer_capacity), min_(kInf), max_(-kInf) {
    validate_spec(spec_);
    if (buffer_capacity_ < 1) {
        throw std::invalid_argument("buffer capacity must be >= 1");
    }
    buffer_.reserve(buffer_capacity_);
}

TDigest::TDigest(ScaleSpec spec)
    : TDigest(spec, static_cast<std::size_t>(10.0 * spec.delta)) {}

void TDigest::insert(double x, double weight) {
    if (!std::isfinite(x)) {
        throw std::domain_error("sample must be finite");
    }
    if (!(weight >= 1.0) || std::floor(weight) != weight || !std::isfinite(weight)) {
        throw std::domain_error("weight must be a positive whole number");
    }
    buffer_.push_back({x, weight});
    total_weight_ += weight;
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
    if (buffer_.size() >= buffer_capacity_) {
        compress();
    }
}

void TDigest::compress() {
    if (buffer_.empty() && centroids_.size() <= 1) {
        return;
    }
    std::vector<Centroid> points;
    points.reserve(centroids_.size() + buffer_.size());
    points.insert(points.end(), centroids_.begin(), centroids_.end());
    points.insert(points.end(), buffer_.begin(), buffer_.end());
    buffer_.clear();
    // stable: equal means keep insertion order
    std::stable_sort(points.begin(), points.end(),
                     [](const Centroid& a, const Centroid& b) { return a.mean < b.mean; });
    compress_pass(points);
}

void TDigest::compress_pass(std::vector<Centroid>& points) {
    const double n = total_weight_;
    const bool reverse = reverse_next_;
    reverse_next_ = !reverse_next_;
    if (reverse) {
        std::reverse(points.begin(), points.end());
    }

    // k at a cumulative-weight position p measured in pass direction. For a
    // reversed pass -k(1-p) has the same increments as k over the mirrored
    // span (exactly, by antisymmetry of k1..k3 and linearity of k0).
    const auto k_at = [&](double p) {
        p = std::clamp(p, 0.0, 1.0);
        return reverse ? -evaluate(spec_, 1.0 - p, n) : evaluate(spec_, p, n);
    };

    // For k1 a merge must also keep the centroid within the conservative
    // q_worst weight limit, so that verification finds no heuristic
    // breaches. The limit is symmetric in q -> 1-q, so pass-mirrored
    // coordinates evaluate it exactly.
    const auto weight_allowed = [&](double w_before, double w) {
        if (spec_.kind != ScaleKind::K1) {
            return true;
        }
        const double q_min = w_before / n;
        const double q_max = (w_before + w) / n;
        const double qw = std::abs(q_min - 0.5) > std::abs(q_max - 0.5) ? q_min : q_max;
        return w <= max_weight_bound(spec_, n, qw);
    };

    std::vector<Centroid> merged;
    Centroid acc = points.front();
    double weight_before = 0.0;  // weight emitted ahead of acc
    double k_left = k_at(0.0);
    for (std::size_t i = 1; i < points.size(); ++i) {
        const Centroid& next = points[i];
        const double proposed = weight_before + acc.weight + next.weight;
        if (k_at(proposed / n) - k_left <= 1.0 &&
            weight_allowed(weight_before, acc.weight + next.weight)) {
            acc.mean += next.weight * (next.mean - acc.mean) / (acc.weight + next.weight);
            acc.weight += next.weight;
        } else {
            merged.push_back(acc);
            weight_before += acc.weight;
            k_left = k_at(weight_before / n);
            acc = next;
        }
    }
    merged.push_back(acc);

    if (reverse) {
        std::reverse(merged.begin(), merged.end());
    }
    centroids_ = std::move(merged);
}

TDigest TDigest::merge(const TDigest& a, const TDigest& b) {
    if (!(a.spec_ == b.spec_)) {
        throw std::domain_error("cannot merge digests with different scale specs");
    }
    TDigest out(a.spec_, std::max(a.buffer_capacity_, b.buffer_capacity_));
    out.buffer_.insert(out.buffer_.end(), a.centroids_.begin(), a.centroids_.end());
    out.buffer_.insert(out.buffer_.end(), a.buffer_.begin(), a.buffer_.end());
    out.buffer_.insert(out.buffer_.end(), b.centroids_.begin(), b.centroids_.end());
    out.buffer_.insert(out.buffer_.end(), b.buffer_.begin(), b.buffer_.end());
    out.total_weight_ = a.total_weight_ + b.total_weight_;
    out.min_ = std::min(a.min_, b.min_);
    out.max_ = std::max(a.max_, b.max_);
    if (!out.buffer_.empty()) {
        out.compress();
    }
    return out;
}

double TDigest::k_size(std::size_t index) const {
    if (!compressed()) {
        throw std::logic_error("k_size requires a compressed digest");
    }
    if (index >= centroids_.size()) {
        throw std::out_of_range("centroid index out of range");
    }
    double weight_before = 0.0;
    for (std::size_t i = 0; i < index; ++i) {
        weight_before += centroids_[i].weight;
    }
    const double q_min = weight_before / total_weight_;
    const double q_max = (weight_before + centroids_[index].weight) / total_weight_;
    return evaluate(spec_, std::min(q_max, 1.0), total_weight_) -
           evaluate(spec_, std::min(q_min, 1.0), total_weight_);
}

namespace {

// Interpolation anchors: (rank, value) with strictly increasing ranks.
struct Anchor {
    double rank;
    double value;
};

std::vector<Anchor> make_anchors(std::span<const Centroid> cs, double n, double lo, double hi) {
    std::vector<Anchor> a;
    a.reserve(cs.size() + 2);
    a.push_back({0.0, lo});
    double w_before = 0.0;
    for (const Centroid& c : cs) {
        const double mid = w_before + 0.5 * c.weight;
        if (mid > 0.0 && mid < n) {
            a.push_back({mid, c.mean});
        }
        w_before += c.weight;
    }
    a.push_back({n, hi});
    return a;
}

}  // namespace

double TDigest::quantile(double q) {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw std::domain_error("quantile outside [0, 1]");
    }
    if (total_weight_ < 1.0) {
        throw std::runtime_error("empty digest");
    }
    compress();
    if (q == 0.0) return min_;
    if (q == 1.0) return max_;
    const double target = q * total_weight_;
    const auto anchors = make_anchors(centroids_, total_weight_, min_, max_);
    for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
        if (target <= anchors[i + 1].rank) {
            const auto& [r0, v0] = anchors[i];
            const auto& [r1, v1] = anchors[i + 1];
            const double t = (target - r0) / (r1 - r0);
            return v0 + t * (v1 - v0);
        }
    }
    return max_;
}

double TDigest::cdf(double x) {
    if (total_weight_ < 1.0) {
        throw std::runtime_error("empty digest");
    }
    compress();
    if (x < min_) return 0.0;
    if (x > max_) return 1.0;
    const auto anchors = make_anchors(centroids_, total_weight_, min_, max_);

    // lowest rank whose interpolated value reaches x
    double rank_lo = total_weight_;
    for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
        if (anchors[i].value >= x) {
            rank_lo = anchors[i].rank;
            break;
        }
        if (anchors[i + 1].value >= x) {
            const auto& [r0, v0] = anchors[i];
            const auto& [r1, v1] = anchors[i + 1];
            rank_lo = r0 + (x - v0) / (v1 - v0) * (r1 - r0);
            break;
        }
    }
    // highest rank whose interpolated value is still <= x
    double rank_hi = 0.0;
    for (std::size_t i = anchors.size() - 1; i > 0; --i) {
        if (anchors[i].value <= x) {
            rank_hi = anchors[i].rank;
            break;
        }
        if (anchors[i - 1].value <= x) {
            const auto& [r0, v0] = anchors[i - 1];
            const auto& [r1, v1] = anchors[i];
            rank_hi = r0 + (x - v0) / (v1 - v0) * (r1 - r0);
            break;
        }
    }
    return std::clamp(0.5 * (rank_lo + rank_hi) / total_weight_, 0.0, 1.0);
}

std::vector<std::uint8_t> TDigest::serialize() const {
    if (!compressed()) {
        throw std::logic_error("serialize requires a compressed digest");
    }
    std::vector<std::uint8_t> out;
    put_bytes(out, kMagic, 4);
    put<std::uint16_t>(out, kVersion);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(spec_.kind));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(spec_.policy));
    if (spec_.policy == NormalizerPolicy::Constant) {
        put<double>(out, spec_.z);
    }
    put<double>(out, spec_.delta);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(total_weight_));
    put<double>(out, min_);
    put<double>(out, max_);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(centroids_.size()));
    for (const Centroid& c : centroids_) {
        put<double>(out, c.mean);
        put<double>(out, c.weight);
    }
    return out;
}

TDigest TDigest::deserialize(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    char magic[4];
    magic[0] = static_cast<char>(r.get<std::uint8_t>());
    magic[1] = static_cast<char>(r.get<std::uint8_t>());
    magic[2] = static_cast<char>(r.get<std::uint8_t>());
    magic[3] = static_cast<char>(r.get<std::uint8_t>());
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw bad_magic_error("not a digest file (bad magic)");
    }
    const auto version = r.get<std::uint16_t>();
    if (version != kVersion) {
        throw bad_version_error("unsupported digest version " + std::to_string(version));
    }
    const auto kind_raw = r.get<std::uint8_t>();
    if (kind_raw > 3) {
        throw invariant_error("invalid scale kind byte");
    }
    const auto policy_raw = r.get<std::uint8_t>();
    if (policy_raw > 2) {
        throw invariant_error("invalid normalizer policy byte");
    }
    ScaleSpec spec;
    spec.kind = static_cast<ScaleKind>(kind_raw);
    spec.policy = static_cast<NormalizerPolicy>(policy_raw);
    if (spec.policy == NormalizerPolicy::Constant) {
        spec.z = r.get<double>();
    }
    spec.delta = r.get<double>();
    const auto total = r.get<std::uint64_t>();
    const double lo = r.get<double>();
    const double hi = r.get<double>();
    const auto count = r.get<std::uint32_t>();

    TDigest d = [&] {
        try {
            return TDigest(spec);
        } catch (const std::invalid_argument& e) {
            throw invariant_error(std::string("invalid scale spec: ") + e.what());
        }
    }();

    double weight_sum = 0.0;
    double prev_mean = -std::numeric_limits<double>::infinity();
    d.centroids_.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Centroid c{r.get<double>(), r.get<double>()};
        if (!std::isfinite(c.mean)) {
            throw invariant_error("centroid mean not finite");
        }
        if (!(c.weight >= 1.0) || std::floor(c.weight) != c.weight) {
            throw invariant_error("centroid weight must be a positive whole number");
        }
        if (c.mean < prev_mean) {
            throw invariant_error("centroid means not sorted");
        }
        prev_mean = c.mean;
        weight_sum += c.weight;
        d.centroids_.push_back(c);
    }
    if (r.remaining() != 0) {
        throw invariant_error("trailing bytes after digest payload");
    }
    if (weight_sum != static_cast<double>(total)) {
        throw invariant_error("centroid weights do not sum to total weight");
    }
    if (count > 0 && !(lo <= d.centroids_.front().mean && hi >= d.centroids_.back().mean)) {
        throw invariant_error("min/max inconsistent with centroid means");
    }
    d.total_weight_ = static_cast<double>(total);
    d.min_ = lo;
    d.max_ = hi;
    return d;
}

}  // namespace tdigest
