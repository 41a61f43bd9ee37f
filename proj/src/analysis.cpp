#include "tdigest/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace tdigest {

namespace {

constexpr double kCountEps = 1e-9;
constexpr double kKSizeTol = 1.0 + 1e-9;

std::string normalizer_label(const ScaleSpec& spec) {
    if (spec.policy == NormalizerPolicy::Constant) {
        return "const:" + std::to_string(spec.z);
    }
    return "paper";
}

}  // namespace

double q_worst(double w_left, double w, double n) {
    if (w_left + w > n) {
        throw std::domain_error("centroid weights exceed total weight");
    }
    const double q_min = w_left / n;
    const double q_max = (w_left + w) / n;
    return std::abs(q_min - 0.5) > std::abs(q_max - 0.5) ? q_min : q_max;
}

BoundReport verify_digest(const TDigest& d) {
    if (!d.compressed()) {
        throw std::logic_error("verify_digest requires a compressed digest");
    }
    BoundReport report;
    report.spec = d.spec();
    report.n = d.total_weight();
    report.centroid_count = d.centroids().size();
    report.count_bounds = centroid_count_bounds(d.spec(), report.n);

    const bool tail_kind =
        d.spec().kind == ScaleKind::K2 || d.spec().kind == ScaleKind::K3;
    const double count_slack = tail_kind ? 2.0 : 0.0;
    const auto count = static_cast<double>(report.centroid_count);
    report.count_ok = count >= report.count_bounds.lower - kCountEps &&
                      count <= report.count_bounds.upper + count_slack + kCountEps;

    double w_before = 0.0;
    const auto cs = d.centroids();
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const double w = cs[i].weight;
        report.max_weight = std::max(report.max_weight, w);
        if (w > 1.0) {
            const double qw = q_worst(w_before, w, report.n);
            const double bound = max_weight_bound(d.spec(), report.n, qw);
            if (w > bound) {
                report.max_weight_violations.push_back({i, w, bound, qw});
            }
            const double ks = d.k_size(i);
            if (ks > kKSizeTol) {
                report.ksize_violations.push_back({i, ks});
            }
        }
        w_before += w;
    }
    report.all_ok = report.count_ok && report.max_weight_violations.empty() &&
                    report.ksize_violations.empty();
    return report;
}

std::vector<SweepRow> sweep(const std::vector<ScaleSpec>& specs,
                            const std::vector<std::uint64_t>& ns,
                            const std::vector<Distribution>& dists,
                            const std::vector<std::uint64_t>& seeds) {
    if (specs.empty() || ns.empty() || dists.empty() || seeds.empty()) {
        throw std::invalid_argument("sweep requires non-empty parameter sets");
    }
    struct Trial {
        ScaleSpec spec;
        std::uint64_t n;
        Distribution dist;
        std::uint64_t seed;
    };
    std::vector<Trial> trials;
    for (const auto& spec : specs) {
        validate_spec(spec);
        for (auto n : ns) {
            for (auto dist : dists) {
                for (auto seed : seeds) {
                    trials.push_back({spec, n, dist, seed});
                }
            }
        }
    }

    std::vector<SweepRow> rows(trials.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= trials.size()) {
                return;
            }
            const Trial& t = trials[i];
            const auto start = std::chrono::steady_clock::now();
            TDigest d(t.spec);
            for (double x : generate(t.dist, t.n, t.seed)) {
                d.insert(x);
            }
            d.compress();
            const BoundReport rep = verify_digest(d);
            const auto stop = std::chrono::steady_clock::now();
            rows[i] = {t.spec,
                       t.n,
                       t.dist,
                       t.seed,
                       rep.centroid_count,
                       rep.count_bounds.lower,
                       rep.count_bounds.upper,
                       rep.count_ok,
                       rep.max_weight,
                       rep.max_weight_violations.size(),
                       rep.ksize_violations.size(),
                       std::chrono::duration<double, std::milli>(stop - start).count()};
        }
    };

    const std::size_t n_threads =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), trials.size());
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) {
        pool.emplace_back(worker);
    }
    for (auto& th : pool) {
        th.join();
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "scale,delta,normalizer,n,dist,seed,centroids,count_lower,count_upper,"
           "count_ok,max_weight,weight_violations,ksize_violations,elapsed_ms\n";
    for (const SweepRow& r : rows) {
        out << to_string(r.spec.kind) << ',' << r.spec.delta << ','
            << normalizer_label(r.spec) << ',' << r.n << ',' << to_string(r.dist)
            << ',' << r.seed << ',' << r.centroids << ',' << r.count_lower << ','
            << r.count_upper << ',' << (r.count_ok ? 1 : 0) << ',' << r.max_weight
            << ',' << r.weight_violations << ',' << r.ksize_violations << ','
            << r.elapsed_ms << '\n';
    }
}

AccuracyReport oracle_compare(TDigest& d, const std::vector<double>& data,
                              const std::vector<double>& q_grid) {
    if (static_cast<double>(data.size()) != d.total_weight()) {
        throw std::invalid_argument("data size does not match digest weight");
    }
    if (data.empty()) {
        throw std::invalid_argument("oracle_compare requires data");
    }
    AccuracyReport report;
    report.q_grid = q_grid;
    report.rank_errors.reserve(q_grid.size());
    for (double q : q_grid) {
        if (!(q >= 0.0 && q <= 1.0)) {
            throw std::domain_error("quantile outside [0, 1]");
        }
        // exact value by interpolated order statistic
        const double rank = q * static_cast<double>(data.size() - 1);
        const auto lo = static_cast<std::size_t>(rank);
        const std::size_t hi = std::min(lo + 1, data.size() - 1);
        const double frac = rank - static_cast<double>(lo);
        const double exact = data[lo] * (1.0 - frac) + data[hi] * frac;

        const double err = std::abs(d.cdf(exact) - q);
        report.rank_errors.push_back(err);
        const bool tail = q <= 0.001 || q >= 0.999;
        if (tail) {
            report.max_tail_error = std::max(report.max_tail_error, err);
        } else {
            report.max_mid_error = std::max(report.max_mid_error, err);
        }
    }
    return report;
}

}  // namespace tdigest
