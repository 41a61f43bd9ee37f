#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "tdigest/datagen.hpp"
#include "tdigest/digest.hpp"
#include "tdigest/scale.hpp"

using namespace tdigest;

namespace {

TDigest build_from(const ScaleSpec& spec, const std::vector<double>& samples) {
    TDigest d(spec);
    for (double x : samples) {
        d.insert(x);
    }
    d.compress();
    return d;
}

double centroid_weight_sum(const TDigest& d) {
    double sum = 0.0;
    for (const Centroid& c : d.centroids()) {
        sum += c.weight;
    }
    return sum;
}

}  // namespace

TEST_CASE("new digest is empty") {
    TDigest d(ScaleSpec::k1(100.0), 1000);
    CHECK(d.total_weight() == 0.0);
    CHECK(d.centroids().empty());
    CHECK_THROWS_WITH(d.quantile(0.5), "empty digest");
    CHECK_THROWS(d.cdf(0.0));
    CHECK_THROWS_AS(TDigest(ScaleSpec::k1(100.0), 0), std::invalid_argument);
}

TEST_CASE("insert basics") {
    TDigest d(ScaleSpec::k1(100.0));
    d.insert(42.0);
    CHECK(d.total_weight() == 1.0);
    CHECK(d.quantile(0.5) == 42.0);
    CHECK_THROWS_AS(d.insert(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
    CHECK_THROWS_AS(d.insert(std::numeric_limits<double>::infinity()), std::domain_error);
    CHECK_THROWS_AS(d.insert(1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(d.insert(1.0, 0.0), std::domain_error);
}

TEST_CASE("k1 uniform stream lands in the paper count range") {
    auto d = build_from(ScaleSpec::k1(100.0), generate(Distribution::Uniform, 100000, 7));
    CHECK(d.centroids().size() >= 50);
    CHECK(d.centroids().size() <= 100);
}

TEST_CASE("all-unit regime keeps every sample separate") {
    auto d = build_from(ScaleSpec::k0(100.0), generate(Distribution::Sequential, 40, 0));
    REQUIRE(d.centroids().size() == 40);
    for (const Centroid& c : d.centroids()) {
        CHECK(c.weight == 1.0);
    }
}

TEST_CASE("two samples under k1 delta=4 cannot merge") {
    // k1 full range is delta/2 = 2, so a weight-2 centroid would have k-size 2
    auto d = build_from(ScaleSpec::k1(4.0), {1.0, 2.0});
    REQUIRE(d.centroids().size() == 2);
    CHECK(d.centroids()[0].mean == 1.0);
    CHECK(d.centroids()[1].mean == 2.0);
}

TEST_CASE("compress is idempotent") {
    auto d = build_from(ScaleSpec::k1(50.0), generate(Distribution::Normal, 5000, 11));
    const std::vector<Centroid> once(d.centroids().begin(), d.centroids().end());
    d.compress();
    const std::vector<Centroid> twice(d.centroids().begin(), d.centroids().end());
    CHECK(once == twice);
}

TEST_CASE("merge digests") {
    const auto spec = ScaleSpec::k1(100.0);
    auto a = build_from(spec, generate(Distribution::Uniform, 50000, 1));
    auto b = build_from(spec, generate(Distribution::Uniform, 50000, 2));
    auto m = TDigest::merge(a, b);
    CHECK(m.total_weight() == 100000.0);
    CHECK(centroid_weight_sum(m) == 100000.0);
    CHECK(m.centroids().size() >= 50);
    CHECK(m.centroids().size() <= 100);

    TDigest empty(spec);
    auto same = TDigest::merge(empty, a);
    CHECK(std::vector<Centroid>(same.centroids().begin(), same.centroids().end()) ==
          std::vector<Centroid>(a.centroids().begin(), a.centroids().end()));

    auto other = build_from(ScaleSpec::k2(100.0, 1.0), {1.0, 2.0});
    CHECK_THROWS_AS(TDigest::merge(a, other), std::domain_error);
}

TEST_CASE("k_size") {
    auto single = build_from(ScaleSpec::k1(100.0), {3.0});
    CHECK(single.k_size(0) == doctest::Approx(50.0));  // spans the whole k range
    CHECK_THROWS_AS(single.k_size(1), std::out_of_range);

    auto d = build_from(ScaleSpec::k1(100.0), generate(Distribution::Uniform, 20000, 3));
    for (std::size_t i = 0; i < d.centroids().size(); ++i) {
        if (d.centroids()[i].weight > 1.0) {
            CHECK(d.k_size(i) <= 1.0 + 1e-9);
        }
    }

    TDigest pending(ScaleSpec::k1(100.0));
    pending.insert(1.0);
    CHECK_THROWS_AS(pending.k_size(0), std::logic_error);
}

TEST_CASE("quantile interpolation") {
    // delta large enough that 1..100 all stay unit centroids
    auto d = build_from(ScaleSpec::k0(200.0), generate(Distribution::Sequential, 100, 0));
    REQUIRE(d.centroids().size() == 100);
    const double v = d.quantile(0.37);
    CHECK(v > 37.0);
    CHECK(v < 38.0);
    CHECK(d.quantile(0.0) == 1.0);
    CHECK(d.quantile(1.0) == 100.0);
    CHECK_THROWS_AS(d.quantile(1.5), std::domain_error);
}

TEST_CASE("cdf") {
    auto d = build_from(ScaleSpec::k1(100.0), generate(Distribution::Uniform, 10000, 5));
    CHECK(d.cdf(-1.0) == 0.0);
    CHECK(d.cdf(2.0) == 1.0);
    for (int i = 1; i < 20; ++i) {
        const double q = i / 20.0;
        CHECK(std::abs(d.cdf(d.quantile(q)) - q) <= 1.0 / d.total_weight());
    }

    auto flat = build_from(ScaleSpec::k1(100.0), std::vector<double>(50, 7.0));
    const double p = flat.cdf(7.0);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(flat.cdf(6.9) == 0.0);
    CHECK(flat.cdf(7.1) == 1.0);
}

TEST_CASE("serialization roundtrip and errors") {
    auto d = build_from(ScaleSpec::k2_paper(100.0), generate(Distribution::Normal, 20000, 9));
    const auto bytes = d.serialize();
    const auto back = TDigest::deserialize(bytes);
    CHECK(back.spec() == d.spec());
    CHECK(back.total_weight() == d.total_weight());
    CHECK(back.min() == d.min());
    CHECK(back.max() == d.max());
    CHECK(std::vector<Centroid>(back.centroids().begin(), back.centroids().end()) ==
          std::vector<Centroid>(d.centroids().begin(), d.centroids().end()));

    SUBCASE("bad magic") {
        auto bad = bytes;
        bad[0] = 'X';
        CHECK_THROWS_AS(TDigest::deserialize(bad), bad_magic_error);
    }
    SUBCASE("bad version") {
        auto bad = bytes;
        bad[4] = 99;
        CHECK_THROWS_AS(TDigest::deserialize(bad), bad_version_error);
    }
    SUBCASE("truncation") {
        auto bad = bytes;
        bad.resize(bad.size() - 5);
        CHECK_THROWS_AS(TDigest::deserialize(bad), truncated_error);
        CHECK_THROWS_AS(TDigest::deserialize(std::span<const std::uint8_t>(bad.data(), 3)),
                        truncated_error);
    }
    SUBCASE("negative weight") {
        auto bad = bytes;
        const std::size_t header = bad.size() - 16 * d.centroids().size();
        const double w = -1.0;
        std::memcpy(bad.data() + header + 8, &w, 8);
        CHECK_THROWS_AS(TDigest::deserialize(bad), invariant_error);
    }
    SUBCASE("trailing bytes") {
        auto bad = bytes;
        bad.push_back(0);
        CHECK_THROWS_AS(TDigest::deserialize(bad), invariant_error);
    }
    SUBCASE("serialize requires compression") {
        TDigest pending(ScaleSpec::k1(100.0));
        pending.insert(1.0);
        CHECK_THROWS_AS(pending.serialize(), std::logic_error);
    }
}

TEST_CASE("determinism") {
    const auto samples = generate(Distribution::Normal, 30000, 21);
    auto a = build_from(ScaleSpec::k1(100.0), samples);
    auto b = build_from(ScaleSpec::k1(100.0), samples);
    CHECK(std::vector<Centroid>(a.centroids().begin(), a.centroids().end()) ==
          std::vector<Centroid>(b.centroids().begin(), b.centroids().end()));
}

TEST_CASE("property: randomized digests keep their invariants") {
    std::mt19937_64 rng(99);
    const std::vector<ScaleSpec> specs = {
        ScaleSpec::k0(50.0),      ScaleSpec::k1(100.0),   ScaleSpec::k2(100.0, 1.0),
        ScaleSpec::k2_paper(50.0), ScaleSpec::k3_paper(100.0),
    };
    for (int rep = 0; rep < 120; ++rep) {
        const auto& spec = specs[rep % specs.size()];
        const auto dist = static_cast<Distribution>(rep % 5);
        const std::uint64_t n = 100 + rng() % 20000;
        auto d = build_from(spec, generate(dist, n, rng()));

        // weight conservation
        CHECK(centroid_weight_sum(d) == static_cast<double>(n));
        CHECK(d.total_weight() == static_cast<double>(n));

        // sorted means, whole weights, k-size budget
        double prev = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < d.centroids().size(); ++i) {
            const Centroid& c = d.centroids()[i];
            CHECK(c.mean >= prev);
            prev = c.mean;
            CHECK(std::floor(c.weight) == c.weight);
            CHECK(c.weight >= 1.0);
            if (c.weight > 1.0) {
                CHECK(d.k_size(i) <= 1.0 + 1e-9);
            }
        }

        // quantile monotone, extremes exact
        double prev_q = d.quantile(0.0);
        for (int i = 1; i <= 20; ++i) {
            const double v = d.quantile(i / 20.0);
            CHECK(v >= prev_q);
            prev_q = v;
        }
        CHECK(d.quantile(0.0) == d.min());
        CHECK(d.quantile(1.0) == d.max());

        // serialization identity
        const auto back = TDigest::deserialize(d.serialize());
        CHECK(std::vector<Centroid>(back.centroids().begin(), back.centroids().end()) ==
              std::vector<Centroid>(d.centroids().begin(), d.centroids().end()));
    }
}
