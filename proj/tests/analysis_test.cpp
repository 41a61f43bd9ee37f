#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "tdigest/analysis.hpp"
#include "tdigest/datagen.hpp"
#include "tdigest/digest.hpp"

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

}  // namespace

TEST_CASE("q_worst") {
    CHECK(q_worst(100, 200, 1000) == doctest::Approx(0.1));
    CHECK(q_worst(400, 200, 1000) == doctest::Approx(0.6));  // tie -> q_max
    CHECK(q_worst(0, 1000, 1000) == 1.0);
    CHECK_THROWS_AS(q_worst(900, 200, 1000), std::domain_error);
}

TEST_CASE("verify_digest accepts library-built digests") {
    auto seq = build_from(ScaleSpec::k0(100.0), generate(Distribution::Sequential, 40, 0));
    auto rep = verify_digest(seq);
    CHECK(rep.centroid_count == 40);
    CHECK(rep.all_ok);

    auto uni = build_from(ScaleSpec::k1(100.0), generate(Distribution::Uniform, 100000, 13));
    rep = verify_digest(uni);
    CHECK(rep.count_ok);
    CHECK(rep.centroid_count >= 50);
    CHECK(rep.centroid_count <= 100);
    CHECK(rep.ksize_violations.empty());
}

TEST_CASE("verify_digest flags an oversized centroid") {
    // one weight-5000 centroid in a 10^4 stream; the k0 bound is 2n/delta = 200
    TDigest d(ScaleSpec::k0(100.0));
    for (int i = 0; i < 2500; ++i) {
        d.insert(-1000.0 + i);
    }
    d.insert(0.0, 5000.0);
    for (int i = 0; i < 2500; ++i) {
        d.insert(1000.0 + i);
    }
    d.compress();
    const auto rep = verify_digest(d);
    REQUIRE(!rep.max_weight_violations.empty());
    bool found = false;
    for (const auto& v : rep.max_weight_violations) {
        if (v.weight >= 5000.0) {
            CHECK(v.bound == doctest::Approx(200.0));
            found = true;
        }
    }
    CHECK(found);
    CHECK(!rep.all_ok);
}

TEST_CASE("verify_digest requires compression") {
    TDigest d(ScaleSpec::k1(100.0));
    d.insert(1.0);
    CHECK_THROWS_AS(verify_digest(d), std::logic_error);
}

TEST_CASE("sweep") {
    const std::vector<ScaleSpec> specs = {ScaleSpec::k0(100.0), ScaleSpec::k1(100.0)};
    const std::vector<std::uint64_t> ns = {1000, 10000};
    const std::vector<Distribution> dists = {Distribution::Uniform, Distribution::Sequential};
    const std::vector<std::uint64_t> seeds = {1, 2};

    const auto rows = sweep(specs, ns, dists, seeds);
    REQUIRE(rows.size() == 16);
    for (const auto& r : rows) {
        CHECK(r.centroids <= std::min<double>(r.n, r.spec.delta));
        CHECK(r.count_ok);
    }

    SUBCASE("deterministic") {
        const auto again = sweep(specs, ns, dists, seeds);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(rows[i].centroids == again[i].centroids);
            CHECK(rows[i].max_weight == again[i].max_weight);
            CHECK(rows[i].n == again[i].n);
            CHECK(rows[i].seed == again[i].seed);
        }
    }

    SUBCASE("empty parameter set") {
        CHECK_THROWS_AS(sweep(specs, ns, dists, {}), std::invalid_argument);
        CHECK_THROWS_AS(sweep({}, ns, dists, seeds), std::invalid_argument);
    }

    SUBCASE("csv shape") {
        std::ostringstream out;
        write_sweep_csv(out, rows);
        std::istringstream in(out.str());
        std::string header;
        std::getline(in, header);
        CHECK(header ==
              "scale,delta,normalizer,n,dist,seed,centroids,count_lower,count_upper,"
              "count_ok,max_weight,weight_violations,ksize_violations,elapsed_ms");
        std::size_t lines = 0;
        for (std::string line; std::getline(in, line);) {
            ++lines;
        }
        CHECK(lines == rows.size());
    }
}

TEST_CASE("oracle_compare") {
    auto data = generate(Distribution::Uniform, 20000, 3);
    auto d = build_from(ScaleSpec::k1(100.0), data);
    std::sort(data.begin(), data.end());
    const std::vector<double> grid = {0.0001, 0.001, 0.1, 0.5, 0.9, 0.999, 0.9999};
    const auto rep = oracle_compare(d, data, grid);
    REQUIRE(rep.rank_errors.size() == grid.size());
    for (double e : rep.rank_errors) {
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
    }
    CHECK(rep.max_mid_error < 0.02);

    SUBCASE("degenerate input") {
        std::vector<double> same(500, 3.5);
        auto flat = build_from(ScaleSpec::k1(100.0), same);
        const auto r = oracle_compare(flat, same, grid);
        for (double e : r.rank_errors) {
            CHECK(e <= 1.0);
        }
    }

    SUBCASE("size mismatch") {
        data.pop_back();
        CHECK_THROWS_AS(oracle_compare(d, data, grid), std::invalid_argument);
    }
}
