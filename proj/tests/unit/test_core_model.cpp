#include <algorithm>
#include <cmath>
#include <numeric>

#include "classgain/model.hpp"
#include "classgain/rng.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace classgain;

namespace {

// Straightforward scalar-loop reference for class statistics, kept separate
// from the library implementation on purpose.
ClassStats reference_stats(const std::vector<double>& x, const std::vector<double>& a,
                           std::size_t j) {
    const std::size_t n = x.size();
    ClassStats stats;
    stats.n = n;
    stats.p.assign(j, 0.0);
    stats.mean.assign(j, 0.0);
    stats.variance.assign(j, 0.0);
    stats.defined.assign(j, true);
    for (std::size_t i = 0; i < j; ++i) {
        double s = 0.0, m = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            s += a[k * j + i];
            m += a[k * j + i] * x[k];
        }
        stats.p[i] = s / static_cast<double>(n);
        if (s == 0.0) {
            stats.defined[i] = false;
            continue;
        }
        const double mu = m / s;
        double q = 0.0;
        for (std::size_t k = 0; k < n; ++k) q += a[k * j + i] * (x[k] - mu) * (x[k] - mu);
        stats.mean[i] = mu;
        stats.variance[i] = q / s;
    }
    double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double var_x = 0.0;
    for (double v : x) var_x += (v - mean_x) * (v - mean_x);
    stats.mean_x = mean_x;
    stats.variance_x = var_x / static_cast<double>(n);
    return stats;
}

}  // namespace

TEST_SUITE("core-model") {

TEST_CASE("sample set validates values and shape") {
    CHECK_THROWS_AS(SampleSet(std::vector<double>{}), validation_error);
    CHECK_THROWS_AS(SampleSet({1.0, std::nan("")}), validation_error);
    CHECK_THROWS_AS(SampleSet({1.0, 2.0}, SignalShape::grid(2, 2)), validation_error);

    SampleSet x({3.0, -1.0, 5.0});
    CHECK(x.value_range() == doctest::Approx(6.0));
    SampleSet constant({2.0, 2.0});
    CHECK(constant.value_range() == 0.0);
}

TEST_CASE("grid flattening round-trips") {
    SampleSet grid({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}, SignalShape::grid(2, 3));
    SampleSet linear = grid.with_shape(SignalShape::linear(6));
    SampleSet back = linear.with_shape(SignalShape::grid(2, 3));
    CHECK(back.values() == grid.values());
    CHECK(back.shape() == grid.shape());
}

TEST_CASE("membership matrix invariants") {
    CHECK_THROWS_AS(MembershipMatrix({0.5, 0.6}, 1, 2), validation_error);
    CHECK_THROWS_AS(MembershipMatrix({1.2, -0.2}, 1, 2), validation_error);
    MembershipMatrix soft({0.25, 0.75}, 1, 2);
    CHECK_FALSE(soft.is_hard());
    CHECK_THROWS_AS(soft.hard_labels(), validation_error);

    ClassificationScheme scheme({0, 1, 1, 0}, 2);
    MembershipMatrix hard = scheme.to_membership();
    CHECK(hard.is_hard());
    CHECK(hard.hard_labels().labels() == scheme.labels());
}

TEST_CASE("generate: blocks layout reproduces separated halves") {
    MixtureSpec spec;
    spec.components = {{128.0, 16.0, 0.5}, {16.0, 16.0, 0.5}};
    spec.layout = BlocksLayout{{{0, 128}, {1, 128}}};
    spec.seed = 7;
    auto [x, truth] = generate(spec, 256);
    REQUIRE(x.size() == 256);
    for (std::size_t k = 0; k < 128; ++k) CHECK(truth[k] == 0);
    for (std::size_t k = 128; k < 256; ++k) CHECK(truth[k] == 1);
    // 128 +- 4 sigma on each side keeps the halves comfortably apart.
    double first_mean = 0.0, second_mean = 0.0;
    for (std::size_t k = 0; k < 128; ++k) first_mean += x[k];
    for (std::size_t k = 128; k < 256; ++k) second_mean += x[k];
    CHECK(first_mean / 128.0 == doctest::Approx(128.0).epsilon(0.05));
    CHECK(second_mean / 128.0 == doctest::Approx(16.0).epsilon(0.3));
}

TEST_CASE("generate: single class gives iid draws with unit labels") {
    MixtureSpec spec;
    spec.components = {{0.0, 1.0, 1.0}};
    spec.seed = 42;
    auto [x, truth] = generate(spec, 4);
    CHECK(x.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(truth[k] == 0);
    auto [x2, truth2] = generate(spec, 4);
    CHECK(x.values() == x2.values());  // deterministic given seed
}

TEST_CASE("generate: iid layout matches weights by law of large numbers") {
    MixtureSpec spec;
    spec.components = {{0.0, 1.0, 0.5}, {10.0, 1.0, 0.5}};
    spec.layout = IidLayout{};
    spec.seed = 5;
    const std::size_t n = 100000;
    auto [x, truth] = generate(spec, n);
    std::size_t count0 = 0;
    for (std::size_t k = 0; k < n; ++k) count0 += truth[k] == 0;
    const double fraction = static_cast<double>(count0) / static_cast<double>(n);
    CHECK(std::abs(fraction - 0.5) < 0.01);
}

TEST_CASE("generate rejects invalid specs") {
    MixtureSpec spec;
    spec.components = {{0.0, 1.0, 0.7}, {1.0, 1.0, 0.7}};
    spec.layout = IidLayout{};
    CHECK_THROWS_AS(generate(spec, 10), validation_error);
    spec.components = {{0.0, 1.0, 0.5}, {1.0, 1.0, 0.5}};
    spec.layout = BlocksLayout{{{0, 4}, {1, 4}}};
    CHECK_THROWS_AS(generate(spec, 10), validation_error);  // runs sum to 8
}

TEST_CASE("class_stats: hard constant halves") {
    SampleSet x({0.0, 0.0, 2.0, 2.0});
    MembershipMatrix a = ClassificationScheme({0, 0, 1, 1}, 2).to_membership();
    ClassStats stats = class_stats(x, a);
    CHECK(stats.p[0] == doctest::Approx(0.5));
    CHECK(stats.p[1] == doctest::Approx(0.5));
    CHECK(stats.mean[0] == doctest::Approx(0.0));
    CHECK(stats.mean[1] == doctest::Approx(2.0));
    CHECK(stats.variance[0] == doctest::Approx(0.0));
    CHECK(stats.variance[1] == doctest::Approx(0.0));
    CHECK(stats.variance_x == doctest::Approx(1.0));
}

TEST_CASE("class_stats: symmetric soft rows make the classes identical") {
    SampleSet x({1.0, 3.0});
    MembershipMatrix a({0.5, 0.5, 0.5, 0.5}, 2, 2);
    ClassStats stats = class_stats(x, a);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(stats.p[i] == doctest::Approx(0.5));
        CHECK(stats.mean[i] == doctest::Approx(2.0));
        CHECK(stats.variance[i] == doctest::Approx(1.0));
    }
}

TEST_CASE("class_stats matches the scalar-loop reference on random inputs") {
    Rng rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 16, j = 3;
        SampleSet x = test::random_signal(rng, n, 2.0, 3.0);
        MembershipMatrix a = test::random_membership(rng, n, j);
        ClassStats got = class_stats(x, a);
        ClassStats want = reference_stats(x.values(), a.entries(), j);
        for (std::size_t i = 0; i < j; ++i) {
            CHECK(got.p[i] == doctest::Approx(want.p[i]).epsilon(1e-12));
            CHECK(got.mean[i] == doctest::Approx(want.mean[i]).epsilon(1e-12));
            CHECK(got.variance[i] == doctest::Approx(want.variance[i]).epsilon(1e-12));
        }
        CHECK(got.variance_x == doctest::Approx(want.variance_x).epsilon(1e-12));
    }
}

TEST_CASE("class_stats flags empty classes undefined") {
    SampleSet x({1.0, 2.0, 3.0});
    MembershipMatrix a({1.0, 0.0, 1.0, 0.0, 1.0, 0.0}, 3, 2);
    ClassStats stats = class_stats(x, a);
    CHECK(stats.defined[0]);
    CHECK_FALSE(stats.defined[1]);
    CHECK(stats.p[1] == 0.0);
    CHECK(std::isnan(stats.mean[1]));
}

TEST_CASE("property: hard stats equal direct partitioning") {
    Rng rng(202);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 24, j = 3;
        SampleSet x = test::random_signal(rng, n);
        ClassificationScheme z = test::random_labels(rng, n, j);
        ClassStats stats = class_stats(x, z.to_membership());
        for (std::size_t i = 0; i < j; ++i) {
            std::vector<double> members;
            for (std::size_t k = 0; k < n; ++k) {
                if (static_cast<std::size_t>(z[k]) == i) members.push_back(x[k]);
            }
            if (members.empty()) {
                CHECK_FALSE(stats.defined[i]);
                continue;
            }
            const double mu = std::accumulate(members.begin(), members.end(), 0.0) /
                              static_cast<double>(members.size());
            double var = 0.0;
            for (double v : members) var += (v - mu) * (v - mu);
            var /= static_cast<double>(members.size());
            CHECK(stats.mean[i] == doctest::Approx(mu).epsilon(1e-12));
            CHECK(stats.variance[i] == doctest::Approx(var).epsilon(1e-11));
        }
    }
}

TEST_CASE("property: column permutation permutes stats") {
    Rng rng(303);
    const std::size_t n = 12, j = 4;
    SampleSet x = test::random_signal(rng, n);
    MembershipMatrix a = test::random_membership(rng, n, j);
    const std::vector<std::size_t> perm = {2, 0, 3, 1};
    MembershipMatrix permuted = a.with_permuted_columns(perm);
    ClassStats base = class_stats(x, a);
    ClassStats moved = class_stats(x, permuted);
    for (std::size_t i = 0; i < j; ++i) {
        CHECK(moved.p[perm[i]] == doctest::Approx(base.p[i]).epsilon(1e-12));
        CHECK(moved.mean[perm[i]] == doctest::Approx(base.mean[i]).epsilon(1e-12));
        CHECK(moved.variance[perm[i]] == doctest::Approx(base.variance[i]).epsilon(1e-12));
    }
}

TEST_CASE("property: mixture variance identity for hard memberships") {
    Rng rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 32, j = 3;
        SampleSet x = test::random_signal(rng, n, 1.0, 2.0);
        ClassificationScheme z = test::random_labels(rng, n, j);
        ClassStats stats = class_stats(x, z.to_membership());
        double recomposed = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            if (!stats.defined[i]) continue;
            recomposed += stats.p[i] * stats.variance[i] +
                          stats.p[i] * (stats.mean[i] - stats.mean_x) *
                              (stats.mean[i] - stats.mean_x);
        }
        CHECK(recomposed == doctest::Approx(stats.variance_x).epsilon(1e-9));
    }
}

TEST_CASE("property: shifted-reference variance decomposition") {
    // For hard memberships and any reference point m, the weighted mean square
    // about m splits into the class variance plus the squared mean offset.
    Rng rng(505);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 20, j = 2;
        SampleSet x = test::random_signal(rng, n, -1.0, 4.0);
        ClassificationScheme z = test::random_labels(rng, n, j);
        MembershipMatrix a = z.to_membership();
        ClassStats stats = class_stats(x, a);
        for (std::size_t i = 0; i < j; ++i) {
            if (!stats.defined[i]) continue;
            const double reference = rng.normal(0.0, 10.0);
            double weighted = 0.0, weight = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double d = x[k] - reference;
                weighted += a.at(k, i) * d * d;
                weight += a.at(k, i);
            }
            const double lhs = weighted / weight - (reference - stats.mean[i]) *
                                                       (reference - stats.mean[i]);
            CHECK(lhs == doctest::Approx(stats.variance[i]).epsilon(1e-9));
        }
    }
}

}  // TEST_SUITE
