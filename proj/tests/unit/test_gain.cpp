#include <cmath>

#include "classgain/gain.hpp"
#include "classgain/model.hpp"
#include "classgain/rng.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace classgain;

namespace {

// Central finite differences of the raw objective evaluator.
std::vector<double> fd_gradient(const SampleSet& x, const MembershipMatrix& a,
                                double relative_step = 1e-6) {
    ObjectiveContext ctx(x);
    std::vector<double> entries = a.entries();
    std::vector<double> grad(entries.size());
    for (std::size_t idx = 0; idx < entries.size(); ++idx) {
        const double h = relative_step * std::max(std::abs(entries[idx]), 1e-3);
        const double saved = entries[idx];
        entries[idx] = saved + h;
        const double up = ctx.value(entries, a.cols());
        entries[idx] = saved - h;
        const double down = ctx.value(entries, a.cols());
        entries[idx] = saved;
        grad[idx] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace

TEST_SUITE("gain") {

TEST_CASE("gaussian distortion closed form") {
    CHECK(gaussian_distortion(4.0, 1.0) == doctest::Approx(1.0));
    CHECK(gaussian_distortion(1.0, 0.0) == doctest::Approx(1.0));
    CHECK(gaussian_distortion(2500.0, 3.0) == doctest::Approx(2500.0 / 64.0));
    CHECK_THROWS_AS(gaussian_distortion(-1.0, 1.0), validation_error);
}

TEST_CASE("entropy in bits") {
    const std::vector<double> half = {0.5, 0.5};
    CHECK(entropy_bits(half) == doctest::Approx(1.0));
    const std::vector<double> point = {1.0, 0.0};
    CHECK(entropy_bits(point) == doctest::Approx(0.0));
    const std::vector<double> skew = {0.25, 0.75};
    const double expected = -0.25 * std::log2(0.25) - 0.75 * std::log2(0.75);
    CHECK(entropy_bits(skew) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.811278).epsilon(1e-6));
    const std::vector<double> bad = {0.7, 0.7};
    CHECK_THROWS_AS(entropy_bits(bad), validation_error);
}

namespace {

ClassStats make_stats(std::vector<double> p, std::vector<double> variance) {
    ClassStats stats;
    stats.p = std::move(p);
    stats.variance = std::move(variance);
    stats.mean.assign(stats.p.size(), 0.0);
    stats.defined.assign(stats.p.size(), true);
    stats.n = 1;
    stats.variance_x = 1.0;
    return stats;
}

}  // namespace

TEST_CASE("rate allocation: two active classes solve in closed form") {
    ClassStats stats = make_stats({0.5, 0.5}, {4.0, 1.0});
    RateAllocation alloc = optimal_rate_allocation(stats, 2.0);
    CHECK(alloc.lambda == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(alloc.rate[0] == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(alloc.rate[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK_FALSE(alloc.low_rate);
    // Stored rates satisfy the water level exactly.
    for (std::size_t i = 0; i < 2; ++i) {
        const double expect =
            std::max(0.5 * std::log2(stats.variance[i] / alloc.lambda), 0.0);
        CHECK(alloc.rate[i] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("rate allocation: single class takes the whole budget") {
    ClassStats stats = make_stats({1.0}, {3.0});
    RateAllocation alloc = optimal_rate_allocation(stats, 2.5);
    CHECK(alloc.rate[0] == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(alloc.lambda == doctest::Approx(3.0 * std::exp2(-5.0)).epsilon(1e-8));
}

TEST_CASE("rate allocation: symmetric classes split evenly") {
    ClassStats stats = make_stats({0.5, 0.5}, {1.0, 1.0});
    RateAllocation alloc = optimal_rate_allocation(stats, 3.0);
    CHECK(alloc.rate[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(alloc.rate[1] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("rate allocation: budget constraint holds across random stats") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t j = 1 + rng.uniform_below(4);
        std::vector<double> p(j), sigma(j);
        rng.dirichlet_row(p);
        for (auto& s : sigma) s = 0.1 + 10.0 * rng.uniform();
        ClassStats stats = make_stats(p, sigma);
        const double entropy = entropy_bits(stats.p);
        const double rate = entropy + 0.2 + 4.0 * rng.uniform();
        RateAllocation alloc = optimal_rate_allocation(stats, rate);
        double allocated = 0.0;
        for (std::size_t i = 0; i < j; ++i) allocated += stats.p[i] * alloc.rate[i];
        CHECK(allocated == doctest::Approx(rate - entropy).epsilon(1e-9));
    }
}

TEST_CASE("rate allocation errors") {
    ClassStats stats = make_stats({0.5, 0.5}, {4.0, 1.0});
    CHECK_THROWS_AS(optimal_rate_allocation(stats, 0.5), validation_error);  // R < H
    ClassStats zero = make_stats({0.5, 0.5}, {0.0, 0.0});
    CHECK_THROWS_AS(optimal_rate_allocation(zero, 2.0), numerical_error);
}

TEST_CASE("classified distortion: J=1 collapses to the plain encoder") {
    ClassStats stats = make_stats({1.0}, {2.75});
    ClassifiedDistortion d = classified_distortion(stats, 2.0);
    CHECK(d.value == doctest::Approx(gaussian_distortion(2.75, 2.0)).epsilon(1e-12));
    CHECK_FALSE(d.low_rate);
}

TEST_CASE("classified distortion: closed form equals the allocation sum") {
    ClassStats stats = make_stats({0.5, 0.5}, {4.0, 1.0});
    ClassifiedDistortion d = classified_distortion(stats, 2.0);
    CHECK(d.value == doctest::Approx(0.5).epsilon(1e-9));
    // Cross-check against sum_i p_i sigma_i^2 2^{-2 R_i}.
    RateAllocation alloc = optimal_rate_allocation(stats, 2.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        sum += stats.p[i] * gaussian_distortion(stats.variance[i], alloc.rate[i]);
    }
    CHECK(d.value == doctest::Approx(sum).epsilon(1e-9));
}

TEST_CASE("classified distortion: equal variances against the sum form") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t j = 2 + rng.uniform_below(3);
        const double s = 0.5 + 5.0 * rng.uniform();
        std::vector<double> p(j, 1.0 / static_cast<double>(j));
        ClassStats stats = make_stats(p, std::vector<double>(j, s));
        const double rate = std::log2(static_cast<double>(j)) + 1.0 + 3.0 * rng.uniform();
        ClassifiedDistortion d = classified_distortion(stats, rate);
        RateAllocation alloc = optimal_rate_allocation(stats, rate);
        double sum = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            sum += stats.p[i] * gaussian_distortion(stats.variance[i], alloc.rate[i]);
        }
        CHECK(d.value == doctest::Approx(sum).epsilon(1e-9));
    }
}

TEST_CASE("classified distortion: low-rate regime falls back to the sum") {
    ClassStats stats = make_stats({0.5, 0.5}, {100.0, 0.0001});
    // Tiny residual rate: the small class gets nothing.
    ClassifiedDistortion d = classified_distortion(stats, 1.05);
    CHECK(d.low_rate);
    RateAllocation alloc = optimal_rate_allocation(stats, 1.05);
    double sum = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        sum += stats.p[i] * gaussian_distortion(stats.variance[i], alloc.rate[i]);
    }
    CHECK(d.value == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("classification gain: single class is 1") {
    SampleSet x({1.0, 2.0, 5.0, -3.0});
    MembershipMatrix ones = MembershipMatrix::uniform(4, 1);
    CHECK(classification_gain(x, ones) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("classification gain: two constant-ish halves") {
    SampleSet x({-1.0, 1.0, 9.0, 11.0});
    MembershipMatrix a = ClassificationScheme({0, 0, 1, 1}, 2).to_membership();
    CHECK(classification_gain(x, a) == doctest::Approx(6.5).epsilon(1e-12));
}

TEST_CASE("classification gain: invariant under column permutation") {
    Rng rng(11);
    SampleSet x = test::random_signal(rng, 10, 0.0, 2.0);
    MembershipMatrix a = test::random_membership(rng, 10, 3);
    const std::vector<std::size_t> perm = {1, 2, 0};
    CHECK(classification_gain(x, a) ==
          doctest::Approx(classification_gain(x, a.with_permuted_columns(perm)))
              .epsilon(1e-12));
}

TEST_CASE("classification gain: degenerate cases") {
    SampleSet constant({3.0, 3.0, 3.0});
    CHECK_THROWS_AS(classification_gain(constant, MembershipMatrix::uniform(3, 2)),
                    numerical_error);
    // A populated zero-variance class with positive global variance.
    SampleSet x({0.0, 0.0, 1.0, 2.0});
    MembershipMatrix a = ClassificationScheme({0, 0, 1, 1}, 2).to_membership();
    CHECK(std::isinf(classification_gain(x, a)));
}

TEST_CASE("log objective on the four-point split") {
    SampleSet x({-1.0, 1.0, 9.0, 11.0});
    MembershipMatrix a = ClassificationScheme({0, 0, 1, 1}, 2).to_membership();
    CHECK(log_objective(x, a) == doctest::Approx(2.0).epsilon(1e-12));
    // Consistency with the gain: F = log2(variance / G).
    const double g = classification_gain(x, a);
    CHECK(log_objective(x, a) == doctest::Approx(std::log2(26.0 / g)).epsilon(1e-12));
}

TEST_CASE("log objective: J=1 equals log variance") {
    Rng rng(13);
    SampleSet x = test::random_signal(rng, 20, 1.0, 3.0);
    ClassStats stats = class_stats(x, MembershipMatrix::uniform(20, 1));
    CHECK(log_objective(x, MembershipMatrix::uniform(20, 1)) ==
          doctest::Approx(std::log2(stats.variance_x)).epsilon(1e-12));
}

TEST_CASE("property: exponentiated objective matches the product form") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 12, j = 3;
        SampleSet x = test::random_signal(rng, n, 0.0, 5.0);
        MembershipMatrix a = test::random_membership(rng, n, j);
        ClassStats stats = class_stats(x, a);
        double product = 1.0;
        for (std::size_t i = 0; i < j; ++i) {
            product *= std::pow(stats.variance[i], stats.p[i]);
        }
        product *= std::exp2(2.0 * entropy_bits(stats.p));
        CHECK(std::exp2(log_objective(x, a)) == doctest::Approx(product).epsilon(1e-9));
    }
}

TEST_CASE("property: 2^F times G recovers the signal variance") {
    Rng rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 8 + rng.uniform_below(16);
        const std::size_t j = 1 + rng.uniform_below(4);
        SampleSet x = test::random_signal(rng, n, -2.0, 4.0);
        MembershipMatrix a = test::random_membership(rng, n, j);
        ClassStats stats = class_stats(x, a);
        const double lhs = std::exp2(log_objective(x, a)) * classification_gain(x, a);
        CHECK(lhs == doctest::Approx(stats.variance_x).epsilon(1e-9));
    }
}

TEST_CASE("property: gain invariant under translation and scaling") {
    Rng rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 16, j = 2;
        SampleSet x = test::random_signal(rng, n, 0.0, 3.0);
        MembershipMatrix a = test::random_membership(rng, n, j);
        const double g = classification_gain(x, a);

        std::vector<double> shifted = x.values();
        const double c = rng.normal(0.0, 50.0);
        for (auto& v : shifted) v += c;
        CHECK(classification_gain(SampleSet(shifted), a) ==
              doctest::Approx(g).epsilon(1e-9));

        std::vector<double> scaled = x.values();
        const double factor = 0.5 + 4.0 * rng.uniform();
        for (auto& v : scaled) v *= factor;
        CHECK(classification_gain(SampleSet(scaled), a) ==
              doctest::Approx(g).epsilon(1e-9));
    }
}

TEST_CASE("property: objective stays below its structural bound") {
    Rng rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 10, j = 3;
        SampleSet x = test::random_signal(rng, n, 0.0, 2.0);
        MembershipMatrix a = test::random_membership(rng, n, j);
        ClassStats stats = class_stats(x, a);
        const double f = log_objective(x, a);
        CHECK(std::isfinite(f));
        CHECK(f <= std::log2(stats.variance_x) + 2.0 * std::log2(3.0) + 1e-9);
        CHECK(classification_gain(x, a) > 0.0);
    }
}

TEST_CASE("gradient: symmetric memberships give mirror-symmetric columns") {
    // Signal symmetric about its mean, uniform rows: swapping the two classes
    // is a symmetry, so both gradient columns must agree.
    SampleSet x({-2.0, -1.0, 1.0, 2.0});
    MembershipMatrix a = MembershipMatrix::uniform(4, 2);
    const auto grad = grad_log_objective(x, a);
    for (std::size_t n = 0; n < 4; ++n) {
        CHECK(grad[n * 2] == doctest::Approx(grad[n * 2 + 1]).epsilon(1e-12));
    }
}

TEST_CASE("gradient matches central finite differences") {
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 8, j = 2;
        SampleSet x = test::random_signal(rng, n, 0.0, 2.0);
        MembershipMatrix a = test::random_interior_membership(rng, n, j);
        const auto analytic = grad_log_objective(x, a);
        const auto numeric = fd_gradient(x, a);
        for (std::size_t idx = 0; idx < analytic.size(); ++idx) {
            CHECK(std::abs(analytic[idx] - numeric[idx]) < 1e-5);
        }
    }
}

TEST_CASE("gradient unchanged by adding a constant to the signal") {
    Rng rng(37);
    SampleSet x = test::random_signal(rng, 12, 0.0, 3.0);
    MembershipMatrix a = test::random_interior_membership(rng, 12, 3);
    const auto base = grad_log_objective(x, a);
    std::vector<double> shifted = x.values();
    for (auto& v : shifted) v += 17.5;
    const auto moved = grad_log_objective(SampleSet(shifted), a);
    for (std::size_t idx = 0; idx < base.size(); ++idx) {
        CHECK(moved[idx] == doctest::Approx(base[idx]).epsilon(1e-7));
    }
}

TEST_CASE("variance floor keeps the objective finite on constant classes") {
    SampleSet x({0.0, 0.0, 10.0, 10.0});
    MembershipMatrix a = ClassificationScheme({0, 0, 1, 1}, 2).to_membership();
    const double f = log_objective(x, a);
    CHECK(std::isfinite(f));
    const double floor = variance_floor(25.0);
    CHECK(f == doctest::Approx(std::log2(floor) + 2.0).epsilon(1e-9));
}

}  // TEST_SUITE
