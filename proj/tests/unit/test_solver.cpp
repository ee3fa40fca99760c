#include <algorithm>
#include <cmath>

#include "classgain/baselines.hpp"
#include "classgain/model.hpp"
#include "classgain/solver.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace classgain;

TEST_SUITE("solver") {

TEST_CASE("projection: feasible points are fixed") {
    const std::vector<double> v = {0.2, 0.8};
    CHECK(project_row_to_simplex(v) == v);
}

TEST_CASE("projection: beyond a vertex lands on the vertex") {
    const std::vector<double> v = {2.0, 0.0};
    const auto p = project_row_to_simplex(v);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(0.0));
}

TEST_CASE("projection: symmetric input maps to the barycenter") {
    const std::vector<double> v = {0.6, 0.6, 0.6};
    const auto p = project_row_to_simplex(v);
    for (double e : p) CHECK(e == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("projection properties: feasibility, idempotence, optimality") {
    Rng rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t j = 2 + rng.uniform_below(5);
        std::vector<double> v(j);
        for (auto& e : v) e = rng.normal(0.0, 3.0);
        const auto p = project_row_to_simplex(v);

        double sum = 0.0;
        for (double e : p) {
            CHECK(e >= 0.0);
            sum += e;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

        const auto pp = project_row_to_simplex(p);
        for (std::size_t i = 0; i < j; ++i) {
            CHECK(pp[i] == doctest::Approx(p[i]).epsilon(1e-12));
        }

        // No random feasible point may be closer to v than the projection.
        double proj_d2 = 0.0;
        for (std::size_t i = 0; i < j; ++i) proj_d2 += (p[i] - v[i]) * (p[i] - v[i]);
        for (int probe = 0; probe < 10; ++probe) {
            std::vector<double> q(j);
            rng.dirichlet_row(q);
            double d2 = 0.0;
            for (std::size_t i = 0; i < j; ++i) d2 += (q[i] - v[i]) * (q[i] - v[i]);
            CHECK(d2 >= proj_d2 - 1e-9);
        }
    }
}

TEST_CASE("solve: J=1 returns the all-ones column immediately") {
    Rng rng(43);
    SampleSet x = test::random_signal(rng, 20, 1.0, 2.0);
    SolveReport report = solve_relaxation(x, 1);
    CHECK(report.best_membership.cols() == 1);
    CHECK(report.best_membership.is_hard());
    ClassStats stats = class_stats(x, report.best_membership);
    CHECK(report.best_objective == doctest::Approx(std::log2(stats.variance_x)).epsilon(1e-12));
    CHECK(report.gain == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("solve: degenerate constant signal returns uniform membership") {
    SampleSet x({5.0, 5.0, 5.0, 5.0});
    SolveReport report = solve_relaxation(x, 2);
    CHECK(report.degenerate_signal);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(report.best_membership.at(k, 0) == doctest::Approx(0.5));
    }
}

TEST_CASE("solve: separated two-class signal is recovered exactly") {
    MixtureSpec spec;
    spec.components = {{0.0, 1.0, 0.5}, {40.0, 1.0, 0.5}};
    spec.layout = BlocksLayout{{{0, 32}, {1, 32}}};
    spec.seed = 3;
    auto [x, truth] = generate(spec, 64);
    SolverConfig cfg;
    cfg.seed = 17;
    SolveReport report = solve_relaxation(x, 2, cfg);
    // The relaxed solution should already be (nearly) hard on this instance.
    const ClassificationScheme labels = report.best_membership.argmax_labels();
    std::size_t agree = 0;
    for (std::size_t k = 0; k < 64; ++k) {
        agree += labels[k] == truth[k] || labels[k] == 1 - truth[k];
    }
    std::size_t direct = 0;
    for (std::size_t k = 0; k < 64; ++k) direct += labels[k] == truth[k];
    const std::size_t matches = std::max(direct, 64 - direct);
    CHECK(matches == 64);
    CHECK(report.gain > 50.0);
}

TEST_CASE("solve: objective is monotone within each restart") {
    Rng rng(47);
    SampleSet x = test::random_signal(rng, 32, 0.0, 2.0);
    SolverConfig cfg;
    cfg.seed = 5;
    cfg.restarts = 4;
    SolveReport report = solve_relaxation(x, 2, cfg);
    for (const auto& restart : report.restarts) {
        for (std::size_t t = 1; t < restart.trajectory.size(); ++t) {
            CHECK(restart.trajectory[t].second <=
                  restart.trajectory[t - 1].second + 1e-12);
        }
    }
}

TEST_CASE("solve: report is consistent and deterministic") {
    Rng rng(53);
    SampleSet x = test::random_signal(rng, 24, 0.0, 3.0);
    SolverConfig cfg;
    cfg.seed = 11;
    cfg.restarts = 3;
    SolveReport a = solve_relaxation(x, 2, cfg);
    SolveReport b = solve_relaxation(x, 2, cfg);
    CHECK(a.best_objective == b.best_objective);
    CHECK(a.best_membership.entries() == b.best_membership.entries());
    CHECK(a.best_restart == b.best_restart);

    CHECK(a.best_objective ==
          doctest::Approx(log_objective(x, a.best_membership)).epsilon(1e-9));
    double best = a.restarts.front().final_objective;
    for (const auto& r : a.restarts) {
        if (!r.failed) best = std::min(best, r.final_objective);
    }
    CHECK(a.best_objective == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("solve: thread count does not change the result") {
    Rng rng(59);
    SampleSet x = test::random_signal(rng, 40, 0.0, 2.0);
    SolverConfig cfg;
    cfg.seed = 23;
    cfg.restarts = 4;
    cfg.threads = 1;
    SolveReport serial = solve_relaxation(x, 3, cfg);
    cfg.threads = 4;
    SolveReport parallel = solve_relaxation(x, 3, cfg);
    CHECK(serial.best_objective == parallel.best_objective);
    CHECK(serial.best_membership.entries() == parallel.best_membership.entries());
}

TEST_CASE("solve: final membership is feasible") {
    Rng rng(61);
    for (int trial = 0; trial < 5; ++trial) {
        SampleSet x = test::random_signal(rng, 16, 0.0, 1.0);
        SolverConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(trial);
        cfg.restarts = 2;
        SolveReport report = solve_relaxation(x, 3, cfg);
        const auto& m = report.best_membership;
        for (std::size_t k = 0; k < m.rows(); ++k) {
            double sum = 0.0;
            for (std::size_t i = 0; i < m.cols(); ++i) {
                CHECK(m.at(k, i) >= 0.0);
                CHECK(m.at(k, i) <= 1.0);
                sum += m.at(k, i);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("solve: every sampled iterate is feasible") {
    // Capping max_iters at k makes the returned membership the k-th iterate.
    Rng rng(331);
    SampleSet x = test::random_signal(rng, 20, 0.0, 3.0);
    for (int cap = 1; cap <= 12; ++cap) {
        SolverConfig cfg;
        cfg.seed = 3;
        cfg.restarts = 2;
        cfg.max_iters = cap;
        SolveReport report = solve_relaxation(x, 3, cfg);
        const auto& m = report.best_membership;
        for (std::size_t k = 0; k < m.rows(); ++k) {
            double sum = 0.0;
            for (std::size_t i = 0; i < m.cols(); ++i) {
                CHECK(m.at(k, i) >= 0.0);
                CHECK(m.at(k, i) <= 1.0);
                sum += m.at(k, i);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("solve: relaxation lower-bounds the integer optimum on small instances") {
    // The relaxed feasible set contains every hard scheme, so the solver's
    // value may exceed the brute-force optimum only via local minima.
    MixtureSpec spec;
    spec.components = {{0.0, 1.0, 0.5}, {3.0, 1.5, 0.5}};
    spec.layout = IidLayout{};
    int satisfied = 0;
    for (int trial = 0; trial < 10; ++trial) {
        spec.seed = static_cast<std::uint64_t>(100 + trial);
        auto [x, truth] = generate(spec, 8);
        SolverConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(trial);
        SolveReport report = solve_relaxation(x, 2, cfg);
        BruteForceResult brute = brute_force_integer(x, 2);
        if (report.best_objective <= brute.objective + 1e-6) satisfied++;
    }
    CHECK(satisfied >= 9);
}

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    cfg.restarts = 0;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = SolverConfig{};
    cfg.step_shrink = 1.5;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    Rng rng(67);
    SampleSet x = test::random_signal(rng, 8, 0.0, 1.0);
    CHECK_THROWS_AS(solve_relaxation(x, 0, SolverConfig{}), validation_error);
}

}  // TEST_SUITE
