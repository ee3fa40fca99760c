#include "classgain/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "classgain/baselines.hpp"
#include "classgain/gain.hpp"
#include "classgain/model.hpp"
#include "classgain/rng.hpp"

namespace classgain {

namespace {

using Clock = std::chrono::steady_clock;

std::size_t mismatches(const std::vector<int>& est, const std::vector<int>& truth,
                       const std::vector<std::size_t>& perm) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < est.size(); ++k) {
        if (perm[static_cast<std::size_t>(est[k])] != static_cast<std::size_t>(truth[k])) {
            ++count;
        }
    }
    return count;
}

}  // namespace

EvalResult false_classification_ratios(const ClassificationScheme& estimated,
                                       const ClassificationScheme& truth) {
    if (estimated.size() != truth.size()) {
        throw validation_error("estimated and truth schemes must share N");
    }
    if (estimated.num_classes() != truth.num_classes()) {
        throw validation_error("estimated and truth schemes must share J");
    }
    const std::size_t j = truth.num_classes();
    if (j > 8) throw validation_error("permutation matching supports J <= 8");
    const std::size_t n = truth.size();

    std::vector<std::size_t> perm(j);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best_perm = perm;
    std::size_t best_mis = mismatches(estimated.labels(), truth.labels(), perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
        const std::size_t mis = mismatches(estimated.labels(), truth.labels(), perm);
        if (mis < best_mis) {
            best_mis = mis;
            best_perm = perm;
        }
    }

    EvalResult result;
    result.permutation = best_perm;
    result.truth_count.assign(j, 0);
    result.misclassified.assign(j, 0);
    result.ratio.assign(j, 0.0);
    result.ratio_defined.assign(j, true);
    for (std::size_t k = 0; k < n; ++k) {
        const auto t = static_cast<std::size_t>(truth[k]);
        result.truth_count[t]++;
        if (best_perm[static_cast<std::size_t>(estimated[k])] != t) {
            result.misclassified[t]++;
        }
    }
    for (std::size_t i = 0; i < j; ++i) {
        if (result.truth_count[i] == 0) {
            result.ratio_defined[i] = false;
            result.ratio[i] = std::numeric_limits<double>::quiet_NaN();
        } else {
            result.ratio[i] = static_cast<double>(result.misclassified[i]) /
                              static_cast<double>(result.truth_count[i]);
        }
    }
    result.overall_error = static_cast<double>(best_mis) / static_cast<double>(n);
    return result;
}

std::string method_name(Method m) {
    switch (m) {
        case Method::Relaxation: return "relax";
        case Method::KMeans: return "kmeans";
        case Method::EM: return "em";
        case Method::BruteForce: return "brute";
    }
    return "unknown";
}

std::optional<Method> method_from_name(const std::string& name) {
    if (name == "relax") return Method::Relaxation;
    if (name == "kmeans") return Method::KMeans;
    if (name == "em") return Method::EM;
    if (name == "brute") return Method::BruteForce;
    return std::nullopt;
}

Aggregate aggregate(const std::vector<double>& values) {
    Aggregate agg;
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values) {
        if (std::isfinite(v)) finite.push_back(v);
    }
    agg.count = finite.size();
    if (finite.empty()) {
        agg.mean = agg.median = agg.min = agg.max = std::numeric_limits<double>::quiet_NaN();
        return agg;
    }
    std::sort(finite.begin(), finite.end());
    agg.min = finite.front();
    agg.max = finite.back();
    agg.mean = std::accumulate(finite.begin(), finite.end(), 0.0) /
               static_cast<double>(finite.size());
    const std::size_t mid = finite.size() / 2;
    agg.median = (finite.size() % 2 == 1) ? finite[mid]
                                          : 0.5 * (finite[mid - 1] + finite[mid]);
    return agg;
}

namespace {

SeedOutcome run_single_seed(const MixtureSpec& spec, std::size_t n, Method method,
                            std::uint64_t seed, const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    MixtureSpec seeded = spec;
    seeded.seed = seed;
    auto [x, truth] = generate(seeded, n);
    const std::size_t j = spec.num_classes();

    SeedOutcome outcome;
    outcome.seed = seed;

    ClassificationScheme estimated = truth;  // placeholder, overwritten below
    switch (method) {
        case Method::Relaxation: {
            SolverConfig solver_cfg = cfg.solver;
            solver_cfg.seed = Rng::hash(seed);
            SolveReport solved = solve_relaxation(x, j, solver_cfg);
            const TypicalityEpsilons eps =
                cfg.epsilons.value_or(TypicalityEpsilons::defaults_for(n, x.value_range()));
            std::uint64_t round_seed = seed ^ 0x5bf03635d1d4f6f1ULL;
            RoundingReport rounded =
                round_best_of_k(solved.best_membership, x, cfg.round_k,
                                Rng::hash(round_seed), eps);
            estimated = rounded.scheme;
            SolveSummary summary;
            summary.relaxed_objective = solved.best_objective;
            summary.hard_objective = rounded.hard_objective;
            summary.gain = solved.gain;
            summary.typical = rounded.typicality.typical;
            summary.concentration_bound = rounded.concentration_bound;
            for (const auto& r : solved.restarts) {
                if (r.converged) summary.converged_restarts++;
            }
            summary.iterations = solved.iterations_used;
            summary.wall_ms = solved.wall_ms;
            outcome.solve = summary;
            break;
        }
        case Method::KMeans:
            estimated = kmeans(x, j, Rng::hash(seed), cfg.kmeans_max_iters).labels;
            break;
        case Method::EM:
            estimated = em_gmm(x, j, Rng::hash(seed), cfg.em_max_iters, cfg.em_tol).labels;
            break;
        case Method::BruteForce:
            estimated = brute_force_integer(x, j).labels;
            break;
    }

    outcome.eval = false_classification_ratios(estimated, truth);
    outcome.eval.seed = seed;
    outcome.eval.gain = classification_gain(x, estimated.to_membership());
    outcome.wall_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return outcome;
}

}  // namespace

ExperimentReport run_experiment(const MixtureSpec& spec, std::size_t n, Method method,
                                const std::vector<std::uint64_t>& seeds,
                                const ExperimentConfig& cfg) {
    if (seeds.empty()) throw validation_error("need at least one seed");
    spec.validate(n);

    ExperimentReport report;
    report.method = method;
    report.per_seed.resize(seeds.size());

    const int threads = std::max(1, cfg.threads);
    if (threads == 1 || seeds.size() == 1) {
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            report.per_seed[s] = run_single_seed(spec, n, method, seeds[s], cfg);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const std::size_t workers =
            std::min<std::size_t>(static_cast<std::size_t>(threads), seeds.size());
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (std::size_t s = next.fetch_add(1); s < seeds.size();
                     s = next.fetch_add(1)) {
                    report.per_seed[s] = run_single_seed(spec, n, method, seeds[s], cfg);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    std::vector<double> overall;
    overall.reserve(seeds.size());
    for (const auto& outcome : report.per_seed) overall.push_back(outcome.eval.overall_error);
    report.overall_error = aggregate(overall);

    const std::size_t j = spec.num_classes();
    report.per_class_ratio.resize(j);
    for (std::size_t i = 0; i < j; ++i) {
        std::vector<double> ratios;
        ratios.reserve(seeds.size());
        for (const auto& outcome : report.per_seed) {
            if (outcome.eval.ratio_defined[i]) ratios.push_back(outcome.eval.ratio[i]);
        }
        report.per_class_ratio[i] = aggregate(ratios);
    }
    return report;
}

Benchmark benchmark_case(BenchmarkCase which) {
    Benchmark b;
    switch (which) {
        case BenchmarkCase::One:
            b.name = "one";
            b.mixture.components = {{128.0, 16.0, 0.5}, {16.0, 16.0, 0.5}};
            b.n = 256;
            b.mixture.layout = BlocksLayout{{{0, 128}, {1, 128}}};
            b.shape = SignalShape::linear(256);
            b.reference_ratios = {0.0, 0.0};
            break;
        case BenchmarkCase::Two:
            b.name = "two";
            b.mixture.components = {{128.0, 2500.0, 0.5}, {128.0, 25.0, 0.5}};
            b.n = 256;
            b.mixture.layout = BlocksLayout{{{0, 128}, {1, 128}}};
            b.shape = SignalShape::linear(256);
            b.reference_ratios = {16.41, 6.25};
            break;
        case BenchmarkCase::Three:
            b.name = "three";
            b.mixture.components = {{50.0, 2500.0, 0.5}, {5.0, 25.0, 0.5}};
            b.n = 256;
            b.mixture.layout = BlocksLayout{{{0, 128}, {1, 128}}};
            b.shape = SignalShape::linear(256);
            b.reference_ratios = {10.16, 3.91};
            break;
        case BenchmarkCase::TwoDim:
            b.name = "twodim";
            b.mixture.components = {{200.0, 400.0, 0.5}, {5.0, 400.0, 0.5}};
            b.n = 1024;
            // Top half of the image is class 0, bottom half class 1.
            b.mixture.layout = BlocksLayout{{{0, 512}, {1, 512}}};
            b.shape = SignalShape::grid(32, 32);
            b.reference_ratios = {1.93, 0.52};
            break;
    }
    return b;
}

std::optional<BenchmarkCase> benchmark_from_name(const std::string& name) {
    if (name == "one") return BenchmarkCase::One;
    if (name == "two") return BenchmarkCase::Two;
    if (name == "three") return BenchmarkCase::Three;
    if (name == "twodim") return BenchmarkCase::TwoDim;
    return std::nullopt;
}

}  // namespace classgain
