#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "classgain/rounding.hpp"
#include "classgain/solver.hpp"
#include "classgain/types.hpp"

namespace classgain {

// Per-class false classification ratios r_i = m_i / n_i after optimal label
// permutation matching, plus the overall error rate.
struct EvalResult {
    std::vector<std::size_t> truth_count;     // n_i
    std::vector<std::size_t> misclassified;   // m_i
    std::vector<double> ratio;                // m_i / n_i, NaN when n_i = 0
    std::vector<bool> ratio_defined;
    double overall_error = 0.0;               // sum m_i / N
    std::vector<std::size_t> permutation;     // applied to estimated labels
    double gain = 0.0;                        // filled by run_experiment
    std::uint64_t seed = 0;
};

// Matches estimated classes to truth classes by exhaustive permutation search
// (J <= 8), minimizing total misclassifications; ties pick the
// lexicographically smallest permutation.
EvalResult false_classification_ratios(const ClassificationScheme& estimated,
                                       const ClassificationScheme& truth);

enum class Method { Relaxation, KMeans, EM, BruteForce };

std::string method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

struct ExperimentConfig {
    SolverConfig solver;
    int round_k = 32;
    std::optional<TypicalityEpsilons> epsilons;  // defaults from (N, V) when unset
    int kmeans_max_iters = 100;
    int em_max_iters = 200;
    double em_tol = 1e-8;
    int threads = 1;  // parallel seeds
};

struct SolveSummary {
    double relaxed_objective = 0.0;
    double hard_objective = 0.0;
    double gain = 0.0;
    bool typical = false;
    double concentration_bound = 0.0;
    int converged_restarts = 0;
    std::size_t iterations = 0;
    double wall_ms = 0.0;
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    EvalResult eval;
    std::optional<SolveSummary> solve;
    double wall_ms = 0.0;
};

struct Aggregate {
    double mean = 0.0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

Aggregate aggregate(const std::vector<double>& values);

struct ExperimentReport {
    Method method = Method::Relaxation;
    std::vector<SeedOutcome> per_seed;
    Aggregate overall_error;
    std::vector<Aggregate> per_class_ratio;
};

// Runs the method once per seed on fresh draws from the mixture and
// aggregates the error statistics. Seeds are independent; results are ordered
// by seed regardless of thread count.
ExperimentReport run_experiment(const MixtureSpec& spec, std::size_t n, Method method,
                                const std::vector<std::uint64_t>& seeds,
                                const ExperimentConfig& cfg = {});

// Built-in benchmark mixtures used by the `repro` command and the acceptance
// suite, with their reference per-class false classification ratios.
enum class BenchmarkCase { One, Two, Three, TwoDim };

struct Benchmark {
    std::string name;
    MixtureSpec mixture;
    std::size_t n = 0;
    SignalShape shape = SignalShape::linear(1);
    std::vector<double> reference_ratios;  // percent, by class
};

Benchmark benchmark_case(BenchmarkCase which);
std::optional<BenchmarkCase> benchmark_from_name(const std::string& name);

}  // namespace classgain
