#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "classgain/gain.hpp"
#include "classgain/types.hpp"

namespace classgain {

enum class InitStrategy {
    Auto,            // quantile-seeded first restart, Dirichlet for the rest
    DirichletRandom,
    QuantileSeeded,
    Uniform,
};

struct SolverConfig {
    int max_iters = 2000;
    double step_init = 0.1;
    double armijo_c = 1e-4;
    double step_shrink = 0.5;
    double tol_obj = 1e-10;   // relative decrease of the objective
    double tol_step = 1e-9;   // max membership change
    int restarts = 8;
    std::uint64_t seed = 0;
    InitStrategy init = InitStrategy::Auto;
    int threads = 1;          // restarts run in parallel when > 1
    bool record_trajectory = true;

    void validate() const;
};

struct RestartTrace {
    int index = 0;
    bool converged = false;
    bool failed = false;           // aborted on a non-finite objective
    std::string diagnostic;
    double final_objective = 0.0;
    int iterations = 0;
    std::vector<std::pair<int, double>> trajectory;  // (iteration, F)
};

struct SolveReport {
    explicit SolveReport(MembershipMatrix membership)
        : best_membership(std::move(membership)) {}

    MembershipMatrix best_membership;
    double best_objective = 0.0;   // F at the returned membership
    double gain = 0.0;             // classification gain of the returned membership
    int best_restart = 0;
    std::size_t iterations_used = 0;
    double wall_ms = 0.0;
    bool degenerate_signal = false;  // all samples equal; uniform membership returned
    std::vector<std::string> warnings;
    std::vector<RestartTrace> restarts;
};

// Euclidean projection of v onto the probability simplex (sort-threshold).
std::vector<double> project_row_to_simplex(std::span<const double> v);
void project_row_to_simplex_inplace(std::span<double> v);

// Minimizes F(a) over row-stochastic memberships by projected gradient
// descent with Armijo backtracking, best of `restarts` starts. Deterministic
// given (x, J, cfg), independent of thread count.
SolveReport solve_relaxation(const SampleSet& x, std::size_t num_classes,
                             const SolverConfig& cfg = {});

}  // namespace classgain
