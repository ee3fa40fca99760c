#pragma once

#include <cstdint>
#include <vector>

#include "classgain/types.hpp"

namespace classgain {

// Tolerances for the three typicality conditions. eps1 is dimensionless,
// eps2 carries signal units, eps3 signal units squared.
struct TypicalityEpsilons {
    double eps1 = 0.0;
    double eps2 = 0.0;
    double eps3 = 0.0;

    // N^{-1/3} schedule scaled by the signal range: the concentration bound
    // vanishes with N while the class statistics still converge.
    static TypicalityEpsilons defaults_for(std::size_t n, double value_range);

    void validate() const;
};

struct TypicalityCheck {
    bool typical = false;
    bool count_ok = false;     // class occupancy totals
    bool sum_ok = false;       // weighted sample sums
    bool square_ok = false;    // weighted squared deviations
    // Largest per-class deviation divided by N, comparable against eps_k.
    double count_residual = 0.0;
    double sum_residual = 0.0;
    double square_residual = 0.0;
    // Classes whose relaxed mean is undefined; conditions 2-3 skipped there.
    std::vector<std::size_t> skipped_classes;
};

struct RoundingReport {
    explicit RoundingReport(ClassificationScheme rounded) : scheme(std::move(rounded)) {}

    ClassificationScheme scheme;
    double hard_objective = 0.0;   // F of the hard scheme
    TypicalityCheck typicality;
    TypicalityEpsilons epsilons;
    int trials = 0;
    double concentration_bound = 0.0;  // upper bound on P(not typical)
};

// Draws each label independently with P(z_n = i) = a*_{ni}.
ClassificationScheme random_round(const MembershipMatrix& a_star, std::uint64_t seed);

// Checks the three typicality conditions of the rounded scheme against the
// relaxed memberships; reference means come from the relaxed solution.
TypicalityCheck is_typical(const ClassificationScheme& z, const MembershipMatrix& a_star,
                           const SampleSet& x, const TypicalityEpsilons& eps);

// 2J exp(-2 eps1^2 N) + 2J exp(-2 eps2^2 N / V^2) + 2J exp(-2 eps3^2 N / V^4).
// May exceed one; it is an upper bound on the failure probability.
double azuma_bound(std::size_t n, std::size_t num_classes, double value_range,
                   const TypicalityEpsilons& eps);

// Draws k independent roundings and keeps the scheme with the smallest hard
// objective; ties go to the earliest trial. Trial t uses the generator stream
// derived from (seed, t), so trials are order-independent.
RoundingReport round_best_of_k(const MembershipMatrix& a_star, const SampleSet& x,
                               int k, std::uint64_t seed, const TypicalityEpsilons& eps);
RoundingReport round_best_of_k(const MembershipMatrix& a_star, const SampleSet& x,
                               int k, std::uint64_t seed);

}  // namespace classgain
