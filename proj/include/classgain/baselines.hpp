#pragma once

#include <cstdint>
#include <vector>

#include "classgain/types.hpp"

namespace classgain {

struct KMeansResult {
    ClassificationScheme labels;
    std::vector<double> centers;
    double wcss = 0.0;   // within-cluster sum of squares
    int iterations = 0;
};

// Lloyd iterations on scalar values with k-means++ seeding. An emptied
// cluster is re-seeded at the point farthest from its own center.
KMeansResult kmeans(const SampleSet& x, std::size_t num_classes, std::uint64_t seed,
                    int max_iters = 100);

struct GmmParams {
    std::vector<double> weight;
    std::vector<double> mean;
    std::vector<double> variance;
    double log_likelihood = 0.0;
    bool degenerate = false;  // constant signal, single-component fallback
};

struct EmResult {
    GmmParams params;
    MembershipMatrix responsibilities;
    ClassificationScheme labels;            // argmax, ties to the lower index
    std::vector<double> log_likelihood_trace;
};

// One-dimensional Gaussian mixture fit, initialized from k-means means and
// the pooled variance. The log-likelihood trace is nondecreasing.
EmResult em_gmm(const SampleSet& x, std::size_t num_classes, std::uint64_t seed,
                int max_iters = 200, double tol = 1e-8);

struct BruteForceResult {
    ClassificationScheme labels;
    double objective = 0.0;  // minimal F over all assignments
};

// Exhaustive minimization of the log objective over assignments, enumerated
// up to class-permutation symmetry; ties break lexicographically. Guarded to
// J^N <= 2^24.
BruteForceResult brute_force_integer(const SampleSet& x, std::size_t num_classes);

}  // namespace classgain
