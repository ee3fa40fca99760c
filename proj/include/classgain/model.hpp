#pragma once

#include <utility>

#include "classgain/types.hpp"

namespace classgain {

// Draws an N-sample signal from the mixture plus its ground-truth labels.
// Deterministic given spec.seed.
std::pair<SampleSet, ClassificationScheme> generate(const MixtureSpec& spec, std::size_t n);

// Per-class fraction, weighted mean and biased weighted variance under the
// given memberships, plus the population variance of the whole signal.
// Classes whose column sums to zero come back flagged undefined.
ClassStats class_stats(const SampleSet& x, const MembershipMatrix& a);

}  // namespace classgain
