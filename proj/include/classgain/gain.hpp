#pragma once

#include <span>
#include <vector>

#include "classgain/model.hpp"
#include "classgain/types.hpp"

namespace classgain {

// Variance floor used inside logarithms so the objective stays bounded when a
// class captures identical samples. Scales with the signal's global variance.
double variance_floor(double variance_x);

// Smallest achievable mean-squared error for a memoryless Gaussian source of
// the given variance coded at `rate_bits` bits per sample.
double gaussian_distortion(double sigma2, double rate_bits);

// Base-2 entropy with the 0*log0 = 0 convention.
double entropy_bits(std::span<const double> p);

// Reverse water-filling result: per-class rates at the stored water level.
struct RateAllocation {
    std::vector<double> rate;  // bits/sample per class
    double lambda = 0.0;       // water level, signal units^2
    double total_rate = 0.0;   // R, bits/sample
    double entropy = 0.0;      // H(p), bits
    bool low_rate = false;     // some populated class received zero rate
};

// Finds the water level by bisection so that sum_i p_i R_i = R - H(p).
// Throws validation_error when R <= H(p) and numerical_error when every class
// variance is zero.
RateAllocation optimal_rate_allocation(const ClassStats& stats, double total_rate);

struct ClassifiedDistortion {
    double value = 0.0;
    bool low_rate = false;  // fell back to the per-class sum form
};

// Distortion of the classified encoder at total rate R under the optimal
// allocation. Uses the product closed form in the high-rate regime and the
// explicit sum otherwise.
ClassifiedDistortion classified_distortion(const ClassStats& stats, double total_rate);

// G = sigma_x^2 / (2^{2H} prod_i (sigma_i^2)^{p_i}). Returns +infinity when a
// populated class has zero variance while the signal does not. Throws
// numerical_error for a constant signal (zero global variance).
double classification_gain(const SampleSet& x, const MembershipMatrix& a);
double classification_gain(const ClassStats& stats);

// F(a) = sum_i p_i log2(sigma_i^2) + 2 H(p), the log of the compression
// objective; minimizing F maximizes the classification gain. Variances are
// floored before the log. Empty classes contribute zero.
double log_objective(const SampleSet& x, const MembershipMatrix& a);

// dF/da as an N x J row-major matrix, matching central finite differences on
// interior points. Columns of empty classes are zero by convention.
std::vector<double> grad_log_objective(const SampleSet& x, const MembershipMatrix& a);

// Shared evaluation machinery for the solver: works on raw row-major buffers
// without feasibility checks, so it can also be finite-differenced.
class ObjectiveContext {
public:
    explicit ObjectiveContext(const SampleSet& x);

    std::size_t n() const { return values_->size(); }
    double variance_x() const { return variance_x_; }
    double floor() const { return floor_; }

    double value(std::span<const double> a, std::size_t num_classes) const;
    void gradient(std::span<const double> a, std::size_t num_classes,
                  std::span<double> grad_out) const;
    ClassStats stats(std::span<const double> a, std::size_t num_classes) const;

private:
    const std::vector<double>* values_;
    double mean_x_;
    double variance_x_;
    double floor_;
};

}  // namespace classgain
