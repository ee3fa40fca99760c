#include "classgain/gain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace classgain {

namespace {

constexpr double kLn2 = 0.6931471805599453;

double entropy_unchecked(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

}  // namespace

double variance_floor(double variance_x) {
    return 1e-12 * std::max(variance_x, 1.0);
}

double gaussian_distortion(double sigma2, double rate_bits) {
    if (sigma2 < 0.0) throw validation_error("variance must be nonnegative");
    if (rate_bits < 0.0) throw validation_error("rate must be nonnegative");
    return sigma2 * std::exp2(-2.0 * rate_bits);
}

double entropy_bits(std::span<const double> p) {
    double total = 0.0;
    for (double v : p) {
        if (v < -1e-12) throw validation_error("probabilities must be nonnegative");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-6) {
        throw validation_error("probabilities must sum to 1");
    }
    return entropy_unchecked(p);
}

RateAllocation optimal_rate_allocation(const ClassStats& stats, double total_rate) {
    const std::size_t j = stats.num_classes();
    std::vector<double> p(j), sigma2(j);
    double sigma_max = 0.0;
    double sigma_min_positive = std::numeric_limits<double>::infinity();
    bool any_positive = false;
    for (std::size_t i = 0; i < j; ++i) {
        p[i] = stats.defined[i] ? stats.p[i] : 0.0;
        sigma2[i] = stats.defined[i] ? stats.variance[i] : 0.0;
        if (p[i] > 0.0 && sigma2[i] > 0.0) {
            any_positive = true;
            sigma_max = std::max(sigma_max, sigma2[i]);
            sigma_min_positive = std::min(sigma_min_positive, sigma2[i]);
        }
    }
    if (!any_positive) throw numerical_error("all class variances are zero");

    const double entropy = entropy_unchecked(p);
    const double target = total_rate - entropy;
    if (!(target > 0.0)) {
        throw validation_error("total rate must exceed the membership entropy");
    }

    const auto allocated = [&](double lambda) {
        double sum = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            if (p[i] <= 0.0 || sigma2[i] <= 0.0) continue;
            const double r = 0.5 * std::log2(sigma2[i] / lambda);
            if (r > 0.0) sum += p[i] * r;
        }
        return sum;
    };

    // sum_i p_i R_i is continuous and nonincreasing in lambda: zero at
    // lambda = max sigma_i^2 and at least J*R at the lower bracket end.
    double log_lo = std::log2(sigma_min_positive) -
                    2.0 * total_rate * static_cast<double>(std::max<std::size_t>(j, 1));
    double log_hi = std::log2(sigma_max);
    for (int iter = 0; iter < 200 && (log_hi - log_lo) > 1e-12; ++iter) {
        const double mid = 0.5 * (log_lo + log_hi);
        if (allocated(std::exp2(mid)) > target) {
            log_lo = mid;
        } else {
            log_hi = mid;
        }
    }

    RateAllocation result;
    result.lambda = std::exp2(0.5 * (log_lo + log_hi));
    result.total_rate = total_rate;
    result.entropy = entropy;
    result.rate.assign(j, 0.0);
    for (std::size_t i = 0; i < j; ++i) {
        if (sigma2[i] > 0.0) {
            result.rate[i] = std::max(0.5 * std::log2(sigma2[i] / result.lambda), 0.0);
        }
        if (p[i] > 0.0 && result.rate[i] == 0.0) result.low_rate = true;
    }
    return result;
}

ClassifiedDistortion classified_distortion(const ClassStats& stats, double total_rate) {
    const RateAllocation alloc = optimal_rate_allocation(stats, total_rate);
    ClassifiedDistortion result;
    result.low_rate = alloc.low_rate;
    if (!alloc.low_rate) {
        double log_product = 0.0;
        for (std::size_t i = 0; i < stats.num_classes(); ++i) {
            if (stats.defined[i] && stats.p[i] > 0.0) {
                log_product += stats.p[i] * std::log2(stats.variance[i]);
            }
        }
        result.value = std::exp2(log_product - 2.0 * total_rate + 2.0 * alloc.entropy);
    } else {
        double sum = 0.0;
        for (std::size_t i = 0; i < stats.num_classes(); ++i) {
            if (stats.defined[i] && stats.p[i] > 0.0) {
                sum += stats.p[i] * gaussian_distortion(stats.variance[i], alloc.rate[i]);
            }
        }
        result.value = sum;
    }
    return result;
}

double classification_gain(const ClassStats& stats) {
    if (!(stats.variance_x > 0.0)) {
        throw numerical_error("classification gain undefined for a constant signal");
    }
    double log_denominator = 2.0 * entropy_unchecked(stats.p);
    for (std::size_t i = 0; i < stats.num_classes(); ++i) {
        if (!stats.defined[i] || stats.p[i] <= 0.0) continue;
        if (stats.variance[i] == 0.0) return std::numeric_limits<double>::infinity();
        log_denominator += stats.p[i] * std::log2(stats.variance[i]);
    }
    return std::exp2(std::log2(stats.variance_x) - log_denominator);
}

double classification_gain(const SampleSet& x, const MembershipMatrix& a) {
    return classification_gain(class_stats(x, a));
}

double log_objective(const SampleSet& x, const MembershipMatrix& a) {
    if (a.rows() != x.size()) throw validation_error("membership rows must match samples");
    ObjectiveContext ctx(x);
    return ctx.value(a.entries(), a.cols());
}

std::vector<double> grad_log_objective(const SampleSet& x, const MembershipMatrix& a) {
    if (a.rows() != x.size()) throw validation_error("membership rows must match samples");
    ObjectiveContext ctx(x);
    std::vector<double> grad(a.rows() * a.cols());
    ctx.gradient(a.entries(), a.cols(), grad);
    return grad;
}

ObjectiveContext::ObjectiveContext(const SampleSet& x) : values_(&x.values()) {
    const auto& v = *values_;
    double mean = 0.0;
    for (double s : v) mean += s;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double s : v) var += (s - mean) * (s - mean);
    var /= static_cast<double>(v.size());
    mean_x_ = mean;
    variance_x_ = var;
    floor_ = variance_floor(var);
}

double ObjectiveContext::value(std::span<const double> a, std::size_t j) const {
    const auto& x = *values_;
    const std::size_t n = x.size();
    std::vector<double> s(j, 0.0), m(j, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double* row = a.data() + k * j;
        for (std::size_t i = 0; i < j; ++i) {
            s[i] += row[i];
            m[i] += row[i] * x[k];
        }
    }
    std::vector<double> mu(j, 0.0), q(j, 0.0);
    for (std::size_t i = 0; i < j; ++i) {
        if (s[i] > 0.0) mu[i] = m[i] / s[i];
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double* row = a.data() + k * j;
        for (std::size_t i = 0; i < j; ++i) {
            const double d = x[k] - mu[i];
            q[i] += row[i] * d * d;
        }
    }
    double f = 0.0;
    for (std::size_t i = 0; i < j; ++i) {
        if (s[i] <= 0.0) continue;
        const double p = s[i] / static_cast<double>(n);
        const double sigma2 = std::max(q[i] / s[i], floor_);
        f += p * std::log2(sigma2) - 2.0 * p * std::log2(p);
    }
    return f;
}

void ObjectiveContext::gradient(std::span<const double> a, std::size_t j,
                                std::span<double> grad_out) const {
    const auto& x = *values_;
    const std::size_t n = x.size();
    std::vector<double> s(j, 0.0), m(j, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double* row = a.data() + k * j;
        for (std::size_t i = 0; i < j; ++i) {
            s[i] += row[i];
            m[i] += row[i] * x[k];
        }
    }
    std::vector<double> mu(j, 0.0), q(j, 0.0);
    for (std::size_t i = 0; i < j; ++i) {
        if (s[i] > 0.0) mu[i] = m[i] / s[i];
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double* row = a.data() + k * j;
        for (std::size_t i = 0; i < j; ++i) {
            const double d = x[k] - mu[i];
            q[i] += row[i] * d * d;
        }
    }

    // dF/da_{ni} = (1/N) [ log2(sig~2_i) + ((x_n - mu_i)^2 - sig2_i) / (sig~2_i ln2)
    //                      - 2 log2(p_i) - 2/ln2 ]
    // where sig~2 is the floored variance (the floor also caps the log slope).
    std::vector<double> base(j, 0.0), inv_sigma(j, 0.0), sigma2(j, 0.0);
    std::vector<bool> live(j, false);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < j; ++i) {
        if (s[i] <= 0.0) continue;
        live[i] = true;
        const double p = s[i] * inv_n;
        sigma2[i] = q[i] / s[i];
        const double floored = std::max(sigma2[i], floor_);
        base[i] = std::log2(floored) - 2.0 * std::log2(p) - 2.0 / kLn2;
        inv_sigma[i] = 1.0 / (floored * kLn2);
    }
    for (std::size_t k = 0; k < n; ++k) {
        double* g = grad_out.data() + k * j;
        for (std::size_t i = 0; i < j; ++i) {
            if (!live[i]) {
                g[i] = 0.0;
                continue;
            }
            const double d = x[k] - mu[i];
            g[i] = inv_n * (base[i] + (d * d - sigma2[i]) * inv_sigma[i]);
        }
    }
}

ClassStats ObjectiveContext::stats(std::span<const double> a, std::size_t j) const {
    // Thin wrapper so solver internals and the public API agree exactly.
    const std::size_t n = values_->size();
    MembershipMatrix matrix(std::vector<double>(a.begin(), a.end()), n, j);
    SampleSet x(*values_);
    return class_stats(x, matrix);
}

}  // namespace classgain
