#include "classgain/rounding.hpp"

#include <algorithm>
#include <cmath>

#include "classgain/gain.hpp"
#include "classgain/model.hpp"
#include "classgain/rng.hpp"

namespace classgain {

TypicalityEpsilons TypicalityEpsilons::defaults_for(std::size_t n, double value_range) {
    const double base = std::pow(static_cast<double>(n), -1.0 / 3.0);
    // Floor keeps eps2/eps3 positive (no underflow) for degenerate signals.
    const double v = std::max(value_range, 1e-100);
    return {base, base * v, base * v * v};
}

void TypicalityEpsilons::validate() const {
    if (!(eps1 > 0.0 && eps2 > 0.0 && eps3 > 0.0)) {
        throw validation_error("typicality tolerances must be positive");
    }
}

ClassificationScheme random_round(const MembershipMatrix& a_star, std::uint64_t seed) {
    const std::size_t n = a_star.rows();
    const std::size_t j = a_star.cols();
    // Stream 0 of the seed, so a single draw coincides with the first trial
    // of round_best_of_k under the same seed.
    Rng rng = Rng::stream(seed, 0);
    std::vector<int> labels(n);
    for (std::size_t k = 0; k < n; ++k) {
        labels[k] = static_cast<int>(rng.categorical(a_star.row(k)));
    }
    return ClassificationScheme(std::move(labels), j);
}

TypicalityCheck is_typical(const ClassificationScheme& z, const MembershipMatrix& a_star,
                           const SampleSet& x, const TypicalityEpsilons& eps) {
    eps.validate();
    const std::size_t n = x.size();
    const std::size_t j = a_star.cols();
    if (z.size() != n || a_star.rows() != n) {
        throw validation_error("scheme, memberships and samples must share N");
    }
    if (z.num_classes() != j) {
        throw validation_error("scheme and memberships must share the class count");
    }

    const ClassStats relaxed = class_stats(x, a_star);

    std::vector<double> count_diff(j, 0.0), sum_diff(j, 0.0), square_diff(j, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double v = x[k];
        const auto row = a_star.row(k);
        const auto zi = static_cast<std::size_t>(z[k]);
        for (std::size_t i = 0; i < j; ++i) {
            const double hard = (i == zi) ? 1.0 : 0.0;
            const double diff = hard - row[i];
            count_diff[i] += diff;
            sum_diff[i] += diff * v;
            if (relaxed.defined[i]) {
                const double d = v - relaxed.mean[i];
                square_diff[i] += diff * d * d;
            }
        }
    }

    TypicalityCheck check;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < j; ++i) {
        check.count_residual = std::max(check.count_residual, std::abs(count_diff[i]) * inv_n);
        if (relaxed.defined[i]) {
            check.sum_residual = std::max(check.sum_residual, std::abs(sum_diff[i]) * inv_n);
            check.square_residual =
                std::max(check.square_residual, std::abs(square_diff[i]) * inv_n);
        } else {
            check.skipped_classes.push_back(i);
        }
    }
    check.count_ok = check.count_residual <= eps.eps1;
    check.sum_ok = check.sum_residual <= eps.eps2;
    check.square_ok = check.square_residual <= eps.eps3;
    check.typical = check.count_ok && check.sum_ok && check.square_ok;
    return check;
}

double azuma_bound(std::size_t n, std::size_t num_classes, double value_range,
                   const TypicalityEpsilons& eps) {
    eps.validate();
    if (n < 1) throw validation_error("need at least one sample");
    if (!(value_range > 0.0)) throw numerical_error("value range must be positive");
    const double nn = static_cast<double>(n);
    const double jj = static_cast<double>(num_classes);
    const double v2 = value_range * value_range;
    return 2.0 * jj * std::exp(-2.0 * eps.eps1 * eps.eps1 * nn) +
           2.0 * jj * std::exp(-2.0 * eps.eps2 * eps.eps2 * nn / v2) +
           2.0 * jj * std::exp(-2.0 * eps.eps3 * eps.eps3 * nn / (v2 * v2));
}

RoundingReport round_best_of_k(const MembershipMatrix& a_star, const SampleSet& x,
                               int k, std::uint64_t seed, const TypicalityEpsilons& eps) {
    if (k < 1) throw validation_error("need at least one rounding trial");
    eps.validate();

    ObjectiveContext ctx(x);
    const std::size_t j = a_star.cols();

    std::vector<int> best_labels;
    double best_f = 0.0;
    for (int trial = 0; trial < k; ++trial) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(trial));
        std::vector<int> labels(a_star.rows());
        for (std::size_t n = 0; n < a_star.rows(); ++n) {
            labels[n] = static_cast<int>(rng.categorical(a_star.row(n)));
        }
        std::vector<double> hard(a_star.rows() * j, 0.0);
        for (std::size_t n = 0; n < a_star.rows(); ++n) {
            hard[n * j + static_cast<std::size_t>(labels[n])] = 1.0;
        }
        const double f = ctx.value(hard, j);
        if (trial == 0 || f < best_f) {
            best_f = f;
            best_labels = std::move(labels);
        }
    }

    RoundingReport report{ClassificationScheme(std::move(best_labels), j)};
    report.hard_objective = best_f;
    report.trials = k;
    report.epsilons = eps;
    report.typicality = is_typical(report.scheme, a_star, x, eps);
    report.concentration_bound =
        x.value_range() > 0.0 ? azuma_bound(x.size(), j, x.value_range(), eps)
                              : std::numeric_limits<double>::infinity();
    return report;
}

RoundingReport round_best_of_k(const MembershipMatrix& a_star, const SampleSet& x,
                               int k, std::uint64_t seed) {
    return round_best_of_k(a_star, x, k, seed,
                           TypicalityEpsilons::defaults_for(x.size(), x.value_range()));
}

}  // namespace classgain
