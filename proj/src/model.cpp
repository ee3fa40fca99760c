#include "classgain/model.hpp"

#include <cmath>
#include <limits>

#include "classgain/rng.hpp"

namespace classgain {

std::pair<SampleSet, ClassificationScheme> generate(const MixtureSpec& spec, std::size_t n) {
    spec.validate(n);
    Rng rng(spec.seed);

    std::vector<int> labels(n);
    if (spec.is_blocks()) {
        std::size_t pos = 0;
        for (const auto& run : std::get<BlocksLayout>(spec.layout).runs) {
            for (std::size_t k = 0; k < run.length; ++k) {
                labels[pos++] = static_cast<int>(run.class_index);
            }
        }
    } else {
        std::vector<double> weights;
        weights.reserve(spec.components.size());
        for (const auto& c : spec.components) weights.push_back(c.weight);
        for (std::size_t k = 0; k < n; ++k) {
            labels[k] = static_cast<int>(rng.categorical(weights));
        }
    }

    std::vector<double> values(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& c = spec.components[static_cast<std::size_t>(labels[k])];
        values[k] = rng.normal(c.mean, std::sqrt(c.variance));
    }

    return {SampleSet(std::move(values)),
            ClassificationScheme(std::move(labels), spec.num_classes())};
}

ClassStats class_stats(const SampleSet& x, const MembershipMatrix& a) {
    const std::size_t n = x.size();
    const std::size_t j = a.cols();
    if (a.rows() != n) throw validation_error("membership rows must match sample count");

    ClassStats stats;
    stats.n = n;
    stats.p.assign(j, 0.0);
    stats.mean.assign(j, 0.0);
    stats.variance.assign(j, 0.0);
    stats.defined.assign(j, true);

    std::vector<double> weight_sum(j, 0.0);
    std::vector<double> weighted_x(j, 0.0);
    const auto& entries = a.entries();
    const auto& values = x.values();

    for (std::size_t k = 0; k < n; ++k) {
        const double v = values[k];
        const double* row = entries.data() + k * j;
        for (std::size_t i = 0; i < j; ++i) {
            weight_sum[i] += row[i];
            weighted_x[i] += row[i] * v;
        }
    }

    for (std::size_t i = 0; i < j; ++i) {
        stats.p[i] = weight_sum[i] / static_cast<double>(n);
        if (weight_sum[i] > 0.0) {
            stats.mean[i] = weighted_x[i] / weight_sum[i];
        } else {
            stats.defined[i] = false;
            stats.mean[i] = std::numeric_limits<double>::quiet_NaN();
            stats.variance[i] = std::numeric_limits<double>::quiet_NaN();
        }
    }

    std::vector<double> weighted_sq(j, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double v = values[k];
        const double* row = entries.data() + k * j;
        for (std::size_t i = 0; i < j; ++i) {
            if (row[i] != 0.0 && stats.defined[i]) {
                const double d = v - stats.mean[i];
                weighted_sq[i] += row[i] * d * d;
            }
        }
    }
    for (std::size_t i = 0; i < j; ++i) {
        if (stats.defined[i]) stats.variance[i] = weighted_sq[i] / weight_sum[i];
    }

    double mean_x = 0.0;
    for (double v : values) mean_x += v;
    mean_x /= static_cast<double>(n);
    double var_x = 0.0;
    for (double v : values) var_x += (v - mean_x) * (v - mean_x);
    var_x /= static_cast<double>(n);
    stats.mean_x = mean_x;
    stats.variance_x = var_x;
    return stats;
}

}  // namespace classgain
