#include "classgain/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "classgain/gain.hpp"
#include "classgain/model.hpp"
#include "classgain/rng.hpp"

namespace classgain {

namespace {

std::size_t nearest_center(double v, const std::vector<double>& centers) {
    std::size_t best = 0;
    double best_d = std::abs(v - centers[0]);
    for (std::size_t c = 1; c < centers.size(); ++c) {
        const double d = std::abs(v - centers[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

// k-means++ seeding: first center uniform, then squared-distance weighted.
std::vector<double> seed_centers(const std::vector<double>& values, std::size_t j, Rng& rng) {
    const std::size_t n = values.size();
    std::vector<double> centers;
    centers.reserve(j);
    centers.push_back(values[rng.uniform_below(n)]);
    std::vector<double> d2(n);
    while (centers.size() < j) {
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double d = values[k] - centers[nearest_center(values[k], centers)];
            d2[k] = d * d;
            total += d2[k];
        }
        if (total <= 0.0) {
            centers.push_back(values[rng.uniform_below(n)]);
            continue;
        }
        const double u = rng.uniform() * total;
        double acc = 0.0;
        std::size_t pick = n - 1;
        for (std::size_t k = 0; k < n; ++k) {
            acc += d2[k];
            if (u < acc) {
                pick = k;
                break;
            }
        }
        centers.push_back(values[pick]);
    }
    return centers;
}

constexpr double kPi = 3.141592653589793238462643;

double gaussian_log_pdf(double v, double mean, double variance) {
    const double d = v - mean;
    return -0.5 * std::log(2.0 * kPi * variance) - d * d / (2.0 * variance);
}

}  // namespace

KMeansResult kmeans(const SampleSet& x, std::size_t j, std::uint64_t seed, int max_iters) {
    if (j < 1) throw validation_error("need at least one class");
    const auto& values = x.values();
    const std::size_t n = values.size();
    Rng rng(seed);

    std::vector<double> centers = seed_centers(values, j, rng);
    std::vector<int> assign(n, 0);

    int iter = 0;
    bool changed = true;
    for (; iter < max_iters && changed; ++iter) {
        changed = false;
        for (std::size_t k = 0; k < n; ++k) {
            const int c = static_cast<int>(nearest_center(values[k], centers));
            if (c != assign[k]) {
                assign[k] = c;
                changed = true;
            }
        }
        std::vector<double> sums(j, 0.0);
        std::vector<std::size_t> counts(j, 0);
        for (std::size_t k = 0; k < n; ++k) {
            sums[static_cast<std::size_t>(assign[k])] += values[k];
            counts[static_cast<std::size_t>(assign[k])]++;
        }
        for (std::size_t c = 0; c < j; ++c) {
            if (counts[c] > 0) {
                centers[c] = sums[c] / static_cast<double>(counts[c]);
            } else {
                // Re-seed the dead center at the sample farthest from its own
                // center, then recompute assignments next sweep.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double d =
                        std::abs(values[k] - centers[static_cast<std::size_t>(assign[k])]);
                    if (d > far_d) {
                        far_d = d;
                        far = k;
                    }
                }
                centers[c] = values[far];
                changed = true;
            }
        }
    }

    double wcss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = values[k] - centers[static_cast<std::size_t>(assign[k])];
        wcss += d * d;
    }
    return {ClassificationScheme(std::move(assign), j), std::move(centers), wcss, iter};
}

EmResult em_gmm(const SampleSet& x, std::size_t j, std::uint64_t seed, int max_iters,
                double tol) {
    if (j < 1) throw validation_error("need at least one class");
    const auto& values = x.values();
    const std::size_t n = values.size();
    if (n < j) throw validation_error("need at least J samples");

    const double floor = variance_floor([&] {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        return var / static_cast<double>(n);
    }());

    GmmParams params;
    params.weight.assign(j, 1.0 / static_cast<double>(j));
    params.mean.assign(j, 0.0);
    params.variance.assign(j, 0.0);

    if (x.value_range() == 0.0) {
        // Constant signal: a single component explains everything.
        params.degenerate = true;
        params.weight.assign(j, 0.0);
        params.weight[0] = 1.0;
        params.mean.assign(j, values[0]);
        params.variance.assign(j, floor);
        params.log_likelihood = static_cast<double>(n) * gaussian_log_pdf(values[0], values[0], floor);
        MembershipMatrix resp = MembershipMatrix::from_labels(
            ClassificationScheme(std::vector<int>(n, 0), j));
        return {params, resp, resp.hard_labels(), {params.log_likelihood}};
    }

    const KMeansResult km = kmeans(x, j, seed);
    double pooled = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = values[k] - km.centers[static_cast<std::size_t>(km.labels[k])];
        pooled += d * d;
    }
    pooled = std::max(pooled / static_cast<double>(n), floor);
    std::vector<std::size_t> counts(j, 0);
    for (std::size_t k = 0; k < n; ++k) counts[static_cast<std::size_t>(km.labels[k])]++;
    for (std::size_t c = 0; c < j; ++c) {
        params.mean[c] = km.centers[c];
        params.variance[c] = pooled;
        params.weight[c] =
            std::max(static_cast<double>(counts[c]) / static_cast<double>(n), 1e-12);
    }
    double weight_total = 0.0;
    for (double w : params.weight) weight_total += w;
    for (auto& w : params.weight) w /= weight_total;

    std::vector<double> resp(n * j, 0.0);
    std::vector<double> trace;
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iters; ++iter) {
        // E-step in log space.
        double ll = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double row_max = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < j; ++c) {
                double logp = -std::numeric_limits<double>::infinity();
                if (params.weight[c] > 0.0) {
                    logp = std::log(params.weight[c]) +
                           gaussian_log_pdf(values[k], params.mean[c], params.variance[c]);
                }
                resp[k * j + c] = logp;
                row_max = std::max(row_max, logp);
            }
            double denom = 0.0;
            for (std::size_t c = 0; c < j; ++c) {
                denom += std::exp(resp[k * j + c] - row_max);
            }
            const double log_denom = row_max + std::log(denom);
            ll += log_denom;
            for (std::size_t c = 0; c < j; ++c) {
                resp[k * j + c] = std::exp(resp[k * j + c] - log_denom);
            }
        }
        trace.push_back(ll);

        // M-step.
        for (std::size_t c = 0; c < j; ++c) {
            double rsum = 0.0, rx = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                rsum += resp[k * j + c];
                rx += resp[k * j + c] * values[k];
            }
            if (rsum > 0.0) {
                const double mean = rx / rsum;
                double rvar = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double d = values[k] - mean;
                    rvar += resp[k * j + c] * d * d;
                }
                params.mean[c] = mean;
                params.variance[c] = std::max(rvar / rsum, floor);
            }
            params.weight[c] = std::max(rsum / static_cast<double>(n), 0.0);
        }
        double wt = 0.0;
        for (double w : params.weight) wt += w;
        for (auto& w : params.weight) w /= wt;

        if (iter > 0 && ll - prev_ll <= tol * std::max(1.0, std::abs(ll))) {
            prev_ll = ll;
            break;
        }
        prev_ll = ll;
    }
    params.log_likelihood = prev_ll;

    // Final responsibilities under the converged parameters.
    for (std::size_t k = 0; k < n; ++k) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < j; ++c) {
            double logp = -std::numeric_limits<double>::infinity();
            if (params.weight[c] > 0.0) {
                logp = std::log(params.weight[c]) +
                       gaussian_log_pdf(values[k], params.mean[c], params.variance[c]);
            }
            resp[k * j + c] = logp;
            row_max = std::max(row_max, logp);
        }
        double denom = 0.0;
        for (std::size_t c = 0; c < j; ++c) denom += std::exp(resp[k * j + c] - row_max);
        const double log_denom = row_max + std::log(denom);
        for (std::size_t c = 0; c < j; ++c) {
            resp[k * j + c] = std::exp(resp[k * j + c] - log_denom);
        }
    }
    // Normalize rows exactly so the matrix meets the row-sum tolerance.
    for (std::size_t k = 0; k < n; ++k) {
        double sum = 0.0;
        for (std::size_t c = 0; c < j; ++c) sum += resp[k * j + c];
        for (std::size_t c = 0; c < j; ++c) resp[k * j + c] /= sum;
    }

    MembershipMatrix responsibilities(std::move(resp), n, j);
    ClassificationScheme labels = responsibilities.argmax_labels();
    return {std::move(params), std::move(responsibilities), std::move(labels),
            std::move(trace)};
}

BruteForceResult brute_force_integer(const SampleSet& x, std::size_t j) {
    if (j < 1) throw validation_error("need at least one class");
    const std::size_t n = x.size();
    const double total = static_cast<double>(n) * std::log2(static_cast<double>(j));
    if (total > 24.0 + 1e-9) {
        throw validation_error("instance too large for exhaustive search (J^N > 2^24)");
    }

    ObjectiveContext ctx(x);
    std::vector<int> labels(n, 0);
    std::vector<double> hard(n * j, 0.0);
    std::vector<int> best_labels;
    double best_f = std::numeric_limits<double>::infinity();

    // Restricted growth strings: the first sample is always class 0 and each
    // new label may exceed the running maximum by at most one. This visits
    // every assignment once per permutation orbit, in lexicographic order, so
    // keeping the first strict improvement breaks ties lexicographically.
    const auto enumerate = [&](auto&& self, std::size_t depth, int current_max) -> void {
        if (depth == n) {
            std::fill(hard.begin(), hard.end(), 0.0);
            for (std::size_t k = 0; k < n; ++k) {
                hard[k * j + static_cast<std::size_t>(labels[k])] = 1.0;
            }
            const double f = ctx.value(hard, j);
            if (f < best_f) {
                best_f = f;
                best_labels = labels;
            }
            return;
        }
        const int cap = (depth == 0)
                            ? 0
                            : std::min<int>(static_cast<int>(j) - 1, current_max + 1);
        for (int v = 0; v <= cap; ++v) {
            labels[depth] = v;
            self(self, depth + 1, std::max(current_max, v));
        }
    };
    enumerate(enumerate, 0, 0);
    return {ClassificationScheme(std::move(best_labels), j), best_f};
}

}  // namespace classgain
