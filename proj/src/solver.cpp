#include "classgain/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "classgain/rng.hpp"

namespace classgain {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Sorted empirical quantile centers at (j + 0.5)/J.
std::vector<double> quantile_centers(const SampleSet& x, std::size_t j) {
    std::vector<double> sorted = x.values();
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> centers(j);
    const std::size_t n = sorted.size();
    for (std::size_t c = 0; c < j; ++c) {
        const double q = (static_cast<double>(c) + 0.5) / static_cast<double>(j);
        const auto idx = static_cast<std::size_t>(q * static_cast<double>(n));
        centers[c] = sorted[std::min(idx, n - 1)];
    }
    return centers;
}

void init_quantile_seeded(const SampleSet& x, std::size_t j, std::vector<double>& a) {
    const auto centers = quantile_centers(x, j);
    const std::size_t n = x.size();
    const double minor = (j > 1) ? 0.2 / static_cast<double>(j - 1) : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t nearest = 0;
        double best = std::abs(x[k] - centers[0]);
        for (std::size_t c = 1; c < j; ++c) {
            const double d = std::abs(x[k] - centers[c]);
            if (d < best) {
                best = d;
                nearest = c;
            }
        }
        for (std::size_t c = 0; c < j; ++c) {
            a[k * j + c] = (c == nearest) ? (j > 1 ? 0.8 : 1.0) : minor;
        }
    }
}

void init_dirichlet(Rng& rng, std::size_t n, std::size_t j, std::vector<double>& a) {
    for (std::size_t k = 0; k < n; ++k) {
        rng.dirichlet_row({a.data() + k * j, j});
    }
}

struct RestartResult {
    std::vector<double> membership;
    RestartTrace trace;
};

// Running per-class sums sum(a), sum(a x), sum(a x^2) for O(J) objective
// deltas under single-row moves.
struct ColumnAggregates {
    std::vector<double> s, m, t;

    void build(std::span<const double> a, const std::vector<double>& x, std::size_t j) {
        s.assign(j, 0.0);
        m.assign(j, 0.0);
        t.assign(j, 0.0);
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double* row = a.data() + k * j;
            for (std::size_t i = 0; i < j; ++i) {
                s[i] += row[i];
                m[i] += row[i] * x[k];
                t[i] += row[i] * x[k] * x[k];
            }
        }
    }

    double objective(std::size_t n, double floor) const {
        double f = 0.0;
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] <= 0.0) continue;
            const double p = s[i] * inv_n;
            const double mu = m[i] / s[i];
            const double sigma2 = std::max(std::max(t[i] / s[i] - mu * mu, 0.0), floor);
            f += p * std::log2(sigma2) - 2.0 * p * std::log2(p);
        }
        return f;
    }
};

// Best-improvement sweeps of single-row moves to a pure class. The
// synchronized projected step can stall on a vertex where its largest
// component flip is harmful while another row's flip still lowers F; these
// block-coordinate steps clear exactly that situation. Returns the number of
// accepted moves.
int polish_rows(std::vector<double>& a, const std::vector<double>& x, std::size_t j,
                double floor, int max_moves) {
    const std::size_t n = x.size();
    ColumnAggregates agg;
    agg.build(a, x, j);
    double current = agg.objective(n, floor);

    int moves = 0;
    ColumnAggregates probe;
    while (moves < max_moves) {
        double best_f = current;
        std::size_t best_row = n;
        std::size_t best_class = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double* row = a.data() + k * j;
            for (std::size_t d = 0; d < j; ++d) {
                if (row[d] == 1.0) continue;
                probe = agg;
                for (std::size_t i = 0; i < j; ++i) {
                    probe.s[i] -= row[i];
                    probe.m[i] -= row[i] * x[k];
                    probe.t[i] -= row[i] * x[k] * x[k];
                }
                probe.s[d] += 1.0;
                probe.m[d] += x[k];
                probe.t[d] += x[k] * x[k];
                const double f = probe.objective(n, floor);
                // Strict-improvement margin: keeps the sweep monotone under the
                // exact two-pass objective despite aggregate rounding.
                if (f < best_f - 1e-10 * std::max(1.0, std::abs(best_f))) {
                    best_f = f;
                    best_row = k;
                    best_class = d;
                }
            }
        }
        if (best_row == n) break;
        double* row = a.data() + best_row * j;
        for (std::size_t i = 0; i < j; ++i) {
            agg.s[i] -= row[i];
            agg.m[i] -= row[i] * x[best_row];
            agg.t[i] -= row[i] * x[best_row] * x[best_row];
            row[i] = 0.0;
        }
        row[best_class] = 1.0;
        agg.s[best_class] += 1.0;
        agg.m[best_class] += x[best_row];
        agg.t[best_class] += x[best_row] * x[best_row];
        current = best_f;
        ++moves;
    }
    return moves;
}

RestartResult run_restart(const ObjectiveContext& ctx, const SampleSet& x, std::size_t j,
                          const SolverConfig& cfg, int restart_index) {
    const std::size_t n = x.size();
    RestartResult result;
    result.trace.index = restart_index;
    std::vector<double>& a = result.membership;
    a.assign(n * j, 0.0);

    InitStrategy strategy = cfg.init;
    if (strategy == InitStrategy::Auto) {
        strategy = (restart_index == 0) ? InitStrategy::QuantileSeeded
                                        : InitStrategy::DirichletRandom;
    }
    switch (strategy) {
        case InitStrategy::QuantileSeeded:
            init_quantile_seeded(x, j, a);
            break;
        case InitStrategy::Uniform:
            std::fill(a.begin(), a.end(), 1.0 / static_cast<double>(j));
            break;
        case InitStrategy::DirichletRandom:
        default: {
            Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(restart_index));
            init_dirichlet(rng, n, j, a);
            break;
        }
    }

    double f = ctx.value(a, j);
    if (!std::isfinite(f)) {
        result.trace.failed = true;
        result.trace.diagnostic = "non-finite objective at initialization";
        result.trace.final_objective = f;
        return result;
    }
    if (cfg.record_trajectory) result.trace.trajectory.emplace_back(0, f);

    std::vector<double> grad(n * j), candidate(n * j);
    double step = cfg.step_init;
    int iter = 0;
    bool stationary = false;
    while (iter < cfg.max_iters && !stationary) {
        // Projected-gradient phase with Armijo backtracking.
        bool phase_stopped = false;
        for (; iter < cfg.max_iters && !phase_stopped; ++iter) {
            ctx.gradient(a, j, grad);

            double f_new = f;
            double directional = 0.0;
            double max_change = 0.0;
            bool accepted = false;
            while (step > 1e-18) {
                for (std::size_t k = 0; k < n; ++k) {
                    double* row = candidate.data() + k * j;
                    for (std::size_t i = 0; i < j; ++i) {
                        row[i] = a[k * j + i] - step * grad[k * j + i];
                    }
                    project_row_to_simplex_inplace({row, j});
                }
                directional = 0.0;
                max_change = 0.0;
                for (std::size_t idx = 0; idx < n * j; ++idx) {
                    const double d = candidate[idx] - a[idx];
                    directional += grad[idx] * d;
                    max_change = std::max(max_change, std::abs(d));
                }
                f_new = ctx.value(candidate, j);
                if (!std::isfinite(f_new)) {
                    result.trace.failed = true;
                    result.trace.diagnostic =
                        "non-finite objective at iteration " + std::to_string(iter);
                    break;
                }
                if (f_new <= f + cfg.armijo_c * directional) {
                    accepted = true;
                    break;
                }
                step *= cfg.step_shrink;
            }
            if (result.trace.failed) break;
            if (!accepted) {
                phase_stopped = true;  // no feasible descent step left
                break;
            }

            a.swap(candidate);
            const double decrease = f - f_new;
            f = f_new;
            if (cfg.record_trajectory) result.trace.trajectory.emplace_back(iter + 1, f);
            // Growth cap keeps projection inputs small enough that per-entry
            // rounding stays far inside the row-sum tolerance.
            step = std::min(step * 2.0, 1e6);

            if (decrease <= cfg.tol_obj * std::max(1.0, std::abs(f)) ||
                max_change <= cfg.tol_step) {
                phase_stopped = true;
            }
        }
        if (result.trace.failed) break;
        if (iter >= cfg.max_iters) break;  // budget exhausted, not converged

        // The synchronized step can stall on a vertex whose best joint move is
        // harmful while a single-row move still descends; sweep those before
        // declaring the restart done.
        const int moves = polish_rows(a, x.values(), j, ctx.floor(), cfg.max_iters - iter);
        if (moves == 0) {
            stationary = true;
            result.trace.converged = true;
        } else {
            iter += moves;
            f = ctx.value(a, j);
            step = std::max(step, cfg.step_init);
            if (cfg.record_trajectory) result.trace.trajectory.emplace_back(iter, f);
            if (iter >= cfg.max_iters) break;
        }
    }

    result.trace.iterations = iter;
    result.trace.final_objective = f;
    return result;
}

}  // namespace

void SolverConfig::validate() const {
    if (max_iters < 1) throw validation_error("max_iters must be positive");
    if (!(step_init > 0.0)) throw validation_error("step_init must be positive");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw validation_error("armijo_c must be in (0,1)");
    if (!(step_shrink > 0.0 && step_shrink < 1.0)) {
        throw validation_error("step_shrink must be in (0,1)");
    }
    if (!(tol_obj > 0.0) || !(tol_step > 0.0)) {
        throw validation_error("tolerances must be positive");
    }
    if (restarts < 1) throw validation_error("restarts must be at least 1");
}

std::vector<double> project_row_to_simplex(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    project_row_to_simplex_inplace(out);
    return out;
}

void project_row_to_simplex_inplace(std::span<double> v) {
    const std::size_t j = v.size();
    if (j == 0) throw validation_error("cannot project an empty vector");
    for (double s : v) {
        if (!std::isfinite(s)) throw validation_error("projection input must be finite");
    }
    if (j == 1) {
        v[0] = 1.0;
        return;
    }
    // Sort-and-threshold: theta is the largest shift keeping rho entries positive.
    static thread_local std::vector<double> sorted;
    sorted.assign(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < j; ++k) {
        cumulative += sorted[k];
        const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (sorted[k] - t > 0.0) {
            theta = t;
        } else {
            break;
        }
    }
    for (auto& s : v) s = std::min(std::max(s - theta, 0.0), 1.0);
}

SolveReport solve_relaxation(const SampleSet& x, std::size_t j, const SolverConfig& cfg) {
    cfg.validate();
    if (j < 1) throw validation_error("need at least one class");
    const auto start = Clock::now();
    const std::size_t n = x.size();

    // All samples equal: every membership yields the same (floored) objective.
    if (x.value_range() == 0.0) {
        SolveReport report{MembershipMatrix::uniform(n, j)};
        report.degenerate_signal = true;
        report.warnings.push_back("degenerate signal: all samples equal, gain undefined");
        ObjectiveContext ctx(x);
        report.best_objective = ctx.value(report.best_membership.entries(), j);
        report.gain = 0.0;
        report.wall_ms = elapsed_ms(start);
        return report;
    }

    ObjectiveContext ctx(x);

    if (j == 1) {
        SolveReport report{MembershipMatrix::uniform(n, 1)};
        report.best_objective = ctx.value(report.best_membership.entries(), 1);
        report.gain = classification_gain(class_stats(x, report.best_membership));
        RestartTrace trace;
        trace.converged = true;
        trace.final_objective = report.best_objective;
        report.restarts.push_back(std::move(trace));
        report.wall_ms = elapsed_ms(start);
        return report;
    }

    std::vector<RestartResult> results(static_cast<std::size_t>(cfg.restarts));
    const int threads = std::max(1, cfg.threads);
    if (threads == 1 || cfg.restarts == 1) {
        for (int r = 0; r < cfg.restarts; ++r) {
            results[static_cast<std::size_t>(r)] = run_restart(ctx, x, j, cfg, r);
        }
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        const int workers = std::min(threads, cfg.restarts);
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (int r = next.fetch_add(1); r < cfg.restarts; r = next.fetch_add(1)) {
                    results[static_cast<std::size_t>(r)] = run_restart(ctx, x, j, cfg, r);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    int best = -1;
    for (int r = 0; r < cfg.restarts; ++r) {
        const auto& trace = results[static_cast<std::size_t>(r)].trace;
        if (trace.failed) continue;
        if (best < 0 ||
            trace.final_objective <
                results[static_cast<std::size_t>(best)].trace.final_objective) {
            best = r;
        }
    }
    if (best < 0) throw numerical_error("every restart aborted with a non-finite objective");

    auto& winner = results[static_cast<std::size_t>(best)];
    SolveReport report{MembershipMatrix(std::move(winner.membership), n, j)};
    if (n < j) {
        report.warnings.push_back("fewer samples than classes (N < J)");
    }
    report.best_objective = winner.trace.final_objective;
    report.best_restart = best;
    report.gain = classification_gain(class_stats(x, report.best_membership));
    for (auto& res : results) {
        report.iterations_used += static_cast<std::size_t>(res.trace.iterations);
        report.restarts.push_back(std::move(res.trace));
    }
    report.wall_ms = elapsed_ms(start);
    return report;
}

}  // namespace classgain
