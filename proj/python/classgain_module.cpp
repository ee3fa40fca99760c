#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "classgain/baselines.hpp"
#include "classgain/evaluation.hpp"
#include "classgain/gain.hpp"
#include "classgain/model.hpp"
#include "classgain/rounding.hpp"
#include "classgain/solver.hpp"
#include "classgain/version.hpp"

namespace py = pybind11;
using namespace classgain;

namespace {

SampleSet samples_from_array(const py::array_t<double, py::array::c_style>& x) {
    const auto buf = x.request();
    std::vector<double> values(static_cast<const double*>(buf.ptr),
                               static_cast<const double*>(buf.ptr) + buf.size);
    if (buf.ndim == 2) {
        return SampleSet(std::move(values),
                         SignalShape::grid(static_cast<std::size_t>(buf.shape[0]),
                                           static_cast<std::size_t>(buf.shape[1])));
    }
    if (buf.ndim != 1) throw validation_error("signal must be a 1-d or 2-d array");
    return SampleSet(std::move(values));
}

MembershipMatrix membership_from_array(
    const py::array_t<double, py::array::c_style>& a) {
    const auto buf = a.request();
    if (buf.ndim != 2) throw validation_error("memberships must be an N x J array");
    std::vector<double> entries(static_cast<const double*>(buf.ptr),
                                static_cast<const double*>(buf.ptr) + buf.size);
    return MembershipMatrix(std::move(entries), static_cast<std::size_t>(buf.shape[0]),
                            static_cast<std::size_t>(buf.shape[1]));
}

ClassificationScheme scheme_from_array(const py::array_t<int, py::array::c_style>& z,
                                       std::size_t num_classes) {
    const auto buf = z.request();
    if (buf.ndim != 1) throw validation_error("labels must be a 1-d array");
    std::vector<int> labels(static_cast<const int*>(buf.ptr),
                            static_cast<const int*>(buf.ptr) + buf.size);
    std::size_t j = num_classes;
    if (j == 0) {
        int max_label = 0;
        for (int v : labels) max_label = std::max(max_label, v);
        j = static_cast<std::size_t>(max_label) + 1;
    }
    return ClassificationScheme(std::move(labels), j);
}

py::array_t<int> scheme_to_array(const ClassificationScheme& scheme) {
    py::array_t<int> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(scheme.size())});
    auto buf = out.mutable_unchecked<1>();
    for (std::size_t k = 0; k < scheme.size(); ++k) {
        buf(static_cast<py::ssize_t>(k)) = scheme[k];
    }
    return out;
}

py::array_t<double> matrix_to_array(const std::vector<double>& entries, std::size_t rows,
                                    std::size_t cols) {
    py::array_t<double> out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
    auto buf = out.mutable_unchecked<2>();
    for (std::size_t n = 0; n < rows; ++n) {
        for (std::size_t i = 0; i < cols; ++i) {
            buf(static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(i)) =
                entries[n * cols + i];
        }
    }
    return out;
}

MixtureSpec spec_from_python(const std::vector<std::tuple<double, double, double>>& components,
                             const std::optional<std::vector<std::pair<int, std::size_t>>>& blocks,
                             std::uint64_t seed) {
    MixtureSpec spec;
    for (const auto& [mean, variance, weight] : components) {
        spec.components.push_back({mean, variance, weight});
    }
    if (blocks) {
        BlocksLayout layout;
        for (const auto& [cls, len] : *blocks) {
            layout.runs.push_back({static_cast<std::size_t>(cls), len});
        }
        spec.layout = layout;
    } else {
        spec.layout = IidLayout{};
    }
    spec.seed = seed;
    return spec;
}

ClassStats stats_from_python(const std::vector<double>& p,
                             const std::vector<double>& variances) {
    if (p.size() != variances.size()) {
        throw validation_error("fractions and variances must have equal length");
    }
    ClassStats stats;
    stats.p = p;
    stats.variance = variances;
    stats.mean.assign(p.size(), 0.0);
    stats.defined.assign(p.size(), true);
    stats.n = 1;
    return stats;
}

TypicalityEpsilons eps_from_python(double eps1, double eps2, double eps3) {
    return {eps1, eps2, eps3};
}

}  // namespace

PYBIND11_MODULE(_classgain, m) {
    m.doc() = "blind signal classification by compression gain";
    m.attr("__version__") = kVersion;

    py::register_exception<validation_error>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<numerical_error>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<ClassStats>(m, "ClassStats")
        .def_readonly("p", &ClassStats::p)
        .def_readonly("mean", &ClassStats::mean)
        .def_readonly("variance", &ClassStats::variance)
        .def_readonly("defined", &ClassStats::defined)
        .def_readonly("mean_x", &ClassStats::mean_x)
        .def_readonly("variance_x", &ClassStats::variance_x);

    py::class_<RateAllocation>(m, "RateAllocation")
        .def_readonly("rate", &RateAllocation::rate)
        .def_readonly("water_level", &RateAllocation::lambda)
        .def_readonly("total_rate", &RateAllocation::total_rate)
        .def_readonly("entropy", &RateAllocation::entropy)
        .def_readonly("low_rate", &RateAllocation::low_rate);

    py::class_<TypicalityCheck>(m, "TypicalityCheck")
        .def_readonly("typical", &TypicalityCheck::typical)
        .def_readonly("count_ok", &TypicalityCheck::count_ok)
        .def_readonly("sum_ok", &TypicalityCheck::sum_ok)
        .def_readonly("square_ok", &TypicalityCheck::square_ok)
        .def_readonly("count_residual", &TypicalityCheck::count_residual)
        .def_readonly("sum_residual", &TypicalityCheck::sum_residual)
        .def_readonly("square_residual", &TypicalityCheck::square_residual)
        .def_readonly("skipped_classes", &TypicalityCheck::skipped_classes);

    py::class_<SolveReport>(m, "SolveReport")
        .def_property_readonly("best_membership",
                               [](const SolveReport& r) {
                                   return matrix_to_array(r.best_membership.entries(),
                                                          r.best_membership.rows(),
                                                          r.best_membership.cols());
                               })
        .def_readonly("best_objective", &SolveReport::best_objective)
        .def_readonly("gain", &SolveReport::gain)
        .def_readonly("best_restart", &SolveReport::best_restart)
        .def_readonly("iterations_used", &SolveReport::iterations_used)
        .def_readonly("wall_ms", &SolveReport::wall_ms)
        .def_readonly("degenerate_signal", &SolveReport::degenerate_signal)
        .def_property_readonly("converged", [](const SolveReport& r) {
            std::vector<bool> flags;
            flags.reserve(r.restarts.size());
            for (const auto& t : r.restarts) flags.push_back(t.converged);
            return flags;
        });

    py::class_<RoundingReport>(m, "RoundingReport")
        .def_property_readonly(
            "labels", [](const RoundingReport& r) { return scheme_to_array(r.scheme); })
        .def_readonly("hard_objective", &RoundingReport::hard_objective)
        .def_readonly("typicality", &RoundingReport::typicality)
        .def_readonly("trials", &RoundingReport::trials)
        .def_readonly("concentration_bound", &RoundingReport::concentration_bound);

    py::class_<GmmParams>(m, "GmmParams")
        .def_readonly("weight", &GmmParams::weight)
        .def_readonly("mean", &GmmParams::mean)
        .def_readonly("variance", &GmmParams::variance)
        .def_readonly("log_likelihood", &GmmParams::log_likelihood)
        .def_readonly("degenerate", &GmmParams::degenerate);

    py::class_<EvalResult>(m, "EvalResult")
        .def_readonly("truth_count", &EvalResult::truth_count)
        .def_readonly("misclassified", &EvalResult::misclassified)
        .def_readonly("ratio", &EvalResult::ratio)
        .def_readonly("ratio_defined", &EvalResult::ratio_defined)
        .def_readonly("overall_error", &EvalResult::overall_error)
        .def_readonly("permutation", &EvalResult::permutation);

    m.def(
        "generate",
        [](const std::vector<std::tuple<double, double, double>>& components, std::size_t n,
           std::uint64_t seed,
           const std::optional<std::vector<std::pair<int, std::size_t>>>& blocks) {
            auto [x, truth] = classgain::generate(spec_from_python(components, blocks, seed), n);
            py::array_t<double> values(
                std::vector<py::ssize_t>{static_cast<py::ssize_t>(n)});
            auto buf = values.mutable_unchecked<1>();
            for (std::size_t k = 0; k < n; ++k) buf(static_cast<py::ssize_t>(k)) = x[k];
            return py::make_tuple(values, scheme_to_array(truth));
        },
        py::arg("components"), py::arg("n"), py::arg("seed") = 0,
        py::arg("blocks") = py::none(),
        "Draw a mixture signal; components are (mean, variance, weight) triples.");

    m.def(
        "class_stats",
        [](const py::array_t<double, py::array::c_style>& x,
           const py::array_t<double, py::array::c_style>& a) {
            return classgain::class_stats(samples_from_array(x), membership_from_array(a));
        },
        py::arg("x"), py::arg("a"));

    m.def("entropy_bits",
          [](const std::vector<double>& p) { return classgain::entropy_bits(p); },
          py::arg("p"));
    m.def("gaussian_distortion", &classgain::gaussian_distortion, py::arg("sigma2"),
          py::arg("rate"));
    m.def(
        "optimal_rate_allocation",
        [](const std::vector<double>& p, const std::vector<double>& variances, double rate) {
            return classgain::optimal_rate_allocation(stats_from_python(p, variances), rate);
        },
        py::arg("p"), py::arg("variances"), py::arg("rate"));
    m.def(
        "classified_distortion",
        [](const std::vector<double>& p, const std::vector<double>& variances, double rate) {
            const auto d =
                classgain::classified_distortion(stats_from_python(p, variances), rate);
            return py::make_tuple(d.value, d.low_rate);
        },
        py::arg("p"), py::arg("variances"), py::arg("rate"));

    m.def(
        "classification_gain",
        [](const py::array_t<double, py::array::c_style>& x,
           const py::array_t<double, py::array::c_style>& a) {
            return classgain::classification_gain(samples_from_array(x),
                                                  membership_from_array(a));
        },
        py::arg("x"), py::arg("a"));
    m.def(
        "log_objective",
        [](const py::array_t<double, py::array::c_style>& x,
           const py::array_t<double, py::array::c_style>& a) {
            return classgain::log_objective(samples_from_array(x), membership_from_array(a));
        },
        py::arg("x"), py::arg("a"));
    m.def(
        "grad_log_objective",
        [](const py::array_t<double, py::array::c_style>& x,
           const py::array_t<double, py::array::c_style>& a) {
            const auto matrix = membership_from_array(a);
            const auto grad =
                classgain::grad_log_objective(samples_from_array(x), matrix);
            return matrix_to_array(grad, matrix.rows(), matrix.cols());
        },
        py::arg("x"), py::arg("a"));

    m.def(
        "project_row_to_simplex",
        [](const std::vector<double>& v) { return classgain::project_row_to_simplex(v); },
        py::arg("v"));

    m.def(
        "solve_relaxation",
        [](const py::array_t<double, py::array::c_style>& x, std::size_t num_classes,
           int max_iters, int restarts, std::uint64_t seed, const std::string& init,
           int threads) {
            SolverConfig cfg;
            cfg.max_iters = max_iters;
            cfg.restarts = restarts;
            cfg.seed = seed;
            cfg.threads = threads;
            if (init == "auto") {
                cfg.init = InitStrategy::Auto;
            } else if (init == "dirichlet") {
                cfg.init = InitStrategy::DirichletRandom;
            } else if (init == "quantile") {
                cfg.init = InitStrategy::QuantileSeeded;
            } else if (init == "uniform") {
                cfg.init = InitStrategy::Uniform;
            } else {
                throw validation_error("init must be auto|dirichlet|quantile|uniform");
            }
            return classgain::solve_relaxation(samples_from_array(x), num_classes, cfg);
        },
        py::arg("x"), py::arg("num_classes"), py::arg("max_iters") = 2000,
        py::arg("restarts") = 8, py::arg("seed") = 0, py::arg("init") = "auto",
        py::arg("threads") = 1);

    m.def(
        "random_round",
        [](const py::array_t<double, py::array::c_style>& a, std::uint64_t seed) {
            return scheme_to_array(classgain::random_round(membership_from_array(a), seed));
        },
        py::arg("a"), py::arg("seed") = 0);

    m.def(
        "is_typical",
        [](const py::array_t<int, py::array::c_style>& z,
           const py::array_t<double, py::array::c_style>& a,
           const py::array_t<double, py::array::c_style>& x, double eps1, double eps2,
           double eps3) {
            const auto matrix = membership_from_array(a);
            return classgain::is_typical(scheme_from_array(z, matrix.cols()), matrix,
                                         samples_from_array(x),
                                         eps_from_python(eps1, eps2, eps3));
        },
        py::arg("z"), py::arg("a"), py::arg("x"), py::arg("eps1"), py::arg("eps2"),
        py::arg("eps3"));

    m.def(
        "azuma_bound",
        [](std::size_t n, std::size_t num_classes, double value_range, double eps1,
           double eps2, double eps3) {
            return classgain::azuma_bound(n, num_classes, value_range,
                                          eps_from_python(eps1, eps2, eps3));
        },
        py::arg("n"), py::arg("num_classes"), py::arg("value_range"), py::arg("eps1"),
        py::arg("eps2"), py::arg("eps3"));

    m.def(
        "round_best_of_k",
        [](const py::array_t<double, py::array::c_style>& a,
           const py::array_t<double, py::array::c_style>& x, int k, std::uint64_t seed) {
            return classgain::round_best_of_k(membership_from_array(a),
                                              samples_from_array(x), k, seed);
        },
        py::arg("a"), py::arg("x"), py::arg("k") = 32, py::arg("seed") = 0);

    m.def(
        "kmeans",
        [](const py::array_t<double, py::array::c_style>& x, std::size_t num_classes,
           std::uint64_t seed, int max_iters) {
            const auto result =
                classgain::kmeans(samples_from_array(x), num_classes, seed, max_iters);
            return py::make_tuple(scheme_to_array(result.labels), result.centers,
                                  result.wcss, result.iterations);
        },
        py::arg("x"), py::arg("num_classes"), py::arg("seed") = 0,
        py::arg("max_iters") = 100,
        "Returns (labels, centers, wcss, iterations).");

    m.def(
        "em_gmm",
        [](const py::array_t<double, py::array::c_style>& x, std::size_t num_classes,
           std::uint64_t seed, int max_iters, double tol) {
            auto result =
                classgain::em_gmm(samples_from_array(x), num_classes, seed, max_iters, tol);
            return py::make_tuple(result.params,
                                  matrix_to_array(result.responsibilities.entries(),
                                                  result.responsibilities.rows(),
                                                  result.responsibilities.cols()),
                                  scheme_to_array(result.labels),
                                  result.log_likelihood_trace);
        },
        py::arg("x"), py::arg("num_classes"), py::arg("seed") = 0,
        py::arg("max_iters") = 200, py::arg("tol") = 1e-8,
        "Returns (params, responsibilities, labels, log_likelihood_trace).");

    m.def(
        "brute_force_integer",
        [](const py::array_t<double, py::array::c_style>& x, std::size_t num_classes) {
            auto result = classgain::brute_force_integer(samples_from_array(x), num_classes);
            return py::make_tuple(scheme_to_array(result.labels), result.objective);
        },
        py::arg("x"), py::arg("num_classes"));

    m.def(
        "false_classification_ratios",
        [](const py::array_t<int, py::array::c_style>& estimated,
           const py::array_t<int, py::array::c_style>& truth, std::size_t num_classes) {
            const auto truth_scheme = scheme_from_array(truth, num_classes);
            return classgain::false_classification_ratios(
                scheme_from_array(estimated, truth_scheme.num_classes()), truth_scheme);
        },
        py::arg("estimated"), py::arg("truth"), py::arg("num_classes") = 0);
}
