// classgain: blind signal classification by compression gain.
//
// Subcommands:
//   gen      draw a synthetic mixture signal plus ground-truth labels
//   classify label a signal (relaxation+rounding, k-means, EM, brute force)
//   eval     score estimated labels against ground truth
//   repro    rerun the built-in benchmark cases and compare reference ratios

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "classgain/baselines.hpp"
#include "classgain/evaluation.hpp"
#include "classgain/gain.hpp"
#include "classgain/io.hpp"
#include "classgain/model.hpp"
#include "classgain/rng.hpp"
#include "classgain/rounding.hpp"
#include "classgain/solver.hpp"
#include "classgain/version.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace classgain;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int default_threads() {
    if (const char* env = std::getenv("CLASSGAIN_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

json shape_json(const SignalShape& shape) {
    json out;
    out["kind"] = shape.is_grid() ? "grid" : "linear";
    if (shape.is_grid()) {
        out["height"] = shape.height();
        out["width"] = shape.width();
    }
    out["size"] = shape.size();
    return out;
}

json eval_json(const EvalResult& eval) {
    json out;
    out["overall_error"] = eval.overall_error;
    out["permutation"] = eval.permutation;
    json classes = json::array();
    for (std::size_t i = 0; i < eval.ratio.size(); ++i) {
        json c;
        c["truth_count"] = eval.truth_count[i];
        c["misclassified"] = eval.misclassified[i];
        if (eval.ratio_defined[i]) {
            c["ratio"] = eval.ratio[i];
        } else {
            c["ratio"] = nullptr;
        }
        classes.push_back(c);
    }
    out["classes"] = classes;
    if (std::isfinite(eval.gain) && eval.gain > 0.0) out["gain"] = eval.gain;
    return out;
}

void write_output(const fs::path& path, const std::string& contents,
                  std::vector<std::pair<std::string, std::string>>& outputs) {
    atomic_write_file(path, contents);
    outputs.emplace_back(path.string(), fnv1a_hex(contents));
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const std::string& input_digest,
                    const std::vector<std::pair<std::string, std::string>>& outputs) {
    json manifest;
    manifest["command"] = command;
    manifest["version"] = kVersion;
    manifest["config"] = config;
    manifest["input_digest"] = input_digest;
    json outs = json::array();
    for (const auto& [path, digest] : outputs) {
        outs.push_back({{"path", path}, {"digest", digest}});
    }
    manifest["outputs"] = outs;
    atomic_write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

struct LoadedSignal {
    SampleSet samples;
    std::string digest;
    bool from_pgm = false;
};

LoadedSignal load_signal(const fs::path& input, const std::string& format) {
    const std::string bytes = read_file(input);
    const std::string digest = fnv1a_hex(bytes);
    std::string kind = format;
    if (kind == "auto") {
        const std::string ext = input.extension().string();
        kind = (ext == ".pgm" || bytes.rfind("P5", 0) == 0) ? "pgm" : "csv";
    }
    try {
        if (kind == "pgm") {
            const PgmImage image = pgm_from_bytes(bytes);
            return {dequantize_pgm(image, PgmScale{0.0, 1.0}), digest, true};
        }
        return {SampleSet(signal_from_csv(bytes)), digest, false};
    } catch (const validation_error& e) {
        // Malformed content in an input file is a data problem, not usage.
        throw data_error(input.string() + ": " + e.what());
    }
}

// --- gen ---------------------------------------------------------------

int cmd_gen(const fs::path& spec_path, const fs::path& out_dir,
            std::optional<std::uint64_t> seed_override) {
    const std::string spec_text = read_file(spec_path);
    GenConfig config = parse_mixture_config(spec_text);
    if (seed_override) config.mixture.seed = *seed_override;

    auto [samples, truth] = generate(config.mixture, config.n);
    const SampleSet shaped = samples.with_shape(config.shape);

    fs::create_directories(out_dir);
    std::vector<std::pair<std::string, std::string>> outputs;
    json config_snapshot;
    config_snapshot["spec"] = mixture_config_to_text(config);
    config_snapshot["seed"] = config.mixture.seed;
    config_snapshot["n"] = config.n;
    config_snapshot["shape"] = shape_json(config.shape);

    if (config.shape.is_grid()) {
        const auto [image, scale] = quantize_to_pgm(shaped);
        write_output(out_dir / "signal.pgm", pgm_to_bytes(image), outputs);
        config_snapshot["pgm_scale"] = {{"offset", scale.offset}, {"step", scale.step}};
    } else {
        write_output(out_dir / "signal.csv", signal_to_csv(shaped.values()), outputs);
    }
    write_output(out_dir / "truth.csv", labels_to_csv(truth), outputs);
    write_manifest(out_dir, "gen", config_snapshot, fnv1a_hex(spec_text), outputs);
    std::cout << "wrote " << outputs.size() + 1 << " files to " << out_dir.string() << "\n";
    return 0;
}

// --- classify ------------------------------------------------------------

struct ClassifyOptions {
    fs::path input;
    fs::path out_dir;
    std::string format = "auto";
    std::string method = "relax";
    std::size_t classes = 2;
    std::uint64_t seed = 0;
    int restarts = 8;
    int round_k = 32;
    double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0;  // 0 = defaults from (N, V)
    int threads = 0;
    std::optional<fs::path> truth;
};

int cmd_classify(const ClassifyOptions& opt) {
    const LoadedSignal loaded = load_signal(opt.input, opt.format);
    const SampleSet& x = loaded.samples;
    const std::size_t j = opt.classes;
    const Method method = method_from_name(opt.method).value();

    json report;
    report["command"] = "classify";
    report["version"] = kVersion;
    report["input"] = {{"path", opt.input.string()},
                       {"digest", loaded.digest},
                       {"n", x.size()},
                       {"shape", shape_json(x.shape())},
                       {"value_range", x.value_range()}};
    report["method"] = opt.method;
    report["classes"] = j;
    report["seed"] = opt.seed;

    const auto t0 = std::chrono::steady_clock::now();
    std::optional<ClassificationScheme> labels;
    switch (method) {
        case Method::Relaxation: {
            SolverConfig solver_cfg;
            solver_cfg.seed = opt.seed;
            solver_cfg.restarts = opt.restarts;
            solver_cfg.threads = opt.threads > 0 ? opt.threads : default_threads();
            SolveReport solved = solve_relaxation(x, j, solver_cfg);
            TypicalityEpsilons eps =
                TypicalityEpsilons::defaults_for(x.size(), x.value_range());
            if (opt.eps1 > 0.0) eps.eps1 = opt.eps1;
            if (opt.eps2 > 0.0) eps.eps2 = opt.eps2;
            if (opt.eps3 > 0.0) eps.eps3 = opt.eps3;
            RoundingReport rounded = round_best_of_k(solved.best_membership, x,
                                                     opt.round_k, Rng::hash(opt.seed ^ 1), eps);
            labels = rounded.scheme;

            int converged = 0;
            for (const auto& r : solved.restarts) converged += r.converged;
            report["solver"] = {{"restarts", opt.restarts},
                                {"converged_restarts", converged},
                                {"iterations", solved.iterations_used},
                                {"relaxed_objective", solved.best_objective},
                                {"degenerate_signal", solved.degenerate_signal},
                                {"wall_ms", solved.wall_ms}};
            report["rounding"] = {
                {"trials", rounded.trials},
                {"hard_objective", rounded.hard_objective},
                {"epsilons", {eps.eps1, eps.eps2, eps.eps3}},
                {"typical", rounded.typicality.typical},
                {"residuals",
                 {rounded.typicality.count_residual, rounded.typicality.sum_residual,
                  rounded.typicality.square_residual}},
                {"concentration_bound", rounded.concentration_bound}};
            break;
        }
        case Method::KMeans:
            labels = kmeans(x, j, opt.seed).labels;
            break;
        case Method::EM:
            labels = em_gmm(x, j, opt.seed).labels;
            break;
        case Method::BruteForce: {
            BruteForceResult brute = brute_force_integer(x, j);
            labels = brute.labels;
            report["brute_force"] = {{"objective", brute.objective}};
            break;
        }
    }
    const double wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();

    const MembershipMatrix hard = labels->to_membership();
    report["result"]["objective"] = log_objective(x, hard);
    try {
        const double gain = classification_gain(x, hard);
        if (std::isfinite(gain)) {
            report["result"]["gain"] = gain;
        } else {
            report["result"]["gain"] = nullptr;
            report["result"]["gain_unbounded"] = true;
        }
    } catch (const numerical_error&) {
        report["result"]["gain"] = nullptr;
    }
    report["result"]["wall_ms"] = wall_ms;

    fs::create_directories(opt.out_dir);
    std::vector<std::pair<std::string, std::string>> outputs;
    write_output(opt.out_dir / "labels.csv", labels_to_csv(*labels), outputs);
    if (x.shape().is_grid()) {
        write_output(opt.out_dir / "labels.pgm",
                     pgm_to_bytes(labels_to_pgm(*labels, x.shape())), outputs);
        write_output(opt.out_dir / "figure.svg", svg_grid_pair(x, *labels), outputs);
    } else {
        write_output(opt.out_dir / "figure.svg", svg_signal_strip(x, *labels), outputs);
    }

    if (opt.truth) {
        const ClassificationScheme truth =
            labels_from_csv(read_file(*opt.truth), j);
        EvalResult eval = false_classification_ratios(*labels, truth);
        report["eval"] = eval_json(eval);
    }

    write_output(opt.out_dir / "report.json", report.dump(2) + "\n", outputs);
    json config_snapshot;
    config_snapshot["method"] = opt.method;
    config_snapshot["classes"] = j;
    config_snapshot["seed"] = opt.seed;
    config_snapshot["restarts"] = opt.restarts;
    config_snapshot["round_k"] = opt.round_k;
    write_manifest(opt.out_dir, "classify", config_snapshot, loaded.digest, outputs);
    std::cout << report["result"].dump(2) << "\n";
    return 0;
}

// --- eval ----------------------------------------------------------------

int cmd_eval(const fs::path& labels_path, const fs::path& truth_path, std::size_t classes,
             std::optional<fs::path> out_dir) {
    const std::string label_bytes = read_file(labels_path);
    const std::string truth_bytes = read_file(truth_path);
    ClassificationScheme truth = labels_from_csv(truth_bytes, classes);
    ClassificationScheme estimated = labels_from_csv(label_bytes, truth.num_classes());
    EvalResult eval = false_classification_ratios(estimated, truth);
    const json out = eval_json(eval);
    std::cout << out.dump(2) << "\n";
    if (out_dir) {
        fs::create_directories(*out_dir);
        std::vector<std::pair<std::string, std::string>> outputs;
        write_output(*out_dir / "eval.json", out.dump(2) + "\n", outputs);
        json config_snapshot;
        config_snapshot["classes"] = truth.num_classes();
        write_manifest(*out_dir, "eval", config_snapshot,
                       fnv1a_hex(label_bytes + truth_bytes), outputs);
    }
    return 0;
}

// --- repro -----------------------------------------------------------------

int cmd_repro(const std::string& case_name, int num_seeds, std::uint64_t base_seed,
              const std::string& method_str, std::optional<fs::path> out_dir, int threads) {
    const auto which = benchmark_from_name(case_name);
    if (!which) {
        std::cerr << "unknown case '" << case_name << "' (one|two|three|twodim)\n";
        return kExitUsage;
    }
    const Benchmark bench = benchmark_case(*which);
    const Method method = method_from_name(method_str).value();

    std::vector<std::uint64_t> seeds;
    for (int s = 0; s < num_seeds; ++s) {
        seeds.push_back(base_seed + static_cast<std::uint64_t>(s) + 1);
    }
    ExperimentConfig cfg;
    cfg.threads = threads > 0 ? threads : default_threads();
    const ExperimentReport rep = run_experiment(bench.mixture, bench.n, method, seeds, cfg);

    std::cout << "case " << bench.name << " (" << method_str << ", " << num_seeds
              << " seeds)\n";
    std::printf("  overall error %%: mean=%.2f median=%.2f min=%.2f max=%.2f\n",
                100.0 * rep.overall_error.mean, 100.0 * rep.overall_error.median,
                100.0 * rep.overall_error.min, 100.0 * rep.overall_error.max);
    for (std::size_t i = 0; i < rep.per_class_ratio.size(); ++i) {
        std::printf("  class %zu ratio %%: mean=%.2f median=%.2f  (reference %.2f)\n", i + 1,
                    100.0 * rep.per_class_ratio[i].mean,
                    100.0 * rep.per_class_ratio[i].median, bench.reference_ratios[i]);
    }

    json out;
    out["case"] = bench.name;
    out["method"] = method_str;
    out["seeds"] = seeds;
    out["reference_ratios_percent"] = bench.reference_ratios;
    out["overall_error"] = {{"mean", rep.overall_error.mean},
                            {"median", rep.overall_error.median},
                            {"min", rep.overall_error.min},
                            {"max", rep.overall_error.max}};
    json classes = json::array();
    for (std::size_t i = 0; i < rep.per_class_ratio.size(); ++i) {
        classes.push_back({{"mean", rep.per_class_ratio[i].mean},
                           {"median", rep.per_class_ratio[i].median},
                           {"min", rep.per_class_ratio[i].min},
                           {"max", rep.per_class_ratio[i].max}});
    }
    out["per_class_ratio"] = classes;
    json per_seed = json::array();
    for (const auto& outcome : rep.per_seed) {
        json s;
        s["seed"] = outcome.seed;
        s["eval"] = eval_json(outcome.eval);
        if (outcome.solve) {
            s["solve"] = {{"relaxed_objective", outcome.solve->relaxed_objective},
                          {"hard_objective", outcome.solve->hard_objective},
                          {"gain", outcome.solve->gain},
                          {"typical", outcome.solve->typical},
                          {"concentration_bound", outcome.solve->concentration_bound}};
        }
        per_seed.push_back(s);
    }
    out["per_seed"] = per_seed;

    if (out_dir) {
        fs::create_directories(*out_dir);
        std::vector<std::pair<std::string, std::string>> outputs;
        write_output(*out_dir / ("repro_" + bench.name + ".json"), out.dump(2) + "\n",
                     outputs);
        json config_snapshot;
        config_snapshot["case"] = bench.name;
        config_snapshot["method"] = method_str;
        config_snapshot["seeds"] = seeds;
        write_manifest(*out_dir, "repro", config_snapshot, "", outputs);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"blind signal classification by compression gain"};
    app.require_subcommand(1);

    std::uint64_t global_seed = 0;
    bool have_global_seed = false;
    app.add_flag_callback("--version", [] {
        std::cout << kVersion << "\n";
        std::exit(0);
    });

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic mixture signal");
    std::string gen_spec, gen_out = "out";
    std::uint64_t gen_seed = 0;
    bool gen_have_seed = false;
    gen->add_option("--spec", gen_spec, "mixture spec file")->required();
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--seed", gen_seed, "override the spec seed")
        ->each([&](const std::string&) { gen_have_seed = true; });

    // classify
    auto* classify = app.add_subcommand("classify", "classify a signal");
    ClassifyOptions copt;
    std::string classify_input, classify_out = "out", classify_truth;
    classify->add_option("--input", classify_input, "signal file (csv or pgm)")->required();
    classify->add_option("--classes", copt.classes, "number of classes J")->required();
    classify->add_option("--method", copt.method, "relax|kmeans|em|brute")
        ->check(CLI::IsMember({"relax", "kmeans", "em", "brute"}));
    classify->add_option("--format", copt.format, "csv|pgm|auto")
        ->check(CLI::IsMember({"csv", "pgm", "auto"}));
    classify->add_option("--seed", copt.seed, "random seed");
    classify->add_option("--restarts", copt.restarts, "solver restarts");
    classify->add_option("--round-k", copt.round_k, "rounding trials");
    classify->add_option("--eps1", copt.eps1, "typicality tolerance 1");
    classify->add_option("--eps2", copt.eps2, "typicality tolerance 2");
    classify->add_option("--eps3", copt.eps3, "typicality tolerance 3");
    classify->add_option("--threads", copt.threads, "parallel restarts (0 = auto)");
    classify->add_option("--truth", classify_truth, "ground-truth labels for scoring");
    classify->add_option("--out", classify_out, "output directory");

    // eval
    auto* eval = app.add_subcommand("eval", "score labels against ground truth");
    std::string eval_labels, eval_truth, eval_out;
    std::size_t eval_classes = 0;
    eval->add_option("--labels", eval_labels, "estimated labels csv")->required();
    eval->add_option("--truth", eval_truth, "ground truth labels csv")->required();
    eval->add_option("--classes", eval_classes, "class count (0 = infer)");
    eval->add_option("--out", eval_out, "output directory");

    // repro
    auto* repro = app.add_subcommand("repro", "rerun a built-in benchmark case");
    std::string repro_case = "one", repro_method = "relax", repro_out;
    int repro_seeds = 20, repro_threads = 0;
    std::uint64_t repro_base = 0;
    repro->add_option("--case", repro_case, "one|two|three|twodim")->required();
    repro->add_option("--seeds", repro_seeds, "number of seeds");
    repro->add_option("--seed", repro_base, "base seed");
    repro->add_option("--method", repro_method, "relax|kmeans|em|brute")
        ->check(CLI::IsMember({"relax", "kmeans", "em", "brute"}));
    repro->add_option("--threads", repro_threads, "parallel seeds (0 = auto)");
    repro->add_option("--out", repro_out, "output directory");

    app.add_option("--seed", global_seed, "global seed applied to subcommands")
        ->each([&](const std::string&) { have_global_seed = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            std::optional<std::uint64_t> seed;
            if (gen_have_seed) seed = gen_seed;
            if (!seed && have_global_seed) seed = global_seed;
            return cmd_gen(gen_spec, gen_out, seed);
        }
        if (classify->parsed()) {
            if (have_global_seed && copt.seed == 0) copt.seed = global_seed;
            copt.input = classify_input;
            copt.out_dir = classify_out;
            if (!classify_truth.empty()) copt.truth = fs::path(classify_truth);
            return cmd_classify(copt);
        }
        if (eval->parsed()) {
            std::optional<fs::path> out;
            if (!eval_out.empty()) out = fs::path(eval_out);
            return cmd_eval(eval_labels, eval_truth, eval_classes, out);
        }
        if (repro->parsed()) {
            std::optional<fs::path> out;
            if (!repro_out.empty()) out = fs::path(repro_out);
            return cmd_repro(repro_case, repro_seeds,
                             have_global_seed ? global_seed : repro_base, repro_method, out,
                             repro_threads);
        }
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const numerical_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
