// Command-line frontend: train a PCA model, generate probes, simulate noisy
// masked-Fourier intensities, reconstruct with any of the three formulations,
// evaluate error bounds, and run the full SNR sweep.
//
// Exit codes: 0 success, 1 usage/config error, 2 data/parse error,
// 3 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "phasegen/phasegen.hpp"

namespace {

using namespace phasegen;

std::vector<ComplexVector> load_complex_dataset(const std::string& path, std::uint64_t seed) {
    return complexify(load_digits(path), seed);
}

struct SplitResult {
    std::vector<ComplexVector> train;
    std::vector<ComplexVector> heldout;
};

SplitResult shuffle_split(const std::vector<ComplexVector>& signals, double train_fraction,
                          std::uint64_t seed) {
    std::vector<std::size_t> perm(signals.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng rng(seed);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    const auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(signals.size())));
    SplitResult out;
    for (std::size_t i = 0; i < signals.size(); ++i)
        (i < n_train ? out.train : out.heldout).push_back(signals[perm[i]]);
    return out;
}

int run_train(const std::string& data, std::size_t k, std::uint64_t seed, double train_fraction,
              const std::string& out_path) {
    const std::vector<ComplexVector> signals = load_complex_dataset(data, seed);
    const SplitResult split = shuffle_split(signals, train_fraction, mix64(seed ^ 0x5017));
    if (split.train.size() < 2) throw DataError("train: training split has fewer than 2 samples");
    const GenerativeModel model = train_pca(split.train, k);
    save_model(model, out_path);
    std::cout << "trained PCA model: n=" << model.n << " k=" << model.k
              << " samples=" << split.train.size() << " heldout=" << split.heldout.size()
              << (model.rank_deficient ? " (rank deficient)" : "") << "\n"
              << "model written to " << out_path << "\n";
    return 0;
}

int run_probes(std::size_t n, std::size_t count, std::uint64_t seed, const std::string& out_path) {
    const ProbeSet ps = make_probes(count, n, seed);
    save_probes(ps, out_path);
    std::cout << "wrote " << count << " probes of length " << n << " (m = " << count * n
              << ") to " << out_path << "\n";
    return 0;
}

int run_simulate(const std::string& probes_path, double sigma, std::uint64_t seed,
                 const std::string& model_path, std::optional<std::size_t> ntrain,
                 const std::string& data_path, std::optional<std::size_t> row,
                 const std::string& out_path) {
    const MeasurementOperator op(load_probes(probes_path));
    ComplexVector truth;
    if (!model_path.empty()) {
        if (!ntrain) throw ParameterError("simulate: --ntrain is required with --model");
        const GenerativeModel model = load_model(model_path);
        if (model.n != op.signal_dim()) throw DimensionError("simulate: model/probe dim mismatch");
        truth = generate(model, sample_latent(model, derive_seed(seed, {0x51}), *ntrain));
    } else if (!data_path.empty()) {
        const std::vector<ComplexVector> signals =
            load_complex_dataset(data_path, derive_seed(seed, {0x52}));
        if (!row) throw ParameterError("simulate: --row is required with --data");
        if (*row >= signals.size())
            throw ParameterError("simulate: row " + std::to_string(*row) + " out of range (N=" +
                                 std::to_string(signals.size()) + ")");
        truth = signals[*row];
        if (truth.size() != op.signal_dim())
            throw DimensionError("simulate: dataset/probe dim mismatch");
    } else {
        throw ParameterError("simulate: provide a ground truth via --model or --data");
    }

    MeasurementFile mf;
    mf.n = op.signal_dim();
    mf.num_probes = op.probe_count();
    mf.sigma = sigma;
    mf.seed = seed;
    mf.truth = truth;
    const RealVector clean = op.forward(truth);
    auto [noisy, eps_norm] = add_noise(clean, sigma, derive_seed(seed, {0x53}));
    mf.y = std::move(noisy);
    mf.eps_norm = eps_norm;
    save_measurements(mf, out_path);
    std::cout << "simulated m=" << mf.y.size() << " measurements, sigma=" << sigma
              << ", ||eps||=" << eps_norm << ", written to " << out_path << "\n";
    return 0;
}

Formulation build_formulation(MethodKind method, double lambda, const std::string& lambda_rule,
                              const std::optional<GenerativeModel>& model, std::size_t n,
                              double sigma) {
    double lam = lambda;
    RealVector weights;
    if (!lambda_rule.empty()) {
        lam = lambda_for_rule(lambda_rule, method, sigma);
        weights = weights_for_rule(lambda_rule, method, model ? model->k : 0, n);
    }
    switch (method) {
        case MethodKind::Conventional: return Formulation::conventional(n, lam);
        case MethodKind::Generative:
            if (!model) throw ParameterError("reconstruct: --model is required for this method");
            return Formulation::generative(*model, lam);
        case MethodKind::Combined:
            if (!model) throw ParameterError("reconstruct: --model is required for this method");
            return Formulation::combined(*model, lam, weights);
    }
    throw ParameterError("reconstruct: bad method");
}

BoundReport build_report(const MeasurementOperator& op, const GenerativeModel& model,
                         const MeasurementFile& mf, double lambda, double residual,
                         std::size_t ntrain, std::size_t pairs, double perturb,
                         std::uint64_t seed) {
    const auto alpha = estimate_bilipschitz(
        [&op](const ComplexVector& f) { return op.forward(f); },
        signal_domain_sampler(model, ntrain, perturb, derive_seed(seed, {0xa1})), pairs);
    const auto beta = estimate_bilipschitz(
        [&model](const ComplexVector& z) { return generate(model, z); },
        latent_domain_sampler(model, ntrain, derive_seed(seed, {0xb1})), pairs);
    const auto gamma = estimate_bilipschitz(
        [&op, &model](const ComplexVector& z) { return op.forward(generate(model, z)); },
        latent_domain_sampler(model, ntrain, derive_seed(seed, {0xc1})), pairs);
    const double bias = mf.truth.empty() ? -1.0 : bias_of(model, mf.truth);
    return make_bound_report(alpha, beta, gamma, lambda, bias, mf.eps_norm, residual, mf.eps_norm);
}

int run_reconstruct(const std::string& probes_path, const std::string& measurements_path,
                    const std::string& method_name, const std::string& model_path, double lambda,
                    bool lambda_given, const std::string& lambda_rule, const SolverConfig& solver,
                    double init_scale_or_auto, const std::string& out_path,
                    const std::string& report_path, std::size_t pairs, double perturb,
                    std::optional<std::size_t> ntrain) {
    const MeasurementOperator op(load_probes(probes_path));
    const MeasurementFile mf = load_measurements(measurements_path);
    if (mf.n != op.signal_dim() || mf.num_probes != op.probe_count())
        throw DimensionError("reconstruct: measurement/probe geometry mismatch");
    const MethodKind method = parse_method(method_name);
    std::optional<GenerativeModel> model;
    if (!model_path.empty()) model = load_model(model_path);

    std::string rule = lambda_rule;
    if (lambda_given) rule.clear();  // explicit --lambda wins over the rule
    const Formulation form = build_formulation(method, lambda, rule, model, op.signal_dim(), mf.sigma);
    const double lam = form.lambda;
    const UnifiedProblem problem(form, op, mf.y);

    SolverConfig sc = solver;
    if (init_scale_or_auto == 0.0) {
        double total = 0.0;
        for (double v : mf.y) total += std::max(v, 0.0);
        sc.init_scale = std::sqrt(std::max(total, 1e-30) /
                                  static_cast<double>(op.measurement_dim()));
    } else {
        sc.init_scale = init_scale_or_auto;
    }

    const ReconstructionResult res = reconstruct(problem, sc);
    ReconstructionFile rf;
    rf.method = method;
    rf.lambda = lam;
    rf.result = res;
    save_reconstruction(rf, out_path);
    std::cout << "method=" << to_string(method) << " lambda=" << lam
              << " objective=" << res.objective_value << " residual=" << res.residual
              << " iterations=" << res.iterations << " converged=" << (res.converged ? 1 : 0)
              << " restart=" << res.restart_index << "\n";
    if (!mf.truth.empty())
        std::cout << "relative_error=" << relative_error(res.f, mf.truth) << "\n";
    std::cout << "reconstruction written to " << out_path << "\n";

    if (!report_path.empty()) {
        if (!model) throw ParameterError("reconstruct: --model is required for --report");
        if (!ntrain) throw ParameterError("reconstruct: --ntrain is required for --report");
        const BoundReport rep = build_report(op, *model, mf, lam, res.residual, *ntrain, pairs,
                                             perturb, sc.seed);
        save_bound_report(rep, report_path);
        std::cout << "bound report written to " << report_path << "\n";
    }
    return 0;
}

int run_bounds(const std::string& probes_path, const std::string& model_path,
               const std::string& measurements_path, const std::string& reconstruction_path,
               const std::string& out_path, std::size_t pairs, double perturb, std::size_t ntrain,
               std::uint64_t seed) {
    const MeasurementOperator op(load_probes(probes_path));
    const GenerativeModel model = load_model(model_path);
    const MeasurementFile mf = load_measurements(measurements_path);
    const ReconstructionFile rf = load_reconstruction(reconstruction_path);
    if (mf.n != op.signal_dim() || model.n != op.signal_dim())
        throw DimensionError("bounds: dimension mismatch between inputs");
    const BoundReport rep =
        build_report(op, model, mf, rf.lambda, rf.result.residual, ntrain, pairs, perturb, seed);
    save_bound_report(rep, out_path);
    std::cout << "alpha=" << rep.alpha.folded() << " beta=" << rep.beta.folded()
              << " gamma=" << rep.gamma.folded() << "\n"
              << "lemma1=" << rep.lemma1;
    if (rep.bias_known) std::cout << " lemma2=" << rep.lemma2 << " lemma3=" << rep.lemma3;
    std::cout << "\nbias interval = [" << rep.bias_lo << ", " << rep.bias_hi << "]\n"
              << "report written to " << out_path << "\n";
    return 0;
}

int run_sweep_cmd(const std::string& config_path, const std::string& csv_path,
                  const std::string& plot_path, std::optional<std::size_t> threads_override) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (threads_override) cfg.threads = *threads_override;
    const ExperimentData data = prepare_experiment(cfg);
    std::cout << "model trained: n=" << cfg.n << " k=" << cfg.k << " train=" << data.n_train
              << " heldout=" << data.heldout.size() << "\n"
              << "running " << cfg.sigma_grid.size() << " x " << cfg.methods.size() << " x "
              << cfg.scenarios.size() << " x " << cfg.trials << " grid...\n";
    const SweepResult result = run_sweep(cfg, data.model, data.heldout, data.n_train);
    emit_csv(result, csv_path);
    std::cout << result.records.size() << " records written to " << csv_path << "\n";
    if (!plot_path.empty()) {
        emit_plot(result, plot_path);
        std::cout << "plot written to " << plot_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase retrieval from masked Fourier intensities with generative priors"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "Train a PCA generative model from a digit CSV");
    std::string train_data, train_out;
    std::size_t train_k = 30;
    std::uint64_t train_seed = 1;
    double train_fraction = 1.0;
    train->add_option("--data", train_data, "digit CSV path")->required();
    train->add_option("--k", train_k, "latent dimension");
    train->add_option("--seed", train_seed, "seed for complexification/shuffle");
    train->add_option("--train-fraction", train_fraction, "fraction of samples used for training")
        ->check(CLI::Range(0.0, 1.0));
    train->add_option("--out", train_out, "output model file")->required();

    // probes
    auto* probes = app.add_subcommand("probes", "Generate a binary probe file");
    std::size_t probes_n = 64, probes_count = 100;
    std::uint64_t probes_seed = 7;
    std::string probes_out;
    probes->add_option("--n", probes_n, "signal dimension");
    probes->add_option("--count", probes_count, "number of probes");
    probes->add_option("--seed", probes_seed, "generator seed");
    probes->add_option("--out", probes_out, "output probe file")->required();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Simulate noisy intensity measurements");
    std::string sim_probes, sim_model, sim_data, sim_out;
    double sim_sigma = 0.0;
    std::uint64_t sim_seed = 1;
    std::optional<std::size_t> sim_ntrain, sim_row;
    simulate->add_option("--probes", sim_probes, "probe file")->required();
    simulate->add_option("--sigma", sim_sigma, "noise standard deviation")
        ->check(CLI::NonNegativeNumber);
    simulate->add_option("--seed", sim_seed, "seed for truth draw and noise");
    simulate->add_option("--model", sim_model, "model file (in-distribution truth)");
    simulate->add_option("--ntrain", sim_ntrain, "training sample count behind the model");
    simulate->add_option("--data", sim_data, "digit CSV (out-of-distribution truth)");
    simulate->add_option("--row", sim_row, "dataset row used as ground truth");
    simulate->add_option("--out", sim_out, "output measurement file")->required();

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "Reconstruct a signal from measurements");
    std::string rec_probes, rec_meas, rec_method, rec_model, rec_out, rec_report;
    std::string rec_rule = "paper";
    double rec_lambda = 0.0;
    std::string rec_init_scale = "auto";
    SolverConfig rec_solver;
    std::size_t rec_pairs = 2000;
    double rec_perturb = 0.1;
    std::optional<std::size_t> rec_ntrain;
    rec->add_option("--probes", rec_probes, "probe file")->required();
    rec->add_option("--measurements", rec_meas, "measurement file")->required();
    rec->add_option("--method", rec_method, "conventional|generative|combined")->required();
    rec->add_option("--model", rec_model, "model file (needed unless conventional)");
    auto* lambda_opt = rec->add_option("--lambda", rec_lambda, "penalty weight (overrides rule)");
    rec->add_option("--lambda-rule", rec_rule, "paper|none");
    rec->add_option("--restarts", rec_solver.restarts, "solver restarts");
    rec->add_option("--max-iter", rec_solver.max_iter, "iteration cap");
    rec->add_option("--grad-tol", rec_solver.grad_tol, "gradient tolerance");
    rec->add_option("--memory", rec_solver.memory, "L-BFGS memory");
    rec->add_option("--seed", rec_solver.seed, "restart seed");
    rec->add_option("--init-scale", rec_init_scale, "per-entry init std, or 'auto'");
    rec->add_option("--out", rec_out, "output reconstruction file")->required();
    rec->add_option("--report", rec_report, "also write a bound report here");
    rec->add_option("--pairs", rec_pairs, "sampled pairs per Lipschitz estimate");
    rec->add_option("--perturb", rec_perturb, "perturbation std for the signal domain");
    rec->add_option("--ntrain", rec_ntrain, "training sample count behind the model");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "Evaluate error bounds for a reconstruction");
    std::string b_probes, b_model, b_meas, b_rec, b_out;
    std::size_t b_pairs = 2000, b_ntrain = 100;
    double b_perturb = 0.1;
    std::uint64_t b_seed = 1;
    bounds->add_option("--probes", b_probes, "probe file")->required();
    bounds->add_option("--model", b_model, "model file")->required();
    bounds->add_option("--measurements", b_meas, "measurement file")->required();
    bounds->add_option("--reconstruction", b_rec, "reconstruction file")->required();
    bounds->add_option("--out", b_out, "output report file")->required();
    bounds->add_option("--pairs", b_pairs, "sampled pairs per Lipschitz estimate");
    bounds->add_option("--perturb", b_perturb, "perturbation std for the signal domain");
    bounds->add_option("--ntrain", b_ntrain, "training sample count behind the model")->required();
    bounds->add_option("--seed", b_seed, "sampling seed");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run the SNR sweep experiment from a config file");
    std::string sweep_config, sweep_csv, sweep_plot;
    std::optional<std::size_t> sweep_threads;
    sweep->add_option("--config", sweep_config, "experiment config file")->required();
    sweep->add_option("--out-csv", sweep_csv, "output CSV path")->required();
    sweep->add_option("--out-plot", sweep_plot, "output SVG path");
    sweep->add_option("--threads", sweep_threads, "worker threads (0 = hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(train))
            return run_train(train_data, train_k, train_seed, train_fraction, train_out);
        if (app.got_subcommand(probes))
            return run_probes(probes_n, probes_count, probes_seed, probes_out);
        if (app.got_subcommand(simulate))
            return run_simulate(sim_probes, sim_sigma, sim_seed, sim_model, sim_ntrain, sim_data,
                                sim_row, sim_out);
        if (app.got_subcommand(rec)) {
            double init_scale = 0.0;
            if (rec_init_scale != "auto") {
                try {
                    init_scale = std::stod(rec_init_scale);
                } catch (const std::exception&) {
                    throw ParameterError("reconstruct: bad --init-scale value '" + rec_init_scale + "'");
                }
                if (!(init_scale > 0.0))
                    throw ParameterError("reconstruct: --init-scale must be positive or 'auto'");
            }
            return run_reconstruct(rec_probes, rec_meas, rec_method, rec_model, rec_lambda,
                                   lambda_opt->count() > 0, rec_rule, rec_solver, init_scale,
                                   rec_out, rec_report, rec_pairs, rec_perturb, rec_ntrain);
        }
        if (app.got_subcommand(bounds))
            return run_bounds(b_probes, b_model, b_meas, b_rec, b_out, b_pairs, b_perturb,
                              b_ntrain, b_seed);
        if (app.got_subcommand(sweep))
            return run_sweep_cmd(sweep_config, sweep_csv, sweep_plot, sweep_threads);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ParameterError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DimensionError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const FileError& e) {
        std::cerr << "file error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
