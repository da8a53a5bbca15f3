// Experiment harness: dataset ingestion, noise synthesis, metrics, the
// SNR-sweep comparison of the three formulations, CSV persistence, and an SVG
// plot. The whole sweep is a pure function of (config, model, dataset): every
// random draw is derived from the master seed and grid indices, so parallel
// execution cannot change the output.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "bounds.hpp"
#include "config.hpp"
#include "generative.hpp"
#include "measurement.hpp"
#include "numerics.hpp"
#include "optimize.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace phasegen {

enum class ScenarioKind { InDistribution, OutOfDistribution };

inline const char* to_string(ScenarioKind sc) {
    return sc == ScenarioKind::InDistribution ? "in_distribution" : "out_of_distribution";
}

inline ScenarioKind parse_scenario(const std::string& name) {
    if (name == "in_distribution") return ScenarioKind::InDistribution;
    if (name == "out_of_distribution") return ScenarioKind::OutOfDistribution;
    throw ParameterError("unknown scenario: " + name);
}

/// Reads a CSV of digit images: one row per sample, 64 pixel values with an
/// optional trailing label column (ignored). Pixels are rescaled so the
/// dataset maximum becomes 1.
inline std::vector<RealVector> load_digits(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open: " + path);
    std::vector<RealVector> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        std::vector<double> fields;
        std::istringstream ls(line);
        std::string item;
        while (std::getline(ls, item, ',')) {
            const std::string t = detail::trim(item);
            try {
                std::size_t pos = 0;
                fields.push_back(std::stod(t, &pos));
                if (pos != t.size()) throw std::invalid_argument(t);
            } catch (const std::exception&) {
                throw ParseError(path + ": row " + std::to_string(lineno) +
                                 ": not a number: '" + t + "'");
            }
        }
        if (fields.size() != 64 && fields.size() != 65)
            throw ParseError(path + ": row " + std::to_string(lineno) + ": expected 64 pixel values" +
                             " (plus optional label), got " + std::to_string(fields.size()));
        fields.resize(64);
        rows.push_back(std::move(fields));
    }
    if (rows.size() < 2) throw DataError(path + ": need at least 2 samples");
    double max_pixel = 0.0;
    for (const RealVector& r : rows)
        for (double v : r) max_pixel = std::max(max_pixel, v);
    if (max_pixel > 0.0)
        for (RealVector& r : rows)
            for (double& v : r) v /= max_pixel;
    return rows;
}

/// Builds complex signals from real samples: real part = sample j, imaginary
/// part = 0.5 x a uniformly chosen *different* sample. Deterministic pairing.
inline std::vector<ComplexVector> complexify(const std::vector<RealVector>& dataset,
                                             std::uint64_t seed) {
    const std::size_t count = dataset.size();
    if (count < 2) throw DataError("complexify: need at least 2 samples");
    Rng rng(seed);
    std::vector<ComplexVector> out(count);
    for (std::size_t j = 0; j < count; ++j) {
        std::size_t p = rng.below(count - 1);
        if (p >= j) ++p;
        const RealVector& re = dataset[j];
        const RealVector& im = dataset[p];
        if (im.size() != re.size()) throw DimensionError("complexify: ragged dataset");
        ComplexVector c(re.size());
        for (std::size_t t = 0; t < re.size(); ++t) c[t] = Complex{re[t], 0.5 * im[t]};
        out[j] = std::move(c);
    }
    return out;
}

/// Adds i.i.d. real Gaussian noise of standard deviation sigma and returns the
/// realized noise norm ||eps||_2 for bound evaluation.
inline std::pair<RealVector, double> add_noise(const RealVector& y, double sigma,
                                               std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ParameterError("add_noise: sigma must be >= 0");
    if (sigma == 0.0) return {y, 0.0};
    Rng rng(seed);
    RealVector noisy(y.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double eps = sigma * rng.gaussian();
        noisy[j] = y[j] + eps;
        acc += eps * eps;
    }
    return {std::move(noisy), std::sqrt(acc)};
}

/// Global-phase-aligned relative error min_phi ||e^{i phi} f - f0|| / ||f0||.
/// The optimum is closed-form: phi = arg <f, f0> with conj on the first slot.
inline double relative_error(const ComplexVector& f_est, const ComplexVector& f_true) {
    if (f_est.size() != f_true.size()) throw DimensionError("relative_error: length mismatch");
    const double ref = norm2(f_true);
    if (ref == 0.0) throw ParameterError("relative_error: reference signal is zero");
    const Complex c = inner(f_est, f_true);
    const Complex phase = (std::abs(c) > 0.0) ? c / std::abs(c) : Complex{1.0, 0.0};
    double acc = 0.0;
    for (std::size_t t = 0; t < f_est.size(); ++t) acc += std::norm(phase * f_est[t] - f_true[t]);
    return std::sqrt(acc) / ref;
}

/// 10 log10(||A(f0)||^2 / (m sigma^2)); +infinity when sigma == 0.
inline double snr_db(const MeasurementOperator& op, const ComplexVector& f0, double sigma) {
    if (!(sigma >= 0.0)) throw ParameterError("snr_db: sigma must be >= 0");
    if (sigma == 0.0) return std::numeric_limits<double>::infinity();
    const RealVector y = op.forward(f0);
    double power = 0.0;
    for (double v : y) power += v * v;
    const double m = static_cast<double>(op.measurement_dim());
    return 10.0 * std::log10(power / (m * sigma * sigma));
}

/// Regularization presets. "paper": conventional/generative get the Tikhonov
/// pair (lambda = sigma^2, w = 1); combined gets lambda = 10 sigma^2 with w = 1
/// (which also regularizes the latent block). "none": lambda = 0 everywhere.
inline double lambda_for_rule(const std::string& rule, MethodKind method, double sigma) {
    if (rule == "none") return 0.0;
    if (rule == "paper")
        return method == MethodKind::Combined ? 10.0 * sigma * sigma : sigma * sigma;
    throw ParameterError("unknown lambda rule: " + rule);
}

inline RealVector weights_for_rule(const std::string& rule, MethodKind method, std::size_t k,
                                   std::size_t n) {
    if (rule == "paper" && method == MethodKind::Combined) return RealVector(k + n, 1.0);
    return default_weights(method, k, n);
}

struct ExperimentConfig {
    std::size_t n = 64;
    std::size_t k = 30;
    std::size_t num_probes = 100;
    RealVector sigma_grid;  // ascending, >= 0
    std::size_t trials = 10;
    std::vector<ScenarioKind> scenarios{ScenarioKind::InDistribution,
                                        ScenarioKind::OutOfDistribution};
    std::vector<MethodKind> methods{MethodKind::Conventional, MethodKind::Generative,
                                    MethodKind::Combined};
    std::uint64_t seed = 1;
    std::string lambda_rule = "paper";
    std::string data_path = "data/digits.csv";
    double holdout_fraction = 0.2;
    std::size_t threads = 0;  // 0 = hardware concurrency
    // solver settings; init_scale 0 means "derive from the measured energy"
    std::size_t restarts = 5;
    std::size_t max_iter = 500;
    double grad_tol = 1e-8;
    std::size_t memory = 10;
    double init_scale = 0.0;

    /// Eight log-spaced noise levels from the noiseless-adjacent to the
    /// noise-dominated regime for unit-scale signals at n=64, l=100.
    static RealVector default_sigma_grid() {
        RealVector grid(8);
        const double lo = std::log10(1e-4), hi = std::log10(0.3);
        for (std::size_t i = 0; i < 8; ++i)
            grid[i] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / 7.0);
        return grid;
    }

    void validate() const {
        if (sigma_grid.empty()) throw ParameterError("config: sigma_grid must be non-empty");
        for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
            if (!(sigma_grid[i] >= 0.0)) throw ParameterError("config: sigma must be >= 0");
            if (i && sigma_grid[i] < sigma_grid[i - 1])
                throw ParameterError("config: sigma_grid must be ascending");
        }
        if (trials < 1) throw ParameterError("config: trials must be >= 1");
        if (scenarios.empty() || methods.empty())
            throw ParameterError("config: scenarios and methods must be non-empty");
        if (n < 2 || k < 1 || k >= n || num_probes < 1)
            throw ParameterError("config: need n >= 2, 1 <= k < n, probes >= 1");
        if (!(holdout_fraction > 0.0) || !(holdout_fraction >= 0.0) || holdout_fraction >= 1.0)
            throw ParameterError("config: holdout_fraction must be in (0, 1)");
        lambda_for_rule(lambda_rule, MethodKind::Conventional, 0.0);  // validates the rule name
        if (restarts < 1 || max_iter < 1 || memory < 1 || !(grad_tol > 0.0) || !(init_scale >= 0.0))
            throw ParameterError("config: bad solver settings");
    }

    SolverConfig solver(std::uint64_t solver_seed, double resolved_init_scale) const {
        SolverConfig sc;
        sc.memory = memory;
        sc.grad_tol = grad_tol;
        sc.max_iter = max_iter;
        sc.restarts = restarts;
        sc.init_scale = resolved_init_scale;
        sc.seed = solver_seed;
        return sc;
    }

    static ExperimentConfig from_file(const std::string& path) {
        return from_config(ConfigFile::parse_file(path));
    }

    static ExperimentConfig from_config(const ConfigFile& cfg) {
        cfg.require_known_keys({"n", "k", "probes", "sigma_grid", "trials", "scenarios", "methods",
                                "seed", "lambda_rule", "data", "holdout_fraction", "threads",
                                "restarts", "max_iter", "grad_tol", "memory", "init_scale"});
        ExperimentConfig out;
        out.n = static_cast<std::size_t>(cfg.get_int("n", 64));
        out.k = static_cast<std::size_t>(cfg.get_int("k", 30));
        out.num_probes = static_cast<std::size_t>(cfg.get_int("probes", 100));
        out.sigma_grid = cfg.has("sigma_grid") ? cfg.get_double_list("sigma_grid")
                                               : default_sigma_grid();
        out.trials = static_cast<std::size_t>(cfg.get_int("trials", 10));
        if (cfg.has("scenarios")) {
            out.scenarios.clear();
            for (const std::string& s : cfg.get_list("scenarios"))
                out.scenarios.push_back(parse_scenario(s));
        }
        if (cfg.has("methods")) {
            out.methods.clear();
            for (const std::string& s : cfg.get_list("methods"))
                out.methods.push_back(parse_method(s));
        }
        out.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
        out.lambda_rule = cfg.get_string("lambda_rule", "paper");
        out.data_path = cfg.get_string("data", "data/digits.csv");
        out.holdout_fraction = cfg.get_double("holdout_fraction", 0.2);
        out.threads = static_cast<std::size_t>(cfg.get_int("threads", 0));
        out.restarts = static_cast<std::size_t>(cfg.get_int("restarts", 5));
        out.max_iter = static_cast<std::size_t>(cfg.get_int("max_iter", 500));
        out.grad_tol = cfg.get_double("grad_tol", 1e-8);
        out.memory = static_cast<std::size_t>(cfg.get_int("memory", 10));
        if (cfg.has("init_scale")) {
            const std::string v = cfg.get_string("init_scale");
            out.init_scale = (v == "auto") ? 0.0 : cfg.get_double("init_scale");
        }
        out.validate();
        return out;
    }
};

struct SweepRecord {
    double sigma = 0.0;
    double snr_db = 0.0;
    MethodKind method = MethodKind::Conventional;
    ScenarioKind scenario = ScenarioKind::InDistribution;
    std::size_t trial = 0;
    double relative_error = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

struct SweepResult {
    std::vector<SweepRecord> records;
};

/// Training split + model for an experiment. heldout feeds the
/// out-of-distribution scenario and is disjoint from the PCA training set.
struct ExperimentData {
    GenerativeModel model;
    std::vector<ComplexVector> heldout;
    std::size_t n_train = 0;
};

namespace detail {

// seed-derivation tags; arbitrary distinct constants
inline constexpr std::uint64_t kTagComplexify = 0xc01;
inline constexpr std::uint64_t kTagSplit = 0xc02;
inline constexpr std::uint64_t kTagProbes = 0xc03;
inline constexpr std::uint64_t kTagTruth = 0xc04;
inline constexpr std::uint64_t kTagNoise = 0xc05;
inline constexpr std::uint64_t kTagSolver = 0xc06;

inline void parallel_for(std::size_t count, std::size_t threads,
                         const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (std::thread& th : pool) th.join();
}

}  // namespace detail

/// Loads the digit corpus, complexifies it, splits train/holdout by a seeded
/// shuffle, and trains the PCA model on the training part.
inline ExperimentData prepare_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<RealVector> raw = load_digits(cfg.data_path);
    if (!raw.empty() && raw.front().size() != cfg.n)
        throw DataError("dataset sample length " + std::to_string(raw.front().size()) +
                        " != configured n = " + std::to_string(cfg.n));
    const std::vector<ComplexVector> signals =
        complexify(raw, derive_seed(cfg.seed, {detail::kTagComplexify}));

    std::vector<std::size_t> perm(signals.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng rng(derive_seed(cfg.seed, {detail::kTagSplit}));
    for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[rng.below(i)]);

    const std::size_t n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(cfg.holdout_fraction *
                                                 static_cast<double>(signals.size()))));
    if (signals.size() < n_test + std::max<std::size_t>(cfg.k + 1, 2))
        throw DataError("dataset too small for the requested split and k");

    ExperimentData data;
    data.n_train = signals.size() - n_test;
    std::vector<ComplexVector> train;
    train.reserve(data.n_train);
    for (std::size_t i = 0; i < data.n_train; ++i) train.push_back(signals[perm[i]]);
    data.heldout.reserve(n_test);
    for (std::size_t i = data.n_train; i < signals.size(); ++i)
        data.heldout.push_back(signals[perm[i]]);
    data.model = train_pca(train, cfg.k);
    return data;
}

/// The ground truth a sweep cell uses; exposed so validation code can inspect
/// the exact per-trial signals. Depends on (seed, sigma index, scenario,
/// trial) but not on the method, so all methods see identical data.
inline ComplexVector sweep_ground_truth(const ExperimentConfig& cfg, const GenerativeModel& model,
                                        const std::vector<ComplexVector>& heldout,
                                        std::size_t n_train, std::size_t sigma_index,
                                        ScenarioKind scenario, std::size_t trial) {
    const std::uint64_t data_seed =
        derive_seed(cfg.seed, {detail::kTagTruth, sigma_index,
                               static_cast<std::uint64_t>(scenario), trial});
    if (scenario == ScenarioKind::InDistribution)
        return generate(model, sample_latent(model, data_seed, n_train));
    if (heldout.empty()) throw DataError("out-of-distribution scenario needs heldout samples");
    Rng rng(data_seed);
    return heldout[rng.below(heldout.size())];
}

/// Runs the full (sigma x method x scenario x trial) grid. Ground truth and
/// noise are shared across methods within a cell; solver failures are recorded
/// with converged = false rather than aborting. Deterministic per seed.
inline SweepResult run_sweep(const ExperimentConfig& cfg, const GenerativeModel& model,
                             const std::vector<ComplexVector>& heldout, std::size_t n_train) {
    cfg.validate();
    if (model.n != cfg.n || model.k != cfg.k)
        throw DimensionError("run_sweep: model dims do not match config");
    const MeasurementOperator op(
        make_probes(cfg.num_probes, cfg.n, derive_seed(cfg.seed, {detail::kTagProbes})));

    struct Task {
        std::size_t sigma_index, scenario_index, trial;
    };
    std::vector<Task> tasks;
    for (std::size_t si = 0; si < cfg.sigma_grid.size(); ++si)
        for (std::size_t sc = 0; sc < cfg.scenarios.size(); ++sc)
            for (std::size_t tr = 0; tr < cfg.trials; ++tr) tasks.push_back({si, sc, tr});

    SweepResult result;
    result.records.assign(tasks.size() * cfg.methods.size(), SweepRecord{});

    detail::parallel_for(tasks.size(), cfg.threads, [&](std::size_t ti) {
        const Task& task = tasks[ti];
        const double sigma = cfg.sigma_grid[task.sigma_index];
        const ScenarioKind scenario = cfg.scenarios[task.scenario_index];
        const ComplexVector f0 = sweep_ground_truth(cfg, model, heldout, n_train,
                                                    task.sigma_index, scenario, task.trial);
        const RealVector clean = op.forward(f0);
        const auto [y, eps_norm] = add_noise(
            clean, sigma,
            derive_seed(cfg.seed, {detail::kTagNoise, task.sigma_index,
                                   static_cast<std::uint64_t>(scenario), task.trial}));
        (void)eps_norm;
        const double snr = snr_db(op, f0, sigma);

        // init scale: either configured, or per-entry RMS inferred from the
        // measured energy (E||Af||^2 ~= (l/2)||f||^2 for Bernoulli(1/2) masks)
        double init_scale = cfg.init_scale;
        if (init_scale == 0.0) {
            double total = 0.0;
            for (double v : y) total += std::max(v, 0.0);
            init_scale = std::sqrt(std::max(total, 1e-30) /
                                   static_cast<double>(cfg.num_probes * cfg.n));
        }

        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
            const MethodKind method = cfg.methods[mi];
            SweepRecord rec;
            rec.sigma = sigma;
            rec.snr_db = snr;
            rec.method = method;
            rec.scenario = scenario;
            rec.trial = task.trial;
            const std::uint64_t solver_seed =
                derive_seed(cfg.seed, {detail::kTagSolver, task.sigma_index,
                                       static_cast<std::uint64_t>(scenario), task.trial, mi});
            try {
                const double lambda = lambda_for_rule(cfg.lambda_rule, method, sigma);
                Formulation form;
                switch (method) {
                    case MethodKind::Conventional:
                        form = Formulation::conventional(cfg.n, lambda);
                        break;
                    case MethodKind::Generative:
                        form = Formulation::generative(model, lambda);
                        break;
                    case MethodKind::Combined:
                        form = Formulation::combined(
                            model, lambda, weights_for_rule(cfg.lambda_rule, method, cfg.k, cfg.n));
                        break;
                }
                const UnifiedProblem problem(std::move(form), op, y);
                const ReconstructionResult res =
                    reconstruct(problem, cfg.solver(solver_seed, init_scale));
                rec.relative_error = relative_error(res.f, f0);
                rec.residual = res.residual;
                rec.iterations = res.iterations;
                rec.converged = res.converged;
            } catch (const Error&) {
                rec.relative_error = std::numeric_limits<double>::infinity();
                rec.converged = false;
            }
            result.records[ti * cfg.methods.size() + mi] = rec;
        }
    });
    return result;
}

/// Writes the CSV artifact; doubles use 17 significant digits so the file
/// round-trips losslessly.
inline void emit_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    out << "sigma,snr_db,method,scenario,trial,relative_error,residual,iterations,converged\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (const SweepRecord& r : result.records) {
        put(r.sigma);
        out << ',';
        put(r.snr_db);
        out << ',' << to_string(r.method) << ',' << to_string(r.scenario) << ',' << r.trial << ',';
        put(r.relative_error);
        out << ',';
        put(r.residual);
        out << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
    }
    if (!out) throw FileError("write failed: " + path);
}

inline SweepResult parse_sweep_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "sigma,snr_db,method,scenario,trial,relative_error,residual,iterations,converged")
        throw ParseError(path + ": bad or missing CSV header");
    SweepResult result;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string item;
        while (std::getline(ls, item, ',')) fields.push_back(item);
        if (fields.size() != 9)
            throw ParseError(path + ": row " + std::to_string(lineno) + ": expected 9 fields");
        try {
            SweepRecord r;
            r.sigma = std::stod(fields[0]);
            r.snr_db = std::stod(fields[1]);
            r.method = parse_method(fields[2]);
            r.scenario = parse_scenario(fields[3]);
            r.trial = static_cast<std::size_t>(std::stoull(fields[4]));
            r.relative_error = std::stod(fields[5]);
            r.residual = std::stod(fields[6]);
            r.iterations = static_cast<std::size_t>(std::stoull(fields[7]));
            r.converged = fields[8] == "1";
            result.records.push_back(r);
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError(path + ": row " + std::to_string(lineno) + ": malformed record");
        }
    }
    return result;
}

/// Simulated intensity measurements plus the metadata needed to evaluate
/// bounds later. The ground truth is carried along when known (simulation);
/// externally measured data simply omits it.
struct MeasurementFile {
    std::size_t n = 0;
    std::size_t num_probes = 0;
    double sigma = 0.0;     // per-entry noise standard deviation
    double eps_norm = 0.0;  // realized ||eps||_2
    std::uint64_t seed = 0;
    RealVector y;           // length n * num_probes
    ComplexVector truth;    // empty when unknown
};

inline void save_measurements(const MeasurementFile& mf, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    out << mf.n << ' ' << mf.num_probes << ' ';
    put(mf.sigma);
    out << ' ';
    put(mf.eps_norm);
    out << ' ' << mf.seed << '\n';
    for (double v : mf.y) {
        put(v);
        out << '\n';
    }
    if (!mf.truth.empty()) {
        out << "truth\n";
        for (const Complex& c : mf.truth) {
            put(c.real());
            out << ' ';
            put(c.imag());
            out << '\n';
        }
    }
    if (!out) throw FileError("write failed: " + path);
}

inline MeasurementFile load_measurements(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open: " + path);
    MeasurementFile mf;
    if (!(in >> mf.n >> mf.num_probes >> mf.sigma >> mf.eps_norm >> mf.seed))
        throw ParseError("measurement file: malformed header in " + path);
    if (mf.n < 1 || mf.num_probes < 1)
        throw ParseError("measurement file: invalid dimensions in " + path);
    mf.y.resize(mf.n * mf.num_probes);
    for (double& v : mf.y)
        if (!(in >> v)) throw ParseError("measurement file: truncated data in " + path);
    std::string marker;
    if (in >> marker) {
        if (marker != "truth")
            throw ParseError("measurement file: unexpected trailer '" + marker + "' in " + path);
        mf.truth.resize(mf.n);
        for (Complex& c : mf.truth) {
            double re = 0.0, im = 0.0;
            if (!(in >> re >> im)) throw ParseError("measurement file: truncated truth in " + path);
            c = Complex{re, im};
        }
    }
    return mf;
}

/// A persisted reconstruction: the estimate plus the formulation it came from.
struct ReconstructionFile {
    MethodKind method = MethodKind::Conventional;
    double lambda = 0.0;
    ReconstructionResult result;
};

inline void save_reconstruction(const ReconstructionFile& rf, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    out << rf.result.f.size() << ' ' << rf.result.x.size() << ' ' << to_string(rf.method) << ' ';
    put(rf.lambda);
    out << ' ';
    put(rf.result.objective_value);
    out << ' ';
    put(rf.result.residual);
    out << ' ' << rf.result.iterations << ' ' << (rf.result.converged ? 1 : 0) << ' '
        << rf.result.restart_index << '\n';
    auto put_vec = [&](const ComplexVector& v) {
        for (const Complex& c : v) {
            put(c.real());
            out << ' ';
            put(c.imag());
            out << '\n';
        }
    };
    put_vec(rf.result.f);
    put_vec(rf.result.x);
    if (!out) throw FileError("write failed: " + path);
}

inline ReconstructionFile load_reconstruction(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open: " + path);
    ReconstructionFile rf;
    std::size_t n = 0, d = 0;
    std::string method;
    int converged = 0;
    if (!(in >> n >> d >> method >> rf.lambda >> rf.result.objective_value >>
          rf.result.residual >> rf.result.iterations >> converged >> rf.result.restart_index))
        throw ParseError("reconstruction file: malformed header in " + path);
    rf.method = parse_method(method);
    rf.result.converged = converged != 0;
    auto read_vec = [&](ComplexVector& v, std::size_t len, const char* what) {
        v.resize(len);
        for (Complex& c : v) {
            double re = 0.0, im = 0.0;
            if (!(in >> re >> im))
                throw ParseError(std::string("reconstruction file: truncated ") + what + " in " + path);
            c = Complex{re, im};
        }
    };
    read_vec(rf.result.f, n, "signal");
    read_vec(rf.result.x, d, "latent");
    return rf;
}

/// Per-cell mean statistics, sorted by (scenario, method, sigma).
struct CellStats {
    ScenarioKind scenario;
    MethodKind method;
    double sigma = 0.0;
    double mean_snr_db = 0.0;
    double mean_error = 0.0;
    std::size_t count = 0;
};

inline std::vector<CellStats> aggregate_cells(const SweepResult& result) {
    std::map<std::tuple<int, int, double>, CellStats> cells;
    for (const SweepRecord& r : result.records) {
        auto key = std::make_tuple(static_cast<int>(r.scenario), static_cast<int>(r.method), r.sigma);
        CellStats& cell = cells[key];
        if (cell.count == 0) {
            cell.scenario = r.scenario;
            cell.method = r.method;
            cell.sigma = r.sigma;
        }
        cell.mean_snr_db += r.snr_db;
        cell.mean_error += r.relative_error;
        cell.count += 1;
    }
    std::vector<CellStats> out;
    out.reserve(cells.size());
    for (auto& [key, cell] : cells) {
        cell.mean_snr_db /= static_cast<double>(cell.count);
        cell.mean_error /= static_cast<double>(cell.count);
        out.push_back(cell);
    }
    return out;
}

namespace detail {

inline const char* method_color(MethodKind m) {
    switch (m) {
        case MethodKind::Conventional: return "#1f77b4";
        case MethodKind::Generative: return "#d62728";
        case MethodKind::Combined: return "#2ca02c";
    }
    return "#000000";
}

}  // namespace detail

/// Self-contained SVG: one panel per scenario, x = SNR (dB), y = mean relative
/// error on a log scale, one polyline per method. The CSV stays the canonical
/// artifact; this is a convenience rendering. Cells with non-finite SNR
/// (sigma = 0) are omitted.
inline void emit_plot(const SweepResult& result, const std::string& path) {
    if (result.records.empty()) throw ParameterError("emit_plot: empty sweep result");
    const std::vector<CellStats> cells = aggregate_cells(result);

    std::vector<ScenarioKind> scenarios;
    std::vector<MethodKind> methods;
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    bool any_finite = false;
    for (const CellStats& c : cells) {
        if (std::find(scenarios.begin(), scenarios.end(), c.scenario) == scenarios.end())
            scenarios.push_back(c.scenario);
        if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
            methods.push_back(c.method);
        if (!std::isfinite(c.mean_snr_db) || !std::isfinite(c.mean_error)) continue;
        any_finite = true;
        const double err = std::max(c.mean_error, 1e-12);
        x_min = std::min(x_min, c.mean_snr_db);
        x_max = std::max(x_max, c.mean_snr_db);
        y_min = std::min(y_min, std::log10(err));
        y_max = std::max(y_max, std::log10(err));
    }
    if (!any_finite) throw ParameterError("emit_plot: no finite cells to draw");
    if (x_max - x_min < 1e-9) {
        x_min -= 1.0;
        x_max += 1.0;
    }
    if (y_max - y_min < 1e-9) {
        y_min -= 0.5;
        y_max += 0.5;
    }

    constexpr double panel_w = 440.0, panel_h = 340.0;
    constexpr double ml = 64.0, mr = 18.0, mt = 36.0, mb = 46.0;
    const double width = static_cast<double>(scenarios.size()) * panel_w;
    const double height = panel_h;

    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };

    for (std::size_t si = 0; si < scenarios.size(); ++si) {
        const ScenarioKind scenario = scenarios[si];
        const double ox = static_cast<double>(si) * panel_w;
        const double plot_w = panel_w - ml - mr, plot_h = panel_h - mt - mb;
        auto px = [&](double snr) {
            return ox + ml + (snr - x_min) / (x_max - x_min) * plot_w;
        };
        auto py = [&](double err) {
            const double ly = std::log10(std::max(err, 1e-12));
            return mt + (y_max - ly) / (y_max - y_min) * plot_h;
        };

        out << "<g class=\"panel\" data-scenario=\"" << to_string(scenario) << "\">\n";
        out << "<text x=\"" << fmt(ox + panel_w / 2) << "\" y=\"20\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\" font-size=\"14\">"
            << to_string(scenario) << "</text>\n";
        // frame
        out << "<rect x=\"" << fmt(ox + ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(plot_w)
            << "\" height=\"" << fmt(plot_h)
            << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
        // x ticks
        for (int t = 0; t <= 4; ++t) {
            const double snr = x_min + (x_max - x_min) * t / 4.0;
            out << "<text x=\"" << fmt(px(snr)) << "\" y=\"" << fmt(mt + plot_h + 18)
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
                << fmt(snr) << "</text>\n";
        }
        out << "<text x=\"" << fmt(ox + ml + plot_w / 2) << "\" y=\"" << fmt(mt + plot_h + 38)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">SNR (dB)"
               "</text>\n";
        // y ticks (log)
        for (int t = 0; t <= 4; ++t) {
            const double ly = y_min + (y_max - y_min) * t / 4.0;
            out << "<text x=\"" << fmt(ox + ml - 6) << "\" y=\"" << fmt(py(std::pow(10.0, ly)) + 4)
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e"
                << fmt(ly) << "</text>\n";
        }

        for (const MethodKind method : methods) {
            std::vector<std::pair<double, double>> pts;  // (snr, err) sorted by sigma asc
            std::vector<std::pair<double, std::pair<double, double>>> with_sigma;
            for (const CellStats& c : cells) {
                if (c.scenario != scenario || c.method != method) continue;
                if (!std::isfinite(c.mean_snr_db) || !std::isfinite(c.mean_error)) continue;
                with_sigma.push_back({c.sigma, {c.mean_snr_db, c.mean_error}});
            }
            std::sort(with_sigma.begin(), with_sigma.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (const auto& [sigma, p] : with_sigma) pts.push_back(p);
            if (pts.empty()) continue;
            out << "<polyline class=\"series\" data-method=\"" << to_string(method)
                << "\" fill=\"none\" stroke=\"" << detail::method_color(method)
                << "\" stroke-width=\"1.8\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (i) out << ' ';
                out << fmt(px(pts[i].first)) << ',' << fmt(py(pts[i].second));
            }
            out << "\"/>\n";
        }
        // legend
        double ly = mt + 10;
        for (const MethodKind method : methods) {
            out << "<line x1=\"" << fmt(ox + ml + plot_w - 120) << "\" y1=\"" << fmt(ly)
                << "\" x2=\"" << fmt(ox + ml + plot_w - 100) << "\" y2=\"" << fmt(ly)
                << "\" stroke=\"" << detail::method_color(method) << "\" stroke-width=\"2\"/>\n";
            out << "<text x=\"" << fmt(ox + ml + plot_w - 94) << "\" y=\"" << fmt(ly + 4)
                << "\" font-family=\"sans-serif\" font-size=\"11\">" << to_string(method)
                << "</text>\n";
            ly += 16;
        }
        out << "</g>\n";
    }
    out << "</svg>\n";
    if (!out) throw FileError("write failed: " + path);
}

}  // namespace phasegen
