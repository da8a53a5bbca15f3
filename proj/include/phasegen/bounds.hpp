// Empirical bi-Lipschitz constants and the reconstruction-error bounds they
// feed. No certified constants exist for masked Fourier intensity maps, so the
// estimates here are sampled over a declared domain and reported as such:
// every estimate carries its sampling-domain descriptor and pair count.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "generative.hpp"
#include "measurement.hpp"
#include "numerics.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace phasegen {

/// Two-sided empirical Lipschitz estimate of a map over a sampled domain.
/// The single-constant convention used by the bounds is folded():
/// alpha = max(upper, 1/lower), so alpha^-1 d(u,v) <= d(Mu,Mv) <= alpha d(u,v)
/// holds on the sampled pairs.
struct LipschitzEstimate {
    double upper = 0.0;
    double lower = 0.0;
    std::size_t num_pairs = 0;
    std::uint64_t seed = 0;
    std::string domain;

    double folded() const { return std::max(upper, 1.0 / lower); }
};

/// Seeded sampling domain for estimate_bilipschitz. `draw` must consume the
/// provided generator only, so a common seed prefix yields nested pair sets.
struct DomainSampler {
    std::string description;
    std::uint64_t seed = 0;
    std::function<ComplexVector(Rng&)> draw;
};

/// Signals near the model's range: generate(sample_latent) plus a complex
/// Gaussian perturbation of the given per-component standard deviation.
inline DomainSampler signal_domain_sampler(const GenerativeModel& model, std::size_t n_train,
                                           double perturb_std, std::uint64_t seed) {
    DomainSampler s;
    std::ostringstream desc;
    desc << "in-range signals (n_train=" << n_train << ") + gaussian perturbation std="
         << perturb_std;
    s.description = desc.str();
    s.seed = seed;
    s.draw = [model, n_train, perturb_std](Rng& rng) {
        ComplexVector z(model.k);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n_train));
        for (std::size_t i = 0; i < model.k; ++i)
            z[i] = rng.complex_gaussian(model.spectrum[i] * scale);
        ComplexVector f = generate(model, z);
        for (Complex& c : f) c += rng.complex_gaussian(perturb_std);
        return f;
    };
    return s;
}

/// Latent vectors distributed as sample_latent.
inline DomainSampler latent_domain_sampler(const GenerativeModel& model, std::size_t n_train,
                                           std::uint64_t seed) {
    DomainSampler s;
    std::ostringstream desc;
    desc << "latents from training spectrum (n_train=" << n_train << ")";
    s.description = desc.str();
    s.seed = seed;
    s.draw = [model, n_train](Rng& rng) {
        ComplexVector z(model.k);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n_train));
        for (std::size_t i = 0; i < model.k; ++i)
            z[i] = rng.complex_gaussian(model.spectrum[i] * scale);
        return z;
    };
    return s;
}

namespace detail {

inline double diff_norm(const RealVector& a, const RealVector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

inline double diff_norm(const ComplexVector& a, const ComplexVector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
    return std::sqrt(acc);
}

}  // namespace detail

/// Ratio extremes of ||map(u)-map(v)|| / ||u-v|| over num_pairs sampled pairs.
/// Degenerate pairs (||u-v|| <= 1e-12) are discarded. With a common seed and a
/// growing pair count the upper estimate is non-decreasing and the lower
/// non-increasing.
template <typename Map>
LipschitzEstimate estimate_bilipschitz(Map&& map, const DomainSampler& sampler,
                                       std::size_t num_pairs) {
    if (num_pairs < 2) throw ParameterError("estimate_bilipschitz: need at least 2 pairs");
    Rng rng(sampler.seed);
    LipschitzEstimate est;
    est.seed = sampler.seed;
    est.domain = sampler.description;
    est.upper = 0.0;
    est.lower = std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    for (std::size_t p = 0; p < num_pairs; ++p) {
        const ComplexVector u = sampler.draw(rng);
        const ComplexVector v = sampler.draw(rng);
        const double den = detail::diff_norm(u, v);
        if (den <= 1e-12) continue;
        const double num = detail::diff_norm(map(u), map(v));
        const double ratio = num / den;
        est.upper = std::max(est.upper, ratio);
        est.lower = std::min(est.lower, ratio);
        ++used;
    }
    if (used == 0) throw NumericalError("estimate_bilipschitz: all sampled pairs degenerate");
    est.num_pairs = used;
    return est;
}

/// ||f~ - f0|| <= 2 alpha ||eps|| for the conventional minimizer.
inline double lemma1_bound(double alpha, double eps_norm) {
    if (!(alpha >= 1.0)) throw ParameterError("lemma1_bound: alpha must be >= 1");
    if (!(eps_norm >= 0.0)) throw ParameterError("lemma1_bound: eps_norm must be >= 0");
    return 2.0 * alpha * eps_norm;
}

/// ||f~ - f0|| <= (1 + 2 alpha beta gamma) bias + 2 beta gamma ||eps|| for the
/// generative minimizer, bias = ||G(z0) - f0||.
inline double lemma2_bound(double alpha, double beta, double gamma, double bias, double eps_norm) {
    if (!(alpha >= 1.0) || !(beta >= 1.0) || !(gamma >= 1.0))
        throw ParameterError("lemma2_bound: constants must be >= 1");
    if (!(bias >= 0.0) || !(eps_norm >= 0.0))
        throw ParameterError("lemma2_bound: bias/eps_norm must be >= 0");
    return (1.0 + 2.0 * alpha * beta * gamma) * bias + 2.0 * beta * gamma * eps_norm;
}

/// ||f~ - f0|| <= lambda alpha bias + 2 alpha ||eps|| for the combined
/// minimizer; reduces to lemma1_bound at lambda = 0.
inline double lemma3_bound(double lambda, double alpha, double bias, double eps_norm) {
    if (!(lambda >= 0.0)) throw ParameterError("lemma3_bound: lambda must be >= 0");
    if (!(alpha >= 1.0)) throw ParameterError("lemma3_bound: alpha must be >= 1");
    if (!(bias >= 0.0) || !(eps_norm >= 0.0))
        throw ParameterError("lemma3_bound: bias/eps_norm must be >= 0");
    return lambda * alpha * bias + 2.0 * alpha * eps_norm;
}

/// Bias bracket from the residual rho = ||A(G(z~)) - y|| and the noise level
/// sigma = ||eps||: alpha^-1 (rho - sigma) <= bias <= alpha (rho + sigma).
/// The lower endpoint is clamped at 0 since the bias is a norm.
inline std::pair<double, double> bias_interval(double alpha, double residual, double sigma) {
    if (!(alpha >= 1.0)) throw ParameterError("bias_interval: alpha must be >= 1");
    if (!(residual >= 0.0) || !(sigma >= 0.0))
        throw ParameterError("bias_interval: residual/sigma must be >= 0");
    const double lo = std::max(0.0, (residual - sigma) / alpha);
    const double hi = alpha * (residual + sigma);
    return {lo, hi};
}

/// Evaluated bounds plus every input they were computed from. bias-dependent
/// entries are meaningful only when bias_known (i.e. a ground truth exists).
struct BoundReport {
    double lemma1 = 0.0;
    double lemma2 = 0.0;
    double lemma3 = 0.0;
    double bias_lo = 0.0;
    double bias_hi = 0.0;
    LipschitzEstimate alpha;
    LipschitzEstimate beta;
    LipschitzEstimate gamma;
    double lambda = 0.0;
    double bias = 0.0;
    bool bias_known = false;
    double eps_norm = 0.0;
    double residual = 0.0;
    double sigma = 0.0;  // noise level fed to the interval, ||eps||_2
};

/// Assembles a report from the folded constants; bias < 0 means "unknown".
inline BoundReport make_bound_report(const LipschitzEstimate& alpha, const LipschitzEstimate& beta,
                                     const LipschitzEstimate& gamma, double lambda, double bias,
                                     double eps_norm, double residual, double sigma) {
    BoundReport rep;
    rep.alpha = alpha;
    rep.beta = beta;
    rep.gamma = gamma;
    rep.lambda = lambda;
    rep.eps_norm = eps_norm;
    rep.residual = residual;
    rep.sigma = sigma;
    const double a = alpha.folded();
    const double b = std::max(1.0, beta.folded());
    const double g = std::max(1.0, gamma.folded());
    rep.lemma1 = lemma1_bound(a, eps_norm);
    if (bias >= 0.0) {
        rep.bias = bias;
        rep.bias_known = true;
        rep.lemma2 = lemma2_bound(a, b, g, bias, eps_norm);
        rep.lemma3 = lemma3_bound(lambda, a, bias, eps_norm);
    }
    const auto [lo, hi] = bias_interval(a, residual, sigma);
    rep.bias_lo = lo;
    rep.bias_hi = hi;
    return rep;
}

namespace detail {

inline void put_kv(std::ofstream& out, const std::string& key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << key << ' ' << buf << '\n';
}

inline void put_estimate(std::ofstream& out, const std::string& prefix,
                         const LipschitzEstimate& est) {
    put_kv(out, prefix, est.folded());
    put_kv(out, prefix + "_upper", est.upper);
    put_kv(out, prefix + "_lower", est.lower);
    out << prefix << "_pairs " << est.num_pairs << '\n';
    out << prefix << "_seed " << est.seed << '\n';
    out << prefix << "_domain " << est.domain << '\n';
}

}  // namespace detail

/// Flat `name value` lines; domain descriptors take the rest of their line.
inline void save_bound_report(const BoundReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    detail::put_kv(out, "lemma1", rep.lemma1);
    if (rep.bias_known) {
        detail::put_kv(out, "lemma2", rep.lemma2);
        detail::put_kv(out, "lemma3", rep.lemma3);
        detail::put_kv(out, "bias", rep.bias);
    }
    detail::put_kv(out, "bias_lo", rep.bias_lo);
    detail::put_kv(out, "bias_hi", rep.bias_hi);
    detail::put_kv(out, "lambda", rep.lambda);
    detail::put_kv(out, "eps_norm", rep.eps_norm);
    detail::put_kv(out, "residual", rep.residual);
    detail::put_kv(out, "sigma", rep.sigma);
    detail::put_estimate(out, "alpha", rep.alpha);
    detail::put_estimate(out, "beta", rep.beta);
    detail::put_estimate(out, "gamma", rep.gamma);
    if (!out) throw FileError("write failed: " + path);
}

inline BoundReport load_bound_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto space = line.find(' ');
        if (space == std::string::npos)
            throw ParseError("bound report: missing value at line " + std::to_string(lineno) +
                             " in " + path);
        kv[line.substr(0, space)] = line.substr(space + 1);
    }
    auto num = [&](const std::string& key, double fallback = 0.0) {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw ParseError("bound report: bad number for key '" + key + "' in " + path);
        }
    };
    auto fill_estimate = [&](const std::string& prefix, LipschitzEstimate& est) {
        est.upper = num(prefix + "_upper", 1.0);
        est.lower = num(prefix + "_lower", 1.0);
        est.num_pairs = static_cast<std::size_t>(num(prefix + "_pairs", 0.0));
        est.seed = static_cast<std::uint64_t>(num(prefix + "_seed", 0.0));
        auto it = kv.find(prefix + "_domain");
        if (it != kv.end()) est.domain = it->second;
    };
    BoundReport rep;
    rep.lemma1 = num("lemma1");
    rep.bias_known = kv.count("bias") > 0;
    if (rep.bias_known) {
        rep.lemma2 = num("lemma2");
        rep.lemma3 = num("lemma3");
        rep.bias = num("bias");
    }
    rep.bias_lo = num("bias_lo");
    rep.bias_hi = num("bias_hi");
    rep.lambda = num("lambda");
    rep.eps_norm = num("eps_norm");
    rep.residual = num("residual");
    rep.sigma = num("sigma");
    fill_estimate("alpha", rep.alpha);
    fill_estimate("beta", rep.beta);
    fill_estimate("gamma", rep.gamma);
    if (rep.bias_lo > rep.bias_hi) throw DataError("bound report: inverted interval in " + path);
    return rep;
}

}  // namespace phasegen
