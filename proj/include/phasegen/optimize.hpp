// The unified reconstruction problem min_x ||A(B(x)) - y||^2 + lambda^2 ||w .* x||^2
// and its three instances (conventional B = I, generative B = G, combined
// B(x1,x2) = G(x1) + x2), minimized by limited-memory BFGS over the
// real-stacked variables. The objective is non-holomorphic, so all curvature
// bookkeeping lives in R^{2d}.
#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "generative.hpp"
#include "measurement.hpp"
#include "numerics.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace phasegen {

enum class MethodKind { Conventional, Generative, Combined };

inline const char* to_string(MethodKind kind) {
    switch (kind) {
        case MethodKind::Conventional: return "conventional";
        case MethodKind::Generative: return "generative";
        case MethodKind::Combined: return "combined";
    }
    return "?";
}

inline MethodKind parse_method(const std::string& name) {
    if (name == "conventional") return MethodKind::Conventional;
    if (name == "generative") return MethodKind::Generative;
    if (name == "combined") return MethodKind::Combined;
    throw ParameterError("unknown method: " + name);
}

/// Definitional weights: combined penalizes only the residual block x2;
/// conventional/generative get plain Tikhonov weights (active when lambda > 0).
inline RealVector default_weights(MethodKind kind, std::size_t k, std::size_t n) {
    switch (kind) {
        case MethodKind::Conventional: return RealVector(n, 1.0);
        case MethodKind::Generative: return RealVector(k, 1.0);
        case MethodKind::Combined: {
            RealVector w(k + n, 1.0);
            std::fill(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
            return w;
        }
    }
    throw ParameterError("default_weights: bad kind");
}

/// One of the three formulations, i.e. the inner map B together with the
/// penalty lambda and weight vector w of the generic problem.
struct Formulation {
    MethodKind kind = MethodKind::Conventional;
    std::size_t n = 0;                      // signal dimension
    std::optional<GenerativeModel> model;   // required unless Conventional
    double lambda = 0.0;
    RealVector weights;                     // length input_dim()

    std::size_t latent_dim() const { return model ? model->k : 0; }
    std::size_t input_dim() const {
        switch (kind) {
            case MethodKind::Conventional: return n;
            case MethodKind::Generative: return latent_dim();
            case MethodKind::Combined: return latent_dim() + n;
        }
        return 0;
    }

    static Formulation conventional(std::size_t n, double lambda = 0.0) {
        Formulation f;
        f.kind = MethodKind::Conventional;
        f.n = n;
        f.lambda = lambda;
        f.weights = default_weights(f.kind, 0, n);
        f.validate();
        return f;
    }

    static Formulation generative(GenerativeModel model, double lambda = 0.0) {
        Formulation f;
        f.kind = MethodKind::Generative;
        f.n = model.n;
        f.model = std::move(model);
        f.lambda = lambda;
        f.weights = default_weights(f.kind, f.model->k, f.n);
        f.validate();
        return f;
    }

    static Formulation combined(GenerativeModel model, double lambda = 0.0, RealVector w = {}) {
        Formulation f;
        f.kind = MethodKind::Combined;
        f.n = model.n;
        f.model = std::move(model);
        f.lambda = lambda;
        f.weights = w.empty() ? default_weights(f.kind, f.model->k, f.n) : std::move(w);
        f.validate();
        return f;
    }

    void validate() const {
        if (kind != MethodKind::Conventional && !model)
            throw ParameterError("formulation: model required for non-conventional kind");
        if (model && model->n != n) throw DimensionError("formulation: model/signal dim mismatch");
        if (!(lambda >= 0.0)) throw ParameterError("formulation: lambda must be >= 0");
        if (weights.size() != input_dim())
            throw DimensionError("formulation: weight length " + std::to_string(weights.size()) +
                                 " != d = " + std::to_string(input_dim()));
        for (double w : weights)
            if (!(w >= 0.0)) throw ParameterError("formulation: negative weight");
    }
};

/// B(x): identity, G z + b, or G(x1) + x2.
inline ComplexVector apply_B(const Formulation& form, const ComplexVector& x) {
    if (x.size() != form.input_dim())
        throw DimensionError("apply_B: input length " + std::to_string(x.size()) +
                             " != d = " + std::to_string(form.input_dim()));
    switch (form.kind) {
        case MethodKind::Conventional: return x;
        case MethodKind::Generative: return generate(*form.model, x);
        case MethodKind::Combined: {
            const std::size_t k = form.latent_dim();
            ComplexVector z(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k));
            ComplexVector f = generate(*form.model, z);
            for (std::size_t t = 0; t < form.n; ++t) f[t] += x[k + t];
            return f;
        }
    }
    throw ParameterError("apply_B: bad kind");
}

/// Adjoint of the linear part of B (the affine offset b does not enter):
/// identity, G^H, or the block [G | I]^H.
inline ComplexVector apply_B_adjoint(const Formulation& form, const ComplexVector& g) {
    if (g.size() != form.n)
        throw DimensionError("apply_B_adjoint: input length " + std::to_string(g.size()) +
                             " != n = " + std::to_string(form.n));
    switch (form.kind) {
        case MethodKind::Conventional: return g;
        case MethodKind::Generative: return matvec_adjoint(form.model->basis, g);
        case MethodKind::Combined: {
            ComplexVector out = matvec_adjoint(form.model->basis, g);
            out.insert(out.end(), g.begin(), g.end());
            return out;
        }
    }
    throw ParameterError("apply_B_adjoint: bad kind");
}

/// A formulation bound to a measurement operator and observed intensities.
struct UnifiedProblem {
    Formulation formulation;
    MeasurementOperator op;
    RealVector y;

    UnifiedProblem(Formulation form, MeasurementOperator m, RealVector data)
        : formulation(std::move(form)), op(std::move(m)), y(std::move(data)) {
        formulation.validate();
        if (formulation.n != op.signal_dim())
            throw DimensionError("problem: formulation/operator dim mismatch");
        if (y.size() != op.measurement_dim())
            throw DimensionError("problem: data length " + std::to_string(y.size()) +
                                 " != m = " + std::to_string(op.measurement_dim()));
        for (double v : y)
            if (!std::isfinite(v)) throw DataError("problem: non-finite measurement entry");
    }

    std::size_t input_dim() const { return formulation.input_dim(); }
};

/// Objective value and gradient in real-stacked coordinates (length 2d).
inline std::pair<double, RealVector> objective(const UnifiedProblem& problem,
                                               const ComplexVector& x) {
    const Formulation& form = problem.formulation;
    if (x.size() != form.input_dim())
        throw DimensionError("objective: input length " + std::to_string(x.size()) +
                             " != d = " + std::to_string(form.input_dim()));
    const ComplexVector f = apply_B(form, x);
    ComplexVector u = problem.op.apply(f);

    double value = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double r = std::norm(u[j]) - problem.y[j];
        value += r * r;
        u[j] *= r;  // r .* u, feeds the gradient
    }
    ComplexVector grad_f = problem.op.apply_adjoint(u);
    for (Complex& c : grad_f) c *= 4.0;
    ComplexVector grad_x = apply_B_adjoint(form, grad_f);

    const double lam2 = form.lambda * form.lambda;
    if (lam2 > 0.0) {
        for (std::size_t t = 0; t < x.size(); ++t) {
            const double w2 = form.weights[t] * form.weights[t];
            value += lam2 * w2 * std::norm(x[t]);
            grad_x[t] += 2.0 * lam2 * w2 * x[t];
        }
    }
    return {value, real_stack(grad_x)};
}

struct SolverConfig {
    std::size_t memory = 10;
    double grad_tol = 1e-8;
    std::size_t max_iter = 500;
    std::size_t restarts = 5;
    double init_scale = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (memory < 1 || max_iter < 1 || restarts < 1)
            throw ParameterError("solver config: counts must be positive");
        if (!(grad_tol > 0.0) || !(init_scale > 0.0))
            throw ParameterError("solver config: tolerances/scales must be positive");
    }
};

struct ReconstructionResult {
    ComplexVector x;                 // minimizer in C^d
    ComplexVector f;                 // apply_B(x), the signal estimate
    double objective_value = 0.0;
    double residual = 0.0;           // ||A(B(x)) - y||_2
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t restart_index = 0;
    std::vector<double> objective_history;  // accepted iterates, non-increasing
};

namespace detail {

using StackedObjective = std::function<double(const RealVector&, RealVector&)>;

struct LbfgsState {
    RealVector x;
    double value = 0.0;
    RealVector grad;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> history;
};

inline double dot(const RealVector& a, const RealVector& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

// Strong Wolfe line search (c1 = 1e-4, c2 = 0.9, initial step 1) following the
// usual bracket + zoom scheme with bisection inside zoom, both stages bounded.
// Returns the accepted step, or nullopt when no acceptable step was found.
// On success x/value/grad hold the accepted point.
inline std::optional<double> wolfe_line_search(const StackedObjective& fn, RealVector& x,
                                               double& value, RealVector& grad,
                                               const RealVector& direction) {
    constexpr double c1 = 1e-4;
    constexpr double c2 = 0.9;
    constexpr int max_bracket = 50;
    constexpr int max_zoom = 50;

    const RealVector x0 = x;
    const double phi0 = value;
    const double dphi0 = dot(grad, direction);
    if (!(dphi0 < 0.0)) return std::nullopt;  // not a descent direction

    RealVector x_try(x0.size());
    RealVector g_try(x0.size());
    auto eval = [&](double alpha, double& phi, double& dphi) {
        for (std::size_t i = 0; i < x0.size(); ++i) x_try[i] = x0[i] + alpha * direction[i];
        phi = fn(x_try, g_try);
        if (!std::isfinite(phi)) phi = std::numeric_limits<double>::infinity();
        dphi = dot(g_try, direction);
    };
    auto accept = [&](double alpha, double phi) {
        x = x_try;
        value = phi;
        grad = g_try;
        return alpha;
    };

    double alpha_prev = 0.0, phi_prev = phi0, dphi_prev = dphi0;
    double alpha = 1.0;
    double lo = 0.0, hi = 0.0, phi_lo = phi0;
    bool bracketed = false;

    for (int i = 0; i < max_bracket; ++i) {
        double phi = 0.0, dphi = 0.0;
        eval(alpha, phi, dphi);
        if (phi > phi0 + c1 * alpha * dphi0 || (i > 0 && phi >= phi_prev)) {
            lo = alpha_prev; phi_lo = phi_prev; hi = alpha;
            bracketed = true;
            break;
        }
        if (std::abs(dphi) <= -c2 * dphi0) return accept(alpha, phi);
        if (dphi >= 0.0) {
            lo = alpha; phi_lo = phi; hi = alpha_prev;
            bracketed = true;
            break;
        }
        alpha_prev = alpha; phi_prev = phi; dphi_prev = dphi;
        alpha *= 2.0;
    }
    (void)dphi_prev;
    if (!bracketed) return std::nullopt;

    for (int i = 0; i < max_zoom; ++i) {
        const double mid = 0.5 * (lo + hi);
        double phi = 0.0, dphi = 0.0;
        eval(mid, phi, dphi);
        if (phi > phi0 + c1 * mid * dphi0 || phi >= phi_lo) {
            hi = mid;
        } else {
            if (std::abs(dphi) <= -c2 * dphi0) return accept(mid, phi);
            if (dphi * (hi - lo) >= 0.0) hi = lo;
            lo = mid;
            phi_lo = phi;
        }
        if (std::abs(hi - lo) <= 1e-16 * std::max(1.0, std::abs(lo))) break;
    }
    // Last resort: a plain Armijo point still guarantees descent.
    if (lo > 0.0 && phi_lo <= phi0 + c1 * lo * dphi0) {
        double phi = 0.0, dphi = 0.0;
        eval(lo, phi, dphi);
        if (phi <= phi0 + c1 * lo * dphi0) return accept(lo, phi);
    }
    return std::nullopt;
}

// Limited-memory BFGS with two-loop recursion. Curvature pairs with
// s.y <= 1e-10 ||s|| ||y|| are skipped to keep the implicit Hessian positive
// definite. Terminates when ||grad|| <= grad_tol * max(1, |value|).
inline LbfgsState minimize_lbfgs(const StackedObjective& fn, RealVector x0, std::size_t memory,
                                 double grad_tol, std::size_t max_iter) {
    LbfgsState st;
    st.x = std::move(x0);
    st.grad.resize(st.x.size());
    st.value = fn(st.x, st.grad);
    st.history.push_back(st.value);

    std::deque<RealVector> s_hist, y_hist;
    std::deque<double> rho_hist;

    RealVector direction(st.x.size());
    for (st.iterations = 0; st.iterations < max_iter; ++st.iterations) {
        const double gnorm = norm2(st.grad);
        if (gnorm <= grad_tol * std::max(1.0, std::abs(st.value))) {
            st.converged = true;
            return st;
        }

        // two-loop recursion for d = -H grad
        RealVector q = st.grad;
        std::vector<double> alpha_coef(s_hist.size());
        for (std::size_t idx = s_hist.size(); idx-- > 0;) {
            alpha_coef[idx] = rho_hist[idx] * dot(s_hist[idx], q);
            for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha_coef[idx] * y_hist[idx][i];
        }
        if (!s_hist.empty()) {
            const double yy = dot(y_hist.back(), y_hist.back());
            const double gamma = yy > 0.0 ? dot(s_hist.back(), y_hist.back()) / yy : 1.0;
            for (double& v : q) v *= gamma;
        }
        for (std::size_t idx = 0; idx < s_hist.size(); ++idx) {
            const double beta = rho_hist[idx] * dot(y_hist[idx], q);
            for (std::size_t i = 0; i < q.size(); ++i)
                q[i] += (alpha_coef[idx] - beta) * s_hist[idx][i];
        }
        for (std::size_t i = 0; i < q.size(); ++i) direction[i] = -q[i];

        if (!(dot(direction, st.grad) < 0.0)) {
            // defective curvature model; fall back to steepest descent
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            for (std::size_t i = 0; i < direction.size(); ++i) direction[i] = -st.grad[i];
        }

        const RealVector x_prev = st.x;
        const RealVector g_prev = st.grad;
        const double value_prev = st.value;
        const std::optional<double> step = wolfe_line_search(fn, st.x, st.value, st.grad, direction);
        if (!step) {
            st.converged = false;  // stuck; best accepted iterate is current x
            return st;
        }
        assert(st.value <= value_prev);
        st.history.push_back(st.value);

        RealVector s(st.x.size()), yv(st.x.size());
        for (std::size_t i = 0; i < st.x.size(); ++i) {
            s[i] = st.x[i] - x_prev[i];
            yv[i] = st.grad[i] - g_prev[i];
        }
        const double sy = dot(s, yv);
        if (sy > 1e-10 * norm2(s) * norm2(yv)) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(yv));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
    }
    st.converged = false;  // max_iter reached
    return st;
}

}  // namespace detail

/// Minimizes a generic real-stacked objective with the same engine the
/// reconstruction path uses. Exposed for direct use and for sanity tests.
inline detail::LbfgsState minimize_stacked(const detail::StackedObjective& fn, RealVector x0,
                                           std::size_t memory = 10, double grad_tol = 1e-8,
                                           std::size_t max_iter = 500) {
    return detail::minimize_lbfgs(fn, std::move(x0), memory, grad_tol, max_iter);
}

/// Single L-BFGS run from the given starting point.
inline ReconstructionResult lbfgs_minimize(const UnifiedProblem& problem, const ComplexVector& x0,
                                           const SolverConfig& config) {
    config.validate();
    if (x0.size() != problem.input_dim())
        throw DimensionError("lbfgs_minimize: start length " + std::to_string(x0.size()) +
                             " != d = " + std::to_string(problem.input_dim()));
    const detail::StackedObjective fn = [&problem](const RealVector& u, RealVector& grad) {
        auto [value, g] = objective(problem, real_unstack(u));
        grad = std::move(g);
        return value;
    };
    detail::LbfgsState st =
        detail::minimize_lbfgs(fn, real_stack(x0), config.memory, config.grad_tol, config.max_iter);

    ReconstructionResult res;
    res.x = real_unstack(st.x);
    res.f = apply_B(problem.formulation, res.x);
    res.objective_value = st.value;
    res.iterations = st.iterations;
    res.converged = st.converged;
    res.objective_history = std::move(st.history);
    const RealVector fwd = problem.op.forward(res.f);
    double acc = 0.0;
    for (std::size_t j = 0; j < fwd.size(); ++j) {
        const double r = fwd[j] - problem.y[j];
        acc += r * r;
    }
    res.residual = std::sqrt(acc);
    return res;
}

/// Multi-restart driver: `restarts` seeded complex-Gaussian initializations,
/// returns the run with the smallest objective value. Deterministic per seed.
inline ReconstructionResult reconstruct(const UnifiedProblem& problem, const SolverConfig& config) {
    config.validate();
    const std::size_t d = problem.input_dim();
    ReconstructionResult best;
    for (std::size_t r = 0; r < config.restarts; ++r) {
        Rng rng(derive_seed(config.seed, {0x7e57a27u, r}));
        ComplexVector x0(d);
        for (Complex& c : x0) c = rng.complex_gaussian(config.init_scale);
        ReconstructionResult res = lbfgs_minimize(problem, x0, config);
        res.restart_index = r;
        if (r == 0 || res.objective_value < best.objective_value) best = std::move(res);
    }
    return best;
}

}  // namespace phasegen
