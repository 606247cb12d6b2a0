#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "mlis/errors.hpp"
#include "mlis/linalg.hpp"

namespace mlis {

/// exp(-lambda.w - |lambda|^2 T / 2): the Girsanov density reweighting the
/// shifted dynamics back to the original expectation. Overflow saturates to
/// inf/0 with IEEE exp semantics.
inline double girsanov_minus(std::span<const double> w, std::span<const double> lambda,
                             double horizon) {
    return std::exp(-dot(lambda, w) - 0.5 * dot(lambda, lambda) * horizon);
}

/// exp(-lambda.w + |lambda|^2 T / 2): the weight in second-moment expressions
/// under the original measure.
inline double girsanov_plus(std::span<const double> w, std::span<const double> lambda,
                            double horizon) {
    return std::exp(-dot(lambda, w) + 0.5 * dot(lambda, lambda) * horizon);
}

/// Precomputed per-level sample material for the SAA objective: nonnegative
/// weights h_k (squared payoffs at level 0, normalized squared payoff
/// differences at level >= 1) paired with the standard Brownian terminals.
/// Immutable after construction; generated once before Newton-Raphson starts.
struct WeightedSampleSet {
    Vec weights;        // h_k >= 0, length N'
    Vec brownians;      // N' x q row-major terminal vectors W_k
    std::size_t dim = 0;  // q
    double horizon = 1.0; // T
    std::size_t level = 0;

    std::size_t size() const { return weights.size(); }
    std::span<const double> brownian(std::size_t k) const {
        return {brownians.data() + k * dim, dim};
    }
    bool degenerate() const {
        for (double h : weights)
            if (h > 0.0) return true && false;
        return true;
    }
    void validate() const {
        if (weights.size() * dim != brownians.size())
            throw dimension_error("sample set: weights/brownians size mismatch");
        for (double h : weights)
            if (!(h >= 0.0) || !std::isfinite(h))
                throw numeric_error("sample set: weights must be finite and nonnegative");
    }
};

struct NewtonOptions {
    double gradient_tolerance = 1e-8;
    int max_iterations = 50;
    Vec initial;  // defaults to 0 in R^q when empty
};

/// Value, gradient and Hessian of the log-reformulated objective
///   u(lambda) = |lambda|^2 T / 2 + log( (1/N') sum_k h_k e^{-lambda.W_k} ).
struct SaaEval {
    double value = 0.0;
    Vec gradient;
    Matrix hessian;
};

/// Evaluates u with its closed-form derivatives:
///   grad u = lambda T - Gibbs mean of W,
///   hess u = T I_q + Gibbs covariance of W,
/// where the Gibbs weights are h_k e^{-lambda.W_k}. The mean is computed
/// after subtracting max_k(log h_k - lambda.W_k); zero-weight samples are
/// skipped. The Hessian's smallest eigenvalue is >= T by Cauchy-Schwarz.
inline SaaEval saa_objective(const WeightedSampleSet& set, std::span<const double> lambda) {
    const std::size_t q = set.dim;
    const std::size_t n = set.size();
    if (lambda.size() != q) throw dimension_error("saa_objective: lambda length != q");

    // Pass 1: stabilization shift.
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const double h = set.weights[k];
        if (h <= 0.0) continue;
        shift = std::max(shift, std::log(h) - dot(lambda, set.brownian(k)));
    }
    if (!std::isfinite(shift))
        throw degenerate_set_error("saa_objective: all weights are zero (log of 0)");

    double s0 = 0.0;            // sum of Gibbs weights (shifted)
    Vec s1(q, 0.0);             // sum of w * Gibbs
    Matrix s2(q, q);            // sum of w w^T * Gibbs
    for (std::size_t k = 0; k < n; ++k) {
        const double h = set.weights[k];
        if (h <= 0.0) continue;
        const auto w = set.brownian(k);
        const double g = std::exp(std::log(h) - dot(lambda, w) - shift);
        s0 += g;
        for (std::size_t i = 0; i < q; ++i) {
            s1[i] += g * w[i];
            for (std::size_t j = 0; j <= i; ++j) s2(i, j) += g * w[i] * w[j];
        }
    }

    SaaEval out;
    const double t = set.horizon;
    out.value = 0.5 * dot(lambda, lambda) * t + shift + std::log(s0) -
                std::log(static_cast<double>(n));
    out.gradient.resize(q);
    for (std::size_t i = 0; i < q; ++i) out.gradient[i] = lambda[i] * t - s1[i] / s0;
    out.hessian = Matrix(q, q);
    for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double cov = s2(i, j) / s0 - (s1[i] / s0) * (s1[j] / s0);
            out.hessian(i, j) = cov;
            out.hessian(j, i) = cov;
        }
        out.hessian(i, i) += t;
    }
    return out;
}

/// Empirical second moment v(lambda) = (1/N') sum h_k E+(W_k, lambda, T),
/// computed as e^{u(lambda)} through the stabilized objective (the two are
/// identical by completing the |lambda|^2 T terms).
inline double empirical_variance_v(const WeightedSampleSet& set, std::span<const double> lambda) {
    bool all_zero = true;
    for (double h : set.weights)
        if (h > 0.0) { all_zero = false; break; }
    if (all_zero) return 0.0;
    return std::exp(saa_objective(set, lambda).value);
}

struct NewtonResult {
    Vec lambda_hat;
    int iterations = 0;
    double gradient_norm = 0.0;
};

/// Newton-Raphson on u. Pure Newton steps; if a trial point sends the
/// objective non-finite, the step is halved (up to 30 times). Deterministic:
/// the same set and options always return the same iterate.
inline NewtonResult newton_solve(const WeightedSampleSet& set, const NewtonOptions& opts = {}) {
    set.validate();
    if (!(opts.gradient_tolerance > 0.0))
        throw argument_error("newton_solve: tolerance must be positive");
    if (opts.max_iterations < 1) throw argument_error("newton_solve: max_iterations must be >= 1");

    const std::size_t q = set.dim;
    Vec lambda = opts.initial.empty() ? Vec(q, 0.0) : opts.initial;
    if (lambda.size() != q) throw dimension_error("newton_solve: initial point length != q");

    SaaEval eval = saa_objective(set, lambda);
    for (int iter = 0; iter <= opts.max_iterations; ++iter) {
        const double gnorm = norm2(eval.gradient);
        if (gnorm <= opts.gradient_tolerance)
            return {std::move(lambda), iter, gnorm};
        if (iter == opts.max_iterations)
            throw convergence_error("newton_solve: maximum iterations exceeded", lambda, gnorm,
                                    iter);
        const Vec step = spd_solve(eval.hessian, eval.gradient);
        double scale = 1.0;
        for (int halving = 0; halving <= 30; ++halving) {
            Vec trial(q);
            bool finite = true;
            for (std::size_t i = 0; i < q; ++i) {
                trial[i] = lambda[i] - scale * step[i];
                finite = finite && std::isfinite(trial[i]);
            }
            SaaEval trial_eval;
            if (finite) {
                trial_eval = saa_objective(set, trial);
                finite = std::isfinite(trial_eval.value) && std::isfinite(norm2(trial_eval.gradient));
            }
            if (finite) {
                lambda = std::move(trial);
                eval = std::move(trial_eval);
                break;
            }
            if (halving == 30)
                throw convergence_error("newton_solve: step halving exhausted", lambda,
                                        norm2(eval.gradient), iter);
            scale *= 0.5;
        }
    }
    return {};  // unreachable
}

}  // namespace mlis
