#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "mlis/errors.hpp"
#include "mlis/linalg.hpp"
#include "mlis/models.hpp"
#include "mlis/rng.hpp"

namespace mlis {

/// Terminal values of the two Euler schemes sharing one Brownian path, plus
/// the terminal value of the standard (uncorrelated, unshifted) driving
/// motion used by the Girsanov weights. At level 0 the coarse leg is absent.
struct CoupledPathSample {
    Vec fine_terminal;
    Vec coarse_terminal;
    Vec w_terminal;
    bool has_coarse() const { return !coarse_terminal.empty(); }
};

/// Per-worker scratch space; path generation never allocates once this is warm.
struct PathWorkspace {
    Vec increments;   // fine-grid standard increments, steps x q row-major
    Vec coarse;       // aggregated increments for the coarse leg
    Vec drift;        // state_dim
    Matrix diffusion; // state_dim x q
    Vec shifted;      // q
    Vec noise;        // q, correlated increment L(dz + lambda dt)
};

inline std::size_t pow_int(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (r > (std::size_t{1} << 40) / base)
            throw argument_error("pow_int: grid size overflow");
        r *= base;
    }
    return r;
}

/// Evolves `state` in place through `steps` uniform Euler steps on [0, T],
/// consuming the given standard increments and applying the drift shift
/// lambda to the standard motion:
///     X_{i+1} = X_i + b(t_i, X_i) dt + sigma(t_i, X_i) L (dz_i + lambda dt).
/// This is the single stepping core shared by every scheme; the coupled
/// coarse leg and any replay of it go through here with aggregated increments.
inline void euler_path_from_increments(const SdeModel& model,
                                       std::span<const double> increments, std::size_t steps,
                                       std::span<const double> lambda, PathWorkspace& ws,
                                       std::span<double> state) {
    const std::size_t q = model.driving_dim();
    const std::size_t n = model.state_dim();
    if (steps == 0) throw argument_error("euler: steps must be >= 1");
    if (increments.size() != steps * q) throw dimension_error("euler: increments size != steps*q");
    if (lambda.size() != q) throw dimension_error("euler: lambda length != driving dimension");
    for (double l : lambda)
        if (!std::isfinite(l)) throw numeric_error("euler: non-finite drift shift");

    const double dt = model.horizon / static_cast<double>(steps);
    ws.drift.resize(n);
    ws.shifted.resize(q);
    ws.noise.resize(q);
    const Matrix& corr = model.correlation_factor;

    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        drift_diffusion(model, t, state, ws.drift, ws.diffusion);
        const double* dz = increments.data() + i * q;
        for (std::size_t j = 0; j < q; ++j) ws.shifted[j] = dz[j] + lambda[j] * dt;
        // lower-triangular matvec
        for (std::size_t r = 0; r < q; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c <= r; ++c) s += corr(r, c) * ws.shifted[c];
            ws.noise[r] = s;
        }
        for (std::size_t r = 0; r < n; ++r) {
            double s = ws.drift[r] * dt;
            for (std::size_t c = 0; c < q; ++c) s += ws.diffusion(r, c) * ws.noise[c];
            state[r] += s;
        }
    }
}

/// n-step Euler terminal of the lambda-shifted dynamics plus the standard
/// Brownian terminal value (unaffected by the shift).
inline std::pair<Vec, Vec> euler_single(const SdeModel& model, std::size_t n,
                                        std::span<const double> lambda, const RngStreamKey& key,
                                        PathWorkspace& ws) {
    if (n == 0) throw argument_error("euler_single: n must be >= 1");
    const std::size_t q = model.driving_dim();
    ws.increments.resize(n * q);
    sample_brownian_increments(key, n, q, model.horizon, ws.increments);
    Vec state = model.initial_state();
    euler_path_from_increments(model, ws.increments, n, lambda, ws, state);
    Vec w(q, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < q; ++j) w[j] += ws.increments[i * q + j];
    return {std::move(state), std::move(w)};
}

inline std::pair<Vec, Vec> euler_single(const SdeModel& model, std::size_t n,
                                        std::span<const double> lambda, const RngStreamKey& key) {
    PathWorkspace ws;
    return euler_single(model, n, lambda, key, ws);
}

/// Simulates the level-ell coupled pair: the fine scheme on m^ell steps and,
/// for ell >= 1, the coarse scheme on m^(ell-1) steps whose increments are
/// the sums of m consecutive fine increments accumulated in time order.
inline void euler_coupled_pair(const SdeModel& model, std::size_t level, std::size_t m,
                               std::span<const double> lambda, const RngStreamKey& key,
                               PathWorkspace& ws, CoupledPathSample& out) {
    if (m < 2) throw argument_error("euler_coupled_pair: m must be >= 2");
    const std::size_t q = model.driving_dim();
    const std::size_t fine_steps = pow_int(m, level);

    ws.increments.resize(fine_steps * q);
    sample_brownian_increments(key, fine_steps, q, model.horizon, ws.increments);

    out.fine_terminal = model.initial_state();
    euler_path_from_increments(model, ws.increments, fine_steps, lambda, ws, out.fine_terminal);

    out.w_terminal.assign(q, 0.0);
    for (std::size_t i = 0; i < fine_steps; ++i)
        for (std::size_t j = 0; j < q; ++j) out.w_terminal[j] += ws.increments[i * q + j];

    if (level == 0) {
        out.coarse_terminal.clear();
        return;
    }
    const std::size_t coarse_steps = fine_steps / m;
    ws.coarse.assign(coarse_steps * q, 0.0);
    for (std::size_t i = 0; i < fine_steps; ++i) {
        const std::size_t g = i / m;
        for (std::size_t j = 0; j < q; ++j) ws.coarse[g * q + j] += ws.increments[i * q + j];
    }
    out.coarse_terminal = model.initial_state();
    euler_path_from_increments(model, ws.coarse, coarse_steps, lambda, ws, out.coarse_terminal);
}

inline CoupledPathSample euler_coupled_pair(const SdeModel& model, std::size_t level,
                                            std::size_t m, std::span<const double> lambda,
                                            const RngStreamKey& key) {
    PathWorkspace ws;
    CoupledPathSample out;
    euler_coupled_pair(model, level, m, lambda, key, ws, out);
    return out;
}

}  // namespace mlis
