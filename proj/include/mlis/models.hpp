#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mlis/errors.hpp"
#include "mlis/linalg.hpp"

namespace mlis {

enum class ModelKind { LocalVol, Heston, ConstantVol };

/// Dupire-style local volatility with the smile bottom at the forward money.
/// Bounded by 0.72 and strictly positive for every finite (t, x).
inline double local_vol(double t, double x, double r, double s) {
    if (!std::isfinite(t) || !std::isfinite(x))
        throw numeric_error("local_vol: non-finite input");
    const double moneyness = x * std::exp(r * t) - s;
    return 0.6 * (1.2 - std::exp(-0.1 * t) * std::exp(-0.001 * moneyness * moneyness)) *
           std::exp(-0.05 * std::sqrt(t));
}

/// Diffusion model catalogue. The state is the price vector for LocalVol and
/// ConstantVol; for Heston it is prices first, variances second, driven by a
/// 2d-dimensional Brownian motion with the joint covariance of (B, W).
struct SdeModel {
    ModelKind kind = ModelKind::ConstantVol;
    std::size_t assets = 1;  // d
    Vec spot;                // length d
    double rate = 0.0;       // r, per year
    double horizon = 1.0;    // T, years

    double smile_center = 100.0;  // LocalVol s
    double sigma0 = 0.2;          // ConstantVol lognormal volatility

    Vec kappa;         // Heston reversion rates
    Vec mean_level;    // Heston long-run variances a
    Vec vol_of_vol;    // Heston nu
    Vec gamma_corr;    // Heston asset/vol correlations, each in (-1, 1)
    Vec v0;            // Heston initial variances

    double asset_corr = 0.0;      // rho, pairwise asset correlation
    Matrix correlation_factor;    // lower-triangular q x q, L L^T = target

    std::size_t driving_dim() const { return kind == ModelKind::Heston ? 2 * assets : assets; }
    std::size_t state_dim() const { return kind == ModelKind::Heston ? 2 * assets : assets; }

    Vec initial_state() const {
        Vec x = spot;
        if (kind == ModelKind::Heston) x.insert(x.end(), v0.begin(), v0.end());
        return x;
    }
};

/// Equicorrelation matrix (1 on the diagonal, rho off it) for the assets.
inline Matrix asset_covariance(std::size_t d, double rho) {
    Matrix g(d, d, rho);
    for (std::size_t i = 0; i < d; ++i) g(i, i) = 1.0;
    return g;
}

/// Joint covariance of the Heston driving pair (B, W):
///   [ Gamma_S          Gamma_S D        ]      D = diag(gamma)
///   [ D Gamma_S   D Gamma_S D + I - D^2 ]
inline Matrix heston_joint_covariance(std::size_t d, double rho, std::span<const double> gamma) {
    const Matrix gs = asset_covariance(d, rho);
    Matrix g(2 * d, 2 * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            g(i, j) = gs(i, j);
            g(i, d + j) = gs(i, j) * gamma[j];
            g(d + i, j) = gamma[i] * gs(i, j);
            g(d + i, d + j) = gamma[i] * gs(i, j) * gamma[j];
        }
    for (std::size_t i = 0; i < d; ++i)
        g(d + i, d + i) += 1.0 - gamma[i] * gamma[i];
    return g;
}

namespace detail {

inline void validate_common(const SdeModel& m) {
    if (m.assets == 0) throw argument_error("model: asset count must be positive");
    if (m.spot.size() != m.assets) throw dimension_error("model: spot length != assets");
    for (double s : m.spot)
        if (!(s > 0.0) || !std::isfinite(s)) throw argument_error("model: spot must be positive");
    if (!(m.horizon > 0.0)) throw argument_error("model: horizon must be positive");
    if (!std::isfinite(m.rate)) throw argument_error("model: rate must be finite");
    if (m.assets >= 2) {
        const double lo = -1.0 / static_cast<double>(m.assets - 1);
        if (!(m.asset_corr > lo) || !(m.asset_corr < 1.0))
            throw factorization_error("model: correlation out of admissible range (-1/(d-1), 1)",
                                      "asset_corr");
    }
}

}  // namespace detail

/// Cholesky factor of the driving covariance: Gamma_S for the single-block
/// models, the joint Gamma for Heston. Throws a factorization_error naming
/// the offending parameter when the target is not positive definite.
inline Matrix build_correlation(const SdeModel& m) {
    detail::validate_common(m);
    if (m.kind == ModelKind::Heston) {
        if (m.gamma_corr.size() != m.assets)
            throw dimension_error("model: gamma_corr length != assets");
        for (double g : m.gamma_corr)
            if (!(g > -1.0) || !(g < 1.0))
                throw factorization_error(
                    "model: asset/vol correlation out of admissible range (-1, 1)", "gamma_corr");
        return cholesky(heston_joint_covariance(m.assets, m.asset_corr, m.gamma_corr),
                        "asset_corr/gamma_corr");
    }
    return cholesky(asset_covariance(m.assets, m.asset_corr), "asset_corr");
}

inline SdeModel make_local_vol(std::size_t assets, Vec spot, double rate, double horizon,
                               double smile_center, double asset_corr = 0.0) {
    SdeModel m;
    m.kind = ModelKind::LocalVol;
    m.assets = assets;
    m.spot = std::move(spot);
    m.rate = rate;
    m.horizon = horizon;
    m.smile_center = smile_center;
    m.asset_corr = asset_corr;
    m.correlation_factor = build_correlation(m);
    return m;
}

inline SdeModel make_constant_vol(std::size_t assets, Vec spot, double rate, double horizon,
                                  double sigma0, double asset_corr = 0.0) {
    SdeModel m;
    m.kind = ModelKind::ConstantVol;
    m.assets = assets;
    m.spot = std::move(spot);
    m.rate = rate;
    m.horizon = horizon;
    m.sigma0 = sigma0;
    m.asset_corr = asset_corr;
    m.correlation_factor = build_correlation(m);
    return m;
}

/// Heston with equal per-asset scalars broadcast to vectors; v0 defaults to
/// the long-run mean when empty.
inline SdeModel make_heston(std::size_t assets, Vec spot, double rate, double horizon, Vec kappa,
                            Vec mean_level, Vec vol_of_vol, Vec gamma_corr, double asset_corr,
                            Vec v0 = {}) {
    SdeModel m;
    m.kind = ModelKind::Heston;
    m.assets = assets;
    m.spot = std::move(spot);
    m.rate = rate;
    m.horizon = horizon;
    m.kappa = std::move(kappa);
    m.mean_level = std::move(mean_level);
    m.vol_of_vol = std::move(vol_of_vol);
    m.gamma_corr = std::move(gamma_corr);
    m.asset_corr = asset_corr;
    m.v0 = v0.empty() ? m.mean_level : std::move(v0);
    if (m.kappa.size() != assets || m.mean_level.size() != assets ||
        m.vol_of_vol.size() != assets || m.v0.size() != assets)
        throw dimension_error("heston: parameter vectors must have length d");
    for (std::size_t i = 0; i < assets; ++i)
        if (!(m.kappa[i] > 0.0) || !(m.mean_level[i] > 0.0) || !(m.vol_of_vol[i] > 0.0) ||
            !(m.v0[i] > 0.0))
            throw argument_error("heston: kappa, a, nu, v0 must be strictly positive");
    m.correlation_factor = build_correlation(m);
    return m;
}

/// Drift vector and diffusion matrix at (t, state), in model coordinates:
/// post-multiplying `diffusion` by correlated increments reproduces the
/// model dynamics. Heston uses full truncation: the variance is clamped at 0
/// inside the square root and in the variance diffusion, while the variance
/// drift keeps the raw value.
inline void drift_diffusion(const SdeModel& m, double t, std::span<const double> state,
                            std::span<double> drift, Matrix& diffusion) {
    const std::size_t n = m.state_dim();
    const std::size_t q = m.driving_dim();
    if (state.size() != n) throw dimension_error("drift_diffusion: state length mismatch");
    for (double v : state)
        if (!std::isfinite(v)) throw numeric_error("drift_diffusion: non-finite state");
    if (diffusion.rows() != n || diffusion.cols() != q) diffusion = Matrix(n, q);
    else
        std::fill(diffusion.data().begin(), diffusion.data().end(), 0.0);

    switch (m.kind) {
        case ModelKind::LocalVol:
            for (std::size_t i = 0; i < n; ++i) {
                drift[i] = m.rate * state[i];
                diffusion(i, i) = state[i] * local_vol(t, state[i], m.rate, m.smile_center);
            }
            break;
        case ModelKind::ConstantVol:
            for (std::size_t i = 0; i < n; ++i) {
                drift[i] = m.rate * state[i];
                diffusion(i, i) = m.sigma0 * state[i];
            }
            break;
        case ModelKind::Heston: {
            const std::size_t d = m.assets;
            for (std::size_t i = 0; i < d; ++i) {
                const double s = state[i];
                const double v = state[d + i];
                const double vol = std::sqrt(std::max(v, 0.0));
                drift[i] = m.rate * s;
                drift[d + i] = m.kappa[i] * (m.mean_level[i] - v);
                diffusion(i, i) = vol * s;
                diffusion(d + i, d + i) = m.vol_of_vol[i] * vol;
            }
            break;
        }
    }
}

enum class PayoffKind { Basket, BestOf, Call };

/// Terminal payoff on the price vector. `discount` applies e^{-rT} at
/// evaluation time; the positive part keeps every value nonnegative.
struct Payoff {
    PayoffKind kind = PayoffKind::Call;
    double strike = 100.0;
    Vec weights;              // Basket only; may be negative (put-like)
    std::size_t asset = 0;    // Call only
    bool discount = true;
};

inline Payoff basket_payoff(Vec weights, double strike, bool discount = true) {
    return Payoff{PayoffKind::Basket, strike, std::move(weights), 0, discount};
}

inline Payoff best_of_payoff(double strike, bool discount = true) {
    return Payoff{PayoffKind::BestOf, strike, {}, 0, discount};
}

inline Payoff call_payoff(double strike, std::size_t asset = 0, bool discount = true) {
    return Payoff{PayoffKind::Call, strike, {}, asset, discount};
}

/// Undiscounted payoff value.
inline double payoff_value(const Payoff& p, std::span<const double> prices) {
    for (double s : prices)
        if (!std::isfinite(s)) throw numeric_error("payoff: non-finite terminal price");
    double x = 0.0;
    switch (p.kind) {
        case PayoffKind::Basket: {
            if (p.weights.size() != prices.size())
                throw dimension_error("payoff: basket weights length != asset count");
            for (std::size_t i = 0; i < prices.size(); ++i) x += p.weights[i] * prices[i];
            break;
        }
        case PayoffKind::BestOf:
            x = *std::max_element(prices.begin(), prices.end());
            break;
        case PayoffKind::Call:
            if (p.asset >= prices.size())
                throw dimension_error("payoff: call asset index out of range");
            x = prices[p.asset];
            break;
    }
    return std::max(x - p.strike, 0.0);
}

/// Payoff with the discount flag honoured.
inline double payoff_eval(const Payoff& p, std::span<const double> prices, double r, double T) {
    const double v = payoff_value(p, prices);
    return p.discount ? v * std::exp(-r * T) : v;
}

}  // namespace mlis
