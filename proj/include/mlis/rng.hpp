#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "mlis/errors.hpp"
#include "mlis/linalg.hpp"

namespace mlis {

/// Which of the two independent sample blocks a stream feeds. Optimization
/// streams build the SAA objective; estimation streams build the estimator.
/// The two phases never share a stream.
enum class Phase : std::uint64_t { Optimization = 0x9e5c, Estimation = 0x71d3 };

/// Identifies one reproducible stream: (master seed, level, phase, sample index).
struct RngStreamKey {
    std::uint64_t seed = 0;
    std::uint64_t level = 0;
    Phase phase = Phase::Estimation;
    std::uint64_t sample = 0;
};

/// splitmix64 finalizer (Vigna). Fixed constants, exact on every platform.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Key mixing: fold each field into the state with one splitmix64 round.
/// This is the documented stream-derivation function; changing it breaks replay.
inline std::uint64_t mix_key(const RngStreamKey& key) {
    std::uint64_t h = splitmix64(key.seed);
    h = splitmix64(h ^ key.level);
    h = splitmix64(h ^ static_cast<std::uint64_t>(key.phase));
    h = splitmix64(h ^ key.sample);
    return h;
}

/// Derives a 64-bit sub-seed for nested reproducible runs (benchmark
/// replications, reference runs) from a master seed and context words.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

namespace detail {

/// Acklam's rational approximation of the inverse normal CDF, refined by one
/// Halley step. Deterministic given the same libm; accurate to ~1e-15.
inline double inverse_normal_cdf(double u) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double u_low = 0.02425;
    double x;
    if (u < u_low) {
        double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - u_low) {
        double q = u - 0.5;
        double t = q * q;
        x = (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * q /
            (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Halley refinement against the exact CDF.
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - u;
    double g = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - g / (1.0 + x * g / 2.0);
}

}  // namespace detail

/// Stream of i.i.d. standard normals, a pure function of its key.
/// mt19937_64 output is mapped to (0,1) uniforms and inverted through the
/// normal CDF, one draw per variate.
class NormalStream {
public:
    explicit NormalStream(const RngStreamKey& key) : engine_(mix_key(key)) {}
    explicit NormalStream(std::uint64_t raw_seed) : engine_(raw_seed) {}

    double operator()() {
        // (k + 0.5) * 2^-53 lies strictly inside (0,1).
        const double u =
            (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
        return detail::inverse_normal_cdf(u);
    }

private:
    std::mt19937_64 engine_;
};

/// Fills `out` (steps x q, row-major) with independent N(0, (T/steps) I_q)
/// increments of a standard q-dimensional Brownian motion on [0, T].
/// Deterministic in `key`; correlation is applied downstream.
inline void sample_brownian_increments(const RngStreamKey& key, std::size_t steps,
                                       std::size_t q, double horizon,
                                       std::span<double> out) {
    if (steps == 0) throw argument_error("sample_brownian_increments: steps must be >= 1");
    if (q == 0) throw argument_error("sample_brownian_increments: q must be >= 1");
    if (out.size() != steps * q)
        throw dimension_error("sample_brownian_increments: output size != steps*q");
    NormalStream normals(key);
    const double sqrt_dt = std::sqrt(horizon / static_cast<double>(steps));
    for (auto& v : out) v = sqrt_dt * normals();
}

inline Vec sample_brownian_increments(const RngStreamKey& key, std::size_t steps,
                                      std::size_t q, double horizon) {
    Vec out(steps * q);
    sample_brownian_increments(key, steps, q, horizon, out);
    return out;
}

}  // namespace mlis
