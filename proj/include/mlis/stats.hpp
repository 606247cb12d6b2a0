#pragma once

#include <cmath>
#include <cstdint>

namespace mlis {

/// Welford online mean/variance accumulator with exact pairwise merge.
/// Merging partials in a fixed order keeps parallel reductions deterministic.
class OnlineStats {
public:
    void add(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    /// Chan et al. parallel combination of two accumulators.
    void merge(const OnlineStats& other) {
        if (other.n_ == 0) return;
        if (n_ == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(n_);
        const double nb = static_cast<double>(other.n_);
        const double delta = other.mean_ - mean_;
        const double n_total = na + nb;
        mean_ += delta * nb / n_total;
        m2_ += other.m2_ + delta * delta * na * nb / n_total;
        n_ += other.n_;
    }

    std::uint64_t count() const { return n_; }
    double mean() const { return n_ > 0 ? mean_ : 0.0; }
    /// Population variance (divide by n), the Monte Carlo second-moment form.
    double variance() const {
        return n_ > 0 ? m2_ / static_cast<double>(n_) : 0.0;
    }
    /// Unbiased sample variance (divide by n-1).
    double sample_variance() const {
        return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    }
    double second_moment() const {
        return variance() + mean() * mean();
    }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Two-sided 95% normal quantile used for every confidence interval.
inline constexpr double z_95 = 1.959964;

}  // namespace mlis
