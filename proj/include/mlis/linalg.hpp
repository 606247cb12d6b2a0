#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mlis/errors.hpp"

namespace mlis {

using Vec = std::vector<double>;

/// Dense row-major matrix. The problems here are tiny (q <= 2d, d ~ 10),
/// so a flat vector with no blocking is all we need.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<const double> data() const { return a_; }
    std::span<double> data() { return a_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

inline double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

/// y = A x
inline void matvec(const Matrix& a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
}

inline Matrix multiply_transposed(const Matrix& l) {
    Matrix m(l.rows(), l.rows());
    for (std::size_t i = 0; i < l.rows(); ++i)
        for (std::size_t j = 0; j < l.rows(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < l.cols(); ++k) s += l(i, k) * l(j, k);
            m(i, j) = s;
        }
    return m;
}

inline double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
/// `parameter` names the config field blamed when the pivot goes non-positive.
inline Matrix cholesky(const Matrix& a, const std::string& parameter = "matrix") {
    if (a.rows() != a.cols()) throw dimension_error("cholesky: matrix must be square");
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0))
            throw factorization_error(
                "cholesky: target covariance is not positive definite (pivot " +
                    std::to_string(j) + "); check parameter '" + parameter + "'",
                parameter);
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

/// Solves A x = b for symmetric positive definite A via its Cholesky factor.
inline Vec spd_solve(const Matrix& a, std::span<const double> b) {
    const Matrix l = cholesky(a, "spd_solve");
    const std::size_t n = a.rows();
    Vec x(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {  // forward L y = b
        for (std::size_t k = 0; k < i; ++k) x[i] -= l(i, k) * x[k];
        x[i] /= l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {  // backward L^T x = y
        for (std::size_t k = ii + 1; k < n; ++k) x[ii] -= l(k, ii) * x[k];
        x[ii] /= l(ii, ii);
    }
    return x;
}

}  // namespace mlis
