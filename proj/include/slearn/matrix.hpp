#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace slearn {

using Vector = std::vector<double>;

// Small dense row-major matrix. Entry (l, k) of a combination matrix is the
// probability that agent k pulls from agent l, so column k is agent k's
// neighbor-selection distribution.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

// y = M x
inline Vector mat_vec(const Matrix& m, const Vector& x) {
    if (x.size() != m.cols()) throw std::invalid_argument("mat_vec: dimension mismatch");
    Vector y(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c) * x[c];
        y[r] = acc;
    }
    return y;
}

// y = M^T x
inline Vector mat_transpose_vec(const Matrix& m, const Vector& x) {
    if (x.size() != m.rows()) throw std::invalid_argument("mat_transpose_vec: dimension mismatch");
    Vector y(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double xr = x[r];
        for (std::size_t c = 0; c < m.cols(); ++c) y[c] += m(r, c) * xr;
    }
    return y;
}

inline double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double l1_norm(const Vector& v) {
    double acc = 0.0;
    for (double x : v) acc += std::fabs(x);
    return acc;
}

inline double l1_distance(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("l1_distance: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
}

inline void normalize_l1(Vector& v) {
    const double s = l1_norm(v);
    if (s <= 0.0) throw std::domain_error("normalize_l1: vector has zero norm");
    for (double& x : v) x /= s;
}

// log(sum_i exp(x_i)), stable against large magnitudes
inline double log_sum_exp(const Vector& x) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : x) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double v : x) acc += std::exp(v - m);
    return m + std::log(acc);
}

}  // namespace slearn
