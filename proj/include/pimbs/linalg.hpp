#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace pimbs {

using Vec = std::vector<double>;

/// Dense row-major matrix. Small and deliberately dumb: the project only
/// needs contiguous storage plus a handful of helpers.
struct Mat {
    int rows = 0;
    int cols = 0;
    Vec a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
    const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }

    void resize(int r, int c) {
        rows = r;
        cols = c;
        a.assign(static_cast<size_t>(r) * c, 0.0);
    }
    void fill(double v) { a.assign(a.size(), v); }
    size_t size() const { return a.size(); }
};

inline double dot(const double* x, const double* y, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

inline double dot(const Vec& x, const Vec& y) {
    assert(x.size() == y.size());
    return dot(x.data(), y.data(), static_cast<int>(x.size()));
}

inline Vec matvec(const Mat& m, const Vec& x) {
    assert(static_cast<int>(x.size()) == m.cols);
    Vec y(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i) y[i] = dot(m.row(i), x.data(), m.cols);
    return y;
}

// y = m^T x
inline Vec matTvec(const Mat& m, const Vec& x) {
    assert(static_cast<int>(x.size()) == m.rows);
    Vec y(m.cols, 0.0);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) y[j] += m(i, j) * x[i];
    return y;
}

inline double inf_norm(const Vec& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::fabs(v));
    return m;
}

inline double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

/// Solves A x = b in place with partially pivoted Gaussian elimination.
/// Returns false when a pivot falls below `tol` (singular system).
bool lu_solve(Mat A, Vec b, Vec& x, double tol = 1e-12);

}  // namespace pimbs
