#include "pimbs/mlp_kernels.hpp"

#include <atomic>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pimbs::kernels {

namespace {

std::atomic<bool> g_parallel{true};

bool use_parallel() {
#ifdef _OPENMP
    return g_parallel.load(std::memory_order_relaxed) && !omp_in_parallel();
#else
    return false;
#endif
}

}  // namespace

void set_parallel(bool enabled) { g_parallel.store(enabled, std::memory_order_relaxed); }
bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

void linear(const Mat& x, const Mat& w, const Vec* bias, Mat& y) {
    assert(x.cols == w.cols);
    y.resize(x.rows, w.rows);
    const bool par = use_parallel();
    const int b = x.rows, r = w.rows, c = w.cols;
#pragma omp parallel for collapse(2) if (par) schedule(static)
    for (int s = 0; s < b; ++s) {
        for (int i = 0; i < r; ++i) {
            double acc = bias ? (*bias)[i] : 0.0;
            acc += dot(x.row(s), w.row(i), c);
            y(s, i) = acc;
        }
    }
}

void tanh_deriv(const Mat& z, Mat& a, Mat& d) {
    a.resize(z.rows, z.cols);
    d.resize(z.rows, z.cols);
    const bool par = use_parallel();
    const int n = static_cast<int>(z.size());
#pragma omp parallel for if (par) schedule(static)
    for (int i = 0; i < n; ++i) {
        const double t = std::tanh(z.a[i]);
        a.a[i] = t;
        d.a[i] = 1.0 - t * t;
    }
}

void transpose(const Mat& w, Mat& w_t) {
    w_t.resize(w.cols, w.rows);
    for (int i = 0; i < w.rows; ++i)
        for (int j = 0; j < w.cols; ++j) w_t(j, i) = w(i, j);
}

void copy_cols(const Mat& w, int n_cols, Mat& out) {
    assert(n_cols <= w.cols);
    out.resize(w.rows, n_cols);
    for (int i = 0; i < w.rows; ++i)
        for (int j = 0; j < n_cols; ++j) out(i, j) = w(i, j);
}

void jac_seed(const Mat& d1, const Mat& w1, int c_cols, Mat& s) {
    const int b = d1.rows, h = d1.cols;
    s.resize(b, h * c_cols);
    const bool par = use_parallel();
#pragma omp parallel for collapse(2) if (par) schedule(static)
    for (int r = 0; r < b; ++r)
        for (int k = 0; k < h; ++k)
            for (int c = 0; c < c_cols; ++c) s(r, k * c_cols + c) = d1(r, k) * w1(k, c);
}

void jac_propagate(const Mat& w, const Mat& in, int c_cols, Mat& out) {
    const int b = in.rows;
    const int h_in = w.cols;
    const int h_out = w.rows;
    assert(in.cols == h_in * c_cols);
    out.resize(b, h_out * c_cols);
    const bool par = use_parallel();
#pragma omp parallel for collapse(2) if (par) schedule(static)
    for (int s = 0; s < b; ++s) {
        for (int i = 0; i < h_out; ++i) {
            const double* wrow = w.row(i);
            const double* irow = in.row(s);
            for (int c = 0; c < c_cols; ++c) {
                double acc = 0.0;
                for (int k = 0; k < h_in; ++k) acc += wrow[k] * irow[k * c_cols + c];
                out(s, i * c_cols + c) = acc;
            }
        }
    }
}

void jac_scale_rows(const Mat& d, const Mat& in, int c_cols, Mat& out) {
    const int b = d.rows, h = d.cols;
    assert(in.cols == h * c_cols);
    out.resize(b, h * c_cols);
    const bool par = use_parallel();
#pragma omp parallel for collapse(2) if (par) schedule(static)
    for (int s = 0; s < b; ++s)
        for (int k = 0; k < h; ++k)
            for (int c = 0; c < c_cols; ++c) out(s, k * c_cols + c) = d(s, k) * in(s, k * c_cols + c);
}

void accumulate_outer(std::span<const OuterPair> pairs, Mat& grad) {
    if (pairs.empty()) return;
    const int b = pairs[0].left->rows;
    const int rows = grad.rows, cols = grad.cols;
    for ([[maybe_unused]] const auto& p : pairs) {
        assert(p.left->rows == b && p.right->rows == b);
        assert(p.left->cols == rows && p.right->cols == cols);
    }
    const bool par = use_parallel();
    const int np = static_cast<int>(pairs.size());
#pragma omp parallel for if (par) schedule(static)
    for (int i = 0; i < rows; ++i) {
        double* grow = grad.row(i);
        for (int s = 0; s < b; ++s) {
            for (int p = 0; p < np; ++p) {
                const double li = (*pairs[p].left)(s, i);
                if (li == 0.0) continue;
                const double* rrow = pairs[p].right->row(s);
                for (int j = 0; j < cols; ++j) grow[j] += li * rrow[j];
            }
        }
    }
}

void column_sums(const Mat& m, Vec& out) {
    out.assign(m.cols, 0.0);
    for (int s = 0; s < m.rows; ++s) {
        const double* row = m.row(s);
        for (int j = 0; j < m.cols; ++j) out[j] += row[j];
    }
}

double mean_squared_error(const Mat& y, const Mat& target) {
    assert(y.rows == target.rows && y.cols == target.cols);
    double acc = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        const double e = y.a[i] - target.a[i];
        acc += e * e;
    }
    return acc / static_cast<double>(y.size());
}

}  // namespace pimbs::kernels
