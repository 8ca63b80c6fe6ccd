#pragma once

#include <span>

#include "pimbs/linalg.hpp"

namespace pimbs::kernels {

/// Global switch for the OpenMP paths. Kernels also drop to serial when
/// already inside a parallel region (run-level parallelism wins), so results
/// never depend on the thread count: every parallel loop distributes whole
/// output elements and each element is computed by the identical code path.
void set_parallel(bool enabled);
bool parallel_enabled();

/// y(s,i) = bias[i] + sum_j x(s,j) * w(i,j)      (y = x w^T + b)
void linear(const Mat& x, const Mat& w, const Vec* bias, Mat& y);

/// a = tanh(z), d = 1 - a^2, elementwise.
void tanh_deriv(const Mat& z, Mat& a, Mat& d);

/// w_t = w^T
void transpose(const Mat& w, Mat& w_t);

/// First `n_cols` columns of w.
void copy_cols(const Mat& w, int n_cols, Mat& out);

/// Seed of the input-Jacobian propagation, C = number of differentiated
/// inputs: s(s, k*C+c) = d1(s,k) * w1(k,c).
void jac_seed(const Mat& d1, const Mat& w1, int c_cols, Mat& s);

/// out(s, i*C+c) = sum_k w(i,k) * in(s, k*C+c) for per-sample column blocks.
void jac_propagate(const Mat& w, const Mat& in, int c_cols, Mat& out);

/// out(s, k*C+c) = d(s,k) * in(s, k*C+c)
void jac_scale_rows(const Mat& d, const Mat& in, int c_cols, Mat& out);

/// One left/right factor pair of a batched outer-product sum.
struct OuterPair {
    const Mat* left;   // B x rows(grad)
    const Mat* right;  // B x cols(grad)
};

/// grad(i,j) += sum_s sum_p left_p(s,i) * right_p(s,j), accumulated in
/// fixed (s, p) order per element.
void accumulate_outer(std::span<const OuterPair> pairs, Mat& grad);

/// out[j] = sum_s m(s,j) in sample order.
void column_sums(const Mat& m, Vec& out);

/// Mean over all entries of (y - target)^2.
double mean_squared_error(const Mat& y, const Mat& target);

}  // namespace pimbs::kernels
