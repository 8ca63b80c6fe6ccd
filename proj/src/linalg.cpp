#include "pimbs/linalg.hpp"

#include <algorithm>

namespace pimbs {

bool lu_solve(Mat A, Vec b, Vec& x, double tol) {
    assert(A.rows == A.cols);
    assert(static_cast<int>(b.size()) == A.rows);
    const int n = A.rows;

    // scale pivot tolerance by the largest entry so tiny well-conditioned
    // systems are not rejected
    double amax = 0.0;
    for (double v : A.a) amax = std::max(amax, std::fabs(v));
    const double piv_tol = tol * std::max(1.0, amax);

    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(A(i, k)) > std::fabs(A(p, k))) p = i;
        if (std::fabs(A(p, k)) <= piv_tol) return false;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
            std::swap(b[k], b[p]);
        }
        const double inv = 1.0 / A(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double f = A(i, k) * inv;
            if (f == 0.0) continue;
            for (int j = k; j < n; ++j) A(i, j) -= f * A(k, j);
            b[i] -= f * b[k];
        }
    }

    x.assign(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
        x[i] = s / A(i, i);
    }
    return true;
}

}  // namespace pimbs
