#include "pimbs/tension_qp.hpp"

#include <cmath>

namespace pimbs {

Mat QpSpec::identity_weights(int m) {
    Mat w(m, m);
    for (int i = 0; i < m; ++i) w(i, i) = 1.0;
    return w;
}

KktCandidate solve_kkt(const QpSpec& spec, const std::vector<int>& active) {
    const int m = spec.g.rows;
    const int n = spec.g.cols;
    const int na = static_cast<int>(active.size());
    const int dim = m + n + na;

    // Stationarity: 2 W f + G lambda - E_A mu = 0
    // Equality:     G^T f = -tau
    // Active bound: f_i = f_min for i in A
    Mat kkt(dim, dim);
    Vec rhs(dim, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) kkt(i, j) = 2.0 * spec.w(i, j);
        for (int j = 0; j < n; ++j) kkt(i, m + j) = spec.g(i, j);
    }
    for (int k = 0; k < na; ++k) kkt(active[k], m + n + k) = -1.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < m; ++i) kkt(m + j, i) = spec.g(i, j);
        rhs[m + j] = -spec.tau[j];
    }
    for (int k = 0; k < na; ++k) {
        kkt(m + n + k, active[k]) = 1.0;
        rhs[m + n + k] = spec.f_min;
    }

    KktCandidate cand;
    Vec sol;
    if (!lu_solve(std::move(kkt), std::move(rhs), sol)) return cand;
    cand.solvable = true;
    cand.f.assign(sol.begin(), sol.begin() + m);
    cand.dual_eq.assign(sol.begin() + m, sol.begin() + m + n);
    cand.dual_bound.assign(sol.begin() + m + n, sol.end());
    return cand;
}

QpSolution solve_tension_qp(const QpSpec& spec) {
    const int m = spec.g.rows;
    bool found = false;
    QpSolution best;

    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        std::vector<int> active;
        for (int i = 0; i < m; ++i)
            if (mask & (1u << i)) active.push_back(i);

        KktCandidate cand = solve_kkt(spec, active);
        if (!cand.solvable) continue;

        bool feasible = true;
        for (int i = 0; i < m && feasible; ++i)
            if (cand.f[i] < spec.f_min - kQpFeasTol) feasible = false;
        for (double mu : cand.dual_bound)
            if (mu < -kQpFeasTol) feasible = false;
        if (!feasible) continue;

        // snap at-bound components exactly onto the bound so downstream
        // consumers (the elastic law needs f >= 0) see no roundoff noise
        for (int i = 0; i < m; ++i)
            if (cand.f[i] < spec.f_min + kQpFeasTol) cand.f[i] = spec.f_min;

        double obj = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) obj += cand.f[i] * spec.w(i, j) * cand.f[j];

        if (!found || obj < best.objective) {
            found = true;
            best.f = cand.f;
            best.active_set = active;
            best.dual_eq = cand.dual_eq;
            best.dual_bound = cand.dual_bound;
            best.objective = obj;
        }
    }

    if (!found) throw QpInfeasible(spec);
    return best;
}

}  // namespace pimbs
