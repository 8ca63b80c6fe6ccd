#pragma once

#include <stdexcept>
#include <vector>

#include "pimbs/linalg.hpp"

namespace pimbs {

/// One tension-distribution instance:
///   minimize f^T W f  s.t.  tau = -G^T f,  f >= f_min.
struct QpSpec {
    Mat g;          // M x N muscle Jacobian, m/rad
    Vec tau;        // N, N*m
    Mat w;          // M x M symmetric positive definite weights
    double f_min = 0.0;

    static Mat identity_weights(int m);
};

struct QpSolution {
    Vec f;                        // M, optimal tensions
    std::vector<int> active_set;  // muscle indices clamped at f_min
    Vec dual_eq;                  // N equality multipliers
    Vec dual_bound;               // one multiplier per active_set entry
    double objective = 0.0;       // f^T W f
};

/// Candidate from one equality-constrained KKT subproblem.
struct KktCandidate {
    bool solvable = false;  // false when the KKT matrix is singular
    Vec f;
    Vec dual_eq;
    Vec dual_bound;  // aligned with `active`
};

class QpInfeasible : public std::runtime_error {
  public:
    explicit QpInfeasible(QpSpec spec)
        : std::runtime_error("tension QP: no feasible active set"), spec(std::move(spec)) {}
    QpSpec spec;
};

/// Solves the KKT system with f_i = f_min forced for i in `active`.
/// A singular system is reported through `solvable = false`.
KktCandidate solve_kkt(const QpSpec& spec, const std::vector<int>& active);

/// Enumerates all 2^M active sets, keeps the primal- and dual-feasible
/// candidate (unique by strict convexity). Throws QpInfeasible when none
/// qualifies.
QpSolution solve_tension_qp(const QpSpec& spec);

constexpr double kQpFeasTol = 1e-9;

}  // namespace pimbs
