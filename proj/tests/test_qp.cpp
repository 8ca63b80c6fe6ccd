#include <doctest.h>

#include <cmath>

#include "pimbs/arm_model.hpp"
#include "pimbs/dataset.hpp"
#include "pimbs/rng.hpp"
#include "pimbs/tension_qp.hpp"
#include "support/oracles.hpp"

using namespace pimbs;

namespace {

const ArmModel kModel = ArmModel::default_model();

QpSpec spec_at(double t1, double t2, double f_min) {
    JointState q;
    q.theta = {t1, t2};
    QpSpec s;
    s.g = muscle_jacobian(kModel, q);
    s.tau = gravity_torque(kModel, q);
    s.w = QpSpec::identity_weights(4);
    s.f_min = f_min;
    return s;
}

double eq_residual(const QpSpec& s, const Vec& f) {
    Vec r(s.g.cols, 0.0);
    for (int j = 0; j < s.g.cols; ++j) {
        r[j] = s.tau[j];
        for (int i = 0; i < s.g.rows; ++i) r[j] += s.g(i, j) * f[i];
    }
    return inf_norm(r);
}

}  // namespace

TEST_CASE("unconstrained KKT minimum at the origin") {
    QpSpec s = spec_at(0.0, 0.0, 0.0);
    s.tau = {0.0, 0.0};
    const KktCandidate c = solve_kkt(s, {});
    REQUIRE(c.solvable);
    for (double v : c.f) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
    for (double v : c.dual_eq) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("two-variable closed form via the Lagrange multiplier") {
    // minimize f1^2 + f2^2 s.t. f1 - f2 = c for G = (-r, r), tau = r c
    const double r = 0.05, c = 10.0;
    QpSpec s;
    s.g.resize(2, 1);
    s.g(0, 0) = -r;
    s.g(1, 0) = r;
    s.tau = {r * c};
    s.w = QpSpec::identity_weights(2);
    s.f_min = -1e9;  // bounds irrelevant for the unconstrained candidate
    const KktCandidate cand = solve_kkt(s, {});
    REQUIRE(cand.solvable);
    CHECK(cand.f[0] == doctest::Approx(c / 2).epsilon(1e-12));
    CHECK(cand.f[1] == doctest::Approx(-c / 2).epsilon(1e-12));
}

TEST_CASE("KKT candidates satisfy the equality constraint to 1e-10") {
    Rng rng(211);
    for (int t = 0; t < 50; ++t) {
        const QpSpec s = spec_at(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                                 rng.uniform(0.0, 200.0));
        const unsigned mask = static_cast<unsigned>(rng.next_below(16));
        std::vector<int> active;
        for (int i = 0; i < 4; ++i)
            if (mask & (1u << i)) active.push_back(i);
        const KktCandidate cand = solve_kkt(s, active);
        if (!cand.solvable) continue;
        CHECK(eq_residual(s, cand.f) < 1e-10 * (1.0 + inf_norm(s.tau)));
    }
}

TEST_CASE("zero torque with zero bound gives zero tension") {
    QpSpec s = spec_at(0.0, 0.0, 0.0);
    const QpSolution sol = solve_tension_qp(s);
    for (double v : sol.f) CHECK(std::fabs(v) < 1e-12);
    CHECK(sol.objective < 1e-20);
}

TEST_CASE("zero torque with f_min = 10 clamps every muscle at the bound") {
    const QpSolution sol = solve_tension_qp(spec_at(0.0, 0.0, 10.0));
    for (double v : sol.f) CHECK(v == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(sol.objective == doctest::Approx(400.0).epsilon(1e-9));
    for (double mu : sol.dual_bound) CHECK(mu >= -kQpFeasTol);
}

TEST_CASE("solution invariants and oracle agreement on 100 random instances") {
    Rng rng(223);
    for (int t = 0; t < 100; ++t) {
        const QpSpec s = spec_at(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                                 rng.uniform(0.0, 300.0));
        const QpSolution sol = solve_tension_qp(s);

        for (double v : sol.f) CHECK(v >= s.f_min - kQpFeasTol);
        CHECK(eq_residual(s, sol.f) < kQpFeasTol * (1.0 + inf_norm(s.tau)));
        for (double mu : sol.dual_bound) CHECK(mu >= -kQpFeasTol);
        // stationarity: 2 W f + G lambda - E_A mu = 0
        Vec stat(4, 0.0);
        for (int i = 0; i < 4; ++i) {
            for (int k = 0; k < 4; ++k) stat[i] += 2.0 * s.w(i, k) * sol.f[k];
            for (int j = 0; j < 2; ++j) stat[i] += s.g(i, j) * sol.dual_eq[j];
        }
        for (size_t a = 0; a < sol.active_set.size(); ++a)
            stat[sol.active_set[a]] -= sol.dual_bound[a];
        CHECK(inf_norm(stat) < 1e-8);

        const testing::PgResult pg = testing::qp_projected_gradient(s);
        CHECK(std::fabs(sol.objective - pg.objective) <= 1e-6 * (1.0 + std::fabs(pg.objective)));
    }
}

TEST_CASE("feasible candidates are unique up to 1e-8") {
    Rng rng(227);
    for (int t = 0; t < 20; ++t) {
        const QpSpec s = spec_at(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                                 rng.uniform(0.0, 300.0));
        std::vector<Vec> feasible;
        for (unsigned mask = 0; mask < 16; ++mask) {
            std::vector<int> active;
            for (int i = 0; i < 4; ++i)
                if (mask & (1u << i)) active.push_back(i);
            const KktCandidate cand = solve_kkt(s, active);
            if (!cand.solvable) continue;
            bool ok = true;
            for (double v : cand.f)
                if (v < s.f_min - kQpFeasTol) ok = false;
            for (double mu : cand.dual_bound)
                if (mu < -kQpFeasTol) ok = false;
            if (ok) feasible.push_back(cand.f);
        }
        REQUIRE(!feasible.empty());
        for (const Vec& f : feasible)
            for (int i = 0; i < 4; ++i) CHECK(std::fabs(f[i] - feasible[0][i]) < 1e-8);
    }
}

TEST_CASE("raising f_min never lowers the objective") {
    Rng rng(229);
    for (int t = 0; t < 20; ++t) {
        const double t1 = rng.uniform(-0.5, 0.5), t2 = rng.uniform(-0.5, 0.5);
        double prev = -1.0;
        for (double f_min : {0.0, 25.0, 100.0, 250.0}) {
            const QpSolution sol = solve_tension_qp(spec_at(t1, t2, f_min));
            CHECK(sol.objective >= prev - 1e-9);
            prev = sol.objective;
        }
    }
}

TEST_CASE("degenerate active sets report as unsolvable instead of crashing") {
    // at theta = 0 the mirror-symmetric geometry makes the all-active KKT
    // system rank-deficient; the optimum is still found via other sets
    const QpSpec s = spec_at(0.0, 0.0, 10.0);
    const KktCandidate all_active = solve_kkt(s, {0, 1, 2, 3});
    CHECK(!all_active.solvable);
    CHECK_NOTHROW(solve_tension_qp(s));
}

TEST_CASE("structurally unreachable torque raises QpInfeasible") {
    QpSpec s;
    s.g.resize(2, 2);  // second joint has no moment arm anywhere
    s.g(0, 0) = 0.05;
    s.g(1, 0) = -0.05;
    s.tau = {0.0, 1.0};
    s.w = QpSpec::identity_weights(2);
    s.f_min = 0.0;
    CHECK_THROWS_AS(solve_tension_qp(s), QpInfeasible);
    try {
        solve_tension_qp(s);
    } catch (const QpInfeasible& e) {
        CHECK(e.spec.tau[1] == 1.0);  // the failing instance travels with the error
    }
}
