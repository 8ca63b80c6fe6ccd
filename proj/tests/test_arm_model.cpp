#include <doctest.h>

#include <cmath>

#include "pimbs/arm_model.hpp"
#include "pimbs/rng.hpp"
#include "support/oracles.hpp"

using namespace pimbs;

namespace {
const ArmModel kModel = ArmModel::default_model();

JointState make_q(double t1, double t2) {
    JointState q;
    q.theta = {t1, t2};
    return q;
}
}  // namespace

TEST_CASE("zero-angle convention: links hang straight down") {
    const FkPoints fk = fk_points(kModel, make_q(0.0, 0.0));
    CHECK(fk.joint2[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(fk.joint2[1] == doctest::Approx(-0.3).epsilon(1e-15));
    CHECK(fk.tip2[1] == doctest::Approx(-0.6).epsilon(1e-15));
}

TEST_CASE("quarter turn is counterclockwise-positive") {
    const FkPoints fk = fk_points(kModel, make_q(M_PI / 2, 0.0));
    CHECK(fk.joint2[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(fk.joint2[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("attachment positions match the hand-computed rigid transforms") {
    // independent FK: rotation matrices applied directly to the default
    // geometry at theta = (0.3, -0.2); values frozen from that computation
    const FkPoints fk = fk_points(kModel, make_q(0.3, -0.2));
    CHECK(fk.joint2[0] == doctest::Approx(0.088656061998401856).epsilon(1e-14));
    CHECK(fk.joint2[1] == doctest::Approx(-0.28660094673768177).epsilon(1e-14));
    CHECK(fk.attach_from[0][0] == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(fk.attach_to[0][0] == doctest::Approx(0.054569154581872864).epsilon(1e-14));
    CHECK(fk.attach_to[0][1] == doctest::Approx(-0.10872997456184592).epsilon(1e-14));
    CHECK(fk.attach_from[2][0] == doctest::Approx(0.12164687612161519).epsilon(1e-14));
    CHECK(fk.attach_from[2][1] == doctest::Approx(-0.22405811194833453).epsilon(1e-14));
    CHECK(fk.attach_to[3][0] == doctest::Approx(0.078739320357524151).epsilon(1e-14));
    CHECK(fk.attach_to[3][1] == doctest::Approx(-0.38809803159842093).epsilon(1e-14));

    const Vec l = muscle_lengths_geom(kModel, make_q(0.3, -0.2));
    CHECK(l[0] == doctest::Approx(0.12881103805298111).epsilon(1e-14));
    CHECK(l[1] == doctest::Approx(0.1554271559760933).epsilon(1e-14));
    CHECK(l[2] == doctest::Approx(0.16007674594478319).epsilon(1e-14));
    CHECK(l[3] == doctest::Approx(0.14441779894870715).epsilon(1e-14));
}

TEST_CASE("zero-pose lengths equal the attachment distances") {
    const FkPoints fk = fk_points(kModel, make_q(0.0, 0.0));
    const Vec l = muscle_lengths_geom(kModel, make_q(0.0, 0.0));
    for (int i = 0; i < 4; ++i) {
        const double dx = fk.attach_to[i][0] - fk.attach_from[i][0];
        const double dy = fk.attach_to[i][1] - fk.attach_from[i][1];
        CHECK(l[i] == doctest::Approx(std::hypot(dx, dy)).epsilon(1e-15));
        CHECK(l[i] > 0.0);
    }
    // mirror symmetry of the default geometry
    CHECK(l[0] == doctest::Approx(l[1]).epsilon(1e-15));
    CHECK(l[2] == doctest::Approx(l[3]).epsilon(1e-15));
}

TEST_CASE("antagonist pairs swap which member is longer") {
    const Vec lp = muscle_lengths_geom(kModel, make_q(0.5, 0.5));
    const Vec lm = muscle_lengths_geom(kModel, make_q(-0.5, -0.5));
    CHECK(lp[0] < lp[1]);
    CHECK(lm[0] > lm[1]);
    CHECK(lp[2] < lp[3]);
    CHECK(lm[2] > lm[3]);
}

TEST_CASE("muscle Jacobian matches finite differences on 100 random states") {
    Rng rng(101);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        JointState q;
        q.theta = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        const Mat g = muscle_jacobian(kModel, q);
        const Mat fd = testing::fd_jacobian(
            [&](const Vec& x) {
                JointState qq;
                qq.theta = {x[0], x[1]};
                return muscle_lengths_geom(kModel, qq);
            },
            Vec(q.theta.begin(), q.theta.end()), 1e-6);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) {
                num = std::max(num, std::fabs(g(i, j) - fd(i, j)));
                den = std::max(den, std::fabs(fd(i, j)));
            }
        worst = std::max(worst, num / den);
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("monoarticular routing zeroes the unspanned column") {
    Rng rng(103);
    for (int t = 0; t < 20; ++t) {
        JointState q;
        q.theta = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        const Mat g = muscle_jacobian(kModel, q);
        CHECK(g(0, 1) == 0.0);
        CHECK(g(1, 1) == 0.0);
        CHECK(g(2, 0) == 0.0);
        CHECK(g(3, 0) == 0.0);
    }
}

TEST_CASE("moment arms stay adequate and sign-diverse on the 21x21 grid") {
    for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
            const Mat g = muscle_jacobian(kModel, make_q(-0.5 + i * 0.05, -0.5 + j * 0.05));
            CHECK(std::fabs(g(0, 0)) > 1e-3);
            CHECK(std::fabs(g(1, 0)) > 1e-3);
            CHECK(g(0, 0) * g(1, 0) < 0.0);
            CHECK(std::fabs(g(2, 1)) > 1e-3);
            CHECK(std::fabs(g(3, 1)) > 1e-3);
            CHECK(g(2, 1) * g(3, 1) < 0.0);
        }
    }
}

TEST_CASE("gravity torque: hanging pose, closed form, finite differences") {
    const Vec tau0 = gravity_torque(kModel, make_q(0.0, 0.0));
    CHECK(tau0[0] == 0.0);
    CHECK(tau0[1] == 0.0);

    // closed-form two-link statics at theta = (0.5, 0)
    const Vec tau = gravity_torque(kModel, make_q(0.5, 0.0));
    CHECK(tau[0] == doctest::Approx(2.8190221669927138).epsilon(1e-14));
    CHECK(tau[1] == doctest::Approx(0.70475554174817845).epsilon(1e-14));

    Rng rng(107);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        JointState q;
        q.theta = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        const Vec g = gravity_torque(kModel, q);
        const Mat fd = testing::fd_jacobian(
            [&](const Vec& x) {
                JointState qq;
                qq.theta = {x[0], x[1]};
                return Vec{potential_energy(kModel, qq)};
            },
            Vec(q.theta.begin(), q.theta.end()), 1e-6);
        for (int j = 0; j < 2; ++j)
            worst = std::max(worst, std::fabs(g[j] - fd(0, j)) / std::max(1e-3, std::fabs(fd(0, j))));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("elastic element: closed-form points and exact round trip") {
    CHECK(elastic_stretch(kModel, {0.0})[0] == 0.0);
    CHECK(elastic_stretch(kModel, {std::exp(1.0) - 1.0})[0] == doctest::Approx(0.001).epsilon(1e-14));
    CHECK(elastic_tension(kModel, {0.0})[0] == 0.0);
    CHECK(elastic_tension(kModel, {0.001})[0] == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));

    for (double f : {10.0, 300.0, 1000.0}) {
        const double back = elastic_tension(kModel, elastic_stretch(kModel, {f}))[0];
        CHECK(std::fabs(back - f) < 1e-9 * (1.0 + f));
    }
    CHECK_THROWS_AS(elastic_stretch(kModel, {-1.0}), std::domain_error);
    CHECK_THROWS_AS(elastic_tension(kModel, {-1e-6}), std::domain_error);
}

TEST_CASE("measured length is zero at the unloaded reference pose") {
    const Vec l = measured_length(kModel, make_q(0.0, 0.0), Vec(4, 0.0));
    for (double v : l) CHECK(v == 0.0);
}

TEST_CASE("measured length composes geometry and elastic stretch") {
    const JointState q = make_q(0.3, -0.2);
    const Vec geo = muscle_lengths_geom(kModel, q);
    const Vec geo0 = muscle_lengths_geom(kModel, make_q(0.0, 0.0));

    const Vec l_unloaded = measured_length(kModel, q, Vec(4, 0.0));
    for (int i = 0; i < 4; ++i) CHECK(l_unloaded[i] == doctest::Approx(geo[i] - geo0[i]).epsilon(1e-15));

    const Vec l_loaded = measured_length(kModel, q, Vec(4, 50.0));
    const double shift = std::log1p(50.0) / 1000.0;
    for (int i = 0; i < 4; ++i)
        CHECK(l_loaded[i] == doctest::Approx(geo[i] - geo0[i] + shift).epsilon(1e-14));

    CHECK_THROWS_AS(measured_length(kModel, q, Vec(4, -1.0)), std::domain_error);
}

TEST_CASE("model validation accepts the default and rejects broken ones") {
    CHECK_NOTHROW(validate(kModel));

    ArmModel bad = kModel;
    bad.link_masses[0] = -1.0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);

    bad = kModel;
    bad.com_offsets[1] = 0.5;  // beyond the link
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);

    bad = kModel;
    bad.muscles[0].from_body = Body::Base;
    bad.muscles[0].to_body = Body::Link2;  // not adjacent
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);

    bad = kModel;
    bad.elastic_k = 0.0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);

    // attachment collision: both points meet at the joint
    bad = kModel;
    bad.muscles[0] = {Body::Base, {0.0, 0.0}, Body::Link1, {0.0, 0.0}};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("body names round-trip") {
    for (Body b : {Body::Base, Body::Link1, Body::Link2}) CHECK(body_from_name(body_name(b)) == b);
    CHECK_THROWS_AS(body_from_name("torso"), std::invalid_argument);
}
