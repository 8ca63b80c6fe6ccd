#pragma once

#include <array>
#include <string>
#include <vector>

#include "pimbs/linalg.hpp"

namespace pimbs {

using Point2 = std::array<double, 2>;

enum class Body { Base, Link1, Link2 };

const char* body_name(Body b);
Body body_from_name(const std::string& name);  // throws std::invalid_argument

/// One straight-line muscle between attachment points on two adjacent bodies.
struct MusclePath {
    Body from_body = Body::Base;
    Point2 from_point{0.0, 0.0};
    Body to_body = Body::Link1;
    Point2 to_point{0.0, 0.0};
};

/// Planar 2-link arm hanging in a vertical plane. Angles are
/// counterclockwise-positive with theta = 0 pointing straight down (-y).
/// Joint 1 sits at the origin, joint 2 at the tip of link 1.
struct ArmModel {
    std::array<double, 2> link_lengths{0.3, 0.3};   // m
    std::array<double, 2> link_masses{1.0, 1.0};    // kg
    std::array<double, 2> com_offsets{0.15, 0.15};  // m from proximal joint
    double gravity = 9.8;                           // m/s^2
    double elastic_k = 1000.0;                      // 1/m, tension law f = e^{K dn} - 1
    std::vector<MusclePath> muscles;

    int n_joints() const { return 2; }
    int n_muscles() const { return static_cast<int>(muscles.size()); }

    /// Two antagonistic monoarticular pairs: muscles 0-1 span joint 1,
    /// muscles 2-3 span joint 2.
    static ArmModel default_model();
};

/// Checks structural invariants (positive lengths/masses, adjacent
/// attachment bodies, no attachment collision on a 21x21 grid over
/// [-0.5, 0.5]^2). Throws std::invalid_argument on violation.
void validate(const ArmModel& model);

/// Hash of the numeric model content, for dataset provenance comments.
std::string model_hash(const ArmModel& model);

struct JointState {
    std::array<double, 2> theta{0.0, 0.0};  // rad
};

struct FkPoints {
    Point2 joint2;
    Point2 tip1;  // distal end of link 1 (coincides with joint2)
    Point2 tip2;
    std::vector<Point2> attach_from;  // world position per muscle
    std::vector<Point2> attach_to;
};

FkPoints fk_points(const ArmModel& model, const JointState& q);

/// Geometric wire lengths (straight-line attachment distances), meters.
Vec muscle_lengths_geom(const ArmModel& model, const JointState& q);

/// Exact derivative of muscle_lengths_geom w.r.t. theta, M x 2, m/rad.
Mat muscle_jacobian(const ArmModel& model, const JointState& q);

/// Gravitational potential energy of both links (y up, zero at the origin).
double potential_energy(const ArmModel& model, const JointState& q);

/// Gravity compensation torque tau = dU/dtheta. Together with the muscle
/// Jacobian the generated tensions satisfy tau = -G^T f.
Vec gravity_torque(const ArmModel& model, const JointState& q);

/// Elastic element stretch dn = ln(1 + f) / K. Throws std::domain_error for
/// negative tension.
Vec elastic_stretch(const ArmModel& model, const Vec& tension);

/// Inverse of elastic_stretch: f = e^{K dn} - 1. Throws std::domain_error
/// for negative stretch.
Vec elastic_tension(const ArmModel& model, const Vec& stretch);

/// Measured (relative) muscle length: geometric change from the zero pose
/// plus elastic stretch relative to the unloaded reference, so that
/// theta = 0, f = 0 maps to exactly 0.
Vec measured_length(const ArmModel& model, const JointState& q, const Vec& tension);

}  // namespace pimbs
