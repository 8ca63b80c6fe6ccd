#include "pimbs/arm_model.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace pimbs {

namespace {

struct Frame {
    double c, s;      // cos/sin of the absolute rotation
    Point2 origin;    // world position of the body origin
};

Point2 to_world(const Frame& fr, const Point2& local) {
    return {fr.origin[0] + fr.c * local[0] - fr.s * local[1],
            fr.origin[1] + fr.s * local[0] + fr.c * local[1]};
}

struct Frames {
    Frame base, link1, link2;
};

Frames frames_at(const ArmModel& model, const JointState& q) {
    const double t1 = q.theta[0];
    const double t12 = q.theta[0] + q.theta[1];
    Frames f;
    f.base = {1.0, 0.0, {0.0, 0.0}};
    f.link1 = {std::cos(t1), std::sin(t1), {0.0, 0.0}};
    // link 1 points along -y at theta = 0
    const Point2 joint2 = to_world(f.link1, {0.0, -model.link_lengths[0]});
    f.link2 = {std::cos(t12), std::sin(t12), joint2};
    return f;
}

const Frame& frame_of(const Frames& fr, Body b) {
    switch (b) {
        case Body::Base: return fr.base;
        case Body::Link1: return fr.link1;
        default: return fr.link2;
    }
}

// d(world point)/d(theta_j) for a point attached to `body`
Point2 point_vel(const Frames& fr, Body body, const Point2& world, int joint) {
    auto perp_about = [&world](const Point2& center) -> Point2 {
        return {-(world[1] - center[1]), world[0] - center[0]};
    };
    if (body == Body::Base) return {0.0, 0.0};
    if (body == Body::Link1) {
        if (joint == 0) return perp_about({0.0, 0.0});
        return {0.0, 0.0};
    }
    // link2: rotates about the origin with joint 1 and about joint 2 with joint 2
    if (joint == 0) return perp_about({0.0, 0.0});
    return perp_about(fr.link2.origin);
}

}  // namespace

const char* body_name(Body b) {
    switch (b) {
        case Body::Base: return "base";
        case Body::Link1: return "link1";
        default: return "link2";
    }
}

Body body_from_name(const std::string& name) {
    if (name == "base") return Body::Base;
    if (name == "link1") return Body::Link1;
    if (name == "link2") return Body::Link2;
    throw std::invalid_argument("unknown body name: " + name);
}

ArmModel ArmModel::default_model() {
    ArmModel m;
    m.muscles = {
        {Body::Base, {0.05, 0.02}, Body::Link1, {0.02, -0.12}},
        {Body::Base, {-0.05, 0.02}, Body::Link1, {-0.02, -0.12}},
        {Body::Link1, {0.05, -0.25}, Body::Link2, {0.02, -0.10}},
        {Body::Link1, {-0.05, -0.25}, Body::Link2, {-0.02, -0.10}},
    };
    return m;
}

void validate(const ArmModel& model) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("model: " + msg); };
    for (int i = 0; i < 2; ++i) {
        if (!(model.link_lengths[i] > 0.0)) fail("link_lengths must be > 0");
        if (!(model.link_masses[i] > 0.0)) fail("link_masses must be > 0");
        if (!(model.com_offsets[i] > 0.0 && model.com_offsets[i] <= model.link_lengths[i]))
            fail("com_offsets must lie in (0, link_length]");
    }
    if (!(model.elastic_k > 0.0)) fail("elastic_k must be > 0");
    if (model.muscles.empty()) fail("at least one muscle required");
    for (const auto& mu : model.muscles) {
        if (mu.from_body == mu.to_body) fail("muscle attachment bodies must be distinct");
        const bool base_link1 = (mu.from_body == Body::Base && mu.to_body == Body::Link1) ||
                                (mu.from_body == Body::Link1 && mu.to_body == Body::Base);
        const bool link1_link2 = (mu.from_body == Body::Link1 && mu.to_body == Body::Link2) ||
                                 (mu.from_body == Body::Link2 && mu.to_body == Body::Link1);
        if (!base_link1 && !link1_link2) fail("muscle must connect adjacent bodies");
    }
    // attachment collision check on the working range
    for (int i = 0; i < 21; ++i) {
        for (int j = 0; j < 21; ++j) {
            JointState q;
            q.theta[0] = -0.5 + i * 0.05;
            q.theta[1] = -0.5 + j * 0.05;
            const Vec l = muscle_lengths_geom(model, q);
            for (double v : l)
                if (!(v > 1e-3)) fail("muscle length <= 1 mm inside the joint range");
        }
    }
}

std::string model_hash(const ArmModel& model) {
    // FNV-1a over the canonical decimal serialization
    uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&h](const char* buf, int n) {
        for (int i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001B3ULL;
        }
    };
    auto add = [&](double v) {
        char buf[40];
        const int n = std::snprintf(buf, sizeof buf, "%.17g;", v);
        mix(buf, n);
    };
    for (double v : model.link_lengths) add(v);
    for (double v : model.link_masses) add(v);
    for (double v : model.com_offsets) add(v);
    add(model.gravity);
    add(model.elastic_k);
    for (const auto& mu : model.muscles) {
        mix(body_name(mu.from_body), static_cast<int>(std::string(body_name(mu.from_body)).size()));
        add(mu.from_point[0]);
        add(mu.from_point[1]);
        mix(body_name(mu.to_body), static_cast<int>(std::string(body_name(mu.to_body)).size()));
        add(mu.to_point[0]);
        add(mu.to_point[1]);
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

FkPoints fk_points(const ArmModel& model, const JointState& q) {
    const Frames fr = frames_at(model, q);
    FkPoints out;
    out.joint2 = fr.link2.origin;
    out.tip1 = fr.link2.origin;
    out.tip2 = to_world(fr.link2, {0.0, -model.link_lengths[1]});
    out.attach_from.reserve(model.muscles.size());
    out.attach_to.reserve(model.muscles.size());
    for (const auto& mu : model.muscles) {
        out.attach_from.push_back(to_world(frame_of(fr, mu.from_body), mu.from_point));
        out.attach_to.push_back(to_world(frame_of(fr, mu.to_body), mu.to_point));
    }
    return out;
}

Vec muscle_lengths_geom(const ArmModel& model, const JointState& q) {
    const Frames fr = frames_at(model, q);
    Vec l(model.muscles.size(), 0.0);
    for (size_t i = 0; i < model.muscles.size(); ++i) {
        const auto& mu = model.muscles[i];
        const Point2 a = to_world(frame_of(fr, mu.from_body), mu.from_point);
        const Point2 b = to_world(frame_of(fr, mu.to_body), mu.to_point);
        l[i] = std::hypot(b[0] - a[0], b[1] - a[1]);
    }
    return l;
}

namespace {

// A muscle's length only varies with the joints between its two bodies:
// rotating the whole distal assembly rigidly preserves the distance.
bool spans_joint(const MusclePath& mu, int joint) {
    if (joint == 0) return mu.from_body == Body::Base || mu.to_body == Body::Base;
    return mu.from_body == Body::Link2 || mu.to_body == Body::Link2;
}

}  // namespace

Mat muscle_jacobian(const ArmModel& model, const JointState& q) {
    const Frames fr = frames_at(model, q);
    Mat g(model.n_muscles(), model.n_joints());
    for (int i = 0; i < model.n_muscles(); ++i) {
        const auto& mu = model.muscles[i];
        const Point2 a = to_world(frame_of(fr, mu.from_body), mu.from_point);
        const Point2 b = to_world(frame_of(fr, mu.to_body), mu.to_point);
        const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
        const Point2 u = {(b[0] - a[0]) / len, (b[1] - a[1]) / len};
        for (int j = 0; j < 2; ++j) {
            if (!spans_joint(mu, j)) continue;  // structurally zero
            const Point2 va = point_vel(fr, mu.from_body, a, j);
            const Point2 vb = point_vel(fr, mu.to_body, b, j);
            g(i, j) = u[0] * (vb[0] - va[0]) + u[1] * (vb[1] - va[1]);
        }
    }
    return g;
}

double potential_energy(const ArmModel& model, const JointState& q) {
    const double t1 = q.theta[0];
    const double t12 = q.theta[0] + q.theta[1];
    const double y1 = -model.com_offsets[0] * std::cos(t1);
    const double y2 = -model.link_lengths[0] * std::cos(t1) - model.com_offsets[1] * std::cos(t12);
    return model.gravity * (model.link_masses[0] * y1 + model.link_masses[1] * y2);
}

Vec gravity_torque(const ArmModel& model, const JointState& q) {
    const double t1 = q.theta[0];
    const double t12 = q.theta[0] + q.theta[1];
    const double g = model.gravity;
    const double m1 = model.link_masses[0], m2 = model.link_masses[1];
    const double c1 = model.com_offsets[0], c2 = model.com_offsets[1];
    const double l1 = model.link_lengths[0];
    Vec tau(2, 0.0);
    tau[0] = g * ((m1 * c1 + m2 * l1) * std::sin(t1) + m2 * c2 * std::sin(t12));
    tau[1] = g * m2 * c2 * std::sin(t12);
    return tau;
}

Vec elastic_stretch(const ArmModel& model, const Vec& tension) {
    Vec dn(tension.size(), 0.0);
    for (size_t i = 0; i < tension.size(); ++i) {
        if (tension[i] < 0.0) throw std::domain_error("elastic_stretch: negative tension");
        dn[i] = std::log1p(tension[i]) / model.elastic_k;
    }
    return dn;
}

Vec elastic_tension(const ArmModel& model, const Vec& stretch) {
    Vec f(stretch.size(), 0.0);
    for (size_t i = 0; i < stretch.size(); ++i) {
        if (stretch[i] < 0.0) throw std::domain_error("elastic_tension: negative stretch");
        f[i] = std::expm1(model.elastic_k * stretch[i]);
    }
    return f;
}

Vec measured_length(const ArmModel& model, const JointState& q, const Vec& tension) {
    const Vec geom = muscle_lengths_geom(model, q);
    const Vec geom0 = muscle_lengths_geom(model, JointState{});
    const Vec dn = elastic_stretch(model, tension);
    Vec l(geom.size(), 0.0);
    for (size_t i = 0; i < geom.size(); ++i) l[i] = (geom[i] - geom0[i]) + dn[i];
    return l;
}

}  // namespace pimbs
